#include "aw4re/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include "aw4re/error.hpp"

namespace aw4re {

namespace {

double mean_focal(const CameraIntrinsics& k) { return 0.5 * (k.fx + k.fy); }

// Mean valid depth of the record, or the geometric middle of the depth
// range when it has none.
double mean_scene_depth(const EvidenceRecord& record, const RetrievalConfig& cfg) {
  if (record.frame && record.frame->depth) {
    double sum = 0.0;
    std::size_t n = 0;
    for (float d : record.frame->depth->data) {
      if (d > 0.0f) {
        sum += d;
        ++n;
      }
    }
    if (n > 0) return sum / static_cast<double>(n);
  }
  return std::sqrt(cfg.depth_range.first * cfg.depth_range.second);
}

double scale_term(const EvidenceRecord& record, const CameraAction& query,
                  const RetrievalConfig& cfg) {
  const double depth = mean_scene_depth(record, cfg);
  const Vec3 cand_center = record.action.pose.center();
  const Vec3 axis = record.action.pose.rotation.row(2).transpose();
  const Vec3 anchor = cand_center + depth * axis;
  const double query_dist = (anchor - query.pose.center()).norm();
  if (!(query_dist > 1e-12)) return 0.0;
  // Meters per pixel at the anchor for each camera.
  const double cand_footprint = depth / mean_focal(record.action.intrinsics);
  const double query_footprint = query_dist / mean_focal(query.intrinsics);
  const double rho = cand_footprint / query_footprint;
  return std::min(rho, 1.0 / rho);
}

RelevanceTerms score_with_samples(const EvidenceRecord& record,
                                  const CameraAction& query,
                                  const RetrievalConfig& cfg,
                                  const std::vector<Vec3>& samples,
                                  std::vector<char>* covered) {
  RelevanceTerms r;
  std::size_t inside = 0;
  if (covered) covered->assign(samples.size(), 0);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const bool seen = sees_point(record.action, samples[s]);
    inside += seen;
    if (covered) (*covered)[s] = seen;
  }
  r.geometric = samples.empty() ? 0.0
                                : static_cast<double>(inside) /
                                      static_cast<double>(samples.size());
  r.temporal = std::exp(-std::abs(record.time - query.time) / cfg.temporal_scale);
  r.scale = scale_term(record, query, cfg);
  r.score = cfg.w_geo * r.geometric + cfg.w_time * r.temporal + cfg.w_scale * r.scale;
  return r;
}

}  // namespace

void RetrievalConfig::validate() const {
  if (budget < 1) throw InvalidArgument("retrieval budget must be >= 1");
  if (!(temporal_scale > 0.0)) throw InvalidArgument("temporal scale must be > 0");
  if (w_geo < 0 || w_time < 0 || w_scale < 0) {
    throw InvalidArgument("retrieval weights must be nonnegative");
  }
  if (std::abs(w_geo + w_time + w_scale - 1.0) > 1e-9) {
    throw InvalidArgument("retrieval weights must sum to 1");
  }
  if (frustum_samples < 1) throw InvalidArgument("frustum samples must be >= 1");
  if (!(depth_range.first > 0.0) || !(depth_range.second > depth_range.first)) {
    throw InvalidArgument("depth range must satisfy 0 < lo < hi");
  }
}

RelevanceTerms relevance_terms(const EvidenceRecord& record,
                               const CameraAction& query,
                               const RetrievalConfig& cfg) {
  const auto samples =
      sample_frustum(query, cfg.frustum_samples, cfg.depth_range, cfg.seed);
  return score_with_samples(record, query, cfg, samples, nullptr);
}

double relevance(const EvidenceRecord& record, const CameraAction& query,
                 const RetrievalConfig& cfg) {
  return relevance_terms(record, query, cfg).score;
}

std::vector<RecordKey> EvidenceSelection::keys() const {
  std::vector<RecordKey> out;
  out.reserve(indices.size());
  for (const auto& s : indices) out.push_back(s.key);
  return out;
}

bool ranks_before(const ScoredIndex& a, const ScoredIndex& b, int query_time) {
  if (a.terms.score != b.terms.score) return a.terms.score > b.terms.score;
  const int da = std::abs(a.key.time - query_time);
  const int db = std::abs(b.key.time - query_time);
  if (da != db) return da < db;
  return a.key < b.key;
}

EvidenceSelection select_evidence(const EvidenceCorpus& corpus,
                                  const CameraAction& query,
                                  const RetrievalConfig& cfg) {
  cfg.validate();
  EvidenceSelection sel;
  sel.query_time = query.time;

  const auto samples =
      sample_frustum(query, cfg.frustum_samples, cfg.depth_range, cfg.seed);
  const bool greedy = cfg.mode == SelectionMode::kCoverageGreedy;

  std::vector<ScoredIndex> ranked;
  std::vector<std::vector<char>> coverage;
  std::vector<bool> usable;
  for (const auto* rec : corpus.records()) {
    if (cfg.time_local && rec->time != query.time) continue;
    ScoredIndex s;
    s.key = rec->key();
    std::vector<char> cov;
    s.terms = score_with_samples(*rec, query, cfg, samples, greedy ? &cov : nullptr);
    s.gain = s.terms.score;
    ranked.push_back(s);
    coverage.push_back(std::move(cov));
    usable.push_back(rec->usable_for_proxy());
  }

  std::vector<std::size_t> order(ranked.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ranks_before(ranked[a], ranked[b], query.time);
  });

  const std::size_t budget = static_cast<std::size_t>(cfg.budget);
  if (!greedy) {
    for (std::size_t idx : order) {
      if (sel.indices.size() >= budget) break;
      if (!usable[idx]) {
        sel.skipped_without_depth.push_back(ranked[idx].key);
        continue;
      }
      sel.indices.push_back(ranked[idx]);
    }
  } else {
    std::vector<char> taken(ranked.size(), 0);
    std::vector<char> covered(samples.size(), 0);
    for (std::size_t idx : order) {
      if (!usable[idx]) {
        sel.skipped_without_depth.push_back(ranked[idx].key);
        taken[idx] = 1;
      }
    }
    while (sel.indices.size() < budget) {
      std::size_t best = ranked.size();
      double best_gain = 0.0;
      // `order` is the ranking, so the first strict maximum wins ties.
      for (std::size_t idx : order) {
        if (taken[idx]) continue;
        std::size_t fresh = 0;
        for (std::size_t s = 0; s < samples.size(); ++s) {
          fresh += coverage[idx][s] && !covered[s];
        }
        const double frac = samples.empty() ? 0.0
                                            : static_cast<double>(fresh) /
                                                  static_cast<double>(samples.size());
        const double gain = ranked[idx].terms.score * frac;
        if (best == ranked.size() || gain > best_gain) {
          best = idx;
          best_gain = gain;
        }
      }
      if (best == ranked.size() || best_gain < 1e-12) break;
      taken[best] = 1;
      for (std::size_t s = 0; s < samples.size(); ++s) {
        if (coverage[best][s]) covered[s] = 1;
      }
      ScoredIndex pick = ranked[best];
      pick.gain = best_gain;
      sel.indices.push_back(pick);
    }
    std::sort(sel.indices.begin(), sel.indices.end(),
              [&](const ScoredIndex& a, const ScoredIndex& b) {
                return ranks_before(a, b, query.time);
              });
  }

  auto [on, off] = partition(sel);
  sel.on_time = std::move(on);
  sel.off_time = std::move(off);
  return sel;
}

std::pair<std::vector<RecordKey>, std::vector<RecordKey>> partition(
    const EvidenceSelection& selection) {
  std::vector<RecordKey> on, off;
  for (const auto& s : selection.indices) {
    (s.key.time == selection.query_time ? on : off).push_back(s.key);
  }
  return {on, off};
}

nlohmann::json selection_to_json(const EvidenceSelection& selection) {
  using nlohmann::json;
  auto key_json = [](const RecordKey& k) {
    return json{{"iteration", k.iteration}, {"time", k.time}};
  };
  json indices = json::array();
  for (const auto& s : selection.indices) {
    indices.push_back({{"iteration", s.key.iteration},
                       {"time", s.key.time},
                       {"score", s.terms.score},
                       {"geometric", s.terms.geometric},
                       {"temporal", s.terms.temporal},
                       {"scale", s.terms.scale},
                       {"gain", s.gain}});
  }
  json on = json::array(), off = json::array(), skipped = json::array();
  for (const auto& k : selection.on_time) on.push_back(key_json(k));
  for (const auto& k : selection.off_time) off.push_back(key_json(k));
  for (const auto& k : selection.skipped_without_depth) skipped.push_back(key_json(k));
  return json{{"query_time", selection.query_time},
              {"indices", indices},
              {"on_time", on},
              {"off_time", off},
              {"skipped_without_depth", skipped}};
}

const char* to_string(SelectionMode mode) {
  return mode == SelectionMode::kTopM ? "top_m" : "coverage_greedy";
}

SelectionMode selection_mode_from_string(const std::string& s) {
  if (s == "top_m") return SelectionMode::kTopM;
  if (s == "coverage_greedy") return SelectionMode::kCoverageGreedy;
  throw InvalidArgument("unknown selection mode '" + s + "'");
}

}  // namespace aw4re
