#include "aw4re/env.hpp"

#include <cmath>
#include <fstream>

#include "aw4re/error.hpp"
#include "aw4re/serialization.hpp"

namespace aw4re {

const char* to_string(EnvMode mode) {
  return mode == EnvMode::kReal ? "real" : "surrogate";
}

EnvMode env_mode_from_string(const std::string& s) {
  if (s == "real") return EnvMode::kReal;
  if (s == "surrogate") return EnvMode::kSurrogate;
  throw InvalidArgument("unknown env mode '" + s + "'");
}

void EnvConfig::validate() const {
  scene.validate();
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("gamma must be in (0, 1]");
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
  if (!(cell_size > 0.0)) throw InvalidArgument("cell_size must be > 0");
  if (time_bin < 1) throw InvalidArgument("time_bin must be >= 1");
  rig.intrinsics();
  pipeline.validate();
}

CoverageGrid::CoverageGrid(const Vec3& lo, const Vec3& hi, double cell_size, int horizon,
                           int time_bin)
    : lo_(lo), cell_(cell_size), time_bin_(time_bin) {
  if (!(cell_size > 0.0) || horizon < 1 || time_bin < 1) {
    throw InvalidArgument("invalid coverage grid parameters");
  }
  const Vec3 span = hi - lo;
  nx_ = std::max(1, static_cast<int>(std::ceil(span.x() / cell_size)));
  ny_ = std::max(1, static_cast<int>(std::ceil(span.y() / cell_size)));
  nz_ = std::max(1, static_cast<int>(std::ceil(span.z() / cell_size)));
  nt_ = (horizon + time_bin - 1) / time_bin;
  cells_.assign(static_cast<std::size_t>(nx_) * ny_ * nz_ * nt_, 0);
}

long long CoverageGrid::cell_of(const Vec3& p, int t) const {
  if (cells_.empty() || !p.allFinite()) return -1;
  const Vec3 q = (p - lo_) / cell_;
  const double fx = std::floor(q.x()), fy = std::floor(q.y()), fz = std::floor(q.z());
  if (fx < 0 || fy < 0 || fz < 0 || fx >= nx_ || fy >= ny_ || fz >= nz_) return -1;
  const int bin = (t - 1) / time_bin_;
  if (t < 1 || bin >= nt_) return -1;
  return ((static_cast<long long>(bin) * nz_ + static_cast<long long>(fz)) * ny_ +
          static_cast<long long>(fy)) *
             nx_ +
         static_cast<long long>(fx);
}

bool CoverageGrid::mark(const Vec3& p, int t) {
  const long long c = cell_of(p, t);
  if (c < 0 || cells_[c]) return false;
  cells_[c] = 1;
  ++covered_;
  return true;
}

std::size_t mark_frames(CoverageGrid& grid, const std::vector<Frame>& frames,
                        const ActionSequence& actions) {
  if (frames.size() != actions.actions.size()) {
    throw InvalidArgument("frame count differs from action count");
  }
  std::size_t fresh = 0;
  for (std::size_t n = 0; n < frames.size(); ++n) {
    const Frame& f = frames[n];
    const CameraAction& a = actions.actions[n];
    if (!f.depth) continue;
    const auto& depth = *f.depth;
    for (int v = 0; v < depth.height; ++v) {
      for (int u = 0; u < depth.width; ++u) {
        const double d = depth.at(u, v);
        if (!(d > a.intrinsics.near && d <= a.intrinsics.far)) continue;
        fresh += grid.mark(unproject(Vec2(u + 0.5, v + 0.5), d, a), a.time);
      }
    }
  }
  return fresh;
}

double info_gain(const Episode& episode, const std::vector<Frame>& frames,
                 const ActionSequence& actions) {
  CoverageGrid scratch = episode.grid;
  const std::size_t fresh = mark_frames(scratch, frames, actions);
  return scratch.total_cells() ? double(fresh) / double(scratch.total_cells()) : 0.0;
}

double action_cost(const ActionSequence& actions, const ActionSequence* previous) {
  if (previous && previous->horizon() != actions.horizon()) {
    throw InvalidArgument("previous action sequence has a different horizon");
  }
  double cost = 0.0;
  for (int t = 1; t <= actions.horizon(); ++t) {
    const CameraAction& a = actions.at_time(t);
    const CameraAction* b = previous ? &previous->at_time(t)
                                     : (t > 1 ? &actions.at_time(t - 1) : nullptr);
    if (!b) continue;
    cost += (a.pose.center() - b->pose.center()).norm();
    cost += rotation_angle(a.pose.rotation, b->pose.rotation);
    cost += std::abs(std::log(a.intrinsics.fx / b->intrinsics.fx));
  }
  return cost;
}

Episode reset(const EnvConfig& config, std::uint64_t seed) {
  config.validate();
  Episode ep;
  ep.config = config;
  ep.seed = seed;
  ep.scene = generate_scene(seed, config.scene);
  ep.corpus = EvidenceCorpus(config.horizon());
  ep.grid = CoverageGrid(ep.scene.bounds_min, ep.scene.bounds_max, config.cell_size,
                         config.horizon(), config.time_bin);
  ep.k = 1;
  return ep;
}

StepResult step(Episode& episode, const ActionSequence& actions, std::optional<EnvMode> mode) {
  const EnvConfig& cfg = episode.config;
  if (actions.horizon() != cfg.horizon()) {
    throw InvalidArgument("action sequence length " + std::to_string(actions.horizon()) +
                          " does not match the horizon " + std::to_string(cfg.horizon()));
  }
  actions.validate();
  const EnvMode m = mode.value_or(cfg.mode);

  StepResult result;
  const int iterations = episode.corpus.iteration_count();
  const ActionSequence* previous =
      iterations > 0 ? &episode.corpus.iteration_actions(iterations) : nullptr;

  RewardBreakdown r;
  r.lambda = cfg.lambda;
  r.cost = action_cost(actions, previous);

  if (m == EnvMode::kReal) {
    for (const auto& a : actions.actions) {
      result.observation.push_back(render_oracle(episode.scene, a));
    }
    r.task = cfg.task_reward ? cfg.task_reward(episode, actions, result.observation) : 0.0;
    const std::size_t fresh = mark_frames(episode.grid, result.observation, actions);
    r.info_gain = episode.grid.total_cells()
                      ? double(fresh) / double(episode.grid.total_cells())
                      : 0.0;
  } else {
    Prediction pred = predict(episode.corpus, actions, cfg.pipeline);
    for (std::size_t n = 0; n < pred.completed.size(); ++n) {
      const auto& part = pred.partials[n];
      Frame f;
      f.rgb = pred.completed[n].rgb;
      DepthImage depth = part.depth_buffer;
      for (std::size_t p = 0; p < depth.data.size(); ++p) {
        if (!part.support_mask.data[p]) depth.data[p] = 0.0f;
      }
      f.depth = std::move(depth);
      result.observation.push_back(std::move(f));
    }
    r.task = cfg.task_reward ? cfg.task_reward(episode, actions, result.observation) : 0.0;
    r.info_gain = info_gain(episode, result.observation, actions);
    result.prediction = std::move(pred);
  }
  r.total = r.task + r.info_gain - r.lambda * r.cost;
  result.reward = r;

  StepRecord rec;
  rec.step = static_cast<int>(episode.log.size()) + 1;
  rec.iteration = episode.k;
  rec.mode = m;
  rec.actions_hash = json_hash(actions_to_json(actions));
  rec.reward = r;
  rec.discount = std::pow(cfg.gamma, episode.k - 1);

  if (m == EnvMode::kReal) {
    episode.corpus = episode.corpus.add_iteration(actions, result.observation);
    episode.k = episode.corpus.iteration_count() + 1;
  }
  rec.coverage = episode.grid.coverage();
  episode.log.push_back(rec);
  return result;
}

nlohmann::json step_record_to_json(const StepRecord& r) {
  return {{"step", r.step},
          {"iteration", r.iteration},
          {"mode", to_string(r.mode)},
          {"actions_sha256", r.actions_hash},
          {"reward",
           {{"task", r.reward.task},
            {"info_gain", r.reward.info_gain},
            {"cost", r.reward.cost},
            {"lambda", r.reward.lambda},
            {"total", r.reward.total}}},
          {"discount", r.discount},
          {"discounted_total", r.discount * r.reward.total},
          {"coverage", r.coverage},
          {"info_gain_estimator", "coverage-grid surrogate"},
          {"cost_model", "pose + rotation + log-zoom surrogate"}};
}

void write_episode_log(const std::filesystem::path& path, const Episode& episode) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : episode.log) out << step_record_to_json(r).dump() << '\n';
}

ScriptedPolicy::ScriptedPolicy(std::vector<ActionSequence> script)
    : script_(std::move(script)) {
  if (script_.empty()) throw InvalidArgument("scripted policy needs at least one sequence");
}

ActionSequence ScriptedPolicy::next(const Episode&) {
  const ActionSequence& a = script_[cursor_ % script_.size()];
  ++cursor_;
  return a;
}

RandomPolicy::RandomPolicy(std::uint64_t seed, CameraRig rig) : rng_(seed), rig_(rig) {}

ActionSequence RandomPolicy::next(const Episode& episode) {
  std::uniform_real_distribution<double> radius(7.0, 11.0), height(3.0, 7.0),
      start(0.0, 360.0), sweep(-90.0, 90.0), zoom_end(1.0, 2.0);
  const double r = radius(rng_), h = height(rng_), s = start(rng_), w = sweep(rng_);
  const double z = zoom_end(rng_);
  return zoom(orbit(episode.config.horizon(), rig_, r, h, s, w), 1.0, z);
}

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys,
                    const std::string& where) {
  if (!j.is_object()) throw InvalidArgument(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known |= (k == key);
    if (!known) throw InvalidArgument("unknown key '" + k + "' in " + where);
  }
}

}  // namespace

EnvConfig env_config_from_json(const nlohmann::json& j) {
  EnvConfig cfg;
  reject_unknown(j, {"scene", "pipeline", "rig", "env"}, "run config");
  try {
    if (j.contains("scene")) cfg.scene = j.at("scene").get<SceneConfig>();
    if (j.contains("pipeline")) cfg.pipeline = pipeline_config_from_json(j.at("pipeline"));
    if (j.contains("rig")) {
      const auto& r = j.at("rig");
      reject_unknown(r, {"width", "height", "hfov_deg", "near", "far"}, "rig config");
      cfg.rig.width = r.value("width", cfg.rig.width);
      cfg.rig.height = r.value("height", cfg.rig.height);
      cfg.rig.hfov_deg = r.value("hfov_deg", cfg.rig.hfov_deg);
      cfg.rig.near = r.value("near", cfg.rig.near);
      cfg.rig.far = r.value("far", cfg.rig.far);
    }
    if (j.contains("env")) {
      const auto& e = j.at("env");
      reject_unknown(e, {"gamma", "lambda", "cell_size", "time_bin", "mode"}, "env config");
      cfg.gamma = e.value("gamma", cfg.gamma);
      cfg.lambda = e.value("lambda", cfg.lambda);
      cfg.cell_size = e.value("cell_size", cfg.cell_size);
      cfg.time_bin = e.value("time_bin", cfg.time_bin);
      if (e.contains("mode")) cfg.mode = env_mode_from_string(e.at("mode").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("run config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json env_config_to_json(const EnvConfig& c) {
  return {{"scene", c.scene},
          {"pipeline", pipeline_config_to_json(c.pipeline)},
          {"rig",
           {{"width", c.rig.width},
            {"height", c.rig.height},
            {"hfov_deg", c.rig.hfov_deg},
            {"near", c.rig.near},
            {"far", c.rig.far}}},
          {"env",
           {{"gamma", c.gamma},
            {"lambda", c.lambda},
            {"cell_size", c.cell_size},
            {"time_bin", c.time_bin},
            {"mode", to_string(c.mode)}}}};
}

Episode run_episode(const EnvConfig& config, std::uint64_t seed, Policy& policy, int steps) {
  Episode ep = reset(config, seed);
  for (int n = 0; n < steps; ++n) step(ep, policy.next(ep));
  return ep;
}

}  // namespace aw4re
