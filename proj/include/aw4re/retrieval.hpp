#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "aw4re/corpus.hpp"
#include "aw4re/geometry.hpp"
#include "json.hpp"

namespace aw4re {

enum class SelectionMode {
  // The M highest-scoring records: exact optimum of the modular objective.
  kTopM,
  // Extension: greedy marginal gain, score times the fraction of query
  // frustum samples not yet covered by earlier picks.
  kCoverageGreedy,
};

struct RetrievalConfig {
  int budget = 8;                // M
  double temporal_scale = 15.0;  // tau, frames
  double w_geo = 0.6;
  double w_time = 0.2;
  double w_scale = 0.2;
  int frustum_samples = 1024;
  std::pair<double, double> depth_range{0.5, 30.0};
  SelectionMode mode = SelectionMode::kTopM;
  // Only records captured at the query time are candidates.
  bool time_local = false;
  std::uint64_t seed = kDefaultFrustumSeed;

  void validate() const;
};

struct RelevanceTerms {
  double geometric = 0.0;  // frustum overlap
  double temporal = 0.0;   // exp(-|i - t| / tau)
  double scale = 0.0;      // min(rho, 1 / rho) of pixel footprints
  double score = 0.0;
};

RelevanceTerms relevance_terms(const EvidenceRecord& record,
                               const CameraAction& query,
                               const RetrievalConfig& cfg);
double relevance(const EvidenceRecord& record, const CameraAction& query,
                 const RetrievalConfig& cfg);

struct ScoredIndex {
  RecordKey key;
  RelevanceTerms terms;
  double gain = 0.0;  // marginal gain at pick time (coverage mode)
};

struct EvidenceSelection {
  int query_time = 1;
  // At most M entries, ordered by nonincreasing score.
  std::vector<ScoredIndex> indices;
  std::vector<RecordKey> on_time;
  std::vector<RecordKey> off_time;
  // Ranked records passed over because they have no depth.
  std::vector<RecordKey> skipped_without_depth;

  std::vector<RecordKey> keys() const;
};

// Strict weak order used for ranking: higher score, then smaller |i - t|,
// then smaller j, then smaller i.
bool ranks_before(const ScoredIndex& a, const ScoredIndex& b, int query_time);

EvidenceSelection select_evidence(const EvidenceCorpus& corpus,
                                  const CameraAction& query,
                                  const RetrievalConfig& cfg);

// Splits keys into (i == t, i != t), preserving order.
std::pair<std::vector<RecordKey>, std::vector<RecordKey>> partition(
    const EvidenceSelection& selection);

nlohmann::json selection_to_json(const EvidenceSelection& selection);

const char* to_string(SelectionMode mode);
SelectionMode selection_mode_from_string(const std::string& s);

}  // namespace aw4re
