#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aw4re/geometry.hpp"
#include "aw4re/image.hpp"

namespace aw4re {

// (iteration j, time i) of a corpus record.
struct RecordKey {
  int iteration = 1;
  int time = 1;
  auto operator<=>(const RecordKey&) const = default;
};

std::string to_string(const RecordKey& key);

struct EvidenceRecord {
  int iteration = 1;
  int time = 1;
  std::shared_ptr<const Frame> frame;
  CameraAction action;

  RecordKey key() const { return {iteration, time}; }
  bool usable_for_proxy() const { return frame && frame->has_depth(); }
};

// Append-only history of observations. Every add_iteration returns a new
// snapshot; existing snapshots never change and share frame storage.
class EvidenceCorpus {
 public:
  explicit EvidenceCorpus(int horizon);

  int horizon() const { return horizon_; }
  // Number of completed iterations (k - 1).
  int iteration_count() const {
    return static_cast<int>(iteration_actions_.size());
  }
  std::size_t size() const { return records_->size(); }
  bool empty() const { return records_->empty(); }

  const EvidenceRecord* find(const RecordKey& key) const;
  // Throws CorpusError when absent.
  const EvidenceRecord& at(const RecordKey& key) const;
  // Sorted by (iteration, time).
  std::vector<const EvidenceRecord*> records() const;
  // Full action sequence executed at iteration j (1-based).
  const ActionSequence& iteration_actions(int j) const;

  // Appends one iteration with a frame for every time step.
  EvidenceCorpus add_iteration(const ActionSequence& actions,
                               const std::vector<Frame>& frames) const;
  // Appends one iteration where std::nullopt marks an unobserved (masked)
  // time step; no record is stored for it.
  EvidenceCorpus add_iteration(const ActionSequence& actions,
                               const std::vector<std::optional<Frame>>& frames) const;

  // SHA-256 over indices, actions and all pixel data.
  std::string content_hash() const;

  bool operator==(const EvidenceCorpus& other) const;

 private:
  int horizon_;
  std::shared_ptr<const std::map<RecordKey, EvidenceRecord>> records_;
  std::vector<std::shared_ptr<const ActionSequence>> iteration_actions_;
};

// Directory layout: manifest.json plus, per record, an RGB PNG, an optional
// raw depth file, an optional 1-bit mask PNG and an action JSON.
void save_corpus(const EvidenceCorpus& corpus, const std::filesystem::path& dir);
// Throws CorpusError naming the offending record on any inconsistency.
EvidenceCorpus load_corpus(const std::filesystem::path& dir);

// Raw depth: "AWDEPTH1", u32 width, u32 height (little endian), then
// width*height little-endian float32 values row-major.
void write_depth_file(const std::filesystem::path& path, const DepthImage& depth);
DepthImage read_depth_file(const std::filesystem::path& path);

}  // namespace aw4re
