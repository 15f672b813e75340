#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "aw4re/corpus.hpp"
#include "aw4re/pipeline.hpp"
#include "aw4re/scene.hpp"
#include "aw4re/trajectories.hpp"
#include "json.hpp"

namespace aw4re {

enum class EnvMode { kReal, kSurrogate };

const char* to_string(EnvMode mode);
EnvMode env_mode_from_string(const std::string& s);

struct Episode;

// Task reward hook: (episode before the step, actions, observation).
using TaskReward =
    std::function<double(const Episode&, const ActionSequence&, const std::vector<Frame>&)>;

struct EnvConfig {
  SceneConfig scene;  // scene.horizon is the episode horizon T
  double gamma = 0.99;
  double lambda = 0.1;     // cost weight
  double cell_size = 0.5;  // meters
  int time_bin = 1;        // frames per coverage time bin
  EnvMode mode = EnvMode::kReal;
  PipelineConfig pipeline;
  CameraRig rig;
  TaskReward task_reward;  // 0 when empty

  int horizon() const { return scene.horizon; }
  void validate() const;
};

// 4D occupancy over the scene bounds: cell_size cubes times time bins.
class CoverageGrid {
 public:
  CoverageGrid() = default;
  CoverageGrid(const Vec3& lo, const Vec3& hi, double cell_size, int horizon, int time_bin);

  std::size_t total_cells() const { return cells_.size(); }
  std::size_t covered_cells() const { return covered_; }
  double coverage() const {
    return cells_.empty() ? 0.0 : double(covered_) / double(cells_.size());
  }
  // Cell index, or -1 outside the grid.
  long long cell_of(const Vec3& p, int t) const;
  // Marks the cell of p at t; true when it was not covered before.
  bool mark(const Vec3& p, int t);
  bool covered(long long cell) const { return cells_.at(cell) != 0; }
  bool operator==(const CoverageGrid&) const = default;

 private:
  Vec3 lo_ = Vec3::Zero();
  double cell_ = 1.0;
  int nx_ = 0, ny_ = 0, nz_ = 0, nt_ = 0;
  int time_bin_ = 1;
  std::vector<std::uint8_t> cells_;
  std::size_t covered_ = 0;
};

struct RewardBreakdown {
  double task = 0.0;
  double info_gain = 0.0;
  double cost = 0.0;
  double lambda = 0.0;
  double total = 0.0;  // task + info_gain - lambda * cost
};

struct StepRecord {
  int step = 0;
  int iteration = 1;  // k when the step ran
  EnvMode mode = EnvMode::kReal;
  std::string actions_hash;
  RewardBreakdown reward;
  double discount = 1.0;  // gamma^(k-1)
  double coverage = 0.0;  // committed coverage after the step
};

struct Episode {
  EnvConfig config;
  std::uint64_t seed = 0;
  SceneSpec scene;
  EvidenceCorpus corpus{1};
  CoverageGrid grid;
  int k = 1;
  std::vector<StepRecord> log;
};

struct StepResult {
  std::vector<Frame> observation;
  RewardBreakdown reward;
  // Surrogate steps only.
  std::optional<Prediction> prediction;
};

// Throws InvalidArgument for an invalid config.
Episode reset(const EnvConfig& config, std::uint64_t seed);

// Real mode renders the oracle, appends the iteration and commits coverage.
// Surrogate mode predicts from the current corpus and leaves the corpus,
// coverage and k unchanged. `mode` overrides config.mode.
StepResult step(Episode& episode, const ActionSequence& actions,
                std::optional<EnvMode> mode = std::nullopt);

// Newly covered cells when valid-depth pixels of `frames` are unprojected,
// over the total cell count. Nothing is committed.
double info_gain(const Episode& episode, const std::vector<Frame>& frames,
                 const ActionSequence& actions);

// Marks the cells of valid-depth pixels; returns the newly covered count.
std::size_t mark_frames(CoverageGrid& grid, const std::vector<Frame>& frames,
                        const ActionSequence& actions);

// Sum over t of center distance + geodesic rotation angle + |log fx ratio|
// against previous at t, or against actions at t - 1 without a previous
// sequence.
double action_cost(const ActionSequence& actions, const ActionSequence* previous = nullptr);

nlohmann::json step_record_to_json(const StepRecord& r);
// One JSON object per line.
void write_episode_log(const std::filesystem::path& path, const Episode& episode);

class Policy {
 public:
  virtual ~Policy() = default;
  virtual ActionSequence next(const Episode& episode) = 0;
};

// Replays the given sequences cyclically.
class ScriptedPolicy : public Policy {
 public:
  explicit ScriptedPolicy(std::vector<ActionSequence> script);
  ActionSequence next(const Episode& episode) override;

 private:
  std::vector<ActionSequence> script_;
  std::size_t cursor_ = 0;
};

// Seeded random orbits: radius, height, start azimuth, sweep and zoom.
class RandomPolicy : public Policy {
 public:
  RandomPolicy(std::uint64_t seed, CameraRig rig);
  ActionSequence next(const Episode& episode) override;

 private:
  std::mt19937_64 rng_;
  CameraRig rig_;
};

// Run config JSON: {"scene": {...}, "pipeline": {...}, "rig": {...},
// "env": {"gamma", "lambda", "cell_size", "time_bin", "mode"}}. Every section
// is optional; unknown keys throw InvalidArgument.
EnvConfig env_config_from_json(const nlohmann::json& j);
nlohmann::json env_config_to_json(const EnvConfig& config);

// reset, then `steps` steps of the policy.
Episode run_episode(const EnvConfig& config, std::uint64_t seed, Policy& policy, int steps);

}  // namespace aw4re
