#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "aw4re/corpus.hpp"
#include "aw4re/scene.hpp"
#include "aw4re/trajectories.hpp"

namespace aw4re::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("aw4re_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline CameraRig small_rig(int width = 48, int height = 36) {
  CameraRig rig;
  rig.width = width;
  rig.height = height;
  return rig;
}

inline SceneConfig small_scene(int horizon = 6, int n_dynamic = 2) {
  SceneConfig c;
  c.horizon = horizon;
  c.n_dynamic = n_dynamic;
  return c;
}

inline std::vector<Frame> render_all(const SceneSpec& scene, const ActionSequence& actions) {
  std::vector<Frame> out;
  for (const auto& a : actions.actions) out.push_back(render_oracle(scene, a));
  return out;
}

inline EvidenceCorpus capture(const SceneSpec& scene, const ActionSequence& actions,
                              EvidenceCorpus base) {
  return base.add_iteration(actions, render_all(scene, actions));
}

inline EvidenceCorpus capture(const SceneSpec& scene, const ActionSequence& actions) {
  return capture(scene, actions, EvidenceCorpus(actions.horizon()));
}

}  // namespace aw4re::test
