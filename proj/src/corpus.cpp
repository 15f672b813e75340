#include "aw4re/corpus.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstring>
#include <fstream>
#include <set>

#include "aw4re/error.hpp"
#include "aw4re/png_io.hpp"
#include "aw4re/serialization.hpp"

namespace aw4re {

namespace fs = std::filesystem;

namespace {

constexpr char kDepthMagic[8] = {'A', 'W', 'D', 'E', 'P', 'T', 'H', '1'};
constexpr int kFormatVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void check_frame(const Frame& frame, const CameraAction& action,
                 const std::string& where) {
  const auto& k = action.intrinsics;
  if (!frame.rgb.same_size(k.width, k.height)) {
    throw InvalidArgument(where + ": frame is " + std::to_string(frame.width()) +
                          "x" + std::to_string(frame.height()) +
                          " but action expects " + std::to_string(k.width) + "x" +
                          std::to_string(k.height));
  }
  if (frame.depth && !frame.depth->same_size(k.width, k.height)) {
    throw InvalidArgument(where + ": depth size mismatch");
  }
  if (frame.dynamic_mask && !frame.dynamic_mask->same_size(k.width, k.height)) {
    throw InvalidArgument(where + ": mask size mismatch");
  }
}

// Incremental SHA-256.
class Hasher {
 public:
  Hasher() : ctx_(EVP_MD_CTX_new()) { EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr); }
  ~Hasher() { EVP_MD_CTX_free(ctx_); }
  Hasher(const Hasher&) = delete;
  Hasher& operator=(const Hasher&) = delete;

  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_, data, n); }
  void update(const std::string& s) { update(s.data(), s.size()); }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> d{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, d.data(), &len);
    return to_hex(d.data(), len);
  }

 private:
  static std::string to_hex(const unsigned char* d, unsigned int len) {
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int k = 0; k < len; ++k) {
      out.push_back(hex[d[k] >> 4]);
      out.push_back(hex[d[k] & 15]);
    }
    return out;
  }
  EVP_MD_CTX* ctx_;
};

std::string record_stem(const RecordKey& key) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "j%04d_t%04d", key.iteration, key.time);
  return buf;
}

}  // namespace

std::string to_string(const RecordKey& key) {
  return "(j=" + std::to_string(key.iteration) + ",i=" + std::to_string(key.time) +
         ")";
}

EvidenceCorpus::EvidenceCorpus(int horizon)
    : horizon_(horizon),
      records_(std::make_shared<const std::map<RecordKey, EvidenceRecord>>()) {
  if (horizon < 1) throw InvalidArgument("corpus horizon must be >= 1");
}

const EvidenceRecord* EvidenceCorpus::find(const RecordKey& key) const {
  auto it = records_->find(key);
  return it == records_->end() ? nullptr : &it->second;
}

const EvidenceRecord& EvidenceCorpus::at(const RecordKey& key) const {
  const auto* rec = find(key);
  if (!rec) throw CorpusError("no record " + to_string(key));
  return *rec;
}

std::vector<const EvidenceRecord*> EvidenceCorpus::records() const {
  std::vector<const EvidenceRecord*> out;
  out.reserve(records_->size());
  for (const auto& [_, rec] : *records_) out.push_back(&rec);
  return out;
}

const ActionSequence& EvidenceCorpus::iteration_actions(int j) const {
  if (j < 1 || j > iteration_count()) {
    throw CorpusError("no iteration " + std::to_string(j));
  }
  return *iteration_actions_[j - 1];
}

EvidenceCorpus EvidenceCorpus::add_iteration(const ActionSequence& actions,
                                             const std::vector<Frame>& frames) const {
  std::vector<std::optional<Frame>> wrapped(frames.begin(), frames.end());
  return add_iteration(actions, wrapped);
}

EvidenceCorpus EvidenceCorpus::add_iteration(
    const ActionSequence& actions,
    const std::vector<std::optional<Frame>>& frames) const {
  if (actions.horizon() != horizon_) {
    throw InvalidArgument("action sequence length " +
                          std::to_string(actions.horizon()) +
                          " does not match corpus horizon " +
                          std::to_string(horizon_));
  }
  if (static_cast<int>(frames.size()) != horizon_) {
    throw InvalidArgument("got " + std::to_string(frames.size()) +
                          " frames for horizon " + std::to_string(horizon_));
  }
  actions.validate();
  const int j = iteration_count() + 1;
  auto next = std::make_shared<std::map<RecordKey, EvidenceRecord>>(*records_);
  for (int t = 1; t <= horizon_; ++t) {
    const auto& frame = frames[t - 1];
    if (!frame) continue;
    const RecordKey key{j, t};
    check_frame(*frame, actions.at_time(t), "record " + to_string(key));
    EvidenceRecord rec;
    rec.iteration = j;
    rec.time = t;
    rec.frame = std::make_shared<const Frame>(*frame);
    rec.action = actions.at_time(t);
    next->emplace(key, std::move(rec));
  }
  EvidenceCorpus out(*this);
  out.records_ = std::move(next);
  out.iteration_actions_.push_back(std::make_shared<const ActionSequence>(actions));
  return out;
}

std::string EvidenceCorpus::content_hash() const {
  Hasher h;
  h.update("horizon=" + std::to_string(horizon_) + ";");
  for (const auto& seq : iteration_actions_) h.update(actions_to_json(*seq).dump());
  for (const auto& [key, rec] : *records_) {
    h.update(to_string(key));
    h.update(Json(rec.action).dump());
    const Frame& f = *rec.frame;
    h.update(f.rgb.data.data(), f.rgb.data.size());
    h.update(f.depth ? "D" : "-");
    if (f.depth) h.update(f.depth->data.data(), f.depth->data.size() * sizeof(float));
    h.update(f.dynamic_mask ? "M" : "-");
    if (f.dynamic_mask) h.update(f.dynamic_mask->data.data(), f.dynamic_mask->data.size());
  }
  return h.hex();
}

bool EvidenceCorpus::operator==(const EvidenceCorpus& other) const {
  if (horizon_ != other.horizon_ || size() != other.size() ||
      iteration_count() != other.iteration_count()) {
    return false;
  }
  for (int j = 0; j < iteration_count(); ++j) {
    if (!(*iteration_actions_[j] == *other.iteration_actions_[j])) return false;
  }
  auto a = records_->begin();
  auto b = other.records_->begin();
  for (; a != records_->end(); ++a, ++b) {
    if (a->first != b->first || !(a->second.action == b->second.action) ||
        !(*a->second.frame == *b->second.frame)) {
      return false;
    }
  }
  return true;
}

void write_depth_file(const fs::path& path, const DepthImage& depth) {
  std::string bytes(kDepthMagic, sizeof(kDepthMagic));
  put_u32(bytes, static_cast<std::uint32_t>(depth.width));
  put_u32(bytes, static_cast<std::uint32_t>(depth.height));
  bytes.reserve(bytes.size() + depth.data.size() * 4);
  for (float v : depth.data) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(bytes, bits);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

DepthImage read_depth_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open depth file " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kDepthMagic, 8) != 0) {
    throw CorpusError("depth file " + path.string() + " has a bad header");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t w = get_u32(p + 8);
  const std::uint32_t h = get_u32(p + 12);
  const std::size_t expected = 16 + static_cast<std::size_t>(w) * h * 4;
  if (bytes.size() != expected) {
    throw CorpusError("depth file " + path.string() + " is truncated: " +
                      std::to_string(bytes.size()) + " bytes, expected " +
                      std::to_string(expected));
  }
  DepthImage depth(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t k = 0; k < depth.data.size(); ++k) {
    const std::uint32_t bits = get_u32(p + 16 + 4 * k);
    std::memcpy(&depth.data[k], &bits, 4);
  }
  return depth;
}

void save_corpus(const EvidenceCorpus& corpus, const fs::path& dir) {
  fs::create_directories(dir);
  Json manifest;
  manifest["format"] = "aw4re-corpus";
  manifest["version"] = kFormatVersion;
  manifest["horizon"] = corpus.horizon();
  Json iterations = Json::array();
  for (int j = 1; j <= corpus.iteration_count(); ++j) {
    char name[40];
    std::snprintf(name, sizeof(name), "iteration_%04d_actions.json", j);
    write_json_file(dir / name, actions_to_json(corpus.iteration_actions(j)));
    iterations.push_back({{"index", j},
                          {"actions", name},
                          {"actions_sha256", sha256_file(dir / name)}});
  }
  manifest["iterations"] = iterations;

  Json records = Json::array();
  for (const auto* rec : corpus.records()) {
    const std::string stem = record_stem(rec->key());
    Json entry{{"iteration", rec->iteration}, {"time", rec->time}};
    Json sums;
    const std::string rgb = stem + "_rgb.png";
    write_png_rgb(dir / rgb, rec->frame->rgb);
    entry["rgb"] = rgb;
    sums["rgb"] = sha256_file(dir / rgb);
    if (rec->frame->depth) {
      const std::string depth = stem + "_depth.bin";
      write_depth_file(dir / depth, *rec->frame->depth);
      entry["depth"] = depth;
      sums["depth"] = sha256_file(dir / depth);
    } else {
      entry["depth"] = nullptr;
    }
    if (rec->frame->dynamic_mask) {
      const std::string mask = stem + "_mask.png";
      write_png_mask(dir / mask, *rec->frame->dynamic_mask);
      entry["mask"] = mask;
      sums["mask"] = sha256_file(dir / mask);
    } else {
      entry["mask"] = nullptr;
    }
    const std::string action = stem + "_action.json";
    write_json_file(dir / action, Json(rec->action));
    entry["action"] = action;
    sums["action"] = sha256_file(dir / action);
    entry["sha256"] = sums;
    records.push_back(entry);
  }
  manifest["records"] = records;
  write_json_file(dir / "manifest.json", manifest);
}

EvidenceCorpus load_corpus(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) {
    throw CorpusError("missing manifest " + manifest_path.string());
  }
  Json manifest;
  try {
    manifest = read_json_file(manifest_path);
  } catch (const Error& e) {
    throw CorpusError(std::string("corrupt manifest: ") + e.what());
  }

  auto fail = [](const std::string& where, const std::string& msg) -> CorpusError {
    return CorpusError(where + ": " + msg);
  };

  try {
    if (manifest.value("format", "") != "aw4re-corpus") {
      throw CorpusError("corrupt manifest: not an aw4re corpus");
    }
    const int horizon = manifest.at("horizon").get<int>();
    if (horizon < 1) throw CorpusError("corrupt manifest: horizon < 1");

    auto verify = [&](const Json& sums, const char* field, const fs::path& file,
                      const std::string& where) {
      if (!fs::exists(file)) throw fail(where, "missing file " + file.string());
      if (sums.is_object() && sums.contains(field)) {
        if (sha256_file(file) != sums.at(field).get<std::string>()) {
          throw fail(where, std::string("checksum mismatch for ") + field +
                                " file " + file.filename().string());
        }
      }
    };

    // Iteration actions, when listed.
    std::map<int, ActionSequence> iteration_actions;
    int max_iteration = 0;
    for (const auto& it : manifest.value("iterations", Json::array())) {
      const int j = it.at("index").get<int>();
      max_iteration = std::max(max_iteration, j);
      if (it.contains("actions") && !it.at("actions").is_null()) {
        const fs::path file = dir / it.at("actions").get<std::string>();
        const std::string where = "iteration " + std::to_string(j);
        Json sums;
        if (it.contains("actions_sha256")) sums["actions"] = it.at("actions_sha256");
        verify(sums, "actions", file, where);
        iteration_actions[j] = actions_from_json(read_json_file(file));
      }
    }

    std::map<RecordKey, std::pair<CameraAction, Frame>> loaded;
    for (const auto& entry : manifest.at("records")) {
      const RecordKey key{entry.at("iteration").get<int>(),
                          entry.at("time").get<int>()};
      const std::string where = "record " + to_string(key);
      if (key.iteration < 1) throw fail(where, "iteration must be >= 1");
      if (key.time < 1 || key.time > horizon) throw fail(where, "time outside horizon");
      if (loaded.count(key)) throw fail(where, "duplicate record");
      max_iteration = std::max(max_iteration, key.iteration);
      const Json sums = entry.value("sha256", Json::object());

      const fs::path action_file = dir / entry.at("action").get<std::string>();
      verify(sums, "action", action_file, where);
      CameraAction action;
      try {
        action = read_json_file(action_file).get<CameraAction>();
      } catch (const Error& e) {
        throw fail(where, std::string("bad action: ") + e.what());
      }
      if (action.time != key.time) throw fail(where, "action time mismatch");

      Frame frame;
      const fs::path rgb_file = dir / entry.at("rgb").get<std::string>();
      verify(sums, "rgb", rgb_file, where);
      try {
        frame.rgb = read_png_rgb(rgb_file);
      } catch (const Error& e) {
        throw fail(where, e.what());
      }
      if (entry.contains("depth") && !entry.at("depth").is_null()) {
        const fs::path depth_file = dir / entry.at("depth").get<std::string>();
        verify(sums, "depth", depth_file, where);
        try {
          frame.depth = read_depth_file(depth_file);
        } catch (const Error& e) {
          throw fail(where, e.what());
        }
      }
      if (entry.contains("mask") && !entry.at("mask").is_null()) {
        const fs::path mask_file = dir / entry.at("mask").get<std::string>();
        verify(sums, "mask", mask_file, where);
        try {
          frame.dynamic_mask = read_png_mask(mask_file);
        } catch (const Error& e) {
          throw fail(where, e.what());
        }
      }
      try {
        check_frame(frame, action, where);
      } catch (const InvalidArgument& e) {
        throw CorpusError(e.what());
      }
      loaded.emplace(key, std::make_pair(action, std::move(frame)));
    }

    // Rebuild snapshots iteration by iteration.
    EvidenceCorpus corpus(horizon);
    for (int j = 1; j <= max_iteration; ++j) {
      ActionSequence actions;
      auto listed = iteration_actions.find(j);
      std::vector<std::optional<Frame>> frames(horizon);
      for (int t = 1; t <= horizon; ++t) {
        auto rec = loaded.find({j, t});
        if (rec != loaded.end()) frames[t - 1] = rec->second.second;
      }
      if (listed != iteration_actions.end()) {
        actions = listed->second;
        for (int t = 1; t <= horizon; ++t) {
          auto rec = loaded.find({j, t});
          if (rec != loaded.end() && !(rec->second.first == actions.at_time(t))) {
            throw fail("record " + to_string({j, t}),
                       "action disagrees with iteration action list");
          }
        }
      } else {
        // Unobserved steps without an action list reuse the nearest observed
        // action of the iteration.
        const CameraAction* fallback = nullptr;
        for (int t = 1; t <= horizon && !fallback; ++t) {
          auto rec = loaded.find({j, t});
          if (rec != loaded.end()) fallback = &rec->second.first;
        }
        if (!fallback) throw CorpusError("iteration " + std::to_string(j) + " is empty");
        for (int t = 1; t <= horizon; ++t) {
          auto rec = loaded.find({j, t});
          if (rec != loaded.end()) fallback = &rec->second.first;
          CameraAction a = *fallback;
          a.time = t;
          actions.actions.push_back(a);
        }
      }
      try {
        corpus = corpus.add_iteration(actions, frames);
      } catch (const InvalidArgument& e) {
        throw CorpusError("iteration " + std::to_string(j) + ": " + e.what());
      }
    }
    return corpus;
  } catch (const Json::exception& e) {
    throw CorpusError(std::string("corrupt manifest: ") + e.what());
  }
}

}  // namespace aw4re
