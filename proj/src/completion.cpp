#include "aw4re/completion.hpp"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include "aw4re/error.hpp"
#include "aw4re/fill.hpp"
#include "aw4re/png_io.hpp"
#include "aw4re/serialization.hpp"

namespace aw4re {

namespace fs = std::filesystem;

namespace {

std::string numbered(const char* prefix, int t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%04d.png", prefix, t);
  return buf;
}

void check_sizes(const std::vector<PartialObservation>& partials) {
  for (const auto& p : partials) {
    if (!p.rgb.same_size(partials.front().rgb) || !p.support_mask.same_size(p.rgb)) {
      throw InvalidArgument("partial observations differ in size");
    }
  }
}

// Runs argv with a wall-clock limit. Returns the exit status.
int run_with_timeout(const std::vector<std::string>& argv, double timeout_seconds) {
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  const pid_t pid = fork();
  if (pid < 0) throw PluginError("fork failed");
  if (pid == 0) {
    setpgid(0, 0);
    execvp(args[0], args.data());
    _exit(127);
  }
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(timeout_seconds);
  int status = 0;
  for (auto wait = std::chrono::milliseconds(1);;) {
    const pid_t r = waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) throw PluginError("waitpid failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      throw PluginTimeout("plugin exceeded " + std::to_string(timeout_seconds) + " s");
    }
    std::this_thread::sleep_for(wait);
    wait = std::min(wait * 2, std::chrono::milliseconds(50));
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
}

class TempDir {
 public:
  explicit TempDir(const fs::path& parent, bool keep) : keep_(keep) {
    fs::path base = parent.empty() ? fs::temp_directory_path() : parent;
    fs::create_directories(base);
    std::string tmpl = (base / "aw4re-plugin-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw PluginError("cannot create " + tmpl);
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    if (!keep_) fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  bool keep_;
};

}  // namespace

std::vector<CompletedObservation> complete_baseline(
    const std::vector<PartialObservation>& partials) {
  std::vector<CompletedObservation> out;
  if (partials.empty()) return out;
  check_sizes(partials);
  const std::size_t n = partials.front().rgb.pixel_count();
  std::vector<char> prev_ok(n, 0);  // supported or propagated at t - 1

  for (std::size_t t = 0; t < partials.size(); ++t) {
    const auto& part = partials[t];
    MaskImage filled;
    const auto spatial = pull_push(to_float(part.rgb), part.support_mask, -1, filled);
    CompletedObservation c;
    c.rgb = part.rgb;
    c.support_mask = part.support_mask;
    c.source = "baseline";
    std::vector<char> ok(n, 0);
    for (std::size_t p = 0; p < n; ++p) {
      if (part.support_mask.data[p]) {
        ok[p] = 1;
        continue;
      }
      for (int ch = 0; ch < 3; ++ch) {
        const std::size_t k = p * 3 + ch;
        const int fill = filled.data[p] ? to_byte(spatial.data[k]) : 0;
        if (t > 0 && prev_ok[p]) {
          const int prev = out.back().rgb.data[k];
          c.rgb.data[k] =
              static_cast<std::uint8_t>(filled.data[p] ? (fill + prev + 1) / 2 : prev);
        } else {
          c.rgb.data[k] = static_cast<std::uint8_t>(fill);
        }
      }
      ok[p] = t > 0 && prev_ok[p];
    }
    prev_ok = std::move(ok);
    out.push_back(std::move(c));
  }
  return out;
}

void write_completion_request(const std::vector<PartialObservation>& partials,
                              const fs::path& request_dir) {
  fs::create_directories(request_dir);
  Json frames = Json::array();
  for (std::size_t t = 0; t < partials.size(); ++t) {
    const int index = static_cast<int>(t) + 1;
    write_png_rgb(request_dir / numbered("frame", index), partials[t].rgb);
    write_png_mask(request_dir / numbered("mask", index), partials[t].support_mask);
    frames.push_back({{"time", index},
                      {"frame", numbered("frame", index)},
                      {"mask", numbered("mask", index)},
                      {"support_density", partials[t].support_density}});
  }
  Json manifest = {{"format", "aw4re-completion-request"},
                   {"version", 1},
                   {"count", partials.size()},
                   {"width", partials.empty() ? 0 : partials.front().width()},
                   {"height", partials.empty() ? 0 : partials.front().height()},
                   {"frames", frames}};
  write_json_file(request_dir / "manifest.json", manifest);
}

std::vector<CompletedObservation> complete_external(
    const std::vector<PartialObservation>& partials, const PluginDescriptor& plugin) {
  if (partials.empty()) return {};
  check_sizes(partials);
  if (!(plugin.timeout_seconds > 0.0)) throw InvalidArgument("plugin timeout must be > 0");
  const std::string id =
      plugin.id.empty() ? plugin.executable.filename().string() : plugin.id;

  TempDir work(plugin.work_dir, plugin.keep_files);
  const fs::path request = work.path() / "request";
  const fs::path response = work.path() / "response";
  write_completion_request(partials, request);
  fs::create_directories(response);

  const int status = run_with_timeout(
      {plugin.executable.string(), request.string(), response.string()},
      plugin.timeout_seconds);
  if (status != 0) {
    throw PluginError("plugin '" + id + "' exited with status " + std::to_string(status));
  }

  const int count = static_cast<int>(partials.size());
  if (fs::exists(response / numbered("frame", count + 1))) {
    throw MalformedResponse("plugin '" + id + "' returned more than " +
                            std::to_string(count) + " frames");
  }
  std::vector<CompletedObservation> out;
  for (int t = 1; t <= count; ++t) {
    const fs::path file = response / numbered("frame", t);
    if (!fs::exists(file)) {
      throw MalformedResponse("plugin '" + id + "' did not write " + file.filename().string());
    }
    CompletedObservation c;
    try {
      c.rgb = read_png_rgb(file);
    } catch (const Error& e) {
      throw MalformedResponse(std::string("unreadable plugin frame: ") + e.what());
    }
    const auto& part = partials[t - 1];
    if (!c.rgb.same_size(part.rgb)) {
      throw MalformedResponse("plugin frame " + std::to_string(t) + " has wrong size");
    }
    if (plugin.strict) {
      for (std::size_t p = 0; p < part.rgb.pixel_count(); ++p) {
        if (!part.support_mask.data[p]) continue;
        for (int ch = 0; ch < 3; ++ch) {
          const int d = std::abs(int(c.rgb.data[p * 3 + ch]) - int(part.rgb.data[p * 3 + ch]));
          if (d > kEvidenceTolerance) {
            throw EvidenceViolation("plugin frame " + std::to_string(t) + " pixel (" +
                                    std::to_string(p % part.rgb.width) + "," +
                                    std::to_string(p / part.rgb.width) + ") moved by " +
                                    std::to_string(d) + "/255");
          }
        }
      }
    }
    c.support_mask = part.support_mask;
    c.source = "external:" + id;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace aw4re
