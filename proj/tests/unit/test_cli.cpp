#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "aw4re/cli.hpp"
#include "aw4re/corpus.hpp"
#include "aw4re/error.hpp"
#include "aw4re/metrics.hpp"
#include "aw4re/pipeline.hpp"
#include "aw4re/serialization.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace aw4re;
namespace fs = std::filesystem;

namespace {

const std::string kTinyConfig = std::string(AW4RE_FIXTURE_DIR) + "/tiny_config.json";

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "aw4re");
  return run_cli(args);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Every file under `dir` except the run manifest, which carries wall time.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == "run_manifest.json") continue;
    out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

std::size_t manifests_in(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    n += e.path().filename() == "run_manifest.json";
  }
  return n;
}

}  // namespace

TEST_CASE("capture is deterministic") {
  test::TempDir dir("cli_capture");
  REQUIRE(cli({"capture", "--config", kTinyConfig, "--seed", "7", "--out", (dir / "a").string()}) ==
          kExitOk);
  REQUIRE(cli({"capture", "--config", kTinyConfig, "--seed", "7", "--out", (dir / "b").string()}) ==
          kExitOk);
  const auto a = tree(dir / "a"), b = tree(dir / "b");
  CHECK(a.size() > 5);
  CHECK(a == b);
  CHECK(load_corpus(dir / "a" / "corpus").content_hash() ==
        load_corpus(dir / "b" / "corpus").content_hash());
  CHECK(manifests_in(dir / "a") == 1);
  const Json m = read_json_file(dir / "a" / "run_manifest.json");
  CHECK(m.at("command") == "capture");
  CHECK(m.at("seed") == 7);
}

TEST_CASE("query and eval") {
  test::TempDir dir("cli_query");
  const std::string cap = (dir / "cap").string();
  REQUIRE(cli({"capture", "--config", kTinyConfig, "--seed", "3", "--out", cap}) == kExitOk);
  const std::string q = (dir / "q").string();
  REQUIRE(cli({"query", "--config", kTinyConfig, "--corpus", cap + "/corpus", "--out", q}) ==
          kExitOk);
  CHECK(fs::exists(dir / "q" / "completed" / "frame_0003.png"));
  CHECK(fs::exists(dir / "q" / "partial" / "mask_0001.png"));
  CHECK(read_json_file(dir / "q" / "query.json").at("count") == 3);

  SUBCASE("no reference: replaying the capture reproduces the evidence") {
    const std::string e = (dir / "e").string();
    REQUIRE(cli({"eval", "--query", q, "--out", e}) == kExitOk);
    const Json r = read_json_file(dir / "e" / "report.json");
    CHECK_FALSE(r.contains("full"));
    CHECK(r.at("evidence").at("psnr") == 99.0);
    CHECK(r.at("temporal").contains("full_tc"));
    CHECK(manifests_in(dir / "e") == 1);
  }
  SUBCASE("with a reference") {
    const std::string e = (dir / "e").string();
    REQUIRE(cli({"eval", "--query", q, "--scene", cap + "/scene.json", "--out", e}) == kExitOk);
    const Json r = read_json_file(dir / "e" / "report.json");
    CHECK(r.at("full").at("psnr") == 99.0);
    CHECK(r.at("metadata").at("has_reference") == true);
    CHECK(slurp(dir / "e" / "report.csv").rfind(csv_header(), 0) == 0);
  }
}

TEST_CASE("compare on a temporal-extrapolation corpus") {
  test::TempDir dir("cli_compare");
  const std::string cap = (dir / "cap").string();
  REQUIRE(cli({"capture", "--config", kTinyConfig, "--seed", "5", "--observe", "1-1", "--out",
               cap}) == kExitOk);
  const std::string c = (dir / "c").string();
  REQUIRE(cli({"compare", "--config", kTinyConfig, "--corpus", cap + "/corpus", "--scene",
               cap + "/scene.json", "--out", c}) == kExitOk);
  const Json j = read_json_file(dir / "c" / "compare.json");
  CHECK(j.at("corpus_hashes_equal") == true);
  REQUIRE(j.at("modes").size() == 2);
  CHECK(j.at("modes")[0].at("mode") == "4d_informed");
  CHECK(j.at("modes")[0].at("empty_selection_times").empty());
  CHECK(j.at("modes")[1].at("mode") == "time_local");
  CHECK(j.at("modes")[1].at("empty_selection_times") == Json::array({2, 3}));
  CHECK(fs::exists(dir / "c" / "4d" / "completed" / "frame_0001.png"));
  CHECK(fs::exists(dir / "c" / "time-local" / "completed" / "frame_0001.png"));
  CHECK(manifests_in(dir / "c") == 1);
}

TEST_CASE("env run log") {
  test::TempDir dir("cli_env");
  for (const char* out : {"a", "b"}) {
    REQUIRE(cli({"env", "run", "--config", kTinyConfig, "--seed", "4", "--steps", "3", "--policy",
                 "random", "--out", (dir / out).string()}) == kExitOk);
  }
  const std::string log = slurp(dir / "a" / "episode.jsonl");
  CHECK(log == slurp(dir / "b" / "episode.jsonl"));
  std::istringstream lines(log);
  std::string line;
  int n = 0;
  double coverage = 0.0;
  while (std::getline(lines, line)) {
    const Json j = Json::parse(line);
    ++n;
    CHECK(j.at("step") == n);
    CHECK(j.at("actions_sha256").get<std::string>().size() == 64);
    const Json& r = j.at("reward");
    CHECK(r.at("total").get<double>() ==
          r.at("task").get<double>() + r.at("info_gain").get<double>() -
              r.at("lambda").get<double>() * r.at("cost").get<double>());
    CHECK(j.at("coverage").get<double>() >= coverage);
    coverage = j.at("coverage");
  }
  CHECK(n == 3);
  CHECK(load_corpus(dir / "a" / "corpus").iteration_count() == 3);
  CHECK(manifests_in(dir / "a") == 1);
}

TEST_CASE("exit codes") {
  test::TempDir dir("cli_exit");
  SUBCASE("usage") {
    CHECK(cli({}) == kExitUsage);
    CHECK(cli({"query", "--out", dir.path().string()}) == kExitUsage);
    CHECK(cli({"capture", "--bogus"}) == kExitUsage);
    CHECK(cli({"query", "--corpus", "x", "--retrieval", "sideways"}) == kExitUsage);
  }
  SUBCASE("schema-invalid config") {
    std::ofstream(dir / "bad.json") << R"({"scene": {"horizon": 3, "colour": 1}})";
    CHECK(cli({"capture", "--config", (dir / "bad.json").string(), "--out",
               (dir / "o").string()}) == kExitUsage);
  }
  SUBCASE("bad observe range") {
    CHECK(cli({"capture", "--config", kTinyConfig, "--observe", "3-1", "--out",
               (dir / "o").string()}) == kExitUsage);
  }
  SUBCASE("runtime") {
    CHECK(cli({"query", "--config", kTinyConfig, "--corpus", (dir / "missing").string(), "--out",
               (dir / "o").string()}) == kExitRuntime);
  }
}

TEST_CASE("pipeline") {
  const auto rig = test::small_rig(24, 18);
  const SceneSpec scene = generate_scene(12, test::small_scene(4, 2));
  const EvidenceCorpus corpus = test::capture(scene, static_sequence(4, default_camera(rig)));
  const ActionSequence q = orbit(4, rig, 9.0, 5.0, -60.0, 10.0);

  SUBCASE("predict is deterministic and sized by the query") {
    const Prediction a = predict(corpus, q), b = predict(corpus, q);
    REQUIRE(a.completed.size() == 4);
    REQUIRE(a.selections.size() == 4);
    for (std::size_t t = 0; t < 4; ++t) {
      CHECK(a.completed[t].rgb == b.completed[t].rgb);
      CHECK(a.partials[t].support_mask == b.partials[t].support_mask);
      CHECK(a.selections[t].query_time == int(t) + 1);
    }
  }
  SUBCASE("horizon mismatch") {
    CHECK_THROWS_AS(predict(corpus, static_sequence(3, default_camera(rig))), InvalidArgument);
  }
  SUBCASE("config JSON") {
    PipelineConfig c;
    c.retrieval.budget = 3;
    c.retrieval.time_local = true;
    const Json j = pipeline_config_to_json(c);
    CHECK(pipeline_config_to_json(pipeline_config_from_json(j)) == j);
    Json bad = j;
    bad["retrieval"]["nope"] = 1;
    CHECK_THROWS_AS(pipeline_config_from_json(bad), InvalidArgument);
    bad = j;
    bad["extra"] = 1;
    CHECK_THROWS_AS(pipeline_config_from_json(bad), InvalidArgument);
  }
}
