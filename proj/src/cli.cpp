#include "aw4re/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "aw4re/corpus.hpp"
#include "aw4re/env.hpp"
#include "aw4re/error.hpp"
#include "aw4re/metrics.hpp"
#include "aw4re/pipeline.hpp"
#include "aw4re/plot.hpp"
#include "aw4re/png_io.hpp"
#include "aw4re/serialization.hpp"
#include "aw4re/trajectories.hpp"
#include "aw4re/version.hpp"

namespace aw4re {

namespace fs = std::filesystem;

namespace {

// Config that parsed as JSON but violates the schema.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string config;
  std::uint64_t seed = 7;
  std::string out;
  std::string mode = "real";
  std::string retrieval = "4d";
  std::string plugin;
  bool strict = false;
  double timeout = 600.0;
  std::string corpus;
  std::string actions;
  std::string trajectory;
  std::string scene;
  std::string query;
  std::string observe;
  std::string policy = "random";
  std::string id;
  int freeze = 20;
  int from = 55;
  double zoom_factor = 2.0;
  int steps = 3;
  int time = 0;
};

std::string numbered(const char* prefix, int t) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s_%04d.png", prefix, t);
  return buf;
}

EnvConfig load_config(const Options& o) {
  if (o.config.empty()) return EnvConfig{};
  const Json j = read_json_file(o.config);
  try {
    return env_config_from_json(j);
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string("invalid config ") + o.config + ": " + e.what());
  }
}

// --retrieval 4d|time-local and an optional plugin override the config.
PipelineConfig pipeline_for(const EnvConfig& cfg, const Options& o) {
  PipelineConfig p = cfg.pipeline;
  if (o.retrieval == "time-local") {
    p.retrieval.time_local = true;
  } else if (o.retrieval != "4d") {
    throw UsageError("--retrieval must be 4d or time-local");
  }
  if (!o.plugin.empty()) {
    PluginDescriptor d;
    d.executable = o.plugin;
    d.strict = o.strict;
    d.timeout_seconds = o.timeout;
    p.plugin = d;
  }
  return p;
}

std::pair<int, int> parse_range(const std::string& s) {
  int a = 0, b = 0;
  char dash = 0;
  std::istringstream in(s);
  if (!(in >> a >> dash >> b) || dash != '-' || a < 1 || b < a) {
    throw UsageError("range must look like A-B with 1 <= A <= B, got '" + s + "'");
  }
  return {a, b};
}

ActionSequence make_trajectory(const Options& o, const EnvConfig& cfg,
                               const ActionSequence* base, int horizon) {
  const std::string& name = o.trajectory.empty() ? "static" : o.trajectory;
  if (name == "static") return static_sequence(horizon, default_camera(cfg.rig));
  if (name == "orbit") return orbit(horizon, cfg.rig, 9.2, 5.0, -90.0, 90.0);
  ActionSequence fallback;
  if (!base) {
    fallback = static_sequence(horizon, default_camera(cfg.rig));
    base = &fallback;
  }
  if (name == "hold") return hold(*base, o.freeze);
  if (name == "rewind") return rewind(*base, o.from);
  if (name == "zoom") return zoom(*base, o.zoom_factor, o.zoom_factor);
  if (name == "corner") {
    const double e = cfg.scene.extent;
    return corner(*base, Vec3(e, e, 0.0), o.zoom_factor);
  }
  throw UsageError("unknown trajectory '" + name + "'");
}

ActionSequence query_actions(const Options& o, const EnvConfig& cfg,
                             const EvidenceCorpus& corpus) {
  if (!o.actions.empty()) {
    ActionSequence a = actions_from_json(read_json_file(o.actions));
    if (a.horizon() != corpus.horizon()) {
      throw UsageError("action file has " + std::to_string(a.horizon()) +
                       " actions, corpus horizon is " + std::to_string(corpus.horizon()));
    }
    return a;
  }
  const ActionSequence* base =
      corpus.iteration_count() > 0 ? &corpus.iteration_actions(corpus.iteration_count())
                                   : nullptr;
  return make_trajectory(o, cfg, base, corpus.horizon());
}

fs::path require_out(const Options& o) {
  if (o.out.empty()) throw UsageError("--out is required");
  fs::create_directories(o.out);
  return o.out;
}

struct Manifest {
  std::string command;
  std::vector<std::string> argv;
  Json inputs = Json::object();
  Json outputs = Json::object();
  std::string config_hash;
  std::optional<std::uint64_t> seed;
};

void write_manifest(const fs::path& dir, const Manifest& m, double seconds) {
  Json j = {{"command", m.command},
            {"argv", m.argv},
            {"config_hash", m.config_hash},
            {"inputs", m.inputs},
            {"outputs", m.outputs},
            {"engine_version", kEngineVersion},
            {"wall_time_s", seconds}};
  if (m.seed) j["seed"] = *m.seed;
  write_json_file(dir / "run_manifest.json", j);
}

std::string config_hash(const EnvConfig& cfg) { return json_hash(env_config_to_json(cfg)); }

void write_frames(const fs::path& dir, const Prediction& pred) {
  fs::create_directories(dir / "partial");
  fs::create_directories(dir / "completed");
  for (std::size_t t = 0; t < pred.partials.size(); ++t) {
    const int n = static_cast<int>(t) + 1;
    write_png_rgb(dir / "partial" / numbered("rgb", n), pred.partials[t].rgb);
    write_png_mask(dir / "partial" / numbered("mask", n), pred.partials[t].support_mask);
    write_png_rgb(dir / "completed" / numbered("frame", n), pred.completed[t].rgb);
  }
  Json sels = Json::array();
  for (const auto& s : pred.selections) sels.push_back(selection_to_json(s));
  write_json_file(dir / "selections.json", sels);
  Json diag = Json::array();
  for (std::size_t t = 0; t < pred.partials.size(); ++t) {
    diag.push_back({{"time", t + 1},
                    {"support_density", pred.partials[t].support_density},
                    {"zoom_ratio", pred.partials[t].zoom_ratio},
                    {"completion", pred.completed[t].source},
                    {"warnings", pred.partials[t].warnings}});
  }
  write_json_file(dir / "frames.json", diag);
}

std::vector<PartialObservation> read_partials(const fs::path& dir, int count) {
  std::vector<PartialObservation> out;
  for (int t = 1; t <= count; ++t) {
    PartialObservation p;
    p.rgb = read_png_rgb(dir / "partial" / numbered("rgb", t));
    p.support_mask = read_png_mask(dir / "partial" / numbered("mask", t));
    p.support_density = static_cast<double>(count_set(p.support_mask)) /
                        static_cast<double>(std::max<std::size_t>(1, p.support_mask.pixel_count()));
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<CompletedObservation> read_completed(const fs::path& dir,
                                                 const std::vector<PartialObservation>& parts) {
  std::vector<CompletedObservation> out;
  for (std::size_t t = 0; t < parts.size(); ++t) {
    CompletedObservation c;
    c.rgb = read_png_rgb(dir / "completed" / numbered("frame", static_cast<int>(t) + 1));
    c.support_mask = parts[t].support_mask;
    c.source = "file";
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Frame> render_reference(const SceneSpec& scene, const ActionSequence& actions) {
  std::vector<Frame> out;
  for (const auto& a : actions.actions) out.push_back(render_oracle(scene, a));
  return out;
}

void write_report(const fs::path& dir, const MetricsReport& r, const std::string& stem) {
  write_json_file(dir / (stem + ".json"), report_to_json(r));
  std::ofstream csv(dir / (stem + ".csv"));
  csv << csv_header() << '\n' << csv_row(r) << '\n';
}

void write_per_frame_csv(const fs::path& path,
                         const std::vector<std::pair<std::string, MetricsReport>>& reports) {
  std::ofstream out(path);
  out << "mode,time,support_density,full_psnr,full_ssim,evidence_psnr\n";
  auto cell = [](const std::optional<double>& v) {
    return v ? std::to_string(*v) : std::string();
  };
  for (const auto& [mode, r] : reports) {
    for (const auto& f : r.per_frame) {
      out << mode << ',' << f.time << ',' << f.support_density << ',' << cell(f.full.psnr)
          << ',' << cell(f.full.ssim) << ',' << cell(f.evidence.psnr) << '\n';
    }
  }
}

Series psnr_series(const std::string& name, const MetricsReport& r) {
  Series s;
  s.name = name;
  for (const auto& f : r.per_frame) {
    s.x.push_back(f.time);
    const auto& v = r.has_reference ? f.full.psnr : f.evidence.psnr;
    s.y.push_back(v ? *v : std::nan(""));
  }
  return s;
}

// ---- subcommands ----

void cmd_scene_gen(const Options& o, Manifest& m) {
  const EnvConfig cfg = load_config(o);
  const fs::path out = require_out(o);
  const SceneSpec scene = generate_scene(o.seed, cfg.scene);
  write_json_file(out / "scene.json", scene);
  write_json_file(out / "config.json", env_config_to_json(cfg));
  m.config_hash = config_hash(cfg);
  m.outputs = {{"scene", "scene.json"}, {"config", "config.json"}};
  std::cout << "scene seed " << o.seed << ": " << scene.statics.size() << " statics, "
            << scene.dynamics.size() << " dynamics, horizon " << scene.horizon << '\n';
}

void cmd_capture(const Options& o, Manifest& m) {
  const EnvConfig cfg = load_config(o);
  const fs::path out = require_out(o);
  Episode ep = reset(cfg, o.seed);
  ActionSequence actions;
  if (!o.actions.empty()) {
    actions = actions_from_json(read_json_file(o.actions));
  } else {
    actions = make_trajectory(o, cfg, nullptr, cfg.horizon());
  }
  if (actions.horizon() != cfg.horizon()) {
    throw UsageError("capture needs " + std::to_string(cfg.horizon()) + " actions");
  }
  std::pair<int, int> seen{1, cfg.horizon()};
  if (!o.observe.empty()) seen = parse_range(o.observe);

  StepResult r = step(ep, actions, EnvMode::kReal);
  std::vector<std::optional<Frame>> frames(r.observation.size());
  for (int t = 1; t <= actions.horizon(); ++t) {
    if (t >= seen.first && t <= seen.second) frames[t - 1] = r.observation[t - 1];
  }
  const EvidenceCorpus corpus = EvidenceCorpus(cfg.horizon()).add_iteration(actions, frames);
  save_corpus(corpus, out / "corpus");
  write_json_file(out / "scene.json", ep.scene);
  write_json_file(out / "actions.json", actions_to_json(actions));
  write_json_file(out / "config.json", env_config_to_json(cfg));
  m.config_hash = config_hash(cfg);
  m.outputs = {{"corpus", "corpus"},
               {"scene", "scene.json"},
               {"actions", "actions.json"},
               {"corpus_sha256", corpus.content_hash()}};
  std::cout << "captured " << corpus.size() << " records, corpus " << corpus.content_hash()
            << '\n';
}

void cmd_query(const Options& o, Manifest& m) {
  const EnvConfig cfg = load_config(o);
  if (o.corpus.empty()) throw UsageError("--corpus is required");
  const PipelineConfig pc = pipeline_for(cfg, o);
  const EvidenceCorpus corpus = load_corpus(o.corpus);
  const ActionSequence actions = query_actions(o, cfg, corpus);
  const fs::path out = require_out(o);
  const Prediction pred = predict(corpus, actions, pc);
  write_frames(out, pred);
  write_json_file(out / "actions.json", actions_to_json(actions));
  write_json_file(out / "query.json", {{"corpus_sha256", corpus.content_hash()},
                                       {"retrieval", o.retrieval},
                                       {"pipeline", pipeline_config_to_json(pc)},
                                       {"count", actions.horizon()}});
  m.config_hash = json_hash(pipeline_config_to_json(pc));
  m.inputs = {{"corpus", o.corpus}, {"corpus_sha256", corpus.content_hash()}};
  m.outputs = {{"partial", "partial"}, {"completed", "completed"},
               {"selections", "selections.json"}};
  double density = 0.0;
  for (const auto& p : pred.partials) density += p.support_density;
  std::cout << "query of " << actions.horizon() << " frames, mean support density "
            << density / std::max(1, actions.horizon()) << '\n';
}

void cmd_eval(const Options& o, Manifest& m) {
  if (o.query.empty()) throw UsageError("--query is required");
  const fs::path qdir = o.query;
  const Json info = read_json_file(qdir / "query.json");
  const int count = info.at("count").get<int>();
  const auto partials = read_partials(qdir, count);
  const auto completed = read_completed(qdir, partials);
  MetricsReport r;
  if (!o.scene.empty()) {
    const SceneSpec scene = read_json_file(o.scene).get<SceneSpec>();
    const ActionSequence actions = actions_from_json(read_json_file(qdir / "actions.json"));
    r = evaluate_query(completed, render_reference(scene, actions));
  } else {
    r = evaluate_query(completed, partials);
  }
  const fs::path qname = qdir.filename().empty() ? qdir.parent_path().filename() : qdir.filename();
  r.query_id = o.id.empty() ? qname.string() : o.id;
  r.mode = info.value("retrieval", std::string("4d")) == "4d" ? "4d_informed" : "time_local";
  r.config_hash = json_hash(info.at("pipeline"));
  const fs::path out = require_out(o);
  write_report(out, r, "report");
  write_per_frame_csv(out / "per_frame.csv", {{r.mode, r}});
  write_line_svg(out / "psnr.svg", r.has_reference ? "Full-frame PSNR" : "Evidence PSNR",
                 "frame", "dB", {psnr_series(r.mode, r)});
  m.config_hash = r.config_hash;
  m.inputs = {{"query", o.query}, {"scene", o.scene}};
  m.outputs = {{"report", "report.json"}, {"csv", "report.csv"}};
  std::cout << csv_header() << '\n' << csv_row(r) << '\n';
}

void cmd_compare(const Options& o, Manifest& m) {
  const EnvConfig cfg = load_config(o);
  if (o.corpus.empty()) throw UsageError("--corpus is required");
  const EvidenceCorpus corpus = load_corpus(o.corpus);
  const ActionSequence actions = query_actions(o, cfg, corpus);
  const fs::path out = require_out(o);
  std::optional<std::vector<Frame>> reference;
  if (!o.scene.empty()) {
    reference = render_reference(read_json_file(o.scene).get<SceneSpec>(), actions);
  }

  std::vector<std::pair<std::string, MetricsReport>> reports;
  Json modes = Json::array();
  std::vector<std::string> hashes;
  for (const std::string mode : {"4d", "time-local"}) {
    Options mo = o;
    mo.retrieval = mode;
    const PipelineConfig pc = pipeline_for(cfg, mo);
    // Both modes read the same immutable snapshot.
    hashes.push_back(corpus.content_hash());
    const Prediction pred = predict(corpus, actions, pc);
    write_frames(out / mode, pred);
    MetricsReport r = reference ? evaluate_query(pred.completed, *reference)
                                : evaluate_query(pred.completed, pred.partials);
    r.query_id = o.id.empty() ? "compare" : o.id;
    r.mode = mode == "4d" ? "4d_informed" : "time_local";
    r.config_hash = json_hash(pipeline_config_to_json(pc));
    Json empty_times = Json::array();
    for (const auto& s : pred.selections) {
      if (s.indices.empty()) empty_times.push_back(s.query_time);
    }
    modes.push_back({{"mode", r.mode},
                     {"report", report_to_json(r, false)},
                     {"empty_selection_times", empty_times}});
    reports.emplace_back(r.mode, r);
  }
  if (hashes[0] != hashes[1]) throw Error("corpus snapshot changed between modes");
  write_json_file(out / "compare.json", {{"corpus_sha256", hashes[0]},
                                         {"corpus_hashes_equal", hashes[0] == hashes[1]},
                                         {"has_reference", reference.has_value()},
                                         {"modes", modes}});
  {
    std::ofstream csv(out / "compare.csv");
    csv << csv_header() << '\n';
    for (const auto& [mode, r] : reports) csv << csv_row(r) << '\n';
  }
  write_per_frame_csv(out / "per_frame.csv", reports);
  write_line_svg(out / "psnr.svg", reference ? "Full-frame PSNR" : "Evidence PSNR", "frame",
                 "dB", {psnr_series(reports[0].first, reports[0].second),
                        psnr_series(reports[1].first, reports[1].second)});
  auto headline = [&](const MetricsReport& r) {
    const auto& v = r.has_reference ? r.full.psnr : r.evidence.psnr;
    return v ? *v : 0.0;
  };
  write_bar_svg(out / "psnr_bars.svg", "Mean PSNR by retrieval mode",
                {reports[0].first, reports[1].first},
                {headline(reports[0].second), headline(reports[1].second)});
  m.config_hash = config_hash(cfg);
  m.inputs = {{"corpus", o.corpus}, {"corpus_sha256", hashes[0]}, {"scene", o.scene}};
  m.outputs = {{"compare", "compare.json"}, {"csv", "compare.csv"}};
  std::cout << csv_header() << '\n';
  for (const auto& [mode, r] : reports) std::cout << csv_row(r) << '\n';
}

void cmd_env_run(const Options& o, Manifest& m) {
  EnvConfig cfg = load_config(o);
  try {
    cfg.mode = env_mode_from_string(o.mode);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  if (o.steps < 0) throw UsageError("--steps must be >= 0");
  const fs::path out = require_out(o);
  std::unique_ptr<Policy> policy;
  if (o.policy == "random") {
    policy = std::make_unique<RandomPolicy>(o.seed, cfg.rig);
  } else if (o.policy == "scripted") {
    std::vector<ActionSequence> script;
    if (!o.actions.empty()) {
      script.push_back(actions_from_json(read_json_file(o.actions)));
    } else {
      script.push_back(make_trajectory(o, cfg, nullptr, cfg.horizon()));
    }
    policy = std::make_unique<ScriptedPolicy>(std::move(script));
  } else {
    throw UsageError("--policy must be scripted or random");
  }
  Episode ep = run_episode(cfg, o.seed, *policy, o.steps);
  write_episode_log(out / "episode.jsonl", ep);
  if (ep.corpus.iteration_count() > 0) save_corpus(ep.corpus, out / "corpus");
  write_json_file(out / "scene.json", ep.scene);
  m.config_hash = config_hash(cfg);
  m.outputs = {{"log", "episode.jsonl"}};
  for (const auto& r : ep.log) std::cout << step_record_to_json(r).dump() << '\n';
}

void cmd_explain(const Options& o, Manifest& m) {
  const EnvConfig cfg = load_config(o);
  if (o.corpus.empty()) throw UsageError("--corpus is required");
  const PipelineConfig pc = pipeline_for(cfg, o);
  const EvidenceCorpus corpus = load_corpus(o.corpus);
  const ActionSequence actions = query_actions(o, cfg, corpus);
  Json all = Json::array();
  for (int t = 1; t <= actions.horizon(); ++t) {
    if (o.time != 0 && t != o.time) continue;
    const auto& q = actions.at_time(t);
    Json entry = selection_to_json(select_evidence(corpus, q, pc.retrieval));
    Json scores = Json::array();
    for (const auto* rec : corpus.records()) {
      if (pc.retrieval.time_local && rec->time != t) continue;
      const auto terms = relevance_terms(*rec, q, pc.retrieval);
      scores.push_back({{"iteration", rec->iteration},
                        {"time", rec->time},
                        {"score", terms.score},
                        {"geometric", terms.geometric},
                        {"temporal", terms.temporal},
                        {"scale", terms.scale},
                        {"has_depth", rec->usable_for_proxy()}});
    }
    entry["candidates"] = scores;
    all.push_back(entry);
  }
  if (o.time != 0 && all.empty()) throw UsageError("--time outside the horizon");
  m.config_hash = json_hash(pipeline_config_to_json(pc));
  if (o.out.empty()) {
    std::cout << all.dump(2) << '\n';
  } else {
    const fs::path out = require_out(o);
    write_json_file(out / "explain.json", all);
    m.outputs = {{"explain", "explain.json"}};
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  Options o;
  CLI::App app{"Surrogate-environment engine: capture, counterfactual query, evaluation", "aw4re"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kEngineVersion);

  auto add_config = [&](CLI::App* c) {
    c->add_option("--config", o.config, "Run config JSON")->check(CLI::ExistingFile);
  };
  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "Scene / policy seed"); };
  auto add_out = [&](CLI::App* c, bool required) {
    auto* opt = c->add_option("--out", o.out, "Output directory");
    if (required) opt->required();
  };
  auto add_query = [&](CLI::App* c) {
    c->add_option("--corpus", o.corpus, "Corpus directory")->required();
    c->add_option("--actions", o.actions, "Query action sequence JSON");
    c->add_option("--trajectory", o.trajectory,
                  "Built-in query: static, orbit, zoom, corner, hold, rewind");
    c->add_option("--freeze", o.freeze, "hold: freeze time");
    c->add_option("--from", o.from, "rewind: first observed time");
    c->add_option("--zoom-factor", o.zoom_factor, "zoom/corner focal factor");
    c->add_option("--retrieval", o.retrieval, "4d or time-local")
        ->check(CLI::IsMember({"4d", "time-local"}));
  };

  auto* scene = app.add_subcommand("scene", "Scene tools");
  scene->require_subcommand(1);
  auto* gen = scene->add_subcommand("gen", "Generate a scene spec");
  add_config(gen);
  add_seed(gen);
  add_out(gen, true);

  auto* capture = app.add_subcommand("capture", "Real-mode capture into a corpus");
  add_config(capture);
  add_seed(capture);
  add_out(capture, true);
  capture->add_option("--actions", o.actions, "Action sequence JSON");
  capture->add_option("--trajectory", o.trajectory, "static or orbit");
  capture->add_option("--observe", o.observe, "Observed time range A-B; others are masked");

  auto* query = app.add_subcommand("query", "Counterfactual query");
  add_config(query);
  add_out(query, true);
  add_query(query);
  query->add_option("--plugin", o.plugin, "External completion executable");
  query->add_flag("--strict", o.strict, "Reject plugin outputs that move evidence pixels");
  query->add_option("--timeout", o.timeout, "Plugin timeout, seconds");

  auto* eval = app.add_subcommand("eval", "Metrics report for a query output");
  eval->add_option("--query", o.query, "Query output directory")->required();
  eval->add_option("--scene", o.scene, "Scene JSON for ground truth (omit: no reference)");
  eval->add_option("--id", o.id, "Query id for the report");
  add_out(eval, true);

  auto* compare = app.add_subcommand("compare", "4d-informed vs time-local retrieval");
  add_config(compare);
  add_out(compare, true);
  add_query(compare);
  compare->add_option("--scene", o.scene, "Scene JSON for ground truth");
  compare->add_option("--id", o.id, "Query id for the report");

  auto* env = app.add_subcommand("env", "Environment tools");
  env->require_subcommand(1);
  auto* env_run = env->add_subcommand("run", "Policy rollout");
  add_config(env_run);
  add_seed(env_run);
  add_out(env_run, true);
  env_run->add_option("--policy", o.policy, "scripted or random");
  env_run->add_option("--steps", o.steps, "Number of steps");
  env_run->add_option("--mode", o.mode, "real or surrogate");
  env_run->add_option("--actions", o.actions, "Scripted action sequence JSON");
  env_run->add_option("--trajectory", o.trajectory, "Scripted built-in trajectory");

  auto* explain = app.add_subcommand("explain", "Dump retrieval scores");
  add_config(explain);
  add_out(explain, false);
  add_query(explain);
  explain->add_option("--time", o.time, "Single query time");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Manifest m;
  m.argv = args;
  const auto start = std::chrono::steady_clock::now();
  try {
    if (gen->parsed()) {
      m.command = "scene gen";
      m.seed = o.seed;
      cmd_scene_gen(o, m);
    } else if (capture->parsed()) {
      m.command = "capture";
      m.seed = o.seed;
      cmd_capture(o, m);
    } else if (query->parsed()) {
      m.command = "query";
      cmd_query(o, m);
    } else if (eval->parsed()) {
      m.command = "eval";
      cmd_eval(o, m);
    } else if (compare->parsed()) {
      m.command = "compare";
      cmd_compare(o, m);
    } else if (env_run->parsed()) {
      m.command = "env run";
      m.seed = o.seed;
      cmd_env_run(o, m);
    } else if (explain->parsed()) {
      m.command = "explain";
      cmd_explain(o, m);
    }
    if (!o.out.empty() && fs::exists(o.out)) {
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      write_manifest(o.out, m, secs);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int run_cli(int argc, const char* const* argv) {
  return run_cli(std::vector<std::string>(argv, argv + argc));
}

}  // namespace aw4re
