#include "aw4re/pipeline.hpp"

#include "aw4re/error.hpp"
#include "aw4re/parallel.hpp"

namespace aw4re {

void PipelineConfig::validate() const {
  retrieval.validate();
  decoder.validate();
}

Prediction predict(const EvidenceCorpus& corpus, const ActionSequence& actions,
                   const PipelineConfig& cfg) {
  cfg.validate();
  actions.validate();
  if (actions.horizon() != corpus.horizon()) {
    throw InvalidArgument("action sequence length " + std::to_string(actions.horizon()) +
                          " differs from the corpus horizon " +
                          std::to_string(corpus.horizon()));
  }
  const int n = actions.horizon();
  Prediction out;
  out.selections.resize(n);
  out.partials.resize(n);
  parallel_for(0, n, [&](int t) {
    const CameraAction& query = actions.actions[t];
    out.selections[t] = select_evidence(corpus, query, cfg.retrieval);
    out.partials[t] = decode(query, out.selections[t], corpus, cfg.decoder);
  });
  out.completed = cfg.plugin ? complete_external(out.partials, *cfg.plugin)
                             : complete_baseline(out.partials);
  return out;
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

nlohmann::json pipeline_config_to_json(const PipelineConfig& cfg) {
  const auto& r = cfg.retrieval;
  const auto& d = cfg.decoder;
  return {{"retrieval",
           {{"budget", r.budget},
            {"temporal_scale", r.temporal_scale},
            {"w_geo", r.w_geo},
            {"w_time", r.w_time},
            {"w_scale", r.w_scale},
            {"frustum_samples", r.frustum_samples},
            {"depth_range", {r.depth_range.first, r.depth_range.second}},
            {"mode", to_string(r.mode)},
            {"time_local", r.time_local},
            {"seed", r.seed}}},
          {"decoder",
           {{"dense_threshold", d.dense_threshold},
            {"max_fill_radius", d.max_fill_radius},
            {"base_levels", d.base_levels},
            {"max_splat_size", d.max_splat_size},
            {"frustum_prefilter", d.proxy.frustum_prefilter},
            {"dilation", d.proxy.dilation}}}};
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  PipelineConfig cfg;
  reject_unknown(j, {"retrieval", "decoder"}, "pipeline config");
  try {
    if (j.contains("retrieval")) {
      const auto& r = j.at("retrieval");
      reject_unknown(r,
                     {"budget", "temporal_scale", "w_geo", "w_time", "w_scale",
                      "frustum_samples", "depth_range", "mode", "time_local", "seed"},
                     "retrieval config");
      auto& o = cfg.retrieval;
      o.budget = r.value("budget", o.budget);
      o.temporal_scale = r.value("temporal_scale", o.temporal_scale);
      o.w_geo = r.value("w_geo", o.w_geo);
      o.w_time = r.value("w_time", o.w_time);
      o.w_scale = r.value("w_scale", o.w_scale);
      o.frustum_samples = r.value("frustum_samples", o.frustum_samples);
      if (r.contains("depth_range")) {
        const auto& dr = r.at("depth_range");
        if (!dr.is_array() || dr.size() != 2) {
          throw InvalidArgument("depth_range must be [lo, hi]");
        }
        o.depth_range = {dr[0].get<double>(), dr[1].get<double>()};
      }
      if (r.contains("mode")) o.mode = selection_mode_from_string(r.at("mode").get<std::string>());
      o.time_local = r.value("time_local", o.time_local);
      o.seed = r.value("seed", o.seed);
    }
    if (j.contains("decoder")) {
      const auto& d = j.at("decoder");
      reject_unknown(d,
                     {"dense_threshold", "max_fill_radius", "base_levels",
                      "max_splat_size", "frustum_prefilter", "dilation"},
                     "decoder config");
      auto& o = cfg.decoder;
      o.dense_threshold = d.value("dense_threshold", o.dense_threshold);
      o.max_fill_radius = d.value("max_fill_radius", o.max_fill_radius);
      o.base_levels = d.value("base_levels", o.base_levels);
      o.max_splat_size = d.value("max_splat_size", o.max_splat_size);
      o.proxy.frustum_prefilter = d.value("frustum_prefilter", o.proxy.frustum_prefilter);
      o.proxy.dilation = d.value("dilation", o.proxy.dilation);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("pipeline config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

}  // namespace aw4re
