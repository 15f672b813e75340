#pragma once

#include <optional>
#include <vector>

#include "aw4re/completion.hpp"
#include "aw4re/corpus.hpp"
#include "aw4re/decoder.hpp"
#include "aw4re/retrieval.hpp"
#include "json.hpp"

namespace aw4re {

struct PipelineConfig {
  RetrievalConfig retrieval;
  DecoderConfig decoder;
  // External completion when set, the baseline otherwise.
  std::optional<PluginDescriptor> plugin;

  void validate() const;
};

struct Prediction {
  std::vector<EvidenceSelection> selections;
  std::vector<PartialObservation> partials;
  std::vector<CompletedObservation> completed;
};

// Counterfactual prediction of the observation sequence for `actions`:
// per-frame retrieval and decoding (independent across t), then completion
// over the whole sequence.
Prediction predict(const EvidenceCorpus& corpus, const ActionSequence& actions,
                   const PipelineConfig& cfg = {});

// Config JSON: {"retrieval": {...}, "decoder": {...}}; unknown keys throw.
nlohmann::json pipeline_config_to_json(const PipelineConfig& cfg);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

}  // namespace aw4re
