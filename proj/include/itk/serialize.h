#pragma once

#include <json.hpp>

#include "itk/corpus.h"
#include "itk/features.h"
#include "itk/linear_models.h"
#include "itk/normalize.h"
#include "itk/transformer.h"

namespace itk {

// JSON codecs for every persisted config. Decoders accept partial documents
// and fill the rest with defaults; unknown keys raise schema_error so typos
// fail loudly.

nlohmann::json norm_config_json(const NormalizationConfig& cfg);
NormalizationConfig norm_config_from_json(const nlohmann::json& j);

nlohmann::json vocab_json(const Vocabulary& v);
Vocabulary vocab_from_json(const nlohmann::json& j);

nlohmann::json extractor_json(const HashedNgramExtractor& e);
HashedNgramExtractor extractor_from_json(const nlohmann::json& j);

nlohmann::json train_config_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j, const TrainConfig& defaults);

nlohmann::json transformer_config_json(const TransformerConfig& cfg);
TransformerConfig transformer_config_from_json(const nlohmann::json& j);

nlohmann::json stats_json(const CorpusStats& s);

}  // namespace itk
