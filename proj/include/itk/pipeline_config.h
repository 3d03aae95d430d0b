#pragma once

#include <cstdint>
#include <string>

#include "itk/features.h"
#include "itk/linear_models.h"
#include "itk/normalize.h"
#include "itk/transformer.h"

namespace itk {

struct FeatureConfig {
    uint32_t min_df = 2;
    uint32_t max_terms = 200000;
    HashedNgramExtractor extractor;
    uint32_t fasttext_dim = 100;
};

// One resolved run: every command takes this, every artifact echoes it.
struct RunConfig {
    uint64_t seed = 42;
    std::string model_kind = "logreg";
    NormalizationConfig normalization;
    FeatureConfig features;
    TrainConfig logreg;
    TrainConfig fasttext = fasttext_defaults();
    TransformerConfig transformer;
};

// Partial documents are allowed; absent keys keep their defaults.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string run_config_to_json_text(const RunConfig& cfg);

}  // namespace itk
