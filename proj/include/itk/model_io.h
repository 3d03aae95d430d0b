#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "itk/linear_models.h"
#include "itk/normalize.h"
#include "itk/transformer.h"

namespace itk {

inline constexpr uint32_t kModelFormatVersion = 1;
inline constexpr char kModelMagic[] = "ITK-MODEL\n";

// One trained model plus everything needed to serve it: the cleaning config
// it was trained with and its feature space.
struct ModelBundle {
    std::string model_kind;  // logreg | fasttext | transformer
    uint64_t seed = 0;
    NormalizationConfig normalization;

    std::optional<LogRegModel> logreg;
    std::optional<Vocabulary> vocabulary;  // logreg feature space
    std::optional<FastTextModel> fasttext;
    std::optional<TransformerModel> transformer;
};

// Binary container: magic, little-endian u32 header length, JSON header
// (format version, kind, configs, section table, payload checksum), then the
// raw little-endian f64 payload. Round-trips are bit-exact.
void save_model(const ModelBundle& b, const std::string& path);

// Throws model_format_error on bad magic, unsupported version, truncation,
// or checksum mismatch; io_error when the file cannot be read.
ModelBundle load_model(const std::string& path);

}  // namespace itk
