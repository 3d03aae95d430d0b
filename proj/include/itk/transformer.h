#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "itk/linear_models.h"
#include "itk/normalize.h"
#include "itk/rng.h"

namespace itk {

struct TransformerConfig {
    int vocab_size = 20000;  // corpus terms kept, specials excluded
    int max_len = 200;
    int d_model = 64;
    int n_heads = 2;
    int n_layers = 2;
    int d_ff = 128;
    double dropout = 0.1;
    int n_classes = kNumLabels;
    double learning_rate = 1e-3;
    int epochs = 4;
    int batch_size = 32;

    void validate() const;  // throws data_error on inconsistent shapes
};

struct TokenVocab {
    static constexpr int kPad = 0;
    static constexpr int kCls = 1;
    static constexpr int kUnk = 2;

    std::vector<std::string> id_to_token;  // ids 0..2 are the specials
    std::unordered_map<std::string, int> token_to_id;

    int size() const { return static_cast<int>(id_to_token.size()); }
};

// Most frequent terms first, ties broken lexicographically.
TokenVocab build_token_vocab(const std::vector<CleanRecord>& data, int max_terms);

// CLS-prefixed whitespace-token ids, UNK for out-of-vocabulary terms,
// truncated to cfg.max_len ids in total. Never pads.
std::vector<int> encode_tokens(const std::string& text, const TokenVocab& vocab,
                               const TransformerConfig& cfg);

// Flat parameter storage with named spans; one buffer keeps the optimizer,
// gradient checks, and serialization generic.
struct ParamPack {
    struct Entry {
        std::string name;
        size_t offset;
        size_t count;
    };

    std::vector<double> data;
    std::vector<Entry> entries;

    size_t add(const std::string& name, size_t count);
    const Entry& entry(std::string_view name) const;
    double* view(std::string_view name) { return data.data() + entry(name).offset; }
    const double* view(std::string_view name) const { return data.data() + entry(name).offset; }
};

struct TransformerModel {
    TransformerConfig cfg;
    TokenVocab vocab;
    ParamPack params;
};

// Builds the parameter layout and draws N(0, 0.02) weights, zero biases,
// unit layer-norm gains from the given seed.
TransformerModel transformer_init(const TransformerConfig& cfg, TokenVocab vocab, uint64_t seed);

// Logits for each sequence. Sequences may have different lengths; each must
// start with CLS and fit max_len. PAD positions are masked out of attention.
std::vector<std::array<double, kNumLabels>> transformer_forward(
    const TransformerModel& m, const std::vector<std::vector<int>>& batch);

// Attention probabilities of one layer/head as an L x L row-major matrix
// (query rows). Dropout off; exposed for direct auditing.
std::vector<double> attention_rows(const TransformerModel& m, const std::vector<int>& ids,
                                   int layer, int head);

// Mean cross-entropy over the batch; grad is resized to the parameter count.
// Dropout is applied only when dropout_rng is non-null and cfg.dropout > 0.
double transformer_loss_and_grad(const TransformerModel& m,
                                 const std::vector<std::vector<int>>& batch,
                                 const std::vector<int>& labels, std::vector<double>& grad,
                                 Rng* dropout_rng = nullptr);

// Adam (beta1 0.9, beta2 0.999, eps 1e-8) over shuffled mini-batches.
// epochs == 0 returns the seeded initialization unchanged.
TransformerModel transformer_train(const std::vector<CleanRecord>& data,
                                   const TransformerConfig& cfg, uint64_t seed,
                                   std::vector<double>* epoch_loss = nullptr);

Prediction transformer_predict(const TransformerModel& m, const std::string& text);

}  // namespace itk
