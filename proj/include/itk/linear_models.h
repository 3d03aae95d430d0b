#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "itk/corpus.h"
#include "itk/features.h"

namespace itk {

struct Prediction {
    int label_code = 0;
    std::array<double, kNumLabels> probs{};
};

// Numerically stable softmax (max-subtracted).
std::vector<double> softmax(const std::vector<double>& z);

struct TrainConfig {
    int epochs = 5;
    double learning_rate = 0.5;
    double lr_decay = 1e-4;  // lr_t = learning_rate / (1 + lr_decay * t)
    double l2 = 1e-6;
    uint64_t seed = 42;
    std::vector<double> class_weights;  // empty = unweighted; else one per class
};

inline TrainConfig fasttext_defaults() {
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.l2 = 0.0;
    return cfg;
}

struct LogRegModel {
    uint32_t n_features = 0;
    std::vector<double> weights;  // kNumLabels x n_features, row-major
    std::array<double, kNumLabels> bias{};

    double weight_at(int c, uint32_t f) const {
        return weights[static_cast<size_t>(c) * n_features + f];
    }
};

using LabeledFeatures = std::vector<std::pair<FeatureVector, int>>;

// Multinomial logistic regression by per-example SGD with inverse-time
// learning-rate decay and L2 regularization. Deterministic for a fixed seed.
// Throws data_error when any class is absent. n_features 0 means infer from
// the data; pass the vocabulary size to keep model dimensions aligned.
// epoch_loss, when given, receives the mean training loss of each epoch.
LogRegModel logreg_train(const LabeledFeatures& data, const TrainConfig& cfg,
                         uint32_t n_features = 0, std::vector<double>* epoch_loss = nullptr);

Prediction logreg_predict(const LogRegModel& m, const FeatureVector& x);

// Unregularized cross-entropy of one example; finite-difference anchor.
double logreg_example_loss(const LogRegModel& m, const FeatureVector& x, int label);

struct LogRegGrad {
    std::vector<double> d_weights;  // dense, kNumLabels x n_features
    std::array<double, kNumLabels> d_bias{};
};

LogRegGrad logreg_example_grad(const LogRegModel& m, const FeatureVector& x, int label);

struct FastTextModel {
    uint32_t dim = 100;
    HashedNgramExtractor extractor;
    std::vector<double> embeddings;  // n_buckets x dim, row-major
    std::vector<double> output;      // kNumLabels x dim
    std::array<double, kNumLabels> bias{};
    std::array<double, kNumLabels> priors{};  // training label distribution
    uint64_t skipped_empty = 0;               // empty training documents

    const double* embedding_row(uint32_t bucket) const {
        return embeddings.data() + static_cast<size_t>(bucket) * dim;
    }
};

using LabeledTokenDocs = std::vector<std::pair<std::vector<std::string>, int>>;

// Averaged hashed n-gram embeddings with a linear head, SGD with learning
// rate decaying linearly to zero. Empty documents are skipped and counted.
FastTextModel fasttext_train(const LabeledTokenDocs& data, const HashedNgramExtractor& extractor,
                             const TrainConfig& cfg, uint32_t dim = 100,
                             std::vector<double>* epoch_loss = nullptr);

// Predicts from bucket counts; an empty vector falls back to the stored
// training priors.
Prediction fasttext_predict(const FastTextModel& m, const FeatureVector& hashed);

double fasttext_example_loss(const FastTextModel& m, const FeatureVector& hashed, int label);

struct FastTextGrad {
    std::vector<double> d_output;  // kNumLabels x dim
    std::array<double, kNumLabels> d_bias{};
    // gradients for the touched embedding rows only
    std::vector<std::pair<uint32_t, std::vector<double>>> d_embeddings;
};

FastTextGrad fasttext_example_grad(const FastTextModel& m, const FeatureVector& hashed, int label);

}  // namespace itk
