#include "itk/linear_models.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "itk/errors.h"
#include "itk/rng.h"

namespace itk {

namespace {

int argmax_lowest(const double* p, int n) {
    int best = 0;
    for (int c = 1; c < n; ++c) {
        if (p[c] > p[best]) best = c;
    }
    return best;
}

double log_sum_exp(const std::array<double, kNumLabels>& z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    return m + std::log(s);
}

std::array<double, kNumLabels> softmax3(const std::array<double, kNumLabels>& z) {
    const double m = *std::max_element(z.begin(), z.end());
    std::array<double, kNumLabels> p{};
    double s = 0.0;
    for (int c = 0; c < kNumLabels; ++c) {
        p[c] = std::exp(z[c] - m);
        s += p[c];
    }
    for (double& v : p) v /= s;
    return p;
}

void check_classes_present(const std::vector<int>& labels) {
    std::array<bool, kNumLabels> seen{};
    for (int y : labels) {
        if (y < 0 || y >= kNumLabels) throw data_error("label code out of range");
        seen[y] = true;
    }
    for (int c = 0; c < kNumLabels; ++c) {
        if (!seen[c]) {
            throw data_error("class " + std::string(label_name(static_cast<Label>(c))) +
                             " absent from training data");
        }
    }
}

double example_weight(const TrainConfig& cfg, int label) {
    if (cfg.class_weights.empty()) return 1.0;
    if (cfg.class_weights.size() != static_cast<size_t>(kNumLabels)) {
        throw data_error("class_weights must list one weight per class");
    }
    return cfg.class_weights[label];
}

}  // namespace

std::vector<double> softmax(const std::vector<double>& z) {
    std::vector<double> p(z.size());
    if (z.empty()) return p;
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp(z[i] - m);
        s += p[i];
    }
    for (double& v : p) v /= s;
    return p;
}

LogRegModel logreg_train(const LabeledFeatures& data, const TrainConfig& cfg, uint32_t n_features,
                         std::vector<double>* epoch_loss) {
    if (cfg.epochs < 1) throw data_error("epochs must be >= 1");
    if (cfg.learning_rate <= 0.0) throw data_error("learning_rate must be > 0");
    std::vector<int> labels;
    labels.reserve(data.size());
    uint32_t max_index = 0;
    for (const auto& [x, y] : data) {
        labels.push_back(y);
        for (const auto& e : x) max_index = std::max(max_index, e.index + 1);
    }
    check_classes_present(labels);
    if (n_features == 0) n_features = max_index;
    if (max_index > n_features) throw data_error("feature index exceeds n_features");

    LogRegModel m;
    m.n_features = n_features;
    m.weights.assign(static_cast<size_t>(kNumLabels) * n_features, 0.0);
    // Weights carry an implicit scale factor so L2 decay stays O(1) per step.
    double scale = 1.0;

    std::vector<size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(cfg.seed);
    size_t t = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (size_t idx : order) {
            const auto& [x, y] = data[idx];
            const double lr = cfg.learning_rate / (1.0 + cfg.lr_decay * static_cast<double>(t));
            std::array<double, kNumLabels> z = m.bias;
            for (const auto& e : x) {
                for (int c = 0; c < kNumLabels; ++c) {
                    z[c] += scale * m.weights[static_cast<size_t>(c) * n_features + e.index] *
                            e.weight;
                }
            }
            const double w = example_weight(cfg, y);
            loss_sum += w * (log_sum_exp(z) - z[y]);
            const auto p = softmax3(z);
            if (cfg.l2 > 0.0) scale *= 1.0 - lr * cfg.l2;
            for (int c = 0; c < kNumLabels; ++c) {
                const double g = (p[c] - (c == y ? 1.0 : 0.0)) * w;
                for (const auto& e : x) {
                    m.weights[static_cast<size_t>(c) * n_features + e.index] -=
                        lr * g * e.weight / scale;
                }
                m.bias[c] -= lr * g;
            }
            if (scale < 1e-9) {
                for (double& v : m.weights) v *= scale;
                scale = 1.0;
            }
            ++t;
        }
        if (epoch_loss) epoch_loss->push_back(loss_sum / static_cast<double>(data.size()));
    }
    if (scale != 1.0) {
        for (double& v : m.weights) v *= scale;
    }
    return m;
}

namespace {

std::array<double, kNumLabels> logreg_logits(const LogRegModel& m, const FeatureVector& x) {
    std::array<double, kNumLabels> z = m.bias;
    for (const auto& e : x) {
        if (e.index >= m.n_features) throw data_error("feature index out of model range");
        for (int c = 0; c < kNumLabels; ++c) {
            z[c] += m.weights[static_cast<size_t>(c) * m.n_features + e.index] * e.weight;
        }
    }
    return z;
}

}  // namespace

Prediction logreg_predict(const LogRegModel& m, const FeatureVector& x) {
    Prediction out;
    out.probs = softmax3(logreg_logits(m, x));
    out.label_code = argmax_lowest(out.probs.data(), kNumLabels);
    return out;
}

double logreg_example_loss(const LogRegModel& m, const FeatureVector& x, int label) {
    const auto z = logreg_logits(m, x);
    return log_sum_exp(z) - z[label];
}

LogRegGrad logreg_example_grad(const LogRegModel& m, const FeatureVector& x, int label) {
    const auto p = softmax3(logreg_logits(m, x));
    LogRegGrad g;
    g.d_weights.assign(m.weights.size(), 0.0);
    for (int c = 0; c < kNumLabels; ++c) {
        const double d = p[c] - (c == label ? 1.0 : 0.0);
        g.d_bias[c] = d;
        for (const auto& e : x) {
            g.d_weights[static_cast<size_t>(c) * m.n_features + e.index] = d * e.weight;
        }
    }
    return g;
}

namespace {

struct Hidden {
    std::vector<double> h;
    double total = 0.0;
};

Hidden fasttext_hidden(const FastTextModel& m, const FeatureVector& hashed) {
    Hidden out;
    out.h.assign(m.dim, 0.0);
    for (const auto& e : hashed) out.total += e.weight;
    if (out.total <= 0.0) return out;
    for (const auto& e : hashed) {
        const double* row = m.embedding_row(e.index);
        for (uint32_t d = 0; d < m.dim; ++d) out.h[d] += e.weight * row[d];
    }
    for (double& v : out.h) v /= out.total;
    return out;
}

std::array<double, kNumLabels> fasttext_logits(const FastTextModel& m,
                                               const std::vector<double>& h) {
    std::array<double, kNumLabels> z = m.bias;
    for (int c = 0; c < kNumLabels; ++c) {
        const double* u = m.output.data() + static_cast<size_t>(c) * m.dim;
        for (uint32_t d = 0; d < m.dim; ++d) z[c] += u[d] * h[d];
    }
    return z;
}

}  // namespace

FastTextModel fasttext_train(const LabeledTokenDocs& data, const HashedNgramExtractor& extractor,
                             const TrainConfig& cfg, uint32_t dim,
                             std::vector<double>* epoch_loss) {
    if (cfg.epochs < 1) throw data_error("epochs must be >= 1");
    if (cfg.learning_rate <= 0.0) throw data_error("learning_rate must be > 0");
    if (dim < 1) throw data_error("embedding dim must be >= 1");
    if ((extractor.n_buckets & (extractor.n_buckets - 1)) != 0) {
        throw data_error("n_buckets must be a power of two");
    }
    std::vector<int> labels;
    labels.reserve(data.size());
    for (const auto& d : data) labels.push_back(d.second);
    check_classes_present(labels);

    FastTextModel m;
    m.dim = dim;
    m.extractor = extractor;
    m.output.assign(static_cast<size_t>(kNumLabels) * dim, 0.0);
    m.embeddings.assign(static_cast<size_t>(extractor.n_buckets) * dim, 0.0);
    Rng rng(cfg.seed);
    const double bound = 1.0 / static_cast<double>(dim);
    for (double& v : m.embeddings) v = (2.0 * rng.next_double() - 1.0) * bound;

    std::array<uint64_t, kNumLabels> label_counts{};
    std::vector<std::pair<FeatureVector, int>> docs;
    docs.reserve(data.size());
    for (const auto& [tokens, y] : data) {
        if (y < 0 || y >= kNumLabels) throw data_error("label code out of range");
        ++label_counts[y];
        auto hashed = hash_ngrams(tokens, extractor);
        if (hashed.empty()) {
            ++m.skipped_empty;
            continue;
        }
        docs.emplace_back(std::move(hashed), y);
    }
    const uint64_t n_labeled = data.size();
    for (int c = 0; c < kNumLabels; ++c) {
        m.priors[c] = n_labeled ? static_cast<double>(label_counts[c]) / n_labeled : 1.0 / 3.0;
    }
    if (docs.empty()) return m;

    std::vector<size_t> order(docs.size());
    std::iota(order.begin(), order.end(), 0);
    const double total_steps = static_cast<double>(docs.size()) * cfg.epochs;
    std::vector<double> dh(dim);
    size_t t = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (size_t idx : order) {
            const auto& [hashed, y] = docs[idx];
            const double lr = cfg.learning_rate * (1.0 - static_cast<double>(t) / total_steps);
            const Hidden hid = fasttext_hidden(m, hashed);
            auto z = fasttext_logits(m, hid.h);
            const double w = example_weight(cfg, y);
            loss_sum += w * (log_sum_exp(z) - z[y]);
            const auto p = softmax3(z);
            std::array<double, kNumLabels> dz{};
            for (int c = 0; c < kNumLabels; ++c) dz[c] = (p[c] - (c == y ? 1.0 : 0.0)) * w;
            // backprop into the hidden vector before touching the output matrix
            std::fill(dh.begin(), dh.end(), 0.0);
            for (int c = 0; c < kNumLabels; ++c) {
                const double* u = m.output.data() + static_cast<size_t>(c) * dim;
                for (uint32_t d = 0; d < dim; ++d) dh[d] += dz[c] * u[d];
            }
            for (int c = 0; c < kNumLabels; ++c) {
                double* u = m.output.data() + static_cast<size_t>(c) * dim;
                for (uint32_t d = 0; d < dim; ++d) u[d] -= lr * dz[c] * hid.h[d];
                m.bias[c] -= lr * dz[c];
            }
            for (const auto& e : hashed) {
                double* row = m.embeddings.data() + static_cast<size_t>(e.index) * dim;
                const double coef = lr * e.weight / hid.total;
                for (uint32_t d = 0; d < dim; ++d) row[d] -= coef * dh[d];
            }
            ++t;
        }
        if (epoch_loss) epoch_loss->push_back(loss_sum / static_cast<double>(docs.size()));
    }
    return m;
}

Prediction fasttext_predict(const FastTextModel& m, const FeatureVector& hashed) {
    Prediction out;
    if (hashed.empty()) {
        for (int c = 0; c < kNumLabels; ++c) out.probs[c] = m.priors[c];
        out.label_code = argmax_lowest(out.probs.data(), kNumLabels);
        return out;
    }
    const Hidden hid = fasttext_hidden(m, hashed);
    out.probs = softmax3(fasttext_logits(m, hid.h));
    out.label_code = argmax_lowest(out.probs.data(), kNumLabels);
    return out;
}

double fasttext_example_loss(const FastTextModel& m, const FeatureVector& hashed, int label) {
    if (hashed.empty()) return -std::log(std::max(m.priors[label], 1e-12));
    const Hidden hid = fasttext_hidden(m, hashed);
    const auto z = fasttext_logits(m, hid.h);
    return log_sum_exp(z) - z[label];
}

FastTextGrad fasttext_example_grad(const FastTextModel& m, const FeatureVector& hashed,
                                   int label) {
    FastTextGrad g;
    g.d_output.assign(static_cast<size_t>(kNumLabels) * m.dim, 0.0);
    if (hashed.empty()) return g;
    const Hidden hid = fasttext_hidden(m, hashed);
    const auto p = softmax3(fasttext_logits(m, hid.h));
    std::array<double, kNumLabels> dz{};
    for (int c = 0; c < kNumLabels; ++c) dz[c] = p[c] - (c == label ? 1.0 : 0.0);
    g.d_bias = dz;
    for (int c = 0; c < kNumLabels; ++c) {
        for (uint32_t d = 0; d < m.dim; ++d) {
            g.d_output[static_cast<size_t>(c) * m.dim + d] = dz[c] * hid.h[d];
        }
    }
    std::vector<double> dh(m.dim, 0.0);
    for (int c = 0; c < kNumLabels; ++c) {
        const double* u = m.output.data() + static_cast<size_t>(c) * m.dim;
        for (uint32_t d = 0; d < m.dim; ++d) dh[d] += dz[c] * u[d];
    }
    g.d_embeddings.reserve(hashed.size());
    for (const auto& e : hashed) {
        std::vector<double> row(m.dim);
        const double coef = e.weight / hid.total;
        for (uint32_t d = 0; d < m.dim; ++d) row[d] = coef * dh[d];
        g.d_embeddings.emplace_back(e.index, std::move(row));
    }
    return g;
}

}  // namespace itk
