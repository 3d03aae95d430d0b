#include "itk/features.h"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "itk/errors.h"

namespace itk {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])) != 0) ++i;
        const size_t begin = i;
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])) == 0) ++i;
        if (i > begin) tokens.emplace_back(text.substr(begin, i - begin));
    }
    return tokens;
}

uint64_t fnv1a64(std::string_view bytes) {
    uint64_t h = 14695981039346656037ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

Vocabulary fit_vocab(const std::vector<std::string>& docs, uint32_t min_df, uint32_t max_terms) {
    if (docs.empty()) throw data_error("fit_vocab: empty corpus");
    std::unordered_map<std::string, uint32_t> df;
    for (const auto& doc : docs) {
        // count each term once per document
        auto toks = tokenize(doc);
        std::sort(toks.begin(), toks.end());
        toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
        for (auto& tok : toks) ++df[std::move(tok)];
    }

    std::vector<std::pair<std::string_view, uint32_t>> kept;
    kept.reserve(df.size());
    for (const auto& [term, count] : df) {
        if (count >= min_df) kept.emplace_back(term, count);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (kept.size() > max_terms) kept.resize(max_terms);

    Vocabulary v;
    v.n_documents = docs.size();
    v.min_df = min_df;
    v.max_terms = max_terms;
    v.terms.reserve(kept.size());
    v.document_frequency.reserve(kept.size());
    for (const auto& [term, count] : kept) {
        v.term_to_index.emplace(std::string(term), static_cast<uint32_t>(v.terms.size()));
        v.terms.emplace_back(term);
        v.document_frequency.push_back(count);
    }
    return v;
}

FeatureVector tfidf_transform(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
    std::unordered_map<uint32_t, uint32_t> tf;
    for (const auto& tok : tokens) {
        const auto it = vocab.term_to_index.find(tok);
        if (it != vocab.term_to_index.end()) ++tf[it->second];
    }
    FeatureVector out;
    out.reserve(tf.size());
    const double n = static_cast<double>(vocab.n_documents);
    double norm_sq = 0.0;
    for (const auto& [index, count] : tf) {
        const double idf = std::log((1.0 + n) / (1.0 + vocab.document_frequency[index])) + 1.0;
        const double w = static_cast<double>(count) * idf;
        out.push_back({index, w});
        norm_sq += w * w;
    }
    const double norm = std::sqrt(norm_sq);
    if (norm > 0.0) {
        for (auto& e : out) e.weight /= norm;
    }
    std::sort(out.begin(), out.end(),
              [](const FeatureEntry& a, const FeatureEntry& b) { return a.index < b.index; });
    return out;
}

uint32_t HashedNgramExtractor::bucket(std::string_view ngram) const {
    return static_cast<uint32_t>((fnv1a64(ngram) ^ hash_seed) & (n_buckets - 1));
}

FeatureVector hash_ngrams(const std::vector<std::string>& tokens,
                          const HashedNgramExtractor& extractor) {
    std::unordered_map<uint32_t, double> counts;
    std::string joined;
    for (int order : extractor.ngram_orders) {
        if (order < 1 || static_cast<size_t>(order) > tokens.size()) continue;
        for (size_t i = 0; i + order <= tokens.size(); ++i) {
            joined.clear();
            for (size_t j = 0; j < static_cast<size_t>(order); ++j) {
                if (j) joined.push_back(' ');
                joined.append(tokens[i + j]);
            }
            counts[extractor.bucket(joined)] += 1.0;
        }
    }
    FeatureVector out;
    out.reserve(counts.size());
    for (const auto& [index, count] : counts) out.push_back({index, count});
    std::sort(out.begin(), out.end(),
              [](const FeatureEntry& a, const FeatureEntry& b) { return a.index < b.index; });
    return out;
}

}  // namespace itk
