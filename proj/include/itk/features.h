#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace itk {

// Whitespace tokenizer for already-normalized text. No empty tokens.
std::vector<std::string> tokenize(std::string_view text);

// 64-bit FNV-1a over raw bytes.
uint64_t fnv1a64(std::string_view bytes);

struct FeatureEntry {
    uint32_t index;
    double weight;
};

// Sorted by index, strictly increasing, no zero weights.
using FeatureVector = std::vector<FeatureEntry>;

struct Vocabulary {
    std::vector<std::string> terms;             // index -> term
    std::vector<uint32_t> document_frequency;   // index -> df
    std::unordered_map<std::string, uint32_t> term_to_index;
    uint64_t n_documents = 0;
    uint32_t min_df = 2;
    uint32_t max_terms = 200000;

    size_t size() const { return terms.size(); }
};

// Counts document frequencies, keeps terms with df >= min_df, orders by
// (df desc, term asc) and truncates to max_terms before assigning indices.
// Throws data_error on an empty corpus.
Vocabulary fit_vocab(const std::vector<std::string>& docs, uint32_t min_df = 2,
                     uint32_t max_terms = 200000);

// weight(t) = tf(t) * (ln((1+N)/(1+df(t))) + 1), L2-normalized.
// Out-of-vocabulary tokens are dropped.
FeatureVector tfidf_transform(const std::vector<std::string>& tokens, const Vocabulary& vocab);

struct HashedNgramExtractor {
    uint32_t n_buckets = 1u << 21;     // must be a power of two
    std::vector<int> ngram_orders = {1, 2};
    uint64_t hash_seed = 0;

    uint32_t bucket(std::string_view ngram) const;
};

// Bucket counts for every n-gram of each configured order; collisions sum.
FeatureVector hash_ngrams(const std::vector<std::string>& tokens,
                          const HashedNgramExtractor& extractor);

}  // namespace itk
