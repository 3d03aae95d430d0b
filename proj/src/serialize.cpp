#include "itk/serialize.h"

#include "itk/errors.h"

namespace itk {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const char* what) {
    if (!j.is_object()) throw schema_error(std::string(what) + ": expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* k : allowed) {
            if (key == k) {
                known = true;
                break;
            }
        }
        if (!known) throw schema_error(std::string(what) + ": unknown key '" + key + "'");
    }
}

template <typename T>
void read_into(const json& j, const char* key, T& out) {
    if (const auto it = j.find(key); it != j.end()) {
        try {
            it->get_to(out);
        } catch (const json::exception& e) {
            throw schema_error(std::string("bad value for '") + key + "': " + e.what());
        }
    }
}

}  // namespace

json norm_config_json(const NormalizationConfig& cfg) {
    json sentinels = json::array();
    for (const auto& r : cfg.sentinel_set) {
        sentinels.push_back({{"name", r.name}, {"pattern_id", r.pattern_id}});
    }
    json fields = json::array();
    for (Field f : cfg.field_selection) fields.push_back(std::string(field_name(f)));
    return {{"sentinel_set", sentinels},
            {"repo_base_url", cfg.repo_base_url},
            {"max_tokens", cfg.max_tokens},
            {"field_selection", fields}};
}

NormalizationConfig norm_config_from_json(const json& j) {
    check_keys(j, {"sentinel_set", "repo_base_url", "max_tokens", "field_selection"},
               "normalization");
    NormalizationConfig cfg;
    if (const auto it = j.find("sentinel_set"); it != j.end()) {
        cfg.sentinel_set.clear();
        for (const auto& r : *it) {
            check_keys(r, {"name", "pattern_id"}, "sentinel rule");
            SentinelRule rule;
            read_into(r, "name", rule.name);
            rule.pattern_id = rule.name;
            read_into(r, "pattern_id", rule.pattern_id);
            if (rule.name.empty()) throw schema_error("sentinel rule without a name");
            cfg.sentinel_set.push_back(std::move(rule));
        }
    }
    read_into(j, "repo_base_url", cfg.repo_base_url);
    read_into(j, "max_tokens", cfg.max_tokens);
    if (cfg.max_tokens < 0) throw schema_error("max_tokens must be >= 0");
    if (const auto it = j.find("field_selection"); it != j.end()) {
        cfg.field_selection.clear();
        for (const auto& name : *it) {
            cfg.field_selection.push_back(parse_field(name.get<std::string>()));
        }
    }
    return cfg;
}

json vocab_json(const Vocabulary& v) {
    return {{"version", 1},
            {"terms", v.terms},
            {"document_frequency", v.document_frequency},
            {"n_documents", v.n_documents},
            {"min_df", v.min_df},
            {"max_terms", v.max_terms}};
}

Vocabulary vocab_from_json(const json& j) {
    check_keys(j, {"version", "terms", "document_frequency", "n_documents", "min_df", "max_terms"},
               "vocabulary");
    if (j.value("version", 0) != 1) throw schema_error("unsupported vocabulary version");
    Vocabulary v;
    read_into(j, "terms", v.terms);
    read_into(j, "document_frequency", v.document_frequency);
    read_into(j, "n_documents", v.n_documents);
    read_into(j, "min_df", v.min_df);
    read_into(j, "max_terms", v.max_terms);
    if (v.terms.size() != v.document_frequency.size()) {
        throw schema_error("vocabulary terms and document_frequency lengths differ");
    }
    v.term_to_index.reserve(v.terms.size());
    for (uint32_t i = 0; i < v.terms.size(); ++i) v.term_to_index.emplace(v.terms[i], i);
    return v;
}

json extractor_json(const HashedNgramExtractor& e) {
    return {{"n_buckets", e.n_buckets}, {"ngram_orders", e.ngram_orders},
            {"hash_seed", e.hash_seed}};
}

HashedNgramExtractor extractor_from_json(const json& j) {
    check_keys(j, {"n_buckets", "ngram_orders", "hash_seed"}, "extractor");
    HashedNgramExtractor e;
    read_into(j, "n_buckets", e.n_buckets);
    read_into(j, "ngram_orders", e.ngram_orders);
    read_into(j, "hash_seed", e.hash_seed);
    if (e.n_buckets == 0 || (e.n_buckets & (e.n_buckets - 1)) != 0) {
        throw schema_error("n_buckets must be a power of two");
    }
    return e;
}

json train_config_json(const TrainConfig& cfg) {
    json j = {{"epochs", cfg.epochs},
              {"learning_rate", cfg.learning_rate},
              {"lr_decay", cfg.lr_decay},
              {"l2", cfg.l2},
              {"seed", cfg.seed}};
    if (!cfg.class_weights.empty()) j["class_weights"] = cfg.class_weights;
    return j;
}

TrainConfig train_config_from_json(const json& j, const TrainConfig& defaults) {
    check_keys(j, {"epochs", "learning_rate", "lr_decay", "l2", "seed", "class_weights"},
               "train config");
    TrainConfig cfg = defaults;
    read_into(j, "epochs", cfg.epochs);
    read_into(j, "learning_rate", cfg.learning_rate);
    read_into(j, "lr_decay", cfg.lr_decay);
    read_into(j, "l2", cfg.l2);
    read_into(j, "seed", cfg.seed);
    read_into(j, "class_weights", cfg.class_weights);
    return cfg;
}

json transformer_config_json(const TransformerConfig& cfg) {
    return {{"vocab_size", cfg.vocab_size},
            {"max_len", cfg.max_len},
            {"d_model", cfg.d_model},
            {"n_heads", cfg.n_heads},
            {"n_layers", cfg.n_layers},
            {"d_ff", cfg.d_ff},
            {"dropout", cfg.dropout},
            {"learning_rate", cfg.learning_rate},
            {"epochs", cfg.epochs},
            {"batch_size", cfg.batch_size}};
}

TransformerConfig transformer_config_from_json(const json& j) {
    check_keys(j,
               {"vocab_size", "max_len", "d_model", "n_heads", "n_layers", "d_ff", "dropout",
                "learning_rate", "epochs", "batch_size"},
               "transformer config");
    TransformerConfig cfg;
    read_into(j, "vocab_size", cfg.vocab_size);
    read_into(j, "max_len", cfg.max_len);
    read_into(j, "d_model", cfg.d_model);
    read_into(j, "n_heads", cfg.n_heads);
    read_into(j, "n_layers", cfg.n_layers);
    read_into(j, "d_ff", cfg.d_ff);
    read_into(j, "dropout", cfg.dropout);
    read_into(j, "learning_rate", cfg.learning_rate);
    read_into(j, "epochs", cfg.epochs);
    read_into(j, "batch_size", cfg.batch_size);
    cfg.validate();
    return cfg;
}

json stats_json(const CorpusStats& s) {
    return {{"n_records", s.n_records},
            {"n_duplicates_removed", s.n_duplicates_removed},
            {"n_empty_bodies", s.n_empty_bodies},
            {"mean_title_tokens", s.mean_title_tokens},
            {"mean_body_tokens", s.mean_body_tokens},
            {"median_body_tokens", s.median_body_tokens},
            {"per_label_counts", s.per_label_counts},
            {"per_role_counts", s.per_role_counts},
            {"empty_dataset", s.empty_dataset}};
}

}  // namespace itk
