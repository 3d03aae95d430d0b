#include "itk/pipeline.h"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "itk/csv.h"
#include "itk/errors.h"
#include "itk/serialize.h"

namespace itk {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + path);
    out << content;
    if (!out.flush()) throw io_error("write failed: " + path);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
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

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw schema_error(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, {"seed", "model_kind", "normalization", "features", "logreg", "fasttext",
                   "transformer"},
               "run config");
    RunConfig cfg;
    if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
    if (j.contains("model_kind")) cfg.model_kind = j.at("model_kind").get<std::string>();
    if (cfg.model_kind != "logreg" && cfg.model_kind != "fasttext" &&
        cfg.model_kind != "transformer") {
        throw schema_error("model_kind must be logreg, fasttext or transformer");
    }
    if (j.contains("normalization")) {
        cfg.normalization = norm_config_from_json(j.at("normalization"));
    }
    if (j.contains("features")) {
        const auto& f = j.at("features");
        check_keys(f, {"min_df", "max_terms", "extractor", "fasttext_dim"}, "features");
        if (f.contains("min_df")) cfg.features.min_df = f.at("min_df").get<uint32_t>();
        if (f.contains("max_terms")) cfg.features.max_terms = f.at("max_terms").get<uint32_t>();
        if (f.contains("extractor")) {
            cfg.features.extractor = extractor_from_json(f.at("extractor"));
        }
        if (f.contains("fasttext_dim")) {
            cfg.features.fasttext_dim = f.at("fasttext_dim").get<uint32_t>();
        }
    }
    if (j.contains("logreg")) cfg.logreg = train_config_from_json(j.at("logreg"), cfg.logreg);
    if (j.contains("fasttext")) {
        cfg.fasttext = train_config_from_json(j.at("fasttext"), cfg.fasttext);
    }
    if (j.contains("transformer")) {
        cfg.transformer = transformer_config_from_json(j.at("transformer"));
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_file(path)); }

std::string run_config_to_json_text(const RunConfig& cfg) {
    const json j = {{"seed", cfg.seed},
                    {"model_kind", cfg.model_kind},
                    {"normalization", norm_config_json(cfg.normalization)},
                    {"features",
                     {{"min_df", cfg.features.min_df},
                      {"max_terms", cfg.features.max_terms},
                      {"extractor", extractor_json(cfg.features.extractor)},
                      {"fasttext_dim", cfg.features.fasttext_dim}}},
                    {"logreg", train_config_json(cfg.logreg)},
                    {"fasttext", train_config_json(cfg.fasttext)},
                    {"transformer", transformer_config_json(cfg.transformer)}};
    return j.dump(2) + "\n";
}

void write_clean_csv(const std::string& path, const std::vector<CleanRecord>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + path);
    csv::write_row(out, {"text", "label_code"});
    for (const auto& r : records) {
        csv::write_row(out, {r.text, std::to_string(r.label_code)});
    }
    if (!out.flush()) throw io_error("write failed: " + path);
}

std::vector<CleanRecord> load_clean_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open: " + path);
    csv::Reader reader(in);
    const auto header = reader.next_row();
    if (!header || header->size() != 2 || (*header)[0] != "text" ||
        (*header)[1] != "label_code") {
        throw schema_error(path + ": expected a text,label_code header");
    }
    std::vector<CleanRecord> records;
    while (auto row = reader.next_row()) {
        if (row->size() != 2) {
            throw data_error(path + ": row " + std::to_string(reader.row_number()) +
                             ": expected 2 fields");
        }
        CleanRecord r;
        r.text = std::move((*row)[0]);
        try {
            r.label_code = std::stoi((*row)[1]);
        } catch (const std::exception&) {
            throw data_error(path + ": row " + std::to_string(reader.row_number()) +
                             ": label_code is not an integer");
        }
        if (r.label_code < 0 || r.label_code >= kNumLabels) {
            throw data_error(path + ": row " + std::to_string(reader.row_number()) +
                             ": label_code out of range");
        }
        records.push_back(std::move(r));
    }
    return records;
}

CleanResult cmd_clean(const std::string& raw_csv, const std::string& clean_csv_out,
                      const std::string& stats_json_out, const RunConfig& cfg, Origin origin) {
    Dataset d = load_csv(raw_csv, origin);
    CleanResult result;
    result.n_input_rows = d.records.size();
    result.n_rejected = d.rejected_count;
    if (origin == Origin::train) {
        auto [deduped, removed] = deduplicate(d);
        d = std::move(deduped);
        result.n_duplicates_removed = removed;
    }
    std::vector<CleanRecord> cleaned;
    cleaned.reserve(d.records.size());
    for (const auto& r : d.records) cleaned.push_back(clean_record(r, cfg.normalization));
    result.n_output_rows = cleaned.size();
    write_clean_csv(clean_csv_out, cleaned);
    result.stats = compute_stats(d, cleaning_token_counter(cfg.normalization),
                                 result.n_duplicates_removed);
    if (!stats_json_out.empty()) {
        write_file(stats_json_out, stats_to_json_text(result.stats));
    }
    return result;
}

CorpusStats cmd_stats(const std::string& raw_csv, const RunConfig& cfg, Origin origin) {
    Dataset d = load_csv(raw_csv, origin);
    size_t removed = 0;
    if (origin == Origin::train) {
        auto [deduped, n] = deduplicate(d);
        d = std::move(deduped);
        removed = n;
    }
    return compute_stats(d, cleaning_token_counter(cfg.normalization), removed);
}

std::string stats_to_json_text(const CorpusStats& s) { return stats_json(s).dump(2) + "\n"; }

void cmd_train(const std::string& clean_csv, const std::string& model_out, const RunConfig& cfg,
               const std::string& loss_log_out) {
    const auto records = load_clean_csv(clean_csv);
    if (records.empty()) throw data_error(clean_csv + ": no training rows");

    ModelBundle bundle;
    bundle.model_kind = cfg.model_kind;
    bundle.seed = cfg.seed;
    bundle.normalization = cfg.normalization;
    std::vector<double> epoch_loss;

    if (cfg.model_kind == "logreg") {
        std::vector<std::string> docs;
        docs.reserve(records.size());
        for (const auto& r : records) docs.push_back(r.text);
        Vocabulary vocab = fit_vocab(docs, cfg.features.min_df, cfg.features.max_terms);
        LabeledFeatures data;
        data.reserve(records.size());
        for (const auto& r : records) {
            data.emplace_back(tfidf_transform(tokenize(r.text), vocab), r.label_code);
        }
        TrainConfig tc = cfg.logreg;
        tc.seed = cfg.seed;
        bundle.logreg =
            logreg_train(data, tc, static_cast<uint32_t>(vocab.size()), &epoch_loss);
        bundle.vocabulary = std::move(vocab);
    } else if (cfg.model_kind == "fasttext") {
        LabeledTokenDocs data;
        data.reserve(records.size());
        for (const auto& r : records) data.emplace_back(tokenize(r.text), r.label_code);
        TrainConfig tc = cfg.fasttext;
        tc.seed = cfg.seed;
        bundle.fasttext = fasttext_train(data, cfg.features.extractor, tc,
                                         cfg.features.fasttext_dim, &epoch_loss);
    } else if (cfg.model_kind == "transformer") {
        bundle.transformer = transformer_train(records, cfg.transformer, cfg.seed, &epoch_loss);
    } else {
        throw schema_error("model_kind must be logreg, fasttext or transformer");
    }

    save_model(bundle, model_out);
    if (!loss_log_out.empty()) {
        std::ostringstream log;
        for (size_t e = 0; e < epoch_loss.size(); ++e) {
            log << "epoch " << (e + 1) << " loss " << epoch_loss[e] << "\n";
        }
        write_file(loss_log_out, log.str());
    }
}

Prediction predict_clean_text(const ModelBundle& b, const std::string& text) {
    if (b.model_kind == "logreg") {
        return logreg_predict(*b.logreg, tfidf_transform(tokenize(text), *b.vocabulary));
    }
    if (b.model_kind == "fasttext") {
        return fasttext_predict(*b.fasttext, hash_ngrams(tokenize(text), b.fasttext->extractor));
    }
    return transformer_predict(*b.transformer, text);
}

MetricsReport cmd_eval(const std::string& model_path, const std::string& clean_csv) {
    const ModelBundle bundle = load_model(model_path);
    const auto records = load_clean_csv(clean_csv);
    std::vector<int> truth, pred;
    truth.reserve(records.size());
    pred.reserve(records.size());
    for (const auto& r : records) {
        truth.push_back(r.label_code);
        pred.push_back(predict_clean_text(bundle, r.text).label_code);
    }
    return evaluate(truth, pred);
}

Prediction predict_raw(const ModelBundle& b, const RawInput& in) {
    IssueRecord r;
    r.title = in.title;
    r.body = in.body;
    r.created_at = in.created_at;
    r.author_association = in.author_association;
    r.repository_url = in.repository;
    const CleanRecord cleaned = clean_record(r, b.normalization);
    return predict_clean_text(b, cleaned.text);
}

std::string predict_response_json(const ModelBundle& b, const RawInput& in) {
    const Prediction p = predict_raw(b, in);
    const json j = {{"label", std::string(label_name(static_cast<Label>(p.label_code)))},
                    {"label_code", p.label_code},
                    {"scores",
                     {{"bug", p.probs[0]},
                      {"enhancement", p.probs[1]},
                      {"question", p.probs[2]}}}};
    return j.dump();
}

}  // namespace itk
