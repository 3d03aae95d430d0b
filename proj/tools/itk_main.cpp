#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>

#include "itk/errors.h"
#include "itk/pipeline.h"
#include "itk/serialize.h"
#include "itk/server.h"

namespace {

using namespace itk;

std::vector<Field> parse_field_list(const std::string& csv) {
    std::vector<Field> fields;
    size_t pos = 0;
    while (pos <= csv.size()) {
        const size_t comma = csv.find(',', pos);
        const std::string name =
            csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!name.empty()) fields.push_back(parse_field(name));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (fields.empty()) throw schema_error("empty field list");
    return fields;
}

struct CommonFlags {
    std::string config_path;
    uint64_t seed = 0;
    bool seed_set = false;
    std::string model_kind;
    std::string fields;
    int max_tokens = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run config JSON file");
        cmd->add_option("--seed", seed, "override the config seed")
            ->each([this](const std::string&) { seed_set = true; });
        cmd->add_option("--model", model_kind, "model family")
            ->check(CLI::IsMember({"logreg", "fasttext", "transformer"}));
        cmd->add_option("--max-tokens", max_tokens, "override the cleaning token cutoff")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--fields", fields,
                        "comma-separated field subset (created_at,author_association,"
                        "repository,title,body)")
            ->check([](const std::string& v) -> std::string {
                try {
                    parse_field_list(v);
                    return {};
                } catch (const std::exception& e) {
                    return e.what();
                }
            });
    }

    RunConfig resolve() const {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        if (seed_set) cfg.seed = seed;
        if (!model_kind.empty()) cfg.model_kind = model_kind;
        if (max_tokens > 0) cfg.normalization.max_tokens = max_tokens;
        if (!fields.empty()) cfg.normalization.field_selection = parse_field_list(fields);
        return cfg;
    }
};

int run(int argc, char** argv) {
    CLI::App app{"GitHub issue triage toolkit: clean, train, evaluate, serve"};
    app.require_subcommand(1);

    auto* clean = app.add_subcommand("clean", "normalize a raw issue CSV");
    CommonFlags clean_flags;
    std::string clean_in, clean_out, clean_stats;
    bool clean_test = false;
    clean->add_option("--input", clean_in, "raw issue CSV")->required();
    clean->add_option("--output", clean_out, "cleaned text,label_code CSV")->required();
    clean->add_option("--stats", clean_stats, "also write corpus stats JSON here");
    clean->add_flag("--test", clean_test, "test split: keep duplicates");
    clean_flags.attach(clean);

    auto* stats = app.add_subcommand("stats", "corpus statistics for a raw issue CSV");
    CommonFlags stats_flags;
    std::string stats_in, stats_out;
    bool stats_test = false;
    stats->add_option("--input", stats_in, "raw issue CSV")->required();
    stats->add_option("--output", stats_out, "stats JSON path (default stdout)");
    stats->add_flag("--test", stats_test, "test split: keep duplicates");
    stats_flags.attach(stats);

    auto* train = app.add_subcommand("train", "train a classifier on a cleaned CSV");
    CommonFlags train_flags;
    std::string train_in, train_out, train_log;
    int train_epochs = -1;
    train->add_option("--input", train_in, "cleaned text,label_code CSV")->required();
    train->add_option("--output", train_out, "model file to write")->required();
    train->add_option("--epochs", train_epochs, "override epoch count");
    train->add_option("--log", train_log, "write per-epoch loss log here");
    train_flags.attach(train);

    auto* eval = app.add_subcommand("eval", "score a model on a cleaned CSV");
    std::string eval_model, eval_in, eval_report, eval_format = "table";
    eval->add_option("--model", eval_model, "model file")->required();
    eval->add_option("--input", eval_in, "cleaned text,label_code CSV")->required();
    eval->add_option("--report", eval_report, "also write the JSON report here");
    eval->add_option("--format", eval_format, "stdout format")
        ->check(CLI::IsMember({"table", "json"}));

    auto* predict = app.add_subcommand("predict", "classify one issue");
    std::string p_model, p_title, p_body, p_created, p_role, p_repo;
    predict->add_option("--model", p_model, "model file")->required();
    predict->add_option("--title", p_title, "issue title");
    predict->add_option("--body", p_body, "issue body");
    predict->add_option("--created-at", p_created, "creation timestamp");
    predict->add_option("--role", p_role, "author association");
    predict->add_option("--repository", p_repo, "repository API URL");

    auto* serve = app.add_subcommand("serve", "HTTP prediction endpoint");
    std::string s_model, s_host = "127.0.0.1";
    int s_port = 0;
    serve->add_option("--model", s_model, "model file")->required();
    serve->add_option("--port", s_port, "TCP port")->required();
    serve->add_option("--host", s_host, "bind address");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (clean->parsed()) {
        const RunConfig cfg = clean_flags.resolve();
        const auto r = cmd_clean(clean_in, clean_out, clean_stats, cfg,
                                 clean_test ? Origin::test : Origin::train);
        std::printf(
            "{\"input_rows\":%zu,\"output_rows\":%zu,\"rejected\":%zu,"
            "\"duplicates_removed\":%zu}\n",
            r.n_input_rows, r.n_output_rows, r.n_rejected, r.n_duplicates_removed);
    } else if (stats->parsed()) {
        const RunConfig cfg = stats_flags.resolve();
        const auto s = cmd_stats(stats_in, cfg, stats_test ? Origin::test : Origin::train);
        const std::string text = stats_to_json_text(s);
        if (stats_out.empty()) {
            std::fputs(text.c_str(), stdout);
        } else {
            std::ofstream out(stats_out, std::ios::binary | std::ios::trunc);
            if (!out) throw io_error("cannot open for writing: " + stats_out);
            out << text;
        }
    } else if (train->parsed()) {
        RunConfig cfg = train_flags.resolve();
        if (train_epochs >= 0) {
            cfg.logreg.epochs = train_epochs;
            cfg.fasttext.epochs = train_epochs;
            cfg.transformer.epochs = train_epochs;
        }
        cmd_train(train_in, train_out, cfg, train_log);
        std::printf("wrote %s\n", train_out.c_str());
    } else if (eval->parsed()) {
        const MetricsReport report = cmd_eval(eval_model, eval_in);
        const auto fmt = eval_format == "json" ? ReportFormat::json : ReportFormat::table;
        std::fputs(render_report(report, fmt).c_str(), stdout);
        if (fmt == ReportFormat::table) std::fputc('\n', stdout);
        if (!eval_report.empty()) {
            std::ofstream out(eval_report, std::ios::binary | std::ios::trunc);
            if (!out) throw io_error("cannot open for writing: " + eval_report);
            out << render_report(report, ReportFormat::json) << "\n";
        }
    } else if (predict->parsed()) {
        const ModelBundle bundle = load_model(p_model);
        const RawInput in{p_title, p_body, p_created, p_role, p_repo};
        std::printf("%s\n", predict_response_json(bundle, in).c_str());
    } else if (serve->parsed()) {
        auto bundle = std::make_shared<const ModelBundle>(load_model(s_model));
        auto server = make_server(bundle);
        std::fprintf(stderr, "serving %s model on %s:%d\n", bundle->model_kind.c_str(),
                     s_host.c_str(), s_port);
        serve_blocking(*server, s_host, s_port);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
