#pragma once

#include <string>
#include <vector>

#include "itk/corpus.h"
#include "itk/metrics.h"
#include "itk/model_io.h"
#include "itk/normalize.h"
#include "itk/pipeline_config.h"

namespace itk {

// text,label_code CSV written by cmd_clean and consumed by train/eval.
void write_clean_csv(const std::string& path, const std::vector<CleanRecord>& records);
std::vector<CleanRecord> load_clean_csv(const std::string& path);

struct CleanResult {
    size_t n_input_rows = 0;   // labeled rows read (before dedup)
    size_t n_output_rows = 0;  // cleaned rows written
    size_t n_rejected = 0;     // unlabeled or url-less rows skipped
    size_t n_duplicates_removed = 0;
    CorpusStats stats;
};

// load -> deduplicate (train only) -> clean_record per row. Writes the clean
// CSV, and the stats JSON when stats_json_out is non-empty.
CleanResult cmd_clean(const std::string& raw_csv, const std::string& clean_csv_out,
                      const std::string& stats_json_out, const RunConfig& cfg,
                      Origin origin = Origin::train);

// Stats only, same ingestion path as cmd_clean.
CorpusStats cmd_stats(const std::string& raw_csv, const RunConfig& cfg,
                      Origin origin = Origin::train);
std::string stats_to_json_text(const CorpusStats& s);

// Trains cfg.model_kind on a clean CSV and writes the model container.
// loss_log_out, when non-empty, receives one line per epoch.
void cmd_train(const std::string& clean_csv, const std::string& model_out, const RunConfig& cfg,
               const std::string& loss_log_out = "");

// Scores a clean CSV; the model file is never modified.
MetricsReport cmd_eval(const std::string& model_path, const std::string& clean_csv);

// Prediction on text that already went through the cleaning pipeline.
Prediction predict_clean_text(const ModelBundle& b, const std::string& text);

// Cleans the given raw fields with the bundle's stored NormalizationConfig,
// then predicts. Missing fields are empty strings.
struct RawInput {
    std::string title, body, created_at, author_association, repository;
};
Prediction predict_raw(const ModelBundle& b, const RawInput& in);

// Shared by the CLI and the HTTP endpoint so both emit identical bytes:
// {"label":...,"label_code":...,"scores":{...}}
std::string predict_response_json(const ModelBundle& b, const RawInput& in);

}  // namespace itk
