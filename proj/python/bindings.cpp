// Python bindings for the cleaning, training, evaluation and prediction
// entry points. Config goes in and reports come out as JSON text so the
// Python surface stays free of mirrored struct definitions.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <vector>

#include "itk/errors.h"
#include "itk/features.h"
#include "itk/metrics.h"
#include "itk/pipeline.h"
#include "itk/pipeline_config.h"

namespace py = pybind11;
using namespace itk;

namespace {

RunConfig config_from(const std::string& config_json) {
    if (config_json.empty()) return RunConfig{};
    return parse_run_config(config_json);
}

Origin origin_from(const std::string& name) {
    if (name == "train") return Origin::train;
    if (name == "test") return Origin::test;
    throw data_error("origin must be \"train\" or \"test\", got \"" + name + "\"");
}

// Keeps one loaded model alive across predict calls.
class Predictor {
  public:
    explicit Predictor(const std::string& model_path)
        : bundle_(std::make_shared<const ModelBundle>(load_model(model_path))) {}

    std::string predict_json(const std::string& title, const std::string& body,
                             const std::string& created_at, const std::string& author_association,
                             const std::string& repository) const {
        RawInput in;
        in.title = title;
        in.body = body;
        in.created_at = created_at;
        in.author_association = author_association;
        in.repository = repository;
        return predict_response_json(*bundle_, in);
    }

    std::string model_kind() const { return bundle_->model_kind; }

  private:
    std::shared_ptr<const ModelBundle> bundle_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "issue corpus cleaning and classification";

    py::register_exception<io_error>(m, "IoError", PyExc_OSError);
    py::register_exception<schema_error>(m, "SchemaError", PyExc_ValueError);
    py::register_exception<data_error>(m, "DataError", PyExc_ValueError);
    py::register_exception<model_format_error>(m, "ModelFormatError", PyExc_ValueError);

    m.def(
        "clean_text",
        [](const std::string& text, const std::string& config_json) {
            return clean_free_text(text, config_from(config_json).normalization);
        },
        py::arg("text"), py::arg("config_json") = "",
        "Run the full title/body normalization pipeline on one string.");

    m.def(
        "clean_issue",
        [](const std::string& title, const std::string& body, const std::string& created_at,
           const std::string& author_association, const std::string& repository,
           const std::string& config_json) {
            IssueRecord r;
            r.title = title;
            r.body = body;
            r.created_at = created_at;
            r.author_association = author_association;
            r.repository_url = repository;
            return clean_record(r, config_from(config_json).normalization).text;
        },
        py::arg("title"), py::arg("body") = "", py::arg("created_at") = "",
        py::arg("author_association") = "", py::arg("repository") = "",
        py::arg("config_json") = "",
        "Clean one issue's fields and return the joined model input text.");

    m.def("tokenize", &tokenize, py::arg("text"),
          "Whitespace tokens of an already-normalized string.");

    m.def(
        "fnv1a64", [](const std::string& s) { return fnv1a64(s); }, py::arg("data"),
        "64-bit FNV-1a hash of the given bytes.");

    m.def("default_config_json", [] { return run_config_to_json_text(RunConfig{}); },
          "The full run configuration with every default filled in.");

    m.def(
        "evaluate_json",
        [](const std::vector<int>& truth, const std::vector<int>& pred) {
            return render_report(evaluate(truth, pred), ReportFormat::json);
        },
        py::arg("truth"), py::arg("pred"),
        "Per-class and micro-averaged metrics as a JSON document.");

    m.def(
        "evaluate_table",
        [](const std::vector<int>& truth, const std::vector<int>& pred) {
            return render_report(evaluate(truth, pred), ReportFormat::table);
        },
        py::arg("truth"), py::arg("pred"), "Metrics rendered as a fixed-point text table.");

    m.def(
        "clean_file",
        [](const std::string& raw_csv, const std::string& clean_csv_out,
           const std::string& stats_json_out, const std::string& config_json,
           const std::string& origin) {
            const auto r = cmd_clean(raw_csv, clean_csv_out, stats_json_out,
                                     config_from(config_json), origin_from(origin));
            py::dict d;
            d["n_input_rows"] = r.n_input_rows;
            d["n_output_rows"] = r.n_output_rows;
            d["n_rejected"] = r.n_rejected;
            d["n_duplicates_removed"] = r.n_duplicates_removed;
            return d;
        },
        py::arg("raw_csv"), py::arg("clean_csv_out"), py::arg("stats_json_out") = "",
        py::arg("config_json") = "", py::arg("origin") = "train",
        "Ingest a raw issue CSV and write the cleaned text,label_code CSV.");

    m.def(
        "stats_json",
        [](const std::string& raw_csv, const std::string& config_json,
           const std::string& origin) {
            const auto cfg = config_from(config_json);
            return stats_to_json_text(cmd_stats(raw_csv, cfg, origin_from(origin)));
        },
        py::arg("raw_csv"), py::arg("config_json") = "", py::arg("origin") = "train",
        "Corpus statistics of a raw issue CSV as JSON.");

    m.def(
        "train_file",
        [](const std::string& clean_csv, const std::string& model_out,
           const std::string& config_json, const std::string& loss_log_out) {
            cmd_train(clean_csv, model_out, config_from(config_json), loss_log_out);
        },
        py::arg("clean_csv"), py::arg("model_out"), py::arg("config_json") = "",
        py::arg("loss_log_out") = "", "Train on a clean CSV and write the model container.");

    m.def(
        "eval_file",
        [](const std::string& model_path, const std::string& clean_csv) {
            return render_report(cmd_eval(model_path, clean_csv), ReportFormat::json);
        },
        py::arg("model_path"), py::arg("clean_csv"),
        "Score a clean CSV with a saved model; returns the JSON report.");

    py::class_<Predictor>(m, "Predictor", "A loaded model ready to classify raw issues.")
        .def(py::init<const std::string&>(), py::arg("model_path"))
        .def("predict_json", &Predictor::predict_json, py::arg("title"), py::arg("body") = "",
             py::arg("created_at") = "", py::arg("author_association") = "",
             py::arg("repository") = "",
             "Classification response as the canonical JSON bytes.")
        .def_property_readonly("model_kind", &Predictor::model_kind);
}
