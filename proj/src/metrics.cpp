#include "itk/metrics.h"

#include <cctype>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "itk/errors.h"

namespace itk {

uint64_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), uint64_t{0});
}

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& pred,
                          int n_classes) {
    if (truth.size() != pred.size()) {
        throw data_error("confusion: truth and prediction lengths differ");
    }
    ConfusionMatrix cm(n_classes);
    for (size_t i = 0; i < truth.size(); ++i) {
        const int t = truth[i];
        const int p = pred[i];
        if (t < 0 || t >= n_classes || p < 0 || p >= n_classes) {
            throw data_error("confusion: label code out of range at pair " + std::to_string(i));
        }
        ++cm.at(t, p);
    }
    return cm;
}

std::vector<ClassMetrics> per_class(const ConfusionMatrix& cm) {
    const uint64_t total = cm.total();
    std::vector<ClassMetrics> out(cm.n_classes);
    for (int c = 0; c < cm.n_classes; ++c) {
        ClassMetrics& m = out[c];
        m.tp = cm.at(c, c);
        for (int k = 0; k < cm.n_classes; ++k) {
            if (k == c) continue;
            m.fp += cm.at(k, c);
            m.fn += cm.at(c, k);
        }
        m.tn = total - m.tp - m.fp - m.fn;
        if (m.tp + m.fp > 0) {
            m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
        } else {
            m.degenerate = true;
        }
        if (m.tp + m.fn > 0) {
            m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
        } else {
            m.degenerate = true;
        }
        // Equals 2PR/(P+R) but stays exact on integer counts.
        if (2 * m.tp + m.fp + m.fn > 0) {
            m.f1 = static_cast<double>(2 * m.tp) / static_cast<double>(2 * m.tp + m.fp + m.fn);
        } else {
            m.degenerate = true;
        }
    }
    return out;
}

MicroMetrics micro(const ConfusionMatrix& cm) {
    uint64_t tp = 0, fp = 0, fn = 0;
    for (const auto& m : per_class(cm)) {
        tp += m.tp;
        fp += m.fp;
        fn += m.fn;
    }
    MicroMetrics out;
    if (tp + fp > 0) out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn > 0) out.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (2 * tp + fp + fn > 0) {
        out.f1 = static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
    }
    return out;
}

std::vector<std::string> default_class_names(int n_classes) {
    if (n_classes == 3) return {"bug", "enhancement", "question"};
    std::vector<std::string> names;
    names.reserve(n_classes);
    for (int c = 0; c < n_classes; ++c) names.push_back("class_" + std::to_string(c));
    return names;
}

MetricsReport evaluate(const std::vector<int>& truth, const std::vector<int>& pred, int n_classes,
                       std::vector<std::string> class_names) {
    MetricsReport r{confusion(truth, pred, n_classes), {}, {}, truth.size(), {}};
    r.classes = per_class(r.cm);
    r.micro_avg = micro(r.cm);
    r.class_names = class_names.empty() ? default_class_names(n_classes) : std::move(class_names);
    if (r.class_names.size() != static_cast<size_t>(n_classes)) {
        throw data_error("evaluate: class name count does not match class count");
    }
    return r;
}

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

namespace {

std::string display_name(const std::string& name) {
    std::string s = name;
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::string render_table(const MetricsReport& r) {
    size_t width = 9;  // "Micro Avg"
    for (const auto& n : r.class_names) width = std::max(width, n.size());
    std::ostringstream os;
    os << "Class";
    os << std::string(width - 5 + 2, ' ') << "Precision  Recall      F1\n";
    const auto row = [&](const std::string& name, double p, double rec, double f1) {
        os << name << std::string(width - name.size() + 2, ' ');
        os << "    " << format_fixed(p, 3) << "   " << format_fixed(rec, 3) << "   "
           << format_fixed(f1, 3) << "\n";
    };
    for (int c = 0; c < r.cm.n_classes; ++c) {
        const auto& m = r.classes[c];
        row(display_name(r.class_names[c]), m.precision, m.recall, m.f1);
    }
    row("Micro Avg", r.micro_avg.precision, r.micro_avg.recall, r.micro_avg.f1);
    return os.str();
}

std::string render_json(const MetricsReport& r) {
    nlohmann::json per;
    for (int c = 0; c < r.cm.n_classes; ++c) {
        const auto& m = r.classes[c];
        per[r.class_names[c]] = {{"precision", m.precision}, {"recall", m.recall},
                                 {"f1", m.f1},               {"tp", m.tp},
                                 {"fp", m.fp},               {"fn", m.fn},
                                 {"tn", m.tn},               {"degenerate", m.degenerate}};
    }
    nlohmann::json j = {{"per_class", per},
                        {"micro",
                         {{"precision", r.micro_avg.precision},
                          {"recall", r.micro_avg.recall},
                          {"f1", r.micro_avg.f1}}},
                        {"n_scored", r.n_scored}};
    return j.dump(2);
}

}  // namespace

std::string render_report(const MetricsReport& r, ReportFormat format) {
    return format == ReportFormat::table ? render_table(r) : render_json(r);
}

}  // namespace itk
