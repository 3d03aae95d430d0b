#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace itk {

// Rows are true classes, columns predicted. Defaults to the three issue
// labels but generalizes to any class count for property testing.
struct ConfusionMatrix {
    int n_classes = 3;
    std::vector<uint64_t> counts;  // row-major n_classes x n_classes

    explicit ConfusionMatrix(int n = 3) : n_classes(n), counts(static_cast<size_t>(n) * n, 0) {}
    uint64_t& at(int t, int p) { return counts[static_cast<size_t>(t) * n_classes + p]; }
    uint64_t at(int t, int p) const { return counts[static_cast<size_t>(t) * n_classes + p]; }
    uint64_t total() const;
};

struct ClassMetrics {
    uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    bool degenerate = false;  // a zero denominator forced some metric to 0
};

struct MicroMetrics {
    double precision = 0.0, recall = 0.0, f1 = 0.0;
};

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& pred,
                          int n_classes = 3);

std::vector<ClassMetrics> per_class(const ConfusionMatrix& cm);

MicroMetrics micro(const ConfusionMatrix& cm);

struct MetricsReport {
    ConfusionMatrix cm;
    std::vector<ClassMetrics> classes;
    MicroMetrics micro_avg;
    uint64_t n_scored = 0;
    std::vector<std::string> class_names;  // size n_classes
};

// Default class names: bug, enhancement, question for 3 classes,
// class_<i> otherwise.
std::vector<std::string> default_class_names(int n_classes);

MetricsReport evaluate(const std::vector<int>& truth, const std::vector<int>& pred,
                       int n_classes = 3, std::vector<std::string> class_names = {});

enum class ReportFormat { table, json };

std::string render_report(const MetricsReport& r, ReportFormat format);

// Fixed-point formatting used by the table renderer, ties to even.
std::string format_fixed(double value, int decimals);

}  // namespace itk
