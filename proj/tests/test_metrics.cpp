#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "doctest.h"
#include "itk/errors.h"
#include "itk/metrics.h"
#include "itk/rng.h"

using namespace itk;

namespace {

// Brute-force oracle: counts per-class outcomes by scanning the raw pairs,
// never via the confusion matrix.
ClassMetrics brute_force_class(const std::vector<int>& truth, const std::vector<int>& pred,
                               int c) {
    ClassMetrics m;
    for (size_t i = 0; i < truth.size(); ++i) {
        const bool is_true = truth[i] == c;
        const bool is_pred = pred[i] == c;
        if (is_true && is_pred) ++m.tp;
        else if (!is_true && is_pred) ++m.fp;
        else if (is_true && !is_pred) ++m.fn;
        else ++m.tn;
    }
    if (m.tp + m.fp > 0) m.precision = double(m.tp) / double(m.tp + m.fp);
    if (m.tp + m.fn > 0) m.recall = double(m.tp) / double(m.tp + m.fn);
    if (2 * m.tp + m.fp + m.fn > 0) m.f1 = double(2 * m.tp) / double(2 * m.tp + m.fp + m.fn);
    return m;
}

MicroMetrics brute_force_micro(const std::vector<int>& truth, const std::vector<int>& pred,
                               int n_classes) {
    uint64_t tp = 0, fp = 0, fn = 0;
    for (int c = 0; c < n_classes; ++c) {
        const auto m = brute_force_class(truth, pred, c);
        tp += m.tp;
        fp += m.fp;
        fn += m.fn;
    }
    MicroMetrics out;
    if (tp + fp > 0) out.precision = double(tp) / double(tp + fp);
    if (tp + fn > 0) out.recall = double(tp) / double(tp + fn);
    if (2 * tp + fp + fn > 0) out.f1 = double(2 * tp) / double(2 * tp + fp + fn);
    return out;
}

// The worked example: reconstruct the 30 pairs behind rows
// [[8,1,1],[2,6,2],[0,1,9]].
void example_pairs(std::vector<int>& truth, std::vector<int>& pred) {
    const int rows[3][3] = {{8, 1, 1}, {2, 6, 2}, {0, 1, 9}};
    for (int t = 0; t < 3; ++t) {
        for (int p = 0; p < 3; ++p) {
            for (int k = 0; k < rows[t][p]; ++k) {
                truth.push_back(t);
                pred.push_back(p);
            }
        }
    }
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("confusion counts pairs into the right cells") {
    const auto cm = confusion({0, 1, 2}, {1, 1, 2});
    CHECK(cm.at(0, 1) == 1);
    CHECK(cm.at(1, 1) == 1);
    CHECK(cm.at(2, 2) == 1);
    CHECK(cm.at(0, 0) == 0);
    CHECK(cm.total() == 3);
}

TEST_CASE("confusion of empty lists is the zero matrix") {
    const auto cm = confusion({}, {});
    CHECK(cm.total() == 0);
}

TEST_CASE("confusion validates lengths and ranges") {
    CHECK_THROWS_AS(confusion({0, 1}, {0}), data_error);
    CHECK_THROWS_AS(confusion({0, 3}, {0, 0}), data_error);
    CHECK_THROWS_AS(confusion({0, -1}, {0, 0}), data_error);
    CHECK_THROWS_AS(confusion({0}, {5}), data_error);
}

TEST_CASE("perfect predictions give a diagonal matrix and ones everywhere") {
    const std::vector<int> labels = {0, 1, 2, 0, 1, 2, 2};
    const auto cm = confusion(labels, labels);
    for (const auto& m : per_class(cm)) {
        CHECK(m.precision == 1.0);
        CHECK(m.recall == 1.0);
        CHECK(m.f1 == 1.0);
        CHECK_FALSE(m.degenerate);
    }
    const auto mi = micro(cm);
    CHECK(mi.f1 == 1.0);
}

TEST_CASE("worked example: class 0 scores 0.8 across the board") {
    std::vector<int> truth, pred;
    example_pairs(truth, pred);
    const auto cm = confusion(truth, pred);
    const auto pc = per_class(cm);
    CHECK(pc[0].precision == 0.8);
    CHECK(pc[0].recall == 0.8);
    CHECK(pc[0].f1 == 0.8);
    const auto mi = micro(cm);
    CHECK(mi.precision == 23.0 / 30.0);
    CHECK(mi.recall == 23.0 / 30.0);
    CHECK(mi.f1 == 23.0 / 30.0);
    // every class agrees with the pair-scanning oracle exactly
    for (int c = 0; c < 3; ++c) {
        const auto expect = brute_force_class(truth, pred, c);
        CHECK(pc[c].tp == expect.tp);
        CHECK(pc[c].fp == expect.fp);
        CHECK(pc[c].fn == expect.fn);
        CHECK(pc[c].tn == expect.tn);
        CHECK(pc[c].precision == expect.precision);
        CHECK(pc[c].recall == expect.recall);
        CHECK(pc[c].f1 == expect.f1);
    }
}

TEST_CASE("zero row and column flags the class degenerate with zero metrics") {
    ConfusionMatrix cm(3);
    cm.at(0, 0) = 5;
    cm.at(1, 1) = 5;
    const auto pc = per_class(cm);
    CHECK(pc[2].degenerate);
    CHECK(pc[2].precision == 0.0);
    CHECK(pc[2].recall == 0.0);
    CHECK(pc[2].f1 == 0.0);
    CHECK_FALSE(pc[0].degenerate);
}

TEST_CASE("metrics equal the pair-scanning oracle on random inputs") {
    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const int n_classes = 3 + static_cast<int>(rng.next_below(8));
        const size_t n = 1 + rng.next_below(200);
        std::vector<int> truth(n), pred(n);
        for (size_t i = 0; i < n; ++i) {
            truth[i] = static_cast<int>(rng.next_below(n_classes));
            pred[i] = static_cast<int>(rng.next_below(n_classes));
        }
        const auto cm = confusion(truth, pred, n_classes);
        const auto pc = per_class(cm);
        for (int c = 0; c < n_classes; ++c) {
            const auto expect = brute_force_class(truth, pred, c);
            REQUIRE(pc[c].tp == expect.tp);
            REQUIRE(pc[c].fp == expect.fp);
            REQUIRE(pc[c].fn == expect.fn);
            REQUIRE(pc[c].tn == expect.tn);
            REQUIRE(pc[c].precision == expect.precision);
            REQUIRE(pc[c].recall == expect.recall);
            REQUIRE(pc[c].f1 == expect.f1);
            // harmonic-mean identity within float tolerance
            if (pc[c].precision + pc[c].recall > 0) {
                const double hm = 2 * pc[c].precision * pc[c].recall /
                                  (pc[c].precision + pc[c].recall);
                REQUIRE(std::abs(pc[c].f1 - hm) <= 1e-12);
            }
        }
        const auto mi = micro(cm);
        const auto expect = brute_force_micro(truth, pred, n_classes);
        REQUIRE(mi.precision == expect.precision);
        REQUIRE(mi.recall == expect.recall);
        REQUIRE(mi.f1 == expect.f1);
    }
}

TEST_CASE("micro identity is exact on single-label inputs") {
    Rng rng(29);
    for (int trial = 0; trial < 200; ++trial) {
        const int n_classes = 3 + static_cast<int>(rng.next_below(8));
        const size_t n = 1 + rng.next_below(300);
        std::vector<int> truth(n), pred(n);
        for (size_t i = 0; i < n; ++i) {
            truth[i] = static_cast<int>(rng.next_below(n_classes));
            pred[i] = static_cast<int>(rng.next_below(n_classes));
        }
        const auto mi = micro(confusion(truth, pred, n_classes));
        REQUIRE(mi.precision == mi.recall);
        REQUIRE(mi.precision == mi.f1);
    }
}

TEST_CASE("recall of class c depends only on row c") {
    ConfusionMatrix a(3);
    a.at(0, 0) = 6;
    a.at(0, 1) = 2;
    a.at(1, 0) = 1;
    a.at(2, 2) = 4;
    ConfusionMatrix b = a;
    b.at(1, 0) = 99;  // perturb another row
    b.at(2, 1) = 50;
    CHECK(per_class(a)[0].recall == per_class(b)[0].recall);
}

TEST_CASE("tn consistency holds for every class") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const int n_classes = 3 + static_cast<int>(rng.next_below(5));
        ConfusionMatrix cm(n_classes);
        for (auto& c : cm.counts) c = rng.next_below(20);
        const auto total = cm.total();
        for (const auto& m : per_class(cm)) {
            REQUIRE(m.tp + m.fp + m.fn + m.tn == total);
        }
    }
}

TEST_CASE("default class names") {
    CHECK(default_class_names(3) ==
          std::vector<std::string>{"bug", "enhancement", "question"});
    CHECK(default_class_names(2) == std::vector<std::string>{"class_0", "class_1"});
}

TEST_CASE("format_fixed rounds half to even") {
    CHECK(format_fixed(0.0625, 3) == "0.062");  // exact tie, rounds down to even
    CHECK(format_fixed(0.1875, 3) == "0.188");  // exact tie, rounds up to even
    CHECK(format_fixed(1.0, 3) == "1.000");
    CHECK(format_fixed(2.5, 0) == "2");
    CHECK(format_fixed(3.5, 0) == "4");
    CHECK(format_fixed(0.8, 3) == "0.800");
}

TEST_CASE("table render shows one row per class plus the micro average") {
    const std::vector<int> labels = {0, 1, 2};
    const auto report = evaluate(labels, labels);
    const auto table = render_report(report, ReportFormat::table);
    CHECK(table.find("Class") != std::string::npos);
    CHECK(table.find("Precision") != std::string::npos);
    CHECK(table.find("Bug") != std::string::npos);
    CHECK(table.find("Enhancement") != std::string::npos);
    CHECK(table.find("Question") != std::string::npos);
    CHECK(table.find("Micro Avg") != std::string::npos);
    // perfect classifier renders as 1.000 twelve times
    size_t count = 0, pos = 0;
    while ((pos = table.find("1.000", pos)) != std::string::npos) {
        ++count;
        pos += 5;
    }
    CHECK(count == 12);
}

TEST_CASE("table render reproduces the published row values") {
    MetricsReport r;
    r.cm = ConfusionMatrix(3);
    r.class_names = default_class_names(3);
    r.classes.resize(3);
    r.classes[0].precision = 0.894;
    r.classes[0].recall = 0.897;
    r.classes[0].f1 = 0.896;
    r.classes[1].precision = 0.874;
    r.classes[1].recall = 0.885;
    r.classes[1].f1 = 0.879;
    r.classes[2].precision = 0.720;
    r.classes[2].recall = 0.664;
    r.classes[2].f1 = 0.691;
    r.micro_avg = {0.872, 0.872, 0.872};
    const auto table = render_report(r, ReportFormat::table);
    CHECK(table.find("0.894") != std::string::npos);
    CHECK(table.find("0.897") != std::string::npos);
    CHECK(table.find("0.896") != std::string::npos);
    CHECK(table.find("0.874") != std::string::npos);
    CHECK(table.find("0.885") != std::string::npos);
    CHECK(table.find("0.879") != std::string::npos);
    CHECK(table.find("0.720") != std::string::npos);
    CHECK(table.find("0.664") != std::string::npos);
    CHECK(table.find("0.691") != std::string::npos);
    CHECK(table.find("0.872") != std::string::npos);
    // row order is bug, enhancement, question, micro
    CHECK(table.find("Bug") < table.find("Enhancement"));
    CHECK(table.find("Enhancement") < table.find("Question"));
    CHECK(table.find("Question") < table.find("Micro Avg"));
}

TEST_CASE("json render carries counts and parses back") {
    std::vector<int> truth, pred;
    example_pairs(truth, pred);
    const auto report = evaluate(truth, pred);
    const auto text = render_report(report, ReportFormat::json);
    const auto j = nlohmann::json::parse(text);
    CHECK(j["n_scored"] == 30);
    CHECK(j["per_class"]["bug"]["tp"] == 8);
    CHECK(j["per_class"]["bug"]["fp"] == 2);
    CHECK(j["per_class"]["bug"]["fn"] == 2);
    CHECK(j["per_class"]["bug"]["precision"] == 0.8);
    CHECK(j["per_class"]["bug"]["degenerate"] == false);
    CHECK(j["micro"]["f1"] == doctest::Approx(23.0 / 30.0));
    CHECK(j["per_class"].size() == 3);
}

TEST_CASE("evaluate rejects mismatched class name lists") {
    CHECK_THROWS_AS(evaluate({0}, {0}, 3, {"one", "two"}), data_error);
}

}  // TEST_SUITE
