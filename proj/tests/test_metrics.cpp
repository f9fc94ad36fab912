#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "kdessi/metrics.hpp"

using namespace kdessi;
using Catch::Matchers::WithinAbs;

TEST_CASE("perfect predictions score 1.0 everywhere", "[metrics]") {
    std::vector<int> labels, preds;
    for (int c = 0; c < 26; ++c)
        for (int i = 0; i < 5; ++i) {
            labels.push_back(c);
            preds.push_back(c);
        }
    auto r = metrics::compute_metrics(preds, labels, 26);
    REQUIRE(r.accuracy == 1.0);
    REQUIRE(r.macro_f1 == 1.0);
    for (const auto& c : r.per_class) {
        REQUIRE(c.precision == 1.0);
        REQUIRE(c.recall == 1.0);
        REQUIRE(c.f1 == 1.0);
    }
    for (std::size_t i = 0; i < 26; ++i)
        for (std::size_t j = 0; j < 26; ++j)
            REQUIRE(r.confusion[i][j] == (i == j ? 5u : 0u));
}

TEST_CASE("constant prediction on a balanced set", "[metrics]") {
    std::vector<int> labels, preds;
    for (int c = 0; c < 26; ++c)
        for (int i = 0; i < 10; ++i) {
            labels.push_back(c);
            preds.push_back(0);
        }
    auto r = metrics::compute_metrics(preds, labels, 26);
    REQUIRE_THAT(r.accuracy, WithinAbs(1.0 / 26.0, 1e-12));
    REQUIRE(r.per_class[0].recall == 1.0);
    REQUIRE_THAT(r.per_class[0].precision, WithinAbs(1.0 / 26.0, 1e-12));
    for (int c = 1; c < 26; ++c) {
        REQUIRE(r.per_class[c].precision == 0.0);
        REQUIRE(r.per_class[c].recall == 0.0);
        REQUIRE(r.per_class[c].f1 == 0.0); // zero/zero convention
    }
}

TEST_CASE("counts match a brute-force tally", "[metrics][oracle]") {
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> cls(0, 25);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<int> labels(200), preds(200);
        for (auto& v : labels) v = cls(rng);
        for (auto& v : preds) v = cls(rng);
        auto r = metrics::compute_metrics(preds, labels, 26);

        for (int c = 0; c < 26; ++c) {
            std::size_t tp = 0, fp = 0, fn = 0, support = 0;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                if (labels[i] == c && preds[i] == c) ++tp;
                if (labels[i] != c && preds[i] == c) ++fp;
                if (labels[i] == c && preds[i] != c) ++fn;
                if (labels[i] == c) ++support;
            }
            REQUIRE(r.per_class[c].support == support);
            const double precision = (tp + fp) ? double(tp) / (tp + fp) : 0.0;
            const double recall = (tp + fn) ? double(tp) / (tp + fn) : 0.0;
            REQUIRE_THAT(r.per_class[c].precision, WithinAbs(precision, 1e-12));
            REQUIRE_THAT(r.per_class[c].recall, WithinAbs(recall, 1e-12));
        }
        std::size_t correct = 0;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == preds[i]) ++correct;
        REQUIRE_THAT(r.accuracy, WithinAbs(double(correct) / 200.0, 1e-12));
    }
}

TEST_CASE("confusion row sums equal class support and trace gives accuracy",
          "[metrics][property]") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> cls(0, 9);
    std::vector<int> labels(333), preds(333);
    for (auto& v : labels) v = cls(rng);
    for (auto& v : preds) v = cls(rng);
    auto r = metrics::compute_metrics(preds, labels, 10);

    std::size_t trace = 0;
    for (int c = 0; c < 10; ++c) {
        std::size_t row = 0;
        for (int o = 0; o < 10; ++o) row += r.confusion[c][o];
        REQUIRE(row == r.per_class[c].support);
        trace += r.confusion[c][c];
    }
    REQUIRE_THAT(r.accuracy, WithinAbs(double(trace) / 333.0, 1e-12));
}

TEST_CASE("macro F1 recomputed from the confusion matrix agrees", "[metrics][property]") {
    std::mt19937 rng(17);
    std::uniform_int_distribution<int> cls(0, 7);
    std::vector<int> labels(400), preds(400);
    for (auto& v : labels) v = cls(rng);
    for (auto& v : preds) v = cls(rng);
    auto r = metrics::compute_metrics(preds, labels, 8);

    // Second path: derive per-class F1 from the confusion matrix alone.
    double macro_f1 = 0.0;
    for (int c = 0; c < 8; ++c) {
        std::size_t tp = r.confusion[c][c], fp = 0, fn = 0;
        for (int o = 0; o < 8; ++o) {
            if (o == c) continue;
            fp += r.confusion[o][c];
            fn += r.confusion[c][o];
        }
        const double precision = (tp + fp) ? double(tp) / (tp + fp) : 0.0;
        const double recall = (tp + fn) ? double(tp) / (tp + fn) : 0.0;
        macro_f1 += (precision + recall) > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    }
    macro_f1 /= 8.0;
    REQUIRE_THAT(r.macro_f1, WithinAbs(macro_f1, 1e-12));
}

TEST_CASE("metrics JSON round-trips byte-identically", "[metrics]") {
    std::vector<int> labels = {0, 1, 2, 1, 0, 2, 2};
    std::vector<int> preds = {0, 2, 2, 1, 0, 0, 2};
    auto r = metrics::compute_metrics(preds, labels, 3);
    const std::string once = r.to_json().dump();
    const std::string twice = metrics::MetricsReport::from_json(r.to_json()).to_json().dump();
    REQUIRE(once == twice);
}

TEST_CASE("metrics input validation", "[metrics][errors]") {
    REQUIRE_THROWS_AS(metrics::compute_metrics({}, {}, 3), std::invalid_argument);
    REQUIRE_THROWS_AS(metrics::compute_metrics({0, 1}, {0}, 3), std::invalid_argument);
    REQUIRE_THROWS_AS(metrics::compute_metrics({0, 5}, {0, 1}, 3), std::invalid_argument);
}
