#pragma once

/// Classification metrics: per-class precision/recall/F1 from the confusion
/// matrix, unweighted macro averages, and overall accuracy.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "kdessi/common.hpp"

namespace kdessi::metrics {

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct MetricsReport {
    std::vector<ClassMetrics> per_class;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    std::vector<std::vector<std::size_t>> confusion; // [true][predicted]
    std::size_t total = 0;

    nlohmann::json to_json() const {
        nlohmann::json classes = nlohmann::json::array();
        for (const auto& c : per_class)
            classes.push_back({{"precision", c.precision},
                               {"recall", c.recall},
                               {"f1", c.f1},
                               {"support", c.support}});
        return {{"per_class", classes},
                {"macro_precision", macro_precision},
                {"macro_recall", macro_recall},
                {"macro_f1", macro_f1},
                {"accuracy", accuracy},
                {"confusion", confusion},
                {"total", total}};
    }

    static MetricsReport from_json(const nlohmann::json& j) {
        MetricsReport r;
        for (const auto& c : j.at("per_class"))
            r.per_class.push_back({c.at("precision"), c.at("recall"), c.at("f1"), c.at("support")});
        r.macro_precision = j.at("macro_precision");
        r.macro_recall = j.at("macro_recall");
        r.macro_f1 = j.at("macro_f1");
        r.accuracy = j.at("accuracy");
        r.confusion = j.at("confusion").get<std::vector<std::vector<std::size_t>>>();
        r.total = j.at("total");
        return r;
    }
};

inline MetricsReport compute_metrics(const std::vector<int>& predictions,
                                     const std::vector<int>& labels, int class_count) {
    if (predictions.empty() || predictions.size() != labels.size())
        throw std::invalid_argument("compute_metrics: need equal-length non-empty inputs");
    if (class_count < 1) throw std::invalid_argument("compute_metrics: bad class count");

    MetricsReport r;
    r.total = predictions.size();
    r.confusion.assign(class_count, std::vector<std::size_t>(class_count, 0));
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const int y = labels[i], p = predictions[i];
        if (y < 0 || y >= class_count || p < 0 || p >= class_count)
            throw std::invalid_argument("compute_metrics: class id out of range");
        ++r.confusion[y][p];
    }

    std::size_t trace = 0;
    r.per_class.resize(class_count);
    for (int c = 0; c < class_count; ++c) {
        const std::size_t tp = r.confusion[c][c];
        trace += tp;
        std::size_t fp = 0, fn = 0;
        for (int o = 0; o < class_count; ++o) {
            if (o == c) continue;
            fp += r.confusion[o][c];
            fn += r.confusion[c][o];
        }
        auto& m = r.per_class[c];
        m.support = tp + fn;
        m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
        r.macro_precision += m.precision;
        r.macro_recall += m.recall;
        r.macro_f1 += m.f1;
    }
    r.macro_precision /= class_count;
    r.macro_recall /= class_count;
    r.macro_f1 /= class_count;
    r.accuracy = static_cast<double>(trace) / static_cast<double>(r.total);
    return r;
}

inline void write_confusion_csv(const std::filesystem::path& path,
                                const std::vector<std::vector<std::size_t>>& confusion) {
    std::ofstream f(path);
    if (!f) throw format_error("cannot open for writing: " + path.string());
    f << "true\\pred";
    for (std::size_t c = 0; c < confusion.size(); ++c) f << ',' << c;
    f << '\n';
    for (std::size_t r = 0; r < confusion.size(); ++r) {
        f << r;
        for (std::size_t c = 0; c < confusion[r].size(); ++c) f << ',' << confusion[r][c];
        f << '\n';
    }
}

} // namespace kdessi::metrics
