#pragma once

/// Experiment orchestration: the (N estimators x distillation temperature)
/// accuracy grid with per-cell mean and standard deviation over experiment
/// seeds, and single-threaded latency measurement.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kdessi/common.hpp"
#include "kdessi/distill.hpp"
#include "kdessi/ensemble.hpp"
#include "kdessi/metrics.hpp"
#include "kdessi/parallel.hpp"

namespace kdessi::harness {

// ---------------------------------------------------------------------------
// Latency.
// ---------------------------------------------------------------------------

struct LatencyStats {
    double mean_ms = 0.0;
    double sd_ms = 0.0;
    int repetitions = 0;
};

/// Wall-clock per-invocation statistics after warm-up passes. run_once should
/// perform exactly one per-sample inference.
inline LatencyStats measure_latency(const std::function<void()>& run_once, int repetitions = 50,
                                    int warmup = 10) {
    if (repetitions < 1) throw std::invalid_argument("measure_latency: repetitions must be >= 1");
    for (int i = 0; i < warmup; ++i) run_once();
    std::vector<double> ms(repetitions);
    for (int i = 0; i < repetitions; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        run_once();
        const auto t1 = std::chrono::steady_clock::now();
        ms[i] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    LatencyStats out;
    out.repetitions = repetitions;
    for (double v : ms) out.mean_ms += v;
    out.mean_ms /= repetitions;
    double var = 0.0;
    for (double v : ms) var += (v - out.mean_ms) * (v - out.mean_ms);
    out.sd_ms = repetitions > 1 ? std::sqrt(var / (repetitions - 1)) : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Grid experiment.
// ---------------------------------------------------------------------------

struct CellStats {
    std::vector<double> per_seed;
    double mean = 0.0;
    double sd = 0.0;

    void finalize() {
        if (per_seed.empty()) return;
        mean = 0.0;
        for (double v : per_seed) mean += v;
        mean /= static_cast<double>(per_seed.size());
        double var = 0.0;
        for (double v : per_seed) var += (v - mean) * (v - mean);
        sd = per_seed.size() > 1 ? std::sqrt(var / (per_seed.size() - 1)) : 0.0;
    }

    nlohmann::json to_json() const {
        return {{"per_seed", per_seed}, {"mean", mean}, {"sd", sd}};
    }
    static CellStats from_json(const nlohmann::json& j) {
        CellStats c;
        c.per_seed = j.at("per_seed").get<std::vector<double>>();
        c.mean = j.at("mean");
        c.sd = j.at("sd");
        return c;
    }
};

struct GridRow {
    int n = 0;
    CellStats ve;
    std::vector<CellStats> students; // aligned with t_grid
};

struct GridConfig {
    std::vector<int> n_grid = {4, 6, 8, 10};
    std::vector<double> t_grid = {5.0, 10.0};
    std::vector<std::uint32_t> seeds = {1, 2, 3};
    double alpha = 0.5;
    bool teacher_log_probs = false;
    nn::Resnet1dConfig backbone = nn::Resnet1dConfig::paper();
    nn::Resnet1dConfig student = nn::Resnet1dConfig::student();
    nn::TrainConfig train;
    data::SplitSpec split_ratios; // seed field overridden per experiment seed
};

struct GridReport {
    GridConfig config;
    std::vector<GridRow> rows;

    nlohmann::json to_json() const {
        nlohmann::json jrows = nlohmann::json::array();
        for (const auto& r : rows) {
            nlohmann::json students = nlohmann::json::array();
            for (std::size_t t = 0; t < r.students.size(); ++t)
                students.push_back({{"temperature", config.t_grid[t]},
                                    {"accuracy", r.students[t].to_json()}});
            jrows.push_back({{"n", r.n}, {"ve", r.ve.to_json()}, {"students", students}});
        }
        return {{"n_grid", config.n_grid},
                {"t_grid", config.t_grid},
                {"seeds", config.seeds},
                {"alpha", config.alpha},
                {"teacher_log_probs", config.teacher_log_probs},
                {"backbone", config.backbone.to_json()},
                {"student", config.student.to_json()},
                {"rows", jrows}};
    }

    void write_csv(const std::filesystem::path& path) const {
        std::ofstream f(path);
        if (!f) throw format_error("cannot open for writing: " + path.string());
        f << "n,model,temperature,seed,accuracy\n";
        for (const auto& r : rows) {
            for (std::size_t s = 0; s < r.ve.per_seed.size(); ++s)
                f << r.n << ",ve,," << config.seeds[s] << ',' << r.ve.per_seed[s] << '\n';
            for (std::size_t t = 0; t < r.students.size(); ++t)
                for (std::size_t s = 0; s < r.students[t].per_seed.size(); ++s)
                    f << r.n << ",kd," << config.t_grid[t] << ',' << config.seeds[s] << ','
                      << r.students[t].per_seed[s] << '\n';
        }
    }
};

/// One experiment seed: split + standardize, train max(N) members once, form
/// prefix ensembles for every N, and distill one student per (N, T) cell.
/// Returns test accuracies: ve[n_idx], student[n_idx][t_idx].
struct SeedOutcome {
    std::vector<double> ve_accuracy;
    std::vector<std::vector<double>> student_accuracy;
    double single_accuracy = 0.0; // member 0 on its own
};

inline SeedOutcome run_grid_seed(const data::LabeledDataset& dataset, const GridConfig& cfg,
                                 std::uint32_t seed) {
    data::SplitSpec split_spec = cfg.split_ratios;
    split_spec.seed = seed;
    data::Splits splits = data::split(dataset, split_spec);
    data::standardize(splits);

    int max_n = 1;
    for (int n : cfg.n_grid) max_n = std::max(max_n, n);

    const std::uint32_t member_base = seed * 1000u;
    ensemble::TrainedEnsemble trained = ensemble::train_ensemble(
        max_n, cfg.backbone, splits.train, splits.val, cfg.train, member_base);

    SeedOutcome out;
    out.single_accuracy = nn::evaluate_accuracy(trained.model.members[0], splits.test);

    out.ve_accuracy.resize(cfg.n_grid.size());
    out.student_accuracy.assign(cfg.n_grid.size(),
                                std::vector<double>(cfg.t_grid.size(), 0.0));

    for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
        const int n = cfg.n_grid[ni];
        std::vector<nn::Resnet1d<float>> prefix(trained.model.members.begin(),
                                                trained.model.members.begin() + n);
        ensemble::EnsembleModel ve = ensemble::EnsembleModel::make(std::move(prefix));
        out.ve_accuracy[ni] = ensemble::evaluate_accuracy(ve, splits.test);

        for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
            distill::DistillConfig dcfg;
            dcfg.alpha = cfg.alpha;
            dcfg.temperature = cfg.t_grid[ti];
            dcfg.teacher_log_probs = cfg.teacher_log_probs;
            dcfg.student_arch = cfg.student;
            dcfg.train = cfg.train;
            dcfg.train.seed = member_base + 500u + static_cast<std::uint32_t>(
                                  ni * cfg.t_grid.size() + ti);
            distill::DistilledStudent student =
                distill::distill_train(ve, dcfg, splits.train, splits.val);
            out.student_accuracy[ni][ti] = nn::evaluate_accuracy(student.model, splits.test);
        }
    }
    return out;
}

inline GridReport run_experiment_grid(const data::LabeledDataset& dataset,
                                      const GridConfig& cfg) {
    if (cfg.n_grid.empty() || cfg.seeds.empty())
        throw std::invalid_argument("run_experiment_grid: empty grid or seed list");
    GridReport report;
    report.config = cfg;

    std::vector<SeedOutcome> outcomes(cfg.seeds.size());
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s)
        outcomes[s] = run_grid_seed(dataset, cfg, cfg.seeds[s]);

    report.rows.resize(cfg.n_grid.size());
    for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
        auto& row = report.rows[ni];
        row.n = cfg.n_grid[ni];
        row.students.resize(cfg.t_grid.size());
        for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
            row.ve.per_seed.push_back(outcomes[s].ve_accuracy[ni]);
            for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti)
                row.students[ti].per_seed.push_back(outcomes[s].student_accuracy[ni][ti]);
        }
        row.ve.finalize();
        for (auto& st : row.students) st.finalize();
    }
    return report;
}

} // namespace kdessi::harness
