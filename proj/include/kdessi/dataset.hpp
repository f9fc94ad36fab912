#pragma once

/// Labeled-segment datasets: synthetic generation (class templates are
/// Gaussian-windowed bursts on a parameter grid), stratified splitting,
/// and per-channel standardization fitted on training data only.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "kdessi/segment.hpp"
#include "kdessi/timeseries.hpp"

namespace kdessi::data {

struct LabeledDataset {
    std::vector<WordSegment> samples;
    int class_count = 26;
    nlohmann::json metadata = nlohmann::json::object();

    void validate() const {
        for (const auto& s : samples) {
            if (s.label < 0 || s.label >= class_count)
                throw std::invalid_argument("LabeledDataset: label out of range");
            if (s.data.size() != kSegmentChannels * kSegmentLength)
                throw std::invalid_argument("LabeledDataset: bad segment shape");
        }
    }

    std::vector<std::size_t> class_counts() const {
        std::vector<std::size_t> counts(class_count, 0);
        for (const auto& s : samples) ++counts[static_cast<std::size_t>(s.label)];
        return counts;
    }
};

struct GeneratorConfig {
    int class_count = 26;
    int samples_per_class = 150;
    double noise_std = 1.0;
    std::uint32_t seed = 42;
    // Template grid knobs.
    double base_amplitude = 0.5;
    double amplitude_step = 0.25;
    double center_step = 60.0;
    double base_width = 140.0;
    double width_step = 25.0;

    nlohmann::json to_json() const {
        return {{"class_count", class_count},
                {"samples_per_class", samples_per_class},
                {"noise_std", noise_std},
                {"seed", seed},
                {"base_amplitude", base_amplitude},
                {"amplitude_step", amplitude_step},
                {"center_step", center_step},
                {"base_width", base_width},
                {"width_step", width_step}};
    }
    static GeneratorConfig from_json(const nlohmann::json& j) {
        GeneratorConfig c;
        c.class_count = j.value("class_count", c.class_count);
        c.samples_per_class = j.value("samples_per_class", c.samples_per_class);
        c.noise_std = j.value("noise_std", c.noise_std);
        c.seed = j.value("seed", c.seed);
        c.base_amplitude = j.value("base_amplitude", c.base_amplitude);
        c.amplitude_step = j.value("amplitude_step", c.amplitude_step);
        c.center_step = j.value("center_step", c.center_step);
        c.base_width = j.value("base_width", c.base_width);
        c.width_step = j.value("width_step", c.width_step);
        return c;
    }
};

struct ClassTemplate {
    std::array<double, kSegmentChannels> amplitude;
    double center;
    double width;
};

/// Distinct (amplitude triple, center, width) tuple per class. The amplitude
/// triple enumerates base-3 digits of the class id, so neighboring classes
/// differ by one amplitude step and overlap under noise.
inline ClassTemplate class_template(const GeneratorConfig& cfg, int class_id) {
    ClassTemplate t{};
    const int digits[3] = {class_id % 3, (class_id / 3) % 3, (class_id / 9) % 3};
    for (std::size_t ch = 0; ch < kSegmentChannels; ++ch)
        t.amplitude[ch] = cfg.base_amplitude + cfg.amplitude_step * digits[ch];
    t.center = kSegmentLength / 2.0 + cfg.center_step * (class_id % 5 - 2);
    t.width = cfg.base_width + cfg.width_step * (class_id % 4);
    return t;
}

inline void render_template(const ClassTemplate& t, float* out /* [3][1500] */) {
    for (std::size_t ch = 0; ch < kSegmentChannels; ++ch) {
        const double amp = t.amplitude[ch];
        for (std::size_t i = 0; i < kSegmentLength; ++i) {
            const double d = (static_cast<double>(i) - t.center) / t.width;
            out[ch * kSegmentLength + i] = static_cast<float>(amp * std::exp(-0.5 * d * d));
        }
    }
}

inline LabeledDataset generate_synthetic(const GeneratorConfig& cfg) {
    if (cfg.class_count < 1 || cfg.samples_per_class < 1)
        throw std::invalid_argument("generate_synthetic: class_count and samples_per_class must be >= 1");
    if (cfg.noise_std < 0.0)
        throw std::invalid_argument("generate_synthetic: noise_std must be >= 0");

    LabeledDataset ds;
    ds.class_count = cfg.class_count;
    ds.metadata = {{"generator", cfg.to_json()}};
    ds.samples.reserve(static_cast<std::size_t>(cfg.class_count) * cfg.samples_per_class);

    std::mt19937 rng(cfg.seed);
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    std::vector<float> tmpl(kSegmentChannels * kSegmentLength);

    for (int c = 0; c < cfg.class_count; ++c) {
        render_template(class_template(cfg, c), tmpl.data());
        for (int s = 0; s < cfg.samples_per_class; ++s) {
            WordSegment seg;
            seg.label = c;
            seg.center = kSegmentLength / 2;
            for (std::size_t i = 0; i < tmpl.size(); ++i)
                seg.data[i] = tmpl[i] + static_cast<float>(cfg.noise_std * unit_normal(rng));
            ds.samples.push_back(std::move(seg));
        }
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Raw-trial generation: a word repeated `words` times as noise bursts under a
// Gaussian activation profile, for exercising the DSP and extraction stages.
// ---------------------------------------------------------------------------

struct TrialConfig {
    int words = 10;
    std::size_t word_spacing = 4000; // samples between burst centers (4 s)
    std::size_t lead_in = 3000;      // quiet samples before the first burst
    double burst_width = 300.0;      // Gaussian sigma of the activation profile
    std::array<double, kSegmentChannels> amplitude = {1.0, 0.8, 0.9};
    double carrier_noise_fraction = 0.2; // stochastic share of the carrier power
    double rest_noise_std = 0.02;    // baseline sensor noise
    double sample_rate_hz = 1000.0;
    std::uint32_t seed = 1;
};

struct Trial {
    TimeSeries raw;
    std::vector<std::size_t> burst_centers; // raw-signal sample indices
};

/// Each word is an in-band oscillatory carrier (multi-tone mix plus a noise
/// share) amplitude-modulated by a Gaussian activation profile, on top of a
/// small sensor-noise floor.
inline Trial generate_trial(const TrialConfig& cfg) {
    if (cfg.words < 0) throw std::invalid_argument("generate_trial: words must be >= 0");
    if (cfg.carrier_noise_fraction < 0.0 || cfg.carrier_noise_fraction > 1.0)
        throw std::invalid_argument("generate_trial: carrier_noise_fraction must be in [0, 1]");
    Trial trial;
    const std::size_t len =
        2 * cfg.lead_in + (cfg.words > 0 ? (cfg.words - 1) * cfg.word_spacing : 0) + 1;
    trial.raw = TimeSeries(kSegmentChannels, len, cfg.sample_rate_hz);

    for (int w = 0; w < cfg.words; ++w)
        trial.burst_centers.push_back(cfg.lead_in + w * cfg.word_spacing);

    constexpr double tone_hz[4] = {70.0, 130.0, 210.0, 330.0};
    const double nf = cfg.carrier_noise_fraction;
    const double tone_scale = std::sqrt(1.0 - nf * nf) / std::sqrt(2.0); // unit-RMS mix

    std::mt19937 rng(cfg.seed);
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * 3.14159265358979323846);
    for (std::size_t ch = 0; ch < kSegmentChannels; ++ch) {
        double phases[4];
        for (double& p : phases) p = phase(rng);
        auto& x = trial.raw.channels[ch];
        for (std::size_t i = 0; i < len; ++i) {
            double gate = 0.0;
            for (std::size_t c : trial.burst_centers) {
                const double d = (static_cast<double>(i) - static_cast<double>(c)) / cfg.burst_width;
                gate += std::exp(-0.5 * d * d);
            }
            double tones = 0.0;
            for (int k = 0; k < 4; ++k)
                tones += std::sin(2.0 * 3.14159265358979323846 * tone_hz[k] * i /
                                      cfg.sample_rate_hz + phases[k]);
            const double carrier = tone_scale * tones + nf * unit_normal(rng);
            x[i] = cfg.amplitude[ch] * gate * carrier + cfg.rest_noise_std * unit_normal(rng);
        }
    }
    return trial;
}

// ---------------------------------------------------------------------------
// Splitting and standardization.
// ---------------------------------------------------------------------------

struct SplitSpec {
    std::array<int, 3> ratios = {4, 1, 1}; // train : val : test
    std::uint32_t seed = 0;
    bool stratified = true;
};

struct Splits {
    LabeledDataset train, val, test;
};

inline Splits split(const LabeledDataset& ds, const SplitSpec& spec) {
    for (int r : spec.ratios)
        if (r < 0) throw std::invalid_argument("split: ratios must be non-negative");
    const long long total_ratio = spec.ratios[0] + spec.ratios[1] + spec.ratios[2];
    if (total_ratio <= 0) throw std::invalid_argument("split: ratio sum must be positive");

    Splits out;
    out.train.class_count = out.val.class_count = out.test.class_count = ds.class_count;
    out.train.metadata = out.val.metadata = out.test.metadata = ds.metadata;

    std::mt19937 rng(spec.seed);
    auto place = [&](std::vector<std::size_t>& idx) {
        std::shuffle(idx.begin(), idx.end(), rng);
        const std::size_t n = idx.size();
        const std::size_t n_val = n * spec.ratios[1] / total_ratio;
        const std::size_t n_test = n * spec.ratios[2] / total_ratio;
        const std::size_t n_train = n - n_val - n_test; // remainder goes to train
        for (std::size_t i = 0; i < n; ++i) {
            const auto& s = ds.samples[idx[i]];
            if (i < n_train)
                out.train.samples.push_back(s);
            else if (i < n_train + n_val)
                out.val.samples.push_back(s);
            else
                out.test.samples.push_back(s);
        }
    };

    if (spec.stratified) {
        for (int c = 0; c < ds.class_count; ++c) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < ds.samples.size(); ++i)
                if (ds.samples[i].label == c) idx.push_back(i);
            if (idx.empty())
                throw std::invalid_argument("split: class " + std::to_string(c) + " has no samples");
            place(idx);
        }
    } else {
        std::vector<std::size_t> idx(ds.samples.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        if (idx.empty()) throw std::invalid_argument("split: empty dataset");
        place(idx);
    }
    return out;
}

struct ScalerParams {
    std::array<double, kSegmentChannels> mean{};
    std::array<double, kSegmentChannels> std_dev{};

    nlohmann::json to_json() const {
        return {{"mean", std::vector<double>(mean.begin(), mean.end())},
                {"std", std::vector<double>(std_dev.begin(), std_dev.end())}};
    }
    static ScalerParams from_json(const nlohmann::json& j) {
        ScalerParams p;
        const auto m = j.at("mean").get<std::vector<double>>();
        const auto s = j.at("std").get<std::vector<double>>();
        if (m.size() != kSegmentChannels || s.size() != kSegmentChannels)
            throw std::invalid_argument("ScalerParams: bad channel count");
        std::copy(m.begin(), m.end(), p.mean.begin());
        std::copy(s.begin(), s.end(), p.std_dev.begin());
        return p;
    }
};

/// Per-channel mean/std over every sample and time step of the training set.
inline ScalerParams fit_scaler(const LabeledDataset& train) {
    if (train.samples.empty()) throw std::invalid_argument("fit_scaler: empty training set");
    ScalerParams p;
    const double count =
        static_cast<double>(train.samples.size()) * static_cast<double>(kSegmentLength);
    for (std::size_t ch = 0; ch < kSegmentChannels; ++ch) {
        double sum = 0.0, sum_sq = 0.0;
        for (const auto& s : train.samples)
            for (std::size_t t = 0; t < kSegmentLength; ++t) {
                const double v = s.at(ch, t);
                sum += v;
                sum_sq += v * v;
            }
        const double mean = sum / count;
        const double var = std::max(0.0, sum_sq / count - mean * mean);
        p.mean[ch] = mean;
        p.std_dev[ch] = std::max(std::sqrt(var), 1e-8);
    }
    return p;
}

inline LabeledDataset apply_scaler(const ScalerParams& p, const LabeledDataset& ds) {
    LabeledDataset out = ds;
    for (auto& s : out.samples)
        for (std::size_t ch = 0; ch < kSegmentChannels; ++ch) {
            const float mean = static_cast<float>(p.mean[ch]);
            const float inv = static_cast<float>(1.0 / p.std_dev[ch]);
            for (std::size_t t = 0; t < kSegmentLength; ++t)
                s.at(ch, t) = (s.at(ch, t) - mean) * inv;
        }
    return out;
}

/// Fit on train, apply to all three splits.
inline ScalerParams standardize(Splits& splits) {
    const ScalerParams p = fit_scaler(splits.train);
    splits.train = apply_scaler(p, splits.train);
    splits.val = apply_scaler(p, splits.val);
    splits.test = apply_scaler(p, splits.test);
    return p;
}

} // namespace kdessi::data
