#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "kdessi/dataset.hpp"

using namespace kdessi;
using Catch::Matchers::WithinAbs;

namespace {

data::GeneratorConfig small_config(std::uint32_t seed = 7) {
    data::GeneratorConfig cfg;
    cfg.class_count = 6;
    cfg.samples_per_class = 12;
    cfg.noise_std = 0.3;
    cfg.seed = seed;
    return cfg;
}

// Content key for partition checks: label plus a few data words.
std::string sample_key(const WordSegment& s) {
    std::string k = std::to_string(s.label);
    for (std::size_t i = 0; i < 8; ++i) k += ":" + std::to_string(s.data[i * 97]);
    return k;
}

} // namespace

TEST_CASE("generator without noise produces identical class samples", "[dataset]") {
    auto cfg = small_config();
    cfg.noise_std = 0.0;
    auto ds = data::generate_synthetic(cfg);
    for (int c = 0; c < cfg.class_count; ++c) {
        const auto& first = ds.samples[c * cfg.samples_per_class];
        for (int s = 1; s < cfg.samples_per_class; ++s)
            REQUIRE(ds.samples[c * cfg.samples_per_class + s].data == first.data);
    }
}

TEST_CASE("generator is deterministic in the seed", "[dataset]") {
    auto a = data::generate_synthetic(small_config(3));
    auto b = data::generate_synthetic(small_config(3));
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        REQUIRE(a.samples[i].data == b.samples[i].data);
        REQUIRE(a.samples[i].label == b.samples[i].label);
    }
    auto c = data::generate_synthetic(small_config(4));
    REQUIRE(a.samples[0].data != c.samples[0].data);
}

TEST_CASE("full-size generation yields 26 x 150 = 3900 samples", "[dataset]") {
    data::GeneratorConfig cfg;
    REQUIRE(cfg.class_count == 26);
    REQUIRE(cfg.samples_per_class == 150);
    auto ds = data::generate_synthetic(cfg);
    REQUIRE(ds.samples.size() == 3900);
    auto counts = ds.class_counts();
    for (auto n : counts) REQUIRE(n == 150);
    ds.validate();
}

TEST_CASE("class templates are pairwise distinct", "[dataset][property]") {
    data::GeneratorConfig cfg;
    std::vector<std::vector<float>> templates(26);
    for (int c = 0; c < 26; ++c) {
        templates[c].resize(kSegmentChannels * kSegmentLength);
        data::render_template(data::class_template(cfg, c), templates[c].data());
    }
    for (int a = 0; a < 26; ++a)
        for (int b = a + 1; b < 26; ++b) {
            double dist = 0.0;
            for (std::size_t i = 0; i < templates[a].size(); ++i) {
                const double d = templates[a][i] - templates[b][i];
                dist += d * d;
            }
            REQUIRE(dist > 1.0);
        }
}

TEST_CASE("stratified split gives 100/25/25 per class at 150 samples", "[dataset]") {
    data::GeneratorConfig cfg;
    cfg.class_count = 4;
    cfg.samples_per_class = 150;
    auto ds = data::generate_synthetic(cfg);
    auto splits = data::split(ds, data::SplitSpec{{4, 1, 1}, 11, true});
    for (auto n : splits.train.class_counts()) REQUIRE(n == 100);
    for (auto n : splits.val.class_counts()) REQUIRE(n == 25);
    for (auto n : splits.test.class_counts()) REQUIRE(n == 25);
}

TEST_CASE("split is a partition of the dataset", "[dataset][property]") {
    auto ds = data::generate_synthetic(small_config(19));
    auto splits = data::split(ds, data::SplitSpec{{4, 1, 1}, 5, true});

    REQUIRE(splits.train.samples.size() + splits.val.samples.size() +
                splits.test.samples.size() ==
            ds.samples.size());

    std::multiset<std::string> original, combined;
    for (const auto& s : ds.samples) original.insert(sample_key(s));
    for (const auto* part : {&splits.train, &splits.val, &splits.test})
        for (const auto& s : part->samples) combined.insert(sample_key(s));
    REQUIRE(original == combined);
}

TEST_CASE("split remainder goes to train", "[dataset]") {
    auto cfg = small_config();
    cfg.samples_per_class = 7; // 7 -> val 1, test 1, train 5
    auto ds = data::generate_synthetic(cfg);
    auto splits = data::split(ds, data::SplitSpec{{4, 1, 1}, 0, true});
    for (auto n : splits.train.class_counts()) REQUIRE(n == 5);
    for (auto n : splits.val.class_counts()) REQUIRE(n == 1);
    for (auto n : splits.test.class_counts()) REQUIRE(n == 1);
}

TEST_CASE("split is deterministic in the seed", "[dataset]") {
    auto ds = data::generate_synthetic(small_config(2));
    auto a = data::split(ds, data::SplitSpec{{4, 1, 1}, 123, true});
    auto b = data::split(ds, data::SplitSpec{{4, 1, 1}, 123, true});
    REQUIRE(a.train.samples.size() == b.train.samples.size());
    for (std::size_t i = 0; i < a.train.samples.size(); ++i)
        REQUIRE(a.train.samples[i].data == b.train.samples[i].data);
}

TEST_CASE("split rejects a missing class", "[dataset][errors]") {
    auto ds = data::generate_synthetic(small_config());
    ds.class_count = 7; // class 6 has no samples
    REQUIRE_THROWS_AS(data::split(ds, data::SplitSpec{}), std::invalid_argument);
}

TEST_CASE("standardized training set has zero mean and unit variance", "[dataset]") {
    auto ds = data::generate_synthetic(small_config(31));
    auto splits = data::split(ds, data::SplitSpec{{4, 1, 1}, 2, true});
    data::ScalerParams params = data::standardize(splits);

    for (std::size_t ch = 0; ch < kSegmentChannels; ++ch) {
        double sum = 0.0, sum_sq = 0.0, count = 0.0;
        for (const auto& s : splits.train.samples)
            for (std::size_t t = 0; t < kSegmentLength; ++t) {
                sum += s.at(ch, t);
                sum_sq += static_cast<double>(s.at(ch, t)) * s.at(ch, t);
                count += 1.0;
            }
        const double mean = sum / count;
        const double var = sum_sq / count - mean * mean;
        REQUIRE_THAT(mean, WithinAbs(0.0, 1e-6));
        REQUIRE_THAT(std::sqrt(var), WithinAbs(1.0, 1e-6));
        REQUIRE(params.std_dev[ch] > 0.0);
    }
}

TEST_CASE("scaler parameters are fit exactly once", "[dataset]") {
    auto ds = data::generate_synthetic(small_config(13));
    auto splits = data::split(ds, data::SplitSpec{{4, 1, 1}, 2, true});
    const data::ScalerParams params = data::fit_scaler(splits.train);

    auto once = data::apply_scaler(params, splits.train);
    auto twice = data::apply_scaler(params, once);
    // Re-applying parameters fit on the original scale shifts the statistics;
    // the pipeline must fit once and reuse.
    double mean_twice = 0.0, count = 0.0;
    for (const auto& s : twice.samples)
        for (std::size_t t = 0; t < kSegmentLength; ++t) {
            mean_twice += s.at(0, t);
            count += 1.0;
        }
    mean_twice /= count;
    REQUIRE(std::fabs(mean_twice) > 1e-3);
}

TEST_CASE("constant channels standardize to zero", "[dataset]") {
    data::LabeledDataset ds;
    ds.class_count = 1;
    for (int i = 0; i < 3; ++i) {
        WordSegment s;
        s.label = 0;
        std::fill(s.data.begin(), s.data.end(), 2.5f);
        ds.samples.push_back(s);
    }
    auto params = data::fit_scaler(ds);
    auto out = data::apply_scaler(params, ds);
    for (const auto& s : out.samples)
        for (float v : s.data) REQUIRE(v == 0.0f);
}

TEST_CASE("trial generator is deterministic with evenly spaced bursts", "[dataset]") {
    data::TrialConfig tc;
    tc.seed = 77;
    auto a = data::generate_trial(tc);
    auto b = data::generate_trial(tc);
    REQUIRE(a.raw.channels == b.raw.channels);
    REQUIRE(a.burst_centers.size() == 10);
    for (std::size_t i = 0; i + 1 < a.burst_centers.size(); ++i)
        REQUIRE(a.burst_centers[i + 1] - a.burst_centers[i] == tc.word_spacing);
}
