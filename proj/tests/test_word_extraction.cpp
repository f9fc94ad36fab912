#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>

#include "kdessi/dataset.hpp"
#include "kdessi/signal_processing.hpp"
#include "kdessi/word_extraction.hpp"
#include "support/test_helpers.hpp"

using namespace kdessi;

namespace {

std::vector<double> bumps(std::size_t len, const std::vector<std::size_t>& centers,
                          const std::vector<double>& amps, double sigma = 150.0) {
    std::vector<double> x(len, 0.0);
    for (std::size_t b = 0; b < centers.size(); ++b)
        for (std::size_t i = 0; i < len; ++i) {
            const double d = (static_cast<double>(i) - static_cast<double>(centers[b])) / sigma;
            x[i] += amps[b] * std::exp(-0.5 * d * d);
        }
    return x;
}

// Independent scorer for the exhaustive re-scoring invariant.
double window_power(const TimeSeries& env, std::size_t start) {
    double s = 0.0;
    for (const auto& ch : env.channels)
        for (std::size_t t = start; t < start + kSegmentLength; ++t) s += ch[t] * ch[t];
    return s;
}

} // namespace

TEST_CASE("detect_peaks on a flat signal returns nothing", "[words]") {
    REQUIRE(words::detect_peaks(std::vector<double>(5000, 0.0)).empty());
    REQUIRE(words::detect_peaks(std::vector<double>(5000, 2.5)).empty());
}

TEST_CASE("detect_peaks finds ten separated bumps", "[words]") {
    std::vector<std::size_t> centers;
    for (int k = 0; k < 10; ++k) centers.push_back(2000 + 4000 * k);
    auto x = bumps(40000, centers, std::vector<double>(10, 1.0));
    auto peaks = words::detect_peaks(x, 3000, 10);
    REQUIRE(peaks.size() == 10);
    for (std::size_t i = 0; i < 10; ++i)
        REQUIRE(std::llabs(static_cast<long long>(peaks[i]) -
                           static_cast<long long>(centers[i])) <= 5);
}

TEST_CASE("detect_peaks keeps the most prominent when more exist", "[words]") {
    std::vector<std::size_t> centers;
    std::vector<double> amps;
    for (int k = 0; k < 12; ++k) {
        centers.push_back(2000 + 4000 * k);
        amps.push_back(k == 3 || k == 8 ? 0.5 : 1.0);
    }
    auto x = bumps(50000, centers, amps);
    auto peaks = words::detect_peaks(x, 3000, 10);
    REQUIRE(peaks.size() == 10);
    std::size_t pi = 0;
    for (int k = 0; k < 12; ++k) {
        if (k == 3 || k == 8) continue;
        REQUIRE(std::llabs(static_cast<long long>(peaks[pi++]) -
                           static_cast<long long>(centers[k])) <= 5);
    }
}

TEST_CASE("detect_peaks enforces the minimum gap by prominence", "[words]") {
    // Two bumps 2000 apart: only the taller survives a 3000-sample gap rule.
    auto x = bumps(12000, {4000, 6000}, {0.6, 1.0});
    auto peaks = words::detect_peaks(x, 3000, 10);
    REQUIRE(peaks.size() == 1);
    REQUIRE(std::llabs(static_cast<long long>(peaks[0]) - 6000) <= 5);
}

TEST_CASE("localize_peaks takes the median across channels", "[words]") {
    words::PeakList pl;
    pl.per_channel = {{100}, {105}, {98}};
    auto res = words::localize_peaks(pl);
    REQUIRE(res.peaks == std::vector<std::size_t>{100});
    REQUIRE(res.warnings.empty());

    pl.per_channel = {{42}, {42}, {42}};
    REQUIRE(words::localize_peaks(pl).peaks == std::vector<std::size_t>{42});
}

TEST_CASE("localize_peaks pairs by rank up to the minimum count", "[words]") {
    words::PeakList pl;
    pl.per_channel.assign(3, {});
    for (std::size_t i = 0; i < 10; ++i) {
        pl.per_channel[0].push_back(1000 + 4000 * i);
        pl.per_channel[1].push_back(1010 + 4000 * i);
        if (i < 9) pl.per_channel[2].push_back(990 + 4000 * i);
    }
    auto res = words::localize_peaks(pl);
    REQUIRE(res.peaks.size() == 9);
    REQUIRE_FALSE(res.warnings.empty());
    for (std::size_t i = 0; i < 9; ++i) REQUIRE(res.peaks[i] == 1000 + 4000 * i);
}

namespace {
// Triangular bump wide enough that every candidate shift clips some of it
// (half-width > 750 - 150), so the power score discriminates placements.
std::vector<double> triangle_at(std::size_t apex, std::size_t len = 10000) {
    std::vector<double> tri(len, 0.0);
    for (int i = -900; i <= 900; ++i)
        tri[apex + i] = 1.0 - std::fabs(static_cast<double>(i)) / 901.0;
    return tri;
}
} // namespace

TEST_CASE("localize_word centers a symmetric bump at its apex", "[words]") {
    auto tri = triangle_at(5000);
    auto env = testutil::series_from({tri, tri, tri});
    auto seg = words::localize_word(env, 5000);
    REQUIRE(seg.center == 5000);
}

TEST_CASE("localize_word walks to a displaced apex on the step-10 grid", "[words]") {
    auto tri = triangle_at(5060);
    auto env = testutil::series_from({tri, tri, tri});
    auto seg = words::localize_word(env, 5000);
    REQUIRE(seg.center == 5060);
}

TEST_CASE("localize_word clamps windows at the signal edge", "[words]") {
    auto x = bumps(10000, {300}, {1.0});
    auto env = testutil::series_from({x, x, x});
    auto seg = words::localize_word(env, 300);
    REQUIRE(seg.center == 750); // window [0, 1500)
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t t = 0; t < 100; ++t)
            REQUIRE(seg.at(c, t) == static_cast<float>(x[t]));
}

TEST_CASE("localize_word rejects short envelopes", "[words][errors]") {
    auto env = testutil::series_from({std::vector<double>(1499, 1.0)});
    REQUIRE_THROWS_AS(words::localize_word(env, 700), std::invalid_argument);
}

TEST_CASE("chosen center maximizes window power over all candidates", "[words][property]") {
    for (std::uint32_t seed = 0; seed < 8; ++seed) {
        auto x = bumps(12000, {4000 + seed * 307}, {1.0}, 200.0);
        auto noise = testutil::random_signal(12000, seed, 0.05);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += std::fabs(noise[i]);
        auto env = testutil::series_from({x, x, x});
        const std::size_t peak = 4000 + seed * 307 + 20;
        auto seg = words::localize_word(env, peak);

        const double chosen = window_power(env, seg.center - kSegmentLength / 2);
        for (int shift = -150; shift <= 150; shift += 10) {
            long long start = static_cast<long long>(peak) + shift - 750;
            start = std::clamp(start, 0LL, static_cast<long long>(env.length() - kSegmentLength));
            REQUIRE(chosen >= window_power(env, static_cast<std::size_t>(start)) - 1e-9);
        }
    }
}

TEST_CASE("extract_words recovers ten bursts from a synthetic trial", "[words]") {
    data::TrialConfig tc;
    tc.seed = 21;
    auto trial = data::generate_trial(tc);
    auto env = dsp::process_recording(trial.raw);
    auto res = words::extract_words(env);

    REQUIRE(res.segments.size() == 10);
    for (const auto& seg : res.segments)
        REQUIRE(seg.data.size() == kSegmentChannels * kSegmentLength);
    for (std::size_t i = 0; i + 1 < res.consensus_peaks.size(); ++i)
        REQUIRE(res.consensus_peaks[i + 1] - res.consensus_peaks[i] > 3000);

    for (std::size_t w = 0; w < 10; ++w) {
        const long long truth = static_cast<long long>(trial.burst_centers[w]) - 50;
        REQUIRE(std::llabs(static_cast<long long>(res.segments[w].center) - truth) <= 100);
    }
}

TEST_CASE("extract_words reports a partial trial with a warning", "[words]") {
    data::TrialConfig tc;
    tc.words = 9;
    tc.seed = 5;
    auto trial = data::generate_trial(tc);
    auto env = dsp::process_recording(trial.raw);
    auto res = words::extract_words(env);
    REQUIRE(res.segments.size() == 9);
    REQUIRE_FALSE(res.warnings.empty());
}

TEST_CASE("extract_words on silence yields nothing plus a warning", "[words]") {
    TimeSeries env(3, 20000, 1000.0);
    auto res = words::extract_words(env);
    REQUIRE(res.segments.empty());
    REQUIRE_FALSE(res.warnings.empty());
}

TEST_CASE("shifting the envelope shifts every detected center", "[words][property]") {
    std::vector<std::size_t> centers;
    for (int k = 0; k < 4; ++k) centers.push_back(3000 + 4000 * k);
    auto base = bumps(22000, centers, {1.0, 0.9, 1.1, 0.95});

    const std::size_t delta = 700;
    std::vector<double> shifted(base.size(), 0.0);
    for (std::size_t i = 0; i + delta < base.size(); ++i) shifted[i + delta] = base[i];

    auto res_a = words::extract_words(testutil::series_from({base, base, base}), 4);
    auto res_b = words::extract_words(testutil::series_from({shifted, shifted, shifted}), 4);
    REQUIRE(res_a.segments.size() == res_b.segments.size());
    for (std::size_t i = 0; i < res_a.segments.size(); ++i)
        REQUIRE(res_b.segments[i].center == res_a.segments[i].center + delta);
}
