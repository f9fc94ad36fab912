#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "kdessi/butterworth.hpp"
#include "kdessi/signal_processing.hpp"
#include "support/test_helpers.hpp"

using namespace kdessi;
using Catch::Matchers::WithinAbs;

namespace {
constexpr double kRate = 1000.0;

double to_db(double gain) { return 20.0 * std::log10(gain); }

// Steady-state amplitude of a filtered sinusoid: sqrt(2) * RMS over the final
// stretch, using an integer number of periods.
double steady_state_amplitude(const std::vector<double>& y, double freq_hz) {
    const std::size_t period = static_cast<std::size_t>(kRate / freq_hz);
    const std::size_t span = 100 * period;
    return std::sqrt(2.0) * testutil::rms_of(y, y.size() - span, y.size());
}
} // namespace

TEST_CASE("corner frequencies sit at -3 dB", "[butterworth][oracle]") {
    auto hp = butter::design(butter::Kind::HighPass, 10, 20.0, 0.0, kRate);
    auto lp = butter::design(butter::Kind::LowPass, 10, 400.0, 0.0, kRate);
    REQUIRE_THAT(to_db(butter::magnitude_response(hp, 20.0, kRate)), WithinAbs(-3.0103, 0.01));
    REQUIRE_THAT(to_db(butter::magnitude_response(lp, 400.0, kRate)), WithinAbs(-3.0103, 0.01));

    // Cascade as used by the pipeline: still -3 dB at each corner because the
    // other filter is flat there.
    auto mag_cascade = [&](double f) {
        return butter::magnitude_response(hp, f, kRate) * butter::magnitude_response(lp, f, kRate);
    };
    REQUIRE_THAT(to_db(mag_cascade(20.0)), WithinAbs(-3.0, 0.5));
    REQUIRE_THAT(to_db(mag_cascade(400.0)), WithinAbs(-3.0, 0.5));
}

TEST_CASE("DC is blocked", "[butterworth]") {
    auto ts = testutil::series_from({std::vector<double>(6000, 1.0)});
    auto out = dsp::butterworth_bandpass(ts, dsp::FilterSpec{});
    double steady = 0.0;
    for (std::size_t i = 5000; i < 6000; ++i)
        steady = std::max(steady, std::fabs(out.channels[0][i]));
    REQUIRE(steady < 1e-3);
}

TEST_CASE("100 Hz passes within 1 percent", "[butterworth][oracle]") {
    // Analytic check first, then the time-domain measurement.
    auto hp = butter::design(butter::Kind::HighPass, 10, 20.0, 0.0, kRate);
    auto lp = butter::design(butter::Kind::LowPass, 10, 400.0, 0.0, kRate);
    const double analytic = butter::magnitude_response(hp, 100.0, kRate) *
                            butter::magnitude_response(lp, 100.0, kRate);
    REQUIRE_THAT(analytic, WithinAbs(1.0, 0.001));

    auto ts = testutil::series_from({testutil::sine_wave(5000, 100.0, kRate)});
    auto out = dsp::butterworth_bandpass(ts, dsp::FilterSpec{});
    REQUIRE_THAT(steady_state_amplitude(out.channels[0], 100.0), WithinAbs(1.0, 0.01));
}

TEST_CASE("480 Hz is attenuated by more than 20 dB", "[butterworth][oracle]") {
    auto lp = butter::design(butter::Kind::LowPass, 10, 400.0, 0.0, kRate);
    REQUIRE(to_db(butter::magnitude_response(lp, 480.0, kRate)) < -20.0);

    auto ts = testutil::series_from({testutil::sine_wave(8000, 480.0, kRate)});
    auto out = dsp::butterworth_bandpass(ts, dsp::FilterSpec{});
    const double amp = steady_state_amplitude(out.channels[0], 480.0);
    REQUIRE(to_db(amp) < -20.0);
}

TEST_CASE("filtering is linear", "[butterworth][property]") {
    dsp::FilterSpec spec;
    const double a = 2.5, b = -1.25;
    for (std::uint32_t seed = 0; seed < 5; ++seed) {
        auto x = testutil::random_signal(800, seed);
        auto y = testutil::random_signal(800, seed + 50);
        std::vector<double> combo(800);
        for (std::size_t i = 0; i < 800; ++i) combo[i] = a * x[i] + b * y[i];

        auto fx = dsp::butterworth_bandpass(testutil::series_from({x}), spec);
        auto fy = dsp::butterworth_bandpass(testutil::series_from({y}), spec);
        auto fc = dsp::butterworth_bandpass(testutil::series_from({combo}), spec);
        for (std::size_t i = 0; i < 800; ++i)
            REQUIRE_THAT(fc.channels[0][i],
                         WithinAbs(a * fx.channels[0][i] + b * fy.channels[0][i], 1e-9));
    }
}

TEST_CASE("single band-pass variant matches the corner definition", "[butterworth]") {
    auto bp = butter::design(butter::Kind::BandPass, 10, 20.0, 400.0, kRate);
    REQUIRE_THAT(to_db(butter::magnitude_response(bp, 20.0, kRate)), WithinAbs(-3.0, 0.5));
    REQUIRE_THAT(to_db(butter::magnitude_response(bp, 400.0, kRate)), WithinAbs(-3.0, 0.5));
    REQUIRE_THAT(butter::magnitude_response(bp, 100.0, kRate), WithinAbs(1.0, 0.001));

    auto ts = testutil::series_from({testutil::sine_wave(5000, 100.0, kRate)});
    auto out = dsp::butterworth_bandpass(ts, dsp::FilterSpec{}, false, /*single_bandpass=*/true);
    REQUIRE_THAT(steady_state_amplitude(out.channels[0], 100.0), WithinAbs(1.0, 0.01));
}

TEST_CASE("zero-phase mode removes the group delay", "[butterworth]") {
    // An in-band tone burst (100 Hz under a Gaussian window) keeps its
    // envelope apex in place under forward-backward filtering.
    std::vector<double> x(4001, 0.0);
    for (int i = -600; i <= 600; ++i)
        x[2000 + i] = std::exp(-0.5 * (i / 150.0) * (i / 150.0)) *
                      std::cos(2.0 * M_PI * 100.0 * i / kRate);
    auto out = dsp::butterworth_bandpass(testutil::series_from({x}), dsp::FilterSpec{},
                                         /*zero_phase=*/true);
    const auto& y = out.channels[0];
    std::size_t peak = 0;
    for (std::size_t i = 1; i < y.size(); ++i)
        if (std::fabs(y[i]) > std::fabs(y[peak])) peak = i;
    REQUIRE(std::llabs(static_cast<long long>(peak) - 2000) <= 10);
}

TEST_CASE("invalid corner frequencies are rejected", "[butterworth][errors]") {
    auto ts = testutil::series_from({std::vector<double>(100, 1.0)});
    dsp::FilterSpec bad;
    bad.low_pass_hz = 600.0; // above Nyquist for 1000 Hz
    REQUIRE_THROWS_AS(dsp::butterworth_bandpass(ts, bad), std::invalid_argument);
    bad = dsp::FilterSpec{};
    bad.high_pass_hz = 450.0;
    bad.low_pass_hz = 400.0; // inverted corners
    REQUIRE_THROWS_AS(dsp::butterworth_bandpass(ts, bad), std::invalid_argument);
    bad = dsp::FilterSpec{};
    bad.order = 7; // odd
    REQUIRE_THROWS_AS(dsp::butterworth_bandpass(ts, bad), std::invalid_argument);
}
