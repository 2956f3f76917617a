#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "mottsim/analysis.hpp"
#include "mottsim/catalog.hpp"

using namespace mottsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SpikeTrain train_at(std::vector<double> times) {
    SpikeTrain t;
    t.times = std::move(times);
    t.peaks.assign(t.times.size(), 1.0);
    return t;
}

// Gaussian bumps of 1 V on a 0.2 V baseline, sampled every 10 ns.
std::pair<std::vector<double>, std::vector<double>> bumps(const std::vector<double>& at, double t_end,
                                                          double width = 0.3e-6) {
    std::vector<double> t, v;
    for (double x = 0; x <= t_end; x += 10e-9) {
        double y = 0.2;
        for (double c : at) y += std::exp(-0.5 * (x - c) * (x - c) / (width * width));
        t.push_back(x);
        v.push_back(y);
    }
    return {t, v};
}

}  // namespace

TEST_CASE("intervals of a short train", "[analysis]") {
    const auto s = isi_and_jisi(train_at({0, 10e-6, 20e-6, 30e-6}));
    REQUIRE(s.isi.size() == 3);
    for (double x : s.isi) CHECK_THAT(x, WithinRel(10e-6, 1e-12));
    CHECK(s.jisi.size() == 2);
    CHECK(s.coefficient_of_variation() < 1e-9);
    CHECK_FALSE(s.too_few_for_jisi);
    CHECK(isi_and_jisi(train_at({1e-6})).too_few_for_isi);
    CHECK(isi_and_jisi(train_at({1e-6, 2e-6})).too_few_for_jisi);
}

TEST_CASE("joint intervals number two fewer than spikes", "[analysis][property]") {
    std::mt19937_64 gen(1);
    std::exponential_distribution<double> gap(1e5);
    for (int n = 3; n < 60; n += 4) {
        std::vector<double> t{0};
        for (int k = 1; k < n; ++k) t.push_back(t.back() + 1e-7 + gap(gen));
        const auto s = isi_and_jisi(train_at(t));
        CHECK(s.jisi.size() == static_cast<std::size_t>(n - 2));
        CHECK(s.histogram.total() == s.isi.size());
        for (std::size_t k = 0; k < s.jisi.size(); ++k) CHECK(s.jisi[k].second == s.isi[k + 1]);
    }
}

TEST_CASE("bursts are split at long gaps", "[analysis]") {
    const auto m = burst_metrics(train_at({0, 1e-6, 2e-6, 20e-6, 21e-6, 22e-6}));
    REQUIRE(m.bursts.size() == 2);
    CHECK(m.bursts[0].count == 3);
    CHECK(m.bursts[1].count == 3);
    CHECK(m.spikes_per_burst == 3.0);
    REQUIRE(m.period);
    CHECK_THAT(*m.period, WithinRel(20e-6, 1e-12));
    // a regular train is one burst
    CHECK(burst_metrics(train_at({0, 1e-6, 2e-6, 3e-6})).bursts.size() == 1);
}

TEST_CASE("amplitude recurrence map", "[analysis]") {
    const auto r = amplitude_recurrence(std::vector<double>{1, 1, 2});
    REQUIRE(r.pairs.size() == 2);
    CHECK(r.pairs[0] == std::pair{1.0, 1.0});
    CHECK(r.pairs[1] == std::pair{1.0, 2.0});
    CHECK_THAT(r.mean, WithinRel(4.0 / 3.0, 1e-12));
    // population skewness of {1,1,2}: m3 / m2^1.5 = (2/27) / (2/9)^1.5
    CHECK_THAT(r.skewness, WithinRel((2.0 / 27.0) / std::pow(2.0 / 9.0, 1.5), 1e-12));
    CHECK(amplitude_recurrence(std::vector<double>{1, 2}).too_few);
}

TEST_CASE("spike detection recovers peak times", "[analysis]") {
    const std::vector<double> at{3e-6, 11.37e-6, 20e-6, 20.5e-6, 31e-6};
    const auto [t, v] = bumps(at, 40e-6, 0.1e-6);
    const auto train = detect_spikes(t, v);
    CHECK_THAT(train.baseline, WithinAbs(0.2, 1e-9));
    // 20 and 20.5 us merge under the 2 us minimum separation
    REQUIRE(train.size() == 4);
    CHECK_THAT(train.times[1], WithinAbs(11.37e-6, 1e-9));
    CHECK_THAT(train.peaks[1], WithinAbs(1.2, 1e-3));
    CHECK_THAT(train.times[3], WithinAbs(31e-6, 1e-9));
    // excursions cut by the trace end are dropped
    const auto [t2, v2] = bumps({5e-6, 10e-6}, 10e-6);
    CHECK(detect_spikes(t2, v2, {.baseline = 0.2}).size() == 1);
}

TEST_CASE("spike detection is idempotent on its own output", "[analysis][property]") {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> gap(3e-6, 12e-6);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> at{2e-6};
        while (at.back() < 80e-6) at.push_back(at.back() + gap(gen));
        at.pop_back();
        const auto [t, v] = bumps(at, 90e-6);
        const auto first = detect_spikes(t, v);
        CHECK(first.size() == at.size());
        // re-render the detected train and detect again
        const auto [t2, v2] = bumps(first.times, 90e-6);
        const auto second = detect_spikes(t2, v2);
        REQUIRE(second.size() == first.size());
        for (std::size_t k = 0; k < first.size(); ++k) CHECK_THAT(second.times[k], WithinAbs(first.times[k], 1e-10));
    }
}

TEST_CASE("histogram modes and fundamental interval", "[analysis]") {
    std::vector<double> t{0};
    std::mt19937_64 gen(2);
    std::normal_distribution<double> jitter(0, 0.2e-6);
    const int skips[] = {1, 1, 2, 1, 3, 1, 1, 2, 1, 1, 2, 3, 1, 1};
    for (int rep = 0; rep < 10; ++rep)
        for (int k : skips) t.push_back(t.back() + k * 20e-6 + jitter(gen));
    const auto s = isi_and_jisi(train_at(t), 2e-6);
    const auto modes = histogram_modes(s.histogram);
    REQUIRE(modes.size() == 3);
    for (int k = 0; k < 3; ++k) CHECK_THAT(modes[k], WithinAbs((k + 1) * 20e-6, 2e-6));
    const auto f = fundamental_isi(s);
    REQUIRE(f);
    CHECK_THAT(*f, WithinRel(20e-6, 0.02));
    CHECK_FALSE(fundamental_isi(isi_and_jisi(train_at({0}))));
}

TEST_CASE("excitability from synthetic f-I curves", "[analysis]") {
    FiCurve c1, c2, none;
    for (int k = 1; k <= 20; ++k) {
        c1.points.push_back({k * 1e-6, 1e3 * k});
        c2.points.push_back({k * 1e-6, 40e3 + 100.0 * k});
    }
    c1.spike_count = c2.spike_count = 21;
    CHECK(classify_excitability(c1) == Excitability::Class1);
    CHECK(classify_excitability(c2) == Excitability::Class2);
    CHECK(classify_excitability(none) == Excitability::NonExcitable);
    FiCurve single;
    single.spike_count = 1;
    CHECK(classify_excitability(single) == Excitability::Class3);
}

TEST_CASE("latency fit recovers a logarithmic law", "[analysis]") {
    const double tau0 = 17e-6, b = 3.2e-6, e = 0.38;
    std::vector<double> v, lat;
    for (double x = -0.5; x <= 0.3; x += 0.05) {
        v.push_back(x);
        lat.push_back(tau0 + b * std::log(e - x));
    }
    const auto f = fit_latency(v, lat);
    CHECK_THAT(f.tau0, WithinRel(tau0, 1e-3));
    CHECK_THAT(f.b, WithinRel(b, 1e-3));
    CHECK_THAT(f.e, WithinRel(e, 1e-3));
    CHECK(f.r2 > 0.999999);
    CHECK_THROWS_AS(fit_latency({0.1, 0.2}, {1, 2}), ConfigError);
}

TEST_CASE("spectral oscillation detector", "[analysis]") {
    std::vector<double> t, v;
    for (double x = 0; x < 1e-3; x += 0.1e-6) {
        t.push_back(x);
        v.push_back(0.5 + 0.02 * std::sin(2 * std::numbers::pi * 12e3 * x) + 10 * x);
    }
    const auto o = detect_oscillation(t, v, 0, 1e-3, 0.1);
    CHECK(o.present);
    CHECK_THAT(o.frequency, WithinRel(12e3, 0.05));
    CHECK_THAT(o.amplitude, WithinRel(0.02, 0.1));
    CHECK_FALSE(detect_oscillation(t, v, 0, 1e-3, 0.01).present);
    CHECK_THAT(peak_to_peak(t, v, 0.5e-3, 0.6e-3), WithinAbs(0.04 + 1e-3, 3e-3));
}

TEST_CASE("10-90 rise time of smooth switching edges", "[analysis]") {
    // i = tanh(k sin(w t)); the level y is crossed where sin(w t) = atanh(y)/k
    const double k = 4, period = 1e-9, w = 2 * std::numbers::pi / period;
    std::vector<double> t, i;
    for (double x = 0; x < 3.3 * period; x += period / 20000) {
        t.push_back(x);
        i.push_back(std::tanh(k * std::sin(w * x)));
    }
    const double top = std::tanh(k);
    auto when = [&](double y) { return std::asin(std::atanh(y) / k) / w; };
    const double oracle = when(-top + 1.8 * top) - when(-top + 0.2 * top);
    const auto r = switching_time(t, i);
    REQUIRE(r);
    CHECK_THAT(*r, WithinRel(oracle, 1e-3));
    CHECK_FALSE(switching_time(std::vector<double>{0, 1, 2, 3}, std::vector<double>{1, 1, 1, 1}));
}

TEST_CASE("static power bounds follow the insulating conductance", "[analysis]") {
    const auto c = circuit_from_row("S14");
    const double g = 1.0 / DeviceBranch(c.dev1).resistance(kStateFloor) + 1.0 / DeviceBranch(c.dev2).resistance(kStateFloor);
    const auto pb = static_power_bounds(c, 1.327);
    CHECK_THAT(pb.upper, WithinRel(1.327 * 1.327 * g, 1e-12));
    CHECK_THAT(pb.lower / pb.upper, WithinRel(0.25, 1e-12));
}

TEST_CASE("convergence ladder bookkeeping", "[analysis]") {
    const auto rep = convergence_report([](double s) { return train_at({10e-6 * (1 + 1e-3 * s)}); }, {1.0, 0.5, 0.25});
    REQUIRE(rep.spiking);
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.rows.front().tolerance_scale == 1.0);
    CHECK(rep.converged);
    CHECK_THAT(*rep.rows[0].drift, WithinRel(0.5e-3 / (1 + 0.5e-3), 1e-6));
    CHECK_FALSE(convergence_report([](double) { return SpikeTrain{}; }, {1.0, 0.5}).spiking);
    CHECK_THROWS_AS(convergence_report([](double) { return SpikeTrain{}; }, {1.0}), ConfigError);
}
