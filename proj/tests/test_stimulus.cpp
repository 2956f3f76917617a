#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "mottsim/stimulus.hpp"

using namespace mottsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("segment grammar", "[stimulus]") {
    const auto p = parse_protocol(R"(
        # a mixed program
        mode current
        dc      t0=0 t1=10us amp=5uA
        pulse   t0=20us width=10us amp=0.25mA
        doublet t0=40us width=5us interval=20us amp=10uA amp2=20uA
        ramp    t0=100us t1=200us from=0uA to=150uA
        zap     t0=300us t1=2300us amp=6uA f0=1kHz f1=50kHz offset=1uA
        silence t0=2400us t1=2500us
    )");
    REQUIRE(p.segments.size() == 6);
    CHECK(p.mode == InputMode::Current);
    CHECK_THAT(p.deterministic(5e-6), WithinRel(5e-6, 1e-12));
    CHECK_THAT(p.deterministic(25e-6), WithinRel(0.25e-3, 1e-12));
    CHECK(p.deterministic(15e-6) == 0.0);
    CHECK_THAT(p.deterministic(42e-6), WithinRel(10e-6, 1e-12));
    CHECK(p.deterministic(50e-6) == 0.0);
    CHECK_THAT(p.deterministic(62e-6), WithinRel(20e-6, 1e-12));
    CHECK_THAT(p.deterministic(150e-6), WithinRel(75e-6, 1e-12));
    CHECK_THAT(p.deterministic(300e-6), WithinAbs(1e-6, 1e-15));
    CHECK(p.deterministic(2450e-6) == 0.0);
    CHECK(p.end() == Catch::Approx(2500e-6));
}

TEST_CASE("zap frequency sweeps linearly", "[stimulus]") {
    const auto p = parse_protocol("zap t0=0 t1=2ms amp=0.6V f0=1kHz f1=50kHz\n");
    CHECK(p.mode == InputMode::Voltage);
    const auto& z = p.segments.front();
    CHECK_THAT(z.instantaneous_frequency(0), WithinRel(1e3, 1e-12));
    CHECK_THAT(z.instantaneous_frequency(1e-3), WithinRel(25.5e3, 1e-12));
    CHECK_THAT(z.instantaneous_frequency(2e-3), WithinRel(50e3, 1e-12));
    // the slope is the analytic derivative of the value
    for (double t : {1e-4, 7e-4, 1.3e-3}) {
        const double h = 1e-10;
        const double fd = (z.value(t + h, Side::Right) - z.value(t - h, Side::Right)) / (2 * h);
        CHECK_THAT(z.slope(t), WithinRel(fd, 1e-5));
    }
}

TEST_CASE("mode inferred from the first amplitude", "[stimulus]") {
    CHECK(parse_protocol("dc t0=0 t1=1us amp=1V").mode == InputMode::Voltage);
    CHECK(parse_protocol("dc t0=0 t1=1us amp=1uA").mode == InputMode::Current);
}

TEST_CASE("isolator converts voltage amplitudes to current", "[stimulus]") {
    const auto p = parse_protocol("isolator gain=0.1mA/V\npulse t0=0 width=15us amp=0.85V\n");
    CHECK(p.mode == InputMode::Current);
    CHECK(p.isolator);
    CHECK_THAT(p.segments.front().amp, WithinRel(85e-6, 1e-12));
    const auto q = parse_protocol("mode voltage\nisolator gain=1e-4\npulse t0=0 width=15us amp=0.85V\n");
    const auto c = to_current_clamp(q);
    CHECK(c.mode == InputMode::Current);
    CHECK_THAT(c.segments.front().amp, WithinRel(85e-6, 1e-12));
}

TEST_CASE("parse errors carry line and column", "[stimulus]") {
    auto line_of = [](const std::string& text) {
        try {
            parse_protocol(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return -1;
    };
    CHECK(line_of("mode current\ndc t0=0 t1=1us amp=5uA\nwiggle t0=0\n") == 3);
    CHECK(line_of("dc t0=0 t1=1us amp=5uA\ndc t0=0.5us t1=2us amp=5uA\n") == 2);
    CHECK(line_of("mode current\npulse t0=0 width=1us amp=1V\n") == 2);
    CHECK(line_of("mode voltage\npulse t0=0 width=1us amp=1uA\n") == 2);
    CHECK(line_of("dc t0=0 t1=1us amp=5uA bogus=3\n") == 1);
    CHECK(line_of("mode sideways\n") == 1);
    CHECK(line_of("dc t0=0 t1=1us amp=5 parsecs\n") == 1);
    CHECK_THROWS(parse_protocol("dc t0=2us t1=1us amp=5uA\n"));
    CHECK_THROWS(parse_protocol("doublet t0=0 width=10us interval=5us amp=1uA\n"));
}

TEST_CASE("render and parse round-trip", "[stimulus][property]") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::ostringstream os;
        const bool voltage = trial % 2;
        const char* unit = voltage ? "V" : "uA";
        os << "mode " << (voltage ? "voltage" : "current") << '\n';
        if (trial % 3 == 0) os << "noise pp=" << 50 * u(gen) << unit << " hold=" << 50 + 100 * u(gen) << "ns seed=" << trial << '\n';
        double t = 0;
        for (int k = 0; k < 5; ++k) {
            const double w = 1 + 50 * u(gen);
            const double a = -2 + 4 * u(gen);
            switch (static_cast<int>(6 * u(gen))) {
                case 0: os << "dc t0=" << t << "us t1=" << t + w << "us amp=" << a << unit; break;
                case 1: os << "pulse t0=" << t << "us width=" << w << "us amp=" << a << unit; break;
                case 2:
                    os << "doublet t0=" << t << "us width=" << w / 3 << "us interval=" << w / 2 << "us amp=" << a << unit
                       << " amp2=" << 2 * a << unit;
                    break;
                case 3: os << "ramp t0=" << t << "us t1=" << t + w << "us from=" << a << unit << " to=" << -a << unit; break;
                case 4: os << "zap t0=" << t << "us t1=" << t + w << "us amp=" << a << unit << " f0=1kHz f1=" << 2 + u(gen) << "kHz"; break;
                default: os << "silence t0=" << t << "us t1=" << t + w << "us"; break;
            }
            os << '\n';
            t += w + 10 * u(gen);
        }
        const auto p = parse_protocol(os.str());
        const auto again = parse_protocol(render(p));
        CHECK(again == p);
        CHECK(render(again) == render(p));
    }
}

TEST_CASE("noise is seeded, zero-mean and bounded", "[stimulus][property]") {
    const auto p = parse_protocol("noise pp=50uA hold=100ns seed=4\ndc t0=0 t1=10ms amp=82.5uA\n");
    const NoiseTrack a(p, 0), b(p, 0), c(p, 1);
    double sum = 0, max_abs = 0;
    int same_run_differs = 0, other_run_same = 0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
        const double t = (k + 0.5) * 100e-9;
        const double x = a.value(t);
        same_run_differs += x != b.value(t);
        other_run_same += x == c.value(t);
        sum += x;
        max_abs = std::max(max_abs, std::abs(x));
    }
    CHECK(same_run_differs == 0);
    CHECK(other_run_same < 5);
    CHECK(max_abs <= 25e-6);
    CHECK(max_abs > 24e-6);
    // uniform on [-25, 25] uA: standard error of the mean ~ 0.05 uA
    CHECK(std::abs(sum / n) < 0.3e-6);
    // held between boundaries
    CHECK(a.value(150e-9) == a.value(199e-9));
    CHECK(a.next_boundary(150e-9) == Catch::Approx(200e-9));
}

TEST_CASE("left and right limits at segment edges", "[stimulus]") {
    const auto p = parse_protocol("pulse t0=10us width=5us amp=1uA\n");
    const double a = p.segments.front().t0, b = p.segments.front().t1;
    CHECK(p.deterministic(a, Side::Right) == Catch::Approx(1e-6));
    CHECK(p.deterministic(a, Side::Left) == 0.0);
    CHECK(p.deterministic(b, Side::Left) == Catch::Approx(1e-6));
    CHECK(p.deterministic(b, Side::Right) == 0.0);
    const auto bp = p.breakpoints();
    REQUIRE(bp.size() == 2);
    CHECK(bp[1] == Catch::Approx(15e-6));
}
