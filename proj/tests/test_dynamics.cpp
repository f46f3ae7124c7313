#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eef/dynamics.hpp"
#include "eef/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace eef;

namespace {

SystemParams undriven(double lambda = 0.5, double alpha = 0.0) {
    SystemParams p;
    p.lambda = lambda;
    p.alpha_damp = alpha;
    p.epsilon = 0.0;
    return p;
}

// Hand-written energy, independent of oscillator_energy().
double energy(double x, double v, const SystemParams& p) {
    return 0.5 * (1.0 + p.lambda * x * x) * v * v + 0.5 * p.omega0_sq * x * x;
}

State run(const SystemParams& p, State s, double dt, std::size_t steps) {
    for (std::size_t i = 0; i < steps; ++i) s = rk4_step(s, p, dt);
    return s;
}

} // namespace

TEST_CASE("eom_rhs examples") {
    SystemParams p;
    p.epsilon = 0.081;
    auto d = eom_rhs({0.0, 1.0, 3.7}, p);
    CHECK(d.dx == doctest::Approx(1.0));
    CHECK(d.dv == doctest::Approx(-0.2));

    d = eom_rhs({0.0, 0.0, 12.0}, p);
    CHECK(d.dx == 0.0);
    CHECK(d.dv == 0.0);

    p.epsilon = 0.0;
    d = eom_rhs({1.0, 0.0, 0.0}, p);
    CHECK(d.dx == 0.0);
    CHECK(d.dv == doctest::Approx(-0.25 / 1.5).epsilon(1e-15));
}

TEST_CASE("eom_rhs matches the equation of motion at random states") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    SystemParams p;
    p.epsilon = 0.112;
    for (int k = 0; k < 100; ++k) {
        const double x = u(rng), v = u(rng), t = 10.0 * u(rng);
        const auto d = eom_rhs({x, v, t}, p);
        const double drive = p.Omega0_sq * (2.0 * p.epsilon * std::cos(p.omega_p * t) +
                                            0.5 * p.epsilon * p.epsilon *
                                                (1.0 + std::cos(2.0 * p.omega_p * t)));
        const double residual = (1.0 + p.lambda * x * x) * d.dv + p.lambda * x * v * v +
                                p.omega0_sq * x - drive * x + p.alpha_damp * v;
        CHECK(std::abs(residual) < 1e-12);
        CHECK(d.dx == v);
    }
}

TEST_CASE("eom_rhs rejects non-finite states") {
    SystemParams p;
    CHECK_THROWS_AS(eom_rhs({std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0}, p), DomainError);
    CHECK_THROWS_AS(eom_rhs({0.0, std::numeric_limits<double>::infinity(), 0.0}, p), DomainError);
}

TEST_CASE("parameter validation") {
    SystemParams p;
    CHECK_NOTHROW(p.validate());
    p.lambda = 0.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = SystemParams{};
    p.omega_p = 0.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = SystemParams{};
    p.alpha_damp = -0.1;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = SystemParams{};
    p.epsilon = -0.01;
    CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("energy is a first integral of the undriven undamped system") {
    // dE/dt = (∂E/∂x)·v + (∂E/∂v)·a must vanish when a comes from eom_rhs.
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const auto p = undriven(0.5);
    for (int k = 0; k < 100; ++k) {
        const double x = u(rng), v = u(rng);
        const double a = eom_rhs({x, v, 0.0}, p).dv;
        const double dEdx = p.lambda * x * v * v + p.omega0_sq * x;
        const double dEdv = (1.0 + p.lambda * x * x) * v;
        CHECK(std::abs(dEdx * v + dEdv * a) < 1e-12);
    }
    CHECK(oscillator_energy({0.7, -1.3, 0.0}, p) == doctest::Approx(energy(0.7, -1.3, p)));
}

TEST_CASE("harmonic limit tracks cos(omega0 t)") {
    auto p = undriven(1e-12);
    const double w0 = std::sqrt(p.omega0_sq);
    const double dt = 0.01;
    const auto steps = static_cast<std::size_t>(std::round(2.0 * std::numbers::pi / w0 / dt));
    State s{1.0, 0.0, 0.0};
    double worst = 0.0;
    for (std::size_t i = 1; i <= steps; ++i) {
        s = rk4_step(s, p, dt);
        worst = std::max(worst, std::abs(s.x - std::cos(w0 * static_cast<double>(i) * dt)));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("energy drift over t=100 stays below 1e-8") {
    for (double lambda : {1e-12, 0.5, 2.0}) {
        const auto p = undriven(lambda);
        const State ic{1.0, 0.3, 0.0};
        const double e0 = energy(ic.x, ic.v, p);
        State s = ic;
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            s = rk4_step(s, p, 0.01);
            worst = std::max(worst, std::abs(energy(s.x, s.v, p) - e0) / e0);
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("damping never increases the energy at sample points") {
    const auto p = undriven(0.5, 0.2);
    const auto traj = integrate(p, {1.5, 0.0, 0.0}, 100.0, 0.01, 0.1, 0.0);
    REQUIRE(traj.samples.size() > 900);
    double prev = energy(1.5, 0.0, p);
    for (const auto& s : traj.samples) {
        const double e = energy(s.x, s.v, p);
        CHECK(e <= prev);
        prev = e;
    }
}

TEST_CASE("RK4 converges at fourth order") {
    SystemParams p;
    p.epsilon = 0.081;
    const State ic{0.5, 0.1, 0.0};
    const double t = 1.0;
    for (double dt : {0.2, 0.1, 0.05}) {
        const auto n = static_cast<std::size_t>(std::round(t / dt));
        const State a = run(p, ic, dt, n);
        const State b = run(p, ic, dt / 2, 2 * n);
        const State c = run(p, ic, dt / 4, 4 * n);
        const double ratio = std::abs(a.x - b.x) / std::abs(b.x - c.x);
        CAPTURE(dt);
        CHECK(ratio >= 12.0);
        CHECK(ratio <= 20.0);
    }

    const auto q = undriven(0.5);
    for (double dt : {0.1, 0.05}) {
        const auto n = static_cast<std::size_t>(std::round(10.0 / dt));
        const double a = run(q, {1.0, 0.3, 0.0}, dt, n).x;
        const double b = run(q, {1.0, 0.3, 0.0}, dt / 2, 2 * n).x;
        const double c = run(q, {1.0, 0.3, 0.0}, dt / 4, 4 * n).x;
        const double ratio = std::abs(a - b) / std::abs(b - c);
        CHECK(ratio >= 12.0);
        CHECK(ratio <= 20.0);
    }
}

TEST_CASE("integrate samples after the transient") {
    SystemParams p;
    p.epsilon = 0.05;
    const auto traj = integrate(p, {0.1, 0.1, 0.0}, 110.0, 0.01, 1.0, 10.0);
    REQUIRE(traj.samples.size() == 100);
    CHECK(traj.samples.front().t == doctest::Approx(11.0));
    CHECK(traj.samples.back().t == doctest::Approx(110.0));
    CHECK(traj.fine_x.size() == 10000);
    CHECK(traj.fine_t0 == doctest::Approx(10.01));

    // Samples sit on the fine grid.
    const auto idx = static_cast<std::size_t>(std::round((traj.samples[3].t - traj.fine_t0) / 0.01));
    CHECK(traj.fine_x[idx] == traj.samples[3].x);

    const auto lean = integrate(p, {0.1, 0.1, 0.0}, 110.0, 0.01, 1.0, 10.0, {.keep_fine = false});
    CHECK(lean.fine_x.empty());
    CHECK(lean.positions() == traj.positions());
}

TEST_CASE("integration is deterministic") {
    SystemParams p;
    p.epsilon = 0.112;
    const auto a = integrate(p, {0.1, 0.1, 0.0}, 300.0, 0.01, 1.0, 100.0);
    const auto b = integrate(p, {0.1, 0.1, 0.0}, 300.0, 0.01, 1.0, 100.0);
    CHECK(trajectory_csv(a) == trajectory_csv(b));
}

TEST_CASE("divergence raises an integration error with the blow-up time") {
    SystemParams p;
    p.epsilon = 0.112;
    try {
        integrate(p, {0.0, 20.0, 0.0}, 100.0, 0.01, 1.0, 0.0, {.keep_fine = false, .overflow_guard = 6.0});
        FAIL("expected IntegrationError");
    } catch (const IntegrationError& e) {
        CHECK(e.blowup_time() > 0.0);
        CHECK(e.blowup_time() <= 100.0);
    }
    CHECK_THROWS_AS(integrate(p, {0.1, 0.1, 0.0}, 10.0, -0.01, 1.0, 0.0), DomainError);
}

TEST_CASE("peak detection examples") {
    const std::vector<double> rising{1, 2, 3, 4, 5};
    CHECK(detect_peaks(rising, 0.0, 1.0).empty());

    const std::vector<double> bump{0, 1, 0};
    const auto one = detect_peaks(bump, 0.0, 1.0);
    REQUIRE(one.size() == 1);
    CHECK(one[0].x == 1.0);
    CHECK(one[0].t == 1.0);

    std::vector<double> sine;
    const double dt = 0.01;
    const auto n = static_cast<std::size_t>(20.0 * std::numbers::pi / dt);
    for (std::size_t i = 0; i <= n; ++i) sine.push_back(std::sin(static_cast<double>(i) * dt));
    const auto peaks = detect_peaks(sine, 0.0, dt);
    CHECK(peaks.size() == 10);
    for (const auto& pk : peaks) CHECK(std::abs(pk.x - 1.0) < 1e-3);

    const std::vector<double> plateau{0, 2, 2, 2, 0};
    const auto flat = detect_peaks(plateau, 0.0, 1.0);
    REQUIRE(flat.size() == 1);
    CHECK(flat[0].t == 1.0);

    const std::vector<double> two{1, 2};
    CHECK_THROWS_AS(detect_peaks(two, 0.0, 1.0), DomainError);
}

TEST_CASE("peak statistics") {
    auto stats = peak_statistics({{0, 1}, {1, 2}, {2, 3}});
    CHECK(stats.mean_peak == doctest::Approx(2.0));
    CHECK(stats.std_peak == doctest::Approx(0.81650).epsilon(1e-5));
    CHECK(stats.threshold == doctest::Approx(5.26599).epsilon(1e-5));

    stats = peak_statistics({{0, 4}, {1, 4}, {2, 4}});
    CHECK(stats.threshold == 4.0);

    stats = peak_statistics({{0, 5}});
    CHECK(stats.mean_peak == 5.0);
    CHECK(stats.std_peak == 0.0);
    CHECK(stats.threshold == 5.0);

    CHECK_THROWS_AS(peak_statistics({}), DomainError);
}

TEST_CASE("threshold identity holds for random peak sets") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    std::uniform_int_distribution<int> len(1, 200);
    for (int k = 0; k < 200; ++k) {
        std::vector<Peak> peaks;
        const int n = len(rng);
        for (int i = 0; i < n; ++i) peaks.push_back({double(i), u(rng)});
        const auto s = peak_statistics(peaks);
        const double scale = std::max(1.0, std::abs(s.mean_peak) + 4.0 * s.std_peak);
        CHECK(std::abs(s.threshold - s.mean_peak - 4.0 * s.std_peak) <= 4 * 2.3e-16 * scale);
    }
}

TEST_CASE("extreme classification is strict") {
    const std::vector<Peak> peaks{{0, 1}, {1, 5}, {2, 3}, {3, 5.0000001}};
    CHECK(classify_extremes(peaks, 10.0).count == 0);
    const auto ev = classify_extremes(peaks, 5.0);
    REQUIRE(ev.count == 1);
    CHECK(ev.events[0].t == 3.0);
}

TEST_CASE("trajectory csv") {
    Trajectory traj;
    traj.samples = {{1.0, 0.5, -0.25}, {2.0, 0.1, 0.0}};
    CHECK(trajectory_csv(traj) == "t,x,v\n1,0.5,-0.25\n2,0.10000000000000001,0\n");
}
