#include "nyqtune/fracsim.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>

using namespace nyqtune;
using namespace nyqtune::fracsim;
using cd = std::complex<double>;

namespace {

double phase_deg(const DelayTF& g, double w) { return std::arg(freq_response(g, w)) * 180.0 / M_PI; }
double mag_db(const DelayTF& g, double w) { return 20.0 * std::log10(std::abs(freq_response(g, w))); }

// Grunwald-Letnikov operator of order a applied to a unit step, sampled at t
double gl_step(double a, double t, double h) {
    const long n = std::lround(t / h);
    double w = 1.0, acc = 0.0;
    for (long k = 0; k <= n; ++k) {
        acc += w;
        w *= 1.0 - (a + 1.0) / static_cast<double>(k + 1);
    }
    return acc * std::pow(h, -a);
}

SimOptions options(double horizon, double dt) {
    SimOptions o;
    o.horizon = horizon;
    o.dt = dt;
    return o;
}

}  // namespace

TEST_CASE("oustaloup") {
    FracApproxConfig cfg;
    SUBCASE("integer exponents are exact") {
        auto one = oustaloup(0.0, cfg);
        CHECK(freq_response(one, 3.0) == cd(1.0, 0.0));
        auto s = oustaloup(1.0, cfg);
        CHECK(std::abs(freq_response(s, 2.5) - cd(0.0, 2.5)) < 1e-14);
        auto inv = oustaloup(-1.0, cfg);
        CHECK(std::abs(freq_response(inv, 4.0) - 1.0 / cd(0.0, 4.0)) < 1e-14);
    }
    SUBCASE("half-order differentiator") {
        auto g = oustaloup(0.5, cfg);
        CHECK(is_stable(g));
        for (auto z : g.num.roots()) CHECK(z.real() < 0.0);
        CHECK(std::abs(phase_deg(g, 1.0) - 45.0) < 2.0);
        for (double w = std::pow(10.0, -0.5); w <= std::pow(10.0, 0.5); w *= 1.1) {
            CHECK(std::abs(phase_deg(g, w) - 45.0) < 2.0);
            const double slope = (mag_db(g, w * 1.01) - mag_db(g, w / 1.01)) / std::log10(1.01 * 1.01);
            CHECK(std::abs(slope - 10.0) < 1.0);
            // exact (jw)^0.5 magnitude
            CHECK(std::abs(std::abs(freq_response(g, w)) / std::sqrt(w) - 1.0) < 0.03);
        }
    }
    SUBCASE("composition") {
        auto a = oustaloup(0.4, cfg);
        auto ab = oustaloup(0.8, cfg);
        for (double w : {0.3, 1.0, 3.0}) {
            const double prod = std::norm(freq_response(a, w));
            CHECK(std::abs(prod / std::abs(freq_response(ab, w)) - 1.0) < 0.05);
        }
    }
    SUBCASE("domain") {
        CHECK_THROWS_AS(oustaloup(2.0, cfg), std::domain_error);
        CHECK_THROWS_AS(oustaloup(-2.5, cfg), std::domain_error);
        FracApproxConfig bad;
        bad.omega_low = 10.0;
        bad.omega_high = 1.0;
        CHECK_THROWS(oustaloup(0.5, bad));
    }
    SUBCASE("Grunwald-Letnikov step response") {
        // s^-0.5 driven by a unit step is t^0.5 / Gamma(1.5) inside the band
        const double dt = 1e-3;
        auto g = realize(oustaloup(-0.5, cfg));
        std::vector<double> input(5001, 1.0);
        auto y = simulate_open_loop(g, input, dt);
        for (double t : {0.5, 1.0, 2.0, 5.0}) {
            const double ref = gl_step(-0.5, t, dt);
            CHECK(std::abs(ref - std::sqrt(t) / std::tgamma(1.5)) / ref < 1e-2);
            CHECK(std::abs(y[static_cast<std::size_t>(std::lround(t / dt))] - ref) / ref < 0.05);
        }
    }
}

TEST_CASE("controller_tf") {
    FracApproxConfig cfg;
    auto p = controller_tf(ControllerParams::pid(1.0, 0.0, 0.0), cfg);
    CHECK(freq_response(p, 7.0) == cd(1.0, 0.0));
    auto i = controller_tf(ControllerParams::pid(0.0, 1.0, 0.0), cfg);
    CHECK(std::abs(freq_response(i, 2.0) - 1.0 / cd(0.0, 2.0)) < 1e-14);

    ControllerParams f{1.0, 1.0, 1.0, 0.5, 0.5};
    auto c = controller_tf(f, cfg);
    CHECK(c.is_proper());
    for (double w : {0.3, 1.0, 3.0}) {
        const cd jw(0.0, w);
        const cd exact = 1.0 + std::pow(jw, -0.5) + std::pow(jw, 0.5);
        CHECK(std::abs(freq_response(c, w) - exact) / std::abs(exact) < 0.03);
    }
    CHECK(controller_tf(ControllerParams{0.0, 0.0, 1.0, 1.0, 1.8}, cfg).is_proper());
    CHECK_THROWS(ControllerParams({-1.0, 0.0, 0.0, 1.0, 1.0}).validate());
    CHECK_THROWS(ControllerParams({1.0, 0.0, 0.0, 0.0, 1.0}).validate());
}

TEST_CASE("simulate_step") {
    DelayTF lag({1.0}, {1.0, 1.0});
    SUBCASE("zero controller") {
        auto tr = simulate_step(lag, ControllerParams{}, options(10.0, 0.01));
        CHECK_FALSE(tr.unstable);
        CHECK(tr.size() == 1001);
        for (std::size_t k = 0; k < tr.size(); ++k) {
            CHECK(tr.y[k] == 0.0);
            CHECK(tr.e[k] == 1.0);
            CHECK(tr.t[k] == doctest::Approx(k * 0.01));
        }
    }
    SUBCASE("proportional dc value") {
        auto tr = simulate_step(lag, ControllerParams::pid(1.0, 0.0, 0.0), options(20.0, 20.0 / 20000.0));
        CHECK(std::abs(tr.y.back() - 0.5) < 1e-3);
        // y(t) = 0.5 (1 - e^{-2t})
        CHECK(tr.y[1000] == doctest::Approx(0.5 * (1.0 - std::exp(-2.0))).epsilon(1e-8));
    }
    SUBCASE("dead-time window") {
        auto plant = ReducedModel::foptd(1.0, 1.0, 1.0).to_tf();
        const double dt = 1e-3;
        auto tr = simulate_step(plant, ControllerParams::pid(0.7, 0.4, 0.2), options(5.0, dt));
        const auto d = static_cast<std::size_t>(std::lround(1.0 / dt));
        for (std::size_t k = 0; k <= d; ++k) CHECK(tr.y[k] == 0.0);
        CHECK(tr.y[d + 1] > 0.0);
    }
    SUBCASE("pure delay shifts exactly") {
        DelayTF delay({1.0}, {1.0}, 0.5);
        auto a = options(6.0, 0.01);
        auto b = a;
        b.step_time = 0.3;
        auto c = ControllerParams::pid(0.4, 0.8, 0.0);
        auto ya = simulate_step(delay, c, a).y;
        auto yb = simulate_step(delay, c, b).y;
        const std::size_t k = 30;
        for (std::size_t i = 0; i + k < ya.size(); ++i) CHECK(yb[i + k] == doctest::Approx(ya[i]).epsilon(1e-12));
    }
    SUBCASE("open-loop linearity") {
        auto g1 = realize(make_testbench({PlantClass::P1, 3}));
        auto g2 = realize(DelayTF(Polynomial{2.0}, make_testbench({PlantClass::P1, 3}).den));
        std::vector<double> step(2000, 1.0);
        auto y1 = simulate_open_loop(g1, step, 0.01);
        auto y2 = simulate_open_loop(g2, step, 0.01);
        for (std::size_t k = 0; k < y1.size(); k += 97) CHECK(y2[k] == doctest::Approx(2.0 * y1[k]).epsilon(1e-12));
        CHECK(y1.back() == doctest::Approx(1.0 - std::exp(-19.99) * (1 + 19.99 + 19.99 * 19.99 / 2)).epsilon(1e-6));
    }
    SUBCASE("unstable loop flagged") {
        auto p = make_testbench({PlantClass::P1, 3});
        auto o = default_sim_options(p);
        auto tr = simulate_step(p, ControllerParams::pid(20.0, 0.0, 0.0), o);
        CHECK(tr.unstable);
        CHECK(closed_loop_cost(p, ControllerParams::pid(20.0, 0.0, 0.0), o, CostWeights{}) == kUnstablePenalty);
    }
    SUBCASE("invalid options") {
        CHECK_THROWS(simulate_step(lag, ControllerParams{}, options(10.0, -1.0)));
        CHECK_THROWS(simulate_step(lag, ControllerParams{}, options(0.05, 0.01)));
        CHECK_THROWS(simulate_step(DelayTF({1.0, 0.0, 0.0}, {1.0, 1.0}), ControllerParams{}, options(10.0, 0.01)));
    }
}

TEST_CASE("default horizon") {
    CHECK(default_horizon(DelayTF({1.0}, {1.0, 1.0})) == 50.0);
    CHECK(default_horizon(ReducedModel::foptd(1.0, 4.0, 2.0).to_tf()) == doctest::Approx(120.0));
    auto p = make_testbench({PlantClass::P1, 20});
    CHECK(default_horizon(p) == doctest::Approx(400.0));
    auto o = default_sim_options(p);
    CHECK(o.dt == doctest::Approx(o.horizon / 20000.0));
}

TEST_CASE("cost_j") {
    const double T = 10.0, dt = 0.01;
    Trajectory tr;
    tr.dt = dt;
    for (int k = 0; k <= 1000; ++k) {
        tr.t.push_back(k * dt);
        tr.y.push_back(0.0);
        tr.u.push_back(0.0);
        tr.e.push_back(0.0);
    }
    CHECK(cost_j(tr, CostWeights{}) == 0.0);

    auto ones = tr;
    std::fill(ones.e.begin(), ones.e.end(), 1.0);
    CHECK(std::abs(cost_j(ones, {2.0, 1.0}) - 2.0 * T * T / 2.0) < 2.0 * T * dt);

    auto effort = tr;
    std::fill(effort.u.begin(), effort.u.end(), 1.0);
    CHECK(cost_j(effort, {1.0, 3.0}) == doctest::Approx(3.0 * T));

    SUBCASE("nonnegative and monotone in horizon") {
        auto p = make_testbench({PlantClass::P1, 3});
        auto full = simulate_step(p, ControllerParams::pid(1.0, 0.5, 1.0), default_sim_options(p));
        double prev = 0.0;
        for (std::size_t n = 2; n <= full.size(); n += 1500) {
            Trajectory part = full;
            part.t.resize(n);
            part.y.resize(n);
            part.u.resize(n);
            part.e.resize(n);
            const double j = cost_j(part, CostWeights{});
            CHECK(j >= prev);
            prev = j;
        }
    }
    CHECK_THROWS(CostWeights({0.0, 0.0}).validate());
}

TEST_CASE("step-size convergence") {
    auto p = make_testbench({PlantClass::P1, 3});
    for (const auto& c : {ControllerParams::pid(1.0, 0.5, 1.0), ControllerParams{1.0, 0.5, 1.0, 0.9, 1.2}}) {
        auto o = default_sim_options(p);
        auto half = o;
        half.dt = o.dt / 2.0;
        const double a = closed_loop_cost(p, c, o, CostWeights{});
        const double b = closed_loop_cost(p, c, half, CostWeights{});
        CHECK(std::abs(a - b) / b < 0.01);
    }
}
