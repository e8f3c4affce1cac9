#include "nyqtune/evo.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

using namespace nyqtune::evo;

namespace {

double sphere(std::span<const double> x) {
    return std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
}

}  // namespace

TEST_CASE("sphere converges") {
    SearchSpace box{std::vector<double>(5, -5.0), std::vector<double>(5, 5.0)};
    GaConfig cfg;
    cfg.population = 50;
    cfg.generations = 200;
    auto r = minimize(sphere, box, cfg);
    CHECK(r.best_f < 1e-3);
    CHECK(r.history.size() == 200);
    CHECK(box.contains(r.best_x));
}

TEST_CASE("box feasibility") {
    SearchSpace box{{2.0}, {3.0}};
    std::size_t outside = 0;
    auto f = [&](std::span<const double> x) {
        if (x[0] < 2.0 || x[0] > 3.0) ++outside;
        return x[0];
    };
    GaConfig cfg;
    cfg.population = 30;
    cfg.generations = 40;
    auto r = minimize(f, box, cfg);
    CHECK(outside == 0);
    CHECK(r.best_x[0] >= 2.0);
    CHECK(r.best_x[0] <= 3.0);
    CHECK(r.best_f >= 2.0);
    CHECK(r.best_f == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("determinism and elitist descent") {
    SearchSpace box{{-3.0, -1.0, 0.0}, {3.0, 4.0, 2.0}};
    auto rosen = [](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < x.size(); ++i)
            s += 100.0 * std::pow(x[i + 1] - x[i] * x[i], 2) + std::pow(1.0 - x[i], 2);
        return s;
    };
    for (std::uint64_t seed : {1u, 2u, 99u}) {
        GaConfig cfg;
        cfg.population = 40;
        cfg.generations = 60;
        cfg.seed = seed;
        auto a = minimize(rosen, box, cfg);
        auto b = minimize(rosen, box, cfg);
        CHECK(a == b);
        for (std::size_t g = 1; g < a.history.size(); ++g) CHECK(a.history[g] <= a.history[g - 1]);
        CHECK(a.history.back() == a.best_f);
    }
}

TEST_CASE("seeded individuals are kept by elitism") {
    SearchSpace box{{-5.0, -5.0}, {5.0, 5.0}};
    GaConfig cfg;
    cfg.population = 10;
    cfg.generations = 3;
    auto r = minimize(sphere, box, cfg, {{0.0, 0.0}});
    CHECK(r.best_f == 0.0);
}

TEST_CASE("invalid inputs") {
    GaConfig cfg;
    CHECK_THROWS_AS(minimize(sphere, SearchSpace{}, cfg), std::invalid_argument);
    CHECK_THROWS_AS(minimize(sphere, SearchSpace{{1.0}, {0.0}}, cfg), std::invalid_argument);
    CHECK_THROWS_AS(minimize(sphere, SearchSpace{{0.0, 0.0}, {1.0}}, cfg), std::invalid_argument);
    cfg.population = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.population = 10;
    cfg.elitism = 10;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
