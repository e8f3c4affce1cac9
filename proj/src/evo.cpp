#include "nyqtune/evo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace nyqtune::evo {

void SearchSpace::validate() const {
    if (lower.empty() || lower.size() != upper.size()) {
        throw std::invalid_argument("SearchSpace: bounds must be nonempty and of equal length");
    }
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(lower[i] < upper[i]) || !std::isfinite(lower[i]) || !std::isfinite(upper[i])) {
            throw std::invalid_argument("SearchSpace: require finite lower[i] < upper[i]");
        }
    }
}

bool SearchSpace::contains(std::span<const double> x) const {
    if (x.size() != lower.size()) {
        return false;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= lower[i] && x[i] <= upper[i])) {
            return false;
        }
    }
    return true;
}

void GaConfig::validate() const {
    if (population < 2) throw std::invalid_argument("GaConfig: population must be >= 2");
    if (generations < 0) throw std::invalid_argument("GaConfig: generations must be >= 0");
    if (elitism < 0 || elitism >= population) throw std::invalid_argument("GaConfig: require 0 <= elitism < population");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) throw std::invalid_argument("GaConfig: crossover_rate outside [0,1]");
    if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw std::invalid_argument("GaConfig: mutation_rate outside [0,1]");
    if (tournament < 1) throw std::invalid_argument("GaConfig: tournament must be >= 1");
    if (!(blend_alpha >= 0.0) || !(mutation_scale >= 0.0) || !(mutation_decay >= 0.0)) throw std::invalid_argument("GaConfig: negative operator width");
}

namespace {

struct Member {
    std::vector<double> x;
    double f = 0.0;
};

double sanitize(double v) { return std::isnan(v) ? std::numeric_limits<double>::infinity() : v; }

}  // namespace

GaResult minimize(const Objective& f, const SearchSpace& space, const GaConfig& cfg,
                  const std::vector<std::vector<double>>& seeds) {
    space.validate();
    cfg.validate();
    const std::size_t dim = space.dim();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto clamp = [&](std::vector<double>& x) {
        for (std::size_t i = 0; i < dim; ++i) {
            x[i] = std::clamp(x[i], space.lower[i], space.upper[i]);
        }
    };

    GaResult result;
    auto evaluate = [&](Member& m) {
        m.f = sanitize(f(m.x));
        ++result.evaluations;
    };

    std::vector<Member> pop(static_cast<std::size_t>(cfg.population));
    for (std::size_t k = 0; k < pop.size(); ++k) {
        if (k < seeds.size()) {
            if (seeds[k].size() != dim) {
                throw std::invalid_argument("minimize: seed has wrong dimension");
            }
            pop[k].x = seeds[k];
            clamp(pop[k].x);
        } else {
            pop[k].x.resize(dim);
            for (std::size_t i = 0; i < dim; ++i) {
                pop[k].x[i] = space.lower[i] + unit(rng) * (space.upper[i] - space.lower[i]);
            }
        }
        evaluate(pop[k]);
    }

    auto by_fitness = [](const Member& a, const Member& b) { return a.f < b.f; };
    std::stable_sort(pop.begin(), pop.end(), by_fitness);

    auto tournament = [&]() -> const Member& {
        std::size_t best = static_cast<std::size_t>(unit(rng) * static_cast<double>(pop.size())) % pop.size();
        for (int t = 1; t < cfg.tournament; ++t) {
            const std::size_t c = static_cast<std::size_t>(unit(rng) * static_cast<double>(pop.size())) % pop.size();
            if (pop[c].f < pop[best].f) {
                best = c;
            }
        }
        return pop[best];
    };

    for (int g = 0; g < cfg.generations; ++g) {
        const double progress = static_cast<double>(g) / static_cast<double>(cfg.generations);
        const double sigma = cfg.mutation_scale * std::pow(1.0 - progress, cfg.mutation_decay);
        std::vector<Member> next(pop.begin(), pop.begin() + cfg.elitism);
        std::vector<Member> children;
        while (next.size() + children.size() < pop.size()) {
            Member a{tournament().x, 0.0};
            Member b{tournament().x, 0.0};
            if (unit(rng) < cfg.crossover_rate) {
                for (std::size_t i = 0; i < dim; ++i) {
                    const double lo = std::min(a.x[i], b.x[i]);
                    const double hi = std::max(a.x[i], b.x[i]);
                    const double ext = cfg.blend_alpha * (hi - lo);
                    const double ua = unit(rng);
                    const double ub = unit(rng);
                    a.x[i] = lo - ext + ua * (hi - lo + 2.0 * ext);
                    b.x[i] = lo - ext + ub * (hi - lo + 2.0 * ext);
                }
            }
            for (Member* m : {&a, &b}) {
                for (std::size_t i = 0; i < dim; ++i) {
                    if (unit(rng) < cfg.mutation_rate) {
                        m->x[i] += gauss(rng) * sigma * (space.upper[i] - space.lower[i]);
                    }
                }
                clamp(m->x);
            }
            children.push_back(std::move(a));
            if (next.size() + children.size() < pop.size()) {
                children.push_back(std::move(b));
            }
        }
        for (Member& c : children) {
            evaluate(c);
            next.push_back(std::move(c));
        }
        std::stable_sort(next.begin(), next.end(), by_fitness);
        pop = std::move(next);
        result.history.push_back(pop.front().f);
    }

    result.best_x = pop.front().x;
    result.best_f = pop.front().f;
    return result;
}

}  // namespace nyqtune::evo
