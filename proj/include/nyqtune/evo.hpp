#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace nyqtune::evo {

/// Box constraints on the decision vector.
struct SearchSpace {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t dim() const { return lower.size(); }
    /// Throws std::invalid_argument unless sizes match, are nonzero and lower < upper.
    void validate() const;
    bool contains(std::span<const double> x) const;
};

struct GaConfig {
    int population = 100;
    int generations = 300;
    double crossover_rate = 0.9;
    double mutation_rate = 0.1;  // per-gene probability
    int elitism = 2;
    std::uint64_t seed = 1;

    // BLX-alpha blend width and Gaussian mutation scale as a fraction of box width
    double blend_alpha = 0.5;
    double mutation_scale = 0.1;
    // sigma shrinks as scale * (1 - g/G)^decay over the run; 0 keeps it fixed
    double mutation_decay = 2.0;
    int tournament = 3;

    void validate() const;
    friend bool operator==(const GaConfig&, const GaConfig&) = default;
};

struct GaResult {
    std::vector<double> best_x;
    double best_f = 0.0;
    std::vector<double> history;  // best objective after each generation
    long evaluations = 0;

    friend bool operator==(const GaResult&, const GaResult&) = default;
};

using Objective = std::function<double(std::span<const double>)>;

/// Real-coded elitist GA: tournament selection, BLX-alpha crossover,
/// Gaussian mutation, clamping to the box. `seeds` are injected into the
/// initial population (clamped) ahead of the random members.
GaResult minimize(const Objective& f, const SearchSpace& space, const GaConfig& cfg,
                  const std::vector<std::vector<double>>& seeds = {});

}  // namespace nyqtune::evo
