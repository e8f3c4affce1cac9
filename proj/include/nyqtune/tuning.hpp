#pragma once

#include "nyqtune/evo.hpp"
#include "nyqtune/fracsim.hpp"
#include "nyqtune/reduction.hpp"
#include "nyqtune/rules.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace nyqtune::tuning {

enum class ControllerKind { PID, FOPID };

std::string to_string(ControllerKind k);
ControllerKind parse_controller_kind(const std::string& s);

/// Controller search box: gains in [0, 20], orders in [0.05, 2].
evo::SearchSpace default_space(ControllerKind kind);

struct TuningProblem {
    DelayTF plant;
    ControllerKind kind = ControllerKind::PID;
    fracsim::CostWeights weights{};
    evo::SearchSpace space = default_space(ControllerKind::PID);
    fracsim::SimOptions sim{};

    /// Problem over the default box and simulation options for this plant.
    static TuningProblem for_plant(const DelayTF& plant, ControllerKind kind);
};

/// Genome <-> parameters; PID genomes are (Kp, Ki, Kd), FOPID add (lambda, mu).
fracsim::ControllerParams decode(std::span<const double> x, ControllerKind kind);
std::vector<double> encode(const fracsim::ControllerParams& c, ControllerKind kind);

struct TuningResult {
    fracsim::ControllerParams params;
    double J = 0.0;
    long evaluations = 0;
};

/// GA minimisation of the ITAE + ISCO cost of the closed loop. `seeds` prime the initial
/// population (e.g. the PID optimum for a FOPID search); a slow integral-only controller is always added.
TuningResult tune_controller(const TuningProblem& prob, const evo::GaConfig& ga,
                             const std::vector<fracsim::ControllerParams>& seeds = {});

/// Cost of a fixed controller on the problem's plant (penalised when unstable).
double evaluate(const TuningProblem& prob, const fracsim::ControllerParams& c);

/// Gains clipped into the search box, so rule outputs can be simulated.
fracsim::ControllerParams clamp_to_space(const fracsim::ControllerParams& c, ControllerKind kind);

inline constexpr std::array<const char*, 6> kFeatureNames{"L", "tau_max", "tau_min", "tau_ratio", "L_over_tau_min",
                                                          "L_over_tau_max"};

/// {L, tau_max, tau_min, tau_max/tau_min, L/tau_min, L/tau_max}
std::array<double, 6> features(const ReducedModel& m);

struct DatasetRow {
    TestbenchSpec spec;
    ReducedModel model;
    bool reduced = false;
    double j_reduction = 0.0;
    std::array<double, 6> x{};
    std::optional<fracsim::ControllerParams> pid;
    double J_pid = 0.0;
    std::optional<fracsim::ControllerParams> fopid;
    double J_fopid = 0.0;
    std::string error;  // non-empty when a stage failed for this plant
};

struct RuleDataset {
    std::vector<DatasetRow> rows;

    /// Rows that completed the requested stage.
    std::vector<const DatasetRow*> complete(ControllerKind kind) const;
};

struct DatasetConfig {
    bool use_published_models = false;  // take reduced models from the published table instead of reducing
    bool tune_pid = true;
    bool tune_fopid = true;
    reduction::ReductionObjective objective{};
    evo::GaConfig reduction_ga{};
    evo::GaConfig tuning_ga{};
    int threads = 1;  // plants are processed independently; results do not depend on this
};

/// Reduction, features and PID/FOPID tuning for each catalog entry; failures are recorded per row.
RuleDataset build_dataset(const std::vector<TestbenchSpec>& specs, const DatasetConfig& cfg);

struct RuleComparison {
    TestbenchSpec spec;
    ControllerKind kind;
    fracsim::ControllerParams optimal;
    fracsim::ControllerParams rule;  // after clamping into the box
    fracsim::Trajectory traj_optimal;
    fracsim::Trajectory traj_rule;
    double J_optimal = 0.0;
    double J_rule = 0.0;

    double ratio() const { return J_rule / J_optimal; }
};

/// Simulates a GA-tuned controller and a rule-derived controller on the full plant.
RuleComparison compare_rule_vs_optimal(const TestbenchSpec& spec, ControllerKind kind,
                                       const fracsim::ControllerParams& optimal,
                                       const fracsim::ControllerParams& rule);

/// Convenience: tunes with `ga`, evaluates the published rule on `model`.
RuleComparison compare_rule_vs_optimal(const TestbenchSpec& spec, ControllerKind kind, const ReducedModel& model,
                                       const evo::GaConfig& ga, const rules::RuleVariant& variant = {});

}  // namespace nyqtune::tuning
