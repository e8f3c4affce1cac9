#pragma once

#include "nyqtune/gp.hpp"
#include "nyqtune/io.hpp"
#include "nyqtune/tuning.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace nyqtune::pipeline {

/// Parameter names per controller kind, in ControllerParams order.
std::vector<std::string> param_names(tuning::ControllerKind kind);

/// Features -> one tuned parameter, over the rows that completed that tuning stage.
gp::RegressionData regression_data(const tuning::RuleDataset& data, tuning::ControllerKind kind, std::size_t param);

/// One evolved formula per controller parameter.
struct EvolvedRule {
    tuning::ControllerKind kind = tuning::ControllerKind::PID;
    std::vector<gp::GpResult> fits;

    /// Raw prediction (lambda = mu = 1 for PID); callers clamp into the box before simulating.
    fracsim::ControllerParams predict(const ReducedModel& m) const;
};

/// GP run for each parameter; parameter k uses seed cfg.seed + k.
EvolvedRule evolve_rule(const tuning::RuleDataset& data, tuning::ControllerKind kind, const gp::GpConfig& cfg);

struct RuleScore {
    TestbenchSpec spec;
    fracsim::ControllerParams params;  // clamped
    double J_rule = 0.0;
    double J_ga = 0.0;
};

struct RuleEvaluation {
    std::vector<RuleScore> rows;
    double mean_J_rule = 0.0;
    double mean_J_ga = 0.0;

    double ratio() const { return mean_J_rule / mean_J_ga; }
};

/// Closed-loop cost of the evolved rule on every completed row, against the GA optimum.
RuleEvaluation evaluate_rule(const EvolvedRule& rule, const tuning::RuleDataset& data);

struct PipelineConfig {
    std::vector<TestbenchSpec> plants = catalog();
    std::vector<TestbenchSpec> representative{
        {PlantClass::P1, 5.0}, {PlantClass::P2, 0.5}, {PlantClass::P3, 0.5}, {PlantClass::P4, 0.5}};
    tuning::DatasetConfig dataset = default_dataset_config();
    gp::GpConfig gp{};
    std::uint64_t seed = 1;

    static tuning::DatasetConfig default_dataset_config();
    /// Derives every stage seed from `seed`.
    void apply_seed(std::uint64_t s);
};

json to_json(const PipelineConfig& c);
PipelineConfig pipeline_config_from_json(const json& j);

struct PipelineReport {
    json summary;
    std::vector<std::filesystem::path> outputs;
    int completed = 0;
};

/// Reduction, tuning, GP per parameter and rule comparisons; writes all artifacts into `out_dir`.
PipelineReport run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out_dir);

/// "P1:3" -> "P1_3", safe for file names.
std::string file_tag(const TestbenchSpec& s);

}  // namespace nyqtune::pipeline
