#pragma once

#include "nyqtune/evo.hpp"
#include "nyqtune/fracsim.hpp"
#include "nyqtune/gp.hpp"
#include "nyqtune/lti.hpp"
#include "nyqtune/reduction.hpp"
#include "nyqtune/tuning.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace nyqtune {

using json = nlohmann::json;

void to_json(json& j, const Polynomial& p);
void from_json(const json& j, Polynomial& p);
void to_json(json& j, const DelayTF& p);
void from_json(const json& j, DelayTF& p);
void to_json(json& j, const ReducedModel& m);
void from_json(const json& j, ReducedModel& m);
void to_json(json& j, const TestbenchSpec& s);
void from_json(const json& j, TestbenchSpec& s);

namespace evo {
void to_json(json& j, const GaConfig& c);
void from_json(const json& j, GaConfig& c);
}  // namespace evo

namespace reduction {
void to_json(json& j, const ReductionObjective& o);
void from_json(const json& j, ReductionObjective& o);  // grid is rebuilt from grid_unit
void to_json(json& j, const ReductionResult& r);
void from_json(const json& j, ReductionResult& r);
}  // namespace reduction

namespace fracsim {
void to_json(json& j, const ControllerParams& c);
void from_json(const json& j, ControllerParams& c);
}  // namespace fracsim

namespace gp {
void to_json(json& j, const GpConfig& c);
void from_json(const json& j, GpConfig& c);
/// {expression_string, fitness, complexity, bias, weights, genes}
void to_json(json& j, const ParetoPoint& p);
}  // namespace gp

namespace io {

json read_json(const std::filesystem::path& path);
/// Pretty-printed JSON; doubles keep full round-trip precision.
void write_json(const std::filesystem::path& path, const json& j);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Plain comma-separated table, no quoting (fields never contain commas).
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// %.17g
std::string num(double v);

CsvTable nyquist_csv(const std::vector<reduction::NyquistCurve>& curves);
CsvTable trajectory_csv(const fracsim::Trajectory& traj);
CsvTable comparison_csv(const tuning::RuleComparison& cmp);
/// Table-I style rows for a set of reduction results.
CsvTable reduction_table_csv(const std::vector<TestbenchSpec>& specs,
                             const std::vector<reduction::ReductionResult>& results);
/// Every evaluated (fitness, complexity) point plus the archive, flagged by front membership.
CsvTable pareto_csv(const std::vector<gp::ParetoPoint>& archive,
                    const std::vector<std::pair<double, std::size_t>>& evaluated);

}  // namespace io
}  // namespace nyqtune
