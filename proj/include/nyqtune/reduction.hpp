#pragma once

#include "nyqtune/evo.hpp"
#include "nyqtune/lti.hpp"

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace nyqtune::reduction {

enum class GridUnit { Hz, RadPerSec };
enum class NormKind { Length, Rms };
/// How dead time inside the compared models is evaluated on the grid.
enum class DelayRealization { Pade, Exact };
enum class ObjectiveKind { Nyquist, H2 };

struct FrequencyGrid {
    std::vector<double> points;
    GridUnit unit = GridUnit::RadPerSec;

    /// Log-spaced grid with `count` points over [lo, hi].
    static FrequencyGrid log_spaced(double lo, double hi, int count, GridUnit unit);
    /// Angular frequency of point k in rad/s.
    double omega(std::size_t k) const;
    std::vector<double> omegas() const;
};

/// 500 log-spaced points over [1e-4, 1e4] in the calibrated unit (rad/s).
FrequencyGrid default_grid(GridUnit unit = GridUnit::RadPerSec);

struct ReductionObjective {
    ObjectiveKind kind = ObjectiveKind::Nyquist;
    double w1 = 1.0;
    double w2 = 1.0;
    FrequencyGrid grid = default_grid();
    NormKind norm = NormKind::Length;
    DelayRealization delay = DelayRealization::Pade;

    void validate() const;
};

/// Frequency responses of p on the objective's grid, honouring its delay realization.
std::vector<std::complex<double>> grid_response(const DelayTF& p, const ReductionObjective& obj);

/// w1 * ||Re dP|| + w2 * ||Im dP|| over precomputed grid responses.
double nyquist_distance(std::span<const std::complex<double>> p, std::span<const std::complex<double>> q,
                        const ReductionObjective& obj);

double j_nyquist(const DelayTF& p, const DelayTF& q, const ReductionObjective& obj);

/// H2 norm of p - q after Pade rationalization of both; Gramian method.
double j_h2(const DelayTF& p, const DelayTF& q);

/// Search box for the reduced parameters; tau bounds apply to both time constants.
struct ReductionBox {
    double K_lo = 0.1, K_hi = 10.0;
    double tau_lo = 1e-3, tau_hi = 20.0;
    double L_lo = 0.0, L_hi = 10.0;
};

struct ReductionResult {
    ReducedModel model;
    double j_value = 0.0;
    long evaluations = 0;
    std::uint64_t seed = 0;
    ObjectiveKind objective = ObjectiveKind::Nyquist;
};

/// Objective value assigned to candidates that cannot be evaluated.
inline constexpr double kPenalty = 1e9;

/// Evaluates the objective for a candidate model against a plant (no penalty handling).
double evaluate_objective(const DelayTF& plant, const ReducedModel& model, const ReductionObjective& obj);

ReductionResult reduce(const DelayTF& p, ModelKind tmpl, const ReductionObjective& obj, const evo::GaConfig& ga,
                       const ReductionBox& box = {});

struct NyquistCurve {
    std::string label;
    std::vector<double> omega;
    std::vector<std::complex<double>> response;
};

struct ObjectiveComparison {
    std::vector<NyquistCurve> curves;  // "original" first, then one per reduced model
    ReductionResult nyquist_foptd, nyquist_soptd, h2_foptd, h2_soptd;
    // every model scored under both metrics
    double jn_nyquist_foptd = 0, jn_nyquist_soptd = 0, jn_h2_foptd = 0, jn_h2_soptd = 0;
    double jh_nyquist_foptd = 0, jh_nyquist_soptd = 0, jh_h2_foptd = 0, jh_h2_soptd = 0;
};

ObjectiveComparison compare_objectives(const DelayTF& p, const evo::GaConfig& ga, const ReductionObjective& nyquist = {});

/// One row of the published sub-optimal SOPTD table.
struct PublishedRow {
    TestbenchSpec spec;
    double j_min;
    ReducedModel model;
};

const std::vector<PublishedRow>& published_table();

struct CalibrationEntry {
    GridUnit unit;
    double weight;
    NormKind norm;
    DelayRealization delay;
    double median_rel_error;
    double max_rel_error;
    int within_10pct;
};

/// Scores every {unit, weight, norm, delay} combination against the published J_min column;
/// entries are sorted best (lowest median relative error) first.
std::vector<CalibrationEntry> calibrate_objective();

/// Relative errors |J(row) - J_min| / J_min for all published rows under `obj`.
std::vector<double> table_relative_errors(const ReductionObjective& obj);

std::string to_string(GridUnit u);
std::string to_string(NormKind n);
std::string to_string(DelayRealization d);
std::string to_string(ObjectiveKind k);
GridUnit parse_grid_unit(const std::string& s);
NormKind parse_norm(const std::string& s);
DelayRealization parse_delay_realization(const std::string& s);
ObjectiveKind parse_objective_kind(const std::string& s);

}  // namespace nyqtune::reduction
