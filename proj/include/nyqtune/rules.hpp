#pragma once

#include "nyqtune/fracsim.hpp"
#include "nyqtune/lti.hpp"

#include <array>
#include <string>

namespace nyqtune::rules {

/// Reduced SOPTD features a tuning rule is evaluated on.
struct RuleInput {
    double K = 1.0;
    double tau_max = 1.0;
    double tau_min = 1.0;
    double L = 0.0;

    static RuleInput from_model(const ReducedModel& m);
    void validate() const;  // throws unless K == 1 and taus/L are finite
};

/// Protected primitives shared with the GP function set.
double psqrt(double x);  // sqrt(|x|)
double plog(double x);   // ln(|x|), 0 at 0
double pdiv(double a, double b);  // 0 when b == 0

/// Typesetting alternatives where the printed formulas are ambiguous.
struct RuleVariant {
    /// PID Kp/Kd: the long product sits inside sin(...) (default) or multiplies sin(...) as printed.
    bool pid_sine_wraps_product = true;
    /// PID Ki: "+3 tanh(L) + tanh(tau_max) - 0.8913" under the square root (default) or outside.
    bool pid_ki_terms_inside_sqrt = true;
    /// FOPID Kp: the fraction bar under the square root ends there (default) or spans
    /// the whole brace, dividing -L/tau_min as well.
    bool fopid_kp_fraction_on_sqrt_only = true;
};

/// One rule formula in the affine form offset + scale * brace(x).
struct AffineTerm {
    double offset;
    double scale;
    double brace;

    double value() const { return offset + scale * brace; }
};

/// Kp, Ki, Kd terms of the published PID rule.
std::array<AffineTerm, 3> pid_terms(const RuleInput& in, const RuleVariant& v = {});
/// Kp, Ki, Kd, lambda, mu terms of the published FOPID rule.
std::array<AffineTerm, 5> fopid_terms(const RuleInput& in, const RuleVariant& v = {});

fracsim::ControllerParams rule_pid(const RuleInput& in, const RuleVariant& v = {});
fracsim::ControllerParams rule_fopid(const RuleInput& in, const RuleVariant& v = {});

/// Rules for a model of any gain: evaluated on the unit-gain model, then Kp, Ki, Kd divided by K.
fracsim::ControllerParams rule_pid_for(const ReducedModel& m, const RuleVariant& v = {});
fracsim::ControllerParams rule_fopid_for(const ReducedModel& m, const RuleVariant& v = {});

}  // namespace nyqtune::rules
