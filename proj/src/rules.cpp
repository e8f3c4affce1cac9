#include "nyqtune/rules.hpp"

#include <cmath>
#include <stdexcept>

namespace nyqtune::rules {

RuleInput RuleInput::from_model(const ReducedModel& m) {
    if (m.kind != ModelKind::SOPTD) {
        throw std::invalid_argument("RuleInput: tuning rules take SOPTD models");
    }
    return {m.K, m.tau_max, m.tau_min, m.L};
}

void RuleInput::validate() const {
    if (K != 1.0) {
        throw std::invalid_argument("tuning rules assume unit process gain; normalize the plant so that K = 1");
    }
    if (!std::isfinite(tau_max) || !std::isfinite(tau_min) || !std::isfinite(L)) {
        throw std::invalid_argument("RuleInput: non-finite model parameter");
    }
}

double psqrt(double x) { return std::sqrt(std::abs(x)); }

double plog(double x) { return x == 0.0 ? 0.0 : std::log(std::abs(x)); }

double pdiv(double a, double b) { return b == 0.0 ? 0.0 : a / b; }

namespace {

// Pieces shared by the PID Kp and Kd braces.
struct PidShared {
    double head;   // sqrt(tmax / cos tmin) + tanh(-tmax^2 + tmin / tmax) - sqrt(L)
    double sine;   // the sin(1.6e-6 tmax^2 (1250 L + 2117) ...) product
};

PidShared pid_shared(const RuleInput& in, const RuleVariant& v) {
    const double tmax = in.tau_max;
    const double tmin = in.tau_min;
    const double L = in.L;
    PidShared s{};
    s.head = psqrt(pdiv(tmax, std::cos(tmin))) + std::tanh(-tmax * tmax + pdiv(tmin, tmax)) - psqrt(L);
    const double inner = 1.6e-6 * tmax * tmax * (1250.0 * L + 2117.0);
    const double factor = 500.0 * psqrt(pdiv(L, tmax)) + 1877.0 - 500.0 * pdiv(L, tmin);
    // The printed layout closes the sine before the second factor; that reading drives Kp
    // negative on most catalog plants, so by default the whole product is the argument.
    s.sine = v.pid_sine_wraps_product ? std::sin(inner * factor) : std::sin(inner) * factor;
    return s;
}

}  // namespace

std::array<AffineTerm, 3> pid_terms(const RuleInput& in, const RuleVariant& v) {
    in.validate();
    const double tmax = in.tau_max;
    const double tmin = in.tau_min;
    const double L = in.L;
    const PidShared s = pid_shared(in, v);

    const double kp_brace = s.head - std::sin(tmin) - s.sine;

    const double root_part = 4.0 * plog(tmax + L) + 2.0 * std::tanh(tmin);
    const double tail = 3.0 * std::tanh(L) + std::tanh(tmax) - 0.8913;
    const double ki_brace =
        v.pid_ki_terms_inside_sqrt ? psqrt(root_part + tail) : psqrt(root_part) - tail / 0.2452;

    const double ltm = pdiv(L * tmax, tmin);
    const double kd_brace = s.head + std::pow(std::abs(tmax), 0.25) - s.sine - ltm - std::sin(tmax) +
                            std::tanh(-L + tmin) + std::cos(ltm) - std::sin(tmin) - pdiv(6.457e-6, tmax);

    return {{{1.033, 0.1687, kp_brace}, {1.003, -0.2452, ki_brace}, {1.399, 0.09693, kd_brace}}};
}

std::array<AffineTerm, 5> fopid_terms(const RuleInput& in, const RuleVariant& v) {
    in.validate();
    const double tmax = in.tau_max;
    const double tmin = in.tau_min;
    const double L = in.L;
    const double ratio = pdiv(tmax, tmin);
    const double l_tmin = pdiv(L, tmin);

    // Kp
    const double tanh_arg = L * L + pdiv(L, tmin * tmax) + pdiv(std::cos(ratio), std::exp(tmax));
    const double numer = psqrt(std::tanh(l_tmin) - tmin);
    const double lt = plog(tmax);
    const double denom = (pdiv(plog(l_tmin), tmax) + 2.0 * tmax) * (lt * lt + pdiv(L, tmin * tmax * tmax * tmax) + l_tmin);
    double kp_brace = 0.0;
    if (v.fopid_kp_fraction_on_sqrt_only) {
        kp_brace = -l_tmin - std::tanh(tanh_arg) * pdiv(numer, denom);
    } else {
        kp_brace = pdiv(-l_tmin - std::tanh(tanh_arg) * numer, denom);
    }

    // Ki
    const double r4 = ratio * ratio * ratio * ratio;
    const double th = std::tanh(plog(tmax)) / (0.503953 * 0.503953);
    const double ki_brace = pdiv(r4, tmax) * th * th + pdiv(plog(0.1851 * std::sin(tmin)), tmax);

    // Kd
    const double kd_inner = (250.0 * tmin - 493.0) * std::sin(std::sin(tmax));
    const double kd_brace = 1.6e-5 * kd_inner * kd_inner + std::cos(ratio) + psqrt(std::sin(pdiv(0.4861289, L))) -
                            std::sin(tmax) + psqrt(std::sin(ratio)) + psqrt(2.0 * tmin);

    // lambda
    const double lambda_brace = psqrt(tmax * L) * (tmax - std::tanh(tmin));

    // mu
    const double mu_brace = std::tanh(std::tanh(std::tanh(L))) - std::cos(std::tanh(ratio)) -
                            std::cos(std::cos(std::tanh(pdiv(L * tmax, tmin)))) +
                            std::cos(std::cos(pdiv(L * tmin, tmax * tmax * std::exp(tmin)))) -
                            std::cos(std::tanh(L + pdiv(L, tmax) + ratio * ratio));

    return {{{1.1718, 0.2726, kp_brace},
             {0.3548, 0.0783, ki_brace},
             {0.1379, 0.1248, kd_brace},
             {0.9974, -0.002605, lambda_brace},
             {2.0205, 1.708, mu_brace}}};
}

fracsim::ControllerParams rule_pid(const RuleInput& in, const RuleVariant& v) {
    const auto t = pid_terms(in, v);
    return {t[0].value(), t[1].value(), t[2].value(), 1.0, 1.0};
}

fracsim::ControllerParams rule_fopid(const RuleInput& in, const RuleVariant& v) {
    const auto t = fopid_terms(in, v);
    return {t[0].value(), t[1].value(), t[2].value(), t[3].value(), t[4].value()};
}

namespace {

RuleInput unit_gain(const ReducedModel& m) {
    if (!(m.K > 0.0)) throw std::invalid_argument("tuning rules need a positive process gain");
    RuleInput in = RuleInput::from_model(m);
    in.K = 1.0;
    return in;
}

fracsim::ControllerParams rescale(fracsim::ControllerParams c, double K) {
    c.Kp /= K;
    c.Ki /= K;
    c.Kd /= K;
    return c;
}

}  // namespace

fracsim::ControllerParams rule_pid_for(const ReducedModel& m, const RuleVariant& v) {
    return rescale(rule_pid(unit_gain(m), v), m.K);
}

fracsim::ControllerParams rule_fopid_for(const ReducedModel& m, const RuleVariant& v) {
    return rescale(rule_fopid(unit_gain(m), v), m.K);
}

}  // namespace nyqtune::rules
