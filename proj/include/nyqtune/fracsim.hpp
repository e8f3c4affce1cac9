#pragma once

#include "nyqtune/lti.hpp"
#include "nyqtune/state_space.hpp"

#include <span>
#include <vector>

namespace nyqtune::fracsim {

/// Parallel PI^lambda D^mu gains and orders; lambda = mu = 1 is classical PID.
struct ControllerParams {
    double Kp = 0.0;
    double Ki = 0.0;
    double Kd = 0.0;
    double lambda = 1.0;
    double mu = 1.0;

    static ControllerParams pid(double Kp, double Ki, double Kd) { return {Kp, Ki, Kd, 1.0, 1.0}; }

    void validate() const;
    bool is_integer_order() const { return lambda == 1.0 && mu == 1.0; }
    friend bool operator==(const ControllerParams&, const ControllerParams&) = default;
};

/// Band and order N of the Oustaloup ladder; N yields 2N+1 pole/zero pairs.
struct FracApproxConfig {
    double omega_low = 1e-2;
    double omega_high = 1e2;
    int order = 5;

    void validate() const;
    /// Corner of the derivative roll-off filter.
    double derivative_filter() const { return 100.0 * omega_high; }
    friend bool operator==(const FracApproxConfig&, const FracApproxConfig&) = default;
};

/// Zero/pole/gain description: gain * prod(s + zeros[i]) / prod(s + poles[j]) * s^integrators
/// (integrators < 0 means pure differentiators, only used internally for s).
struct Zpk {
    double gain = 1.0;
    std::vector<double> zeros;  // stored as positive corner frequencies
    std::vector<double> poles;
    int integrators = 0;

    DelayTF to_tf() const;
};

/// Rational approximation of s^exponent, |exponent| < 2. Integer exponents are exact.
Zpk oustaloup_zpk(double exponent, const FracApproxConfig& cfg);
DelayTF oustaloup(double exponent, const FracApproxConfig& cfg);

/// Kp + Ki approx(s^-lambda) + Kd approx(s^mu) filter(s), zero-gain terms omitted.
DelayTF controller_tf(const ControllerParams& c, const FracApproxConfig& cfg);

/// Where the derivative term takes its input from.
enum class DerivativeInput { Measurement, Error };

struct SimOptions {
    double horizon = 50.0;
    double dt = 50.0 / 20000.0;
    FracApproxConfig frac{};
    DerivativeInput derivative = DerivativeInput::Measurement;
    double step_time = 0.0;          // reference steps from 0 to 1 here
    double divergence_limit = 1e10;  // |y| or |u| beyond this marks the run unstable

    void validate() const;
};

/// max(50, 20 * (L + average residence time of the rational part)).
double default_horizon(const DelayTF& plant);
SimOptions default_sim_options(const DelayTF& plant);

struct Trajectory {
    double dt = 0.0;
    std::vector<double> t, y, u, e;
    bool unstable = false;

    std::size_t size() const { return t.size(); }
};

/// Unity-feedback step response. Plant dead time is a sample buffer of round(L/dt) steps;
/// continuous dynamics advance with fixed-step RK4 (sub-stepped against stiffness).
Trajectory simulate_step(const DelayTF& plant, const ControllerParams& c, const SimOptions& opts);

/// Open-loop response of a realization to a sampled input (linear between samples).
std::vector<double> simulate_open_loop(const StateSpace& g, std::span<const double> input, double dt);

struct CostWeights {
    double w1 = 1.0;  // ITAE
    double w2 = 1.0;  // ISCO

    void validate() const;
};

/// Trapezoidal integral of w1 t |e| + w2 u^2.
double cost_j(const Trajectory& traj, const CostWeights& w);

inline constexpr double kUnstablePenalty = 1e9;

/// cost_j of the simulated loop, or kUnstablePenalty when the run diverged.
double closed_loop_cost(const DelayTF& plant, const ControllerParams& c, const SimOptions& opts, const CostWeights& w);

}  // namespace nyqtune::fracsim
