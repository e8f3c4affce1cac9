#include "nyqtune/fracsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nyqtune::fracsim {

void ControllerParams::validate() const {
    if (!(Kp >= 0.0) || !(Ki >= 0.0) || !(Kd >= 0.0)) {
        throw std::invalid_argument("ControllerParams: gains must be nonnegative");
    }
    if (!(lambda > 0.0 && lambda <= 2.0) || !(mu > 0.0 && mu <= 2.0)) {
        throw std::invalid_argument("ControllerParams: lambda and mu must lie in (0, 2]");
    }
}

void FracApproxConfig::validate() const {
    if (!(omega_low > 0.0) || !(omega_high > omega_low)) {
        throw std::invalid_argument("FracApproxConfig: require 0 < omega_low < omega_high");
    }
    if (order < 1) {
        throw std::invalid_argument("FracApproxConfig: order must be >= 1");
    }
}

void SimOptions::validate() const {
    frac.validate();
    if (!(dt > 0.0) || !(horizon >= 10.0 * dt)) {
        throw std::invalid_argument("SimOptions: require dt > 0 and horizon >= 10 dt");
    }
    if (!(step_time >= 0.0)) {
        throw std::invalid_argument("SimOptions: step_time must be nonnegative");
    }
}

void CostWeights::validate() const {
    if (!(w1 >= 0.0) || !(w2 >= 0.0) || (w1 == 0.0 && w2 == 0.0)) {
        throw std::invalid_argument("CostWeights: weights must be nonnegative and not both zero");
    }
}

DelayTF Zpk::to_tf() const {
    Polynomial num{gain};
    Polynomial den{1.0};
    for (double z : zeros) num = num * Polynomial{1.0, z};
    for (double p : poles) den = den * Polynomial{1.0, p};
    if (integrators > 0) den = den * Polynomial{1.0, 0.0}.pow(integrators);
    if (integrators < 0) num = num * Polynomial{1.0, 0.0}.pow(-integrators);
    return DelayTF(num, den);
}

Zpk oustaloup_zpk(double exponent, const FracApproxConfig& cfg) {
    cfg.validate();
    if (!(std::abs(exponent) < 2.0)) {
        throw std::domain_error("oustaloup: exponent magnitude must be below 2");
    }
    Zpk z;
    double frac = exponent;
    if (exponent >= 1.0) {
        z.integrators = -1;
        frac = exponent - 1.0;
    } else if (exponent <= -1.0) {
        z.integrators = 1;
        frac = exponent + 1.0;
    }
    if (frac == 0.0) {
        return z;
    }
    const int n = cfg.order;
    const double span = cfg.omega_high / cfg.omega_low;
    const double sections = 2.0 * n + 1.0;
    z.gain = std::pow(cfg.omega_high, frac);
    for (int k = -n; k <= n; ++k) {
        z.zeros.push_back(cfg.omega_low * std::pow(span, (k + n + 0.5 * (1.0 - frac)) / sections));
        z.poles.push_back(cfg.omega_low * std::pow(span, (k + n + 0.5 * (1.0 + frac)) / sections));
    }
    return z;
}

DelayTF oustaloup(double exponent, const FracApproxConfig& cfg) { return oustaloup_zpk(exponent, cfg).to_tf(); }

namespace {

Zpk integral_term(const ControllerParams& c, const FracApproxConfig& cfg) {
    if (c.lambda == 2.0) {
        Zpk z;
        z.integrators = 2;
        z.gain = c.Ki;
        return z;
    }
    Zpk z = oustaloup_zpk(-c.lambda, cfg);
    z.gain *= c.Ki;
    return z;
}

// Kd s^mu (N / (s + N))^ceil(mu)
Zpk derivative_term(const ControllerParams& c, const FracApproxConfig& cfg) {
    Zpk z;
    if (c.mu == 2.0) {
        z.integrators = -2;
    } else {
        z = oustaloup_zpk(c.mu, cfg);
    }
    const double N = cfg.derivative_filter();
    const int filters = static_cast<int>(std::ceil(c.mu));
    for (int i = 0; i < filters; ++i) {
        z.poles.push_back(N);
        z.gain *= N;
    }
    z.gain *= c.Kd;
    return z;
}

StateSpace first_order_section(double zero, double pole, bool has_zero) {
    StateSpace g;
    g.A = Eigen::MatrixXd::Constant(1, 1, -pole);
    g.B = Eigen::VectorXd::Constant(1, 1.0);
    g.C = Eigen::RowVectorXd::Constant(1, has_zero ? zero - pole : 1.0);
    g.D = has_zero ? 1.0 : 0.0;
    return g;
}

// Cascade of first-order sections; well conditioned where a companion form of the
// expanded ladder polynomial is not.
StateSpace realize_zpk(const Zpk& z) {
    std::vector<double> num = z.zeros;
    std::vector<double> den = z.poles;
    for (int i = 0; i < -z.integrators; ++i) num.push_back(0.0);
    for (int i = 0; i < z.integrators; ++i) den.push_back(0.0);
    if (num.size() > den.size()) {
        throw std::invalid_argument("realize_zpk: improper factor list");
    }
    StateSpace g;
    g.A = Eigen::MatrixXd(0, 0);
    g.B = Eigen::VectorXd(0);
    g.C = Eigen::RowVectorXd(0);
    g.D = 1.0;
    for (std::size_t i = 0; i < den.size(); ++i) {
        const bool paired = i < num.size();
        g = series(g, first_order_section(paired ? num[i] : 0.0, den[i], paired));
    }
    g.C *= z.gain;
    g.D *= z.gain;
    return g;
}

StateSpace gain_block(double k) {
    StateSpace g;
    g.A = Eigen::MatrixXd(0, 0);
    g.B = Eigen::VectorXd(0);
    g.C = Eigen::RowVectorXd(0);
    g.D = k;
    return g;
}

DelayTF add_tf(const DelayTF& a, const DelayTF& b) {
    if (a.den == b.den) {
        return DelayTF(a.num + b.num, a.den);
    }
    return DelayTF(a.num * b.den + b.num * a.den, a.den * b.den);
}

// RK4 amplification polynomial I + Z + Z^2/2 + Z^3/6 + Z^4/24
Eigen::MatrixXd rk4_map(const Eigen::MatrixXd& Z) {
    const Eigen::Index n = Z.rows();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    // Horner form
    Eigen::MatrixXd R = I + Z / 4.0;
    R = I + Z * R / 3.0;
    R = I + Z * R / 2.0;
    R = I + Z * R;
    return R;
}

// Propagator of z' = M z over one sample of length h, using 2^k equal RK4 substeps
// so that the substep stays well inside RK4's stability region.
Eigen::MatrixXd rk4_propagator(const Eigen::MatrixXd& M, double h) {
    const double bound = std::min(M.cwiseAbs().rowwise().sum().maxCoeff(), M.cwiseAbs().colwise().sum().maxCoeff());
    int halvings = 0;
    while (bound * h / std::ldexp(1.0, halvings) > 1.0 && halvings < 40) {
        ++halvings;
    }
    Eigen::MatrixXd P = rk4_map(M * (h / std::ldexp(1.0, halvings)));
    for (int i = 0; i < halvings; ++i) {
        P = P * P;
    }
    return P;
}

}  // namespace

DelayTF controller_tf(const ControllerParams& c, const FracApproxConfig& cfg) {
    c.validate();
    cfg.validate();
    DelayTF total(Polynomial{c.Kp}, Polynomial{1.0});
    if (c.Ki != 0.0) {
        total = add_tf(total, integral_term(c, cfg).to_tf());
    }
    if (c.Kd != 0.0) {
        total = add_tf(total, derivative_term(c, cfg).to_tf());
    }
    return total;
}

double default_horizon(const DelayTF& plant) {
    double residence = plant.delay_s;
    const double d0 = plant.den.coeff_of_power(0);
    const double n0 = plant.num.coeff_of_power(0);
    if (d0 != 0.0 && n0 != 0.0) {
        residence += plant.den.coeff_of_power(1) / d0 - plant.num.coeff_of_power(1) / n0;
    }
    if (!std::isfinite(residence) || residence < 0.0) {
        residence = plant.delay_s;
    }
    return std::max(50.0, 20.0 * residence);
}

SimOptions default_sim_options(const DelayTF& plant) {
    SimOptions o;
    o.horizon = default_horizon(plant);
    o.dt = o.horizon / 20000.0;
    return o;
}

Trajectory simulate_step(const DelayTF& plant, const ControllerParams& c, const SimOptions& opts) {
    c.validate();
    opts.validate();
    if (!plant.is_proper()) {
        throw std::invalid_argument("simulate_step: plant must be proper");
    }

    // error path: Kp + Ki * I(s); derivative path: Kd * D(s)
    StateSpace ge = gain_block(c.Kp);
    if (c.Ki != 0.0) {
        ge = parallel(ge, realize_zpk(integral_term(c, opts.frac)));
    }
    StateSpace gd = gain_block(0.0);
    if (c.Kd != 0.0) {
        gd = realize_zpk(derivative_term(c, opts.frac));
    }
    if (opts.derivative == DerivativeInput::Error) {
        ge = parallel(ge, gd);
        gd = gain_block(0.0);
    }
    const StateSpace gp = realize(DelayTF(plant.num, plant.den));

    const int ne = ge.order();
    const int nd = gd.order();
    const int np = gp.order();
    const int n = ne + nd + np;
    const int ir = n;      // reference column
    const int iw = n + 1;  // delayed plant input column
    const int is = n + 2;  // slope of the delayed input

    const double h = opts.dt;
    const auto steps = static_cast<long>(std::llround(opts.horizon / h));
    const auto delay_steps = static_cast<long>(std::llround(plant.delay_s / h));
    const bool buffered = delay_steps >= 1;
    const auto step_index = static_cast<long>(std::llround(opts.step_time / h));

    // Output rows over v = [x; r; w]
    Eigen::RowVectorXd Ry = Eigen::RowVectorXd::Zero(n + 2);
    Eigen::RowVectorXd Ru = Eigen::RowVectorXd::Zero(n + 2);
    // u without its y-dependence: Ce xe - Cd xd + De r
    Eigen::RowVectorXd u_base = Eigen::RowVectorXd::Zero(n + 2);
    u_base.segment(0, ne) = ge.C;
    u_base.segment(ne, nd) = -gd.C;
    u_base(ir) = ge.D;
    const double g = ge.D + gd.D;  // total feedthrough from y into -u
    Eigen::RowVectorXd Cp_row = Eigen::RowVectorXd::Zero(n + 2);
    Cp_row.segment(ne + nd, np) = gp.C;
    if (buffered) {
        Ry = Cp_row;
        Ry(iw) += gp.D;
        Ru = u_base - g * Ry;
    } else {
        const double denom = 1.0 + g * gp.D;
        if (std::abs(denom) < 1e-12) {
            throw std::domain_error("simulate_step: ill-posed algebraic loop");
        }
        Ru = (u_base - g * Cp_row) / denom;
        Ry = Cp_row + gp.D * Ru;
    }
    Eigen::RowVectorXd Re = -Ry;
    Re(ir) += 1.0;

    // Augmented generator over z = [x; r; w; w_slope]
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + 3, n + 3);
    if (ne > 0) {
        M.block(0, 0, ne, ne) = ge.A;
        M.block(0, 0, ne, n + 2) += ge.B * Re;
    }
    if (nd > 0) {
        M.block(ne, ne, nd, nd) = gd.A;
        M.block(ne, 0, nd, n + 2) += gd.B * Ry;
    }
    if (np > 0) {
        M.block(ne + nd, ne + nd, np, np) = gp.A;
        if (buffered) {
            M.block(ne + nd, iw, np, 1) += gp.B;
        } else {
            M.block(ne + nd, 0, np, n + 2) += gp.B * Ru;
        }
    }
    M(iw, is) = 1.0;

    const Eigen::MatrixXd P = rk4_propagator(M, h);
    const Eigen::MatrixXd Px = P.topLeftCorner(n, n);
    const Eigen::VectorXd pr = P.block(0, ir, n, 1);
    const Eigen::VectorXd pw = P.block(0, iw, n, 1);
    const Eigen::VectorXd ps = P.block(0, is, n, 1);

    Trajectory traj;
    traj.dt = h;
    const auto count = static_cast<std::size_t>(steps + 1);
    traj.t.reserve(count);
    traj.y.reserve(count);
    traj.u.reserve(count);
    traj.e.reserve(count);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd x_next(n);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n + 2);
    double u_before_step = 0.0;  // u(t_s^-) at the reference discontinuity

    // left and right limits of the delayed input over [t_k, t_{k+1}]
    auto delayed = [&](long k, bool right) -> double {
        const long j = k - delay_steps + (right ? 1 : 0);
        if (k - delay_steps < 0) return 0.0;
        if (right && j == step_index) return u_before_step;
        return traj.u[static_cast<std::size_t>(j)];
    };

    for (long k = 0; k <= steps; ++k) {
        const double r = k >= step_index ? 1.0 : 0.0;
        const double w_left = buffered ? delayed(k, false) : 0.0;
        v.head(n) = x;
        v(ir) = r;
        v(iw) = w_left;
        if (buffered && k == step_index) {
            v(ir) = 0.0;
            u_before_step = Ru.dot(v);
            v(ir) = r;
        }
        const double y = Ry.dot(v);
        const double u = Ru.dot(v);
        const double e = Re.dot(v);
        if (!std::isfinite(y) || !std::isfinite(u) || std::abs(y) > opts.divergence_limit ||
            std::abs(u) > opts.divergence_limit) {
            traj.unstable = true;
            break;
        }
        traj.t.push_back(static_cast<double>(k) * h);
        traj.y.push_back(y);
        traj.u.push_back(u);
        traj.e.push_back(e);
        if (k == steps) {
            break;
        }
        double slope = 0.0;
        if (buffered) {
            slope = delayed(k, true) - w_left;
        }
        x_next.noalias() = Px * x;
        x_next += pr * r + pw * w_left + ps * slope;
        x.swap(x_next);
    }
    return traj;
}

std::vector<double> simulate_open_loop(const StateSpace& g, std::span<const double> input, double dt) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("simulate_open_loop: dt must be positive");
    }
    const int n = g.order();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + 2, n + 2);
    M.topLeftCorner(n, n) = g.A;
    M.block(0, n, n, 1) = g.B;
    M(n, n + 1) = 1.0;
    const Eigen::MatrixXd P = rk4_propagator(M, dt);
    const Eigen::MatrixXd Px = P.topLeftCorner(n, n);
    const Eigen::VectorXd pw = P.block(0, n, n, 1);
    const Eigen::VectorXd ps = P.block(0, n + 1, n, 1);

    std::vector<double> out(input.size());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < input.size(); ++k) {
        out[k] = g.C.dot(x) + g.D * input[k];
        if (k + 1 < input.size()) {
            x = Px * x + pw * input[k] + ps * (input[k + 1] - input[k]);
        }
    }
    return out;
}

double cost_j(const Trajectory& traj, const CostWeights& w) {
    w.validate();
    double acc = 0.0;
    auto integrand = [&](std::size_t k) { return w.w1 * traj.t[k] * std::abs(traj.e[k]) + w.w2 * traj.u[k] * traj.u[k]; };
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
        acc += 0.5 * (traj.t[k + 1] - traj.t[k]) * (integrand(k) + integrand(k + 1));
    }
    return acc;
}

double closed_loop_cost(const DelayTF& plant, const ControllerParams& c, const SimOptions& opts, const CostWeights& w) {
    const Trajectory traj = simulate_step(plant, c, opts);
    if (traj.unstable) {
        return kUnstablePenalty;
    }
    const double j = cost_j(traj, w);
    return std::isfinite(j) ? std::min(j, kUnstablePenalty) : kUnstablePenalty;
}

}  // namespace nyqtune::fracsim
