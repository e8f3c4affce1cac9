#include "nyqtune/state_space.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace nyqtune {

StateSpace realize(const DelayTF& p) {
    if (!p.is_proper()) {
        throw std::invalid_argument("realize: improper transfer function");
    }
    const int n = p.den.degree();
    const double a0 = p.den.leading();
    StateSpace g;
    g.A = Eigen::MatrixXd::Zero(n, n);
    g.B = Eigen::VectorXd::Zero(n);
    g.C = Eigen::RowVectorXd::Zero(n);

    // monic denominator s^n + a_{n-1} s^{n-1} + ... + a_0
    auto a = [&](int k) { return p.den.coeff_of_power(k) / a0; };
    auto b = [&](int k) { return p.num.coeff_of_power(k) / a0; };

    g.D = b(n);
    if (n == 0) {
        return g;
    }
    for (int i = 0; i + 1 < n; ++i) {
        g.A(i, i + 1) = 1.0;
    }
    for (int k = 0; k < n; ++k) {
        g.A(n - 1, k) = -a(k);
        g.C(k) = b(k) - a(k) * g.D;
    }
    g.B(n - 1) = 1.0;
    return g;
}

StateSpace parallel(const StateSpace& g1, const StateSpace& g2, double sign) {
    const int n1 = g1.order();
    const int n2 = g2.order();
    StateSpace g;
    g.A = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
    g.A.topLeftCorner(n1, n1) = g1.A;
    g.A.bottomRightCorner(n2, n2) = g2.A;
    g.B.resize(n1 + n2);
    g.B << g1.B, g2.B;
    g.C.resize(n1 + n2);
    g.C << g1.C, sign * g2.C;
    g.D = g1.D + sign * g2.D;
    return g;
}

StateSpace series(const StateSpace& first, const StateSpace& second) {
    const int n1 = first.order();
    const int n2 = second.order();
    StateSpace g;
    g.A = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
    g.A.topLeftCorner(n1, n1) = first.A;
    g.A.bottomRightCorner(n2, n2) = second.A;
    g.A.bottomLeftCorner(n2, n1) = second.B * first.C;
    g.B.resize(n1 + n2);
    g.B << first.B, second.B * first.D;
    g.C.resize(n1 + n2);
    g.C << second.D * first.C, second.C;
    g.D = second.D * first.D;
    return g;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
    using cd = std::complex<double>;
    const Eigen::Index n = A.rows();
    if (n == 0) {
        return Eigen::MatrixXd(0, 0);
    }
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(A.cast<cd>());
    const Eigen::MatrixXcd& T = schur.matrixT();
    const Eigen::MatrixXcd& U = schur.matrixU();
    // T Y + Y T^H = -U^H Q U
    const Eigen::MatrixXcd F = -(U.adjoint() * Q.cast<cd>() * U);
    Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        for (Eigen::Index j = n - 1; j >= 0; --j) {
            cd rhs = F(i, j);
            for (Eigen::Index k = i + 1; k < n; ++k) {
                rhs -= T(i, k) * Y(k, j);
            }
            for (Eigen::Index k = j + 1; k < n; ++k) {
                rhs -= Y(i, k) * std::conj(T(j, k));
            }
            const cd denom = T(i, i) + std::conj(T(j, j));
            if (std::abs(denom) == 0.0) {
                throw std::domain_error("solve_lyapunov: A has eigenvalues symmetric about the imaginary axis");
            }
            Y(i, j) = rhs / denom;
        }
    }
    const Eigen::MatrixXd X = (U * Y * U.adjoint()).real();
    return 0.5 * (X + X.transpose());
}

double h2_norm(const StateSpace& g) {
    if (g.D != 0.0) {
        throw std::domain_error("h2_norm: system has direct feedthrough, H2 norm is infinite");
    }
    if (g.order() == 0) {
        return 0.0;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(g.A, false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        if (!(es.eigenvalues()[i].real() < 0.0)) {
            throw std::domain_error("h2_norm: system is not stable");
        }
    }
    const Eigen::MatrixXd P = solve_lyapunov(g.A, g.B * g.B.transpose());
    const double sq = (g.C * P * g.C.transpose())(0, 0);
    return std::sqrt(std::max(sq, 0.0));
}

}  // namespace nyqtune
