#pragma once

#include "nyqtune/lti.hpp"

#include <Eigen/Dense>

namespace nyqtune {

/// Continuous-time SISO realization  x' = A x + B u,  y = C x + D u.
struct StateSpace {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;
    double D = 0.0;

    int order() const { return static_cast<int>(A.rows()); }
};

/// Controllable canonical realization of the rational part (delay ignored).
/// Throws std::invalid_argument for improper transfer functions.
StateSpace realize(const DelayTF& p);

/// Realization of g1 + sign * g2 with block-diagonal dynamics.
StateSpace parallel(const StateSpace& g1, const StateSpace& g2, double sign = 1.0);

/// Series connection: output of first drives second.
StateSpace series(const StateSpace& first, const StateSpace& second);

/// Solves A X + X A^T + Q = 0 via complex Schur decomposition (Bartels-Stewart).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q);

/// H2 norm from the controllability Gramian; requires D == 0 and A Hurwitz.
double h2_norm(const StateSpace& g);

}  // namespace nyqtune
