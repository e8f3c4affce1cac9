#include "nyqtune/polynomial.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>

namespace nyqtune {

Polynomial::Polynomial() : coeffs_{0.0} {}

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) { normalize(); }

Polynomial::Polynomial(std::initializer_list<double> coeffs) : coeffs_(coeffs) { normalize(); }

Polynomial Polynomial::constant(double c) { return Polynomial({c}); }

Polynomial Polynomial::from_roots(const std::vector<double>& roots) {
    Polynomial p{1.0};
    for (double r : roots) {
        p = p * Polynomial{1.0, -r};
    }
    return p;
}

void Polynomial::normalize() {
    auto first = std::find_if(coeffs_.begin(), coeffs_.end(), [](double c) { return c != 0.0; });
    if (first == coeffs_.end()) {
        coeffs_.assign(1, 0.0);
        return;
    }
    coeffs_.erase(coeffs_.begin(), first);
}

bool Polynomial::is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }

double Polynomial::coeff_of_power(int k) const {
    if (k < 0 || k > degree()) {
        return 0.0;
    }
    return coeffs_[static_cast<std::size_t>(degree() - k)];
}

double Polynomial::operator()(double s) const {
    double acc = 0.0;
    for (double c : coeffs_) {
        acc = acc * s + c;
    }
    return acc;
}

std::complex<double> Polynomial::operator()(std::complex<double> s) const {
    std::complex<double> acc{0.0, 0.0};
    for (double c : coeffs_) {
        acc = acc * s + c;
    }
    return acc;
}

Polynomial Polynomial::mirrored() const {
    std::vector<double> out = coeffs_;
    const int n = degree();
    for (int i = 0; i <= n; ++i) {
        // coefficient at index i multiplies s^(n-i)
        if ((n - i) % 2 == 1) {
            out[static_cast<std::size_t>(i)] = -out[static_cast<std::size_t>(i)];
        }
    }
    return Polynomial(std::move(out));
}

Polynomial Polynomial::derivative() const {
    const int n = degree();
    if (n == 0) {
        return Polynomial{};
    }
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = coeffs_[static_cast<std::size_t>(i)] * (n - i);
    }
    return Polynomial(std::move(out));
}

Polynomial Polynomial::pow(int n) const {
    if (n < 0) {
        throw std::domain_error("Polynomial::pow: negative exponent");
    }
    Polynomial result{1.0};
    for (int i = 0; i < n; ++i) {
        result = result * *this;
    }
    return result;
}

std::vector<std::complex<double>> Polynomial::roots() const {
    if (is_zero()) {
        throw std::domain_error("roots of the zero polynomial are undefined");
    }
    const int n = degree();
    if (n == 0) {
        return {};
    }
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        companion(0, j) = -coeffs_[static_cast<std::size_t>(j + 1)] / coeffs_[0];
    }
    for (int i = 1; i < n; ++i) {
        companion(i, i - 1) = 1.0;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    const auto& ev = solver.eigenvalues();
    std::vector<std::complex<double>> out(ev.data(), ev.data() + ev.size());
    return out;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    const auto& ca = a.coeffs_;
    const auto& cb = b.coeffs_;
    const std::size_t n = std::max(ca.size(), cb.size());
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < ca.size(); ++i) {
        out[n - ca.size() + i] += ca[i];
    }
    for (std::size_t i = 0; i < cb.size(); ++i) {
        out[n - cb.size() + i] += cb[i];
    }
    return Polynomial(std::move(out));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-1.0) * b; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    const auto& ca = a.coeffs_;
    const auto& cb = b.coeffs_;
    std::vector<double> out(ca.size() + cb.size() - 1, 0.0);
    for (std::size_t i = 0; i < ca.size(); ++i) {
        for (std::size_t j = 0; j < cb.size(); ++j) {
            out[i + j] += ca[i] * cb[j];
        }
    }
    return Polynomial(std::move(out));
}

Polynomial operator*(double k, const Polynomial& p) {
    std::vector<double> out = p.coeffs_;
    for (double& c : out) {
        c *= k;
    }
    return Polynomial(std::move(out));
}

}  // namespace nyqtune
