#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

namespace nyqtune {

/// Real polynomial with coefficients stored highest degree first.
/// Leading zeros are stripped on construction; the zero polynomial is {0}.
class Polynomial {
public:
    Polynomial();
    explicit Polynomial(std::vector<double> coeffs);
    Polynomial(std::initializer_list<double> coeffs);

    static Polynomial constant(double c);
    /// Product of (s - r) over the given real roots.
    static Polynomial from_roots(const std::vector<double>& roots);

    const std::vector<double>& coeffs() const { return coeffs_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const;
    double leading() const { return coeffs_.front(); }
    /// Coefficient of s^k (0 when k exceeds the degree).
    double coeff_of_power(int k) const;

    double operator()(double s) const;
    std::complex<double> operator()(std::complex<double> s) const;

    /// p(-s)
    Polynomial mirrored() const;
    Polynomial derivative() const;
    Polynomial pow(int n) const;

    /// Roots via eigenvalues of the companion matrix.
    std::vector<std::complex<double>> roots() const;

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(double k, const Polynomial& p);
    friend bool operator==(const Polynomial& a, const Polynomial& b) = default;

private:
    void normalize();
    std::vector<double> coeffs_;
};

}  // namespace nyqtune
