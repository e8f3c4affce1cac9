#pragma once

#include "nyqtune/polynomial.hpp"

#include <complex>
#include <string>
#include <vector>

namespace nyqtune {

/// Rational SISO transfer function with an input/output dead time.
///   P(s) = num(s) / den(s) * exp(-delay_s * s)
struct DelayTF {
    Polynomial num{1.0};
    Polynomial den{1.0};
    double delay_s = 0.0;

    DelayTF() = default;
    DelayTF(Polynomial num, Polynomial den, double delay_s = 0.0);

    bool is_proper() const { return num.degree() <= den.degree(); }
    bool is_strictly_proper() const { return num.is_zero() || num.degree() < den.degree(); }
    double dc_gain() const;

    friend bool operator==(const DelayTF&, const DelayTF&) = default;
};

enum class ModelKind { FOPTD, SOPTD };

/// FOPTD: K e^{-Ls} / (tau_max s + 1)
/// SOPTD: K e^{-Ls} / ((tau_max s + 1)(tau_min s + 1))
struct ReducedModel {
    ModelKind kind = ModelKind::SOPTD;
    double K = 1.0;
    double tau_max = 1.0;
    double tau_min = 1.0;  // unused for FOPTD
    double L = 0.0;

    static ReducedModel foptd(double K, double tau, double L);
    static ReducedModel soptd(double K, double tau_a, double tau_b, double L);

    /// Throws std::invalid_argument when K <= 0, tau <= 0, L < 0 or tau_max < tau_min.
    void validate() const;
    DelayTF to_tf() const;

    friend bool operator==(const ReducedModel&, const ReducedModel&) = default;
};

enum class PlantClass { P1, P2, P3, P4 };

struct TestbenchSpec {
    PlantClass class_id = PlantClass::P1;
    double parameter = 3.0;

    bool in_catalog() const;
    std::string label() const;  // e.g. "P1:3", "P2:0.5"

    friend bool operator==(const TestbenchSpec&, const TestbenchSpec&) = default;
};

std::string to_string(PlantClass c);
std::string to_string(ModelKind k);
PlantClass parse_plant_class(const std::string& s);
ModelKind parse_model_kind(const std::string& s);
/// Parses "P1:3", "P2:0.5", ...
TestbenchSpec parse_testbench(const std::string& s);

/// Published parameter lists of the four test-bench classes, 8 + 9 + 10 + 11 entries.
const std::vector<TestbenchSpec>& catalog();

/// Third-order Pade all-pass: D(-s)/D(s) with D(s) = L^3 s^3 + 12 L^2 s^2 + 60 L s + 120.
DelayTF pade3(double L);

/// Replaces the dead time with pade3 and multiplies the polynomials out.
DelayTF rationalize(const DelayTF& p);

/// N(jw)/D(jw) e^{-jwL}. Throws std::domain_error if D(jw) == 0.
std::complex<double> freq_response(const DelayTF& p, double omega);

DelayTF make_testbench(const TestbenchSpec& spec);

/// True iff every pole has real part < -1e-9. Dead time is ignored.
bool is_stable(const DelayTF& p);

}  // namespace nyqtune
