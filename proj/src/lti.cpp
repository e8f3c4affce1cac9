#include "nyqtune/lti.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nyqtune {

namespace {

constexpr double kStabilityMargin = 1e-9;

const std::vector<double> kP1Orders{3, 4, 5, 6, 7, 8, 10, 20};
const std::vector<double> kP2Alphas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
const std::vector<double> kP3Ts{0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 2, 5, 10};
const std::vector<double> kP4Alphas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1};

const std::vector<double>& published_values(PlantClass c) {
    switch (c) {
        case PlantClass::P1: return kP1Orders;
        case PlantClass::P2: return kP2Alphas;
        case PlantClass::P3: return kP3Ts;
        case PlantClass::P4: return kP4Alphas;
    }
    throw std::logic_error("unknown plant class");
}

// (1 + t s)
Polynomial lag(double t) { return Polynomial{t, 1.0}; }

}  // namespace

DelayTF::DelayTF(Polynomial n, Polynomial d, double delay) : num(std::move(n)), den(std::move(d)), delay_s(delay) {
    if (den.is_zero()) {
        throw std::invalid_argument("DelayTF: denominator is the zero polynomial");
    }
    if (!(delay_s >= 0.0) || !std::isfinite(delay_s)) {
        throw std::invalid_argument("DelayTF: delay must be finite and nonnegative");
    }
}

double DelayTF::dc_gain() const {
    const double d0 = den.coeff_of_power(0);
    if (d0 == 0.0) {
        throw std::domain_error("DelayTF::dc_gain: pole at s = 0");
    }
    return num.coeff_of_power(0) / d0;
}

ReducedModel ReducedModel::foptd(double K, double tau, double L) {
    ReducedModel m{ModelKind::FOPTD, K, tau, tau, L};
    m.validate();
    return m;
}

ReducedModel ReducedModel::soptd(double K, double tau_a, double tau_b, double L) {
    ReducedModel m{ModelKind::SOPTD, K, std::max(tau_a, tau_b), std::min(tau_a, tau_b), L};
    m.validate();
    return m;
}

void ReducedModel::validate() const {
    if (!(K > 0.0)) {
        throw std::invalid_argument("ReducedModel: K must be positive");
    }
    if (!(tau_min > 0.0) || !(tau_max >= tau_min)) {
        throw std::invalid_argument("ReducedModel: require tau_max >= tau_min > 0");
    }
    if (!(L >= 0.0)) {
        throw std::invalid_argument("ReducedModel: L must be nonnegative");
    }
}

DelayTF ReducedModel::to_tf() const {
    Polynomial den = lag(tau_max);
    if (kind == ModelKind::SOPTD) {
        den = den * lag(tau_min);
    }
    return DelayTF(Polynomial::constant(K), den, L);
}

bool TestbenchSpec::in_catalog() const {
    const auto& vals = published_values(class_id);
    return std::find(vals.begin(), vals.end(), parameter) != vals.end();
}

std::string TestbenchSpec::label() const {
    std::ostringstream os;
    os << to_string(class_id) << ':' << parameter;
    return os.str();
}

std::string to_string(PlantClass c) {
    switch (c) {
        case PlantClass::P1: return "P1";
        case PlantClass::P2: return "P2";
        case PlantClass::P3: return "P3";
        case PlantClass::P4: return "P4";
    }
    return "?";
}

std::string to_string(ModelKind k) { return k == ModelKind::FOPTD ? "FOPTD" : "SOPTD"; }

PlantClass parse_plant_class(const std::string& s) {
    if (s == "P1" || s == "p1") return PlantClass::P1;
    if (s == "P2" || s == "p2") return PlantClass::P2;
    if (s == "P3" || s == "p3") return PlantClass::P3;
    if (s == "P4" || s == "p4") return PlantClass::P4;
    throw std::invalid_argument("unknown plant class '" + s + "'");
}

ModelKind parse_model_kind(const std::string& s) {
    std::string lower = s;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (lower == "foptd") return ModelKind::FOPTD;
    if (lower == "soptd") return ModelKind::SOPTD;
    throw std::invalid_argument("unknown template '" + s + "'");
}

TestbenchSpec parse_testbench(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) {
        throw std::invalid_argument("bench must look like P1:3, got '" + s + "'");
    }
    TestbenchSpec spec;
    spec.class_id = parse_plant_class(s.substr(0, colon));
    std::size_t used = 0;
    const std::string rest = s.substr(colon + 1);
    try {
        spec.parameter = std::stod(rest, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad bench parameter in '" + s + "'");
    }
    if (used != rest.size()) {
        throw std::invalid_argument("bad bench parameter in '" + s + "'");
    }
    return spec;
}

const std::vector<TestbenchSpec>& catalog() {
    static const std::vector<TestbenchSpec> all = [] {
        std::vector<TestbenchSpec> out;
        for (PlantClass c : {PlantClass::P1, PlantClass::P2, PlantClass::P3, PlantClass::P4}) {
            for (double v : published_values(c)) {
                out.push_back({c, v});
            }
        }
        return out;
    }();
    return all;
}

DelayTF pade3(double L) {
    if (!(L >= 0.0) || !std::isfinite(L)) {
        throw std::domain_error("pade3: delay must be finite and nonnegative");
    }
    if (L == 0.0) {
        return DelayTF(Polynomial{1.0}, Polynomial{1.0});
    }
    const Polynomial den{L * L * L, 12.0 * L * L, 60.0 * L, 120.0};
    return DelayTF(den.mirrored(), den);
}

DelayTF rationalize(const DelayTF& p) {
    if (p.delay_s == 0.0) {
        return DelayTF(p.num, p.den);
    }
    const DelayTF pd = pade3(p.delay_s);
    return DelayTF(p.num * pd.num, p.den * pd.den);
}

std::complex<double> freq_response(const DelayTF& p, double omega) {
    if (!std::isfinite(omega)) {
        throw std::domain_error("freq_response: non-finite frequency");
    }
    const std::complex<double> s{0.0, omega};
    const std::complex<double> d = p.den(s);
    if (d == 0.0) {
        std::ostringstream os;
        os << "freq_response: pole on the imaginary axis at omega = " << omega;
        throw std::domain_error(os.str());
    }
    std::complex<double> value = p.num(s) / d;
    if (p.delay_s != 0.0) {
        value *= std::polar(1.0, -omega * p.delay_s);
    }
    return value;
}

DelayTF make_testbench(const TestbenchSpec& spec) {
    const double v = spec.parameter;
    if (!std::isfinite(v)) {
        throw std::domain_error("make_testbench: non-finite parameter");
    }
    switch (spec.class_id) {
        case PlantClass::P1: {
            if (v != std::floor(v) || v < 1.0) {
                throw std::domain_error("make_testbench: P1 order n must be a positive integer");
            }
            return DelayTF(Polynomial{1.0}, lag(1.0).pow(static_cast<int>(v)));
        }
        case PlantClass::P2: {
            if (!(v > 0.0)) {
                throw std::domain_error("make_testbench: P2 alpha must be positive");
            }
            return DelayTF(Polynomial{1.0}, lag(1.0) * lag(v) * lag(v * v) * lag(v * v * v));
        }
        case PlantClass::P3: {
            if (!(v > 0.0)) {
                throw std::domain_error("make_testbench: P3 T must be positive");
            }
            return DelayTF(Polynomial{1.0}, lag(1.0) * lag(v) * lag(v));
        }
        case PlantClass::P4: {
            if (!(v >= 0.0)) {
                throw std::domain_error("make_testbench: P4 alpha must be nonnegative");
            }
            return DelayTF(Polynomial{-v, 1.0}, lag(1.0).pow(3));
        }
    }
    throw std::logic_error("unknown plant class");
}

bool is_stable(const DelayTF& p) {
    if (p.den.is_zero()) {
        throw std::invalid_argument("is_stable: zero denominator");
    }
    const auto poles = p.den.roots();
    return std::all_of(poles.begin(), poles.end(), [](const auto& r) { return r.real() < -kStabilityMargin; });
}

}  // namespace nyqtune
