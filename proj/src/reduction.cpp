#include "nyqtune/reduction.hpp"

#include "nyqtune/state_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nyqtune::reduction {

FrequencyGrid FrequencyGrid::log_spaced(double lo, double hi, int count, GridUnit unit) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) {
        throw std::invalid_argument("FrequencyGrid: require 0 < lo < hi and count >= 2");
    }
    FrequencyGrid g;
    g.unit = unit;
    g.points.resize(static_cast<std::size_t>(count));
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (int k = 0; k < count; ++k) {
        g.points[static_cast<std::size_t>(k)] = std::pow(10.0, a + (b - a) * k / (count - 1));
    }
    g.points.front() = lo;
    g.points.back() = hi;
    return g;
}

double FrequencyGrid::omega(std::size_t k) const {
    return unit == GridUnit::Hz ? 2.0 * std::numbers::pi * points[k] : points[k];
}

std::vector<double> FrequencyGrid::omegas() const {
    std::vector<double> out(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) {
        out[k] = omega(k);
    }
    return out;
}

FrequencyGrid default_grid(GridUnit unit) { return FrequencyGrid::log_spaced(1e-4, 1e4, 500, unit); }

void ReductionObjective::validate() const {
    if (!(w1 >= 0.0) || !(w2 >= 0.0) || (w1 == 0.0 && w2 == 0.0)) {
        throw std::invalid_argument("ReductionObjective: weights must be nonnegative and not both zero");
    }
    if (kind == ObjectiveKind::Nyquist && grid.points.empty()) {
        throw std::invalid_argument("ReductionObjective: empty frequency grid");
    }
}

std::vector<std::complex<double>> grid_response(const DelayTF& p, const ReductionObjective& obj) {
    const DelayTF sys = obj.delay == DelayRealization::Pade ? rationalize(p) : p;
    std::vector<std::complex<double>> out(obj.grid.points.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = freq_response(sys, obj.grid.omega(k));
    }
    return out;
}

double nyquist_distance(std::span<const std::complex<double>> p, std::span<const std::complex<double>> q,
                        const ReductionObjective& obj) {
    if (p.size() != q.size() || p.empty()) {
        throw std::invalid_argument("nyquist_distance: response vectors differ in length");
    }
    double re2 = 0.0;
    double im2 = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const std::complex<double> d = p[k] - q[k];
        re2 += d.real() * d.real();
        im2 += d.imag() * d.imag();
    }
    double re = std::sqrt(re2);
    double im = std::sqrt(im2);
    if (obj.norm == NormKind::Rms) {
        const double n = std::sqrt(static_cast<double>(p.size()));
        re /= n;
        im /= n;
    }
    return obj.w1 * re + obj.w2 * im;
}

double j_nyquist(const DelayTF& p, const DelayTF& q, const ReductionObjective& obj) {
    obj.validate();
    const auto rp = grid_response(p, obj);
    const auto rq = grid_response(q, obj);
    return nyquist_distance(rp, rq, obj);
}

double j_h2(const DelayTF& p, const DelayTF& q) {
    if (p == q) {
        return 0.0;
    }
    const DelayTF pr = rationalize(p);
    const DelayTF qr = rationalize(q);
    if (!pr.is_strictly_proper() || !qr.is_strictly_proper()) {
        // Feedthrough terms must cancel for a finite H2 norm.
        const double dp = pr.is_strictly_proper() ? 0.0 : pr.num.coeff_of_power(pr.den.degree()) / pr.den.leading();
        const double dq = qr.is_strictly_proper() ? 0.0 : qr.num.coeff_of_power(qr.den.degree()) / qr.den.leading();
        if (std::abs(dp - dq) > 1e-12 * std::max(1.0, std::abs(dp))) {
            throw std::domain_error("j_h2: error system is not strictly proper");
        }
    }
    StateSpace err = parallel(realize(pr), realize(qr), -1.0);
    err.D = 0.0;
    return h2_norm(err);
}

namespace {

ReducedModel decode(std::span<const double> x, ModelKind tmpl) {
    ReducedModel m;
    m.kind = tmpl;
    m.K = x[0];
    if (tmpl == ModelKind::FOPTD) {
        m.tau_max = m.tau_min = x[1];
        m.L = x[2];
    } else {
        m.tau_max = std::max(x[1], x[2]);
        m.tau_min = std::min(x[1], x[2]);
        m.L = x[3];
    }
    return m;
}

}  // namespace

double evaluate_objective(const DelayTF& plant, const ReducedModel& model, const ReductionObjective& obj) {
    model.validate();
    if (obj.kind == ObjectiveKind::H2) {
        return j_h2(plant, model.to_tf());
    }
    return j_nyquist(plant, model.to_tf(), obj);
}

ReductionResult reduce(const DelayTF& p, ModelKind tmpl, const ReductionObjective& obj, const evo::GaConfig& ga,
                       const ReductionBox& box) {
    obj.validate();
    if (!is_stable(p)) {
        throw std::invalid_argument("reduce: plant is not stable");
    }
    evo::SearchSpace space;
    if (tmpl == ModelKind::FOPTD) {
        space.lower = {box.K_lo, box.tau_lo, box.L_lo};
        space.upper = {box.K_hi, box.tau_hi, box.L_hi};
    } else {
        space.lower = {box.K_lo, box.tau_lo, box.tau_lo, box.L_lo};
        space.upper = {box.K_hi, box.tau_hi, box.tau_hi, box.L_hi};
    }

    std::vector<std::complex<double>> plant_response;
    if (obj.kind == ObjectiveKind::Nyquist) {
        plant_response = grid_response(p, obj);
    }

    auto score = [&](const ReducedModel& m) -> double {
        try {
            m.validate();
            if (obj.kind == ObjectiveKind::H2) {
                return j_h2(p, m.to_tf());
            }
            const auto rq = grid_response(m.to_tf(), obj);
            return nyquist_distance(plant_response, rq, obj);
        } catch (const std::exception&) {
            return kPenalty;
        }
    };
    auto objective = [&](std::span<const double> x) {
        const double v = score(decode(x, tmpl));
        return std::isfinite(v) ? v : kPenalty;
    };

    const evo::GaResult ga_result = evo::minimize(objective, space, ga);
    ReductionResult out;
    out.model = decode(ga_result.best_x, tmpl);
    out.j_value = ga_result.best_f;
    if (!(out.j_value < kPenalty)) {
        throw std::runtime_error("reduce: no candidate produced a finite objective");
    }
    out.evaluations = ga_result.evaluations;
    out.seed = ga.seed;
    out.objective = obj.kind;
    return out;
}

ObjectiveComparison compare_objectives(const DelayTF& p, const evo::GaConfig& ga, const ReductionObjective& nyquist) {
    ReductionObjective h2 = nyquist;
    h2.kind = ObjectiveKind::H2;

    ObjectiveComparison cmp;
    cmp.nyquist_foptd = reduce(p, ModelKind::FOPTD, nyquist, ga);
    cmp.nyquist_soptd = reduce(p, ModelKind::SOPTD, nyquist, ga);
    cmp.h2_foptd = reduce(p, ModelKind::FOPTD, h2, ga);
    cmp.h2_soptd = reduce(p, ModelKind::SOPTD, h2, ga);

    auto jn = [&](const ReductionResult& r) { return j_nyquist(p, r.model.to_tf(), nyquist); };
    auto jh = [&](const ReductionResult& r) { return j_h2(p, r.model.to_tf()); };
    cmp.jn_nyquist_foptd = jn(cmp.nyquist_foptd);
    cmp.jn_nyquist_soptd = jn(cmp.nyquist_soptd);
    cmp.jn_h2_foptd = jn(cmp.h2_foptd);
    cmp.jn_h2_soptd = jn(cmp.h2_soptd);
    cmp.jh_nyquist_foptd = jh(cmp.nyquist_foptd);
    cmp.jh_nyquist_soptd = jh(cmp.nyquist_soptd);
    cmp.jh_h2_foptd = jh(cmp.h2_foptd);
    cmp.jh_h2_soptd = jh(cmp.h2_soptd);

    const std::vector<double> omega = nyquist.grid.omegas();
    const auto original = grid_response(p, nyquist);
    cmp.curves.push_back({"original", omega, original});
    const std::pair<const char*, const ReductionResult*> models[] = {
        {"nyquist_foptd", &cmp.nyquist_foptd},
        {"nyquist_soptd", &cmp.nyquist_soptd},
        {"h2_foptd", &cmp.h2_foptd},
        {"h2_soptd", &cmp.h2_soptd},
    };
    for (const auto& [label, r] : models) {
        cmp.curves.push_back({label, omega, grid_response(r->model.to_tf(), nyquist)});
    }
    return cmp;
}

const std::vector<PublishedRow>& published_table() {
    static const std::vector<PublishedRow> rows = [] {
        struct Raw {
            PlantClass c;
            double param, j, tmax, tmin, L;
        };
        const Raw raw[] = {
            {PlantClass::P1, 3, 0.35763, 1.335035, 1.296596, 0.458524},
            {PlantClass::P1, 4, 0.534457, 1.586542, 1.548473, 1.03317},
            {PlantClass::P1, 5, 0.643986, 1.797635, 1.770904, 1.666146},
            {PlantClass::P1, 6, 0.720594, 1.989875, 1.959647, 2.344943},
            {PlantClass::P1, 7, 0.779376, 2.163055, 2.14323, 3.051016},
            {PlantClass::P1, 8, 0.82832, 2.310304, 2.310215, 3.782639},
            {PlantClass::P1, 10, 0.91604, 2.661457, 2.549809, 5.293009},
            {PlantClass::P1, 20, 2.504335, 5.451683, 5.397813, 9.999728},
            {PlantClass::P2, 0.1, 0.004308, 0.999772, 0.100915, 0.010279},
            {PlantClass::P2, 0.2, 0.028107, 0.992451, 0.214076, 0.038794},
            {PlantClass::P2, 0.3, 0.060572, 0.979505, 0.341498, 0.092874},
            {PlantClass::P2, 0.4, 0.107937, 0.943464, 0.51063, 0.167586},
            {PlantClass::P2, 0.5, 0.173435, 0.833884, 0.778235, 0.270018},
            {PlantClass::P2, 0.6, 0.292888, 0.919789, 0.886179, 0.409777},
            {PlantClass::P2, 0.7, 0.400586, 1.026115, 1.021073, 0.559864},
            {PlantClass::P2, 0.8, 0.480812, 1.233382, 1.10547, 0.720248},
            {PlantClass::P2, 0.9, 0.521566, 1.371358, 1.331686, 0.879882},
            {PlantClass::P3, 0.005, 0.003451, 1.000027, 0.007301, 0.00276},
            {PlantClass::P3, 0.01, 0.006693, 0.999721, 0.014931, 0.005228},
            {PlantClass::P3, 0.02, 0.013254, 0.999557, 0.030272, 0.010203},
            {PlantClass::P3, 0.05, 0.031173, 0.997605, 0.075538, 0.026398},
            {PlantClass::P3, 0.1, 0.05823, 0.989257, 0.157307, 0.050227},
            {PlantClass::P3, 0.2, 0.100513, 0.963887, 0.337572, 0.09348},
            {PlantClass::P3, 0.5, 0.243507, 0.911085, 0.868222, 0.253221},
            {PlantClass::P3, 2, 0.274858, 2.285902, 2.162089, 0.662506},
            {PlantClass::P3, 5, 0.105979, 5.271248, 4.954549, 0.85439},
            {PlantClass::P3, 10, 0.048469, 9.999702, 9.998882, 0.98878},
            {PlantClass::P4, 0.1, 0.350007, 1.321307, 1.304839, 0.562264},
            {PlantClass::P4, 0.2, 0.334032, 1.317905, 1.293675, 0.66746},
            {PlantClass::P4, 0.3, 0.332085, 1.393695, 1.197571, 0.773718},
            {PlantClass::P4, 0.4, 0.351824, 1.334063, 1.234247, 0.873208},
            {PlantClass::P4, 0.5, 0.423653, 1.298311, 1.242496, 0.968798},
            {PlantClass::P4, 0.6, 0.542731, 1.25362, 1.252805, 1.064005},
            {PlantClass::P4, 0.7, 0.698068, 1.241163, 1.240979, 1.150465},
            {PlantClass::P4, 0.8, 0.881815, 1.293128, 1.161037, 1.234179},
            {PlantClass::P4, 0.9, 1.085803, 1.28306, 1.138877, 1.308246},
            {PlantClass::P4, 1.0, 1.307159, 1.298524, 1.09749, 1.387555},
            {PlantClass::P4, 1.1, 1.542905, 1.312971, 1.053957, 1.459166},
        };
        std::vector<PublishedRow> out;
        for (const Raw& r : raw) {
            out.push_back({{r.c, r.param}, r.j, ReducedModel::soptd(1.0, r.tmax, r.tmin, r.L)});
        }
        return out;
    }();
    return rows;
}

std::vector<double> table_relative_errors(const ReductionObjective& obj) {
    std::vector<double> out;
    for (const PublishedRow& row : published_table()) {
        const double j = j_nyquist(make_testbench(row.spec), row.model.to_tf(), obj);
        out.push_back(std::abs(j - row.j_min) / row.j_min);
    }
    return out;
}

std::vector<CalibrationEntry> calibrate_objective() {
    std::vector<CalibrationEntry> entries;
    for (GridUnit unit : {GridUnit::RadPerSec, GridUnit::Hz}) {
        for (double w : {1.0, 0.5}) {
            for (NormKind norm : {NormKind::Length, NormKind::Rms}) {
                for (DelayRealization delay : {DelayRealization::Pade, DelayRealization::Exact}) {
                    ReductionObjective obj;
                    obj.grid = default_grid(unit);
                    obj.w1 = obj.w2 = w;
                    obj.norm = norm;
                    obj.delay = delay;
                    std::vector<double> rel = table_relative_errors(obj);
                    const int within = static_cast<int>(std::count_if(rel.begin(), rel.end(), [](double r) { return r <= 0.10; }));
                    const double max_rel = *std::max_element(rel.begin(), rel.end());
                    std::sort(rel.begin(), rel.end());
                    const std::size_t n = rel.size();
                    const double median = n % 2 ? rel[n / 2] : 0.5 * (rel[n / 2 - 1] + rel[n / 2]);
                    entries.push_back({unit, w, norm, delay, median, max_rel, within});
                }
            }
        }
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const CalibrationEntry& a, const CalibrationEntry& b) { return a.median_rel_error < b.median_rel_error; });
    return entries;
}

std::string to_string(GridUnit u) { return u == GridUnit::Hz ? "hz" : "rad"; }
std::string to_string(NormKind n) { return n == NormKind::Rms ? "rms" : "length"; }
std::string to_string(DelayRealization d) { return d == DelayRealization::Exact ? "exact" : "pade"; }
std::string to_string(ObjectiveKind k) { return k == ObjectiveKind::H2 ? "h2" : "nyquist"; }

GridUnit parse_grid_unit(const std::string& s) {
    if (s == "hz") return GridUnit::Hz;
    if (s == "rad") return GridUnit::RadPerSec;
    throw std::invalid_argument("grid unit must be hz or rad");
}

NormKind parse_norm(const std::string& s) {
    if (s == "length") return NormKind::Length;
    if (s == "rms") return NormKind::Rms;
    throw std::invalid_argument("norm must be length or rms");
}

DelayRealization parse_delay_realization(const std::string& s) {
    if (s == "pade") return DelayRealization::Pade;
    if (s == "exact") return DelayRealization::Exact;
    throw std::invalid_argument("delay realization must be pade or exact");
}

ObjectiveKind parse_objective_kind(const std::string& s) {
    if (s == "nyquist") return ObjectiveKind::Nyquist;
    if (s == "h2") return ObjectiveKind::H2;
    throw std::invalid_argument("objective must be nyquist or h2");
}

}  // namespace nyqtune::reduction
