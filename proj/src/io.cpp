#include "nyqtune/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nyqtune {

void to_json(json& j, const Polynomial& p) { j = p.coeffs(); }

void from_json(const json& j, Polynomial& p) { p = Polynomial(j.get<std::vector<double>>()); }

void to_json(json& j, const DelayTF& p) { j = json{{"num", p.num}, {"den", p.den}, {"delay_s", p.delay_s}}; }

void from_json(const json& j, DelayTF& p) {
    p = DelayTF(j.at("num").get<Polynomial>(), j.at("den").get<Polynomial>(), j.value("delay_s", 0.0));
}

void to_json(json& j, const ReducedModel& m) {
    j = json{{"kind", to_string(m.kind)}, {"K", m.K}, {"tau_max", m.tau_max}, {"L", m.L}};
    if (m.kind == ModelKind::SOPTD) j["tau_min"] = m.tau_min;
}

void from_json(const json& j, ReducedModel& m) {
    const ModelKind kind = parse_model_kind(j.at("kind").get<std::string>());
    if (kind == ModelKind::FOPTD) {
        m = ReducedModel::foptd(j.at("K").get<double>(), j.at("tau_max").get<double>(), j.at("L").get<double>());
    } else {
        m = ReducedModel::soptd(j.at("K").get<double>(), j.at("tau_max").get<double>(), j.at("tau_min").get<double>(),
                                j.at("L").get<double>());
    }
}

void to_json(json& j, const TestbenchSpec& s) {
    j = json{{"class", to_string(s.class_id)}, {"parameter", s.parameter}, {"label", s.label()}};
}

void from_json(const json& j, TestbenchSpec& s) {
    s.class_id = parse_plant_class(j.at("class").get<std::string>());
    s.parameter = j.at("parameter").get<double>();
}

namespace evo {

void to_json(json& j, const GaConfig& c) {
    j = json{{"population", c.population},         {"generations", c.generations},
             {"crossover_rate", c.crossover_rate}, {"mutation_rate", c.mutation_rate},
             {"elitism", c.elitism},               {"seed", c.seed},
             {"blend_alpha", c.blend_alpha},       {"mutation_scale", c.mutation_scale},
             {"mutation_decay", c.mutation_decay}, {"tournament", c.tournament}};
}

void from_json(const json& j, GaConfig& c) {
    GaConfig d;
    c.population = j.value("population", d.population);
    c.generations = j.value("generations", d.generations);
    c.crossover_rate = j.value("crossover_rate", d.crossover_rate);
    c.mutation_rate = j.value("mutation_rate", d.mutation_rate);
    c.elitism = j.value("elitism", d.elitism);
    c.seed = j.value("seed", d.seed);
    c.blend_alpha = j.value("blend_alpha", d.blend_alpha);
    c.mutation_scale = j.value("mutation_scale", d.mutation_scale);
    c.mutation_decay = j.value("mutation_decay", d.mutation_decay);
    c.tournament = j.value("tournament", d.tournament);
}

}  // namespace evo

namespace reduction {

void to_json(json& j, const ReductionObjective& o) {
    j = json{{"kind", to_string(o.kind)},         {"w1", o.w1},
             {"w2", o.w2},                         {"grid_unit", to_string(o.grid.unit)},
             {"norm", to_string(o.norm)},          {"delay", to_string(o.delay)}};
}

void from_json(const json& j, ReductionObjective& o) {
    o.kind = parse_objective_kind(j.value("kind", to_string(o.kind)));
    o.w1 = j.value("w1", o.w1);
    o.w2 = j.value("w2", o.w2);
    o.grid = default_grid(parse_grid_unit(j.value("grid_unit", to_string(o.grid.unit))));
    o.norm = parse_norm(j.value("norm", to_string(o.norm)));
    o.delay = parse_delay_realization(j.value("delay", to_string(o.delay)));
}

void to_json(json& j, const ReductionResult& r) {
    j = json{{"model", r.model},
             {"j_value", r.j_value},
             {"evaluations", r.evaluations},
             {"seed", r.seed},
             {"objective", to_string(r.objective)}};
}

void from_json(const json& j, ReductionResult& r) {
    r.model = j.at("model").get<ReducedModel>();
    r.j_value = j.at("j_value").get<double>();
    r.evaluations = j.value("evaluations", 0L);
    r.seed = j.value("seed", std::uint64_t{0});
    r.objective = parse_objective_kind(j.value("objective", std::string("nyquist")));
}

}  // namespace reduction

namespace fracsim {

void to_json(json& j, const ControllerParams& c) {
    j = json{{"Kp", c.Kp}, {"Ki", c.Ki}, {"Kd", c.Kd}, {"lambda", c.lambda}, {"mu", c.mu}};
}

void from_json(const json& j, ControllerParams& c) {
    c.Kp = j.at("Kp").get<double>();
    c.Ki = j.at("Ki").get<double>();
    c.Kd = j.at("Kd").get<double>();
    c.lambda = j.value("lambda", 1.0);
    c.mu = j.value("mu", 1.0);
}

}  // namespace fracsim

namespace gp {

void to_json(json& j, const GpConfig& c) {
    std::vector<std::string> fs;
    for (Op op : c.function_set) fs.push_back(op_name(op));
    j = json{{"population", c.population},
             {"tournament", c.tournament},
             {"max_depth", c.max_depth},
             {"max_genes", c.max_genes},
             {"generations", c.generations},
             {"function_set", fs},
             {"seed", c.seed},
             {"init_min_depth", c.init_min_depth},
             {"init_max_depth", c.init_max_depth},
             {"mutation_max_depth", c.mutation_max_depth},
             {"const_min", c.const_min},
             {"const_max", c.const_max},
             {"const_probability", c.const_probability},
             {"crossover_rate", c.crossover_rate},
             {"mutation_rate", c.mutation_rate},
             {"high_level_rate", c.high_level_rate},
             {"elite_fraction", c.elite_fraction},
             {"gene_limit", c.gene_limit}};
}

void from_json(const json& j, GpConfig& c) {
    GpConfig d;
    c.population = j.value("population", d.population);
    c.tournament = j.value("tournament", d.tournament);
    c.max_depth = j.value("max_depth", d.max_depth);
    c.max_genes = j.value("max_genes", d.max_genes);
    c.generations = j.value("generations", d.generations);
    if (j.contains("function_set")) {
        c.function_set.clear();
        for (const auto& s : j.at("function_set")) c.function_set.push_back(parse_op(s.get<std::string>()));
    } else {
        c.function_set = d.function_set;
    }
    c.seed = j.value("seed", d.seed);
    c.init_min_depth = j.value("init_min_depth", d.init_min_depth);
    c.init_max_depth = j.value("init_max_depth", d.init_max_depth);
    c.mutation_max_depth = j.value("mutation_max_depth", d.mutation_max_depth);
    c.const_min = j.value("const_min", d.const_min);
    c.const_max = j.value("const_max", d.const_max);
    c.const_probability = j.value("const_probability", d.const_probability);
    c.crossover_rate = j.value("crossover_rate", d.crossover_rate);
    c.mutation_rate = j.value("mutation_rate", d.mutation_rate);
    c.high_level_rate = j.value("high_level_rate", d.high_level_rate);
    c.elite_fraction = j.value("elite_fraction", d.elite_fraction);
    c.gene_limit = j.value("gene_limit", d.gene_limit);
}

void to_json(json& j, const ParetoPoint& p) {
    const std::vector<std::string> names(tuning::kFeatureNames.begin(), tuning::kFeatureNames.end());
    std::vector<std::string> genes;
    for (const ExprTree& g : p.model.genes) genes.push_back(render(g, names));
    j = json{{"expression_string", p.model.render(names)},
             {"fitness", p.fitness},
             {"complexity", p.complexity},
             {"bias", p.model.bias},
             {"weights", p.model.weights},
             {"genes", genes}};
}

}  // namespace gp

namespace io {

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return json::parse(in);
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    auto line = [&](const std::vector<std::string>& fields) {
        for (std::size_t k = 0; k < fields.size(); ++k) {
            if (k) out << ',';
            out << fields[k];
        }
        out << '\n';
    };
    line(table.header);
    for (const auto& r : table.rows) line(r);
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    CsvTable t;
    std::string text;
    bool first = true;
    while (std::getline(in, text)) {
        if (text.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(text);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (first) {
            t.header = std::move(fields);
            first = false;
        } else {
            t.rows.push_back(std::move(fields));
        }
    }
    return t;
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvTable nyquist_csv(const std::vector<reduction::NyquistCurve>& curves) {
    CsvTable t{{"omega", "re_true", "im_true", "re_model", "im_model", "model_label"}, {}};
    if (curves.empty()) return t;
    const auto& truth = curves.front();
    for (std::size_t c = 1; c < curves.size(); ++c) {
        const auto& m = curves[c];
        for (std::size_t k = 0; k < m.omega.size(); ++k) {
            t.rows.push_back({num(m.omega[k]), num(truth.response[k].real()), num(truth.response[k].imag()),
                              num(m.response[k].real()), num(m.response[k].imag()), m.label});
        }
    }
    return t;
}

CsvTable trajectory_csv(const fracsim::Trajectory& traj) {
    CsvTable t{{"t", "y", "u", "e"}, {}};
    for (std::size_t k = 0; k < traj.size(); ++k) {
        t.rows.push_back({num(traj.t[k]), num(traj.y[k]), num(traj.u[k]), num(traj.e[k])});
    }
    return t;
}

CsvTable comparison_csv(const tuning::RuleComparison& cmp) {
    CsvTable t{{"t", "y_GA", "y_rule", "u_GA", "u_rule"}, {}};
    const auto& a = cmp.traj_optimal;
    const auto& b = cmp.traj_rule;
    const std::size_t n = std::max(a.size(), b.size());
    // a diverged run is truncated; pad with NaN so both columns share the time axis
    auto at = [](const std::vector<double>& v, std::size_t k) {
        return k < v.size() ? num(v[k]) : std::string("nan");
    };
    const auto& time = a.size() >= b.size() ? a.t : b.t;
    for (std::size_t k = 0; k < n; ++k) {
        t.rows.push_back({num(time[k]), at(a.y, k), at(b.y, k), at(a.u, k), at(b.u, k)});
    }
    return t;
}

CsvTable reduction_table_csv(const std::vector<TestbenchSpec>& specs,
                             const std::vector<reduction::ReductionResult>& results) {
    if (specs.size() != results.size()) throw std::invalid_argument("reduction_table_csv: size mismatch");
    CsvTable t{{"class", "parameter", "J_min", "K", "tau_max", "tau_min", "L"}, {}};
    for (std::size_t k = 0; k < specs.size(); ++k) {
        const auto& m = results[k].model;
        t.rows.push_back({to_string(specs[k].class_id), num(specs[k].parameter), num(results[k].j_value), num(m.K),
                          num(m.tau_max), m.kind == ModelKind::SOPTD ? num(m.tau_min) : std::string(""), num(m.L)});
    }
    return t;
}

CsvTable pareto_csv(const std::vector<gp::ParetoPoint>& archive,
                    const std::vector<std::pair<double, std::size_t>>& evaluated) {
    CsvTable t{{"fitness", "complexity", "is_front"}, {}};
    for (const auto& p : archive) t.rows.push_back({num(p.fitness), std::to_string(p.complexity), "1"});
    for (const auto& [f, c] : evaluated) t.rows.push_back({num(f), std::to_string(c), "0"});
    return t;
}

}  // namespace io
}  // namespace nyqtune
