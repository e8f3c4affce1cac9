#include "nyqtune/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace nyqtune::pipeline {

using tuning::ControllerKind;

std::vector<std::string> param_names(ControllerKind kind) {
    if (kind == ControllerKind::PID) return {"Kp", "Ki", "Kd"};
    return {"Kp", "Ki", "Kd", "lambda", "mu"};
}

gp::RegressionData regression_data(const tuning::RuleDataset& data, ControllerKind kind, std::size_t param) {
    const auto rows = data.complete(kind);
    if (rows.empty()) throw std::runtime_error("regression_data: no completed rows");
    gp::RegressionData rd;
    rd.feature_names.assign(tuning::kFeatureNames.begin(), tuning::kFeatureNames.end());
    rd.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(tuning::kFeatureNames.size()));
    rd.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto ri = static_cast<Eigen::Index>(r);
        for (std::size_t f = 0; f < rows[r]->x.size(); ++f) rd.X(ri, static_cast<Eigen::Index>(f)) = rows[r]->x[f];
        const auto& c = kind == ControllerKind::PID ? *rows[r]->pid : *rows[r]->fopid;
        rd.y(ri) = tuning::encode(c, kind).at(param);
    }
    return rd;
}

fracsim::ControllerParams EvolvedRule::predict(const ReducedModel& m) const {
    const auto x = tuning::features(m);
    std::vector<double> p;
    for (const auto& f : fits) p.push_back(f.best.predict(x));
    return tuning::decode(p, kind);
}

EvolvedRule evolve_rule(const tuning::RuleDataset& data, ControllerKind kind, const gp::GpConfig& cfg) {
    EvolvedRule rule;
    rule.kind = kind;
    const auto names = param_names(kind);
    for (std::size_t k = 0; k < names.size(); ++k) {
        gp::GpConfig c = cfg;
        c.seed = cfg.seed + k;
        rule.fits.push_back(gp::evolve(regression_data(data, kind, k), c));
    }
    return rule;
}

RuleEvaluation evaluate_rule(const EvolvedRule& rule, const tuning::RuleDataset& data) {
    RuleEvaluation ev;
    for (const auto* row : data.complete(rule.kind)) {
        const DelayTF plant = make_testbench(row->spec);
        const auto prob = tuning::TuningProblem::for_plant(plant, rule.kind);
        RuleScore s;
        s.spec = row->spec;
        s.params = tuning::clamp_to_space(rule.predict(row->model), rule.kind);
        s.J_rule = tuning::evaluate(prob, s.params);
        s.J_ga = rule.kind == ControllerKind::PID ? row->J_pid : row->J_fopid;
        ev.mean_J_rule += s.J_rule;
        ev.mean_J_ga += s.J_ga;
        ev.rows.push_back(s);
    }
    if (!ev.rows.empty()) {
        ev.mean_J_rule /= static_cast<double>(ev.rows.size());
        ev.mean_J_ga /= static_cast<double>(ev.rows.size());
    }
    return ev;
}

tuning::DatasetConfig PipelineConfig::default_dataset_config() {
    tuning::DatasetConfig d;
    // closed-loop simulations dominate the run time; tuning uses a smaller GA than reduction
    d.tuning_ga.population = 30;
    d.tuning_ga.generations = 50;
    return d;
}

void PipelineConfig::apply_seed(std::uint64_t s) {
    seed = s;
    dataset.reduction_ga.seed = s;
    dataset.tuning_ga.seed = s;
    gp.seed = s;
}

std::string file_tag(const TestbenchSpec& s) {
    std::string t = s.label();
    std::replace(t.begin(), t.end(), ':', '_');
    return t;
}

namespace {

double final_error(const fracsim::Trajectory& t) {
    return t.e.empty() ? std::numeric_limits<double>::quiet_NaN() : t.e.back();
}

std::vector<std::string> labels(const std::vector<TestbenchSpec>& specs) {
    std::vector<std::string> out;
    for (const auto& s : specs) out.push_back(s.label());
    return out;
}

std::vector<TestbenchSpec> specs_from(const json& j) {
    std::vector<TestbenchSpec> out;
    for (const auto& s : j) out.push_back(parse_testbench(s.get<std::string>()));
    return out;
}

json row_json(const tuning::DatasetRow& r) {
    json j{{"plant", r.spec.label()}, {"spec", r.spec}};
    if (r.reduced) {
        j["model"] = r.model;
        j["j_reduction"] = r.j_reduction;
        json f;
        for (std::size_t k = 0; k < r.x.size(); ++k) f[tuning::kFeatureNames[k]] = r.x[k];
        j["features"] = f;
    }
    if (r.pid) {
        j["pid"] = *r.pid;
        j["J_pid"] = r.J_pid;
    }
    if (r.fopid) {
        j["fopid"] = *r.fopid;
        j["J_fopid"] = r.J_fopid;
    }
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

}  // namespace

json to_json(const PipelineConfig& c) {
    return {{"seed", c.seed},
            {"plants", labels(c.plants)},
            {"representative", labels(c.representative)},
            {"use_published_models", c.dataset.use_published_models},
            {"tune_fopid", c.dataset.tune_fopid},
            {"objective", c.dataset.objective},
            {"reduction_ga", c.dataset.reduction_ga},
            {"tuning_ga", c.dataset.tuning_ga},
            {"gp", c.gp}};
}

PipelineConfig pipeline_config_from_json(const json& j) {
    PipelineConfig c;
    if (j.contains("plants")) c.plants = specs_from(j.at("plants"));
    if (j.contains("representative")) c.representative = specs_from(j.at("representative"));
    c.dataset.use_published_models = j.value("use_published_models", false);
    c.dataset.tune_fopid = j.value("tune_fopid", true);
    if (j.contains("objective")) c.dataset.objective = j.at("objective").get<reduction::ReductionObjective>();
    if (j.contains("reduction_ga")) c.dataset.reduction_ga = j.at("reduction_ga").get<evo::GaConfig>();
    if (j.contains("tuning_ga")) c.dataset.tuning_ga = j.at("tuning_ga").get<evo::GaConfig>();
    if (j.contains("gp")) c.gp = j.at("gp").get<gp::GpConfig>();
    c.seed = j.value("seed", c.seed);
    if (j.contains("seed")) c.apply_seed(c.seed);
    return c;
}

PipelineReport run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    PipelineReport rep;
    auto emit_json = [&](const std::string& name, const json& j) {
        io::write_json(out_dir / name, j);
        rep.outputs.push_back(out_dir / name);
    };
    auto emit_csv = [&](const std::string& name, const io::CsvTable& t) {
        io::write_csv(out_dir / name, t);
        rep.outputs.push_back(out_dir / name);
    };

    const tuning::RuleDataset data = tuning::build_dataset(cfg.plants, cfg.dataset);
    json failures = json::array();
    for (const auto& r : data.rows) {
        if (!r.error.empty()) failures.push_back({{"plant", r.spec.label()}, {"error", r.error}});
    }
    rep.completed = static_cast<int>(data.complete(ControllerKind::PID).size());
    if (rep.completed == 0) {
        throw std::runtime_error("pipeline: no plant completed reduction and tuning");
    }

    io::CsvTable table{{"class", "parameter", "J_min", "K", "tau_max", "tau_min", "L"}, {}};
    json rows = json::array();
    for (const auto& r : data.rows) {
        rows.push_back(row_json(r));
        if (!r.reduced) continue;
        table.rows.push_back({to_string(r.spec.class_id), io::num(r.spec.parameter), io::num(r.j_reduction),
                              io::num(r.model.K), io::num(r.model.tau_max), io::num(r.model.tau_min),
                              io::num(r.model.L)});
    }
    emit_csv("table1_analogue.csv", table);
    emit_json("dataset.json", rows);

    std::vector<ControllerKind> kinds{ControllerKind::PID};
    if (cfg.dataset.tune_fopid && !data.complete(ControllerKind::FOPID).empty()) kinds.push_back(ControllerKind::FOPID);

    json summary{{"seed", cfg.seed}, {"plants_total", data.rows.size()}, {"plants_completed", rep.completed}};
    std::vector<EvolvedRule> evolved;
    for (ControllerKind kind : kinds) {
        const std::string kname = tuning::to_string(kind);
        const auto names = param_names(kind);
        EvolvedRule rule;
        rule.kind = kind;
        json formulas;
        for (std::size_t k = 0; k < names.size(); ++k) {
            gp::GpConfig c = cfg.gp;
            c.seed = cfg.gp.seed + k;
            std::set<std::pair<double, std::size_t>> seen;
            auto observer = [&](int, const std::vector<gp::Individual>& pop, const std::vector<gp::ParetoPoint>&) {
                for (const auto& ind : pop) {
                    if (std::isfinite(ind.fitness)) seen.emplace(ind.fitness, ind.complexity);
                }
            };
            gp::GpResult res = gp::evolve(regression_data(data, kind, k), c, observer);
            const std::string stem = "gp_" + kname + "_" + names[k];
            emit_json(stem + "_archive.json", res.archive);
            emit_csv(stem + "_pareto.csv",
                     io::pareto_csv(res.archive, std::vector<std::pair<double, std::size_t>>(seen.begin(), seen.end())));
            formulas[names[k]] = res.archive.back();
            rule.fits.push_back(std::move(res));
        }
        const RuleEvaluation ev = evaluate_rule(rule, data);
        json per = json::array();
        for (const auto& s : ev.rows) {
            per.push_back({{"plant", s.spec.label()}, {"params", s.params}, {"J_rule", s.J_rule}, {"J_GA", s.J_ga}});
        }
        summary["evolved_" + kname] = {{"formulas", formulas},
                                       {"mean_J_rule", ev.mean_J_rule},
                                       {"mean_J_GA", ev.mean_J_ga},
                                       {"ratio", ev.ratio()},
                                       {"plants", per}};
        evolved.push_back(std::move(rule));
    }

    json reps = json::array();
    for (const auto& spec : cfg.representative) {
        json entry{{"plant", spec.label()}};
        const auto it = std::find_if(data.rows.begin(), data.rows.end(),
                                     [&](const tuning::DatasetRow& r) { return r.spec == spec; });
        if (it == data.rows.end() || !it->pid) {
            entry["error"] = "plant missing from the completed dataset";
            reps.push_back(entry);
            continue;
        }
        for (std::size_t e = 0; e < kinds.size(); ++e) {
            const ControllerKind kind = kinds[e];
            const std::string kname = tuning::to_string(kind);
            const auto& optimal = kind == ControllerKind::PID ? it->pid : it->fopid;
            if (!optimal) continue;
            const auto published =
                kind == ControllerKind::PID ? rules::rule_pid_for(it->model) : rules::rule_fopid_for(it->model);
            const auto cmp_pub = tuning::compare_rule_vs_optimal(spec, kind, *optimal, published);
            const auto cmp_evo = tuning::compare_rule_vs_optimal(spec, kind, *optimal, evolved[e].predict(it->model));
            emit_csv("compare_" + file_tag(spec) + "_" + kname + "_published.csv", io::comparison_csv(cmp_pub));
            emit_csv("compare_" + file_tag(spec) + "_" + kname + "_evolved.csv", io::comparison_csv(cmp_evo));
            entry[kname] = {{"J_GA", cmp_pub.J_optimal},
                            {"published_rule", cmp_pub.rule},
                            {"J_published", cmp_pub.J_rule},
                            {"ratio_published", cmp_pub.ratio()},
                            {"evolved_rule", cmp_evo.rule},
                            {"J_evolved", cmp_evo.J_rule},
                            {"ratio_evolved", cmp_evo.ratio()},
                            {"e_final_published", final_error(cmp_pub.traj_rule)},
                            {"e_final_evolved", final_error(cmp_evo.traj_rule)}};
        }
        reps.push_back(entry);
    }
    summary["representative"] = reps;
    summary["failures"] = failures;
    emit_json("summary.json", summary);
    rep.summary = summary;
    return rep;
}

}  // namespace nyqtune::pipeline
