#include "nyqtune/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <thread>
#include <stdexcept>

namespace nyqtune::tuning {

std::string to_string(ControllerKind k) { return k == ControllerKind::PID ? "pid" : "fopid"; }

ControllerKind parse_controller_kind(const std::string& s) {
    if (s == "pid" || s == "PID") return ControllerKind::PID;
    if (s == "fopid" || s == "FOPID") return ControllerKind::FOPID;
    throw std::invalid_argument("controller kind must be pid or fopid");
}

evo::SearchSpace default_space(ControllerKind kind) {
    if (kind == ControllerKind::PID) {
        return {{0.0, 0.0, 0.0}, {20.0, 20.0, 20.0}};
    }
    return {{0.0, 0.0, 0.0, 0.05, 0.05}, {20.0, 20.0, 20.0, 2.0, 2.0}};
}

TuningProblem TuningProblem::for_plant(const DelayTF& plant, ControllerKind kind) {
    TuningProblem p;
    p.plant = plant;
    p.kind = kind;
    p.space = default_space(kind);
    p.sim = fracsim::default_sim_options(plant);
    return p;
}

fracsim::ControllerParams decode(std::span<const double> x, ControllerKind kind) {
    if (kind == ControllerKind::PID) {
        return fracsim::ControllerParams::pid(x[0], x[1], x[2]);
    }
    return {x[0], x[1], x[2], x[3], x[4]};
}

std::vector<double> encode(const fracsim::ControllerParams& c, ControllerKind kind) {
    if (kind == ControllerKind::PID) {
        return {c.Kp, c.Ki, c.Kd};
    }
    return {c.Kp, c.Ki, c.Kd, c.lambda, c.mu};
}

double evaluate(const TuningProblem& prob, const fracsim::ControllerParams& c) {
    return fracsim::closed_loop_cost(prob.plant, c, prob.sim, prob.weights);
}

namespace {

// Slow pure-integral controller, stable for a stable plant with positive gain; keeps the
// initial population from being all-unstable when the stable region of the box is small.
std::optional<fracsim::ControllerParams> cautious_seed(const DelayTF& plant) {
    const double K = plant.dc_gain();
    double residence = plant.delay_s;
    const double d0 = plant.den.coeff_of_power(0);
    const double n0 = plant.num.coeff_of_power(0);
    if (d0 != 0.0 && n0 != 0.0) residence += plant.den.coeff_of_power(1) / d0 - plant.num.coeff_of_power(1) / n0;
    if (!(K > 0.0) || !std::isfinite(K) || !std::isfinite(residence)) return std::nullopt;
    return fracsim::ControllerParams::pid(0.0, 0.1 / (K * std::max(residence, 1e-3)), 0.0);
}

}  // namespace

TuningResult tune_controller(const TuningProblem& prob, const evo::GaConfig& ga,
                             const std::vector<fracsim::ControllerParams>& seeds) {
    if (!is_stable(prob.plant)) {
        throw std::invalid_argument("tune_controller: plant is not stable");
    }
    prob.weights.validate();
    prob.sim.validate();
    const std::size_t dim = prob.kind == ControllerKind::PID ? 3 : 5;
    if (prob.space.dim() != dim) {
        throw std::invalid_argument("tune_controller: search space dimension does not match controller kind");
    }

    auto objective = [&](std::span<const double> x) { return evaluate(prob, decode(x, prob.kind)); };
    std::vector<std::vector<double>> initial;
    for (const auto& s : seeds) {
        initial.push_back(encode(s, prob.kind));
    }
    if (const auto c = cautious_seed(prob.plant)) initial.push_back(encode(*c, prob.kind));
    const evo::GaResult r = evo::minimize(objective, prob.space, ga, initial);
    if (!(r.best_f < fracsim::kUnstablePenalty)) {
        std::string box;
        for (std::size_t i = 0; i < dim; ++i) {
            box += "[" + std::to_string(prob.space.lower[i]) + ", " + std::to_string(prob.space.upper[i]) + "]";
        }
        throw std::runtime_error("tune_controller: every candidate in the box " + box + " gave an unstable loop");
    }
    return {decode(r.best_x, prob.kind), r.best_f, r.evaluations};
}

fracsim::ControllerParams clamp_to_space(const fracsim::ControllerParams& c, ControllerKind kind) {
    const evo::SearchSpace space = default_space(kind);
    std::vector<double> x = encode(c, kind);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::clamp(x[i], space.lower[i], space.upper[i]);
    }
    return decode(x, kind);
}

std::array<double, 6> features(const ReducedModel& m) {
    return {m.L, m.tau_max, m.tau_min, rules::pdiv(m.tau_max, m.tau_min), rules::pdiv(m.L, m.tau_min),
            rules::pdiv(m.L, m.tau_max)};
}

std::vector<const DatasetRow*> RuleDataset::complete(ControllerKind kind) const {
    std::vector<const DatasetRow*> out;
    for (const DatasetRow& r : rows) {
        if ((kind == ControllerKind::PID && r.pid) || (kind == ControllerKind::FOPID && r.fopid)) {
            out.push_back(&r);
        }
    }
    return out;
}

namespace {

DatasetRow build_row(const TestbenchSpec& spec, const DatasetConfig& cfg) {
    DatasetRow row;
    row.spec = spec;
    try {
        const DelayTF plant = make_testbench(spec);
        if (cfg.use_published_models) {
            const auto& table = reduction::published_table();
            const auto it = std::find_if(table.begin(), table.end(),
                                         [&](const reduction::PublishedRow& r) { return r.spec == spec; });
            if (it == table.end()) {
                throw std::invalid_argument("no published reduced model for " + spec.label());
            }
            row.model = it->model;
            row.j_reduction = reduction::evaluate_objective(plant, row.model, cfg.objective);
        } else {
            const auto red = reduction::reduce(plant, ModelKind::SOPTD, cfg.objective, cfg.reduction_ga);
            row.model = red.model;
            row.j_reduction = red.j_value;
        }
        row.reduced = true;
        row.x = features(row.model);
        if (cfg.tune_pid) {
            const auto r = tune_controller(TuningProblem::for_plant(plant, ControllerKind::PID), cfg.tuning_ga);
            row.pid = r.params;
            row.J_pid = r.J;
        }
        if (cfg.tune_fopid) {
            std::vector<fracsim::ControllerParams> seeds;
            if (row.pid) seeds.push_back(*row.pid);
            const auto r =
                tune_controller(TuningProblem::for_plant(plant, ControllerKind::FOPID), cfg.tuning_ga, seeds);
            row.fopid = r.params;
            row.J_fopid = r.J;
        }
    } catch (const std::exception& ex) {
        row.error = ex.what();
    }
    return row;
}

}  // namespace

RuleDataset build_dataset(const std::vector<TestbenchSpec>& specs, const DatasetConfig& cfg) {
    RuleDataset data;
    data.rows.resize(specs.size());
    const auto workers = static_cast<std::size_t>(std::max(1, cfg.threads));
    if (workers == 1 || specs.size() < 2) {
        for (std::size_t k = 0; k < specs.size(); ++k) data.rows[k] = build_row(specs[k], cfg);
        return data;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, specs.size()); ++w) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < specs.size(); k = next++) data.rows[k] = build_row(specs[k], cfg);
        });
    }
    for (auto& t : pool) t.join();
    return data;
}

RuleComparison compare_rule_vs_optimal(const TestbenchSpec& spec, ControllerKind kind,
                                       const fracsim::ControllerParams& optimal,
                                       const fracsim::ControllerParams& rule) {
    const DelayTF plant = make_testbench(spec);
    const TuningProblem prob = TuningProblem::for_plant(plant, kind);
    RuleComparison cmp;
    cmp.spec = spec;
    cmp.kind = kind;
    cmp.optimal = optimal;
    cmp.rule = clamp_to_space(rule, kind);
    cmp.traj_optimal = fracsim::simulate_step(plant, cmp.optimal, prob.sim);
    cmp.traj_rule = fracsim::simulate_step(plant, cmp.rule, prob.sim);
    cmp.J_optimal = evaluate(prob, cmp.optimal);
    cmp.J_rule = evaluate(prob, cmp.rule);
    return cmp;
}

RuleComparison compare_rule_vs_optimal(const TestbenchSpec& spec, ControllerKind kind, const ReducedModel& model,
                                       const evo::GaConfig& ga, const rules::RuleVariant& variant) {
    const DelayTF plant = make_testbench(spec);
    const TuningResult opt = tune_controller(TuningProblem::for_plant(plant, kind), ga);
    const fracsim::ControllerParams rule =
        kind == ControllerKind::PID ? rules::rule_pid_for(model, variant) : rules::rule_fopid_for(model, variant);
    return compare_rule_vs_optimal(spec, kind, opt.params, rule);
}

}  // namespace nyqtune::tuning
