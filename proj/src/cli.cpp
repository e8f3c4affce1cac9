#include "nyqtune/cli.hpp"

#include "nyqtune/io.hpp"
#include "nyqtune/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <thread>

namespace nyqtune::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("NYQTUNE_SEED")) {
        try {
            std::size_t used = 0;
            const std::string s(env);
            const auto v = std::stoull(s, &used);
            if (used == s.size()) return v;
        } catch (const std::exception&) {
        }
        throw UsageError("NYQTUNE_SEED is not an unsigned integer");
    }
    throw UsageError("this command is randomized: pass --seed or set NYQTUNE_SEED");
}

TestbenchSpec parse_bench(const std::string& s) {
    try {
        return parse_testbench(s);
    } catch (const std::exception& ex) {
        throw UsageError(ex.what());
    }
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    try {
        return io::read_json(path);
    } catch (const std::exception& ex) {
        throw UsageError("cannot read config " + path + ": " + ex.what());
    }
}

json manifest(const std::string& command, const std::vector<std::string>& argv, const json& config,
              std::uint64_t seed, const std::vector<std::filesystem::path>& outputs) {
    json outs = json::array();
    for (const auto& p : outputs) {
        outs.push_back({{"path", p.string()}, {"format", p.extension() == ".csv" ? "csv" : "json"}});
    }
    return {{"command", command}, {"argv", argv},    {"config", config},
            {"seed", seed},       {"version", kVersion}, {"outputs", outs}};
}

// Objective switches shared by reduce and pipeline.
struct ObjectiveFlags {
    std::string grid_unit, norm, delay, objective;
    std::optional<double> w1, w2;

    void add(CLI::App* app, bool with_kind) {
        app->add_option("--grid-unit", grid_unit, "Frequency grid unit")->check(CLI::IsMember({"hz", "rad"}));
        app->add_option("--norm", norm, "Norm over the grid")->check(CLI::IsMember({"length", "rms"}));
        app->add_option("--delay", delay, "Dead-time realization on the grid")->check(CLI::IsMember({"pade", "exact"}));
        app->add_option("--w1", w1, "Weight on the real-part distance");
        app->add_option("--w2", w2, "Weight on the imaginary-part distance");
        if (with_kind) {
            app->add_option("--objective", objective, "Reduction objective")->check(CLI::IsMember({"nyquist", "h2"}));
        }
    }

    void apply(reduction::ReductionObjective& o) const {
        if (!objective.empty()) o.kind = reduction::parse_objective_kind(objective);
        if (!grid_unit.empty()) o.grid = reduction::default_grid(reduction::parse_grid_unit(grid_unit));
        if (!norm.empty()) o.norm = reduction::parse_norm(norm);
        if (!delay.empty()) o.delay = reduction::parse_delay_realization(delay);
        if (w1) o.w1 = *w1;
        if (w2) o.w2 = *w2;
    }
};

struct GaFlags {
    std::optional<int> population, generations;

    void add(CLI::App* app) {
        app->add_option("--population", population, "GA population size");
        app->add_option("--generations", generations, "GA generations");
    }

    void apply(evo::GaConfig& g) const {
        if (population) g.population = *population;
        if (generations) g.generations = *generations;
    }
};

evo::GaConfig default_tuning_ga() { return pipeline::PipelineConfig::default_dataset_config().tuning_ga; }

const reduction::PublishedRow* published_row(const TestbenchSpec& s) {
    for (const auto& r : reduction::published_table()) {
        if (r.spec == s) return &r;
    }
    return nullptr;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Nyquist-based model reduction and PID/FOPID tuning-rule toolkit", "nyqtune"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    std::string config_path;
    std::string out_dir = ".";
    auto common = [&](CLI::App* c, bool randomized) {
        if (randomized) c->add_option("--seed", seed, "Random seed (or NYQTUNE_SEED)");
        c->add_option("--config", config_path, "JSON configuration file");
    };

    // bench
    auto* bench = app.add_subcommand("bench", "Test-bench catalog");
    bench->require_subcommand(1);
    bool list_json = false;
    auto* bench_list = bench->add_subcommand("list", "List the catalog plants");
    bench_list->add_flag("--json", list_json, "Print as JSON");
    std::string bench_label;
    auto* bench_show = bench->add_subcommand("show", "Show one plant");
    bench_show->add_option("--bench", bench_label, "Plant, e.g. P1:3")->required();

    // reduce
    auto* reduce = app.add_subcommand("reduce", "Reduce a plant to FOPTD/SOPTD");
    std::string template_name = "soptd";
    ObjectiveFlags reduce_obj;
    GaFlags reduce_ga;
    reduce->add_option("--bench", bench_label, "Plant, e.g. P1:3")->required();
    reduce->add_option("--template", template_name, "Reduced template")->check(CLI::IsMember({"foptd", "soptd"}));
    reduce->add_option("--out", out_dir, "Output directory");
    reduce_obj.add(reduce, true);
    reduce_ga.add(reduce);
    common(reduce, true);

    // tune
    auto* tune = app.add_subcommand("tune", "GA-tune a PID or FOPID controller on a plant");
    std::string kind_name = "pid";
    GaFlags tune_ga;
    tune->add_option("--bench", bench_label, "Plant, e.g. P1:3")->required();
    tune->add_option("--kind", kind_name, "Controller kind")->check(CLI::IsMember({"pid", "fopid"}));
    tune->add_option("--out", out_dir, "Output directory");
    tune_ga.add(tune);
    common(tune, true);

    // rules
    auto* rules_cmd = app.add_subcommand("rules", "Published tuning rules");
    rules_cmd->require_subcommand(1);
    auto* rules_eval = rules_cmd->add_subcommand("eval", "Evaluate a rule on model parameters");
    double tau_max = 0, tau_min = 0, L = 0, K = 1.0;
    bool sine_outside = false, ki_outside = false, kp_fraction_whole = false;
    rules_eval->add_option("--kind", kind_name, "Controller kind")->check(CLI::IsMember({"pid", "fopid"}));
    rules_eval->add_option("--tau-max", tau_max, "Larger time constant")->required();
    rules_eval->add_option("--tau-min", tau_min, "Smaller time constant")->required();
    rules_eval->add_option("--L", L, "Dead time")->required();
    rules_eval->add_option("--K", K, "Process gain (rules assume 1)");
    rules_eval->add_flag("--sine-outside", sine_outside, "PID: sine closes before the long product");
    rules_eval->add_flag("--ki-outside", ki_outside, "PID: Ki tail terms outside the square root");
    rules_eval->add_flag("--kp-fraction-whole", kp_fraction_whole, "FOPID: Kp fraction spans the whole brace");
    auto* rules_compare = rules_cmd->add_subcommand("compare", "Rule-based vs GA-tuned closed loop");
    std::string model_source = "published";
    GaFlags compare_ga;
    rules_compare->add_option("--bench", bench_label, "Plant, e.g. P1:5")->required();
    rules_compare->add_option("--kind", kind_name, "Controller kind")->check(CLI::IsMember({"pid", "fopid"}));
    rules_compare->add_option("--model", model_source, "Reduced model source")
        ->check(CLI::IsMember({"published", "reduce"}));
    rules_compare->add_option("--out", out_dir, "Output directory");
    compare_ga.add(rules_compare);
    common(rules_compare, true);

    // gp
    auto* gp_cmd = app.add_subcommand("gp", "Symbolic regression");
    gp_cmd->require_subcommand(1);
    auto* gp_run = gp_cmd->add_subcommand("run", "Evolve a formula for one CSV column");
    std::string data_path, target;
    std::vector<std::string> feature_cols;
    std::optional<int> gp_pop, gp_gens, gp_depth, gp_genes, gp_tour;
    gp_run->add_option("--data", data_path, "CSV with a header row")->required()->check(CLI::ExistingFile);
    gp_run->add_option("--target", target, "Target column")->required();
    gp_run->add_option("--features", feature_cols, "Feature columns (default: all others)")->delimiter(',');
    gp_run->add_option("--population", gp_pop, "Population size");
    gp_run->add_option("--generations", gp_gens, "Generations");
    gp_run->add_option("--max-depth", gp_depth, "Maximum tree depth");
    gp_run->add_option("--max-genes", gp_genes, "Maximum genes per model");
    gp_run->add_option("--tournament", gp_tour, "Tournament size");
    gp_run->add_option("--out", out_dir, "Output directory");
    common(gp_run, true);

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "End-to-end runs");
    pipe->require_subcommand(1);
    auto* pipe_full = pipe->add_subcommand("full", "Reduce, tune, evolve rules and compare on the catalog");
    std::vector<std::string> representative, plants;
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    bool no_fopid = false;
    ObjectiveFlags pipe_obj;
    pipe_full->add_option("--out", out_dir, "Output directory");
    pipe_full->add_option("--representative", representative, "Plants for trajectory comparisons")->delimiter(',');
    pipe_full->add_option("--plants", plants, "Subset of the catalog")->delimiter(',');
    pipe_full->add_option("--threads", threads, "Worker threads across plants")->check(CLI::PositiveNumber);
    pipe_full->add_flag("--no-fopid", no_fopid, "Skip FOPID tuning");
    pipe_obj.add(pipe_full, false);
    common(pipe_full, true);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (bench_list->parsed()) {
            if (list_json) {
                json j = json::array();
                for (const auto& s : catalog()) j.push_back(s);
                out << j.dump(2) << '\n';
            } else {
                out << "class,parameter\n";
                for (const auto& s : catalog()) out << to_string(s.class_id) << ',' << io::num(s.parameter) << '\n';
            }
            return 0;
        }
        if (bench_show->parsed()) {
            const TestbenchSpec spec = parse_bench(bench_label);
            const DelayTF p = make_testbench(spec);
            json poles = json::array();
            for (const auto& r : p.den.roots()) poles.push_back({r.real(), r.imag()});
            json j{{"spec", spec}, {"tf", p}, {"poles", poles}, {"stable", is_stable(p)}, {"dc_gain", p.dc_gain()},
                   {"in_catalog", spec.in_catalog()}};
            if (const auto* row = published_row(spec)) j["published"] = {{"J_min", row->j_min}, {"model", row->model}};
            out << j.dump(2) << '\n';
            return 0;
        }
        if (reduce->parsed()) {
            const TestbenchSpec spec = parse_bench(bench_label);
            const json cfg = load_config(config_path);
            reduction::ReductionObjective obj;
            if (cfg.contains("objective")) obj = cfg.at("objective").get<reduction::ReductionObjective>();
            reduce_obj.apply(obj);
            evo::GaConfig ga;
            if (cfg.contains("ga")) ga = cfg.at("ga").get<evo::GaConfig>();
            reduce_ga.apply(ga);
            ga.seed = resolve_seed(seed);
            const ModelKind tmpl = parse_model_kind(template_name);

            const DelayTF plant = make_testbench(spec);
            const auto res = reduction::reduce(plant, tmpl, obj, ga);
            std::filesystem::create_directories(out_dir);
            const std::string stem = "reduce_" + pipeline::file_tag(spec) + "_" + template_name + "_" +
                                     reduction::to_string(obj.kind);
            const std::filesystem::path dir(out_dir);
            json result = res;
            result["plant"] = spec.label();
            io::write_json(dir / (stem + ".json"), result);
            reduction::ReductionObjective grid_obj = obj;
            grid_obj.kind = reduction::ObjectiveKind::Nyquist;
            const std::vector<double> omega = obj.grid.omegas();
            const std::vector<reduction::NyquistCurve> curves{
                {"original", omega, reduction::grid_response(plant, grid_obj)},
                {template_name, omega, reduction::grid_response(res.model.to_tf(), grid_obj)}};
            io::write_csv(dir / (stem + "_nyquist.csv"), io::nyquist_csv(curves));
            const json config{{"bench", spec.label()}, {"template", template_name}, {"objective", obj}, {"ga", ga}};
            io::write_json(dir / (stem + ".manifest.json"),
                           manifest("reduce", args, config, ga.seed,
                                    {dir / (stem + ".json"), dir / (stem + "_nyquist.csv")}));
            out << result.dump(2) << '\n';
            return 0;
        }
        if (tune->parsed()) {
            const TestbenchSpec spec = parse_bench(bench_label);
            const json cfg = load_config(config_path);
            evo::GaConfig ga = default_tuning_ga();
            if (cfg.contains("ga")) ga = cfg.at("ga").get<evo::GaConfig>();
            tune_ga.apply(ga);
            ga.seed = resolve_seed(seed);
            const auto kind = tuning::parse_controller_kind(kind_name);

            const DelayTF plant = make_testbench(spec);
            const auto prob = tuning::TuningProblem::for_plant(plant, kind);
            const auto res = tuning::tune_controller(prob, ga);
            const auto traj = fracsim::simulate_step(plant, res.params, prob.sim);
            std::filesystem::create_directories(out_dir);
            const std::filesystem::path dir(out_dir);
            const std::string stem = "tune_" + pipeline::file_tag(spec) + "_" + kind_name;
            const json result{{"plant", spec.label()},       {"kind", kind_name},
                              {"params", res.params},        {"J", res.J},
                              {"evaluations", res.evaluations}, {"horizon", prob.sim.horizon},
                              {"dt", prob.sim.dt}};
            io::write_json(dir / (stem + ".json"), result);
            io::write_csv(dir / (stem + "_trajectory.csv"), io::trajectory_csv(traj));
            const json config{{"bench", spec.label()}, {"kind", kind_name}, {"ga", ga}};
            io::write_json(dir / (stem + ".manifest.json"),
                           manifest("tune", args, config, ga.seed,
                                    {dir / (stem + ".json"), dir / (stem + "_trajectory.csv")}));
            out << result.dump(2) << '\n';
            return 0;
        }
        if (rules_eval->parsed()) {
            rules::RuleVariant v;
            v.pid_sine_wraps_product = !sine_outside;
            v.pid_ki_terms_inside_sqrt = !ki_outside;
            v.fopid_kp_fraction_on_sqrt_only = !kp_fraction_whole;
            const rules::RuleInput in{K, tau_max, tau_min, L};
            const auto c = kind_name == "pid" ? rules::rule_pid(in, v) : rules::rule_fopid(in, v);
            json j = c;
            if (kind_name == "pid") {
                j.erase("lambda");
                j.erase("mu");
            }
            out << j.dump(2) << '\n';
            return 0;
        }
        if (rules_compare->parsed()) {
            const TestbenchSpec spec = parse_bench(bench_label);
            const json cfg = load_config(config_path);
            evo::GaConfig ga = default_tuning_ga();
            if (cfg.contains("ga")) ga = cfg.at("ga").get<evo::GaConfig>();
            compare_ga.apply(ga);
            ga.seed = resolve_seed(seed);
            const auto kind = tuning::parse_controller_kind(kind_name);

            ReducedModel model;
            if (model_source == "published") {
                const auto* row = published_row(spec);
                if (!row) throw UsageError("no published model for " + spec.label() + "; use --model reduce");
                model = row->model;
            } else {
                evo::GaConfig rga;
                rga.seed = ga.seed;
                model = reduction::reduce(make_testbench(spec), ModelKind::SOPTD, {}, rga).model;
            }
            const auto cmp = tuning::compare_rule_vs_optimal(spec, kind, model, ga);
            std::filesystem::create_directories(out_dir);
            const std::filesystem::path dir(out_dir);
            const std::string stem = "compare_" + pipeline::file_tag(spec) + "_" + kind_name;
            const json result{{"plant", spec.label()}, {"kind", kind_name},      {"model", model},
                              {"optimal", cmp.optimal}, {"rule", cmp.rule},      {"J_GA", cmp.J_optimal},
                              {"J_rule", cmp.J_rule},   {"ratio", cmp.ratio()}};
            io::write_json(dir / (stem + ".json"), result);
            io::write_csv(dir / (stem + ".csv"), io::comparison_csv(cmp));
            const json config{{"bench", spec.label()}, {"kind", kind_name}, {"model", model_source}, {"ga", ga}};
            io::write_json(dir / (stem + ".manifest.json"),
                           manifest("rules compare", args, config, ga.seed, {dir / (stem + ".json"), dir / (stem + ".csv")}));
            out << result.dump(2) << '\n';
            return 0;
        }
        if (gp_run->parsed()) {
            const json cfg = load_config(config_path);
            gp::GpConfig gc;
            if (cfg.contains("gp")) gc = cfg.at("gp").get<gp::GpConfig>();
            if (gp_pop) gc.population = *gp_pop;
            if (gp_gens) gc.generations = *gp_gens;
            if (gp_depth) gc.max_depth = *gp_depth;
            if (gp_genes) gc.max_genes = *gp_genes;
            if (gp_tour) gc.tournament = *gp_tour;
            gc.seed = resolve_seed(seed);
            gc.init_max_depth = std::min(gc.init_max_depth, gc.max_depth);
            gc.init_min_depth = std::min(gc.init_min_depth, gc.init_max_depth);

            const io::CsvTable table = io::read_csv(data_path);
            auto column = [&](const std::string& name) {
                const auto it = std::find(table.header.begin(), table.header.end(), name);
                if (it == table.header.end()) throw UsageError("column '" + name + "' not in " + data_path);
                return static_cast<std::size_t>(it - table.header.begin());
            };
            const std::size_t ty = column(target);
            std::vector<std::string> names = feature_cols;
            if (names.empty()) {
                for (const auto& h : table.header) {
                    if (h != target) names.push_back(h);
                }
            }
            std::vector<std::size_t> cols;
            for (const auto& n : names) cols.push_back(column(n));
            gp::RegressionData data;
            data.feature_names = names;
            data.X.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(cols.size()));
            data.y.resize(static_cast<Eigen::Index>(table.rows.size()));
            for (std::size_t r = 0; r < table.rows.size(); ++r) {
                const auto& row = table.rows[r];
                if (row.size() != table.header.size()) {
                    throw std::runtime_error(data_path + ": row " + std::to_string(r + 2) + " has the wrong field count");
                }
                for (std::size_t c = 0; c < cols.size(); ++c) {
                    data.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = std::stod(row[cols[c]]);
                }
                data.y(static_cast<Eigen::Index>(r)) = std::stod(row[ty]);
            }

            std::set<std::pair<double, std::size_t>> seen;
            auto observer = [&](int, const std::vector<gp::Individual>& pop, const std::vector<gp::ParetoPoint>&) {
                for (const auto& ind : pop) {
                    if (std::isfinite(ind.fitness)) seen.emplace(ind.fitness, ind.complexity);
                }
            };
            const gp::GpResult res = gp::evolve(data, gc, observer);

            std::filesystem::create_directories(out_dir);
            const std::filesystem::path dir(out_dir);
            const std::string stem = "gp_" + target;
            json archive = json::array();
            for (const auto& p : res.archive) {
                json e = p;
                e["expression_string"] = p.model.render(names);
                json genes = json::array();
                for (const auto& g : p.model.genes) genes.push_back(gp::render(g, names));
                e["genes"] = genes;
                archive.push_back(e);
            }
            io::write_json(dir / (stem + "_archive.json"), archive);
            io::write_csv(dir / (stem + "_pareto.csv"),
                          io::pareto_csv(res.archive, std::vector<std::pair<double, std::size_t>>(seen.begin(), seen.end())));
            const json config{{"data", data_path}, {"target", target}, {"features", names}, {"gp", gc}};
            io::write_json(dir / (stem + ".manifest.json"),
                           manifest("gp run", args, config, gc.seed,
                                    {dir / (stem + "_archive.json"), dir / (stem + "_pareto.csv")}));
            out << json{{"expression_string", res.best.render(names)},
                        {"fitness", res.best_fitness},
                        {"complexity", res.best.complexity()}}
                       .dump(2)
                << '\n';
            return 0;
        }
        if (pipe_full->parsed()) {
            const json cfg_json = load_config(config_path);
            pipeline::PipelineConfig cfg = pipeline::pipeline_config_from_json(cfg_json);
            cfg.apply_seed(resolve_seed(seed));
            if (!plants.empty()) {
                cfg.plants.clear();
                for (const auto& p : plants) cfg.plants.push_back(parse_bench(p));
            }
            if (!representative.empty()) {
                cfg.representative.clear();
                for (const auto& p : representative) cfg.representative.push_back(parse_bench(p));
            }
            if (no_fopid) cfg.dataset.tune_fopid = false;
            pipe_obj.apply(cfg.dataset.objective);
            cfg.dataset.threads = threads;

            const std::filesystem::path dir(out_dir);
            const auto rep = pipeline::run_pipeline(cfg, dir);
            io::write_json(dir / "manifest.json", manifest("pipeline full", args, pipeline::to_json(cfg), cfg.seed,
                                                           rep.outputs));
            out << "completed " << rep.completed << " of " << cfg.plants.size() << " plants; outputs in "
                << dir.string() << '\n';
            return 0;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }
    err << app.help();
    return 2;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return run(args, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace nyqtune::cli
