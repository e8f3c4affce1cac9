#include "nyqtune/io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace nyqtune;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / "nyqtune_test_io";
    fs::create_directories(dir);
    return dir / name;
}

template <class T>
T round_trip(const T& v) {
    json j = v;
    return j.get<T>();
}

}  // namespace

TEST_CASE("transfer function json") {
    DelayTF g({2.0, 1.0}, {1.0, 0.1, 3.0}, 0.25);
    json j = g;
    CHECK(j["num"] == json::array({2.0, 1.0}));
    CHECK(j["den"] == json::array({1.0, 0.1, 3.0}));
    CHECK(j["delay_s"] == 0.25);
    CHECK(round_trip(g) == g);
}

TEST_CASE("model and config json") {
    auto m = ReducedModel::soptd(1.1, 0.1 + 0.2, 0.7, 1.0 / 3.0);
    CHECK(round_trip(m) == m);
    auto f = ReducedModel::foptd(2.0, 3.0, 0.5);
    json jf = f;
    CHECK_FALSE(jf.contains("tau_min"));
    CHECK(round_trip(f).kind == ModelKind::FOPTD);

    TestbenchSpec s{PlantClass::P3, 0.05};
    CHECK(round_trip(s) == s);

    evo::GaConfig ga;
    ga.seed = 123456789012345ull;
    ga.mutation_decay = 0.5;
    CHECK(round_trip(ga) == ga);

    reduction::ReductionObjective obj;
    obj.grid = reduction::default_grid(reduction::GridUnit::Hz);
    obj.norm = reduction::NormKind::Rms;
    obj.w1 = 0.5;
    auto back = round_trip(obj);
    CHECK(back.grid.unit == reduction::GridUnit::Hz);
    CHECK(back.grid.points == obj.grid.points);
    CHECK(back.norm == obj.norm);
    CHECK(back.w1 == 0.5);

    fracsim::ControllerParams c{1.0 / 7.0, 2.0, 0.0, 0.9, 1.1};
    CHECK(round_trip(c) == c);

    gp::GpConfig g;
    g.function_set = {gp::Op::Add, gp::Op::PLog};
    g.seed = 4;
    auto gb = round_trip(g);
    CHECK(gb.function_set == g.function_set);
    CHECK(gb.seed == 4);
    CHECK(gb.population == 500);
}

TEST_CASE("json files keep doubles exactly") {
    json j = {{"x", 0.1 + 0.2}, {"y", 1e-300}, {"z", -123456.789012345678}};
    auto p = scratch("exact.json");
    io::write_json(p, j);
    CHECK(io::read_json(p) == j);
    CHECK_THROWS(io::read_json(scratch("missing.json")));
}

TEST_CASE("csv round trip") {
    io::CsvTable t{{"a", "b"}, {{"1", "x"}, {io::num(0.1), io::num(-2.5e-9)}}};
    auto p = scratch("t.csv");
    io::write_csv(p, t);
    auto back = io::read_csv(p);
    CHECK(back.header == t.header);
    CHECK(back.rows == t.rows);
    CHECK(std::stod(back.rows[1][0]) == 0.1);
}

TEST_CASE("table builders") {
    fracsim::Trajectory tr;
    tr.dt = 0.5;
    tr.t = {0.0, 0.5};
    tr.y = {0.0, 0.25};
    tr.u = {1.0, 0.9};
    tr.e = {1.0, 0.75};
    auto traj = io::trajectory_csv(tr);
    CHECK(traj.header == std::vector<std::string>{"t", "y", "u", "e"});
    CHECK(traj.rows.size() == 2);

    tuning::RuleComparison cmp;
    cmp.traj_optimal = tr;
    cmp.traj_rule = tr;
    cmp.traj_rule.t.push_back(1.0);
    cmp.traj_rule.y.push_back(0.4);
    cmp.traj_rule.u.push_back(0.8);
    cmp.traj_rule.e.push_back(0.6);
    auto ct = io::comparison_csv(cmp);
    CHECK(ct.header == std::vector<std::string>{"t", "y_GA", "y_rule", "u_GA", "u_rule"});
    CHECK(ct.rows.size() == 3);
    CHECK(std::isnan(std::stod(ct.rows[2][1])));

    std::vector<reduction::ReductionResult> results(1);
    results[0].model = ReducedModel::soptd(1.0, 2.0, 1.0, 0.5);
    results[0].j_value = 0.25;
    auto table = io::reduction_table_csv({{PlantClass::P1, 3}}, results);
    CHECK(table.header == std::vector<std::string>{"class", "parameter", "J_min", "K", "tau_max", "tau_min", "L"});
    CHECK(table.rows[0][0] == "P1");

    reduction::NyquistCurve orig{"original", {1.0}, {{0.5, -0.5}}};
    reduction::NyquistCurve model{"nyquist_soptd", {1.0}, {{0.4, -0.6}}};
    auto nq = io::nyquist_csv({orig, model});
    CHECK(nq.header == std::vector<std::string>{"omega", "re_true", "im_true", "re_model", "im_model", "model_label"});
    CHECK(nq.rows.size() == 1);
    CHECK(nq.rows[0][5] == "nyquist_soptd");
}

TEST_CASE("pareto point json") {
    gp::ParetoPoint p;
    p.model.genes = {gp::ExprTree::apply(gp::Op::Mul, {gp::ExprTree::feature(0), gp::ExprTree::feature(4)})};
    p.model.bias = 1.5;
    p.model.weights = {0.25};
    p.fitness = 0.125;
    p.complexity = 3;
    json j = p;
    CHECK(j["fitness"] == 0.125);
    CHECK(j["complexity"] == 3);
    CHECK(j["bias"] == 1.5);
    CHECK(j["expression_string"].get<std::string>().find("L_over_tau_min") != std::string::npos);
}
