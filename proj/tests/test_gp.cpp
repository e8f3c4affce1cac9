#include "nyqtune/gp.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <random>

using namespace nyqtune::gp;

namespace {

const std::vector<std::string> kNames{"x1", "x2", "x3"};

ExprTree x(int i) { return ExprTree::feature(i); }
ExprTree c(double v) { return ExprTree::constant(v); }
ExprTree f(Op op, std::vector<ExprTree> kids) { return ExprTree::apply(op, kids); }

RegressionData make_data(int rows, std::uint64_t seed, double (*target)(const double*)) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    RegressionData d;
    d.X.resize(rows, 3);
    d.y.resize(rows);
    for (int r = 0; r < rows; ++r) {
        double v[3] = {u(rng), u(rng), u(rng)};
        for (int k = 0; k < 3; ++k) d.X(r, k) = v[k];
        d.y(r) = target(v);
    }
    d.feature_names = kNames;
    return d;
}

std::vector<std::vector<double>> probe_grid() {
    std::vector<std::vector<double>> pts;
    for (double a : {-7.5, -1.0, -1e-3, 0.0, 0.4, 2.0, 50.0})
        for (double b : {-2.2, 0.0, 0.9, 1e3})
            for (double e : {-0.5, 0.0, 3.0}) pts.push_back({a, b, e});
    return pts;
}

double sse(const RegressionData& d, const std::vector<ExprTree>& genes, double bias, const std::vector<double>& w) {
    auto G = gene_outputs(genes, d.X);
    double s = 0.0;
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
        double p = bias;
        for (std::size_t g = 0; g < genes.size(); ++g) p += w[g] * G(r, static_cast<Eigen::Index>(g));
        s += (p - d.y(r)) * (p - d.y(r));
    }
    return s;
}

// true when `b` equals `a` with one subtree replaced
bool one_subtree_replaced(const ExprTree& a, const ExprTree& b) {
    if (a == b) return true;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        if (!std::equal(a.nodes.begin(), a.nodes.begin() + i, b.nodes.begin())) break;
        const auto ea = a.subtree_end(i), eb = b.subtree_end(i);
        if (a.size() - ea == b.size() - eb && std::equal(a.nodes.begin() + ea, a.nodes.end(), b.nodes.begin() + eb))
            return true;
    }
    return false;
}

}  // namespace

TEST_CASE("eval_expr") {
    const double p[] = {2.0, 3.0};
    CHECK(eval_expr(f(Op::Add, {x(0), x(1)}), p) == 5.0);
    const double q[] = {1.0, 0.0};
    CHECK(eval_expr(f(Op::PDiv, {x(0), x(1)}), q) == 0.0);
    const double r[] = {-5.0};
    CHECK(eval_expr(f(Op::PLog, {x(0)}), r) == doctest::Approx(1.60944).epsilon(1e-5));
    CHECK(eval_expr(f(Op::PSqrt, {c(-9.0)}), r) == 3.0);
    CHECK(eval_expr(f(Op::Root4, {c(16.0)}), r) == doctest::Approx(2.0));
    CHECK(eval_expr(f(Op::Exp, {c(1000.0)}), r) == 0.0);  // overflow maps to 0
    CHECK(eval_expr(f(Op::Sub, {f(Op::Square, {c(3.0)}), f(Op::Abs, {c(-1.0)})}), r) == 8.0);
    CHECK_THROWS_AS(eval_expr(x(4), r), std::out_of_range);
}

TEST_CASE("tree structure") {
    auto t = f(Op::Add, {f(Op::Mul, {x(0), c(2.0)}), f(Op::Sin, {x(1)})});
    CHECK(t.size() == 6);
    CHECK(t.depth() == 3);
    CHECK(t.valid());
    CHECK(t.subtree_end(1) == 4);
    CHECK(t.depth_of(2) == 3);
    ExprTree broken;
    broken.nodes = {Node{Op::Add}, Node{Op::Feature, 0}};
    CHECK_FALSE(broken.valid());
}

TEST_CASE("fitness_mae") {
    auto d = make_data(20, 1, [](const double* v) { return v[0] + v[1]; });
    MultigeneModel perfect{{f(Op::Add, {x(0), x(1)})}, 0.0, {1.0}};
    CHECK(fitness_mae(perfect, d) == 0.0);

    RegressionData two;
    two.X = Eigen::MatrixXd::Zero(2, 1);
    two.y = Eigen::Vector2d(1.0, 3.0);
    CHECK(fitness_mae(MultigeneModel{{c(0.0)}, 2.0, {0.0}}, two) == 1.0);

    RegressionData five;
    five.X = Eigen::MatrixXd::Zero(5, 1);
    five.y.resize(5);
    five.y << 4.0, -1.0, 10.0, 2.5, 0.3;
    const double at_median = fitness_mae(MultigeneModel{{c(0.0)}, 2.5, {0.0}}, five);
    for (double k = -2.0; k <= 11.0; k += 0.05)
        CHECK(fitness_mae(MultigeneModel{{c(0.0)}, k, {0.0}}, five) >= at_median - 1e-15);
}

TEST_CASE("crossover") {
    GpConfig cfg;
    Rng rng(17);
    for (int trial = 0; trial < 400; ++trial) {
        auto a = random_tree(rng, cfg, 3, 2 + trial % 5, trial % 2 == 0);
        auto b = random_tree(rng, cfg, 3, 2 + (trial / 2) % 5, trial % 3 == 0);
        auto [o1, o2] = crossover(a, b, rng, 7);
        CHECK(o1.depth() <= 7);
        CHECK(o2.depth() <= 7);
        CHECK(o1.valid());
        CHECK(o2.valid());
        CHECK(o1.size() + o2.size() == a.size() + b.size());
        const auto i = trial % a.size();
        auto [s1, s2] = crossover_at(a, i, a, i, 7);
        CHECK(s1 == a);
        CHECK(s2 == a);
    }
    SUBCASE("depth-violating offspring are rejected") {
        ExprTree deep = x(0);
        for (int k = 0; k < 6; ++k) deep = f(Op::Sin, {deep});
        CHECK(deep.depth() == 7);
        auto big = f(Op::Add, {x(1), x(2)});
        auto [p, q] = crossover_at(deep, 6, big, 0, 7);
        CHECK(p == deep);
        CHECK(q == big);
    }
}

TEST_CASE("mutate") {
    GpConfig cfg;
    Rng rng(23);
    const auto grid = probe_grid();
    for (int trial = 0; trial < 400; ++trial) {
        auto t = random_tree(rng, cfg, 3, 2 + trial % 6, trial % 2 == 1);
        auto m = mutate(t, rng, cfg, 3);
        CHECK(m.valid());
        CHECK(m.depth() <= 7);
        CHECK(one_subtree_replaced(t, m));
        for (const auto& pt : grid) CHECK(std::isfinite(eval_expr(m, pt)));
    }
}

TEST_CASE("closure of random trees") {
    GpConfig cfg;
    Rng rng(5);
    const auto grid = probe_grid();
    for (int trial = 0; trial < 300; ++trial) {
        auto t = random_tree(rng, cfg, 3, 6, trial % 2 == 0);
        CHECK(t.depth() <= 6);
        for (const auto& pt : grid) CHECK(std::isfinite(eval_expr(t, pt)));
    }
}

TEST_CASE("render and parse") {
    auto t = f(Op::Add, {f(Op::PDiv, {x(0), c(-0.1)}), f(Op::Tanh, {f(Op::Mul, {x(2), c(1.0 / 3.0)})})});
    const auto s = render(t, kNames);
    CHECK(s == "(pdiv(x1, (-0.10000000000000001)) + tanh((x3 * 0.33333333333333331)))");
    CHECK(parse_expr(s, kNames) == t);
    CHECK_THROWS_AS(parse_expr("(x1 + ", kNames), std::invalid_argument);
    CHECK_THROWS_AS(parse_expr("foo(x1)", kNames), std::invalid_argument);
    CHECK_THROWS_AS(parse_expr("x9", kNames), std::invalid_argument);

    GpConfig cfg;
    Rng rng(9);
    const auto grid = probe_grid();
    for (int trial = 0; trial < 200; ++trial) {
        auto r = random_tree(rng, cfg, 3, 2 + trial % 5, trial % 2 == 0);
        auto back = parse_expr(render(r, kNames), kNames);
        for (const auto& pt : grid) {
            const double a = eval_expr(r, pt), b = eval_expr(back, pt);
            CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
        }
    }
}

TEST_CASE("fit_gene_weights") {
    auto d = make_data(30, 3, [](const double* v) { return v[0] * v[1]; });
    SUBCASE("gene equal to the target") {
        auto [bias, w] = fit_gene_weights({f(Op::Mul, {x(0), x(1)})}, d);
        CHECK(std::abs(bias) < 1e-12);
        CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("constant-zero gene gets no weight") {
        auto [bias, w] = fit_gene_weights({x(0), c(0.0)}, d);
        CHECK(w[1] == 0.0);
    }
    SUBCASE("duplicate genes give the single-gene predictions") {
        const std::vector<ExprTree> one{f(Op::Sin, {x(2)})};
        const std::vector<ExprTree> two{f(Op::Sin, {x(2)}), f(Op::Sin, {x(2)})};
        auto [b1, w1] = fit_gene_weights(one, d);
        auto [b2, w2] = fit_gene_weights(two, d);
        MultigeneModel m1{one, b1, w1}, m2{two, b2, w2};
        for (Eigen::Index r = 0; r < d.rows(); ++r) {
            const Eigen::RowVectorXd xr = d.X.row(r);
            CHECK(m1.predict({xr.data(), 3}) == doctest::Approx(m2.predict({xr.data(), 3})).epsilon(1e-10));
        }
        CHECK(w2[0] == doctest::Approx(w2[1]));
    }
    SUBCASE("least squares optimality") {
        const std::vector<ExprTree> genes{f(Op::Sin, {x(0)}), f(Op::Square, {x(1)}), x(2)};
        auto [bias, w] = fit_gene_weights(genes, d);
        const double base = sse(d, genes, bias, w);
        for (double step : {1e-3, -1e-3}) {
            CHECK(sse(d, genes, bias + step, w) >= base);
            for (std::size_t k = 0; k < w.size(); ++k) {
                auto p = w;
                p[k] += step;
                CHECK(sse(d, genes, bias, p) >= base);
            }
        }
    }
}

TEST_CASE("pareto_front") {
    CHECK(pareto_front({{1.0, 5}}) == std::vector<std::size_t>{0});
    CHECK(pareto_front({{1.0, 5}, {2.0, 3}, {3.0, 4}}) == std::vector<std::size_t>{1, 0});
    CHECK(pareto_front({{2.0, 3}, {2.0, 3}}) == std::vector<std::size_t>{0});
    CHECK(pareto_front({{std::nan(""), 1}, {1.0, 2}}) == std::vector<std::size_t>{1});

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::pair<double, std::size_t>> pts;
    for (int i = 0; i < 300; ++i) pts.push_back({std::round(u(rng) * 40.0) / 40.0, 1 + rng() % 30});
    auto front = pareto_front(pts);
    for (std::size_t k = 1; k < front.size(); ++k) {
        CHECK(pts[front[k]].second > pts[front[k - 1]].second);
        CHECK(pts[front[k]].first < pts[front[k - 1]].first);
    }
    for (auto i : front)
        for (const auto& q : pts) {
            const bool dominates = q.first <= pts[i].first && q.second <= pts[i].second &&
                                   (q.first < pts[i].first || q.second < pts[i].second);
            CHECK_FALSE(dominates);
        }
}

TEST_CASE("evolve recovers a planted formula") {
    auto d = make_data(50, 42, [](const double* v) { return v[0] + v[1]; });
    GpConfig cfg;
    cfg.seed = 3;
    std::size_t generations_seen = 0;
    bool sizes_ok = true;
    auto r = evolve(d, cfg, [&](int, const std::vector<Individual>& pop, const std::vector<ParetoPoint>&) {
        ++generations_seen;
        sizes_ok = sizes_ok && pop.size() == 500;
    });
    CHECK(sizes_ok);
    CHECK(r.best_fitness < 1e-6);
    CHECK(fitness_mae(r.best, d) == doctest::Approx(r.best_fitness));
    CHECK(generations_seen == r.history.size());
    for (std::size_t g = 1; g < r.history.size(); ++g) CHECK(r.history[g] <= r.history[g - 1]);
}

TEST_CASE("depth bound and archive soundness") {
    auto d = make_data(25, 6, [](const double* v) { return std::sin(v[0]) * v[2] + 0.5 * v[1] * v[1]; });
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        GpConfig cfg;
        cfg.population = 60;
        cfg.generations = 15;
        cfg.seed = seed;
        std::vector<std::pair<double, std::size_t>> seen;
        bool depth_ok = true, archive_ok = true;
        evolve(d, cfg, [&](int, const std::vector<Individual>& pop, const std::vector<ParetoPoint>& archive) {
            for (const auto& ind : pop) {
                for (const auto& g : ind.model.genes) depth_ok = depth_ok && g.depth() <= 7 && g.valid();
                depth_ok = depth_ok && !ind.model.genes.empty() &&
                           ind.model.genes.size() <= static_cast<std::size_t>(cfg.max_genes);
                seen.push_back({ind.fitness, ind.complexity});
            }
            for (const auto& a : archive)
                for (const auto& q : seen) {
                    if (!std::isfinite(q.first)) continue;
                    const bool dominated = q.first <= a.fitness && q.second <= a.complexity &&
                                           (q.first < a.fitness || q.second < a.complexity);
                    archive_ok = archive_ok && !dominated;
                }
        });
        CHECK(depth_ok);
        CHECK(archive_ok);
    }
}

TEST_CASE("evolve is deterministic") {
    auto d = make_data(20, 2, [](const double* v) { return v[0] * v[0] - v[2]; });
    GpConfig cfg;
    cfg.population = 50;
    cfg.generations = 10;
    cfg.seed = 77;
    auto a = evolve(d, cfg);
    auto b = evolve(d, cfg);
    CHECK(a.history == b.history);
    CHECK(a.best.render(kNames) == b.best.render(kNames));
    CHECK(a.archive.size() == b.archive.size());
}

TEST_CASE("config validation") {
    GpConfig cfg;
    CHECK(cfg.population == 500);
    CHECK(cfg.tournament == 3);
    CHECK(cfg.max_depth == 7);
    cfg.tournament = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
