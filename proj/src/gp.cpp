#include "nyqtune/gp.hpp"

#include "nyqtune/rules.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace nyqtune::gp {

namespace {

struct OpInfo {
    Op op;
    const char* name;
    int arity;
};

constexpr OpInfo kOps[] = {
    {Op::Add, "add", 2},     {Op::Sub, "sub", 2},   {Op::Mul, "mul", 2},   {Op::PDiv, "pdiv", 2},
    {Op::PSqrt, "psqrt", 1}, {Op::Abs, "abs", 1},   {Op::Sin, "sin", 1},   {Op::Cos, "cos", 1},
    {Op::Tanh, "tanh", 1},   {Op::PLog, "plog", 1}, {Op::Exp, "exp", 1},   {Op::Square, "square", 1},
    {Op::Root4, "root4", 1}, {Op::Feature, "x", 0}, {Op::Const, "c", 0},
};

const OpInfo& info(Op op) { return kOps[static_cast<int>(op)]; }

double apply_unary(Op op, double a) {
    switch (op) {
        case Op::PSqrt: return rules::psqrt(a);
        case Op::Abs: return std::abs(a);
        case Op::Sin: return std::sin(a);
        case Op::Cos: return std::cos(a);
        case Op::Tanh: return std::tanh(a);
        case Op::PLog: return rules::plog(a);
        case Op::Exp: return std::exp(a);
        case Op::Square: return a * a;
        case Op::Root4: return std::pow(std::abs(a), 0.25);
        default: break;
    }
    throw std::logic_error("apply_unary: not a unary op");
}

double apply_binary(Op op, double a, double b) {
    switch (op) {
        case Op::Add: return a + b;
        case Op::Sub: return a - b;
        case Op::Mul: return a * b;
        case Op::PDiv: return rules::pdiv(a, b);
        default: break;
    }
    throw std::logic_error("apply_binary: not a binary op");
}

double eval_at(const std::vector<Node>& nodes, std::size_t& i, std::span<const double> x) {
    const Node& n = nodes[i++];
    double v = 0.0;
    switch (n.op) {
        case Op::Feature:
            if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= x.size()) {
                throw std::out_of_range("eval_expr: feature index outside input");
            }
            v = x[static_cast<std::size_t>(n.feature)];
            break;
        case Op::Const: v = n.value; break;
        default:
            if (info(n.op).arity == 1) {
                v = apply_unary(n.op, eval_at(nodes, i, x));
            } else {
                const double a = eval_at(nodes, i, x);
                const double b = eval_at(nodes, i, x);
                v = apply_binary(n.op, a, b);
            }
    }
    return std::isfinite(v) ? v : 0.0;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void render_at(const ExprTree& t, std::size_t& i, const std::vector<std::string>& names, std::string& out) {
    const Node& n = t.nodes[i++];
    switch (n.op) {
        case Op::Feature:
            out += static_cast<std::size_t>(n.feature) < names.size() ? names[static_cast<std::size_t>(n.feature)]
                                                                      : "x" + std::to_string(n.feature + 1);
            return;
        case Op::Const:
            if (n.value < 0.0 || (n.value == 0.0 && std::signbit(n.value))) {
                out += "(" + fmt17(n.value) + ")";
            } else {
                out += fmt17(n.value);
            }
            return;
        case Op::Add:
        case Op::Sub:
        case Op::Mul: {
            const char* sym = n.op == Op::Add ? " + " : n.op == Op::Sub ? " - " : " * ";
            out += "(";
            render_at(t, i, names, out);
            out += sym;
            render_at(t, i, names, out);
            out += ")";
            return;
        }
        case Op::PDiv:
            out += "pdiv(";
            render_at(t, i, names, out);
            out += ", ";
            render_at(t, i, names, out);
            out += ")";
            return;
        default:
            out += info(n.op).name;
            out += "(";
            render_at(t, i, names, out);
            out += ")";
    }
}

// Recursive-descent parser for the rendered grammar.
class Parser {
public:
    Parser(const std::string& s, const std::vector<std::string>& names) : s_(s), names_(names) {}

    ExprTree parse() {
        ExprTree t = expr();
        skip();
        if (pos_ != s_.size()) fail("trailing input");
        return t;
    }

private:
    const std::string& s_;
    const std::vector<std::string>& names_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("parse_expr: " + what + " at offset " + std::to_string(pos_));
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    ExprTree expr() {
        ExprTree lhs = term();
        while (true) {
            if (accept('+')) {
                lhs = ExprTree::apply(Op::Add, {lhs, term()});
            } else if (accept('-')) {
                lhs = ExprTree::apply(Op::Sub, {lhs, term()});
            } else {
                return lhs;
            }
        }
    }

    ExprTree term() {
        ExprTree lhs = factor();
        while (accept('*')) {
            lhs = ExprTree::apply(Op::Mul, {lhs, factor()});
        }
        return lhs;
    }

    bool at_number() const {
        return pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.');
    }

    double number(bool negative) {
        const char* first = s_.data() + pos_;
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
        if (ec != std::errc{}) fail("bad number");
        pos_ += static_cast<std::size_t>(ptr - first);
        return negative ? -v : v;
    }

    ExprTree factor() {
        skip();
        if (accept('(')) {
            ExprTree inner = expr();
            expect(')');
            return inner;
        }
        if (accept('-')) {
            skip();
            if (!at_number()) fail("unary minus is only allowed on numbers");
            return ExprTree::constant(number(true));
        }
        if (at_number()) return ExprTree::constant(number(false));

        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        if (start == pos_) fail("unexpected character");
        const std::string id = s_.substr(start, pos_ - start);

        skip();
        if (pos_ < s_.size() && s_[pos_] == '(') {
            Op op{};
            try {
                op = parse_op(id);
            } catch (const std::invalid_argument&) {
                fail("unknown function '" + id + "'");
            }
            expect('(');
            std::vector<ExprTree> args{expr()};
            while (accept(',')) args.push_back(expr());
            expect(')');
            if (static_cast<int>(args.size()) != arity(op)) fail("wrong argument count for " + id);
            return ExprTree::apply(op, args);
        }
        const auto it = std::find(names_.begin(), names_.end(), id);
        if (it != names_.end()) return ExprTree::feature(static_cast<int>(it - names_.begin()));
        if (id.size() > 1 && id[0] == 'x') {
            int k = 0;
            const auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), k);
            if (ec == std::errc{} && ptr == id.data() + id.size() && k >= 1 &&
                (names_.empty() || static_cast<std::size_t>(k) <= names_.size()))
                return ExprTree::feature(k - 1);
        }
        fail("unknown variable '" + id + "'");
    }
};

}  // namespace

int arity(Op op) { return info(op).arity; }

std::string op_name(Op op) { return info(op).name; }

Op parse_op(const std::string& name) {
    for (const OpInfo& o : kOps) {
        if (o.arity > 0 && name == o.name) return o.op;
    }
    throw std::invalid_argument("unknown function symbol '" + name + "'");
}

const std::vector<Op>& default_function_set() {
    static const std::vector<Op> set{Op::Add, Op::Sub,  Op::Mul,  Op::PDiv, Op::PSqrt,  Op::Abs,  Op::Sin,
                                     Op::Cos, Op::Tanh, Op::PLog, Op::Exp,  Op::Square, Op::Root4};
    return set;
}

int ExprTree::depth() const {
    std::vector<int> pending;
    int max_d = 0;
    for (const Node& n : nodes) {
        max_d = std::max(max_d, static_cast<int>(pending.size()) + 1);
        const int a = arity(n.op);
        if (a > 0) {
            pending.push_back(a);
        } else {
            while (!pending.empty() && --pending.back() == 0) pending.pop_back();
        }
    }
    return max_d;
}

std::size_t ExprTree::subtree_end(std::size_t i) const {
    long need = 1;
    std::size_t j = i;
    while (need > 0) {
        if (j >= nodes.size()) throw std::logic_error("subtree_end: truncated tree");
        need += arity(nodes[j].op) - 1;
        ++j;
    }
    return j;
}

int ExprTree::depth_of(std::size_t i) const {
    std::vector<int> pending;
    for (std::size_t k = 0; k < i; ++k) {
        const int a = arity(nodes[k].op);
        if (a > 0) {
            pending.push_back(a);
        } else {
            while (!pending.empty() && --pending.back() == 0) pending.pop_back();
        }
    }
    return static_cast<int>(pending.size()) + 1;
}

bool ExprTree::valid() const {
    if (nodes.empty()) return false;
    long need = 1;
    for (const Node& n : nodes) {
        if (need == 0) return false;
        if (n.op == Op::Feature && n.feature < 0) return false;
        need += arity(n.op) - 1;
    }
    return need == 0;
}

ExprTree ExprTree::feature(int index) { return {{Node{Op::Feature, index, 0.0}}}; }

ExprTree ExprTree::constant(double v) { return {{Node{Op::Const, 0, v}}}; }

ExprTree ExprTree::apply(Op op, const std::vector<ExprTree>& children) {
    if (static_cast<int>(children.size()) != arity(op)) {
        throw std::invalid_argument("ExprTree::apply: wrong number of children for " + op_name(op));
    }
    ExprTree t;
    t.nodes.push_back(Node{op, 0, 0.0});
    for (const ExprTree& c : children) t.nodes.insert(t.nodes.end(), c.nodes.begin(), c.nodes.end());
    return t;
}

double eval_expr(const ExprTree& t, std::span<const double> x) {
    if (t.nodes.empty()) throw std::invalid_argument("eval_expr: empty tree");
    std::size_t i = 0;
    return eval_at(t.nodes, i, x);
}

std::string render(const ExprTree& t, const std::vector<std::string>& names) {
    std::string out;
    std::size_t i = 0;
    render_at(t, i, names, out);
    return out;
}

ExprTree parse_expr(const std::string& text, const std::vector<std::string>& names) {
    return Parser(text, names).parse();
}

void RegressionData::validate() const {
    if (X.rows() == 0 || X.cols() == 0) throw std::invalid_argument("RegressionData: empty design");
    if (y.size() != X.rows()) throw std::invalid_argument("RegressionData: target length does not match rows");
    if (!X.allFinite() || !y.allFinite()) throw std::invalid_argument("RegressionData: non-finite entries");
    if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != X.cols()) {
        throw std::invalid_argument("RegressionData: feature_names size does not match columns");
    }
}

double MultigeneModel::predict(std::span<const double> x) const {
    double v = bias;
    for (std::size_t g = 0; g < genes.size(); ++g) v += weights.at(g) * eval_expr(genes[g], x);
    return v;
}

std::size_t MultigeneModel::complexity() const {
    std::size_t n = 0;
    for (const ExprTree& g : genes) n += g.size();
    return n;
}

std::string MultigeneModel::render(const std::vector<std::string>& names) const {
    std::string out = fmt17(bias);
    for (std::size_t g = 0; g < genes.size(); ++g) {
        out += " + " + fmt17(weights.at(g)) + " * " + gp::render(genes[g], names);
    }
    return out;
}

Eigen::MatrixXd gene_outputs(const std::vector<ExprTree>& genes, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd G(X.rows(), static_cast<Eigen::Index>(genes.size()));
    std::vector<double> row(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        for (Eigen::Index c = 0; c < X.cols(); ++c) row[static_cast<std::size_t>(c)] = X(r, c);
        for (std::size_t g = 0; g < genes.size(); ++g) G(r, static_cast<Eigen::Index>(g)) = eval_expr(genes[g], row);
    }
    return G;
}

namespace {

std::pair<double, std::vector<double>> fit_outputs(const Eigen::MatrixXd& G, const Eigen::VectorXd& y) {
    Eigen::MatrixXd A(G.rows(), G.cols() + 1);
    A.col(0).setOnes();
    A.rightCols(G.cols()) = G;
    const Eigen::VectorXd coef = A.completeOrthogonalDecomposition().solve(y);
    std::vector<double> w(coef.data() + 1, coef.data() + coef.size());
    return {coef(0), std::move(w)};
}

double mae_of(const Eigen::MatrixXd& G, double bias, const std::vector<double>& w, const Eigen::VectorXd& y) {
    const Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    const Eigen::VectorXd pred = (G * wv).array() + bias;
    return (pred - y).cwiseAbs().mean();
}

}  // namespace

std::pair<double, std::vector<double>> fit_gene_weights(const std::vector<ExprTree>& genes, const RegressionData& data) {
    data.validate();
    if (genes.empty()) throw std::invalid_argument("fit_gene_weights: no genes");
    return fit_outputs(gene_outputs(genes, data.X), data.y);
}

double fitness_mae(const MultigeneModel& m, const RegressionData& data) {
    data.validate();
    if (m.weights.size() != m.genes.size()) throw std::invalid_argument("fitness_mae: one weight per gene required");
    return mae_of(gene_outputs(m.genes, data.X), m.bias, m.weights, data.y);
}

void GpConfig::validate() const {
    auto bad = [](const std::string& what) { throw std::invalid_argument("GpConfig: " + what); };
    if (population < 2) bad("population must be at least 2");
    if (tournament < 1 || tournament > population) bad("tournament must lie in [1, population]");
    if (max_depth < 1) bad("max_depth must be positive");
    if (max_genes < 1) bad("max_genes must be positive");
    if (generations < 0) bad("generations must be nonnegative");
    if (function_set.empty()) bad("empty function set");
    for (Op op : function_set) {
        if (arity(op) == 0) bad("function set may not contain terminals");
    }
    if (init_min_depth < 1 || init_min_depth > init_max_depth || init_max_depth > max_depth) {
        bad("need 1 <= init_min_depth <= init_max_depth <= max_depth");
    }
    if (mutation_max_depth < 1) bad("mutation_max_depth must be positive");
    if (!(const_min < const_max)) bad("const_min must be below const_max");
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(const_probability) || !prob(crossover_rate) || !prob(mutation_rate) || !prob(high_level_rate)) {
        bad("probabilities must lie in [0, 1]");
    }
    if (crossover_rate + mutation_rate > 1.0 + 1e-12) bad("crossover_rate + mutation_rate exceeds 1");
    if (!(elite_fraction >= 0.0 && elite_fraction < 1.0)) bad("elite_fraction must lie in [0, 1)");
    if (!(gene_limit > 0.0)) bad("gene_limit must be positive");
}

namespace {

void grow(Rng& rng, const GpConfig& cfg, int n_features, int depth, bool full, std::vector<Node>& out) {
    const std::size_t n_terminals = static_cast<std::size_t>(n_features) + 1;
    bool terminal = depth <= 1;
    if (!terminal && !full) {
        std::uniform_int_distribution<std::size_t> pick(0, cfg.function_set.size() + n_terminals - 1);
        terminal = pick(rng) >= cfg.function_set.size();
    }
    if (terminal) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        if (u(rng) < cfg.const_probability || n_features == 0) {
            std::uniform_real_distribution<double> c(cfg.const_min, cfg.const_max);
            out.push_back(Node{Op::Const, 0, c(rng)});
        } else {
            std::uniform_int_distribution<int> f(0, n_features - 1);
            out.push_back(Node{Op::Feature, f(rng), 0.0});
        }
        return;
    }
    std::uniform_int_distribution<std::size_t> pick(0, cfg.function_set.size() - 1);
    const Op op = cfg.function_set[pick(rng)];
    out.push_back(Node{op, 0, 0.0});
    for (int k = 0; k < arity(op); ++k) grow(rng, cfg, n_features, depth - 1, full, out);
}

}  // namespace

ExprTree random_tree(Rng& rng, const GpConfig& cfg, int n_features, int depth, bool full) {
    if (depth < 1) throw std::invalid_argument("random_tree: depth must be positive");
    ExprTree t;
    grow(rng, cfg, n_features, depth, full, t.nodes);
    return t;
}

std::pair<ExprTree, ExprTree> crossover_at(const ExprTree& a, std::size_t i, const ExprTree& b, std::size_t j,
                                           int max_depth) {
    const std::size_t ea = a.subtree_end(i);
    const std::size_t eb = b.subtree_end(j);
    ExprTree c1;
    ExprTree c2;
    c1.nodes.reserve(a.size() - (ea - i) + (eb - j));
    c1.nodes.insert(c1.nodes.end(), a.nodes.begin(), a.nodes.begin() + static_cast<std::ptrdiff_t>(i));
    c1.nodes.insert(c1.nodes.end(), b.nodes.begin() + static_cast<std::ptrdiff_t>(j),
                    b.nodes.begin() + static_cast<std::ptrdiff_t>(eb));
    c1.nodes.insert(c1.nodes.end(), a.nodes.begin() + static_cast<std::ptrdiff_t>(ea), a.nodes.end());
    c2.nodes.insert(c2.nodes.end(), b.nodes.begin(), b.nodes.begin() + static_cast<std::ptrdiff_t>(j));
    c2.nodes.insert(c2.nodes.end(), a.nodes.begin() + static_cast<std::ptrdiff_t>(i),
                    a.nodes.begin() + static_cast<std::ptrdiff_t>(ea));
    c2.nodes.insert(c2.nodes.end(), b.nodes.begin() + static_cast<std::ptrdiff_t>(eb), b.nodes.end());
    if (c1.depth() > max_depth || c2.depth() > max_depth) return {a, b};
    return {std::move(c1), std::move(c2)};
}

std::pair<ExprTree, ExprTree> crossover(const ExprTree& a, const ExprTree& b, Rng& rng, int max_depth) {
    std::uniform_int_distribution<std::size_t> pa(0, a.size() - 1);
    std::uniform_int_distribution<std::size_t> pb(0, b.size() - 1);
    const std::size_t i = pa(rng);
    const std::size_t j = pb(rng);
    return crossover_at(a, i, b, j, max_depth);
}

ExprTree mutate(const ExprTree& t, Rng& rng, const GpConfig& cfg, int n_features) {
    std::uniform_int_distribution<std::size_t> pick(0, t.size() - 1);
    const std::size_t i = pick(rng);
    const std::size_t e = t.subtree_end(i);
    const int room = std::max(1, cfg.max_depth - t.depth_of(i) + 1);
    std::uniform_int_distribution<int> dd(1, std::min(room, cfg.mutation_max_depth));
    const ExprTree fresh = random_tree(rng, cfg, n_features, dd(rng), false);
    ExprTree out;
    out.nodes.insert(out.nodes.end(), t.nodes.begin(), t.nodes.begin() + static_cast<std::ptrdiff_t>(i));
    out.nodes.insert(out.nodes.end(), fresh.nodes.begin(), fresh.nodes.end());
    out.nodes.insert(out.nodes.end(), t.nodes.begin() + static_cast<std::ptrdiff_t>(e), t.nodes.end());
    return out;
}

std::vector<std::size_t> pareto_front(const std::vector<std::pair<double, std::size_t>>& points) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (std::isfinite(points[k].first)) idx.push_back(k);
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (points[a].second != points[b].second) return points[a].second < points[b].second;
        return points[a].first < points[b].first;
    });
    std::vector<std::size_t> front;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k : idx) {
        if (points[k].first < best) {
            front.push_back(k);
            best = points[k].first;
        }
    }
    return front;
}

namespace {

void score(Individual& ind, const RegressionData& data, const GpConfig& cfg) {
    ind.complexity = ind.model.complexity();
    const Eigen::MatrixXd G = gene_outputs(ind.model.genes, data.X);
    if (!G.allFinite() || (G.size() > 0 && G.cwiseAbs().maxCoeff() > cfg.gene_limit)) {
        ind.model.bias = 0.0;
        ind.model.weights.assign(ind.model.genes.size(), 0.0);
        ind.fitness = std::numeric_limits<double>::infinity();
        return;
    }
    auto [bias, w] = fit_outputs(G, data.y);
    ind.model.bias = bias;
    ind.model.weights = std::move(w);
    const double mae = mae_of(G, ind.model.bias, ind.model.weights, data.y);
    ind.fitness = std::isfinite(mae) ? mae : std::numeric_limits<double>::infinity();
}

bool better(const Individual& a, const Individual& b) {
    if (a.fitness != b.fitness) return a.fitness < b.fitness;
    return a.complexity < b.complexity;
}

void update_archive(std::vector<ParetoPoint>& archive, const std::vector<Individual>& pop) {
    std::vector<std::pair<double, std::size_t>> pts;
    pts.reserve(archive.size() + pop.size());
    for (const ParetoPoint& p : archive) pts.emplace_back(p.fitness, p.complexity);
    for (const Individual& ind : pop) pts.emplace_back(ind.fitness, ind.complexity);
    const std::vector<std::size_t> keep = pareto_front(pts);
    std::vector<ParetoPoint> next;
    next.reserve(keep.size());
    for (std::size_t k : keep) {
        if (k < archive.size()) {
            next.push_back(archive[k]);
        } else {
            const Individual& ind = pop[k - archive.size()];
            next.push_back({ind.model, ind.fitness, ind.complexity});
        }
    }
    archive = std::move(next);
}

}  // namespace

GpResult evolve(const RegressionData& data, const GpConfig& cfg, const GenerationObserver& observer) {
    data.validate();
    cfg.validate();
    const int nf = static_cast<int>(data.X.cols());
    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    auto fresh_gene = [&]() {
        std::uniform_int_distribution<int> d(cfg.init_min_depth, cfg.init_max_depth);
        const int depth = d(rng);
        const bool full = u01(rng) < 0.5;
        return random_tree(rng, cfg, nf, depth, full);
    };

    std::vector<Individual> pop(static_cast<std::size_t>(cfg.population));
    std::uniform_int_distribution<int> gene_count(1, cfg.max_genes);
    for (Individual& ind : pop) {
        const int n = gene_count(rng);
        for (int g = 0; g < n; ++g) ind.model.genes.push_back(fresh_gene());
        score(ind, data, cfg);
    }

    GpResult res;
    auto record = [&](int gen) {
        update_archive(res.archive, pop);
        const auto best = std::min_element(pop.begin(), pop.end(), better);
        res.history.push_back(best->fitness);
        if (observer) observer(gen, pop, res.archive);
    };
    record(0);

    std::uniform_int_distribution<std::size_t> any(0, pop.size() - 1);
    auto tournament = [&]() -> const Individual& {
        std::size_t best = any(rng);
        for (int k = 1; k < cfg.tournament; ++k) {
            const std::size_t c = any(rng);
            if (better(pop[c], pop[best])) best = c;
        }
        return pop[best];
    };
    auto pick_gene = [&](const MultigeneModel& m) {
        std::uniform_int_distribution<std::size_t> g(0, m.genes.size() - 1);
        return g(rng);
    };

    const auto n_elite = static_cast<std::size_t>(std::ceil(cfg.elite_fraction * cfg.population));
    for (int gen = 1; gen <= cfg.generations; ++gen) {
        std::vector<std::size_t> order(pop.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return better(pop[a], pop[b]); });

        std::vector<Individual> next;
        next.reserve(pop.size());
        for (std::size_t k = 0; k < std::min(n_elite, pop.size()); ++k) next.push_back(pop[order[k]]);
        const std::size_t first_new = next.size();

        while (next.size() < pop.size()) {
            const double r = u01(rng);
            if (r < cfg.crossover_rate) {
                MultigeneModel a = tournament().model;
                MultigeneModel b = tournament().model;
                const std::size_t ga = pick_gene(a);
                const std::size_t gb = pick_gene(b);
                if (u01(rng) < cfg.high_level_rate) {
                    // whole-gene exchange; occasionally move a gene so gene counts can change
                    if (u01(rng) < 0.5 && b.genes.size() > 1 && static_cast<int>(a.genes.size()) < cfg.max_genes) {
                        a.genes.push_back(b.genes[gb]);
                        b.genes.erase(b.genes.begin() + static_cast<std::ptrdiff_t>(gb));
                    } else {
                        std::swap(a.genes[ga], b.genes[gb]);
                    }
                } else {
                    auto [c1, c2] = crossover(a.genes[ga], b.genes[gb], rng, cfg.max_depth);
                    a.genes[ga] = std::move(c1);
                    b.genes[gb] = std::move(c2);
                }
                next.push_back({std::move(a), 0.0, 0});
                if (next.size() < pop.size()) next.push_back({std::move(b), 0.0, 0});
            } else if (r < cfg.crossover_rate + cfg.mutation_rate) {
                MultigeneModel a = tournament().model;
                const std::size_t ga = pick_gene(a);
                a.genes[ga] = mutate(a.genes[ga], rng, cfg, nf);
                next.push_back({std::move(a), 0.0, 0});
            } else {
                next.push_back(tournament());
            }
        }
        for (std::size_t k = first_new; k < next.size(); ++k) score(next[k], data, cfg);
        pop = std::move(next);
        record(gen);
    }

    if (res.archive.empty()) {
        throw std::runtime_error("evolve: no individual produced a finite fitness");
    }
    const ParetoPoint& best = res.archive.back();  // lowest fitness sits at the high-complexity end
    res.best = best.model;
    res.best_fitness = best.fitness;
    return res;
}

}  // namespace nyqtune::gp
