#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nyqtune::gp {

enum class Op : std::uint8_t {
    Add,
    Sub,
    Mul,
    PDiv,
    PSqrt,
    Abs,
    Sin,
    Cos,
    Tanh,
    PLog,
    Exp,
    Square,
    Root4,
    Feature,
    Const,
};

int arity(Op op);
std::string op_name(Op op);
Op parse_op(const std::string& name);  // function symbols only
const std::vector<Op>& default_function_set();

struct Node {
    Op op = Op::Const;
    int feature = 0;     // Op::Feature
    double value = 0.0;  // Op::Const

    friend bool operator==(const Node&, const Node&) = default;
};

/// Expression tree stored in prefix order. Root sits at depth 1.
struct ExprTree {
    std::vector<Node> nodes;

    std::size_t size() const { return nodes.size(); }
    int depth() const;
    /// One past the last node of the subtree rooted at `i`.
    std::size_t subtree_end(std::size_t i) const;
    /// Depth of node `i` (root = 1).
    int depth_of(std::size_t i) const;
    bool valid() const;  // arities consistent, single tree

    static ExprTree feature(int index);
    static ExprTree constant(double v);
    static ExprTree apply(Op op, const std::vector<ExprTree>& children);

    friend bool operator==(const ExprTree&, const ExprTree&) = default;
};

/// Total evaluation: protected division, sqrt and log; any non-finite node value becomes 0.
double eval_expr(const ExprTree& t, std::span<const double> x);

/// Fully parenthesised infix with %.17g constants; `names` label the features.
std::string render(const ExprTree& t, const std::vector<std::string>& names);
/// Inverse of render(). Throws std::invalid_argument on malformed input.
ExprTree parse_expr(const std::string& text, const std::vector<std::string>& names);

struct RegressionData {
    Eigen::MatrixXd X;  // rows x features
    Eigen::VectorXd y;
    std::vector<std::string> feature_names;

    Eigen::Index rows() const { return X.rows(); }
    void validate() const;
};

struct MultigeneModel {
    std::vector<ExprTree> genes;
    double bias = 0.0;
    std::vector<double> weights;

    double predict(std::span<const double> x) const;
    std::size_t complexity() const;  // total node count
    std::string render(const std::vector<std::string>& names) const;
};

/// Gene outputs, one column per gene.
Eigen::MatrixXd gene_outputs(const std::vector<ExprTree>& genes, const Eigen::MatrixXd& X);

/// Least squares of y on [1, gene outputs]; minimum-norm when rank deficient.
std::pair<double, std::vector<double>> fit_gene_weights(const std::vector<ExprTree>& genes, const RegressionData& data);

double fitness_mae(const MultigeneModel& m, const RegressionData& data);

struct GpConfig {
    int population = 500;
    int tournament = 3;
    int max_depth = 7;
    int max_genes = 4;
    int generations = 100;
    std::vector<Op> function_set = default_function_set();
    std::uint64_t seed = 1;

    int init_min_depth = 2;
    int init_max_depth = 6;
    int mutation_max_depth = 4;
    double const_min = -2.0;
    double const_max = 2.0;
    double const_probability = 0.25;  // terminal draws that are constants
    double crossover_rate = 0.84;
    double mutation_rate = 0.14;      // remainder is straight reproduction
    double high_level_rate = 0.2;     // share of crossovers that swap whole genes
    double elite_fraction = 0.05;
    double gene_limit = 1e10;         // larger gene outputs invalidate an individual

    void validate() const;
};

using Rng = std::mt19937_64;

/// Grow (full = false) or full tree of exactly/at most `depth` levels.
ExprTree random_tree(Rng& rng, const GpConfig& cfg, int n_features, int depth, bool full);

/// Subtree exchange at uniformly chosen nodes; parents pass through when an offspring exceeds max_depth.
std::pair<ExprTree, ExprTree> crossover(const ExprTree& a, const ExprTree& b, Rng& rng, int max_depth);
/// Same, at fixed node positions `i` of a and `j` of b.
std::pair<ExprTree, ExprTree> crossover_at(const ExprTree& a, std::size_t i, const ExprTree& b, std::size_t j,
                                           int max_depth);

/// Replaces one uniformly chosen node with a fresh grow subtree that keeps the depth bound.
ExprTree mutate(const ExprTree& t, Rng& rng, const GpConfig& cfg, int n_features);

struct ParetoPoint {
    MultigeneModel model;
    double fitness = 0.0;
    std::size_t complexity = 0;
};

/// Indices of the non-dominated points (both coordinates minimised), sorted by complexity.
/// Of several identical points only the first is kept.
std::vector<std::size_t> pareto_front(const std::vector<std::pair<double, std::size_t>>& points);

struct Individual {
    MultigeneModel model;
    double fitness = 0.0;
    std::size_t complexity = 0;
};

using GenerationObserver =
    std::function<void(int generation, const std::vector<Individual>& population, const std::vector<ParetoPoint>& archive)>;

struct GpResult {
    MultigeneModel best;
    double best_fitness = 0.0;
    std::vector<ParetoPoint> archive;  // sorted by complexity
    std::vector<double> history;       // best fitness per generation (generation 0 = initial population)
};

/// Generational multigene GP with tournament selection and elitism. Deterministic per seed.
GpResult evolve(const RegressionData& data, const GpConfig& cfg, const GenerationObserver& observer = {});

}  // namespace nyqtune::gp
