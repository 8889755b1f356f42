#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <optional>

#include "hcam/dgp.hpp"
#include "hcam/graphs.hpp"

namespace hcam {

// Spline basis configuration. Each block carries a small ridge penalty plus a
// second-difference curvature penalty; the curvature penalty leaves constant,
// linear, and multilinear directions free, which keeps the fitted gain of a
// pure-noise block near the per-column overfit floor instead of growing with
// the block size.
struct BasisSpec {
    int knots_per_dim = 8;       // quantile breakpoints per coordinate
    int degree = 3;              // cubic B-splines
    double ridge_lambda = 1e-3;  // on all block coefficients, per-sample scale
    double smooth_lambda = 0.5;  // on second differences per dimension
    int max_tensor_order = 3;

    void validate() const;
};

// Cheap fits shrink the basis and raise the penalties during candidate
// scoring; committed fits use the full spec.
enum class Budget { Full, Cheap };

BasisSpec budgeted(const BasisSpec& spec, Budget budget);

// Number of basis columns per coordinate: knots + degree - 1.
int basis_cols_per_dim(const BasisSpec& spec);

// One fitted additive term: tensor B-spline coefficients plus the training
// knots and column means needed to reproduce its predictions.
struct FittedTerm {
    VertexSet tail;
    std::vector<std::vector<double>> knots;  // per coordinate, ascending
    std::vector<double> col_means;
    Eigen::VectorXd coefs;
};

struct NodeModel {
    int child = -1;
    std::map<VertexSet, FittedTerm> terms;
    double intercept = 0.0;
    double sigma2_hat = 0.0;

    // Term predictions on arbitrary data (column-centered at training means).
    Eigen::VectorXd term_values(const Dataset& data, const VertexSet& tail) const;
    Eigen::VectorXd predict(const Dataset& data) const;

    std::string serialize() const;
    static NodeModel deserialize(const std::string& text);
};

// Centered tensor design block for one tail.
struct DesignBlock {
    VertexSet tail;
    std::vector<std::vector<double>> knots;
    std::vector<double> col_means;
    Eigen::MatrixXd x;        // n x p, column-centered
    Eigen::MatrixXd penalty;  // p x p curvature penalty (second differences)
};

struct DesignInfo {
    std::vector<DesignBlock> blocks;
    std::vector<int> offsets;  // column offset per block
    int total_cols = 0;
};

// Per-tail tensor blocks with knots at empirical quantiles. Throws
// DegenerateColumn when a coordinate has fewer distinct values than knots.
DesignInfo build_design(const Dataset& data, const std::vector<VertexSet>& tails,
                        const BasisSpec& spec);

// Deterministic chunked A^T * B / n; identical result for any thread count.
Eigen::MatrixXd gram_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
// Serial reference for the same accumulation; kept for tests and the bench.
Eigen::MatrixXd gram_product_serial(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Incremental fitting context for one (child, budget, response). Blocks and
// pairwise gram products are cached so greedy candidate scoring stays cheap.
class NodeFitter {
  public:
    NodeFitter(const Dataset& data, int child, const BasisSpec& spec, Budget budget);
    NodeFitter(const Dataset& data, int child, const BasisSpec& spec, Budget budget,
               Eigen::VectorXd response);

    struct Fit {
        double sigma2 = 0.0;
        double intercept = 0.0;
        std::vector<std::pair<VertexSet, Eigen::VectorXd>> coef_blocks;
    };

    Fit fit(const std::vector<VertexSet>& tails);
    double sigma2(const std::vector<VertexSet>& tails);

    // Pre-materializes the block and its gram entries against `others`.
    void warm(const VertexSet& tail, const std::vector<VertexSet>& others);
    void evict(const VertexSet& tail);

    const DesignBlock& block(const VertexSet& tail);
    const Dataset& data() const { return data_; }
    int child() const { return child_; }
    const BasisSpec& effective_spec() const { return spec_; }

  private:
    const Eigen::MatrixXd& gram(const VertexSet& a, const VertexSet& b);
    const Eigen::VectorXd& yprod(const VertexSet& tail);

    const Dataset& data_;
    int child_;
    BasisSpec spec_;  // already budget-adjusted
    Eigen::VectorXd y_centered_;
    double y_mean_ = 0.0;
    double y_var_ = 0.0;
    std::map<VertexSet, DesignBlock> blocks_;
    std::map<std::pair<VertexSet, VertexSet>, Eigen::MatrixXd> grams_;
    std::map<VertexSet, Eigen::VectorXd> yprods_;
};

// Joint ridge fit of `child` on the given tails. sigma2_hat divides by n.
NodeModel fit_node(const Dataset& data, int child, const std::vector<VertexSet>& tails,
                   const BasisSpec& spec, Budget budget = Budget::Full);

// sigma2(base) - sigma2(base + candidate); exactly 0 when the candidate is
// already a base tail.
double score_gain(const Dataset& data, int child, const std::vector<VertexSet>& base_tails,
                  const VertexSet& candidate, const BasisSpec& spec,
                  Budget budget = Budget::Cheap);

// Empirical variance of a fitted term's predictions over `data`.
double term_variance(const NodeModel& model, const Dataset& data, const VertexSet& tail);

}  // namespace hcam
