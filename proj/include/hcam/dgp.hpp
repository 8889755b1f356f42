#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <variant>

#include "hcam/graphs.hpp"
#include "hcam/rng.hpp"

namespace hcam {

// 1D function sampled from a squared-exponential GP on a fixed grid,
// evaluated by linear interpolation and extrapolated linearly outside.
struct GpInterp {
    std::vector<double> grid;    // strictly increasing
    std::vector<double> values;  // same length

    double operator()(double x) const;
};

// f(x_S) = coef * prod_{s in S} x_s, |S| >= 2.
struct Multilinear {
    double coef = 0.0;
};

// f(x) = coef * x; the degenerate one-argument multilinear term used for
// single-parent children in order >= 2 models.
struct LinearTerm {
    double coef = 0.0;
};

// Sum of Gaussian bumps; the C-infinity surrogate for GP draws used by the
// high-order derivative checks.
struct SmoothBumps {
    std::vector<double> amplitude, center, width;

    double operator()(double x) const;
    double derivative(double x) const;
};

struct ShapeFunction {
    VertexSet subset;  // the variables the term consumes
    std::variant<GpInterp, Multilinear, LinearTerm, SmoothBumps> fn;

    double eval(const Eigen::Ref<const Eigen::VectorXd>& x) const;  // full d-vector
    // d/dx_k of the term at x; GpInterp is piecewise linear and rejected here.
    double partial(const Eigen::Ref<const Eigen::VectorXd>& x, int k) const;
    bool differentiable() const;
};

// Per-node additive structural equations with Gaussian noise. Terms attach to
// the maximal hyperedges of the HDag.
class SemModel {
  public:
    SemModel(HDag hdag, std::map<Hyperedge, ShapeFunction> terms, std::vector<double> noise_vars);

    const HDag& hdag() const { return hdag_; }
    const std::map<Hyperedge, ShapeFunction>& terms() const { return terms_; }
    const std::vector<double>& noise_vars() const { return noise_vars_; }
    int dim() const { return hdag_.d; }

    // Sum of shape-function values feeding node j at x.
    double node_mean(int j, const Eigen::Ref<const Eigen::VectorXd>& x) const;

  private:
    HDag hdag_;
    std::map<Hyperedge, ShapeFunction> terms_;
    std::vector<double> noise_vars_;
    std::vector<std::vector<const ShapeFunction*>> by_node_;
    friend class SemSampler;
};

struct Dataset {
    Eigen::MatrixXd values;  // n x d
    std::uint64_t seed = 0;
    std::string config_hash;

    int n() const { return static_cast<int>(values.rows()); }
    int d() const { return static_cast<int>(values.cols()); }
};

// Random DAG: uniform permutation order, each order-respecting pair kept with
// p = 2 * avg_parents / (d - 1), so the expected edge total is avg_parents * d.
Dag sample_er_dag(int d, double avg_parents, Rng& rng);

// Hyperedge structure over a DAG: order 1 keeps singleton tails; order k in
// {2, 3} shuffles each child's parents and takes all cyclic windows of size k
// (whole parent set when it has at most k members). Hierarchically closed.
HDag sample_hdag(const Dag& g, int order, Rng& rng);

// Zero-mean GP draw: squared-exponential kernel (length scale 1, variance 1,
// jitter 1e-8) on 100 points over [-5, 5], via Cholesky factorization.
GpInterp sample_gp_function(Rng& rng);

// Multilinear coefficients for one child: raw magnitude ~ LogUniform[0.5, 2]
// with a random sign, scaled by 1 / (sqrt(m_{|S|}) * sqrt(#tails)) where
// m_1 = 1, m_2 = 3, m_3 = 15.
std::map<VertexSet, double> sample_multilinear_terms(int child,
                                                     const std::vector<VertexSet>& tails,
                                                     Rng& rng);

SmoothBumps sample_smooth_bumps(Rng& rng);

// Full generator pipeline: ER DAG -> HDag of the given order -> GP terms on
// singleton maximal tails, multilinear terms on larger ones, noise variances
// LogUniform[0.5, 2]. With smooth_singletons, singleton terms use SmoothBumps
// (and single-parent children in order >= 2 use SmoothBumps too).
SemModel sample_model(int d, double avg_parents, int order, Rng& rng,
                      bool smooth_singletons = false);

// Ancestral sampling in topological order.
Dataset generate(const SemModel& model, int n, Rng& rng);

// Exact joint log density: sum_j [ -0.5 log(2 pi s2_j) - (x_j - mu_j)^2 / (2 s2_j) ].
double analytic_log_density(const SemModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

// Closed-form gradient of the log density (differentiable models only).
Eigen::VectorXd analytic_log_density_gradient(const SemModel& model,
                                              const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace hcam
