#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>

#include "hcam/dgp.hpp"
#include "hcam/graphs.hpp"
#include "hcam/rng.hpp"

namespace hcam {

// Strictly positive probability table over a product of finite alphabets.
// Layout: index = sum_i x_i * stride_i with the last variable fastest.
class DiscreteDist {
  public:
    DiscreteDist(std::vector<int> alphabets, std::vector<double> probs);

    int dim() const { return static_cast<int>(alphabets_.size()); }
    const std::vector<int>& alphabets() const { return alphabets_; }
    const std::vector<double>& probs() const { return probs_; }
    std::size_t table_size() const { return probs_.size(); }

    std::size_t index_of(const std::vector<int>& x) const;
    void assignment_of(std::size_t idx, std::vector<int>& x) const;

    // Marginal over the variables in `keep` (ascending), summing out the rest.
    DiscreteDist marginal(const VertexSet& keep) const;

  private:
    std::vector<int> alphabets_;
    std::vector<double> probs_;
    std::vector<std::size_t> strides_;
};

// Zero-marginal functional-ANOVA decomposition of log p under the uniform
// averaging measure; comps[mask] is the component table over the variables in
// `mask` (ascending order, last fastest). comps[0] holds the constant.
struct AnovaDecomposition {
    std::vector<int> alphabets;
    std::vector<std::vector<double>> comps;  // indexed by subset mask

    double max_abs(std::uint32_t mask) const;
    double rms(std::uint32_t mask) const;
};

AnovaDecomposition anova_log_decompose(const DiscreteDist& dist);

// Reconstruction sum_S theta_S(x_S) evaluated on the full table (test hook).
std::vector<double> anova_reconstruct(const AnovaDecomposition& dec);

// True iff the top component theta_T of log p(x_T | z) vanishes for every z.
// |T| = 2 with conditioning reduces to classical conditional independence.
bool multi_independent(const DiscreteDist& dist, const VertexSet& t, const VertexSet& z);

// RMS under p of sum_{S >= T} theta_S; the higher-order information of T.
double omega_T(const DiscreteDist& dist, const VertexSet& t);

// Monte Carlo RMS of the mixed second partial d^2 log p / dx_i dx_j,
// estimated by a 4-point central stencil with step 1e-3 * scale per axis.
double generalized_precision(const std::function<double(const Eigen::VectorXd&)>& logp, int i,
                             int j, const std::vector<Eigen::VectorXd>& points);

// Theta table attached to a hyperedge: values indexed by (x_head, x_tail)
// with the head slowest and tail coordinates ascending, last fastest.
struct ThetaTable {
    std::vector<double> values;
};

// Joint distribution of Eq.-8 form: per node, energies summed over its theta
// tables, normalized over the node given its parents, multiplied in
// topological order. Strictly positive by construction.
DiscreteDist hdag_discrete_dist(const HDag& h, const std::map<Hyperedge, ThetaTable>& tables,
                                const std::vector<int>& alphabets);

// Random parametrization with faithfulness enforced by rejection: each drawn
// maximal-hyperedge table must carry a top ANOVA component of RMS >= 0.05.
std::map<Hyperedge, ThetaTable> draw_faithful_tables(const HDag& h,
                                                     const std::vector<int>& alphabets, Rng& rng);

// All conditional multi-independences of a distribution: pairs (T, Z) over
// |T| >= 2, Z disjoint from T, encoded as (T mask, Z mask), sorted.
using Fingerprint = std::vector<std::pair<std::uint32_t, std::uint32_t>>;
Fingerprint multi_independence_fingerprint(const DiscreteDist& dist);

// Fingerprint stable across draws: intersection over `draws` faithful random
// parametrizations (binary alphabets).
Fingerprint structural_fingerprint(const HDag& h, int draws, Rng& rng);

// Exhaustive enumeration machinery (combinatorial guards: d <= 4).
std::vector<Dag> all_dags(int d);
std::vector<HDag> all_hdags(int d, int max_order);

struct HmecPartition {
    std::vector<std::vector<HDag>> classes;  // members sorted, classes sorted
};

HmecPartition enumerate_hmec(int d, int max_order);

// Body + multicollider key used for partitioning; stable string form.
std::string hmec_class_key(const HDag& h, int max_order);

// RMS over `points` of the |R|-th order mixed partial of the analytic log
// density, by nested central differences with step h per axis. The model's
// terms must be differentiable (no GP interpolants).
double mixed_partial_norm(const SemModel& model, const VertexSet& r,
                          const std::vector<Eigen::VectorXd>& points, double h = 1e-2);

}  // namespace hcam
