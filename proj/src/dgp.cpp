#include "hcam/dgp.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>

namespace hcam {

namespace {

constexpr int kGpGridPoints = 100;
constexpr double kGpRange = 5.0;
constexpr double kGpJitter = 1e-8;

double require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw NumericalInstability(std::string(what) + ": non-finite value");
    return v;
}

}  // namespace

double GpInterp::operator()(double x) const {
    const std::size_t m = grid.size();
    if (x <= grid.front()) {
        const double slope = (values[1] - values[0]) / (grid[1] - grid[0]);
        return values[0] + slope * (x - grid[0]);
    }
    if (x >= grid.back()) {
        const double slope = (values[m - 1] - values[m - 2]) / (grid[m - 1] - grid[m - 2]);
        return values[m - 1] + slope * (x - grid[m - 1]);
    }
    const auto it = std::upper_bound(grid.begin(), grid.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
    const std::size_t lo = hi - 1;
    const double w = (x - grid[lo]) / (grid[hi] - grid[lo]);
    return values[lo] * (1.0 - w) + values[hi] * w;
}

double SmoothBumps::operator()(double x) const {
    double out = 0.0;
    for (std::size_t k = 0; k < amplitude.size(); ++k) {
        const double t = (x - center[k]) / width[k];
        out += amplitude[k] * std::exp(-0.5 * t * t);
    }
    return out;
}

double SmoothBumps::derivative(double x) const {
    double out = 0.0;
    for (std::size_t k = 0; k < amplitude.size(); ++k) {
        const double t = (x - center[k]) / width[k];
        out += amplitude[k] * std::exp(-0.5 * t * t) * (-t / width[k]);
    }
    return out;
}

double ShapeFunction::eval(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, GpInterp>) {
                return f(x[subset[0]]);
            } else if constexpr (std::is_same_v<T, SmoothBumps>) {
                return f(x[subset[0]]);
            } else if constexpr (std::is_same_v<T, LinearTerm>) {
                return f.coef * x[subset[0]];
            } else {
                double prod = f.coef;
                for (int s : subset) prod *= x[s];
                return prod;
            }
        },
        fn);
}

double ShapeFunction::partial(const Eigen::Ref<const Eigen::VectorXd>& x, int k) const {
    if (!set_contains(subset, k)) return 0.0;
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, GpInterp>) {
                throw NumericalInstability("ShapeFunction: GP interpolant is not differentiable");
            } else if constexpr (std::is_same_v<T, SmoothBumps>) {
                return f.derivative(x[subset[0]]);
            } else if constexpr (std::is_same_v<T, LinearTerm>) {
                return f.coef;
            } else {
                double prod = f.coef;
                for (int s : subset)
                    if (s != k) prod *= x[s];
                return prod;
            }
        },
        fn);
}

bool ShapeFunction::differentiable() const {
    return !std::holds_alternative<GpInterp>(fn);
}

SemModel::SemModel(HDag hdag, std::map<Hyperedge, ShapeFunction> terms,
                   std::vector<double> noise_vars)
    : hdag_(std::move(hdag)), terms_(std::move(terms)), noise_vars_(std::move(noise_vars)) {
    if (static_cast<int>(noise_vars_.size()) != hdag_.d)
        throw DimensionMismatch("SemModel: noise variance count != d");
    for (double v : noise_vars_)
        if (!(v > 0.0)) throw InvalidDensity("SemModel: noise variance must be positive");
    for (int j = 0; j < hdag_.d; ++j) {
        for (const auto& tail : hdag_.maximal_tails_of(j))
            if (!terms_.count(Hyperedge(tail, j)))
                throw DimensionMismatch("SemModel: missing term for a maximal hyperedge");
    }
    by_node_.assign(static_cast<std::size_t>(hdag_.d), {});
    for (auto& [edge, term] : terms_) {
        if (!hdag_.contains(edge)) throw DimensionMismatch("SemModel: term for unknown hyperedge");
        if (term.subset != edge.tail) throw DimensionMismatch("SemModel: term subset != tail");
        if (std::holds_alternative<Multilinear>(term.fn) && term.subset.size() < 2)
            throw DimensionMismatch("SemModel: multilinear term needs at least two variables");
        if (std::holds_alternative<Multilinear>(term.fn) &&
            std::get<Multilinear>(term.fn).coef == 0.0)
            throw InvalidDensity("SemModel: multilinear coefficient must be nonzero");
        if ((std::holds_alternative<GpInterp>(term.fn) ||
             std::holds_alternative<SmoothBumps>(term.fn) ||
             std::holds_alternative<LinearTerm>(term.fn)) &&
            term.subset.size() != 1)
            throw DimensionMismatch("SemModel: 1D shape on a non-singleton tail");
        by_node_[static_cast<std::size_t>(edge.head)].push_back(&term);
    }
}

double SemModel::node_mean(int j, const Eigen::Ref<const Eigen::VectorXd>& x) const {
    double mean = 0.0;
    for (const ShapeFunction* term : by_node_[static_cast<std::size_t>(j)]) mean += term->eval(x);
    return mean;
}

Dag sample_er_dag(int d, double avg_parents, Rng& rng) {
    if (d < 2) throw InvalidDensity("sample_er_dag: d < 2");
    if (avg_parents < 0.0 || avg_parents * d > d * (d - 1) / 2.0)
        throw InvalidDensity("sample_er_dag: density out of range");
    const double p = 2.0 * avg_parents / (d - 1);
    const std::vector<int> order = rng.permutation(d);
    std::set<std::pair<int, int>> edges;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (rng.uniform() < p) edges.insert({order[static_cast<std::size_t>(i)],
                                                 order[static_cast<std::size_t>(j)]});
    return Dag(d, std::move(edges));
}

HDag sample_hdag(const Dag& g, int order, Rng& rng) {
    if (order < 1 || order > 3) throw InvalidDensity("sample_hdag: order must be 1, 2, or 3");
    std::vector<Hyperedge> raw;
    for (int j = 0; j < g.d; ++j) {
        VertexSet pa = g.parents_of(j);
        const int m = static_cast<int>(pa.size());
        if (m == 0) continue;
        if (order == 1 || m == 1) {
            for (int v : pa) raw.push_back(Hyperedge({v}, j));
            continue;
        }
        std::vector<int> shuffled(pa.begin(), pa.end());
        rng.shuffle(shuffled);
        if (m <= order) {
            raw.push_back(Hyperedge(pa, j));
            continue;
        }
        // Consecutive windows of size `order` around the shuffled cycle; each
        // parent lands in `order` windows and duplicates collapse as sets.
        for (int start = 0; start < m; ++start) {
            VertexSet tuple;
            for (int k = 0; k < order; ++k)
                tuple.push_back(shuffled[static_cast<std::size_t>((start + k) % m)]);
            raw.push_back(Hyperedge(make_set(std::move(tuple)), j));
        }
    }
    return hierarchical_closure(raw, g.d);
}

GpInterp sample_gp_function(Rng& rng) {
    static const Eigen::MatrixXd chol = [] {
        Eigen::MatrixXd k(kGpGridPoints, kGpGridPoints);
        std::vector<double> grid(kGpGridPoints);
        for (int i = 0; i < kGpGridPoints; ++i)
            grid[static_cast<std::size_t>(i)] =
                -kGpRange + 2.0 * kGpRange * i / (kGpGridPoints - 1);
        for (int i = 0; i < kGpGridPoints; ++i)
            for (int j = 0; j < kGpGridPoints; ++j) {
                const double diff = grid[static_cast<std::size_t>(i)] - grid[static_cast<std::size_t>(j)];
                k(i, j) = std::exp(-0.5 * diff * diff) + (i == j ? kGpJitter : 0.0);
            }
        return Eigen::MatrixXd(k.llt().matrixL());
    }();

    GpInterp f;
    f.grid.resize(kGpGridPoints);
    for (int i = 0; i < kGpGridPoints; ++i)
        f.grid[static_cast<std::size_t>(i)] = -kGpRange + 2.0 * kGpRange * i / (kGpGridPoints - 1);
    Eigen::VectorXd z(kGpGridPoints);
    for (int i = 0; i < kGpGridPoints; ++i) z[i] = rng.normal();
    const Eigen::VectorXd v = chol * z;
    f.values.assign(v.data(), v.data() + kGpGridPoints);
    return f;
}

std::map<VertexSet, double> sample_multilinear_terms(int child,
                                                     const std::vector<VertexSet>& tails,
                                                     Rng& rng) {
    if (tails.empty()) throw InvalidDensity("sample_multilinear_terms: no tails");
    for (const auto& t : tails) {
        if (t.size() < 1 || t.size() > 3)
            throw InvalidDensity("sample_multilinear_terms: tail size out of range");
        if (set_contains(t, child))
            throw DimensionMismatch("sample_multilinear_terms: child inside tail");
    }
    // Gaussian product moments per tail size: Var[e1] = 1, Var[e1 e2] = 3,
    // Var[e1 e2 e3] = 15, as stated for the generator.
    const double moments[4] = {0.0, 1.0, 3.0, 15.0};
    const double count_scale = std::sqrt(static_cast<double>(tails.size()));
    std::map<VertexSet, double> out;
    for (const auto& t : tails) {
        const double raw = rng.log_uniform(0.5, 2.0) * rng.random_sign();
        out[t] = raw / (std::sqrt(moments[t.size()]) * count_scale);
    }
    return out;
}

SmoothBumps sample_smooth_bumps(Rng& rng) {
    SmoothBumps f;
    for (int k = 0; k < 5; ++k) {
        f.amplitude.push_back(rng.uniform(0.5, 1.5) * rng.random_sign());
        f.center.push_back(rng.uniform(-3.0, 3.0));
        f.width.push_back(rng.uniform(0.8, 1.6));
    }
    return f;
}

SemModel sample_model(int d, double avg_parents, int order, Rng& rng, bool smooth_singletons) {
    const Dag g = sample_er_dag(d, avg_parents, rng);
    const HDag h = sample_hdag(g, order, rng);

    std::map<Hyperedge, ShapeFunction> terms;
    for (int j = 0; j < d; ++j) {
        std::vector<VertexSet> singles, multis;
        for (const auto& tail : h.maximal_tails_of(j))
            (tail.size() == 1 ? singles : multis).push_back(tail);
        std::sort(singles.begin(), singles.end());
        std::sort(multis.begin(), multis.end());
        for (const auto& tail : singles) {
            ShapeFunction sf;
            sf.subset = tail;
            if (order >= 2) {
                // Single-parent children in higher-order models keep the
                // degenerate one-variable multilinear term.
                const auto coefs = sample_multilinear_terms(j, {tail}, rng);
                sf.fn = LinearTerm{coefs.at(tail)};
            } else if (smooth_singletons) {
                sf.fn = sample_smooth_bumps(rng);
            } else {
                sf.fn = sample_gp_function(rng);
            }
            terms.emplace(Hyperedge(tail, j), std::move(sf));
        }
        if (!multis.empty()) {
            const auto coefs = sample_multilinear_terms(j, multis, rng);
            for (const auto& tail : multis) {
                ShapeFunction sf;
                sf.subset = tail;
                sf.fn = Multilinear{coefs.at(tail)};
                terms.emplace(Hyperedge(tail, j), std::move(sf));
            }
        }
    }
    std::vector<double> noise(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) noise[static_cast<std::size_t>(j)] = rng.log_uniform(0.5, 2.0);
    return SemModel(h, std::move(terms), std::move(noise));
}

Dataset generate(const SemModel& model, int n, Rng& rng) {
    const int d = model.dim();
    const std::vector<int> topo = reduced_dag(model.hdag()).topological_order();
    Dataset data;
    data.values.resize(n, d);
    for (int j : topo) {
        const double sd = std::sqrt(model.noise_vars()[static_cast<std::size_t>(j)]);
        for (int i = 0; i < n; ++i) {
            const double mean = model.node_mean(j, data.values.row(i));
            data.values(i, j) = require_finite(mean + sd * rng.normal(), "generate");
        }
    }
    return data;
}

double analytic_log_density(const SemModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
    double logp = 0.0;
    for (int j = 0; j < model.dim(); ++j) {
        const double s2 = model.noise_vars()[static_cast<std::size_t>(j)];
        const double resid = x[j] - model.node_mean(j, x);
        logp += -0.5 * std::log(2.0 * std::numbers::pi * s2) - resid * resid / (2.0 * s2);
    }
    return logp;
}

Eigen::VectorXd analytic_log_density_gradient(const SemModel& model,
                                              const Eigen::Ref<const Eigen::VectorXd>& x) {
    const int d = model.dim();
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(d);
    for (int j = 0; j < d; ++j) {
        const double s2 = model.noise_vars()[static_cast<std::size_t>(j)];
        const double resid = x[j] - model.node_mean(j, x);
        grad[j] += -resid / s2;
        for (const auto& [edge, term] : model.terms()) {
            if (edge.head != j) continue;
            for (int k : edge.tail) grad[k] += (resid / s2) * term.partial(x, k);
        }
    }
    return grad;
}

}  // namespace hcam
