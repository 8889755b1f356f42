#include "hcam/gam.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hcam/parallel.hpp"

namespace hcam {

namespace {

constexpr int kGramChunk = 2048;

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Quantile breakpoints with clamped boundaries; duplicate quantiles are
// jittered so the knot sequence is strictly increasing.
std::vector<double> quantile_knots(const Eigen::VectorXd& col, int knots) {
    const int n = static_cast<int>(col.size());
    std::vector<double> sorted(col.data(), col.data() + n);
    std::sort(sorted.begin(), sorted.end());
    int distinct = n > 0 ? 1 : 0;
    for (int i = 1; i < n; ++i)
        if (sorted[static_cast<std::size_t>(i)] != sorted[static_cast<std::size_t>(i - 1)]) ++distinct;
    if (distinct < knots)
        throw DegenerateColumn("build_design: column has fewer distinct values than knots");

    std::vector<double> out(static_cast<std::size_t>(knots));
    for (int k = 0; k < knots; ++k) {
        const double q = static_cast<double>(k) / (knots - 1);
        const double pos = q * (n - 1);
        const int lo = static_cast<int>(pos);
        const int hi = std::min(lo + 1, n - 1);
        const double w = pos - lo;
        out[static_cast<std::size_t>(k)] =
            sorted[static_cast<std::size_t>(lo)] * (1.0 - w) + sorted[static_cast<std::size_t>(hi)] * w;
    }
    for (int k = 1; k < knots; ++k)
        if (out[static_cast<std::size_t>(k)] <= out[static_cast<std::size_t>(k - 1)])
            out[static_cast<std::size_t>(k)] =
                out[static_cast<std::size_t>(k - 1)] +
                1e-9 * (1.0 + std::abs(out[static_cast<std::size_t>(k - 1)]));
    return out;
}

// Padded (clamped) knot vector for degree p over breakpoints t.
std::vector<double> padded_knots(const std::vector<double>& t, int degree) {
    std::vector<double> out;
    out.reserve(t.size() + 2 * static_cast<std::size_t>(degree));
    for (int i = 0; i < degree; ++i) out.push_back(t.front());
    out.insert(out.end(), t.begin(), t.end());
    for (int i = 0; i < degree; ++i) out.push_back(t.back());
    return out;
}

// Nonzero B-spline values at x: writes degree+1 values, returns first index.
int bspline_nonzero(const std::vector<double>& padded, int degree, double x, double* vals) {
    const int m = static_cast<int>(padded.size());
    const double lo = padded[static_cast<std::size_t>(degree)];
    const double hi = padded[static_cast<std::size_t>(m - degree - 1)];
    x = std::clamp(x, lo, hi);
    // Knot span: largest s with padded[s] <= x, within [degree, m - degree - 2].
    int s = static_cast<int>(std::upper_bound(padded.begin() + degree, padded.end() - degree, x) -
                             padded.begin()) - 1;
    s = std::clamp(s, degree, m - degree - 2);

    double left[4], right[4];
    vals[0] = 1.0;
    for (int j = 1; j <= degree; ++j) {
        left[j] = x - padded[static_cast<std::size_t>(s + 1 - j)];
        right[j] = padded[static_cast<std::size_t>(s + j)] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double denom = right[r + 1] + left[j - r];
            const double temp = denom == 0.0 ? 0.0 : vals[r] / denom;
            vals[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        vals[j] = saved;
    }
    return s - degree;
}

Eigen::MatrixXd second_difference_penalty(int p) {
    if (p < 3) return Eigen::MatrixXd::Zero(p, p);
    Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(p - 2, p);
    for (int r = 0; r < p - 2; ++r) {
        d2(r, r) = 1.0;
        d2(r, r + 1) = -2.0;
        d2(r, r + 2) = 1.0;
    }
    return d2.transpose() * d2;
}

// Tensor block for one tail; columns indexed row-major over per-dim bases.
DesignBlock build_block(const Dataset& data, const VertexSet& tail, const BasisSpec& spec) {
    const int n = data.n();
    const int degree = spec.degree;
    const int per_dim = basis_cols_per_dim(spec);
    const int k = static_cast<int>(tail.size());

    long long cols = 1;
    for (int i = 0; i < k; ++i) cols *= per_dim;
    if (cols > 10000) throw DimensionMismatch("build_design: tensor basis exceeds 10^4 columns");

    DesignBlock block;
    block.tail = tail;
    std::vector<std::vector<double>> padded(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        block.knots.push_back(quantile_knots(data.values.col(tail[static_cast<std::size_t>(i)]),
                                             spec.knots_per_dim));
        padded[static_cast<std::size_t>(i)] = padded_knots(block.knots.back(), degree);
    }

    block.x = Eigen::MatrixXd::Zero(n, static_cast<int>(cols));
    std::vector<int> first(static_cast<std::size_t>(k));
    std::vector<std::array<double, 4>> vals(static_cast<std::size_t>(k));
    std::vector<int> sel(static_cast<std::size_t>(k), 0);
    for (int row = 0; row < n; ++row) {
        for (int i = 0; i < k; ++i)
            first[static_cast<std::size_t>(i)] =
                bspline_nonzero(padded[static_cast<std::size_t>(i)], degree,
                                data.values(row, tail[static_cast<std::size_t>(i)]),
                                vals[static_cast<std::size_t>(i)].data());
        // Only (degree+1)^k entries are nonzero per row.
        std::fill(sel.begin(), sel.end(), 0);
        while (true) {
            double prod = 1.0;
            long long col = 0;
            for (int i = 0; i < k; ++i) {
                prod *= vals[static_cast<std::size_t>(i)][static_cast<std::size_t>(sel[static_cast<std::size_t>(i)])];
                col = col * per_dim + first[static_cast<std::size_t>(i)] + sel[static_cast<std::size_t>(i)];
            }
            block.x(row, static_cast<int>(col)) = prod;
            int i = k - 1;
            for (; i >= 0; --i) {
                if (++sel[static_cast<std::size_t>(i)] <= degree) break;
                sel[static_cast<std::size_t>(i)] = 0;
            }
            if (i < 0) break;
        }
    }

    block.col_means.resize(static_cast<std::size_t>(cols));
    for (int c = 0; c < static_cast<int>(cols); ++c) {
        const double mean = block.x.col(c).mean();
        block.col_means[static_cast<std::size_t>(c)] = mean;
        block.x.col(c).array() -= mean;
    }

    // Curvature penalty: sum over dimensions of I x ... x D2'D2 x ... x I.
    const Eigen::MatrixXd pdim = second_difference_penalty(per_dim);
    block.penalty = Eigen::MatrixXd::Zero(static_cast<int>(cols), static_cast<int>(cols));
    for (int axis = 0; axis < k; ++axis) {
        long long outer = 1, inner = 1;
        for (int i = 0; i < axis; ++i) outer *= per_dim;
        for (int i = axis + 1; i < k; ++i) inner *= per_dim;
        for (long long o = 0; o < outer; ++o)
            for (int a = 0; a < per_dim; ++a)
                for (int b = 0; b < per_dim; ++b) {
                    if (pdim(a, b) == 0.0) continue;
                    for (long long in = 0; in < inner; ++in) {
                        const long long ra = (o * per_dim + a) * inner + in;
                        const long long cb = (o * per_dim + b) * inner + in;
                        block.penalty(static_cast<int>(ra), static_cast<int>(cb)) += pdim(a, b);
                    }
                }
    }
    return block;
}

Eigen::VectorXd term_values_from(const FittedTerm& term, const Dataset& data, int degree) {
    const int n = data.n();
    const int k = static_cast<int>(term.tail.size());
    const int per_dim = static_cast<int>(term.knots[0].size()) + degree - 1;
    std::vector<std::vector<double>> padded;
    for (const auto& kn : term.knots) padded.push_back(padded_knots(kn, degree));

    Eigen::VectorXd out(n);
    std::vector<int> first(static_cast<std::size_t>(k));
    std::vector<std::array<double, 4>> vals(static_cast<std::size_t>(k));
    std::vector<int> sel(static_cast<std::size_t>(k), 0);
    for (int row = 0; row < n; ++row) {
        double acc = 0.0;
        for (int i = 0; i < k; ++i)
            first[static_cast<std::size_t>(i)] =
                bspline_nonzero(padded[static_cast<std::size_t>(i)], degree,
                                data.values(row, term.tail[static_cast<std::size_t>(i)]),
                                vals[static_cast<std::size_t>(i)].data());
        std::fill(sel.begin(), sel.end(), 0);
        while (true) {
            double prod = 1.0;
            long long col = 0;
            for (int i = 0; i < k; ++i) {
                prod *= vals[static_cast<std::size_t>(i)][static_cast<std::size_t>(sel[static_cast<std::size_t>(i)])];
                col = col * per_dim + first[static_cast<std::size_t>(i)] + sel[static_cast<std::size_t>(i)];
            }
            acc += prod * term.coefs[static_cast<int>(col)];
            int i = k - 1;
            for (; i >= 0; --i) {
                if (++sel[static_cast<std::size_t>(i)] <= degree) break;
                sel[static_cast<std::size_t>(i)] = 0;
            }
            if (i < 0) break;
        }
        // Subtract the centered-column offset: sum of means * coefs.
        out[row] = acc;
    }
    double offset = 0.0;
    for (int c = 0; c < term.coefs.size(); ++c)
        offset += term.col_means[static_cast<std::size_t>(c)] * term.coefs[c];
    out.array() -= offset;
    return out;
}

}  // namespace

void BasisSpec::validate() const {
    if (knots_per_dim < 4) throw DimensionMismatch("BasisSpec: knots_per_dim < 4");
    if (degree != 3) throw DimensionMismatch("BasisSpec: only cubic splines are supported");
    if (ridge_lambda < 0.0 || smooth_lambda < 0.0)
        throw DimensionMismatch("BasisSpec: negative penalty");
    if (max_tensor_order < 1 || max_tensor_order > 3)
        throw DimensionMismatch("BasisSpec: max_tensor_order must be 1..3");
}

BasisSpec budgeted(const BasisSpec& spec, Budget budget) {
    if (budget == Budget::Full) return spec;
    BasisSpec cheap = spec;
    cheap.knots_per_dim = 5;
    cheap.ridge_lambda = spec.ridge_lambda * 10.0;
    cheap.smooth_lambda = spec.smooth_lambda * 10.0;
    return cheap;
}

int basis_cols_per_dim(const BasisSpec& spec) { return spec.knots_per_dim + spec.degree - 1; }

DesignInfo build_design(const Dataset& data, const std::vector<VertexSet>& tails,
                        const BasisSpec& spec) {
    spec.validate();
    DesignInfo info;
    int offset = 0;
    for (const auto& tail : tails) {
        if (static_cast<int>(tail.size()) > spec.max_tensor_order)
            throw DimensionMismatch("build_design: tail exceeds max_tensor_order");
        for (int v : tail)
            if (v < 0 || v >= data.d()) throw DimensionMismatch("build_design: column out of range");
        info.blocks.push_back(build_block(data, tail, spec));
        info.offsets.push_back(offset);
        offset += static_cast<int>(info.blocks.back().x.cols());
    }
    info.total_cols = offset;
    return info;
}

Eigen::MatrixXd gram_product_serial(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const int n = static_cast<int>(a.rows());
    const int chunks = (n + kGramChunk - 1) / kGramChunk;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(a.cols(), b.cols());
    for (int c = 0; c < chunks; ++c) {
        const int lo = c * kGramChunk;
        const int len = std::min(kGramChunk, n - lo);
        acc += a.middleRows(lo, len).transpose() * b.middleRows(lo, len);
    }
    return acc / static_cast<double>(n);
}

Eigen::MatrixXd gram_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const int n = static_cast<int>(a.rows());
    const int chunks = (n + kGramChunk - 1) / kGramChunk;
    if (par::threads() <= 1 || chunks <= 1) return gram_product_serial(a, b);
    std::vector<Eigen::MatrixXd> partial(static_cast<std::size_t>(chunks));
    par::for_each_index(chunks, [&](int c) {
        const int lo = c * kGramChunk;
        const int len = std::min(kGramChunk, n - lo);
        partial[static_cast<std::size_t>(c)] =
            a.middleRows(lo, len).transpose() * b.middleRows(lo, len);
    });
    // Chunk partials are combined in index order, so the sum is identical to
    // the serial path for any thread count.
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(a.cols(), b.cols());
    for (const auto& p : partial) acc += p;
    return acc / static_cast<double>(n);
}

NodeFitter::NodeFitter(const Dataset& data, int child, const BasisSpec& spec, Budget budget)
    : NodeFitter(data, child, spec, budget, data.values.col(child)) {}

NodeFitter::NodeFitter(const Dataset& data, int child, const BasisSpec& spec, Budget budget,
                       Eigen::VectorXd response)
    : data_(data), child_(child), spec_(budgeted(spec, budget)) {
    spec_.validate();
    y_mean_ = response.mean();
    y_centered_ = response.array() - y_mean_;
    y_var_ = y_centered_.squaredNorm() / static_cast<double>(data.n());
}

const DesignBlock& NodeFitter::block(const VertexSet& tail) {
    auto it = blocks_.find(tail);
    if (it == blocks_.end()) {
        if (set_contains(tail, child_))
            throw DimensionMismatch("NodeFitter: child inside candidate tail");
        if (static_cast<int>(tail.size()) > spec_.max_tensor_order)
            throw DimensionMismatch("NodeFitter: tail exceeds max_tensor_order");
        it = blocks_.emplace(tail, build_block(data_, tail, spec_)).first;
    }
    return it->second;
}

const Eigen::MatrixXd& NodeFitter::gram(const VertexSet& a, const VertexSet& b) {
    const auto key = a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
    auto it = grams_.find(key);
    if (it == grams_.end()) {
        const Eigen::MatrixXd g = gram_product(block(key.first).x, block(key.second).x);
        it = grams_.emplace(key, g).first;
    }
    return it->second;
}

const Eigen::VectorXd& NodeFitter::yprod(const VertexSet& tail) {
    auto it = yprods_.find(tail);
    if (it == yprods_.end()) {
        const Eigen::VectorXd p =
            block(tail).x.transpose() * y_centered_ / static_cast<double>(data_.n());
        it = yprods_.emplace(tail, p).first;
    }
    return it->second;
}

void NodeFitter::warm(const VertexSet& tail, const std::vector<VertexSet>& others) {
    block(tail);
    yprod(tail);
    gram(tail, tail);
    for (const auto& o : others) gram(tail, o);
}

void NodeFitter::evict(const VertexSet& tail) { blocks_.erase(tail); }

NodeFitter::Fit NodeFitter::fit(const std::vector<VertexSet>& tails) {
    Fit out;
    out.intercept = y_mean_;
    if (tails.empty()) {
        out.sigma2 = y_var_;
        return out;
    }
    std::vector<VertexSet> sorted = tails;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::vector<int> offsets;
    int total = 0;
    for (const auto& t : sorted) {
        offsets.push_back(total);
        total += static_cast<int>(block(t).x.cols());
    }
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(total, total);
    Eigen::VectorXd rhs(total);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const auto& bi = block(sorted[i]);
        const int pi = static_cast<int>(bi.x.cols());
        rhs.segment(offsets[i], pi) = yprod(sorted[i]);
        a.block(offsets[i], offsets[i], pi, pi) =
            gram(sorted[i], sorted[i]) + spec_.ridge_lambda * Eigen::MatrixXd::Identity(pi, pi) +
            spec_.smooth_lambda * bi.penalty;
        for (std::size_t j = i + 1; j < sorted.size(); ++j) {
            const int pj = static_cast<int>(block(sorted[j]).x.cols());
            const auto key =
                sorted[i] <= sorted[j] ? std::make_pair(sorted[i], sorted[j])
                                       : std::make_pair(sorted[j], sorted[i]);
            const Eigen::MatrixXd& g = gram(key.first, key.second);
            if (key.first == sorted[i]) {
                a.block(offsets[i], offsets[j], pi, pj) = g;
                a.block(offsets[j], offsets[i], pj, pi) = g.transpose();
            } else {
                a.block(offsets[i], offsets[j], pi, pj) = g.transpose();
                a.block(offsets[j], offsets[i], pj, pi) = g;
            }
        }
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success)
        throw SingularSystem("fit_node: normal matrix factorization failed");
    const double dmax = ldlt.vectorD().maxCoeff();
    if (!(dmax > 0.0) || ldlt.vectorD().minCoeff() <= dmax * 1e-14)
        throw SingularSystem("fit_node: regularized normal matrix is not positive definite");
    const Eigen::VectorXd beta = ldlt.solve(rhs);

    // sigma2 = y'y/n - 2 b'(X'y/n) + b'(X'X/n) b, assembled from cached pieces.
    Eigen::VectorXd fitted = Eigen::VectorXd::Zero(data_.n());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const auto& bi = block(sorted[i]);
        const int pi = static_cast<int>(bi.x.cols());
        const Eigen::VectorXd seg = beta.segment(offsets[i], pi);
        fitted += bi.x * seg;
        out.coef_blocks.push_back({sorted[i], seg});
    }
    out.sigma2 = (y_centered_ - fitted).squaredNorm() / static_cast<double>(data_.n());
    return out;
}

double NodeFitter::sigma2(const std::vector<VertexSet>& tails) { return fit(tails).sigma2; }

NodeModel fit_node(const Dataset& data, int child, const std::vector<VertexSet>& tails,
                   const BasisSpec& spec, Budget budget) {
    for (const auto& t : tails)
        if (set_contains(t, child)) throw DimensionMismatch("fit_node: child inside a tail");
    NodeFitter fitter(data, child, spec, budget);
    const NodeFitter::Fit fit = fitter.fit(tails);

    NodeModel model;
    model.child = child;
    model.intercept = fit.intercept;
    model.sigma2_hat = fit.sigma2;
    for (const auto& [tail, coefs] : fit.coef_blocks) {
        const DesignBlock& b = fitter.block(tail);
        FittedTerm term;
        term.tail = tail;
        term.knots = b.knots;
        term.col_means = b.col_means;
        term.coefs = coefs;
        model.terms.emplace(tail, std::move(term));
    }
    return model;
}

double score_gain(const Dataset& data, int child, const std::vector<VertexSet>& base_tails,
                  const VertexSet& candidate, const BasisSpec& spec, Budget budget) {
    if (std::find(base_tails.begin(), base_tails.end(), candidate) != base_tails.end())
        return 0.0;
    NodeFitter fitter(data, child, spec, budget);
    const double base = fitter.sigma2(base_tails);
    std::vector<VertexSet> aug = base_tails;
    aug.push_back(candidate);
    return base - fitter.sigma2(aug);
}

Eigen::VectorXd NodeModel::term_values(const Dataset& data, const VertexSet& tail) const {
    const auto it = terms.find(tail);
    if (it == terms.end()) throw UnknownTail("NodeModel: no term for the requested tail");
    return term_values_from(it->second, data, 3);
}

Eigen::VectorXd NodeModel::predict(const Dataset& data) const {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(data.n(), intercept);
    for (const auto& [tail, term] : terms) out += term_values_from(term, data, 3);
    return out;
}

double term_variance(const NodeModel& model, const Dataset& data, const VertexSet& tail) {
    const Eigen::VectorXd v = model.term_values(data, tail);
    const double mean = v.mean();
    return (v.array() - mean).square().sum() / static_cast<double>(data.n());
}

std::string NodeModel::serialize() const {
    std::ostringstream os;
    os << "nodemodel v1\n";
    os << "child " << child << "\n";
    os << "intercept " << fmt_double(intercept) << "\n";
    os << "sigma2 " << fmt_double(sigma2_hat) << "\n";
    os << "terms " << terms.size() << "\n";
    for (const auto& [tail, term] : terms) {
        os << "tail " << set_to_string(tail, ' ') << "\n";
        os << "dims " << term.knots.size() << "\n";
        for (const auto& kn : term.knots) {
            os << "knots " << kn.size();
            for (double v : kn) os << ' ' << fmt_double(v);
            os << "\n";
        }
        os << "means " << term.col_means.size();
        for (double v : term.col_means) os << ' ' << fmt_double(v);
        os << "\n";
        os << "coefs " << term.coefs.size();
        for (int i = 0; i < term.coefs.size(); ++i) os << ' ' << fmt_double(term.coefs[i]);
        os << "\n";
    }
    return os.str();
}

NodeModel NodeModel::deserialize(const std::string& text) {
    std::istringstream is(text);
    std::string tok;
    auto expect = [&](const char* word) {
        is >> tok;
        if (tok != word) throw ParseError(std::string("nodemodel: expected '") + word + "', got '" + tok + "'");
    };
    expect("nodemodel");
    is >> tok;
    if (tok != "v1") throw ParseError("nodemodel: unknown version " + tok);
    NodeModel model;
    std::size_t nterms = 0;
    expect("child");
    is >> model.child;
    expect("intercept");
    is >> model.intercept;
    expect("sigma2");
    is >> model.sigma2_hat;
    expect("terms");
    is >> nterms;
    for (std::size_t t = 0; t < nterms; ++t) {
        expect("tail");
        FittedTerm term;
        // Tail vertices run until the "dims" keyword.
        while (is >> tok && tok != "dims") term.tail.push_back(std::stoi(tok));
        std::size_t dims = 0;
        is >> dims;
        for (std::size_t k = 0; k < dims; ++k) {
            expect("knots");
            std::size_t count = 0;
            is >> count;
            std::vector<double> kn(count);
            for (auto& v : kn) is >> v;
            term.knots.push_back(std::move(kn));
        }
        expect("means");
        std::size_t mcount = 0;
        is >> mcount;
        term.col_means.resize(mcount);
        for (auto& v : term.col_means) is >> v;
        expect("coefs");
        std::size_t ccount = 0;
        is >> ccount;
        term.coefs.resize(static_cast<int>(ccount));
        for (std::size_t i = 0; i < ccount; ++i) is >> term.coefs[static_cast<int>(i)];
        if (!is) throw ParseError("nodemodel: truncated term");
        VertexSet key = term.tail;
        model.terms.emplace(std::move(key), std::move(term));
    }
    return model;
}

}  // namespace hcam
