#include "hcam/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hcam/parallel.hpp"
#include "hcam/tolerances.hpp"

namespace hcam {

namespace {

std::vector<std::size_t> make_strides(const std::vector<int>& alphabets) {
    std::vector<std::size_t> strides(alphabets.size(), 1);
    for (int i = static_cast<int>(alphabets.size()) - 2; i >= 0; --i)
        strides[static_cast<std::size_t>(i)] =
            strides[static_cast<std::size_t>(i) + 1] *
            static_cast<std::size_t>(alphabets[static_cast<std::size_t>(i) + 1]);
    return strides;
}

std::size_t table_size_of(const std::vector<int>& alphabets) {
    std::size_t n = 1;
    for (int a : alphabets) n *= static_cast<std::size_t>(a);
    return n;
}

// Iterates all assignments of `alphabets`, calling fn(x, flat_index).
template <typename Fn>
void for_each_assignment(const std::vector<int>& alphabets, Fn&& fn) {
    const int d = static_cast<int>(alphabets.size());
    std::vector<int> x(static_cast<std::size_t>(d), 0);
    const std::size_t total = table_size_of(alphabets);
    for (std::size_t idx = 0; idx < total; ++idx) {
        fn(x, idx);
        for (int i = d - 1; i >= 0; --i) {
            if (++x[static_cast<std::size_t>(i)] < alphabets[static_cast<std::size_t>(i)]) break;
            x[static_cast<std::size_t>(i)] = 0;
        }
    }
}

// Flat index of the restriction of assignment x to the variables of `mask`
// (ascending order, last fastest), given their alphabet sizes.
std::size_t sub_index(const std::vector<int>& x, std::uint32_t mask,
                      const std::vector<int>& alphabets) {
    std::size_t idx = 0;
    for (int i = 0; i < static_cast<int>(alphabets.size()); ++i)
        if (mask & (1u << i))
            idx = idx * static_cast<std::size_t>(alphabets[static_cast<std::size_t>(i)]) +
                  static_cast<std::size_t>(x[static_cast<std::size_t>(i)]);
    return idx;
}

std::size_t mask_table_size(std::uint32_t mask, const std::vector<int>& alphabets) {
    std::size_t n = 1;
    for (int i = 0; i < static_cast<int>(alphabets.size()); ++i)
        if (mask & (1u << i)) n *= static_cast<std::size_t>(alphabets[static_cast<std::size_t>(i)]);
    return n;
}

// Zero-marginal decomposition of an arbitrary table (not only log p); used
// both for distributions and for drawn theta tables.
AnovaDecomposition decompose_table(const std::vector<int>& alphabets,
                                   const std::vector<double>& table) {
    const int d = static_cast<int>(alphabets.size());
    const std::uint32_t full = (1u << d) - 1;
    AnovaDecomposition dec;
    dec.alphabets = alphabets;
    dec.comps.assign(1u << d, {});

    // Means over the complement of each subset, under the uniform measure.
    std::vector<std::vector<double>> means(1u << d);
    for (std::uint32_t mask = 0; mask <= full; ++mask) {
        means[mask].assign(mask_table_size(mask, alphabets), 0.0);
        const double denom = static_cast<double>(table_size_of(alphabets)) /
                             static_cast<double>(means[mask].size());
        for_each_assignment(alphabets, [&](const std::vector<int>& x, std::size_t idx) {
            means[mask][sub_index(x, mask, alphabets)] += table[idx] / denom;
        });
    }
    // Moebius: theta_S = sum_{T subset S} (-1)^{|S|-|T|} m_T.
    for (std::uint32_t s = 0; s <= full; ++s) {
        std::vector<double> comp(mask_table_size(s, alphabets), 0.0);
        std::uint32_t t = s;
        while (true) {
            const int parity = (std::popcount(s) - std::popcount(t)) % 2;
            const double sign = parity ? -1.0 : 1.0;
            // m_T broadcast onto the S-indexed table.
            std::vector<int> s_alpha;
            std::vector<std::uint32_t> s_vars;
            for (int i = 0; i < d; ++i)
                if (s & (1u << i)) {
                    s_alpha.push_back(alphabets[static_cast<std::size_t>(i)]);
                    s_vars.push_back(1u << i);
                }
            std::vector<int> xs(s_alpha.size(), 0);
            for (std::size_t idx = 0; idx < comp.size(); ++idx) {
                // Index of the T-restriction of this S-assignment.
                std::size_t tidx = 0;
                for (std::size_t k = 0; k < s_vars.size(); ++k)
                    if (t & s_vars[k])
                        tidx = tidx * static_cast<std::size_t>(s_alpha[k]) +
                               static_cast<std::size_t>(xs[k]);
                comp[idx] += sign * means[t][tidx];
                for (int i = static_cast<int>(xs.size()) - 1; i >= 0; --i) {
                    if (++xs[static_cast<std::size_t>(i)] < s_alpha[static_cast<std::size_t>(i)]) break;
                    xs[static_cast<std::size_t>(i)] = 0;
                }
            }
            if (t == 0) break;
            t = (t - 1) & s;
        }
        dec.comps[s] = std::move(comp);
    }
    return dec;
}

}  // namespace

DiscreteDist::DiscreteDist(std::vector<int> alphabets, std::vector<double> probs)
    : alphabets_(std::move(alphabets)), probs_(std::move(probs)) {
    if (alphabets_.empty()) throw DimensionMismatch("DiscreteDist: no variables");
    for (int a : alphabets_)
        if (a < 2) throw DimensionMismatch("DiscreteDist: alphabet size < 2");
    if (probs_.size() != table_size_of(alphabets_))
        throw DimensionMismatch("DiscreteDist: table size mismatch");
    double sum = 0.0;
    for (double p : probs_) {
        if (!(p > 0.0)) throw InvalidDensity("DiscreteDist: entries must be strictly positive");
        sum += p;
    }
    if (std::abs(sum - 1.0) > tol::kDistNormalization)
        throw InvalidDensity("DiscreteDist: table does not sum to 1");
    strides_ = make_strides(alphabets_);
}

std::size_t DiscreteDist::index_of(const std::vector<int>& x) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < alphabets_.size(); ++i)
        idx += static_cast<std::size_t>(x[i]) * strides_[i];
    return idx;
}

void DiscreteDist::assignment_of(std::size_t idx, std::vector<int>& x) const {
    x.resize(alphabets_.size());
    for (std::size_t i = 0; i < alphabets_.size(); ++i) {
        x[i] = static_cast<int>(idx / strides_[i]);
        idx %= strides_[i];
    }
}

DiscreteDist DiscreteDist::marginal(const VertexSet& keep) const {
    const std::uint32_t mask = to_mask(keep);
    std::vector<int> sub_alpha;
    for (int v : keep) sub_alpha.push_back(alphabets_[static_cast<std::size_t>(v)]);
    std::vector<double> sub(table_size_of(sub_alpha), 0.0);
    for_each_assignment(alphabets_, [&](const std::vector<int>& x, std::size_t idx) {
        sub[sub_index(x, mask, alphabets_)] += probs_[idx];
    });
    return DiscreteDist(std::move(sub_alpha), std::move(sub));
}

double AnovaDecomposition::max_abs(std::uint32_t mask) const {
    double m = 0.0;
    for (double v : comps[mask]) m = std::max(m, std::abs(v));
    return m;
}

double AnovaDecomposition::rms(std::uint32_t mask) const {
    double s = 0.0;
    for (double v : comps[mask]) s += v * v;
    return std::sqrt(s / static_cast<double>(comps[mask].size()));
}

AnovaDecomposition anova_log_decompose(const DiscreteDist& dist) {
    std::vector<double> logp(dist.table_size());
    for (std::size_t i = 0; i < logp.size(); ++i) logp[i] = std::log(dist.probs()[i]);
    return decompose_table(dist.alphabets(), logp);
}

std::vector<double> anova_reconstruct(const AnovaDecomposition& dec) {
    const std::uint32_t full = (1u << dec.alphabets.size()) - 1;
    std::vector<double> out(table_size_of(dec.alphabets), 0.0);
    for_each_assignment(dec.alphabets, [&](const std::vector<int>& x, std::size_t idx) {
        for (std::uint32_t s = 0; s <= full; ++s)
            out[idx] += dec.comps[s][sub_index(x, s, dec.alphabets)];
    });
    return out;
}

bool multi_independent(const DiscreteDist& dist, const VertexSet& t, const VertexSet& z) {
    if (t.size() < 2) throw DimensionMismatch("multi_independent: |T| < 2");
    for (int v : t)
        if (set_contains(z, v)) throw DimensionMismatch("multi_independent: T and Z overlap");

    const VertexSet tz = set_union(t, z);
    const DiscreteDist joint = dist.marginal(tz);
    // Positions of T / Z variables inside the T-union-Z marginal.
    std::vector<int> t_pos, z_pos, t_alpha, z_alpha;
    for (std::size_t i = 0; i < tz.size(); ++i) {
        if (set_contains(t, tz[i])) {
            t_pos.push_back(static_cast<int>(i));
            t_alpha.push_back(joint.alphabets()[i]);
        } else {
            z_pos.push_back(static_cast<int>(i));
            z_alpha.push_back(joint.alphabets()[i]);
        }
    }
    const std::uint32_t top = (1u << t_alpha.size()) - 1;

    std::vector<int> x(tz.size());
    std::vector<double> slice(table_size_of(t_alpha));
    std::vector<int> zval(z_alpha.size(), 0);
    const std::size_t z_total = table_size_of(z_alpha);
    for (std::size_t zi = 0; zi < z_total; ++zi) {
        // log p(x_T | z) differs from log p(x_T, z) by a constant in x_T, so
        // the top component can be read off the unnormalized slice.
        for (std::size_t k = 0; k < z_pos.size(); ++k) x[static_cast<std::size_t>(z_pos[k])] = zval[k];
        std::vector<int> tval(t_alpha.size(), 0);
        for (std::size_t ti = 0; ti < slice.size(); ++ti) {
            for (std::size_t k = 0; k < t_pos.size(); ++k)
                x[static_cast<std::size_t>(t_pos[k])] = tval[k];
            slice[ti] = std::log(joint.probs()[joint.index_of(x)]);
            for (int i = static_cast<int>(tval.size()) - 1; i >= 0; --i) {
                if (++tval[static_cast<std::size_t>(i)] < t_alpha[static_cast<std::size_t>(i)]) break;
                tval[static_cast<std::size_t>(i)] = 0;
            }
        }
        const AnovaDecomposition dec = decompose_table(t_alpha, slice);
        if (dec.max_abs(top) > tol::kExactComponent) return false;
        for (int i = static_cast<int>(zval.size()) - 1; i >= 0; --i) {
            if (++zval[static_cast<std::size_t>(i)] < z_alpha[static_cast<std::size_t>(i)]) break;
            zval[static_cast<std::size_t>(i)] = 0;
        }
    }
    return true;
}

double omega_T(const DiscreteDist& dist, const VertexSet& t) {
    if (t.size() < 2) throw DimensionMismatch("omega_T: |T| < 2");
    const AnovaDecomposition dec = anova_log_decompose(dist);
    const std::uint32_t tmask = to_mask(t);
    const std::uint32_t full = (1u << dist.dim()) - 1;
    double acc = 0.0;
    for_each_assignment(dist.alphabets(), [&](const std::vector<int>& x, std::size_t idx) {
        double sum = 0.0;
        for (std::uint32_t s = 0; s <= full; ++s)
            if ((s & tmask) == tmask) sum += dec.comps[s][sub_index(x, s, dist.alphabets())];
        acc += dist.probs()[idx] * sum * sum;
    });
    return std::sqrt(acc);
}

double generalized_precision(const std::function<double(const Eigen::VectorXd&)>& logp, int i,
                             int j, const std::vector<Eigen::VectorXd>& points) {
    if (points.empty()) throw DimensionMismatch("generalized_precision: no points");
    auto stencil = [&](const Eigen::VectorXd& x, double hi, double hj) {
        Eigen::VectorXd p = x;
        p[i] = x[i] + hi;
        p[j] = x[j] + hj;
        const double pp = logp(p);
        p[j] = x[j] - hj;
        const double pm = logp(p);
        p[i] = x[i] - hi;
        const double mm = logp(p);
        p[j] = x[j] + hj;
        const double mp = logp(p);
        return (pp - pm - mp + mm) / (4.0 * hi * hj);
    };
    double acc = 0.0;
    for (const auto& x : points) {
        const double hi = 1e-3 * std::max(1.0, std::abs(x[i]));
        const double hj = 1e-3 * std::max(1.0, std::abs(x[j]));
        const double est = stencil(x, hi, hj);
        const double est2 = stencil(x, 2.0 * hi, 2.0 * hj);
        if (!std::isfinite(est) || !std::isfinite(est2) ||
            std::abs(est - est2) > 0.5 * std::max(1.0, std::abs(est)))
            throw NumericalInstability("generalized_precision: stencil residual too large");
        acc += est * est;
    }
    return std::sqrt(acc / static_cast<double>(points.size()));
}

namespace {

std::size_t theta_index(int x_head, const std::vector<int>& x_tail,
                        const std::vector<int>& tail_alpha) {
    std::size_t idx = static_cast<std::size_t>(x_head);
    for (std::size_t k = 0; k < x_tail.size(); ++k)
        idx = idx * static_cast<std::size_t>(tail_alpha[k]) + static_cast<std::size_t>(x_tail[k]);
    return idx;
}

}  // namespace

DiscreteDist hdag_discrete_dist(const HDag& h, const std::map<Hyperedge, ThetaTable>& tables,
                                const std::vector<int>& alphabets) {
    const int d = h.d;
    if (static_cast<int>(alphabets.size()) != d)
        throw DimensionMismatch("hdag_discrete_dist: alphabet count != d");
    for (int j = 0; j < d; ++j)
        for (const auto& tail : h.maximal_tails_of(j))
            if (!tables.count(Hyperedge(tail, j)))
                throw DimensionMismatch("hdag_discrete_dist: missing table for a maximal hyperedge");

    // Per node: the theta tables that feed it, with tail alphabets cached.
    struct NodeTerm {
        VertexSet tail;
        std::vector<int> tail_alpha;
        const ThetaTable* table;
    };
    std::vector<std::vector<NodeTerm>> node_terms(static_cast<std::size_t>(d));
    for (const auto& [edge, table] : tables) {
        if (!h.contains(edge)) throw DimensionMismatch("hdag_discrete_dist: table for unknown edge");
        std::vector<int> ta;
        std::size_t expect = static_cast<std::size_t>(alphabets[static_cast<std::size_t>(edge.head)]);
        for (int v : edge.tail) {
            ta.push_back(alphabets[static_cast<std::size_t>(v)]);
            expect *= static_cast<std::size_t>(alphabets[static_cast<std::size_t>(v)]);
        }
        if (table.values.size() != expect)
            throw DimensionMismatch("hdag_discrete_dist: theta table size mismatch");
        node_terms[static_cast<std::size_t>(edge.head)].push_back(NodeTerm{edge.tail, ta, &table});
    }

    auto node_energy = [&](int j, int xj, const std::vector<int>& x) {
        double e = 0.0;
        for (const auto& term : node_terms[static_cast<std::size_t>(j)]) {
            std::vector<int> xt(term.tail.size());
            for (std::size_t k = 0; k < term.tail.size(); ++k)
                xt[k] = x[static_cast<std::size_t>(term.tail[k])];
            e += term.table->values[theta_index(xj, xt, term.tail_alpha)];
        }
        return e;
    };

    std::vector<double> probs(table_size_of(alphabets), 1.0);
    for_each_assignment(alphabets, [&](const std::vector<int>& x, std::size_t idx) {
        double logp = 0.0;
        for (int j = 0; j < d; ++j) {
            const int aj = alphabets[static_cast<std::size_t>(j)];
            double z = 0.0;
            for (int v = 0; v < aj; ++v) z += std::exp(node_energy(j, v, x));
            logp += node_energy(j, x[static_cast<std::size_t>(j)], x) - std::log(z);
        }
        probs[idx] = std::exp(logp);
    });
    // Normalization is exact up to rounding; rescale to protect the invariant.
    const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
    for (double& p : probs) p /= sum;
    return DiscreteDist(alphabets, std::move(probs));
}

std::map<Hyperedge, ThetaTable> draw_faithful_tables(const HDag& h,
                                                     const std::vector<int>& alphabets, Rng& rng) {
    std::map<Hyperedge, ThetaTable> tables;
    for (int j = 0; j < h.d; ++j) {
        for (const auto& tail : h.maximal_tails_of(j)) {
            std::vector<int> alpha{alphabets[static_cast<std::size_t>(j)]};
            for (int v : tail) alpha.push_back(alphabets[static_cast<std::size_t>(v)]);
            const std::size_t size = table_size_of(alpha);
            const std::uint32_t top = (1u << alpha.size()) - 1;
            ThetaTable t;
            for (int attempt = 0; attempt < 100; ++attempt) {
                t.values.resize(size);
                for (auto& v : t.values) v = rng.normal();
                const AnovaDecomposition dec = decompose_table(alpha, t.values);
                if (dec.rms(top) >= tol::kFaithfulFloor) break;
                if (attempt == 99)
                    throw NumericalInstability("draw_faithful_tables: rejection did not converge");
            }
            tables.emplace(Hyperedge(tail, j), std::move(t));
        }
    }
    return tables;
}

Fingerprint multi_independence_fingerprint(const DiscreteDist& dist) {
    const int d = dist.dim();
    Fingerprint fp;
    for (std::uint32_t tmask = 0; tmask < (1u << d); ++tmask) {
        if (std::popcount(tmask) < 2) continue;
        const VertexSet t = from_mask(tmask);
        const std::uint32_t rest = ((1u << d) - 1) & ~tmask;
        std::uint32_t zmask = 0;
        while (true) {
            if (multi_independent(dist, t, from_mask(zmask))) fp.push_back({tmask, zmask});
            if (zmask == rest) break;
            zmask = (zmask - rest) & rest;  // next submask of rest
        }
    }
    std::sort(fp.begin(), fp.end());
    return fp;
}

Fingerprint structural_fingerprint(const HDag& h, int draws, Rng& rng) {
    const std::vector<int> alphabets(static_cast<std::size_t>(h.d), 2);
    Fingerprint common;
    for (int r = 0; r < draws; ++r) {
        const auto tables = draw_faithful_tables(h, alphabets, rng);
        const DiscreteDist dist = hdag_discrete_dist(h, tables, alphabets);
        Fingerprint fp = multi_independence_fingerprint(dist);
        if (r == 0) {
            common = std::move(fp);
        } else {
            Fingerprint merged;
            std::set_intersection(common.begin(), common.end(), fp.begin(), fp.end(),
                                  std::back_inserter(merged));
            common = std::move(merged);
        }
    }
    return common;
}

std::vector<Dag> all_dags(int d) {
    if (d > 4) throw DimensionGuard("all_dags: d > 4");
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) pairs.push_back({i, j});
    std::vector<Dag> out;
    const std::size_t total = static_cast<std::size_t>(std::pow(3, pairs.size()));
    for (std::size_t code = 0; code < total; ++code) {
        std::set<std::pair<int, int>> edges;
        std::size_t c = code;
        for (const auto& [i, j] : pairs) {
            const int s = static_cast<int>(c % 3);
            c /= 3;
            if (s == 1) edges.insert({i, j});
            if (s == 2) edges.insert({j, i});
        }
        try {
            out.push_back(Dag(d, std::move(edges)));
        } catch (const CyclicStructure&) {
        }
    }
    return out;
}

namespace {

// Downward-closed hyperparent families over `parents` whose union covers all
// of `parents`, with maximal tail size <= max_order.
std::vector<std::vector<VertexSet>> hyperparent_families(const VertexSet& parents, int max_order) {
    if (parents.empty()) return {{}};
    const auto candidates = subsets_of(parents, 1, std::min<int>(max_order, static_cast<int>(parents.size())));
    const int m = static_cast<int>(candidates.size());
    std::vector<std::vector<VertexSet>> out;
    for (std::uint32_t pick = 1; pick < (1u << m); ++pick) {
        std::vector<VertexSet> family;
        VertexSet covered;
        for (int k = 0; k < m; ++k)
            if (pick & (1u << k)) {
                family.push_back(candidates[static_cast<std::size_t>(k)]);
                covered = set_union(covered, candidates[static_cast<std::size_t>(k)]);
            }
        if (covered != parents) continue;
        bool closed = true;
        for (const auto& tail : family) {
            for (const auto& sub : subsets_of(tail, 1, static_cast<int>(tail.size()) - 1))
                if (std::find(family.begin(), family.end(), sub) == family.end()) {
                    closed = false;
                    break;
                }
            if (!closed) break;
        }
        if (closed) out.push_back(std::move(family));
    }
    return out;
}

}  // namespace

std::vector<HDag> all_hdags(int d, int max_order) {
    if (d > 4) throw DimensionGuard("all_hdags: d > 4");
    std::vector<HDag> out;
    for (const Dag& g : all_dags(d)) {
        std::vector<std::vector<std::vector<VertexSet>>> per_child;
        for (int j = 0; j < d; ++j)
            per_child.push_back(hyperparent_families(g.parents_of(j), max_order));
        std::vector<std::size_t> pick(static_cast<std::size_t>(d), 0);
        while (true) {
            std::set<Hyperedge> edges;
            for (int j = 0; j < d; ++j)
                for (const auto& tail : per_child[static_cast<std::size_t>(j)][pick[static_cast<std::size_t>(j)]])
                    edges.insert(Hyperedge(tail, j));
            out.push_back(HDag(d, std::move(edges)));
            int i = d - 1;
            for (; i >= 0; --i) {
                if (++pick[static_cast<std::size_t>(i)] < per_child[static_cast<std::size_t>(i)].size()) break;
                pick[static_cast<std::size_t>(i)] = 0;
            }
            if (i < 0) break;
        }
    }
    return out;
}

std::string hmec_class_key(const HDag& h, int max_order) {
    std::ostringstream os;
    os << "body:";
    for (const auto& s : body(h).sets) os << '{' << set_to_string(s) << '}';
    os << "|mc:";
    for (const auto& e : unshielded_multicolliders(h, max_order))
        os << '(' << set_to_string(e.tail) << "->" << e.head << ')';
    return os.str();
}

HmecPartition enumerate_hmec(int d, int max_order) {
    if (d > 4) throw DimensionGuard("enumerate_hmec: d > 4");
    const std::vector<HDag> hdags = all_hdags(d, max_order);
    const int full_order = d - 1;  // exact multicollider range at this scale

    std::vector<std::string> keys(hdags.size());
    par::for_each_index(static_cast<int>(hdags.size()), [&](int i) {
        keys[static_cast<std::size_t>(i)] = hmec_class_key(hdags[static_cast<std::size_t>(i)], full_order);
    });

    std::map<std::string, std::vector<HDag>> by_key;
    for (std::size_t i = 0; i < hdags.size(); ++i) by_key[keys[i]].push_back(hdags[i]);

    HmecPartition part;
    for (auto& [key, members] : by_key) {
        std::sort(members.begin(), members.end(),
                  [](const HDag& a, const HDag& b) { return graph_line(a) < graph_line(b); });
        part.classes.push_back(std::move(members));
    }
    std::sort(part.classes.begin(), part.classes.end(),
              [](const std::vector<HDag>& a, const std::vector<HDag>& b) {
                  return graph_line(a.front()) < graph_line(b.front());
              });
    return part;
}

double mixed_partial_norm(const SemModel& model, const VertexSet& r,
                          const std::vector<Eigen::VectorXd>& points, double h) {
    if (r.size() < 2 || r.size() > 4)
        throw DimensionMismatch("mixed_partial_norm: |R| must be in [2, 4]");
    for (const auto& [edge, term] : model.terms())
        if (!term.differentiable())
            throw NumericalInstability("mixed_partial_norm: model has a non-differentiable term");

    const int k = static_cast<int>(r.size());
    double acc = 0.0;
    for (const auto& x : points) {
        double sum = 0.0;
        for (std::uint32_t signs = 0; signs < (1u << k); ++signs) {
            Eigen::VectorXd p = x;
            int parity = 0;
            for (int a = 0; a < k; ++a) {
                if (signs & (1u << a)) {
                    p[r[static_cast<std::size_t>(a)]] += h;
                } else {
                    p[r[static_cast<std::size_t>(a)]] -= h;
                    ++parity;
                }
            }
            const double v = analytic_log_density(model, p);
            sum += (parity % 2 ? -1.0 : 1.0) * v;
        }
        const double est = sum / std::pow(2.0 * h, k);
        if (!std::isfinite(est))
            throw NumericalInstability("mixed_partial_norm: non-finite stencil");
        acc += est * est;
    }
    return std::sqrt(acc / static_cast<double>(points.size()));
}

}  // namespace hcam
