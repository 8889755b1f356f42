#include "hcam/metrics.hpp"

#include <deque>
#include <sstream>

namespace hcam {

namespace {

enum class PairState { None, Fwd, Rev };

PairState pair_state(const Dag& g, int i, int j) {
    if (g.has_edge(i, j)) return PairState::Fwd;
    if (g.has_edge(j, i)) return PairState::Rev;
    return PairState::None;
}

std::vector<std::vector<int>> children_lists(const Dag& g) {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(g.d));
    for (const auto& [from, to] : g.edges) out[static_cast<std::size_t>(from)].push_back(to);
    return out;
}

std::vector<std::vector<int>> parent_lists(const Dag& g) {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(g.d));
    for (const auto& [from, to] : g.edges) out[static_cast<std::size_t>(to)].push_back(from);
    return out;
}

}  // namespace

std::string MetricsReport::csv_header() {
    return "dataset_id,method,shd,sid,hoshd,hoshd_lb,seed";
}

std::string MetricsReport::csv_row() const {
    std::ostringstream os;
    os << dataset_id << ',' << method << ',' << shd << ',' << sid << ',' << hoshd << ','
       << (hoshd_is_lower_bound ? 1 : 0) << ',' << seed;
    return os.str();
}

MetricsReport MetricsReport::from_csv_row(const std::string& line) {
    std::istringstream is(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(is, tok, ',')) cols.push_back(tok);
    if (cols.size() != 7) throw ParseError("metrics row: expected 7 columns: " + line);
    MetricsReport r;
    try {
        r.dataset_id = cols[0];
        r.method = cols[1];
        r.shd = std::stoi(cols[2]);
        r.sid = std::stoi(cols[3]);
        r.hoshd = std::stoll(cols[4]);
        r.hoshd_is_lower_bound = std::stoi(cols[5]) != 0;
        r.seed = std::stoull(cols[6]);
    } catch (const std::exception&) {
        throw ParseError("metrics row: bad number in: " + line);
    }
    return r;
}

int shd(const Dag& g_true, const Dag& g_est) {
    if (g_true.d != g_est.d) throw DimensionMismatch("shd: vertex counts differ");
    int count = 0;
    for (int i = 0; i < g_true.d; ++i)
        for (int j = i + 1; j < g_true.d; ++j)
            if (pair_state(g_true, i, j) != pair_state(g_est, i, j)) ++count;
    return count;
}

bool d_separated(const Dag& g, const VertexSet& a, const VertexSet& b, const VertexSet& z) {
    for (int v : a)
        if (set_contains(b, v) || set_contains(z, v))
            throw DimensionMismatch("d_separated: sets not disjoint");
    for (int v : b)
        if (set_contains(z, v)) throw DimensionMismatch("d_separated: sets not disjoint");

    const auto children = children_lists(g);
    const auto parents = parent_lists(g);

    // Ancestors of Z including Z itself; colliders in this set may open.
    std::vector<char> anc_z(static_cast<std::size_t>(g.d), 0);
    std::deque<int> work(z.begin(), z.end());
    for (int v : z) anc_z[static_cast<std::size_t>(v)] = 1;
    while (!work.empty()) {
        const int v = work.front();
        work.pop_front();
        for (int p : parents[static_cast<std::size_t>(v)])
            if (!anc_z[static_cast<std::size_t>(p)]) {
                anc_z[static_cast<std::size_t>(p)] = 1;
                work.push_back(p);
            }
    }

    // Reachability over (vertex, entry direction) states; entry "up" means the
    // trail arrived from a child (or is a source), "down" from a parent.
    enum { Up = 0, Down = 1 };
    std::vector<char> seen(static_cast<std::size_t>(g.d) * 2, 0);
    std::deque<std::pair<int, int>> frontier;
    for (int v : a) frontier.push_back({v, Up});
    while (!frontier.empty()) {
        const auto [v, dir] = frontier.front();
        frontier.pop_front();
        auto& mark = seen[static_cast<std::size_t>(v) * 2 + dir];
        if (mark) continue;
        mark = 1;
        const bool in_z = set_contains(z, v);
        if (!in_z && set_contains(b, v)) return false;  // active trail reaches B
        if (dir == Up && !in_z) {
            for (int p : parents[static_cast<std::size_t>(v)]) frontier.push_back({p, Up});
            for (int c : children[static_cast<std::size_t>(v)]) frontier.push_back({c, Down});
        } else if (dir == Down) {
            if (!in_z)
                for (int c : children[static_cast<std::size_t>(v)]) frontier.push_back({c, Down});
            if (anc_z[static_cast<std::size_t>(v)])
                for (int p : parents[static_cast<std::size_t>(v)]) frontier.push_back({p, Up});
        }
    }
    return true;
}

namespace {

// Backtracking search for an active non-causal simple path from i to j.
// Entry orientation: true if the edge used to enter `v` points into v.
struct SpuriousSearch {
    const std::vector<std::vector<int>>& children;
    const std::vector<std::vector<int>>& parents;
    const VertexSet& z;
    const AncestorMatrix& anc;
    int target;
    std::vector<char> on_path;

    bool collider_open(int v) const {
        if (set_contains(z, v)) return true;
        for (int w : z)
            if (anc.reach(v, w)) return true;
        return false;
    }

    bool search(int v, bool entered_into_v, bool pure) {
        if (v == target) return !pure;
        // Continue through v: its role depends on entry and exit orientation.
        for (int w : children[static_cast<std::size_t>(v)]) {
            if (on_path[static_cast<std::size_t>(w)]) continue;
            // exit via v -> w: v is a chain or fork node, blocked when v in Z
            if (set_contains(z, v)) continue;
            on_path[static_cast<std::size_t>(w)] = 1;
            if (search(w, true, pure)) return true;
            on_path[static_cast<std::size_t>(w)] = 0;
        }
        for (int w : parents[static_cast<std::size_t>(v)]) {
            if (on_path[static_cast<std::size_t>(w)]) continue;
            // exit via w -> v traversed backwards: collider iff entered into v
            if (entered_into_v) {
                if (!collider_open(v)) continue;
            } else {
                if (set_contains(z, v)) continue;
            }
            on_path[static_cast<std::size_t>(w)] = 1;
            if (search(w, false, false)) return true;
            on_path[static_cast<std::size_t>(w)] = 0;
        }
        return false;
    }
};

}  // namespace

bool valid_adjustment(const Dag& g, int i, int j, const VertexSet& z) {
    if (set_contains(z, j) || set_contains(z, i)) return false;
    const AncestorMatrix anc(g);
    // A directed i -> ... -> j path through a member of Z counts as blocked.
    for (int v : z)
        if (anc.reach(i, v) && anc.reach(v, j)) return false;

    const auto children = children_lists(g);
    const auto parents = parent_lists(g);
    SpuriousSearch s{children, parents, z, anc, j,
                     std::vector<char>(static_cast<std::size_t>(g.d), 0)};
    s.on_path[static_cast<std::size_t>(i)] = 1;
    // First move out of i: forward moves keep the causal prefix, backward
    // moves are non-causal from the start.
    for (int w : children[static_cast<std::size_t>(i)]) {
        s.on_path[static_cast<std::size_t>(w)] = 1;
        if (s.search(w, true, true)) return false;
        s.on_path[static_cast<std::size_t>(w)] = 0;
    }
    for (int w : parents[static_cast<std::size_t>(i)]) {
        s.on_path[static_cast<std::size_t>(w)] = 1;
        if (s.search(w, false, false)) return false;
        s.on_path[static_cast<std::size_t>(w)] = 0;
    }
    return true;
}

int sid(const Dag& g_true, const Dag& g_est) {
    if (g_true.d != g_est.d) throw DimensionMismatch("sid: vertex counts differ");
    const AncestorMatrix anc_true(g_true);
    int errors = 0;
    for (int i = 0; i < g_true.d; ++i) {
        const VertexSet pa_est = g_est.parents_of(i);
        for (int j = 0; j < g_true.d; ++j) {
            if (i == j) continue;
            if (set_contains(pa_est, j)) {
                // Estimate treats j as a cause of i, hence claims no i -> j
                // effect; wrong exactly when j descends from i in truth.
                if (anc_true.reach(i, j)) ++errors;
            } else if (!valid_adjustment(g_true, i, j, pa_est)) {
                ++errors;
            }
        }
    }
    return errors;
}

Expansion expand_dag_body(const Dag& g, int truncation) {
    if (truncation < 2) throw DimensionMismatch("expand_dag_body: truncation < 2");
    std::set<VertexSet> sets;
    bool truncated = false;
    for (int j = 0; j < g.d; ++j) {
        const VertexSet pa = g.parents_of(j);
        if (static_cast<int>(pa.size()) + 1 > truncation) truncated = true;
        const int cap = std::min<int>(truncation - 1, static_cast<int>(pa.size()));
        for (const auto& s : subsets_of(pa, 1, cap)) sets.insert(set_with(s, j));
    }
    return Expansion{UHypergraph(g.d, std::move(sets)), truncated};
}

namespace {

struct TruncatedBody {
    std::set<VertexSet> sets;
    bool truncated = false;
};

TruncatedBody truncated_body(const HDag& h, int truncation) {
    TruncatedBody out;
    for (const auto& s : body(h).sets) {
        if (static_cast<int>(s.size()) > truncation)
            out.truncated = true;
        else
            out.sets.insert(s);
    }
    return out;
}

TruncatedBody truncated_body(const Dag& g, int truncation) {
    Expansion e = expand_dag_body(g, truncation);
    return TruncatedBody{std::move(e.hypergraph.sets), e.truncated};
}

template <typename A, typename B>
HoShd hoshd_impl(const A& h_true, const B& h_est, int truncation, int d_true, int d_est) {
    if (d_true != d_est) throw DimensionMismatch("hoshd: vertex counts differ");
    const TruncatedBody t = truncated_body(h_true, truncation);
    const TruncatedBody e = truncated_body(h_est, truncation);
    long long diff = 0;
    for (const auto& s : t.sets)
        if (!e.sets.count(s)) ++diff;
    for (const auto& s : e.sets)
        if (!t.sets.count(s)) ++diff;
    return HoShd{diff, t.truncated || e.truncated};
}

}  // namespace

HoShd hoshd(const HDag& h_true, const HDag& h_est, int truncation) {
    return hoshd_impl(h_true, h_est, truncation, h_true.d, h_est.d);
}

HoShd hoshd(const HDag& h_true, const Dag& g_est, int truncation) {
    return hoshd_impl(h_true, g_est, truncation, h_true.d, g_est.d);
}

HoShd hoshd(const Dag& g_true, const Dag& g_est, int truncation) {
    return hoshd_impl(g_true, g_est, truncation, g_true.d, g_est.d);
}

}  // namespace hcam
