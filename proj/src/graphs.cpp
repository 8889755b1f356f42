#include "hcam/graphs.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

namespace hcam {

namespace {

void check_vertex(int v, int d, const char* what) {
    if (v < 0 || v >= d) throw DimensionMismatch(std::string(what) + ": vertex id out of range");
}

bool reduced_is_acyclic(int d, const std::set<Hyperedge>& edges) {
    std::vector<std::vector<int>> children(static_cast<std::size_t>(d));
    std::vector<int> indeg(static_cast<std::size_t>(d), 0);
    std::set<std::pair<int, int>> seen;
    for (const auto& e : edges)
        for (int t : e.tail)
            if (seen.insert({t, e.head}).second) {
                children[static_cast<std::size_t>(t)].push_back(e.head);
                ++indeg[static_cast<std::size_t>(e.head)];
            }
    std::queue<int> q;
    for (int v = 0; v < d; ++v)
        if (indeg[static_cast<std::size_t>(v)] == 0) q.push(v);
    int removed = 0;
    while (!q.empty()) {
        const int v = q.front();
        q.pop();
        ++removed;
        for (int c : children[static_cast<std::size_t>(v)])
            if (--indeg[static_cast<std::size_t>(c)] == 0) q.push(c);
    }
    return removed == d;
}

}  // namespace

Hyperedge::Hyperedge(VertexSet t, int h) : tail(make_set(std::move(t))), head(h) {
    if (tail.empty()) throw DimensionMismatch("Hyperedge: empty tail");
    if (set_contains(tail, head)) throw DimensionMismatch("Hyperedge: head in tail");
}

HDag::HDag(int d_, std::set<Hyperedge> edges_) : d(d_), edges(std::move(edges_)) {
    if (d < 0) throw DimensionMismatch("HDag: negative dimension");
    for (const auto& e : edges) {
        check_vertex(e.head, d, "HDag");
        for (int t : e.tail) check_vertex(t, d, "HDag");
        for (const auto& sub : subsets_of(e.tail, 1, static_cast<int>(e.tail.size()) - 1))
            if (!edges.count(Hyperedge(sub, e.head)))
                throw DimensionMismatch("HDag: hyperedge set is not hierarchical");
    }
    if (!reduced_is_acyclic(d, edges)) throw CyclicStructure("HDag: reduced DAG has a cycle");
}

std::vector<VertexSet> HDag::tails_of(int child) const {
    std::vector<VertexSet> out;
    for (const auto& e : edges)
        if (e.head == child) out.push_back(e.tail);
    return out;
}

std::vector<VertexSet> HDag::maximal_tails_of(int child) const {
    const auto tails = tails_of(child);
    std::vector<VertexSet> out;
    for (const auto& t : tails) {
        bool dominated = false;
        for (const auto& u : tails)
            if (t != u && is_subset(t, u)) {
                dominated = true;
                break;
            }
        if (!dominated) out.push_back(t);
    }
    return out;
}

VertexSet HDag::parents_of(int child) const {
    VertexSet all;
    for (const auto& e : edges)
        if (e.head == child) all = set_union(all, e.tail);
    return all;
}

Dag::Dag(int d_, std::set<std::pair<int, int>> edges_) : d(d_), edges(std::move(edges_)) {
    if (d < 0) throw DimensionMismatch("Dag: negative dimension");
    std::set<Hyperedge> as_hyper;
    for (const auto& [from, to] : edges) {
        check_vertex(from, d, "Dag");
        check_vertex(to, d, "Dag");
        if (from == to) throw CyclicStructure("Dag: self-loop");
        as_hyper.insert(Hyperedge({from}, to));
    }
    if (!reduced_is_acyclic(d, as_hyper)) throw CyclicStructure("Dag: cycle");
}

VertexSet Dag::parents_of(int child) const {
    VertexSet out;
    for (const auto& [from, to] : edges)
        if (to == child) out.push_back(from);
    return make_set(std::move(out));
}

std::vector<int> Dag::topological_order() const {
    std::vector<int> indeg(static_cast<std::size_t>(d), 0);
    std::vector<std::vector<int>> children(static_cast<std::size_t>(d));
    for (const auto& [from, to] : edges) {
        children[static_cast<std::size_t>(from)].push_back(to);
        ++indeg[static_cast<std::size_t>(to)];
    }
    // Min-heap gives the smallest-index-first order, so the result is unique.
    std::priority_queue<int, std::vector<int>, std::greater<int>> q;
    for (int v = 0; v < d; ++v)
        if (indeg[static_cast<std::size_t>(v)] == 0) q.push(v);
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(d));
    while (!q.empty()) {
        const int v = q.top();
        q.pop();
        order.push_back(v);
        for (int c : children[static_cast<std::size_t>(v)])
            if (--indeg[static_cast<std::size_t>(c)] == 0) q.push(c);
    }
    return order;
}

UHypergraph::UHypergraph(int d_, std::set<VertexSet> sets_) : d(d_), sets(std::move(sets_)) {
    for (const auto& s : sets) {
        if (s.size() < 2) throw DimensionMismatch("UHypergraph: set of size < 2");
        for (int v : s) check_vertex(v, d, "UHypergraph");
    }
}

AncestorMatrix::AncestorMatrix(int d) : d_(d), table_(static_cast<std::size_t>(d) * d, 0) {}

AncestorMatrix::AncestorMatrix(const Dag& g) : d_(g.d) {
    edges_.assign(g.edges.begin(), g.edges.end());
    recompute();
}

bool AncestorMatrix::would_create_cycle(int from, int to) const {
    return from == to || reach(to, from);
}

void AncestorMatrix::add_edge(int from, int to) {
    if (would_create_cycle(from, to)) throw CyclicStructure("AncestorMatrix: edge closes a cycle");
    edges_.push_back({from, to});
    recompute();
}

void AncestorMatrix::recompute() {
    table_.assign(static_cast<std::size_t>(d_) * d_, 0);
    for (const auto& [from, to] : edges_) table_[static_cast<std::size_t>(from) * d_ + to] = 1;
    // Floyd-Warshall style closure.
    for (int k = 0; k < d_; ++k)
        for (int i = 0; i < d_; ++i) {
            if (!reach(i, k)) continue;
            for (int j = 0; j < d_; ++j)
                if (reach(k, j)) table_[static_cast<std::size_t>(i) * d_ + j] = 1;
        }
}

UHypergraph body(const HDag& h) {
    std::set<VertexSet> sets;
    for (const auto& e : h.edges) sets.insert(set_with(e.tail, e.head));
    return UHypergraph(h.d, std::move(sets));
}

Dag reduced_dag(const HDag& h) {
    std::set<std::pair<int, int>> edges;
    for (const auto& e : h.edges)
        for (int t : e.tail) edges.insert({t, e.head});
    return Dag(h.d, std::move(edges));
}

UHypergraph immoralize(const HDag& h) {
    std::set<VertexSet> sets = body(h).sets;
    const Dag g = reduced_dag(h);
    for (int j = 0; j < h.d; ++j) {
        const VertexSet pa = g.parents_of(j);
        for (auto& s : subsets_of(pa, 2, static_cast<int>(pa.size()))) sets.insert(std::move(s));
    }
    return UHypergraph(h.d, std::move(sets));
}

UHypergraph skeleton(const Dag& g) {
    std::set<VertexSet> sets;
    for (const auto& [from, to] : g.edges) sets.insert(make_set({from, to}));
    return UHypergraph(g.d, std::move(sets));
}

UHypergraph moralize(const Dag& g) {
    std::set<VertexSet> sets = skeleton(g).sets;
    for (int j = 0; j < g.d; ++j) {
        const VertexSet pa = g.parents_of(j);
        for (auto& s : subsets_of(pa, 2, 2)) sets.insert(std::move(s));
    }
    return UHypergraph(g.d, std::move(sets));
}

HDag hierarchical_closure(const std::vector<Hyperedge>& raw, int d) {
    std::set<Hyperedge> closed;
    for (const auto& e : raw) {
        check_vertex(e.head, d, "hierarchical_closure");
        for (int t : e.tail) check_vertex(t, d, "hierarchical_closure");
        for (auto& sub : subsets_of(e.tail, 1, static_cast<int>(e.tail.size())))
            closed.insert(Hyperedge(std::move(sub), e.head));
    }
    if (!reduced_is_acyclic(d, closed))
        throw CyclicStructure("hierarchical_closure: reduced DAG has a cycle");
    return HDag(d, std::move(closed));
}

std::set<Hyperedge> unshielded_multicolliders(const HDag& h, int max_order) {
    std::set<Hyperedge> out;
    const Dag g = reduced_dag(h);
    for (int j = 0; j < h.d; ++j) {
        const VertexSet pa = g.parents_of(j);
        const int cap = std::min<int>(max_order, static_cast<int>(pa.size()));
        for (const auto& s : subsets_of(pa, 2, cap)) {
            bool shielded = false;
            for (int t : s)
                if (h.contains(Hyperedge(set_minus(s, t), t))) {
                    shielded = true;
                    break;
                }
            if (!shielded) out.insert(Hyperedge(s, j));
        }
    }
    return out;
}

bool hmec_equal(const HDag& h1, const HDag& h2, int max_order) {
    if (h1.d != h2.d) throw DimensionMismatch("hmec_equal: vertex counts differ");
    return body(h1) == body(h2) &&
           unshielded_multicolliders(h1, max_order) == unshielded_multicolliders(h2, max_order);
}

HDag singleton_hdag(const Dag& g) {
    std::set<Hyperedge> edges;
    for (const auto& [from, to] : g.edges) edges.insert(Hyperedge({from}, to));
    return HDag(g.d, std::move(edges));
}

std::string write_graph(const HDag& h) {
    std::ostringstream os;
    os << "d=" << h.d << "\n";
    // std::set ordering of (tail, head) is already canonical; emit sorted by
    // (head, tail) so DAG files read naturally per child.
    std::vector<const Hyperedge*> sorted;
    sorted.reserve(h.edges.size());
    for (const auto& e : h.edges) sorted.push_back(&e);
    std::sort(sorted.begin(), sorted.end(), [](const Hyperedge* a, const Hyperedge* b) {
        return std::tie(a->head, a->tail) < std::tie(b->head, b->tail);
    });
    for (const Hyperedge* e : sorted) os << e->head << " <- " << set_to_string(e->tail) << "\n";
    return os.str();
}

std::string write_graph(const Dag& g) { return write_graph(singleton_hdag(g)); }

HDag parse_graph(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line.rfind("d=", 0) != 0)
        throw ParseError("graph file: missing d= header");
    int d = 0;
    try {
        d = std::stoi(line.substr(2));
    } catch (const std::exception&) {
        throw ParseError("graph file: bad d= header");
    }
    std::set<Hyperedge> edges;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto arrow = line.find("<-");
        if (arrow == std::string::npos) throw ParseError("graph file: missing '<-' in: " + line);
        int head = 0;
        try {
            head = std::stoi(line.substr(0, arrow));
        } catch (const std::exception&) {
            throw ParseError("graph file: bad head in: " + line);
        }
        VertexSet tail;
        std::istringstream ts(line.substr(arrow + 2));
        std::string tok;
        while (std::getline(ts, tok, ',')) {
            try {
                tail.push_back(std::stoi(tok));
            } catch (const std::exception&) {
                throw ParseError("graph file: bad tail vertex in: " + line);
            }
        }
        if (tail.empty()) throw ParseError("graph file: empty tail in: " + line);
        edges.insert(Hyperedge(std::move(tail), head));
    }
    return HDag(d, std::move(edges));
}

Dag parse_dag(const std::string& text) {
    const HDag h = parse_graph(text);
    std::set<std::pair<int, int>> edges;
    for (const auto& e : h.edges) {
        if (e.tail.size() != 1) throw ParseError("dag file: non-singleton tail");
        edges.insert({e.tail[0], e.head});
    }
    return Dag(h.d, std::move(edges));
}

std::string graph_line(const HDag& h) {
    std::vector<const Hyperedge*> sorted;
    sorted.reserve(h.edges.size());
    for (const auto& e : h.edges) sorted.push_back(&e);
    std::sort(sorted.begin(), sorted.end(), [](const Hyperedge* a, const Hyperedge* b) {
        return std::tie(a->head, a->tail) < std::tie(b->head, b->tail);
    });
    std::string out;
    for (const Hyperedge* e : sorted) {
        if (!out.empty()) out.push_back(';');
        out += std::to_string(e->head) + "<-" + set_to_string(e->tail, '+');
    }
    return out.empty() ? "(empty)" : out;
}

}  // namespace hcam
