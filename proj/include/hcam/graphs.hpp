#pragma once

#include <compare>
#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hcam/errors.hpp"
#include "hcam/sets.hpp"

namespace hcam {

// Directed hyperedge: tail set -> head. The tail never contains the head and
// is never empty (root terms are implicit).
struct Hyperedge {
    VertexSet tail;
    int head = 0;

    Hyperedge() = default;
    Hyperedge(VertexSet t, int h);

    auto operator<=>(const Hyperedge&) const = default;
};

struct Dag;
struct UHypergraph;

// Directed acyclic hypergraph. Invariants enforced at construction:
// hierarchical (every nonempty subset of a tail is present for the same head)
// and the reduced DAG is acyclic.
struct HDag {
    int d = 0;
    std::set<Hyperedge> edges;

    HDag() = default;
    HDag(int d_, std::set<Hyperedge> edges_);

    bool contains(const Hyperedge& e) const { return edges.count(e) > 0; }

    // Hyperparent tails of `child`.
    std::vector<VertexSet> tails_of(int child) const;
    // Tails of `child` not strictly contained in another tail of `child`.
    std::vector<VertexSet> maximal_tails_of(int child) const;
    // Union of tails of `child`.
    VertexSet parents_of(int child) const;

    bool operator==(const HDag&) const = default;
};

struct Dag {
    int d = 0;
    std::set<std::pair<int, int>> edges;  // (from, to)

    Dag() = default;
    Dag(int d_, std::set<std::pair<int, int>> edges_);

    bool has_edge(int from, int to) const { return edges.count({from, to}) > 0; }
    VertexSet parents_of(int child) const;
    std::vector<int> topological_order() const;  // smallest-index-first Kahn

    bool operator==(const Dag&) const = default;
};

// Undirected hypergraph: a deduplicated family of vertex sets of size >= 2.
struct UHypergraph {
    int d = 0;
    std::set<VertexSet> sets;

    UHypergraph() = default;
    UHypergraph(int d_, std::set<VertexSet> sets_);

    bool operator==(const UHypergraph&) const = default;
};

// Reachability table for a Dag: reach(i, j) iff a directed path i -> ... -> j
// exists. Updated by full recomputation; d stays small at this scale.
class AncestorMatrix {
  public:
    AncestorMatrix() = default;
    explicit AncestorMatrix(int d);
    explicit AncestorMatrix(const Dag& g);

    int dim() const { return d_; }
    bool reach(int i, int j) const { return table_[static_cast<std::size_t>(i) * d_ + j] != 0; }

    // True iff adding edge (from, to) would create a cycle.
    bool would_create_cycle(int from, int to) const;
    // Recomputes reachability with the new edge included.
    void add_edge(int from, int to);

  private:
    void recompute();

    int d_ = 0;
    std::vector<std::pair<int, int>> edges_;
    std::vector<unsigned char> table_;
};

// Structural transforms.
UHypergraph body(const HDag& h);
Dag reduced_dag(const HDag& h);
UHypergraph immoralize(const HDag& h);
UHypergraph skeleton(const Dag& g);
UHypergraph moralize(const Dag& g);

// Smallest hierarchical superset of `raw`; throws CyclicStructure if the
// closure's reduced DAG has a cycle.
HDag hierarchical_closure(const std::vector<Hyperedge>& raw, int d);

// All (S, j) with |S| in [2, max_order], every s in S a parent of j, and no
// shielding hyperedge (S - t, t) present. (S, j) itself need not be an edge.
std::set<Hyperedge> unshielded_multicolliders(const HDag& h, int max_order = 4);

// Same body and same unshielded multicolliders (Theorem-1 equivalence).
bool hmec_equal(const HDag& h1, const HDag& h2, int max_order = 4);

// HDag whose edges are exactly the reduced DAG's edges as singleton tails.
HDag singleton_hdag(const Dag& g);

// Line format: header "d=<n>", then one hyperedge per line "j <- i1,i2,...".
// write_graph emits a canonical form; parse/write round-trips are bytewise.
std::string write_graph(const HDag& h);
std::string write_graph(const Dag& g);
HDag parse_graph(const std::string& text);
Dag parse_dag(const std::string& text);  // requires singleton tails

// Compact single-line rendering used in reports: "j<-a+b;k<-c".
std::string graph_line(const HDag& h);

}  // namespace hcam
