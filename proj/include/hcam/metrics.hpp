#pragma once

#include <cstdint>
#include <string>

#include "hcam/graphs.hpp"

namespace hcam {

struct MetricsReport {
    int shd = 0;
    int sid = 0;
    long long hoshd = 0;
    bool hoshd_is_lower_bound = false;
    int truncation_order = 4;
    std::uint64_t seed = 0;
    std::string dataset_id;
    std::string method;

    // CSV row: dataset_id, method, shd, sid, hoshd, hoshd_lb, seed
    std::string csv_row() const;
    static std::string csv_header();
    static MetricsReport from_csv_row(const std::string& line);
};

// Edge-set disagreement; a reversed edge counts once.
int shd(const Dag& g_true, const Dag& g_est);

// Standard d-separation of A and B given Z (A, B, Z disjoint).
bool d_separated(const Dag& g, const VertexSet& a, const VertexSet& b, const VertexSet& z);

// True iff Z is a valid adjustment set for the effect i -> j in g:
// no directed i->...->j path passes through Z, and every non-causal i..j
// path is blocked by Z. Simple-path semantics; exponential worst case.
bool valid_adjustment(const Dag& g, int i, int j, const VertexSet& z);

// Count of ordered pairs (i, j) whose estimated parent adjustment is wrong in
// g_true. Pairs with j in Pa_est(i) are errors exactly when j is a true
// descendant of i (the estimate then implies a null effect).
int sid(const Dag& g_true, const Dag& g_est);

struct Expansion {
    UHypergraph hypergraph;
    bool truncated = false;
};

// All-subsets body implied by a DAG under the generic-ANM reading: per node j
// with parents P, every S + {j} with nonempty S subset of P, capped at
// |S + {j}| <= truncation.
Expansion expand_dag_body(const Dag& g, int truncation);

struct HoShd {
    long long distance = 0;
    bool is_lower_bound = false;
};

// Hamming distance between hypergraph bodies, restricted to sets of size
// <= truncation. DAG arguments are expanded via expand_dag_body first.
HoShd hoshd(const HDag& h_true, const HDag& h_est, int truncation = 4);
HoShd hoshd(const HDag& h_true, const Dag& g_est, int truncation = 4);
HoShd hoshd(const Dag& g_true, const Dag& g_est, int truncation = 4);

}  // namespace hcam
