#pragma once

#include <cstdint>
#include <string>

#include "hcam/gam.hpp"
#include "hcam/graphs.hpp"

namespace hcam {

struct DiscoveryConfig {
    int max_order = 2;            // 1 = CAM regime
    BasisSpec basis;
    double gain_floor = 1e-3;     // per-sample MSE units
    double prune_threshold = 1e-4;
    int max_hyperedges = 1000;
    int window_size = 10;         // active candidates per child
    int replenish_floor = 5;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Candidate {
    VertexSet tail;
    double score = 0.0;  // screening score, descending rank
};

struct CandidatePool {
    // Per child, ranked candidate tails (descending screening score).
    std::vector<std::vector<Candidate>> per_child;
};

struct TraceEntry {
    int step = 0;
    int child = 0;
    VertexSet tail;
    double gain = 0.0;
    double sigma2_before = 0.0;
    double sigma2_after = 0.0;
};

struct DiscoveryResult {
    HDag hdag;
    std::vector<NodeModel> models;  // one per node
    std::vector<TraceEntry> trace;
    std::string config_hash;
};

// Stage 1: per child, a joint singleton ridge fit ranks 1D candidates by term
// variance; pair (and triple) tails are ranked by cheap-budget gains on the
// singleton-fit residuals, searched among the top singleton parents.
CandidatePool screen(const Dataset& data, const DiscoveryConfig& cfg);

// Stage 2: greedy hyperedge selection under acyclicity. Candidates are taken
// lowest-order-first among those clearing the gain floor; within an order the
// largest gain wins and exact ties break lexicographically on (child, tail).
std::pair<HDag, std::vector<TraceEntry>> greedy_select(const Dataset& data,
                                                       const CandidatePool& pool,
                                                       const DiscoveryConfig& cfg);

// Stage 3: full-budget joint refit, dropping maximal tails whose term
// variance falls below the prune threshold, then one refit.
DiscoveryResult prune(const Dataset& data, const HDag& hdag, const DiscoveryConfig& cfg);

DiscoveryResult run_hcam(const Dataset& data, const DiscoveryConfig& cfg);
DiscoveryResult run_cam(const Dataset& data, DiscoveryConfig cfg);  // forces max_order = 1
DiscoveryResult run_zero(const Dataset& data);

// Line-oriented trace: "step,child,tail,gain,sigma2_before,sigma2_after"
// with the tail rendered as v1+v2+...
std::string write_trace(const std::vector<TraceEntry>& trace);
std::vector<TraceEntry> parse_trace(const std::string& text);

}  // namespace hcam
