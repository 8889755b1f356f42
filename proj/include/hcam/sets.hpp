#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>
#include <vector>

namespace hcam {

// Vertex ids are 0-based dense integers. A VertexSet is kept sorted and
// deduplicated so that equality is bytewise and ordering is canonical.
using VertexSet = std::vector<int>;

inline VertexSet make_set(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline bool set_contains(const VertexSet& s, int x) {
    return std::binary_search(s.begin(), s.end(), x);
}

inline bool is_subset(const VertexSet& a, const VertexSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline VertexSet set_union(const VertexSet& a, const VertexSet& b) {
    VertexSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline VertexSet set_minus(const VertexSet& a, int x) {
    VertexSet out;
    out.reserve(a.size());
    for (int v : a)
        if (v != x) out.push_back(v);
    return out;
}

inline VertexSet set_with(const VertexSet& a, int x) {
    if (set_contains(a, x)) return a;
    VertexSet out = a;
    out.insert(std::upper_bound(out.begin(), out.end(), x), x);
    return out;
}

// All nonempty proper/improper subsets of `s` with size in [min_size, max_size].
inline std::vector<VertexSet> subsets_of(const VertexSet& s, int min_size, int max_size) {
    const int n = static_cast<int>(s.size());
    std::vector<VertexSet> out;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        const int k = std::popcount(mask);
        if (k < min_size || k > max_size) continue;
        VertexSet sub;
        sub.reserve(static_cast<std::size_t>(k));
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) sub.push_back(s[static_cast<std::size_t>(i)]);
        out.push_back(std::move(sub));
    }
    return out;
}

inline std::uint32_t to_mask(const VertexSet& s) {
    std::uint32_t m = 0;
    for (int v : s) m |= 1u << v;
    return m;
}

inline VertexSet from_mask(std::uint32_t m) {
    VertexSet s;
    for (int i = 0; i < 32; ++i)
        if (m & (1u << i)) s.push_back(i);
    return s;
}

inline std::string set_to_string(const VertexSet& s, char sep = ',') {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out.push_back(sep);
        out += std::to_string(s[i]);
    }
    return out;
}

}  // namespace hcam
