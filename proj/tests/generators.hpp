#pragma once

// Seeded generators for property tests.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "cds/graph.hpp"

namespace cds::testing {

using Rng = std::mt19937_64;

/// G(n, p) with unit weights.
inline AffinityMatrix random_unweighted(Rng& rng, int n, double p) {
    std::bernoulli_distribution edge(p);
    AffinityMatrix a(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (edge(rng)) a.set_edge(i, j, 1.0);
    return a;
}

/// Edges present with probability p, weights uniform in (0, 1].
inline AffinityMatrix random_weighted(Rng& rng, int n, double p) {
    std::bernoulli_distribution edge(p);
    std::uniform_real_distribution<double> weight(0.0, 1.0);
    AffinityMatrix a(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (edge(rng)) a.set_edge(i, j, 1.0 - weight(rng));
    return a;
}

/// Nonempty subset of [0, n) with size uniform in [1, max_size].
inline VertexSet random_subset(Rng& rng, int n, int max_size) {
    std::vector<Vertex> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    std::shuffle(all.begin(), all.end(), rng);
    const int k = std::uniform_int_distribution<int>(1, std::max(1, std::min(n, max_size)))(rng);
    all.resize(static_cast<std::size_t>(k));
    return VertexSet(std::move(all));
}

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// The 8-vertex graph used for the enumeration table, 0-based.
inline AffinityMatrix eight_vertex_graph() {
    const std::vector<std::pair<Vertex, Vertex>> edges{{0, 1}, {1, 2}, {3, 4}, {4, 5}, {4, 6},
                                                       {4, 7}, {5, 6}, {5, 7}, {6, 7}};
    return AffinityMatrix::from_edges(8, edges);
}

/// Sets given with 1-based members, converted to 0-based.
inline VertexSet one_based(std::initializer_list<Vertex> members) {
    std::vector<Vertex> v;
    for (Vertex m : members) v.push_back(m - 1);
    return VertexSet(std::move(v));
}

} // namespace cds::testing
