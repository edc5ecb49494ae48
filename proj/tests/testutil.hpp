#pragma once

// Shared test fixtures: the Fig-7-style cache example graph, an independent
// Erdos-Renyi generator, and dense-matrix oracles that evaluate each GNN
// layer by explicit (naive) formulas, independent of both the golden kernels
// and the simulator dataflow.

#include <cmath>
#include <utility>
#include <vector>

#include "gnnie/features.hpp"
#include "gnnie/graph.hpp"
#include "gnnie/layer.hpp"
#include "gnnie/rng.hpp"

namespace testutil {

using namespace gnnie;

// 15-vertex graph matching the paper's cache-replacement walkthrough:
// vertices 0..2 have degree 3, 4..5 degree 2, and with a 7-vertex buffer the
// resident set is {0,1,2,4,5,3,6}; its induced subgraph has exactly 6 edges
// whose processing zeroes alpha for vertices 3..6.
inline Graph fig7_graph() {
    std::vector<std::pair<VertexId, VertexId>> edges = {
        {0, 3}, {0, 4}, {1, 4}, {1, 5}, {2, 5}, {2, 6},   // E1..E6
        {0, 7}, {1, 8}, {2, 9},                           // E7..E9
        {10, 11}, {12, 13},                               // E10..E11
    };
    return build_csr(edges, 15, true);
}

inline Graph erdos_renyi(uint32_t n, double p, uint64_t seed) {
    Rng rng(seed);
    std::vector<std::pair<VertexId, VertexId>> edges;
    for (VertexId u = 0; u < n; ++u)
        for (VertexId v = u + 1; v < n; ++v)
            if (rng_u01(rng) < p) edges.emplace_back(u, v);
    return build_csr(edges, n, true);
}

inline FeatureMatrixD random_features_d(uint32_t rows, uint32_t cols, uint64_t seed,
                                        double sparsity = 0.0) {
    Rng rng(seed);
    FeatureMatrixD m(rows, cols);
    for (auto& v : m.data)
        v = (sparsity > 0.0 && rng_u01(rng) < sparsity) ? 0.0 : rng_uniform(rng, -1.0, 1.0);
    return m;
}

inline FeatureMatrix random_features_f(uint32_t rows, uint32_t cols, uint64_t seed,
                                       double sparsity = 0.0) {
    return narrow(random_features_d(rows, cols, seed, sparsity));
}

inline bool close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1.0});
}

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

// ---- Dense oracles ---------------------------------------------------------

inline FeatureMatrixD dense_matmul(const FeatureMatrixD& a, const FeatureMatrixD& b) {
    FeatureMatrixD out(a.rows, b.cols);
    for (uint32_t i = 0; i < a.rows; ++i)
        for (uint32_t k = 0; k < a.cols; ++k)
            for (uint32_t j = 0; j < b.cols; ++j)
                out.at(i, j) += a.at(i, k) * b.at(k, j);
    return out;
}

// sigma(A_hat * H * W) with A_hat = D^-1/2 (A + I) D^-1/2 built explicitly.
inline FeatureMatrixD dense_gcn(const Graph& g, const FeatureMatrixD& h,
                                const LayerSpec& spec) {
    uint32_t n = g.num_vertices;
    std::vector<std::vector<double>> adj(n, std::vector<double>(n, 0.0));
    for (VertexId u = 0; u < n; ++u) {
        adj[u][u] = 1.0;
        for (VertexId v : g.neighbors(u)) adj[u][v] = 1.0;
    }
    std::vector<double> deg(n, 0.0);
    for (uint32_t i = 0; i < n; ++i)
        for (uint32_t j = 0; j < n; ++j) deg[i] += adj[i][j];
    FeatureMatrixD hw = dense_matmul(h, spec.weight);
    FeatureMatrixD out(n, spec.f_out);
    for (uint32_t i = 0; i < n; ++i) {
        for (uint32_t j = 0; j < n; ++j) {
            if (adj[i][j] == 0.0) continue;
            double c = 1.0 / std::sqrt(deg[i] * deg[j]);
            for (uint32_t k = 0; k < spec.f_out; ++k) out.at(i, k) += c * hw.at(j, k);
        }
        auto row = out.row(i);
        apply_activation(row, spec.activation);
    }
    return out;
}

// Naive GAT: e_ij from the full concatenated inner product a.[eta_i || eta_j]
// per edge (no e1/e2 reordering), stabilized softmax.
inline FeatureMatrixD dense_gat(const Graph& g, const FeatureMatrixD& h,
                                const LayerSpec& spec) {
    uint32_t n = g.num_vertices;
    FeatureMatrixD eta = dense_matmul(h, spec.weight);
    auto leaky = [&](double x) { return x >= 0 ? x : spec.leaky_slope * x; };
    auto e_of = [&](VertexId i, VertexId j) {
        double s = 0;
        for (uint32_t k = 0; k < spec.f_out; ++k)
            s += spec.attn_src[k] * eta.at(i, k) + spec.attn_dst[k] * eta.at(j, k);
        return leaky(s);
    };
    FeatureMatrixD out(n, spec.f_out);
    for (VertexId i = 0; i < n; ++i) {
        std::vector<VertexId> nbh(g.neighbors(i).begin(), g.neighbors(i).end());
        if (!g.has_self_loop(i)) nbh.push_back(i);
        double m = -1e300;
        for (VertexId j : nbh) m = std::max(m, e_of(i, j));
        double denom = 0;
        for (VertexId j : nbh) denom += std::exp(e_of(i, j) - m);
        for (VertexId j : nbh) {
            double a = std::exp(e_of(i, j) - m) / denom;
            for (uint32_t k = 0; k < spec.f_out; ++k) out.at(i, k) += a * eta.at(j, k);
        }
        auto row = out.row(i);
        apply_activation(row, spec.activation);
    }
    return out;
}

inline FeatureMatrixD dense_gin(const Graph& g, const FeatureMatrixD& h,
                                const LayerSpec& spec) {
    uint32_t n = g.num_vertices;
    FeatureMatrixD agg(n, spec.f_in);
    for (VertexId i = 0; i < n; ++i) {
        for (uint32_t k = 0; k < spec.f_in; ++k)
            agg.at(i, k) = (1.0 + spec.epsilon) * h.at(i, k);
        for (VertexId j : g.neighbors(i))
            for (uint32_t k = 0; k < spec.f_in; ++k) agg.at(i, k) += h.at(j, k);
    }
    FeatureMatrixD hidden = dense_matmul(agg, spec.mlp.w1);
    for (uint32_t i = 0; i < n; ++i)
        for (uint32_t k = 0; k < hidden.cols; ++k) {
            hidden.at(i, k) += spec.mlp.b1[k];
            if (hidden.at(i, k) < 0) hidden.at(i, k) = 0;
        }
    FeatureMatrixD out = dense_matmul(hidden, spec.mlp.w2);
    for (uint32_t i = 0; i < n; ++i)
        for (uint32_t k = 0; k < out.cols; ++k) out.at(i, k) += spec.mlp.b2[k];
    return out;
}

// Mixed random graph families for equivalence sweeps.
inline Graph random_test_graph(uint32_t index, uint64_t seed) {
    Rng rng(seed + index);
    uint32_t n = 8 + static_cast<uint32_t>(rng_below(rng, 57));  // 8..64
    if (index % 2 == 0) {
        uint32_t m = 1 + static_cast<uint32_t>(rng_below(rng, 3));
        if (m >= n) m = 1;
        return generate_power_law(n, m, seed * 977 + index);
    }
    double p = 0.05 + 0.25 * rng_u01(rng);
    return erdos_renyi(n, p, seed * 1013 + index);
}

}  // namespace testutil
