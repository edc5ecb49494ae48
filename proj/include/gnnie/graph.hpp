#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gnnie {

using VertexId = uint32_t;

// Undirected graph in CSR form. Immutable after build_csr; every (i,j) with
// i != j is stored in both rows, self-loops are stored once.
struct Graph {
    uint32_t num_vertices = 0;
    std::vector<uint64_t> offsets;   // num_vertices + 1
    std::vector<VertexId> coords;    // neighbor IDs, sorted within each row
    std::vector<uint32_t> degrees;   // degrees[i] == offsets[i+1] - offsets[i]
    bool undirected = true;

    uint32_t degree(VertexId v) const { return degrees[v]; }
    std::span<const VertexId> neighbors(VertexId v) const {
        return {coords.data() + offsets[v], coords.data() + offsets[v + 1]};
    }
    uint64_t num_entries() const { return coords.size(); }
    // Edges counted once (self-loops count as one edge).
    uint64_t num_undirected_edges() const;
    bool has_self_loop(VertexId v) const;
    void validate() const;
};

Graph build_csr(std::span<const std::pair<VertexId, VertexId>> edges,
                uint32_t num_vertices, bool undirected = true);

// Degree-descending vertex permutation with bin boundaries.
// order[k] is the vertex in position k; bins are contiguous ranges of order.
struct VertexOrder {
    std::vector<VertexId> order;
    std::vector<uint32_t> bin_boundaries;  // num_bins + 1 indices, [0 .. n]

    uint32_t num_bins() const {
        return bin_boundaries.empty() ? 0 : static_cast<uint32_t>(bin_boundaries.size() - 1);
    }
    void validate(const Graph& g) const;
};

// Counting-sort binning: vertices sorted by descending degree, ties by
// ascending ID, then split into num_bins equal-population bins.
VertexOrder degree_sort(const Graph& g, uint32_t num_bins);

// Ascending-ID order with the same bin structure; the caching baseline.
VertexOrder identity_order(const Graph& g, uint32_t num_bins);

// Preferential attachment (Barabasi-Albert). Seeded with a complete graph on
// m_attach+1 vertices; each new vertex attaches m_attach distinct edges with
// degree-proportional probability. Vertex IDs are then randomly relabeled so
// ID order carries no degree information. Deterministic for a fixed seed.
Graph generate_power_law(uint32_t n, uint32_t m_attach, uint64_t seed);

// Text edge lists: one "u v" pair per line, 0-based IDs, '#' comments allowed.
Graph load_edge_list(std::istream& in, bool undirected = true);
Graph load_edge_list_file(const std::string& path, bool undirected = true);
void save_edge_list_file(const Graph& g, const std::string& path);

// Binary snapshot of a graph plus (optionally) its vertex order.
void save_snapshot(const Graph& g, const VertexOrder* order, const std::string& path);
bool is_snapshot_file(const std::string& path);
Graph load_snapshot(const std::string& path, VertexOrder* order_out = nullptr);

}  // namespace gnnie
