#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gnnie/accel.hpp"
#include "gnnie/cache.hpp"
#include "gnnie/dram.hpp"
#include "gnnie/features.hpp"
#include "gnnie/graph.hpp"
#include "gnnie/layer.hpp"
#include "gnnie/sfu.hpp"
#include "gnnie/stats.hpp"

namespace gnnie {

// Per-vertex attention scalars e1 = a1.eta, e2 = a2.eta (GAT reordering).
struct AttentionScalars {
    std::vector<float> e1, e2;
};

struct AttentionResult {
    AttentionScalars scalars;
    PhaseStats stats;
};

// Both dot products per vertex, mapped block-wise across CPE columns with
// the attention vector stationary; eta is reused between the a1 and a2
// passes. Scalar multiplications are counted exactly: 2 * f_out * |V|,
// independent of edge count.
AttentionResult compute_attention_scalars(const FeatureMatrix& weighted,
                                          std::span<const float> a1,
                                          std::span<const float> a2,
                                          const AcceleratorConfig& cfg, DramModel& dram);

// Adder-tree schedule of unit pairwise ops. A vertex with d pending operands
// takes ceil(d/2) ops per level; levels pack at most array_rows*array_cols
// ops, assigned to the fastest free CPEs first.
struct PairwiseSchedule {
    uint64_t total_ops = 0;
    std::vector<uint64_t> level_ops;
    uint64_t cycles = 0;

    uint64_t levels() const { return level_ops.size(); }
};

PairwiseSchedule map_edges_to_cpes(std::span<const uint32_t> operand_counts,
                                   const AcceleratorConfig& cfg, uint32_t vec_width);
PairwiseSchedule map_edges_to_cpes(std::span<const EdgeRef> edges, uint32_t num_vertices,
                                   const AcceleratorConfig& cfg, uint32_t vec_width);

// One GAT edge contribution: numerator exp(LeakyReLU(e1_i+e2_j)) * eta_j and
// the matching denominator increment for vertex i.
struct GatEdgeResult {
    std::vector<float> numerator;
    float denominator = 0.0f;
};
GatEdgeResult gat_edge_op(float e1_i, float e2_j, std::span<const float> eta_j,
                          const SfuModel& sfu, PhaseStats* stats = nullptr);

struct VertexAggState {
    std::vector<float> acc;
    float denominator = 0.0f;  // GAT
    uint32_t alpha = 0;
    uint32_t members = 0;      // for mean
    bool self_done = false;
    bool has_partial = false;
    bool finalized = false;
};

// Final division/activation once alpha == 0. For GINConv this applies the
// MLP's hidden bias + ReLU; the second affine stage runs as a second
// Weighting pass on the array.
std::vector<float> finalize_vertex(VertexAggState& st, const LayerSpec& spec,
                                   const SfuModel& sfu);

struct AggregationOptions {
    bool lb = true;             // pairwise load distribution vs one-vertex-per-CPE
    bool dynamic_gamma = false;
    uint32_t trace_round_offset = 0;     // namespaces rounds in a shared trace
    uint64_t max_iterations = 1u << 22;  // safety valve
};

struct AggregationResult {
    FeatureMatrix outputs;
    PhaseStats stats;
    std::vector<AlphaHistogram> alpha_histograms;
    uint32_t rounds = 0;
    uint64_t iterations = 0;
    uint32_t gamma_escalations = 0;
    uint64_t initial_alpha_sum = 0;
    uint64_t alpha_decrements = 0;
    uint64_t ob_spill_events = 0;
    bool deadlocked = false;
};

// Cache-driven edge processing until every alpha reaches zero. scalars is
// required for GAT; sage_samples for GraphSAGE.
AggregationResult simulate_aggregation(const Graph& g, const FeatureMatrix& weighted,
                                       const AttentionScalars* scalars, const LayerSpec& spec,
                                       const VertexOrder& order, const AcceleratorConfig& cfg,
                                       const AggregationOptions& opts,
                                       const std::vector<std::vector<VertexId>>* sage_samples,
                                       DramModel& dram);

}  // namespace gnnie
