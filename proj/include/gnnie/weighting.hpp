#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gnnie/accel.hpp"
#include "gnnie/dram.hpp"
#include "gnnie/features.hpp"
#include "gnnie/stats.hpp"

namespace gnnie {

// Weighting is blocked two ways: each feature vector splits into
// blocks_per_vertex k-element subvectors (one CPE row each), and vertices
// stream through in sets of set_vertices bounded by half the input buffer
// (the other half double-buffers the next set). A pass multiplies every set
// against array_cols weight columns; num_passes passes cover f_out.
struct WeightingPlan {
    uint32_t block_elems = 0;       // k = ceil(f_in / M)
    uint32_t blocks_per_vertex = 0; // ceil(f_in / k), <= M
    uint32_t set_vertices = 0;      // s
    uint32_t num_sets = 0;          // ceil(V / s)
    uint32_t num_passes = 0;        // ceil(f_out / N)
};

WeightingPlan plan_weighting(uint32_t f_in, uint32_t f_out, uint32_t num_vertices,
                             uint64_t feature_bytes_per_vertex, const AcceleratorConfig& cfg);

// Nonzeros of each (vertex, block) subvector; index v * blocks_per_vertex + b.
std::vector<uint32_t> compute_block_nnz(const FeatureMatrix& h, const WeightingPlan& plan);

// Which CPE row processes each block. All-zero blocks are skipped outright
// (kSkip) and never enter a queue.
struct RowAssignment {
    static constexpr uint8_t kSkip = 0xFF;
    uint32_t num_rows = 0;
    uint32_t blocks_per_vertex = 0;
    std::vector<uint8_t> block_row;        // size V * blocks_per_vertex
    std::vector<uint64_t> row_blocks;      // queued blocks per row
    std::vector<uint64_t> row_nnz;         // nonzeros per row
    std::vector<uint64_t> row_cycles_est;  // per-pass sum of ceil(nnz/macs)
    uint32_t lr_offload_events = 0;
};

// Baseline mapping: block index b goes to CPE row b.
RowAssignment assign_blocks_direct(std::span<const uint32_t> block_nnz,
                                   uint32_t blocks_per_vertex, const MacProfile& profile,
                                   uint32_t num_rows);

// Flexible-MAC mapping: nonzero blocks are counting-sorted by nnz (ties by
// block index), split into equal-population bins, one bin per MAC group in
// nondecreasing-MAC order; blocks round-robin across the rows of their group.
RowAssignment bin_blocks(std::span<const uint32_t> block_nnz, uint32_t blocks_per_vertex,
                         const MacProfile& profile, uint32_t num_rows);

// Load redistribution: up to max_pairs times, pair the most-loaded row with
// the least-loaded and move blocks (fewest-nnz first) until their estimated
// loads differ by at most one block's cycles. Each pairing that moved work
// counts one offload event (one weight reload per pass).
void apply_load_redistribution(RowAssignment& assignment,
                               std::span<const uint32_t> block_nnz,
                               const MacProfile& profile, uint32_t max_pairs);

// --- MPE psum accumulation -------------------------------------------------

struct MpeEvent {
    uint64_t time;
    uint32_t row;
    uint32_t vertex;
};

struct MpeOutcome {
    uint64_t completed = 0;
    uint64_t stall_cycles = 0;
    uint64_t stall_events = 0;
    uint64_t spills = 0;
    std::vector<std::pair<uint32_t, uint64_t>> completions;  // (vertex, time)
};

// Replays a partial-result stream against a bank of psum slots. A partial
// for a vertex not in flight claims a free slot; with all slots busy its
// producer row stalls until a completion frees one. An element completes
// after partials_needed[v] arrivals and is evicted to the output buffer.
MpeOutcome mpe_accumulate(std::span<const MpeEvent> events,
                          std::span<const uint32_t> partials_needed, uint32_t psum_slots);

// --- Phase simulation --------------------------------------------------------

struct WeightingOptions {
    bool fm = true;
    bool lr = true;
    uint32_t lr_max_pairs = 4;
    bool rlc_input = false;  // stream layer-0 features RLC-compressed
};

struct WeightingResult {
    FeatureMatrix weighted;
    PhaseStats stats;
    WeightingPlan plan;
    RowAssignment assignment;
    std::vector<uint64_t> row_cycles;  // busy cycles per CPE row, whole phase
};

// Weight-stationary cycle model plus the functional product. The functional
// output accumulates in ascending element order per row (what the MPE sees
// from ascending block order) in float32.
WeightingResult simulate_weighting(const FeatureMatrix& h, const FeatureMatrix& w,
                                   const AcceleratorConfig& cfg, const WeightingOptions& opts,
                                   DramModel& dram);

WeightingResult simulate_weighting(const FeatureMatrix& h, const FeatureMatrix& w,
                                   const AcceleratorConfig& cfg, const WeightingPlan& plan,
                                   RowAssignment assignment, bool rlc_input, DramModel& dram);

}  // namespace gnnie
