#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "gnnie/accel.hpp"
#include "gnnie/dram.hpp"
#include "gnnie/graph.hpp"

namespace gnnie {

struct EdgeRef {
    VertexId u, v;      // u <= v
    uint64_t edge_id;   // canonical undirected edge index
};

struct AlphaHistogram {
    uint32_t round;
    std::vector<std::pair<uint32_t, uint64_t>> bins;  // (alpha, frequency), alpha >= 1
    uint32_t max_alpha() const;
    uint64_t peak_frequency() const;
};

struct RefillOutcome {
    std::vector<VertexId> evicted;
    std::vector<VertexId> loaded;
    uint64_t charged_cycles = 0;
    uint64_t bytes_read = 0;
    uint64_t bytes_written = 0;
};

// Degree-aware input-buffer management for Aggregation. Vertices live in
// DRAM in the given order; the resident window starts as its prefix and is
// refilled strictly from a forward-moving cursor, so aggregation reads stay
// sequential per Round. alpha_i tracks each vertex's unprocessed edges.
class CacheState {
public:
    CacheState(const Graph& g, const VertexOrder& order, const CacheConfig& cfg,
               std::span<const uint64_t> vertex_bytes, DramModel& dram,
               uint32_t trace_round_offset = 0);

    // Unprocessed edges with both endpoints resident, (u, v, id) with u <= v,
    // ascending. The paper's "subgraph in the input buffer".
    std::vector<EdgeRef> current_subgraph() const;
    bool subgraph_empty() const;

    // Decrements alpha at both endpoints (once for a self-loop) and the
    // owning blocks' unprocessed totals. Throws on double-processing.
    void commit_processed(std::span<const EdgeRef> edges);

    // Evicts up to r resident vertices with alpha < gamma (ascending alpha,
    // then ID), writes their alpha back, and loads replacements from the
    // cursor, skipping fully processed blocks. Wrapping the cursor ends the
    // Round. overlap_cycles of compute may hide the refill transfer.
    RefillOutcome evict_and_refill(DramModel& dram, uint64_t overlap_cycles);

    // True iff edges remain globally, nothing is evictable, and the current
    // subgraph has no processable edges.
    bool detect_deadlock() const;
    // Doubling escalation, bounded by max degree + 1. Returns the new gamma.
    uint32_t escalate_gamma();

    std::vector<VertexId> take_newly_resident();

    bool is_resident(VertexId v) const { return resident_[v] != 0; }
    uint32_t alpha(VertexId v) const { return alpha_[v]; }
    uint32_t gamma() const { return gamma_; }
    uint32_t round() const { return round_; }
    // Round number used in trace entries; offset keeps rounds globally
    // unique across layers sharing one DramModel.
    uint32_t trace_round() const { return trace_round_ofs_ + round_; }
    uint32_t capacity() const { return capacity_; }
    uint32_t r_evict() const { return r_evict_; }
    uint64_t unprocessed_edges() const { return unprocessed_edges_; }
    uint64_t alpha_decrements() const { return alpha_decrements_; }
    uint64_t initial_alpha_sum() const { return initial_alpha_sum_; }
    uint64_t init_charged_cycles() const { return init_charged_cycles_; }
    uint64_t init_bytes_read() const { return init_bytes_read_; }
    std::span<const VertexId> resident_list() const { return resident_list_; }
    const std::vector<AlphaHistogram>& alpha_histograms() const { return histograms_; }

private:
    void snapshot_histogram();
    uint32_t block_of_position(uint64_t pos) const { return static_cast<uint32_t>(pos / block_size_); }

    const Graph* g_;
    const VertexOrder* order_;
    uint32_t capacity_;
    uint32_t gamma_;
    uint32_t r_evict_;
    uint32_t block_size_;
    std::vector<uint64_t> vertex_bytes_;
    std::vector<uint32_t> alpha_;
    std::vector<uint8_t> resident_;
    std::vector<VertexId> resident_list_;  // ascending vertex IDs
    std::vector<uint64_t> entry_edge_id_;  // CSR entry -> undirected edge id
    std::vector<uint8_t> edge_processed_;
    std::vector<uint64_t> pos_of_;         // vertex -> position in order
    std::vector<uint64_t> block_unprocessed_;  // sum of alpha per block
    uint64_t refill_pos_;
    uint32_t round_ = 1;
    uint32_t trace_round_ofs_ = 0;
    uint64_t unprocessed_edges_;
    uint64_t alpha_decrements_ = 0;
    uint64_t initial_alpha_sum_ = 0;
    uint64_t init_charged_cycles_ = 0;
    uint64_t init_bytes_read_ = 0;
    std::vector<VertexId> newly_resident_;
    std::vector<AlphaHistogram> histograms_;
};

// Resolve auto (zero) cache fields against a workload: capacity from half
// the input buffer over the mean vertex footprint, r = capacity / 8.
CacheConfig resolve_cache_config(const CacheConfig& cfg, uint64_t input_buffer_bytes,
                                 std::span<const uint64_t> vertex_bytes);

// Output-buffer pressure model: partial aggregation results stay on-chip by
// degree priority; the rest append to a sequential DRAM spill stream and are
// merged back at finalize.
class OutputBufferModel {
public:
    explicit OutputBufferModel(uint64_t capacity_bytes) : capacity_(capacity_bytes) {}

    // Returns true if v's partial is (or becomes) on-chip.
    bool note_contribution(VertexId v, uint32_t degree, uint64_t bytes, DramModel& dram,
                           uint32_t round);
    void finalize(VertexId v, DramModel& dram, uint32_t round);

    uint64_t spill_events() const { return spill_events_; }
    uint64_t spill_bytes() const { return spill_bytes_; }
    uint64_t used_bytes() const { return used_; }

private:
    struct Entry {
        uint64_t bytes = 0;
        uint64_t spilled_bytes = 0;
        bool onchip = false;
        uint32_t degree = 0;
    };
    void spill_entry(VertexId v, Entry& e, DramModel& dram, uint32_t round);

    uint64_t capacity_;
    uint64_t used_ = 0;
    std::unordered_map<VertexId, Entry> entries_;
    std::set<std::pair<uint32_t, VertexId>> by_degree_;  // on-chip entries
    uint64_t spill_events_ = 0;
    uint64_t spill_bytes_ = 0;
};

}  // namespace gnnie
