#include "gnnie/cache.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace gnnie {

uint32_t AlphaHistogram::max_alpha() const {
    uint32_t m = 0;
    for (const auto& [a, f] : bins) m = std::max(m, a);
    return m;
}

uint64_t AlphaHistogram::peak_frequency() const {
    uint64_t m = 0;
    for (const auto& [a, f] : bins) m = std::max(m, f);
    return m;
}

CacheConfig resolve_cache_config(const CacheConfig& cfg, uint64_t input_buffer_bytes,
                                 std::span<const uint64_t> vertex_bytes) {
    CacheConfig out = cfg;
    if (out.capacity_vertices == 0) {
        uint64_t total = 0;
        for (uint64_t b : vertex_bytes) total += b;
        uint64_t mean = vertex_bytes.empty() ? 1 : std::max<uint64_t>(1, total / vertex_bytes.size());
        out.capacity_vertices =
            static_cast<uint32_t>(std::max<uint64_t>(1, (input_buffer_bytes / 2) / mean));
    }
    if (out.r_evict == 0)
        out.r_evict = std::max<uint32_t>(1, out.capacity_vertices / 8);
    out.r_evict = std::min(out.r_evict, out.capacity_vertices);
    return out;
}

CacheState::CacheState(const Graph& g, const VertexOrder& order, const CacheConfig& cfg,
                       std::span<const uint64_t> vertex_bytes, DramModel& dram,
                       uint32_t trace_round_offset)
    : g_(&g),
      order_(&order),
      capacity_(std::min<uint32_t>(cfg.capacity_vertices, g.num_vertices)),
      gamma_(cfg.gamma),
      r_evict_(std::max<uint32_t>(1, cfg.r_evict)),
      block_size_(cfg.block_size_vertices),
      vertex_bytes_(vertex_bytes.begin(), vertex_bytes.end()) {
    trace_round_ofs_ = trace_round_offset;
    if (cfg.capacity_vertices == 0)
        throw std::invalid_argument("cache: capacity unresolved (see resolve_cache_config)");
    if (vertex_bytes_.size() != g.num_vertices)
        throw std::invalid_argument("cache: vertex_bytes size mismatch");
    uint32_t n = g.num_vertices;
    alpha_.resize(n);
    for (VertexId v = 0; v < n; ++v) {
        alpha_[v] = g.degree(v);
        initial_alpha_sum_ += alpha_[v];
    }
    unprocessed_edges_ = g.num_undirected_edges();

    // Canonical undirected edge IDs over CSR entries.
    entry_edge_id_.assign(g.coords.size(), 0);
    std::unordered_map<uint64_t, uint64_t> edge_ids;
    uint64_t next_id = 0;
    for (VertexId u = 0; u < n; ++u) {
        for (uint64_t idx = g.offsets[u]; idx < g.offsets[u + 1]; ++idx) {
            VertexId v = g.coords[idx];
            uint64_t key = (static_cast<uint64_t>(std::min(u, v)) << 32) | std::max(u, v);
            auto it = edge_ids.find(key);
            if (it == edge_ids.end()) it = edge_ids.emplace(key, next_id++).first;
            entry_edge_id_[idx] = it->second;
        }
    }
    edge_processed_.assign(next_id, 0);

    pos_of_.resize(n);
    for (uint64_t p = 0; p < order.order.size(); ++p) pos_of_[order.order[p]] = p;

    uint32_t num_blocks = n ? (n - 1) / block_size_ + 1 : 0;
    block_unprocessed_.assign(num_blocks, 0);
    for (VertexId v = 0; v < n; ++v)
        block_unprocessed_[block_of_position(pos_of_[v])] += alpha_[v];

    // Initial load: the first capacity_ vertices in order, one sequential
    // read run grouped per block.
    resident_.assign(n, 0);
    for (uint64_t p = 0; p < capacity_; ++p) {
        VertexId v = order.order[p];
        resident_[v] = 1;
        resident_list_.push_back(v);
        newly_resident_.push_back(v);
    }
    std::sort(resident_list_.begin(), resident_list_.end());
    std::sort(newly_resident_.begin(), newly_resident_.end());
    for (uint64_t p = 0; p < capacity_;) {
        uint32_t b = block_of_position(p);
        uint64_t end = std::min<uint64_t>(static_cast<uint64_t>(b + 1) * block_size_, capacity_);
        uint64_t bytes = 0;
        for (uint64_t q = p; q < end; ++q) bytes += vertex_bytes_[order.order[q]];
        init_charged_cycles_ +=
            dram.transfer(bytes, DramKind::read, 0, b, DramPhase::aggregation, trace_round());
        init_bytes_read_ += bytes;
        p = end;
    }
    refill_pos_ = capacity_;
    snapshot_histogram();
}

void CacheState::snapshot_histogram() {
    // Distribution of unprocessed-edge counts over every unfinished vertex;
    // at round 1 this is the graph's (power-law) degree distribution.
    std::map<uint32_t, uint64_t> counts;
    for (VertexId v = 0; v < g_->num_vertices; ++v)
        if (alpha_[v] >= 1) counts[alpha_[v]]++;
    AlphaHistogram h;
    h.round = round_;
    h.bins.assign(counts.begin(), counts.end());
    histograms_.push_back(std::move(h));
}

std::vector<EdgeRef> CacheState::current_subgraph() const {
    std::vector<EdgeRef> out;
    for (VertexId u : resident_list_) {
        for (uint64_t idx = g_->offsets[u]; idx < g_->offsets[u + 1]; ++idx) {
            VertexId v = g_->coords[idx];
            if (v < u || !resident_[v]) continue;
            if (edge_processed_[entry_edge_id_[idx]]) continue;
            out.push_back({u, v, entry_edge_id_[idx]});
        }
    }
    return out;
}

bool CacheState::subgraph_empty() const {
    for (VertexId u : resident_list_) {
        for (uint64_t idx = g_->offsets[u]; idx < g_->offsets[u + 1]; ++idx) {
            VertexId v = g_->coords[idx];
            if (v < u || !resident_[v]) continue;
            if (!edge_processed_[entry_edge_id_[idx]]) return false;
        }
    }
    return true;
}

void CacheState::commit_processed(std::span<const EdgeRef> edges) {
    for (const auto& e : edges) {
        if (edge_processed_[e.edge_id])
            throw std::logic_error("cache: edge processed twice");
        edge_processed_[e.edge_id] = 1;
        if (alpha_[e.u] == 0) throw std::logic_error("cache: alpha underflow");
        alpha_[e.u]--;
        block_unprocessed_[block_of_position(pos_of_[e.u])]--;
        alpha_decrements_++;
        if (e.v != e.u) {
            if (alpha_[e.v] == 0) throw std::logic_error("cache: alpha underflow");
            alpha_[e.v]--;
            block_unprocessed_[block_of_position(pos_of_[e.v])]--;
            alpha_decrements_++;
        }
        unprocessed_edges_--;
    }
}

RefillOutcome CacheState::evict_and_refill(DramModel& dram, uint64_t overlap_cycles) {
    RefillOutcome out;
    uint32_t n = g_->num_vertices;
    if (n == 0) return out;

    // Eviction candidates: alpha < gamma, ascending (alpha, ID).
    std::vector<std::pair<uint32_t, VertexId>> candidates;
    for (VertexId v : resident_list_)
        if (alpha_[v] < gamma_) candidates.emplace_back(alpha_[v], v);
    std::sort(candidates.begin(), candidates.end());
    uint32_t k = std::min<uint32_t>(r_evict_, static_cast<uint32_t>(candidates.size()));
    for (uint32_t i = 0; i < k; ++i) {
        VertexId v = candidates[i].second;
        resident_[v] = 0;
        resident_list_.erase(
            std::lower_bound(resident_list_.begin(), resident_list_.end(), v));
        out.evicted.push_back(v);
    }
    if (k > 0) {
        uint64_t wb = 4ull * k;  // alpha words only; features are re-read on return
        dram.transfer(wb, DramKind::write, std::numeric_limits<uint64_t>::max(),
                      dram.next_write_block(), DramPhase::alpha_writeback, trace_round());
        out.bytes_written += wb;
    }

    // Sequential refill from the cursor; fully processed blocks are skipped.
    uint64_t overlap_left = overlap_cycles;
    uint64_t scanned_since_load = 0;
    while (out.loaded.size() < k) {
        if (refill_pos_ >= n) {
            refill_pos_ = 0;
            round_++;
            snapshot_histogram();
        }
        if (scanned_since_load >= n) break;  // nothing loadable anywhere
        uint32_t b = block_of_position(refill_pos_);
        uint64_t block_end = std::min<uint64_t>(static_cast<uint64_t>(b + 1) * block_size_, n);
        if (block_unprocessed_[b] == 0) {
            scanned_since_load += block_end - refill_pos_;
            refill_pos_ = block_end;
            continue;
        }
        uint64_t bytes = 0;
        for (uint64_t q = static_cast<uint64_t>(b) * block_size_; q < block_end; ++q)
            bytes += vertex_bytes_[order_->order[q]];
        uint64_t raw = dram.raw_cycles(bytes);
        out.charged_cycles +=
            dram.transfer(bytes, DramKind::read, overlap_left, b, DramPhase::aggregation, trace_round());
        overlap_left = overlap_left > raw ? overlap_left - raw : 0;
        out.bytes_read += bytes;
        while (refill_pos_ < block_end && out.loaded.size() < k) {
            VertexId v = order_->order[refill_pos_];
            refill_pos_++;
            scanned_since_load++;
            if (!resident_[v] && alpha_[v] > 0) {
                resident_[v] = 1;
                resident_list_.insert(
                    std::lower_bound(resident_list_.begin(), resident_list_.end(), v), v);
                newly_resident_.push_back(v);
                out.loaded.push_back(v);
                scanned_since_load = 0;
            }
        }
    }
    return out;
}

bool CacheState::detect_deadlock() const {
    if (unprocessed_edges_ == 0) return false;
    for (VertexId v : resident_list_)
        if (alpha_[v] < gamma_) return false;
    return subgraph_empty();
}

uint32_t CacheState::escalate_gamma() {
    uint32_t max_deg = 0;
    for (uint32_t d : g_->degrees) max_deg = std::max(max_deg, d);
    gamma_ = std::min(std::max<uint32_t>(1, gamma_ * 2), max_deg + 1);
    return gamma_;
}

std::vector<VertexId> CacheState::take_newly_resident() {
    std::vector<VertexId> out;
    out.swap(newly_resident_);
    std::sort(out.begin(), out.end());
    return out;
}

void OutputBufferModel::spill_entry(VertexId v, Entry& e, DramModel& dram, uint32_t round) {
    dram.transfer(e.bytes, DramKind::write, std::numeric_limits<uint64_t>::max(),
                  dram.next_write_block(), DramPhase::spill, round);
    spill_events_++;
    spill_bytes_ += e.bytes;
    e.spilled_bytes += e.bytes;
    if (e.onchip) {
        used_ -= e.bytes;
        by_degree_.erase({e.degree, v});
        e.onchip = false;
    }
}

bool OutputBufferModel::note_contribution(VertexId v, uint32_t degree, uint64_t bytes,
                                          DramModel& dram, uint32_t round) {
    auto it = entries_.find(v);
    if (it != entries_.end()) {
        if (it->second.onchip) return true;
        // Already spilled: the updated partial appends to the spill stream.
        dram.transfer(bytes, DramKind::write, std::numeric_limits<uint64_t>::max(),
                      dram.next_write_block(), DramPhase::spill, round);
        spill_bytes_ += bytes;
        return false;
    }
    Entry e;
    e.bytes = bytes;
    e.degree = degree;
    if (used_ + bytes <= capacity_) {
        e.onchip = true;
        used_ += bytes;
        by_degree_.insert({degree, v});
        entries_.emplace(v, e);
        return true;
    }
    // Full: keep the higher-degree partial on chip.
    if (!by_degree_.empty() && by_degree_.begin()->first < degree) {
        auto [victim_deg, victim] = *by_degree_.begin();
        spill_entry(victim, entries_.at(victim), dram, round);
        e.onchip = true;
        used_ += bytes;
        by_degree_.insert({degree, v});
        entries_.emplace(v, e);
        return true;
    }
    e.onchip = false;
    e.spilled_bytes = bytes;
    dram.transfer(bytes, DramKind::write, std::numeric_limits<uint64_t>::max(),
                  dram.next_write_block(), DramPhase::spill, round);
    spill_events_++;
    spill_bytes_ += bytes;
    entries_.emplace(v, e);
    return false;
}

void OutputBufferModel::finalize(VertexId v, DramModel& dram, uint32_t round) {
    auto it = entries_.find(v);
    if (it == entries_.end()) return;
    if (it->second.onchip) {
        used_ -= it->second.bytes;
        by_degree_.erase({it->second.degree, v});
    } else if (it->second.spilled_bytes > 0) {
        // Merge the spilled records back for the final division/activation.
        dram.transfer(it->second.spilled_bytes, DramKind::read,
                      std::numeric_limits<uint64_t>::max(), dram.next_write_block(),
                      DramPhase::spill, round);
    }
    entries_.erase(it);
}

}  // namespace gnnie
