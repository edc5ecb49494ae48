#include "gnnie/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <stdexcept>

namespace gnnie {

namespace {

uint64_t ceil_div(uint64_t a, uint64_t b) { return (a + b - 1) / b; }

// Psum slot bookkeeping shared by mpe_accumulate and the phase event loop.
// Vertex indices are caller-local. A spilled vertex's later partials bypass
// the slot check (they accumulate in the output buffer instead).
class MpeBank {
public:
    MpeBank(uint32_t slots, std::vector<uint32_t> remaining)
        : slots_(slots),
          remaining_(std::move(remaining)),
          inflight_(remaining_.size(), 0),
          spilled_(remaining_.size(), 0) {}

    bool can_accept(uint32_t v) const {
        return inflight_[v] || spilled_[v] || inflight_count_ < slots_;
    }

    bool add_partial(uint32_t v) {
        if (!inflight_[v] && !spilled_[v]) {
            inflight_[v] = 1;
            ++inflight_count_;
        }
        if (remaining_[v] == 0) throw std::logic_error("mpe: partial after completion");
        if (--remaining_[v] == 0) {
            if (inflight_[v]) {
                inflight_[v] = 0;
                --inflight_count_;
            }
            spilled_[v] = 0;
            return true;
        }
        return false;
    }

    uint32_t spill_lowest() {
        for (uint32_t v = 0; v < inflight_.size(); ++v) {
            if (inflight_[v]) {
                inflight_[v] = 0;
                spilled_[v] = 1;
                --inflight_count_;
                return v;
            }
        }
        throw std::logic_error("mpe: spill with nothing in flight");
    }

private:
    uint32_t slots_;
    uint32_t inflight_count_ = 0;
    std::vector<uint32_t> remaining_;
    std::vector<uint8_t> inflight_, spilled_;
};

// Generic emit-time event loop over per-row queues. next_emit(r, t) returns
// the emission time of row r's pending item given the row is free at t;
// vertex_of(r) identifies the pending item's vertex. Rows stall when the
// bank rejects a new vertex; if every active row stalls, the lowest-ID
// in-flight psum spills to the output buffer.
struct MpeLoopResult {
    uint64_t stall_cycles = 0;
    uint64_t stall_events = 0;
    uint64_t spills = 0;
    uint64_t completed = 0;
    std::vector<std::pair<uint32_t, uint64_t>> completions;
};

template <typename NextEmit, typename VertexOf, typename Advance, typename HasMore,
          typename OnRetire>
MpeLoopResult run_mpe_loop(uint32_t num_rows, MpeBank& bank, NextEmit next_emit,
                           VertexOf vertex_of, Advance advance, HasMore has_more,
                           OnRetire on_retire) {
    MpeLoopResult out;
    using HeapItem = std::pair<uint64_t, uint32_t>;
    std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>> heap;
    std::vector<std::pair<uint64_t, uint32_t>> blocked;  // (emit, row)
    for (uint32_t r = 0; r < num_rows; ++r)
        if (has_more(r)) heap.emplace(next_emit(r, 0), r);

    auto retire = [&](uint32_t r, uint64_t t) {
        if (bank.add_partial(vertex_of(r))) {
            out.completed++;
            out.completions.emplace_back(vertex_of(r), t);
        }
        on_retire(r, t);
        advance(r);
        if (has_more(r)) heap.emplace(next_emit(r, t), r);
    };
    auto wake_blocked = [&](uint64_t t) {
        bool progressed = true;
        while (progressed && !blocked.empty()) {
            progressed = false;
            size_t pick = blocked.size();
            for (size_t i = 0; i < blocked.size(); ++i) {
                if (!bank.can_accept(vertex_of(blocked[i].second))) continue;
                if (pick == blocked.size() || blocked[i] < blocked[pick]) pick = i;
            }
            if (pick == blocked.size()) break;
            auto [emit, r] = blocked[pick];
            blocked.erase(blocked.begin() + pick);
            out.stall_cycles += t - emit;
            out.stall_events++;
            retire(r, t);
            progressed = true;
        }
    };

    while (!heap.empty() || !blocked.empty()) {
        if (heap.empty()) {
            uint64_t t = blocked.front().first;
            for (const auto& [emit, r] : blocked) t = std::min(t, emit);
            bank.spill_lowest();
            out.spills++;
            wake_blocked(t);
            continue;
        }
        auto [emit, r] = heap.top();
        heap.pop();
        if (bank.can_accept(vertex_of(r))) {
            retire(r, emit);
            wake_blocked(emit);
        } else {
            blocked.emplace_back(emit, r);
        }
    }
    return out;
}

}  // namespace

WeightingPlan plan_weighting(uint32_t f_in, uint32_t f_out, uint32_t num_vertices,
                             uint64_t feature_bytes_per_vertex, const AcceleratorConfig& cfg) {
    if (f_in < 1 || f_out < 1) throw std::invalid_argument("plan_weighting: zero widths");
    WeightingPlan p;
    p.block_elems = static_cast<uint32_t>(ceil_div(f_in, cfg.array_rows));
    p.blocks_per_vertex = static_cast<uint32_t>(ceil_div(f_in, p.block_elems));
    uint64_t half_buffer = cfg.input_buffer_bytes / 2;  // double buffering
    if (feature_bytes_per_vertex == 0 || feature_bytes_per_vertex > half_buffer)
        throw std::invalid_argument(
            "plan_weighting: feature vector exceeds half the input buffer");
    p.set_vertices = static_cast<uint32_t>(half_buffer / feature_bytes_per_vertex);
    p.num_sets =
        num_vertices ? static_cast<uint32_t>(ceil_div(num_vertices, p.set_vertices)) : 0;
    p.num_passes = static_cast<uint32_t>(ceil_div(f_out, cfg.array_cols));
    return p;
}

std::vector<uint32_t> compute_block_nnz(const FeatureMatrix& h, const WeightingPlan& plan) {
    std::vector<uint32_t> nnz(static_cast<size_t>(h.rows) * plan.blocks_per_vertex, 0);
    for (uint32_t v = 0; v < h.rows; ++v) {
        auto row = h.row(v);
        for (uint32_t b = 0; b < plan.blocks_per_vertex; ++b) {
            uint32_t lo = b * plan.block_elems;
            uint32_t hi = std::min(lo + plan.block_elems, h.cols);
            uint32_t count = 0;
            for (uint32_t e = lo; e < hi; ++e)
                if (row[e] != 0.0f) ++count;
            nnz[static_cast<size_t>(v) * plan.blocks_per_vertex + b] = count;
        }
    }
    return nnz;
}

static void recompute_row_stats(RowAssignment& a, std::span<const uint32_t> block_nnz,
                                const MacProfile& profile) {
    a.row_blocks.assign(a.num_rows, 0);
    a.row_nnz.assign(a.num_rows, 0);
    a.row_cycles_est.assign(a.num_rows, 0);
    for (size_t i = 0; i < a.block_row.size(); ++i) {
        uint8_t r = a.block_row[i];
        if (r == RowAssignment::kSkip) continue;
        a.row_blocks[r]++;
        a.row_nnz[r] += block_nnz[i];
        a.row_cycles_est[r] += ceil_div(block_nnz[i], profile.macs_for_row(r));
    }
}

RowAssignment assign_blocks_direct(std::span<const uint32_t> block_nnz,
                                   uint32_t blocks_per_vertex, const MacProfile& profile,
                                   uint32_t num_rows) {
    RowAssignment a;
    a.num_rows = num_rows;
    a.blocks_per_vertex = blocks_per_vertex;
    a.block_row.assign(block_nnz.size(), RowAssignment::kSkip);
    for (size_t i = 0; i < block_nnz.size(); ++i) {
        if (block_nnz[i] == 0) continue;
        a.block_row[i] = static_cast<uint8_t>(i % blocks_per_vertex);
    }
    recompute_row_stats(a, block_nnz, profile);
    return a;
}

RowAssignment bin_blocks(std::span<const uint32_t> block_nnz, uint32_t blocks_per_vertex,
                         const MacProfile& profile, uint32_t num_rows) {
    RowAssignment a;
    a.num_rows = num_rows;
    a.blocks_per_vertex = blocks_per_vertex;
    a.block_row.assign(block_nnz.size(), RowAssignment::kSkip);

    // Counting sort by nnz; ascending index within equal counts keeps ties
    // in (vertex, block) order. Linear time.
    uint32_t max_nnz = 0;
    for (uint32_t c : block_nnz) max_nnz = std::max(max_nnz, c);
    std::vector<uint64_t> bucket_start(max_nnz + 2, 0);
    uint64_t total = 0;
    for (uint32_t c : block_nnz)
        if (c > 0) {
            bucket_start[c + 1]++;
            ++total;
        }
    for (size_t i = 1; i < bucket_start.size(); ++i) bucket_start[i] += bucket_start[i - 1];
    std::vector<uint64_t> sorted(total);
    {
        std::vector<uint64_t> cursor(bucket_start.begin(), bucket_start.end() - 1);
        for (size_t i = 0; i < block_nnz.size(); ++i)
            if (block_nnz[i] > 0) sorted[cursor[block_nnz[i]]++] = i;
    }

    // Equal per-row population: bin i covers a share of the sorted blocks
    // proportional to group i's row count, so every CPE row queues the same
    // number of blocks and denser bins land on MAC-richer rows. For groups
    // of equal size this is the plain equal-population split.
    uint32_t groups = profile.num_groups();
    uint32_t total_rows = profile.group_row_bounds.back();
    for (uint32_t g = 0; g < groups; ++g) {
        uint64_t lo = total * profile.group_row_bounds[g] / total_rows;
        uint64_t hi = total * profile.group_row_bounds[g + 1] / total_rows;
        uint32_t row_lo = profile.group_row_bounds[g];
        uint32_t row_count = profile.group_row_bounds[g + 1] - row_lo;
        for (uint64_t p = lo; p < hi; ++p)
            a.block_row[sorted[p]] =
                static_cast<uint8_t>(row_lo + static_cast<uint32_t>((p - lo) % row_count));
    }
    recompute_row_stats(a, block_nnz, profile);
    return a;
}

void apply_load_redistribution(RowAssignment& a, std::span<const uint32_t> block_nnz,
                               const MacProfile& profile, uint32_t max_pairs) {
    if (a.num_rows < 2) return;
    // Per-row block lists sorted by (nnz, index): cheap blocks migrate first,
    // they lose the least on a row with fewer MACs.
    auto by_nnz = [&](uint64_t x, uint64_t y) {
        if (block_nnz[x] != block_nnz[y]) return block_nnz[x] < block_nnz[y];
        return x < y;
    };
    std::vector<std::vector<uint64_t>> row_lists(a.num_rows);
    for (size_t i = 0; i < a.block_row.size(); ++i)
        if (a.block_row[i] != RowAssignment::kSkip) row_lists[a.block_row[i]].push_back(i);
    for (auto& list : row_lists) std::sort(list.begin(), list.end(), by_nnz);

    auto loads = a.row_cycles_est;
    for (uint32_t pair = 0; pair < max_pairs; ++pair) {
        uint32_t heavy = 0, light = 0;
        for (uint32_t r = 1; r < a.num_rows; ++r) {
            if (loads[r] > loads[heavy]) heavy = r;
            if (loads[r] < loads[light]) light = r;
        }
        if (heavy == light || loads[heavy] == loads[light]) break;

        bool moved = false;
        auto& src = row_lists[heavy];
        size_t next = 0;
        while (next < src.size()) {
            uint64_t blk = src[next];
            uint64_t cost_l = ceil_div(block_nnz[blk], profile.macs_for_row(light));
            if (loads[heavy] <= loads[light] + cost_l) break;
            uint64_t cost_h = ceil_div(block_nnz[blk], profile.macs_for_row(heavy));
            a.block_row[blk] = static_cast<uint8_t>(light);
            loads[heavy] -= cost_h;
            loads[light] += cost_l;
            row_lists[light].push_back(blk);
            ++next;
            moved = true;
        }
        src.erase(src.begin(), src.begin() + next);
        if (!moved) break;
        a.lr_offload_events++;
        std::sort(row_lists[light].begin(), row_lists[light].end(), by_nnz);
    }
    recompute_row_stats(a, block_nnz, profile);
}

MpeOutcome mpe_accumulate(std::span<const MpeEvent> events,
                          std::span<const uint32_t> partials_needed, uint32_t psum_slots) {
    if (psum_slots == 0) throw std::invalid_argument("mpe: zero slots");
    // Events are each row's emission schedule; a stalled row pushes its own
    // later emissions back, other rows are unaffected.
    uint32_t max_row = 0;
    for (const auto& e : events) max_row = std::max(max_row, e.row);
    std::vector<std::vector<const MpeEvent*>> rows(max_row + 1);
    for (const auto& e : events) {
        if (e.vertex >= partials_needed.size())
            throw std::invalid_argument("mpe: vertex out of range");
        rows[e.row].push_back(&e);
    }
    std::vector<size_t> cursor(rows.size(), 0);

    MpeBank bank(psum_slots,
                 std::vector<uint32_t>(partials_needed.begin(), partials_needed.end()));
    auto loop = run_mpe_loop(
        static_cast<uint32_t>(rows.size()), bank,
        [&](uint32_t r, uint64_t t) { return std::max(rows[r][cursor[r]]->time, t); },
        [&](uint32_t r) { return rows[r][cursor[r]]->vertex; },
        [&](uint32_t r) { cursor[r]++; },
        [&](uint32_t r) { return cursor[r] < rows[r].size(); },
        [](uint32_t, uint64_t) {});

    MpeOutcome out;
    out.completed = loop.completed;
    out.stall_cycles = loop.stall_cycles;
    out.stall_events = loop.stall_events;
    out.spills = loop.spills;
    out.completions = std::move(loop.completions);
    return out;
}

WeightingResult simulate_weighting(const FeatureMatrix& h, const FeatureMatrix& w,
                                   const AcceleratorConfig& cfg, const WeightingOptions& opts,
                                   DramModel& dram) {
    uint64_t feature_bytes = static_cast<uint64_t>(h.cols) * 4;
    if (opts.rlc_input) {
        uint64_t max_row = 0;
        for (uint32_t v = 0; v < h.rows; ++v)
            max_row = std::max(max_row, rlc_row_bytes(h.row(v)));
        feature_bytes = std::max<uint64_t>(max_row, 1);
    }
    WeightingPlan plan = plan_weighting(h.cols, w.cols, h.rows, feature_bytes, cfg);
    auto nnz = compute_block_nnz(h, plan);
    RowAssignment assignment =
        opts.fm ? bin_blocks(nnz, plan.blocks_per_vertex, cfg.mac_profile, cfg.array_rows)
                : assign_blocks_direct(nnz, plan.blocks_per_vertex, cfg.mac_profile,
                                       cfg.array_rows);
    if (opts.lr)
        apply_load_redistribution(assignment, nnz, cfg.mac_profile, opts.lr_max_pairs);
    return simulate_weighting(h, w, cfg, plan, std::move(assignment), opts.rlc_input, dram);
}

WeightingResult simulate_weighting(const FeatureMatrix& h, const FeatureMatrix& w,
                                   const AcceleratorConfig& cfg, const WeightingPlan& plan,
                                   RowAssignment assignment, bool rlc_input, DramModel& dram) {
    if (h.cols != w.rows) throw std::invalid_argument("weighting: H/W shape mismatch");
    cfg.validate();
    if (cfg.array_rows >= RowAssignment::kSkip)
        throw std::invalid_argument("weighting: array_rows too large");
    uint32_t num_vertices = h.rows;
    uint32_t f_in = h.cols;
    uint32_t f_out = w.cols;
    uint32_t rows = cfg.array_rows;
    uint64_t pass_weight_bytes = static_cast<uint64_t>(f_in) * cfg.array_cols * 4;
    if (pass_weight_bytes > cfg.weight_buffer_bytes / 2)
        throw std::invalid_argument("weighting: pass weights exceed half the weight buffer");

    WeightingResult res;
    res.plan = plan;
    res.stats.phase = "weighting";
    res.row_cycles.assign(rows, 0);

    // Functional product, float32. Per-row accumulation runs in ascending
    // element order (what the MPE sees from ascending block order); rows are
    // independent, so the OpenMP schedule cannot change the result.
    res.weighted = FeatureMatrix(num_vertices, f_out);
    int64_t vcount = num_vertices;
#pragma omp parallel for schedule(static)
    for (int64_t v = 0; v < vcount; ++v) {
        auto hrow = h.row(static_cast<uint32_t>(v));
        auto orow = res.weighted.row(static_cast<uint32_t>(v));
        for (uint32_t e = 0; e < f_in; ++e) {
            float x = hrow[e];
            if (x == 0.0f) continue;
            auto wrow = w.row(e);
            for (uint32_t c = 0; c < f_out; ++c) orow[c] += x * wrow[c];
        }
    }

    auto nnz = compute_block_nnz(h, plan);
    uint64_t total_nnz = 0;
    for (uint32_t c : nnz) total_nnz += c;
    res.stats.mac_ops = total_nnz * f_out;
    res.stats.skipped_zero_mults =
        (static_cast<uint64_t>(num_vertices) * f_in - total_nnz) * f_out;
    res.stats.input_buffer_bytes = total_nnz * 4 * plan.num_passes;
    res.stats.weight_buffer_bytes = res.stats.mac_ops * 4;
    res.stats.output_buffer_bytes = static_cast<uint64_t>(num_vertices) * f_out * 4;

    // Cycle model for one pass; every pass replays the same queues against
    // fresh weight columns, so per-pass timing is identical.
    uint64_t pass_compute = 0;
    uint64_t stalls = 0, stall_events = 0, spills = 0;
    std::vector<uint64_t> set_durations(plan.num_sets, 0);
    std::vector<uint64_t> set_feature_bytes(plan.num_sets, 0);

    std::vector<std::vector<uint64_t>> row_queue(rows);
    for (uint32_t set = 0; set < plan.num_sets; ++set) {
        uint32_t v_lo = set * plan.set_vertices;
        uint32_t v_hi = std::min(num_vertices, v_lo + plan.set_vertices);
        for (auto& q : row_queue) q.clear();
        std::vector<uint32_t> partials(v_hi - v_lo, 0);
        uint64_t bytes = 0;
        for (uint32_t v = v_lo; v < v_hi; ++v) {
            bytes += rlc_input ? rlc_row_bytes(h.row(v)) : static_cast<uint64_t>(f_in) * 4;
            for (uint32_t b = 0; b < plan.blocks_per_vertex; ++b) {
                size_t idx = static_cast<size_t>(v) * plan.blocks_per_vertex + b;
                if (assignment.block_row[idx] == RowAssignment::kSkip) continue;
                row_queue[assignment.block_row[idx]].push_back(idx);
                partials[v - v_lo]++;
            }
        }
        set_feature_bytes[set] = bytes;

        MpeBank bank(cfg.psum_slots, partials);
        std::vector<size_t> cursor(rows, 0);
        std::vector<uint64_t> row_time(rows, 0);
        // Workload histogram counts compute cycles only; psum stalls are
        // accounted separately so backpressure does not mask row imbalance.
        for (uint32_t r = 0; r < rows; ++r)
            for (uint64_t idx : row_queue[r])
                res.row_cycles[r] += ceil_div(nnz[idx], cfg.mac_profile.macs_for_row(r));
        auto block_cost = [&](uint32_t r) {
            return ceil_div(nnz[row_queue[r][cursor[r]]], cfg.mac_profile.macs_for_row(r));
        };
        auto loop = run_mpe_loop(
            rows, bank, [&](uint32_t r, uint64_t t) { return t + block_cost(r); },
            [&](uint32_t r) {
                return static_cast<uint32_t>(row_queue[r][cursor[r]] /
                                             plan.blocks_per_vertex) -
                       v_lo;
            },
            [&](uint32_t r) { cursor[r]++; },
            [&](uint32_t r) { return cursor[r] < row_queue[r].size(); },
            [&](uint32_t r, uint64_t t) { row_time[r] = t; });
        stalls += loop.stall_cycles;
        stall_events += loop.stall_events;
        spills += loop.spills;

        uint64_t dur = 0;
        for (uint32_t r = 0; r < rows; ++r) dur = std::max(dur, row_time[r]);
        set_durations[set] = dur;
        pass_compute += dur;
    }

    for (uint32_t r = 0; r < rows; ++r) res.row_cycles[r] *= plan.num_passes;
    res.stats.psum_spills = spills * plan.num_passes;

    // DRAM streams. The phase's first fetch is cold; later fetches hide
    // behind the previous set's or pass's compute (double buffering). LR
    // offloads reload the moved bins' weight columns once per pass.
    uint64_t charged = cfg.dram_first_access_latency_cycles;
    uint64_t read_bytes = 0, written_bytes = 0;
    uint64_t lr_penalty_per_pass =
        static_cast<uint64_t>(assignment.lr_offload_events) *
        dram.raw_cycles(static_cast<uint64_t>(f_in) * 4);
    for (uint32_t p = 0; p < plan.num_passes; ++p) {
        uint32_t cols = std::min(cfg.array_cols, f_out - p * cfg.array_cols);
        uint64_t wbytes = static_cast<uint64_t>(f_in) * cols * 4;
        charged += dram.transfer(wbytes, DramKind::read, p == 0 ? 0 : pass_compute, p,
                                 DramPhase::weighting, 0);
        read_bytes += wbytes;
        for (uint32_t set = 0; set < plan.num_sets; ++set) {
            uint64_t overlap =
                (p == 0 && set == 0)
                    ? 0
                    : (set == 0 ? set_durations[plan.num_sets - 1] : set_durations[set - 1]);
            charged += dram.transfer(set_feature_bytes[set], DramKind::read, overlap, set,
                                     DramPhase::weighting, 0);
            read_bytes += set_feature_bytes[set];
        }
        uint64_t obytes = static_cast<uint64_t>(num_vertices) * cols * 4;
        charged += dram.transfer(obytes, DramKind::write, pass_compute,
                                 dram.next_write_block(), DramPhase::weighting, 0);
        written_bytes += obytes;
    }

    // Set durations already include psum stalls; they are reported in
    // stall_cycles but not re-added to the total.
    res.stats.cycles =
        pass_compute * plan.num_passes + charged + lr_penalty_per_pass * plan.num_passes;
    res.stats.stall_cycles =
        stalls * plan.num_passes + charged + lr_penalty_per_pass * plan.num_passes;
    res.stats.dram_bytes_read = read_bytes;
    res.stats.dram_bytes_written = written_bytes;
    res.assignment = std::move(assignment);
    return res;
}

}  // namespace gnnie
