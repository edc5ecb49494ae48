#include "gnnie/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gnnie {

namespace {

uint64_t ceil_div(uint64_t a, uint64_t b) { return (a + b - 1) / b; }

// CPE cell costs for one vec_width vector op, ascending; ops are packed onto
// the fastest free cells first.
struct CellCosts {
    std::vector<uint64_t> sorted;

    CellCosts(const AcceleratorConfig& cfg, uint32_t vec_width) {
        sorted.reserve(static_cast<size_t>(cfg.array_rows) * cfg.array_cols);
        for (uint32_t r = 0; r < cfg.array_rows; ++r) {
            uint64_t cost = ceil_div(std::max<uint32_t>(vec_width, 1),
                                     cfg.mac_profile.macs_for_row(r));
            for (uint32_t c = 0; c < cfg.array_cols; ++c) sorted.push_back(cost);
        }
        std::sort(sorted.begin(), sorted.end());
    }

    uint64_t capacity() const { return sorted.size(); }
    // ops <= capacity: duration of one level.
    uint64_t level_cycles(uint64_t ops) const { return ops == 0 ? 0 : sorted[ops - 1]; }
    // Arbitrary op count in full waves.
    uint64_t wave_cycles(uint64_t ops) const {
        uint64_t full = ops / capacity();
        uint64_t rem = ops % capacity();
        return full * sorted.back() + (rem ? sorted[rem - 1] : 0);
    }
};

}  // namespace

AttentionResult compute_attention_scalars(const FeatureMatrix& weighted,
                                          std::span<const float> a1,
                                          std::span<const float> a2,
                                          const AcceleratorConfig& cfg, DramModel& dram) {
    uint32_t f = weighted.cols;
    uint32_t n = weighted.rows;
    if (a1.size() != f || a2.size() != f)
        throw std::invalid_argument("attention: vector width mismatch");

    AttentionResult res;
    res.stats.phase = "attention";
    res.scalars.e1.assign(n, 0.0f);
    res.scalars.e2.assign(n, 0.0f);
    uint64_t mults = 0;
    for (uint32_t v = 0; v < n; ++v) {
        auto row = weighted.row(v);
        float s1 = 0.0f, s2 = 0.0f;
        for (uint32_t k = 0; k < f; ++k) {
            s1 += static_cast<float>(a1[k]) * row[k];
            ++mults;
        }
        for (uint32_t k = 0; k < f; ++k) {
            s2 += static_cast<float>(a2[k]) * row[k];
            ++mults;
        }
        res.scalars.e1[v] = s1;
        res.scalars.e2[v] = s2;
    }
    res.stats.scalar_mults = mults;
    res.stats.mac_ops = mults;

    // eta splits into N blocks of G across a row's columns; each batch holds
    // V_a vertices per column (V_a = |OB|/N) and runs an a1 pass then an a2
    // pass reusing the cached eta.
    uint32_t cols = cfg.array_cols;
    uint32_t g_chunk = static_cast<uint32_t>(ceil_div(f, cols));
    std::vector<uint64_t> row_cost(cfg.array_rows);
    for (uint32_t r = 0; r < cfg.array_rows; ++r)
        row_cost[r] = ceil_div(g_chunk, cfg.mac_profile.macs_for_row(r));
    std::sort(row_cost.begin(), row_cost.end());

    uint64_t ob_vertices =
        std::max<uint64_t>(1, cfg.output_buffer_bytes / (static_cast<uint64_t>(f) * 4));
    uint64_t batch = std::max<uint64_t>(1, (ob_vertices / cols) * cols);
    uint64_t cycles = 0;
    uint64_t prev_batch_cycles = 0;
    uint64_t charged = n ? cfg.dram_first_access_latency_cycles : 0;
    for (uint64_t lo = 0; lo < n; lo += batch) {
        uint64_t count = std::min<uint64_t>(batch, n - lo);
        uint64_t waves_full = count / cfg.array_rows;
        uint64_t rem = count % cfg.array_rows;
        uint64_t batch_cycles =
            2 * (waves_full * row_cost.back() + (rem ? row_cost[rem - 1] : 0));
        uint64_t bytes = count * f * 4;
        charged += dram.transfer(bytes, DramKind::read, lo == 0 ? 0 : prev_batch_cycles,
                                 lo / batch, DramPhase::attention, 0);
        cycles += batch_cycles;
        prev_batch_cycles = batch_cycles;
    }
    // e1/e2 append to each vertex record.
    uint64_t ebytes = static_cast<uint64_t>(n) * 8;
    dram.transfer(ebytes, DramKind::write, std::numeric_limits<uint64_t>::max(),
                  dram.next_write_block(), DramPhase::attention, 0);

    res.stats.cycles = cycles + charged;
    res.stats.stall_cycles = charged;
    res.stats.dram_bytes_read = static_cast<uint64_t>(n) * f * 4;
    res.stats.dram_bytes_written = ebytes;
    res.stats.output_buffer_bytes = mults * 4 + ebytes;
    res.stats.weight_buffer_bytes = mults * 4;
    return res;
}

PairwiseSchedule map_edges_to_cpes(std::span<const uint32_t> operand_counts,
                                   const AcceleratorConfig& cfg, uint32_t vec_width) {
    CellCosts cells(cfg, vec_width);
    uint64_t cap = cells.capacity();
    PairwiseSchedule sched;
    std::vector<uint32_t> avail(operand_counts.begin(), operand_counts.end());
    std::vector<uint32_t> next(avail.size());
    while (true) {
        uint64_t level = 0;
        for (size_t v = 0; v < avail.size(); ++v) {
            uint32_t pairs = avail[v] / 2;
            uint32_t take =
                static_cast<uint32_t>(std::min<uint64_t>(pairs, cap - level));
            next[v] = avail[v] - 2 * take + take;
            level += take;
        }
        if (level == 0) break;
        sched.level_ops.push_back(level);
        sched.total_ops += level;
        sched.cycles += cells.level_cycles(level);
        std::swap(avail, next);
    }
    return sched;
}

PairwiseSchedule map_edges_to_cpes(std::span<const EdgeRef> edges, uint32_t num_vertices,
                                   const AcceleratorConfig& cfg, uint32_t vec_width) {
    std::vector<uint32_t> operands(num_vertices, 0);
    for (const auto& e : edges) {
        operands[e.u]++;
        if (e.v != e.u) operands[e.v]++;
    }
    return map_edges_to_cpes(operands, cfg, vec_width);
}

GatEdgeResult gat_edge_op(float e1_i, float e2_j, std::span<const float> eta_j,
                          const SfuModel& sfu, PhaseStats* stats) {
    GatEdgeResult out;
    float e = e1_i + e2_j;
    float w = sfu.exp_eval(sfu.leaky_relu(e), stats);
    if (stats) stats->sfu_ops++;  // the LeakyReLU step
    out.denominator = w;
    out.numerator.resize(eta_j.size());
    for (size_t k = 0; k < eta_j.size(); ++k) out.numerator[k] = w * eta_j[k];
    return out;
}

std::vector<float> finalize_vertex(VertexAggState& st, const LayerSpec& spec,
                                   const SfuModel& sfu) {
    if (st.alpha != 0)
        throw std::logic_error("finalize_vertex: unprocessed edges remain");
    if (st.finalized) throw std::logic_error("finalize_vertex: already finalized");
    std::vector<float> out(st.acc.begin(), st.acc.end());
    switch (spec.kind) {
        case LayerKind::gat: {
            if (st.denominator == 0.0f)
                throw std::logic_error("finalize_vertex: zero softmax denominator");
            for (auto& v : out) v /= st.denominator;
            apply_activation(std::span<float>(out), spec.activation);
            break;
        }
        case LayerKind::gcn:
            apply_activation(std::span<float>(out), spec.activation);
            break;
        case LayerKind::graphsage: {
            if (spec.aggregator == Aggregator::mean && st.members > 0)
                for (auto& v : out) v /= static_cast<float>(st.members);
            apply_activation(std::span<float>(out), spec.activation);
            break;
        }
        case LayerKind::ginconv: {
            // Hidden-stage bias + ReLU; W2 runs as a second Weighting pass.
            for (size_t k = 0; k < out.size(); ++k) {
                out[k] += static_cast<float>(spec.mlp.b1[k]);
                if (out[k] < 0.0f) out[k] = 0.0f;
            }
            break;
        }
    }
    st.finalized = true;
    (void)sfu;
    return out;
}

AggregationResult simulate_aggregation(const Graph& g, const FeatureMatrix& weighted,
                                       const AttentionScalars* scalars, const LayerSpec& spec,
                                       const VertexOrder& order, const AcceleratorConfig& cfg,
                                       const AggregationOptions& opts,
                                       const std::vector<std::vector<VertexId>>* sage_samples,
                                       DramModel& dram) {
    uint32_t n = g.num_vertices;
    uint32_t f = weighted.cols;
    if (weighted.rows != n) throw std::invalid_argument("aggregation: weighted rows != |V|");
    if (spec.kind == LayerKind::gat && !scalars)
        throw std::invalid_argument("aggregation: GAT needs attention scalars");
    if (spec.kind == LayerKind::graphsage && !sage_samples)
        throw std::invalid_argument("aggregation: GraphSAGE needs sample sets");

    SfuModel sfu(cfg.sfu, spec.leaky_slope);
    AggregationResult res;
    res.stats.phase = "aggregation";
    res.outputs = FeatureMatrix(n, f);

    // Vertex footprint in the input buffer: eta (+e1,e2 for GAT), alpha,
    // offset, and the coordinate entries.
    std::vector<uint64_t> vbytes(n);
    uint64_t gat_extra = spec.kind == LayerKind::gat ? 8 : 0;
    for (VertexId v = 0; v < n; ++v)
        vbytes[v] = static_cast<uint64_t>(f) * 4 + gat_extra + 8 +
                    static_cast<uint64_t>(g.degree(v)) * 4;
    CacheConfig ccfg = resolve_cache_config(cfg.cache, cfg.input_buffer_bytes, vbytes);
    CacheState cache(g, order, ccfg, vbytes, dram, opts.trace_round_offset);
    OutputBufferModel ob(cfg.output_buffer_bytes);
    res.stats.stall_cycles += cache.init_charged_cycles();
    res.stats.cycles += cache.init_charged_cycles() + cfg.dram_first_access_latency_cycles;

    std::vector<VertexAggState> st(n);
    for (auto& s : st) s.acc.assign(f, 0.0f);

    // GCN normalization degrees: |{i} union N(i)|.
    std::vector<float> inv_sqrt_d;
    if (spec.kind == LayerKind::gcn) {
        inv_sqrt_d.resize(n);
        for (VertexId v = 0; v < n; ++v) {
            uint32_t d = g.degree(v) + (g.has_self_loop(v) ? 0 : 1);
            inv_sqrt_d[v] = 1.0f / std::sqrt(static_cast<float>(d));
        }
    }
    float eps_plus_1 = static_cast<float>(1.0 + spec.epsilon);
    uint64_t ob_record_bytes = (static_cast<uint64_t>(f) + (gat_extra ? 1 : 0)) * 4;

    CellCosts cells(cfg, f);
    uint64_t cell_count = cells.capacity();
    bool gat = spec.kind == LayerKind::gat;
    bool gcn = spec.kind == LayerKind::gcn;
    bool sage = spec.kind == LayerKind::graphsage;
    bool gin = spec.kind == LayerKind::ginconv;

    auto sampled = [&](VertexId target, VertexId source) {
        const auto& s = (*sage_samples)[target];
        return std::binary_search(s.begin(), s.end(), source);
    };

    // Self term on first residency. Explicit self-loop edges carry the self
    // term for GCN/GAT instead (the neighborhood union counts i once).
    auto apply_self = [&](VertexId v) -> uint32_t {
        auto& s = st[v];
        if (s.self_done) return 0;
        s.self_done = true;
        auto eta = weighted.row(v);
        uint32_t prep_ops = 0;
        if (gcn) {
            if (!g.has_self_loop(v)) {
                float c = inv_sqrt_d[v] * inv_sqrt_d[v];
                for (uint32_t k = 0; k < f; ++k) s.acc[k] += c * eta[k];
                prep_ops = 1;
                s.has_partial = true;
            }
        } else if (gat) {
            if (!g.has_self_loop(v)) {
                float w = sfu.exp_eval(
                    sfu.leaky_relu(scalars->e1[v] + scalars->e2[v]), &res.stats);
                for (uint32_t k = 0; k < f; ++k) s.acc[k] += w * eta[k];
                s.denominator += w;
                prep_ops = 1;
                s.has_partial = true;
            }
        } else if (sage) {
            for (uint32_t k = 0; k < f; ++k) s.acc[k] = eta[k];
            s.members = 1;
            s.has_partial = true;
        } else if (gin) {
            for (uint32_t k = 0; k < f; ++k) s.acc[k] += eps_plus_1 * eta[k];
            prep_ops = 1;
            s.has_partial = true;
        }
        return prep_ops;
    };

    // One directed contribution source -> target. Returns true if it costs
    // an operand (false for sampled-out or deduplicated self edges).
    auto apply_contribution = [&](VertexId target, VertexId source) -> bool {
        auto& s = st[target];
        auto eta = weighted.row(source);
        if (gcn) {
            float c = inv_sqrt_d[target] * inv_sqrt_d[source];
            for (uint32_t k = 0; k < f; ++k) s.acc[k] += c * eta[k];
        } else if (gat) {
            float w = sfu.exp_eval(
                sfu.leaky_relu(scalars->e1[target] + scalars->e2[source]), &res.stats);
            for (uint32_t k = 0; k < f; ++k) s.acc[k] += w * eta[k];
            s.denominator += w;
        } else if (sage) {
            if (source == target || !sampled(target, source)) return false;
            if (spec.aggregator == Aggregator::max) {
                for (uint32_t k = 0; k < f; ++k) s.acc[k] = std::max(s.acc[k], eta[k]);
            } else {
                for (uint32_t k = 0; k < f; ++k) s.acc[k] += eta[k];
                s.members++;
            }
        } else {  // gin
            for (uint32_t k = 0; k < f; ++k) s.acc[k] += eta[k];
        }
        s.has_partial = true;
        return true;
    };

    auto finalize_now = [&](VertexId v) {
        st[v].alpha = cache.alpha(v);
        auto row = finalize_vertex(st[v], spec, sfu);
        std::copy(row.begin(), row.end(), res.outputs.row(v).begin());
        ob.finalize(v, dram, cache.trace_round());
        uint64_t bytes = static_cast<uint64_t>(f) * 4;
        dram.transfer(bytes, DramKind::write, std::numeric_limits<uint64_t>::max(),
                      dram.next_write_block(), DramPhase::output, cache.trace_round());
        res.stats.dram_bytes_written += bytes;
    };

    std::vector<uint32_t> operand_counts(n, 0);
    std::vector<uint8_t> prev_partial(n, 0);
    uint64_t no_progress_iterations = 0;
    uint32_t last_round = cache.round();
    uint64_t unprocessed_at_round_start = cache.unprocessed_edges();
    while (res.iterations < opts.max_iterations) {
        res.iterations++;
        uint64_t iteration_cycles = 0;
        uint64_t prep_ops = 0;

        for (VertexId v : cache.take_newly_resident()) prep_ops += apply_self(v);
        for (VertexId v = 0; v < n; ++v) prev_partial[v] = st[v].has_partial ? 1 : 0;

        auto edges = cache.current_subgraph();
        std::fill(operand_counts.begin(), operand_counts.end(), 0);
        uint64_t contributions = 0;
        for (const auto& e : edges) {
            if (e.u == e.v) {
                bool counted = !sage && apply_contribution(e.u, e.u);
                if (counted) {
                    operand_counts[e.u]++;
                    ++contributions;
                }
                if (sage) st[e.u].has_partial = true;
            } else {
                if (apply_contribution(e.u, e.v)) {
                    operand_counts[e.u]++;
                    ++contributions;
                }
                if (apply_contribution(e.v, e.u)) {
                    operand_counts[e.v]++;
                    ++contributions;
                }
            }
        }

        // Output-buffer pressure: partials are written back after every edge
        // contribution; placement follows the degree priority rule.
        for (VertexId v = 0; v < n && !edges.empty(); ++v) {
            if (operand_counts[v] == 0) continue;
            ob.note_contribution(v, g.degree(v), ob_record_bytes, dram, cache.trace_round());
            res.stats.output_buffer_bytes += ob_record_bytes * operand_counts[v];
        }

        // Timing: per-contribution prep (coefficient/exp scaling), the adder
        // tree, then finalize vector ops.
        if (gat || gcn) prep_ops += contributions;
        res.stats.mac_ops += (prep_ops + contributions) * f;
        if (!edges.empty() || prep_ops) {
            if (opts.lb) {
                // A vertex carrying a partial from earlier iterations needs
                // one extra operand slot to merge it.
                std::vector<uint32_t> tree(operand_counts);
                for (VertexId v = 0; v < n; ++v)
                    if (tree[v] > 0 && prev_partial[v]) tree[v]++;
                auto sched = map_edges_to_cpes(tree, cfg, f);
                uint64_t prep_cycles = cells.wave_cycles(prep_ops);
                if (gat && prep_ops) {
                    uint64_t waves = ceil_div(prep_ops, cell_count);
                    prep_cycles += waves * (cfg.sfu.exp_latency + cfg.sfu.leaky_latency);
                }
                iteration_cycles += prep_cycles + sched.cycles;
            } else {
                // One vertex per CPE: each vertex's ops serialize on its cell.
                std::vector<uint64_t> cell_load(cell_count, 0);
                for (VertexId v = 0; v < n; ++v) {
                    uint64_t ops = operand_counts[v];
                    if (ops == 0) continue;
                    uint64_t cell = v % cell_count;
                    uint32_t row = static_cast<uint32_t>(cell / cfg.array_cols);
                    uint64_t cost = ceil_div(f, cfg.mac_profile.macs_for_row(row));
                    uint64_t vertex_ops = ops + ((gat || gcn) ? ops : 0);
                    cell_load[cell] += vertex_ops * cost;
                }
                uint64_t busiest = 0;
                for (uint64_t c : cell_load) busiest = std::max(busiest, c);
                iteration_cycles += busiest;
                if (gat && contributions)
                    iteration_cycles += cfg.sfu.exp_latency + cfg.sfu.leaky_latency;
            }
        }

        cache.commit_processed(edges);

        // Finalize residents whose last edge just processed.
        std::vector<VertexId> done;
        for (VertexId v : cache.resident_list())
            if (!st[v].finalized && cache.alpha(v) == 0 && st[v].self_done) done.push_back(v);
        if (!done.empty()) {
            uint64_t fin_ops = 0;
            for (VertexId v : done) {
                finalize_now(v);
                if (gat || (sage && spec.aggregator == Aggregator::mean) || gin) fin_ops++;
            }
            if (fin_ops) {
                iteration_cycles += opts.lb ? cells.wave_cycles(fin_ops)
                                            : cells.sorted.back() * fin_ops;
                if (gat || (sage && spec.aggregator == Aggregator::mean))
                    iteration_cycles += cfg.sfu.divide_latency;
                res.stats.sfu_ops += fin_ops;
            }
        }

        res.stats.cycles += iteration_cycles;
        if (cache.unprocessed_edges() == 0) break;

        bool had_edges = !edges.empty();
        if (!had_edges && cache.detect_deadlock()) {
            if (opts.dynamic_gamma) {
                cache.escalate_gamma();
                res.gamma_escalations++;
            } else {
                res.deadlocked = true;
                break;
            }
        }
        auto refill = cache.evict_and_refill(dram, iteration_cycles);
        res.stats.cycles += refill.charged_cycles;
        res.stats.stall_cycles += refill.charged_cycles;
        res.stats.dram_bytes_read += refill.bytes_read;
        res.stats.dram_bytes_written += refill.bytes_written;
        if (!had_edges && refill.loaded.empty() && refill.evicted.empty()) {
            if (++no_progress_iterations > n + 2) {
                res.deadlocked = true;
                break;
            }
        } else {
            no_progress_iterations = 0;
        }
        // Round-granular progress counter: a full sweep of the vertex stream
        // that processes no edge can never recover by itself.
        if (cache.round() > last_round) {
            if (cache.unprocessed_edges() >= unprocessed_at_round_start) {
                if (opts.dynamic_gamma) {
                    uint32_t old_gamma = cache.gamma();
                    if (cache.escalate_gamma() == old_gamma) {
                        res.deadlocked = true;
                        break;
                    }
                    res.gamma_escalations++;
                } else {
                    res.deadlocked = true;
                    break;
                }
            }
            last_round = cache.round();
            unprocessed_at_round_start = cache.unprocessed_edges();
        }
    }
    if (res.iterations >= opts.max_iterations && cache.unprocessed_edges() > 0)
        res.deadlocked = true;

    // Vertices that completed without residency (isolated, or alpha already
    // zero when the cursor passed them) still produce an output row; they
    // stream through once at the tail.
    if (!res.deadlocked) {
        uint64_t tail_bytes = 0;
        for (VertexId v = 0; v < n; ++v) {
            if (st[v].finalized) continue;
            apply_self(v);
            finalize_now(v);
            if (!cache.is_resident(v)) tail_bytes += vbytes[v];
        }
        if (tail_bytes) {
            uint64_t charged = dram.transfer(tail_bytes, DramKind::read, 0,
                                             dram.next_write_block(), DramPhase::output,
                                             cache.trace_round());
            res.stats.cycles += charged;
            res.stats.stall_cycles += charged;
            res.stats.dram_bytes_read += tail_bytes;
        }
    }

    res.alpha_histograms = cache.alpha_histograms();
    res.rounds = cache.round();
    res.initial_alpha_sum = cache.initial_alpha_sum();
    res.alpha_decrements = cache.alpha_decrements();
    res.ob_spill_events = ob.spill_events();
    res.stats.psum_spills = ob.spill_events();
    res.stats.dram_bytes_read += cache.init_bytes_read();
    res.stats.dram_bytes_written += ob.spill_bytes();
    return res;
}

}  // namespace gnnie
