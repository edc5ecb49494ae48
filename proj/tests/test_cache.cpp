#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>

#include "doctest.h"
#include "gnnie/cache.hpp"
#include "testutil.hpp"

using namespace gnnie;
using namespace testutil;

namespace {

std::vector<uint64_t> flat_bytes(const Graph& g, uint64_t per_vertex = 4) {
    return std::vector<uint64_t>(g.num_vertices, per_vertex);
}

CacheConfig cache_cfg(uint32_t capacity, uint32_t gamma, uint32_t r, uint32_t block = 8) {
    CacheConfig c;
    c.capacity_vertices = capacity;
    c.gamma = gamma;
    c.r_evict = r;
    c.block_size_vertices = block;
    return c;
}

std::set<std::pair<VertexId, VertexId>> edge_set(const std::vector<EdgeRef>& edges) {
    std::set<std::pair<VertexId, VertexId>> s;
    for (const auto& e : edges) s.insert({e.u, e.v});
    return s;
}

}  // namespace

TEST_CASE("fig7 walkthrough: init, subgraph, commit, evict/refill") {
    Graph g = fig7_graph();
    VertexOrder order = degree_sort(g, 3);
    AcceleratorConfig acfg;
    DramModel dram(acfg);
    auto bytes = flat_bytes(g);
    CacheState cache(g, order, cache_cfg(7, 1, 4), bytes, dram);

    // Initial residents: V1,V2,V3 (deg 3), V5,V6 (deg 2), V4,V7 (deg 1).
    for (VertexId v = 0; v <= 6; ++v) CHECK(cache.is_resident(v));
    for (VertexId v = 7; v < 15; ++v) CHECK_FALSE(cache.is_resident(v));
    for (VertexId v = 0; v < 15; ++v) CHECK(cache.alpha(v) == g.degree(v));

    auto edges = cache.current_subgraph();
    CHECK(edge_set(edges) == std::set<std::pair<VertexId, VertexId>>{
                                 {0, 3}, {0, 4}, {1, 4}, {1, 5}, {2, 5}, {2, 6}});

    cache.commit_processed(edges);
    for (VertexId v : {3, 4, 5, 6}) CHECK(cache.alpha(v) == 0);
    for (VertexId v : {0, 1, 2}) CHECK(cache.alpha(v) == 1);
    CHECK(cache.current_subgraph().empty());

    auto refill = cache.evict_and_refill(dram, 0);
    CHECK(refill.evicted == std::vector<VertexId>{3, 4, 5, 6});
    CHECK(refill.loaded == std::vector<VertexId>{7, 8, 9, 10});
    for (VertexId v : {0u, 1u, 2u, 7u, 8u, 9u, 10u}) CHECK(cache.is_resident(v));
}

TEST_CASE("capacity covering the graph keeps everything resident") {
    Graph g = fig7_graph();
    VertexOrder order = degree_sort(g, 3);
    AcceleratorConfig acfg;
    DramModel dram(acfg);
    auto bytes = flat_bytes(g);
    CacheState cache(g, order, cache_cfg(64, 5, 4), bytes, dram);
    for (VertexId v = 0; v < g.num_vertices; ++v) CHECK(cache.is_resident(v));
}

TEST_CASE("commit of an empty set changes nothing; double processing throws") {
    Graph g = fig7_graph();
    VertexOrder order = degree_sort(g, 3);
    AcceleratorConfig acfg;
    DramModel dram(acfg);
    auto bytes = flat_bytes(g);
    CacheState cache(g, order, cache_cfg(7, 1, 4), bytes, dram);
    cache.commit_processed(std::vector<EdgeRef>{});
    CHECK(cache.alpha(0) == 3);

    auto edges = cache.current_subgraph();
    cache.commit_processed(edges);
    CHECK_THROWS(cache.commit_processed(std::vector<EdgeRef>{edges[0]}));
}

TEST_CASE("self-loop edge decrements alpha once") {
    std::vector<std::pair<VertexId, VertexId>> e = {{0, 0}, {0, 1}};
    Graph g = build_csr(e, 2, true);
    VertexOrder order = degree_sort(g, 1);
    AcceleratorConfig acfg;
    DramModel dram(acfg);
    auto bytes = flat_bytes(g);
    CacheState cache(g, order, cache_cfg(2, 1, 1), bytes, dram);
    CHECK(cache.alpha(0) == 2);  // self-loop + edge to 1
    auto edges = cache.current_subgraph();
    for (const auto& ed : edges) {
        if (ed.u == ed.v) {
            cache.commit_processed(std::vector<EdgeRef>{ed});
            CHECK(cache.alpha(0) == 1);
        }
    }
}

TEST_CASE("gamma zero never yields eviction candidates") {
    Graph g = fig7_graph();
    VertexOrder order = degree_sort(g, 3);
    AcceleratorConfig acfg;
    DramModel dram(acfg);
    auto bytes = flat_bytes(g);
    CacheState cache(g, order, cache_cfg(7, 0, 4), bytes, dram);
    cache.commit_processed(cache.current_subgraph());
    auto refill = cache.evict_and_refill(dram, 0);
    CHECK(refill.evicted.empty());
    CHECK(refill.loaded.empty());
    CHECK(cache.detect_deadlock());
}

TEST_CASE("deadlock on a path split across the buffer at gamma 1") {
    // P4: resident mid-vertices keep alpha 1 (edges lead outside) and cannot
    // be evicted; no new vertices fit.
    std::vector<std::pair<VertexId, VertexId>> e = {{0, 1}, {1, 2}, {2, 3}};
    Graph g = build_csr(e, 4, true);
    VertexOrder order = degree_sort(g, 1);  // [1, 2, 0, 3]
    AcceleratorConfig acfg;
    DramModel dram(acfg);
    auto bytes = flat_bytes(g);
    CacheState cache(g, order, cache_cfg(2, 1, 1), bytes, dram);
    CHECK(cache.is_resident(1));
    CHECK(cache.is_resident(2));
    cache.commit_processed(cache.current_subgraph());
    CHECK(cache.detect_deadlock());

    // Escalation makes both evictable and clears the deadlock.
    CHECK(cache.escalate_gamma() == 2);
    CHECK_FALSE(cache.detect_deadlock());
}

TEST_CASE("gamma above max degree never starves eviction") {
    Graph g = generate_power_law(60, 2, 3);
    uint32_t max_deg = 0;
    for (uint32_t d : g.degrees) max_deg = std::max(max_deg, d);
    VertexOrder order = degree_sort(g, 4);
    AcceleratorConfig acfg;
    DramModel dram(acfg);
    auto bytes = flat_bytes(g);
    CacheState cache(g, order, cache_cfg(16, max_deg + 1, 4), bytes, dram);
    for (int iter = 0; iter < 4000 && cache.unprocessed_edges() > 0; ++iter) {
        CHECK_FALSE(cache.detect_deadlock());
        cache.commit_processed(cache.current_subgraph());
        cache.evict_and_refill(dram, 0);
    }
    CHECK(cache.unprocessed_edges() == 0);
}

TEST_CASE("an evicted vertex resumes with its written-back alpha") {
    Graph g = fig7_graph();
    VertexOrder order = degree_sort(g, 3);
    AcceleratorConfig acfg;
    DramModel dram(acfg);
    auto bytes = flat_bytes(g);
    CacheState cache(g, order, cache_cfg(5, 4, 2, 4), bytes, dram);
    // Process one edge so vertex 4 has partial progress, then force it out.
    auto edges = cache.current_subgraph();
    REQUIRE(!edges.empty());
    std::vector<EdgeRef> first = {edges[0]};
    cache.commit_processed(first);
    uint32_t before = cache.alpha(first[0].u);
    uint32_t target = first[0].u;

    for (int i = 0; i < 50 && cache.is_resident(target); ++i)
        cache.evict_and_refill(dram, 0);
    for (int i = 0; i < 50 && !cache.is_resident(target); ++i)
        cache.evict_and_refill(dram, 0);
    CHECK(cache.alpha(target) == before);
}

TEST_CASE("refill reads stay sequential per round") {
    Graph g = generate_power_law(300, 3, 8);
    VertexOrder order = degree_sort(g, 8);
    AcceleratorConfig acfg;
    DramModel dram(acfg);
    auto bytes = flat_bytes(g, 32);
    CacheState cache(g, order, cache_cfg(48, 5, 6), bytes, dram);
    for (int iter = 0; iter < 20000 && cache.unprocessed_edges() > 0; ++iter) {
        cache.commit_processed(cache.current_subgraph());
        if (cache.detect_deadlock()) cache.escalate_gamma();
        cache.evict_and_refill(dram, 0);
    }
    CHECK(cache.unprocessed_edges() == 0);
    CHECK(dram.trace().aggregation_reads_sequential());
    CHECK(cache.round() >= 2);
    CHECK(cache.initial_alpha_sum() == cache.alpha_decrements());
}

TEST_CASE("alpha histograms are recorded per round") {
    Graph g = generate_power_law(200, 3, 12);
    VertexOrder order = degree_sort(g, 8);
    AcceleratorConfig acfg;
    DramModel dram(acfg);
    auto bytes = flat_bytes(g, 16);
    CacheState cache(g, order, cache_cfg(40, 5, 5), bytes, dram);
    for (int iter = 0; iter < 20000 && cache.unprocessed_edges() > 0; ++iter) {
        cache.commit_processed(cache.current_subgraph());
        if (cache.detect_deadlock()) cache.escalate_gamma();
        cache.evict_and_refill(dram, 0);
    }
    const auto& hists = cache.alpha_histograms();
    REQUIRE(hists.size() >= 2);
    CHECK(hists[0].round == 1);
    CHECK(hists[0].max_alpha() > 0);
}

TEST_CASE("output buffer: degree priority and spill stream") {
    AcceleratorConfig acfg;
    DramModel dram(acfg);
    OutputBufferModel ob(100);

    CHECK(ob.note_contribution(0, 5, 60, dram, 1));   // fits
    CHECK(ob.used_bytes() == 60);
    // Full; lower-degree candidate spills.
    CHECK_FALSE(ob.note_contribution(1, 3, 60, dram, 1));
    CHECK(ob.spill_events() == 1);
    // Higher-degree candidate displaces the resident minimum.
    CHECK(ob.note_contribution(2, 9, 60, dram, 1));
    CHECK(ob.spill_events() == 2);
    CHECK(ob.used_bytes() == 60);

    uint64_t reads_before = dram.trace().bytes(DramKind::read, DramPhase::spill);
    ob.finalize(1, dram, 1);  // merges the spilled partial back
    CHECK(dram.trace().bytes(DramKind::read, DramPhase::spill) > reads_before);
    ob.finalize(2, dram, 1);
    CHECK(ob.used_bytes() == 0);
}

TEST_CASE("resolve_cache_config derives capacity and r") {
    std::vector<uint64_t> bytes(100, 512);
    CacheConfig in;  // zeros = auto
    CacheConfig out = resolve_cache_config(in, 262144, bytes);
    CHECK(out.capacity_vertices == 262144 / 2 / 512);
    CHECK(out.r_evict == out.capacity_vertices / 8);
    CacheConfig fixed = cache_cfg(64, 5, 9);
    CHECK(resolve_cache_config(fixed, 262144, bytes).capacity_vertices == 64);
    CHECK(resolve_cache_config(fixed, 262144, bytes).r_evict == 9);
}
