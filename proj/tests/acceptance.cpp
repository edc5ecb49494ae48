// Acceptance suite: every criterion prints one PASS/FAIL line; the exit code
// is the number of failures.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <sstream>
#include <string>

#include "gnnie/golden.hpp"
#include "gnnie/sim.hpp"
#include "testutil.hpp"

using namespace gnnie;
using namespace testutil;

namespace {

int g_failures = 0;

void report(int idx, const char* name, bool ok, const std::string& detail) {
    std::printf("[%2d/12] %s  %-28s %s\n", idx, ok ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[256];
    va_list ap;
    va_start(ap, f);
    vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// 1. Peak throughput identity: 16x16, 4/5/6 groups, 1.3 GHz -> 3.1616 TOPS,
//    within 0.5% of the published 3.17 TOPS peak.
void criterion_1() {
    AcceleratorConfig cfg;
    double peak = peak_throughput(cfg);
    bool exact = peak == 3.1616e12;
    double vs_table = std::abs(peak - 3.17e12) / 3.17e12;
    report(1, "peak throughput identity", exact && vs_table < 0.005,
           fmt("peak=%.4f TOPS, table-gap=%.3f%%", peak / 1e12, vs_table * 100));
}

// 2. Designs A-E report exactly 1024/1280/1536/1792/1216 MACs.
void criterion_2() {
    const uint64_t expect[] = {1024, 1280, 1536, 1792, 1216};
    std::string got;
    bool ok = true;
    for (int i = 0; i < 5; ++i) {
        uint64_t macs = design_profile(static_cast<Design>(i), 16).total_macs(16);
        ok = ok && macs == expect[i];
        got += (i ? "/" : "") + std::to_string(macs);
    }
    report(2, "design MAC identity", ok, got);
}

// 3. Golden equivalence: 50 random graphs per GNN kind, <=64 vertices,
//    power-law and Erdos-Renyi mixes, random parameters; 1e-5 relative
//    (GAT: 1e-4 with the LUT, 1e-5 in exact-exp mode).
void criterion_3() {
    struct Case {
        LayerKind kind;
        bool exact_exp;
        const char* label;
    };
    const Case cases[] = {{LayerKind::gcn, false, "gcn"},
                          {LayerKind::graphsage, false, "sage"},
                          {LayerKind::gat, false, "gat-lut"},
                          {LayerKind::gat, true, "gat-exact"},
                          {LayerKind::ginconv, false, "gin"}};
    bool ok = true;
    std::string detail;
    for (const auto& c : cases) {
        double worst = 0;
        for (uint32_t i = 0; i < 50; ++i) {
            uint64_t seed = 9000 + i;
            Graph g = random_test_graph(i, seed);
            uint32_t f_in = 6 + i % 20, f_out = 4 + i % 12;
            ModelConfig model;
            model.kind = c.kind;
            model.widths = {f_in, f_out};
            if (c.kind == LayerKind::graphsage) model.aggregator = Aggregator::max;
            auto specs = build_layer_specs(model, seed);
            FeatureMatrix h = random_features_f(g.num_vertices, f_in, seed + 7, 0.4);
            AcceleratorConfig cfg;
            cfg.cache.capacity_vertices = std::max<uint32_t>(4, g.num_vertices / 3);
            RunOptions opts;
            opts.seed = seed;
            opts.verify_golden = true;
            opts.exact_exp = c.exact_exp;
            auto outcome = run_model(g, h, specs, cfg, opts);
            worst = std::max(worst, outcome.report.layers[0].verify_max_rel_err);
            if (outcome.verify_failed) ok = false;
        }
        double tol = golden_tolerance(c.kind, c.exact_exp);
        if (worst > tol) ok = false;
        detail += fmt("%s=%.1e ", c.label, worst);
    }
    report(3, "golden equivalence (4 kinds)", ok, detail);
}

// 4. Reordered attention cost: scalar multiplications == 2*F*|V| exactly for
//    |V| in {10,100,1000} at F=32, independent of edge count.
void criterion_4() {
    bool ok = true;
    std::string detail;
    for (uint32_t v : {10u, 100u, 1000u}) {
        AcceleratorConfig cfg;
        FeatureMatrix eta = random_features_f(v, 32, v);
        std::vector<float> a1(32, 0.5f), a2(32, -0.25f);
        DramModel dram(cfg);
        auto res = compute_attention_scalars(eta, a1, a2, cfg, dram);
        bool match = res.stats.scalar_mults == 2ull * 32 * v;
        ok = ok && match;
        detail += fmt("V=%u:%llu ", v, (unsigned long long)res.stats.scalar_mults);
    }
    // Same |V|, very different |E|: identical count in full GAT runs.
    uint64_t counts[2] = {0, 0};
    int slot = 0;
    for (uint32_t m : {2u, 12u}) {
        Graph g = generate_power_law(100, m, 5);
        ModelConfig model;
        model.kind = LayerKind::gat;
        model.widths = {16, 32};
        auto specs = build_layer_specs(model, 5);
        FeatureMatrix h = random_features_f(100, 16, 6, 0.3);
        AcceleratorConfig cfg;
        cfg.cache.capacity_vertices = 40;
        auto outcome = run_model(g, h, specs, cfg, RunOptions{});
        for (const auto& p : outcome.report.layers[0].phases)
            if (p.phase == "attention") counts[slot] = p.scalar_mults;
        ++slot;
    }
    ok = ok && counts[0] == counts[1] && counts[0] == 2ull * 32 * 100;
    report(4, "attention linearity", ok,
           detail + fmt("E-indep:%llu==%llu", (unsigned long long)counts[0],
                        (unsigned long long)counts[1]));
}

// 5. Sequential-DRAM property over 100 random runs.
void criterion_5() {
    bool ok = true;
    int runs = 0;
    for (uint32_t i = 0; i < 100; ++i) {
        uint64_t seed = 100 + i;
        Rng rng(seed);
        uint32_t n = 50 + static_cast<uint32_t>(rng_below(rng, 350));
        Graph g = (i % 2) ? generate_power_law(n, 1 + i % 4, seed)
                          : erdos_renyi(n, 0.02 + 0.05 * rng_u01(rng), seed);
        LayerKind kind = static_cast<LayerKind>(i % 4);
        ModelConfig model;
        model.kind = kind;
        model.widths = {12, 8};
        if (kind == LayerKind::graphsage) model.aggregator = Aggregator::max;
        auto specs = build_layer_specs(model, seed);
        FeatureMatrix h = random_features_f(n, 12, seed + 3, 0.5);
        AcceleratorConfig cfg;
        cfg.cache.capacity_vertices = 8 + static_cast<uint32_t>(rng_below(rng, n));
        cfg.cache.gamma = 1 + static_cast<uint32_t>(rng_below(rng, 8));
        cfg.cache.r_evict = 1 + static_cast<uint32_t>(rng_below(
            rng, std::min<uint32_t>(16, cfg.cache.capacity_vertices)));
        cfg.cache.block_size_vertices = 4 + static_cast<uint32_t>(rng_below(rng, 12));
        RunOptions opts;
        opts.seed = seed;
        opts.dynamic_gamma = true;
        opts.cp = i % 3 != 0;
        auto outcome = run_model(g, h, specs, cfg, opts);
        ++runs;
        if (!outcome.report.trace.aggregation_reads_sequential()) {
            ok = false;
            break;
        }
    }
    report(5, "sequential DRAM reads", ok, fmt("%d random runs", runs));
}

struct AblationWorkload {
    Graph g;
    FeatureMatrix h;
    std::vector<LayerSpec> specs;
};

AblationWorkload powerlaw_workload(uint64_t seed) {
    AblationWorkload w;
    w.g = generate_power_law(1000, 4, seed);
    ModelConfig model;
    model.kind = LayerKind::gcn;
    model.widths = {256, 128, 128};
    w.specs = build_layer_specs(model, seed);
    SyntheticFeatureParams p;
    w.h = synth_features_bimodal(1000, 256, p, seed + 1);
    return w;
}

// 6. Gamma ablation: nondecreasing aggregation DRAM bytes over gamma 1..10
//    (plateaus allowed); gamma=0 deadlocks without dynamic-gamma.
void criterion_6() {
    auto w = powerlaw_workload(1);
    RunOptions opts;
    opts.seed = 1;
    std::vector<uint32_t> gammas = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    auto rows = sweep_gamma(w.g, w.h, w.specs, AcceleratorConfig{}, opts, gammas);
    bool monotone = true;
    for (size_t i = 1; i < rows.size(); ++i)
        if (rows[i].aggregation_dram_bytes < rows[i - 1].aggregation_dram_bytes)
            monotone = false;
    auto zero = sweep_gamma(w.g, w.h, w.specs, AcceleratorConfig{}, opts,
                            std::vector<uint32_t>{0});
    bool deadlock = zero[0].deadlocked;
    report(6, "gamma ablation trend", monotone && deadlock,
           fmt("bytes %llu..%llu, gamma0 deadlock=%d",
               (unsigned long long)rows.front().aggregation_dram_bytes,
               (unsigned long long)rows.back().aggregation_dram_bytes, (int)deadlock));
}

// 7. Alpha-histogram flattening: max resident alpha and peak frequency are
//    nonincreasing across Rounds.
void criterion_7() {
    auto w = powerlaw_workload(1);
    RunOptions opts;
    opts.seed = 1;
    // The published alpha histograms are for Pubmed, which runs with the
    // larger 512 KB input buffer; the power-law benchmark stands in for it.
    AcceleratorConfig cfg;
    cfg.input_buffer_bytes = 524288;
    auto outcome = run_model(w.g, w.h, w.specs, cfg, opts);
    const auto& hists = outcome.report.layers[0].alpha_histograms;
    bool ok = hists.size() >= 2;
    uint32_t prev_max = 0;
    uint64_t prev_peak = 0;
    std::string detail = fmt("%zu rounds, max-alpha:", hists.size());
    for (size_t i = 0; i < hists.size(); ++i) {
        uint32_t m = hists[i].max_alpha();
        uint64_t p = hists[i].peak_frequency();
        detail += fmt(" %u", m);
        if (i > 0 && (m > prev_max || p > prev_peak)) ok = false;
        prev_max = m;
        prev_peak = p;
    }
    report(7, "alpha histogram flattening", ok, detail);
}

AblationWorkload bimodal_workload(uint64_t seed) {
    AblationWorkload w;
    w.g = generate_power_law(2000, 4, seed);
    ModelConfig model;
    model.kind = LayerKind::gcn;
    model.widths = {1024, 128};
    w.specs = build_layer_specs(model, seed);
    SyntheticFeatureParams p;  // 99% / 85% sparsity modes
    w.h = synth_features_bimodal(2000, 1024, p, seed + 1);
    return w;
}

uint64_t weighting_cycles(const RunReport& r) {
    uint64_t total = 0;
    for (const auto& l : r.layers)
        for (const auto& p : l.phases)
            if (p.phase == "weighting") total += p.cycles;
    return total;
}

double row_ratio(const RunReport& r) {
    uint64_t lo = 0, hi = 0;
    for (uint64_t rc : r.layers[0].row_cycles) {
        if (rc == 0) continue;
        if (lo == 0 || rc < lo) lo = rc;
        hi = std::max(hi, rc);
    }
    return lo ? static_cast<double>(hi) / lo : 0.0;
}

// 8. FM/LR load balancing on the bimodal workload: Design E beats Design A
//    by >= 5% weighting cycles, and FM+LR ratio < FM ratio < baseline ratio.
void criterion_8() {
    auto w = bimodal_workload(2);
    auto run_cfg = [&](Design d, bool fm, bool lr) {
        AcceleratorConfig cfg;
        cfg.mac_profile = design_profile(d, 16);
        RunOptions opts;
        opts.seed = 2;
        opts.fm = fm;
        opts.lr = lr;
        return run_model(w.g, w.h, w.specs, cfg, opts).report;
    };
    auto a = run_cfg(Design::A, false, false);
    auto e_fm = run_cfg(Design::E, true, false);
    auto e_fmlr = run_cfg(Design::E, true, true);
    uint64_t cyc_a = weighting_cycles(a);
    uint64_t cyc_e = weighting_cycles(e_fmlr);
    double gain = 1.0 - static_cast<double>(cyc_e) / static_cast<double>(cyc_a);
    double r_base = row_ratio(a);
    double r_fm = row_ratio(e_fm);
    double r_fmlr = row_ratio(e_fmlr);
    bool ok = gain >= 0.05 && r_fmlr < r_fm && r_fm < r_base;
    report(8, "FM/LR load balancing", ok,
           fmt("E gain=%.1f%%, ratio base=%.2f fm=%.2f fm+lr=%.2f", gain * 100, r_base,
               r_fm, r_fmlr));
}

// 9. Beta ordering on the same workload: E > B > C > D.
void criterion_9() {
    auto w = bimodal_workload(2);
    RunOptions opts;
    opts.seed = 2;
    auto rows = sweep_designs(w.g, w.h, w.specs, AcceleratorConfig{}, opts);
    double b = rows[1].beta_vs_a, c = rows[2].beta_vs_a, d = rows[3].beta_vs_a,
           e = rows[4].beta_vs_a;
    bool ok = e > b && b > c && c > d;
    report(9, "beta ordering", ok, fmt("E=%.3f B=%.3f C=%.3f D=%.3f", e, b, c, d));
}

// 10. Optimization stacking: baseline > CP > CP+FM > CP+FM+LB aggregation
//     cycles, each step strict.
void criterion_10() {
    auto w = powerlaw_workload(3);
    auto run_with = [&](bool cp, bool fm, bool lb) {
        AcceleratorConfig cfg;
        cfg.mac_profile = fm ? design_profile(Design::E, 16) : design_profile(Design::A, 16);
        RunOptions opts;
        opts.seed = 3;
        opts.cp = cp;
        opts.fm = fm;
        opts.lr = false;
        opts.lb = lb;
        opts.dynamic_gamma = true;
        auto outcome = run_model(w.g, w.h, w.specs, cfg, opts);
        uint64_t agg = 0;
        for (const auto& l : outcome.report.layers)
            for (const auto& p : l.phases)
                if (p.phase == "aggregation") agg += p.cycles;
        return agg;
    };
    uint64_t base = run_with(false, false, false);
    uint64_t cp = run_with(true, false, false);
    uint64_t cp_fm = run_with(true, true, false);
    uint64_t cp_fm_lb = run_with(true, true, true);
    bool ok = cp < base && cp_fm < cp && cp_fm_lb < cp_fm;
    report(10, "optimization stacking", ok,
           fmt("base=%llu cp=%llu +fm=%llu +lb=%llu", (unsigned long long)base,
               (unsigned long long)cp, (unsigned long long)cp_fm,
               (unsigned long long)cp_fm_lb));
}

// 11. Determinism: identical spec+seed gives byte-identical JSON reports.
void criterion_11() {
    auto w = powerlaw_workload(4);
    RunOptions opts;
    opts.seed = 4;
    auto a = run_model(w.g, w.h, w.specs, AcceleratorConfig{}, opts);
    auto b = run_model(w.g, w.h, w.specs, AcceleratorConfig{}, opts);
    bool ok = a.report.dump() == b.report.dump();
    report(11, "byte-identical reports", ok, fmt("%zu bytes", a.report.dump().size()));
}

// 12. Edge conservation over 200 random aggregation instances.
void criterion_12() {
    bool ok = true;
    int checked = 0;
    for (uint32_t i = 0; i < 200; ++i) {
        uint64_t seed = 7000 + i;
        Graph g = random_test_graph(i, seed);
        LayerKind kind = static_cast<LayerKind>(i % 4);
        ModelConfig model;
        model.kind = kind;
        model.widths = {8, 6};
        if (kind == LayerKind::graphsage) model.aggregator = Aggregator::max;
        auto specs = build_layer_specs(model, seed);
        FeatureMatrix h = random_features_f(g.num_vertices, 8, seed + 2, 0.4);
        AcceleratorConfig cfg;
        cfg.cache.capacity_vertices = std::max<uint32_t>(4, g.num_vertices / 4);
        cfg.cache.gamma = 1 + i % 7;
        RunOptions opts;
        opts.seed = seed;
        opts.dynamic_gamma = true;
        auto outcome = run_model(g, h, specs, cfg, opts);
        ++checked;
        // Sum of initial alpha equals total endpoint decrements: every edge
        // decrements each endpoint exactly once (self-loops once total).
        uint64_t expect = 0;
        for (VertexId v = 0; v < g.num_vertices; ++v) expect += g.degree(v);
        for (const auto& l : outcome.report.layers) {
            if (l.deadlocked || l.initial_alpha_sum != expect ||
                l.alpha_decrements != expect) {
                ok = false;
                break;
            }
        }
        if (!ok) break;
    }
    report(12, "edge conservation", ok, fmt("%d instances", checked));
}

}  // namespace

int main() {
    std::printf("GNNIE simulator acceptance suite\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    std::printf("RESULT: %d/12 criteria passed\n", 12 - g_failures);
    return g_failures;
}
