#include "gnnie/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gnnie/golden.hpp"

namespace gnnie {

nlohmann::ordered_json RunOptions::to_json() const {
    nlohmann::ordered_json j;
    j["cp"] = cp;
    j["fm"] = fm;
    j["lr"] = lr;
    j["lb"] = lb;
    j["verify_golden"] = verify_golden;
    j["dynamic_gamma"] = dynamic_gamma;
    j["exact_exp"] = exact_exp;
    j["degree_bins"] = degree_bins;
    j["lr_max_pairs"] = lr_max_pairs;
    j["seed"] = seed;
    return j;
}

uint64_t layer_param_seed(uint64_t seed, size_t layer) {
    return seed * 0x9E3779B97F4A7C15ull + 1000003ull * (layer + 1);
}

uint64_t layer_sample_seed(uint64_t seed, size_t layer) {
    return layer_param_seed(seed, layer) ^ 0x5DEECE66Dull;
}

std::vector<LayerSpec> build_layer_specs(const ModelConfig& model, uint64_t seed) {
    if (model.widths.size() < 2)
        throw std::invalid_argument("model: need at least [f_in, f_out] widths");
    std::vector<LayerSpec> specs;
    for (size_t l = 0; l + 1 < model.widths.size(); ++l) {
        specs.push_back(make_layer_spec(model.kind, model.widths[l], model.widths[l + 1],
                                        layer_param_seed(seed, l), model.aggregator,
                                        model.activation, model.sample_size));
    }
    return specs;
}

double golden_tolerance(LayerKind kind, bool exact_exp) {
    if (kind == LayerKind::gat && !exact_exp) return 1e-4;
    return 1e-5;
}

double max_rel_err(const FeatureMatrix& a, const FeatureMatrixD& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw std::invalid_argument("max_rel_err: shape mismatch");
    double worst = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        double x = a.data[i], y = b.data[i];
        double denom = std::max({std::abs(x), std::abs(y), 1.0});
        worst = std::max(worst, std::abs(x - y) / denom);
    }
    return worst;
}

namespace {

// Layer-0 input features arrive RLC-compressed; later layers are denser and
// bypass the decoder.
WeightingOptions weighting_options(const RunOptions& opts, bool first_layer) {
    WeightingOptions w;
    w.fm = opts.fm;
    w.lr = opts.lr;
    w.lr_max_pairs = opts.lr_max_pairs;
    w.rlc_input = first_layer;
    return w;
}

void add_bias_rows(FeatureMatrix& m, std::span<const double> bias) {
    for (uint32_t r = 0; r < m.rows; ++r) {
        auto row = m.row(r);
        for (uint32_t c = 0; c < m.cols; ++c) row[c] += static_cast<float>(bias[c]);
    }
}

}  // namespace

RunOutcome run_model(const Graph& g, const FeatureMatrix& input,
                     const std::vector<LayerSpec>& specs, const AcceleratorConfig& cfg_in,
                     const RunOptions& opts) {
    AcceleratorConfig cfg = cfg_in;
    if (opts.exact_exp) cfg.sfu.exact_exp = true;
    cfg.validate();
    if (input.rows != g.num_vertices)
        throw std::invalid_argument("run_model: feature rows != |V|");

    RunOutcome out;
    RunReport& report = out.report;
    report.model = specs.empty() ? "none" : to_string(specs[0].kind);
    report.seed = opts.seed;
    report.config_echo = cfg.to_json();
    report.options_echo = opts.to_json();
    report.dataset = {{"num_vertices", g.num_vertices},
                      {"num_undirected_edges", g.num_undirected_edges()},
                      {"f_in", input.cols}};
    report.peak_tops = peak_throughput(cfg) / 1e12;

    DramModel dram(cfg);
    VertexOrder order = opts.cp ? degree_sort(g, opts.degree_bins)
                                : identity_order(g, opts.degree_bins);

    FeatureMatrix h = input;
    std::vector<PhaseStats> all_phases;
    for (size_t l = 0; l < specs.size(); ++l) {
        const LayerSpec& spec = specs[l];
        if (h.cols != spec.f_in)
            throw std::invalid_argument("run_model: layer input width mismatch");
        LayerReport lr;
        lr.name = "layer" + std::to_string(l);
        lr.kind = to_string(spec.kind);
        lr.f_in = spec.f_in;
        lr.f_out = spec.f_out;
        uint32_t trace_base = static_cast<uint32_t>(l) * 100000u;

        bool gin = spec.kind == LayerKind::ginconv;
        FeatureMatrix w1 = narrow(gin ? spec.mlp.w1 : spec.weight);
        auto wres = simulate_weighting(h, w1, cfg, weighting_options(opts, l == 0), dram);
        lr.plan = wres.plan;
        lr.row_cycles = wres.row_cycles;
        lr.phases.push_back(wres.stats);

        AttentionScalars scalars;
        if (spec.kind == LayerKind::gat) {
            std::vector<float> a1(spec.attn_src.begin(), spec.attn_src.end());
            std::vector<float> a2(spec.attn_dst.begin(), spec.attn_dst.end());
            auto ares = compute_attention_scalars(wres.weighted, a1, a2, cfg, dram);
            scalars = std::move(ares.scalars);
            lr.phases.push_back(ares.stats);
        }

        std::vector<std::vector<VertexId>> samples;
        if (spec.kind == LayerKind::graphsage) {
            auto stream = SampleStream::pregenerate(layer_sample_seed(opts.seed, l));
            samples = sample_all_neighbors(g, spec.sample_size, stream);
        }

        AggregationOptions aopts;
        aopts.lb = opts.lb;
        aopts.dynamic_gamma = opts.dynamic_gamma;
        aopts.trace_round_offset = trace_base;
        auto ares = simulate_aggregation(
            g, wres.weighted, spec.kind == LayerKind::gat ? &scalars : nullptr, spec, order,
            cfg, aopts, spec.kind == LayerKind::graphsage ? &samples : nullptr, dram);
        lr.phases.push_back(ares.stats);
        lr.alpha_histograms = ares.alpha_histograms;
        lr.rounds = ares.rounds;
        lr.iterations = ares.iterations;
        lr.gamma_escalations = ares.gamma_escalations;
        lr.initial_alpha_sum = ares.initial_alpha_sum;
        lr.alpha_decrements = ares.alpha_decrements;
        lr.deadlocked = ares.deadlocked;
        if (ares.deadlocked) {
            report.deadlocked = true;
            report.layers.push_back(std::move(lr));
            for (const auto& p : report.layers.back().phases) all_phases.push_back(p);
            break;
        }

        FeatureMatrix layer_out = std::move(ares.outputs);
        if (gin) {
            FeatureMatrix w2 = narrow(spec.mlp.w2);
            WeightingOptions wo2 = weighting_options(opts, false);
            auto wres2 = simulate_weighting(layer_out, w2, cfg, wo2, dram);
            lr.phases.push_back(wres2.stats);
            layer_out = std::move(wres2.weighted);
            add_bias_rows(layer_out, spec.mlp.b2);
        }

        if (opts.verify_golden) {
            FeatureMatrixD href = widen(h);
            FeatureMatrixD ref;
            if (spec.kind == LayerKind::graphsage) {
                auto stream = SampleStream::pregenerate(layer_sample_seed(opts.seed, l));
                ref = golden::sage_layer(g, href, spec, stream);
            } else {
                ref = golden::run_layer(g, href, spec, nullptr);
            }
            lr.verify_max_rel_err = max_rel_err(layer_out, ref);
            if (lr.verify_max_rel_err > golden_tolerance(spec.kind, cfg.sfu.exact_exp)) {
                report.verify_passed = false;
                out.verify_failed = true;
            }
        }

        for (const auto& p : lr.phases) all_phases.push_back(p);
        report.layers.push_back(std::move(lr));
        out.layer_outputs.push_back(layer_out);
        h = std::move(layer_out);
    }

    for (const auto& p : all_phases) {
        report.total_cycles += p.cycles;
        report.total_mac_ops += p.mac_ops;
    }
    report.energy = energy_report(all_phases, dram.trace(), cfg);
    report.dram_bytes_read = dram.trace().bytes(DramKind::read);
    report.dram_bytes_written = dram.trace().bytes(DramKind::write);
    if (report.total_cycles > 0)
        report.achieved_tops = (static_cast<double>(report.total_mac_ops) * 2.0) /
                               (static_cast<double>(report.total_cycles) / cfg.freq_hz) / 1e12;
    report.trace = dram.trace();
    return out;
}

std::vector<GammaSweepRow> sweep_gamma(const Graph& g, const FeatureMatrix& input,
                                       const std::vector<LayerSpec>& specs,
                                       const AcceleratorConfig& cfg, const RunOptions& opts,
                                       std::span<const uint32_t> gammas) {
    if (gammas.empty()) throw std::invalid_argument("sweep_gamma: empty gamma list");
    std::vector<GammaSweepRow> rows(gammas.size());
    int64_t count = static_cast<int64_t>(gammas.size());
#pragma omp parallel for schedule(dynamic)
    for (int64_t i = 0; i < count; ++i) {
        AcceleratorConfig c = cfg;
        c.cache.gamma = gammas[i];
        GammaSweepRow row;
        row.gamma = gammas[i];
        auto outcome = run_model(g, input, specs, c, opts);
        row.deadlocked = outcome.report.deadlocked;
        row.total_cycles = outcome.report.total_cycles;
        for (const auto& layer : outcome.report.layers) {
            for (const auto& p : layer.phases)
                if (p.phase == "aggregation")
                    row.aggregation_dram_bytes += p.dram_bytes_read + p.dram_bytes_written;
            row.rounds = std::max(row.rounds, layer.rounds);
        }
        rows[i] = row;
    }
    return rows;
}

std::vector<DesignSweepRow> sweep_designs(const Graph& g, const FeatureMatrix& input,
                                          const std::vector<LayerSpec>& specs,
                                          const AcceleratorConfig& base,
                                          const RunOptions& opts) {
    constexpr Design kDesigns[] = {Design::A, Design::B, Design::C, Design::D, Design::E};
    std::vector<DesignSweepRow> rows(5);
#pragma omp parallel for schedule(dynamic)
    for (int64_t i = 0; i < 5; ++i) {
        Design d = kDesigns[i];
        AcceleratorConfig c = base;
        c.mac_profile = design_profile(d, c.array_rows);
        RunOptions o = opts;
        o.fm = d == Design::E && opts.fm;
        o.lr = d == Design::E && opts.lr;
        DesignSweepRow row;
        row.design = design_name(d);
        row.macs = c.total_macs();
        auto outcome = run_model(g, input, specs, c, o);
        uint64_t min_row = 0, max_row = 0;
        for (const auto& layer : outcome.report.layers) {
            for (const auto& p : layer.phases)
                if (p.phase == "weighting") row.weighting_cycles += p.cycles;
            for (uint64_t rc : layer.row_cycles) {
                if (rc == 0) continue;
                if (min_row == 0 || rc < min_row) min_row = rc;
                max_row = std::max(max_row, rc);
            }
        }
        row.row_ratio = min_row ? static_cast<double>(max_row) / min_row : 0.0;
        rows[i] = row;
    }
    for (size_t i = 1; i < rows.size(); ++i)
        rows[i].beta_vs_a = beta(rows[0].weighting_cycles, rows[0].macs,
                                 rows[i].weighting_cycles, rows[i].macs);
    return rows;
}

uint32_t sweep_threads_cap() {
    const char* env = std::getenv("GNNIE_SIM_THREADS");
    if (!env || !*env) return 0;
    long v = std::strtol(env, nullptr, 10);
    return v > 0 ? static_cast<uint32_t>(v) : 0;
}

}  // namespace gnnie
