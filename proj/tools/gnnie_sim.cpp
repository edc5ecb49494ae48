// gnnie-sim: GNN accelerator simulator CLI.
//
//   gnnie-sim run --model gcn --gen powerlaw:n=1000,m=4,seed=1 --out out/
//   gnnie-sim sweep-gamma --model gcn --gen powerlaw:n=1000,m=4,seed=1
//   gnnie-sim sweep-designs --model gcn --gen powerlaw:n=2000,m=4,seed=1
//   gnnie-sim gen-graph --gen powerlaw:n=1000,m=4,seed=1 --out graph.txt
//   gnnie-sim verify --model gat --gen powerlaw:n=200,m=3,seed=7

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "gnnie/sim.hpp"

using namespace gnnie;

namespace {

struct DatasetArgs {
    std::string gen;
    std::string edges;
    std::string features;
    double feat_sparse_lo = 0.99;
    double feat_sparse_hi = 0.85;
    double feat_dense_frac = 0.3;
};

struct CommonArgs {
    std::string model = "gcn";
    std::string layers = "256,128,128";
    std::string config;
    std::string opt = "cp,fm,lr,lb";
    std::string out = "out";
    uint64_t seed = 1;
    bool verify_golden = false;
    bool dynamic_gamma = false;
    bool exact_exp = false;
    DatasetArgs data;
};

std::map<std::string, std::string> parse_kv(const std::string& s) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw CLI::ValidationError("expected k=v: " + item);
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return kv;
}

Graph make_graph(const DatasetArgs& d, uint64_t seed) {
    if (!d.gen.empty()) {
        auto colon = d.gen.find(':');
        std::string kind = d.gen.substr(0, colon);
        auto kv = parse_kv(colon == std::string::npos ? "" : d.gen.substr(colon + 1));
        if (kind == "powerlaw") {
            uint32_t n = kv.count("n") ? std::stoul(kv["n"]) : 1000;
            uint32_t m = kv.count("m") ? std::stoul(kv["m"]) : 4;
            uint64_t s = kv.count("seed") ? std::stoull(kv["seed"]) : seed;
            return generate_power_law(n, m, s);
        }
        throw CLI::ValidationError("unknown generator: " + kind);
    }
    if (!d.edges.empty()) {
        if (is_snapshot_file(d.edges)) return load_snapshot(d.edges);
        return load_edge_list_file(d.edges);
    }
    throw CLI::ValidationError("need --gen or --edges");
}

FeatureMatrix make_features(const DatasetArgs& d, uint32_t n, uint32_t f_in, uint64_t seed) {
    if (!d.features.empty()) {
        std::ifstream probe(d.features, std::ios::binary);
        char magic[4] = {};
        probe.read(magic, 4);
        FeatureMatrix m = (probe && std::string(magic, 4) == "GNNF")
                              ? load_features(d.features)
                              : load_features_text(d.features);
        if (m.rows != n) throw CLI::ValidationError("feature rows != graph vertices");
        return m;
    }
    SyntheticFeatureParams p;
    p.sparsity_lo = d.feat_sparse_lo;
    p.sparsity_hi = d.feat_sparse_hi;
    p.dense_fraction = d.feat_dense_frac;
    return synth_features_bimodal(n, f_in, p, seed ^ 0xFEA7u);
}

ModelConfig make_model(const CommonArgs& a) {
    ModelConfig m;
    m.kind = layer_kind_from_string(a.model);
    m.widths.clear();
    std::stringstream ss(a.layers);
    std::string tok;
    while (std::getline(ss, tok, ',')) m.widths.push_back(std::stoul(tok));
    if (m.widths.size() < 2) throw CLI::ValidationError("--layers needs >= 2 widths");
    if (m.kind == LayerKind::graphsage) m.aggregator = Aggregator::max;
    return m;
}

RunOptions make_options(const CommonArgs& a) {
    RunOptions o;
    o.cp = a.opt.find("cp") != std::string::npos;
    o.fm = a.opt.find("fm") != std::string::npos;
    o.lr = a.opt.find("lr") != std::string::npos;
    o.lb = a.opt.find("lb") != std::string::npos;
    o.verify_golden = a.verify_golden;
    o.dynamic_gamma = a.dynamic_gamma;
    o.exact_exp = a.exact_exp;
    o.seed = a.seed;
    return o;
}

AcceleratorConfig make_config(const CommonArgs& a) {
    return a.config.empty() ? AcceleratorConfig{} : AcceleratorConfig::from_file(a.config);
}

void add_common(CLI::App* cmd, CommonArgs& a, bool wants_dataset = true) {
    cmd->add_option("--model", a.model, "gcn | graphsage | gat | ginconv");
    cmd->add_option("--layers", a.layers, "comma-separated widths, e.g. 256,128,128");
    cmd->add_option("--config", a.config, "accelerator config JSON");
    cmd->add_option("--opt", a.opt, "enabled optimizations out of cp,fm,lr,lb");
    cmd->add_option("--seed", a.seed, "run seed");
    cmd->add_option("--out", a.out, "output directory");
    cmd->add_flag("--verify-golden", a.verify_golden, "check against the golden model");
    cmd->add_flag("--dynamic-gamma", a.dynamic_gamma, "escalate gamma on deadlock");
    cmd->add_flag("--exact-exp", a.exact_exp, "bypass the exp LUT");
    if (wants_dataset) {
        cmd->add_option("--gen", a.data.gen, "synthetic graph, e.g. powerlaw:n=1000,m=4,seed=1");
        cmd->add_option("--edges", a.data.edges, "edge-list file (text) or snapshot");
        cmd->add_option("--features", a.data.features, "feature file (GNNF binary or text)");
        cmd->add_option("--feat-sparse-lo", a.data.feat_sparse_lo, "sparse-mode zero fraction");
        cmd->add_option("--feat-sparse-hi", a.data.feat_sparse_hi, "dense-mode zero fraction");
        cmd->add_option("--feat-dense-frac", a.data.feat_dense_frac, "dense-mode row fraction");
    }
}

void print_summary(const RunReport& r) {
    std::printf("model %s  design %s  seed %llu\n", r.model.c_str(), r.design.c_str(),
                static_cast<unsigned long long>(r.seed));
    std::printf("%-8s %-12s %14s %14s %14s %12s\n", "layer", "phase", "cycles", "stalls",
                "dram_rd", "dram_wr");
    for (const auto& l : r.layers)
        for (const auto& p : l.phases)
            std::printf("%-8s %-12s %14llu %14llu %14llu %12llu\n", l.name.c_str(),
                        p.phase.c_str(), static_cast<unsigned long long>(p.cycles),
                        static_cast<unsigned long long>(p.stall_cycles),
                        static_cast<unsigned long long>(p.dram_bytes_read),
                        static_cast<unsigned long long>(p.dram_bytes_written));
    std::printf("total cycles %llu  achieved %.4f TOPS (peak %.4f)  energy %.3f uJ\n",
                static_cast<unsigned long long>(r.total_cycles), r.achieved_tops, r.peak_tops,
                r.energy.total_pj / 1e6);
    if (r.deadlocked) std::printf("DEADLOCK: aggregation stalled (try --dynamic-gamma)\n");
}

int cmd_run(const CommonArgs& a, bool force_verify) {
    Graph g = make_graph(a.data, a.seed);
    ModelConfig model = make_model(a);
    FeatureMatrix feats = make_features(a.data, g.num_vertices, model.widths[0], a.seed);
    auto specs = build_layer_specs(model, a.seed);
    RunOptions opts = make_options(a);
    if (force_verify) opts.verify_golden = true;
    auto outcome = run_model(g, feats, specs, make_config(a), opts);
    auto files = emit_report(outcome.report, a.out, EmitFormat::csv_bundle);
    print_summary(outcome.report);
    for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
    if (outcome.verify_failed) {
        std::fprintf(stderr, "golden verification FAILED\n");
        return 2;
    }
    for (const auto& l : outcome.report.layers)
        if (l.verify_max_rel_err >= 0)
            std::printf("%s golden max rel err %.3e\n", l.name.c_str(), l.verify_max_rel_err);
    return outcome.report.deadlocked ? 3 : 0;
}

int cmd_sweep_gamma(const CommonArgs& a, const std::string& gammas_arg) {
    Graph g = make_graph(a.data, a.seed);
    ModelConfig model = make_model(a);
    FeatureMatrix feats = make_features(a.data, g.num_vertices, model.widths[0], a.seed);
    auto specs = build_layer_specs(model, a.seed);
    std::vector<uint32_t> gammas;
    std::stringstream ss(gammas_arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) gammas.push_back(std::stoul(tok));
    auto rows = sweep_gamma(g, feats, specs, make_config(a), make_options(a), gammas);

    std::filesystem::create_directories(a.out);
    std::ofstream csv(std::filesystem::path(a.out) / "gamma_sweep.csv");
    csv << "gamma,aggregation_dram_bytes,rounds,total_cycles,deadlocked\n";
    std::printf("%6s %22s %8s %14s %10s\n", "gamma", "agg_dram_bytes", "rounds", "cycles",
                "deadlock");
    for (const auto& r : rows) {
        csv << r.gamma << ',' << r.aggregation_dram_bytes << ',' << r.rounds << ','
            << r.total_cycles << ',' << (r.deadlocked ? 1 : 0) << '\n';
        std::printf("%6u %22llu %8u %14llu %10s\n", r.gamma,
                    static_cast<unsigned long long>(r.aggregation_dram_bytes), r.rounds,
                    static_cast<unsigned long long>(r.total_cycles),
                    r.deadlocked ? "yes" : "no");
    }
    std::printf("wrote %s\n", (std::filesystem::path(a.out) / "gamma_sweep.csv").c_str());
    return 0;
}

int cmd_sweep_designs(const CommonArgs& a) {
    Graph g = make_graph(a.data, a.seed);
    ModelConfig model = make_model(a);
    FeatureMatrix feats = make_features(a.data, g.num_vertices, model.widths[0], a.seed);
    auto specs = build_layer_specs(model, a.seed);
    auto rows = sweep_designs(g, feats, specs, make_config(a), make_options(a));

    std::filesystem::create_directories(a.out);
    std::ofstream csv(std::filesystem::path(a.out) / "design_sweep.csv");
    csv << "design,macs,weighting_cycles,beta,row_ratio\n";
    std::printf("%7s %8s %18s %12s %10s\n", "design", "macs", "weighting_cycles", "beta",
                "row_ratio");
    for (const auto& r : rows) {
        csv << r.design << ',' << r.macs << ',' << r.weighting_cycles << ',' << r.beta_vs_a
            << ',' << r.row_ratio << '\n';
        std::printf("%7s %8llu %18llu %12.4f %10.3f\n", r.design.c_str(),
                    static_cast<unsigned long long>(r.macs),
                    static_cast<unsigned long long>(r.weighting_cycles), r.beta_vs_a,
                    r.row_ratio);
    }
    std::printf("wrote %s\n", (std::filesystem::path(a.out) / "design_sweep.csv").c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
    if (uint32_t cap = sweep_threads_cap())
        omp_set_num_threads(static_cast<int>(
            std::min<uint32_t>(cap, static_cast<uint32_t>(omp_get_max_threads()))));
#endif
    CLI::App app{"GNNIE-style GNN inference accelerator simulator"};
    app.require_subcommand(1);

    CommonArgs run_args, gamma_args, design_args, verify_args;
    std::string gammas = "1,2,3,4,5,6,7,8,9,10";
    std::string gen_spec, gen_out = "graph.txt", gen_snapshot;

    auto* run = app.add_subcommand("run", "single simulation run");
    add_common(run, run_args);
    auto* sg = app.add_subcommand("sweep-gamma", "DRAM traffic vs eviction threshold");
    add_common(sg, gamma_args);
    sg->add_option("--gammas", gammas, "comma-separated gamma values");
    auto* sd = app.add_subcommand("sweep-designs", "designs A-E, weighting cycles and beta");
    add_common(sd, design_args);
    auto* gg = app.add_subcommand("gen-graph", "write a synthetic graph to disk");
    gg->add_option("--gen", gen_spec, "powerlaw:n=...,m=...,seed=...")->required();
    gg->add_option("--out", gen_out, "edge-list output path");
    gg->add_option("--snapshot", gen_snapshot, "also write a binary snapshot");
    auto* vf = app.add_subcommand("verify", "run with golden-model checking");
    add_common(vf, verify_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_args, false);
        if (sg->parsed()) return cmd_sweep_gamma(gamma_args, gammas);
        if (sd->parsed()) return cmd_sweep_designs(design_args);
        if (vf->parsed()) return cmd_run(verify_args, true);
        if (gg->parsed()) {
            DatasetArgs d;
            d.gen = gen_spec;
            Graph g = make_graph(d, 1);
            save_edge_list_file(g, gen_out);
            std::printf("wrote %s (%u vertices, %llu edges)\n", gen_out.c_str(),
                        g.num_vertices,
                        static_cast<unsigned long long>(g.num_undirected_edges()));
            if (!gen_snapshot.empty()) {
                auto order = degree_sort(g, 8);
                save_snapshot(g, &order, gen_snapshot);
                std::printf("wrote %s\n", gen_snapshot.c_str());
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
