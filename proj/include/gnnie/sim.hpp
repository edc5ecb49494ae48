#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gnnie/accel.hpp"
#include "gnnie/aggregation.hpp"
#include "gnnie/features.hpp"
#include "gnnie/graph.hpp"
#include "gnnie/layer.hpp"
#include "gnnie/report.hpp"
#include "gnnie/weighting.hpp"

namespace gnnie {

struct RunOptions {
    bool cp = true;  // degree-aware caching (vs vertex-ID order)
    bool fm = true;  // flexible-MAC binning
    bool lr = true;  // load redistribution
    bool lb = true;  // aggregation load distribution
    bool verify_golden = false;
    bool dynamic_gamma = false;
    bool exact_exp = false;
    uint32_t degree_bins = 8;
    uint32_t lr_max_pairs = 4;
    uint64_t seed = 1;

    nlohmann::ordered_json to_json() const;
};

struct ModelConfig {
    LayerKind kind = LayerKind::gcn;
    std::vector<uint32_t> widths = {256, 128, 128};  // f_in, hidden..., out
    Aggregator aggregator = Aggregator::sum;
    Activation activation = Activation::relu;
    uint32_t sample_size = 25;
};

// Seeded layer specs for the model; layer l's parameters derive from
// seed and l, so runs are reproducible.
std::vector<LayerSpec> build_layer_specs(const ModelConfig& model, uint64_t seed);
uint64_t layer_param_seed(uint64_t seed, size_t layer);
uint64_t layer_sample_seed(uint64_t seed, size_t layer);

// Golden-comparison tolerance for a layer kind under the active exp mode.
double golden_tolerance(LayerKind kind, bool exact_exp);
// max |a-b| / max(|a|,|b|,1) over all elements.
double max_rel_err(const FeatureMatrix& a, const FeatureMatrixD& b);

struct RunOutcome {
    RunReport report;
    std::vector<FeatureMatrix> layer_outputs;
    bool verify_failed = false;
};

// Full pipeline: per layer Weighting (then attention scalars for GAT),
// cache-driven Aggregation, and for GINConv the MLP's second affine stage as
// another Weighting pass. Optionally checks each layer against gnn_reference.
RunOutcome run_model(const Graph& g, const FeatureMatrix& input,
                     const std::vector<LayerSpec>& specs, const AcceleratorConfig& cfg,
                     const RunOptions& opts);

struct GammaSweepRow {
    uint32_t gamma = 0;
    uint64_t aggregation_dram_bytes = 0;
    uint32_t rounds = 0;
    uint64_t total_cycles = 0;
    bool deadlocked = false;
};
std::vector<GammaSweepRow> sweep_gamma(const Graph& g, const FeatureMatrix& input,
                                       const std::vector<LayerSpec>& specs,
                                       const AcceleratorConfig& cfg, const RunOptions& opts,
                                       std::span<const uint32_t> gammas);

struct DesignSweepRow {
    std::string design;
    uint64_t macs = 0;
    uint64_t weighting_cycles = 0;
    double beta_vs_a = 0.0;   // (cycles_A - cycles_X) / (macs_X - macs_A)
    double row_ratio = 0.0;   // max/min busy cycles over CPE rows
};
// Designs A-E; FM/LR only on E (A-D are uniform, binning is a no-op there).
std::vector<DesignSweepRow> sweep_designs(const Graph& g, const FeatureMatrix& input,
                                          const std::vector<LayerSpec>& specs,
                                          const AcceleratorConfig& base,
                                          const RunOptions& opts);

// GNNIE_SIM_THREADS cap for sweep parallelism (0 = unset).
uint32_t sweep_threads_cap();

}  // namespace gnnie
