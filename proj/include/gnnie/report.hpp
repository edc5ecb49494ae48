#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gnnie/cache.hpp"
#include "gnnie/dram.hpp"
#include "gnnie/stats.hpp"
#include "gnnie/weighting.hpp"
#include "json.hpp"

namespace gnnie {

struct LayerReport {
    std::string name;
    std::string kind;
    uint32_t f_in = 0;
    uint32_t f_out = 0;
    WeightingPlan plan;
    std::vector<PhaseStats> phases;
    std::vector<uint64_t> row_cycles;  // weighting workload per CPE row
    std::vector<AlphaHistogram> alpha_histograms;
    uint32_t rounds = 0;
    uint64_t iterations = 0;
    uint32_t gamma_escalations = 0;
    uint64_t initial_alpha_sum = 0;
    uint64_t alpha_decrements = 0;
    bool deadlocked = false;
    double verify_max_rel_err = -1.0;  // < 0: not verified

    nlohmann::ordered_json to_json() const;
    static LayerReport from_json(const nlohmann::ordered_json& j);
};

// Full run record. The raw DRAM trace is carried alongside and written to
// the CSV bundle; the JSON embeds its totals. Reports are reproducible
// byte-for-byte for a fixed (inputs, config, seed).
struct RunReport {
    std::string schema = "gnnie-sim/1";
    std::string model;
    std::string design = "E";
    uint64_t seed = 0;
    nlohmann::ordered_json config_echo;
    nlohmann::ordered_json options_echo;
    nlohmann::ordered_json dataset;
    std::vector<LayerReport> layers;
    EnergyReport energy;
    uint64_t total_cycles = 0;
    uint64_t total_mac_ops = 0;
    double achieved_tops = 0.0;
    double peak_tops = 0.0;
    bool verify_passed = true;
    bool deadlocked = false;
    uint64_t dram_bytes_read = 0;
    uint64_t dram_bytes_written = 0;

    DramTrace trace;  // not serialized to JSON; emitted in the CSV bundle

    nlohmann::ordered_json to_json() const;
    static RunReport from_json(const nlohmann::ordered_json& j);
    std::string dump() const { return to_json().dump(2) + "\n"; }
};

// Speedup gain per added MAC against a baseline design.
double beta(uint64_t base_cycles, uint64_t base_macs, uint64_t design_cycles,
            uint64_t design_macs);

enum class EmitFormat { json, csv_bundle };

// Writes report.json (and for csv_bundle: row_workload.csv,
// alpha_histogram.csv, dram_trace.csv). Returns the files written.
std::vector<std::string> emit_report(const RunReport& r, const std::string& out_dir,
                                     EmitFormat format);
RunReport parse_report(const std::string& json_path);

void write_row_workload_csv(const RunReport& r, std::ostream& out);
void write_alpha_histogram_csv(const RunReport& r, std::ostream& out);

}  // namespace gnnie
