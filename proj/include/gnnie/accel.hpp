#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace gnnie {

// Heterogeneous MAC counts per CPE row group ("flexible MAC").
struct MacProfile {
    std::vector<uint32_t> group_row_bounds;  // num_groups+1 boundaries, [0 .. M]
    std::vector<uint32_t> macs_per_cpe;      // per group, nondecreasing

    uint32_t num_groups() const { return static_cast<uint32_t>(macs_per_cpe.size()); }
    uint32_t group_of_row(uint32_t row) const;
    uint32_t macs_for_row(uint32_t row) const { return macs_per_cpe[group_of_row(row)]; }
    uint64_t total_macs(uint32_t cols) const;
    void validate(uint32_t rows) const;

    static MacProfile uniform(uint32_t rows, uint32_t macs);
    // Paper configuration: rows 1-8 x4, 9-12 x5, 13-16 x6 (1216 MACs on 16x16).
    static MacProfile gnnie_flexible();
};

// Designs A-E from the optimization study. A is the 4-MAC uniform baseline,
// B/C/D raise the uniform count, E is the flexible profile.
enum class Design : uint8_t { A, B, C, D, E };
const char* design_name(Design d);
MacProfile design_profile(Design d, uint32_t rows);

struct CacheConfig {
    uint32_t capacity_vertices = 0;  // 0 = derive from input buffer size
    uint32_t gamma = 5;
    uint32_t r_evict = 0;            // 0 = capacity/8
    uint32_t associativity = 4;
    uint32_t block_size_vertices = 8;
    void validate() const;
};

struct SfuConfig {
    uint32_t lut_size = 1024;
    double clamp_lo = -16.0;
    double clamp_hi = 16.0;
    double max_rel_error = 1e-3;
    bool exact_exp = false;
    uint32_t exp_latency = 2;
    uint32_t leaky_latency = 1;
    uint32_t divide_latency = 4;
    void validate() const;
};

struct AcceleratorConfig {
    uint32_t array_rows = 16;  // M
    uint32_t array_cols = 16;  // N
    MacProfile mac_profile = MacProfile::gnnie_flexible();
    double freq_hz = 1.3e9;
    uint64_t input_buffer_bytes = 262144;
    uint64_t output_buffer_bytes = 1048576;
    uint64_t weight_buffer_bytes = 131072;
    double dram_bandwidth_bytes_per_sec = 256e9;
    double dram_pj_per_bit = 3.97;
    double mac_pj_per_op = 0.5;       // placeholder, not from synthesis
    double buffer_pj_per_byte = 0.1;  // placeholder, not from synthesis
    uint32_t dram_first_access_latency_cycles = 130;  // ~100 ns at 1.3 GHz
    uint32_t psum_slots = 16;
    CacheConfig cache;
    SfuConfig sfu;

    double dram_bytes_per_cycle() const { return dram_bandwidth_bytes_per_sec / freq_hz; }
    uint64_t total_macs() const { return mac_profile.total_macs(array_cols); }
    void validate() const;

    nlohmann::ordered_json to_json() const;
    // Unknown keys are rejected.
    static AcceleratorConfig from_json(const nlohmann::json& j);
    static AcceleratorConfig from_file(const std::string& path);
};

}  // namespace gnnie
