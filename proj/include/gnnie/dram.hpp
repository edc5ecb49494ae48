#pragma once

#include <cstdint>
#include <span>

#include "gnnie/accel.hpp"
#include "gnnie/stats.hpp"

namespace gnnie {

// Flat-bandwidth DRAM with double-buffering overlap. Raw transfer time is
// ceil(bytes / bytes_per_cycle); the portion hidden behind overlap_cycles of
// compute is free. A fixed first-access latency is charged separately by the
// engines at each phase's first cold fetch.
class DramModel {
public:
    explicit DramModel(const AcceleratorConfig& cfg) : cfg_(&cfg) {}

    uint64_t raw_cycles(uint64_t bytes) const;
    // Records the transfer and returns the charged (non-hidden) cycles.
    uint64_t transfer(uint64_t bytes, DramKind kind, uint64_t overlap_cycles, uint64_t block,
                      DramPhase phase, uint32_t round);

    const DramTrace& trace() const { return trace_; }
    DramTrace& trace() { return trace_; }
    uint64_t next_write_block() { return write_cursor_++; }

private:
    const AcceleratorConfig* cfg_;
    DramTrace trace_;
    uint64_t seq_ = 0;
    uint64_t write_cursor_ = 0;
};

struct EnergyReport {
    double dram_pj = 0;
    double mac_pj = 0;
    double input_buffer_pj = 0;
    double output_buffer_pj = 0;
    double weight_buffer_pj = 0;
    double total_pj = 0;

    nlohmann::ordered_json to_json() const;
    static EnergyReport from_json(const nlohmann::ordered_json& j);
};

EnergyReport energy_report(std::span<const PhaseStats> phases, const DramTrace& trace,
                           const AcceleratorConfig& cfg);

// Peak ops/sec; one MAC retires a multiply and an accumulate (2 ops).
double peak_throughput(const AcceleratorConfig& cfg);

}  // namespace gnnie
