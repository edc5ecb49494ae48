#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace gnnie {

struct PhaseStats {
    std::string phase;
    uint64_t cycles = 0;
    uint64_t stall_cycles = 0;
    uint64_t mac_ops = 0;
    uint64_t skipped_zero_mults = 0;
    uint64_t dram_bytes_read = 0;
    uint64_t dram_bytes_written = 0;
    uint64_t input_buffer_bytes = 0;
    uint64_t output_buffer_bytes = 0;
    uint64_t weight_buffer_bytes = 0;
    uint64_t sfu_ops = 0;
    uint64_t exp_clamp_events = 0;
    uint64_t scalar_mults = 0;   // attention-scalar multiplication counter
    uint64_t psum_spills = 0;

    nlohmann::ordered_json to_json() const;
    static PhaseStats from_json(const nlohmann::ordered_json& j);
};

enum class DramKind : uint8_t { read, write };

enum class DramPhase : uint8_t {
    weighting,    // feature/weight streams of the Weighting phase
    attention,    // eta re-reads for attention scalar passes
    aggregation,  // vertex-stream loads of the Aggregation phase (the
                  // sequential-access guarantee applies to these reads)
    alpha_writeback,
    spill,        // output-buffer psum spills and their merge reads
    output        // final per-vertex results
};

const char* to_string(DramKind k);
const char* to_string(DramPhase p);

struct DramTraceEntry {
    uint64_t seq;
    uint64_t block;
    uint64_t bytes;
    DramKind kind;
    DramPhase phase;
    uint32_t round;
};

struct DramTrace {
    std::vector<DramTraceEntry> entries;

    uint64_t total_bytes() const;
    uint64_t bytes(DramKind k) const;
    uint64_t bytes(DramKind k, DramPhase p) const;
    void write_csv(std::ostream& out) const;  // seq,block,bytes,kind,phase,round

    // Aggregation-phase reads must have nondecreasing block indices within
    // each round. Returns false on the first violation.
    bool aggregation_reads_sequential() const;
};

}  // namespace gnnie
