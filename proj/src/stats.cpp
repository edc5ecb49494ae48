#include "gnnie/stats.hpp"

#include <map>
#include <ostream>

namespace gnnie {

nlohmann::ordered_json PhaseStats::to_json() const {
    nlohmann::ordered_json j;
    j["phase"] = phase;
    j["cycles"] = cycles;
    j["stall_cycles"] = stall_cycles;
    j["mac_ops"] = mac_ops;
    j["skipped_zero_mults"] = skipped_zero_mults;
    j["dram_bytes_read"] = dram_bytes_read;
    j["dram_bytes_written"] = dram_bytes_written;
    j["input_buffer_bytes"] = input_buffer_bytes;
    j["output_buffer_bytes"] = output_buffer_bytes;
    j["weight_buffer_bytes"] = weight_buffer_bytes;
    j["sfu_ops"] = sfu_ops;
    j["exp_clamp_events"] = exp_clamp_events;
    j["scalar_mults"] = scalar_mults;
    j["psum_spills"] = psum_spills;
    return j;
}

PhaseStats PhaseStats::from_json(const nlohmann::ordered_json& j) {
    PhaseStats s;
    s.phase = j.at("phase").get<std::string>();
    s.cycles = j.at("cycles").get<uint64_t>();
    s.stall_cycles = j.at("stall_cycles").get<uint64_t>();
    s.mac_ops = j.at("mac_ops").get<uint64_t>();
    s.skipped_zero_mults = j.at("skipped_zero_mults").get<uint64_t>();
    s.dram_bytes_read = j.at("dram_bytes_read").get<uint64_t>();
    s.dram_bytes_written = j.at("dram_bytes_written").get<uint64_t>();
    s.input_buffer_bytes = j.at("input_buffer_bytes").get<uint64_t>();
    s.output_buffer_bytes = j.at("output_buffer_bytes").get<uint64_t>();
    s.weight_buffer_bytes = j.at("weight_buffer_bytes").get<uint64_t>();
    s.sfu_ops = j.at("sfu_ops").get<uint64_t>();
    s.exp_clamp_events = j.at("exp_clamp_events").get<uint64_t>();
    s.scalar_mults = j.at("scalar_mults").get<uint64_t>();
    s.psum_spills = j.at("psum_spills").get<uint64_t>();
    return s;
}

const char* to_string(DramKind k) { return k == DramKind::read ? "read" : "write"; }

const char* to_string(DramPhase p) {
    switch (p) {
        case DramPhase::weighting: return "weighting";
        case DramPhase::attention: return "attention";
        case DramPhase::aggregation: return "aggregation";
        case DramPhase::alpha_writeback: return "alpha_writeback";
        case DramPhase::spill: return "spill";
        case DramPhase::output: return "output";
    }
    return "?";
}

uint64_t DramTrace::total_bytes() const {
    uint64_t total = 0;
    for (const auto& e : entries) total += e.bytes;
    return total;
}

uint64_t DramTrace::bytes(DramKind k) const {
    uint64_t total = 0;
    for (const auto& e : entries)
        if (e.kind == k) total += e.bytes;
    return total;
}

uint64_t DramTrace::bytes(DramKind k, DramPhase p) const {
    uint64_t total = 0;
    for (const auto& e : entries)
        if (e.kind == k && e.phase == p) total += e.bytes;
    return total;
}

void DramTrace::write_csv(std::ostream& out) const {
    out << "seq,block,bytes,kind,phase,round\n";
    for (const auto& e : entries)
        out << e.seq << ',' << e.block << ',' << e.bytes << ',' << to_string(e.kind) << ','
            << to_string(e.phase) << ',' << e.round << '\n';
}

bool DramTrace::aggregation_reads_sequential() const {
    std::map<uint32_t, uint64_t> last_block;  // per round
    for (const auto& e : entries) {
        if (e.kind != DramKind::read || e.phase != DramPhase::aggregation) continue;
        auto it = last_block.find(e.round);
        if (it != last_block.end() && e.block < it->second) return false;
        last_block[e.round] = e.block;
    }
    return true;
}

}  // namespace gnnie
