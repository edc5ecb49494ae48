#include "gnnie/dram.hpp"

#include <cmath>

namespace gnnie {

uint64_t DramModel::raw_cycles(uint64_t bytes) const {
    if (bytes == 0) return 0;
    return static_cast<uint64_t>(
        std::ceil(static_cast<double>(bytes) / cfg_->dram_bytes_per_cycle()));
}

uint64_t DramModel::transfer(uint64_t bytes, DramKind kind, uint64_t overlap_cycles,
                             uint64_t block, DramPhase phase, uint32_t round) {
    if (bytes == 0) return 0;
    trace_.entries.push_back({seq_++, block, bytes, kind, phase, round});
    uint64_t raw = raw_cycles(bytes);
    return raw > overlap_cycles ? raw - overlap_cycles : 0;
}

nlohmann::ordered_json EnergyReport::to_json() const {
    nlohmann::ordered_json j;
    j["dram_pj"] = dram_pj;
    j["mac_pj"] = mac_pj;
    j["input_buffer_pj"] = input_buffer_pj;
    j["output_buffer_pj"] = output_buffer_pj;
    j["weight_buffer_pj"] = weight_buffer_pj;
    j["total_pj"] = total_pj;
    return j;
}

EnergyReport EnergyReport::from_json(const nlohmann::ordered_json& j) {
    EnergyReport e;
    e.dram_pj = j.at("dram_pj").get<double>();
    e.mac_pj = j.at("mac_pj").get<double>();
    e.input_buffer_pj = j.at("input_buffer_pj").get<double>();
    e.output_buffer_pj = j.at("output_buffer_pj").get<double>();
    e.weight_buffer_pj = j.at("weight_buffer_pj").get<double>();
    e.total_pj = j.at("total_pj").get<double>();
    return e;
}

EnergyReport energy_report(std::span<const PhaseStats> phases, const DramTrace& trace,
                           const AcceleratorConfig& cfg) {
    EnergyReport e;
    e.dram_pj = static_cast<double>(trace.total_bytes()) * 8.0 * cfg.dram_pj_per_bit;
    uint64_t macs = 0, in_b = 0, out_b = 0, w_b = 0;
    for (const auto& p : phases) {
        macs += p.mac_ops;
        in_b += p.input_buffer_bytes;
        out_b += p.output_buffer_bytes;
        w_b += p.weight_buffer_bytes;
    }
    e.mac_pj = static_cast<double>(macs) * cfg.mac_pj_per_op;
    e.input_buffer_pj = static_cast<double>(in_b) * cfg.buffer_pj_per_byte;
    e.output_buffer_pj = static_cast<double>(out_b) * cfg.buffer_pj_per_byte;
    e.weight_buffer_pj = static_cast<double>(w_b) * cfg.buffer_pj_per_byte;
    e.total_pj =
        e.dram_pj + e.mac_pj + e.input_buffer_pj + e.output_buffer_pj + e.weight_buffer_pj;
    return e;
}

double peak_throughput(const AcceleratorConfig& cfg) {
    return static_cast<double>(cfg.total_macs()) * 2.0 * cfg.freq_hz;
}

}  // namespace gnnie
