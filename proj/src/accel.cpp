#include "gnnie/accel.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace gnnie {

uint32_t MacProfile::group_of_row(uint32_t row) const {
    for (uint32_t g = 0; g + 1 < group_row_bounds.size(); ++g)
        if (row < group_row_bounds[g + 1]) return g;
    throw std::out_of_range("mac profile: row out of range");
}

uint64_t MacProfile::total_macs(uint32_t cols) const {
    uint64_t total = 0;
    for (uint32_t g = 0; g < num_groups(); ++g)
        total += static_cast<uint64_t>(group_row_bounds[g + 1] - group_row_bounds[g]) *
                 cols * macs_per_cpe[g];
    return total;
}

void MacProfile::validate(uint32_t rows) const {
    if (macs_per_cpe.empty() || group_row_bounds.size() != macs_per_cpe.size() + 1)
        throw std::invalid_argument("mac profile: group structure invalid");
    if (group_row_bounds.front() != 0 || group_row_bounds.back() != rows)
        throw std::invalid_argument("mac profile: groups must partition rows");
    for (size_t g = 0; g + 1 < group_row_bounds.size(); ++g)
        if (group_row_bounds[g] >= group_row_bounds[g + 1])
            throw std::invalid_argument("mac profile: empty group");
    for (size_t g = 0; g + 1 < macs_per_cpe.size(); ++g)
        if (macs_per_cpe[g] > macs_per_cpe[g + 1])
            throw std::invalid_argument("mac profile: MAC counts must be nondecreasing");
    for (uint32_t m : macs_per_cpe)
        if (m == 0) throw std::invalid_argument("mac profile: zero MACs");
}

MacProfile MacProfile::uniform(uint32_t rows, uint32_t macs) {
    return MacProfile{{0, rows}, {macs}};
}

MacProfile MacProfile::gnnie_flexible() {
    return MacProfile{{0, 8, 12, 16}, {4, 5, 6}};
}

const char* design_name(Design d) {
    switch (d) {
        case Design::A: return "A";
        case Design::B: return "B";
        case Design::C: return "C";
        case Design::D: return "D";
        case Design::E: return "E";
    }
    return "?";
}

MacProfile design_profile(Design d, uint32_t rows) {
    switch (d) {
        case Design::A: return MacProfile::uniform(rows, 4);
        case Design::B: return MacProfile::uniform(rows, 5);
        case Design::C: return MacProfile::uniform(rows, 6);
        case Design::D: return MacProfile::uniform(rows, 7);
        case Design::E: return MacProfile::gnnie_flexible();
    }
    throw std::logic_error("bad design");
}

void CacheConfig::validate() const {
    if (capacity_vertices && r_evict && r_evict > capacity_vertices)
        throw std::invalid_argument("cache: r > capacity");
    if (associativity == 0 || block_size_vertices == 0)
        throw std::invalid_argument("cache: zero geometry");
}

void SfuConfig::validate() const {
    if (lut_size < 2) throw std::invalid_argument("sfu: lut_size < 2");
    if (clamp_lo >= clamp_hi) throw std::invalid_argument("sfu: bad clamp domain");
    if (max_rel_error <= 0) throw std::invalid_argument("sfu: bad error bound");
}

void AcceleratorConfig::validate() const {
    if (array_rows == 0 || array_cols == 0) throw std::invalid_argument("config: zero array");
    mac_profile.validate(array_rows);
    if (freq_hz <= 0 || dram_bandwidth_bytes_per_sec <= 0)
        throw std::invalid_argument("config: zero rates");
    if (input_buffer_bytes == 0 || output_buffer_bytes == 0 || weight_buffer_bytes == 0)
        throw std::invalid_argument("config: zero buffers");
    if (psum_slots == 0) throw std::invalid_argument("config: zero psum slots");
    cache.validate();
    sfu.validate();
}

nlohmann::ordered_json AcceleratorConfig::to_json() const {
    nlohmann::ordered_json j;
    j["array_rows"] = array_rows;
    j["array_cols"] = array_cols;
    j["mac_profile"] = {{"group_row_bounds", mac_profile.group_row_bounds},
                        {"macs_per_cpe", mac_profile.macs_per_cpe}};
    j["freq_hz"] = freq_hz;
    j["input_buffer_bytes"] = input_buffer_bytes;
    j["output_buffer_bytes"] = output_buffer_bytes;
    j["weight_buffer_bytes"] = weight_buffer_bytes;
    j["dram_bandwidth_bytes_per_sec"] = dram_bandwidth_bytes_per_sec;
    j["dram_pj_per_bit"] = dram_pj_per_bit;
    j["mac_pj_per_op"] = mac_pj_per_op;
    j["buffer_pj_per_byte"] = buffer_pj_per_byte;
    j["dram_first_access_latency_cycles"] = dram_first_access_latency_cycles;
    j["psum_slots"] = psum_slots;
    j["cache"] = {{"capacity_vertices", cache.capacity_vertices},
                  {"gamma", cache.gamma},
                  {"r_evict", cache.r_evict},
                  {"associativity", cache.associativity},
                  {"block_size_vertices", cache.block_size_vertices}};
    j["sfu"] = {{"lut_size", sfu.lut_size},
                {"clamp_lo", sfu.clamp_lo},
                {"clamp_hi", sfu.clamp_hi},
                {"max_rel_error", sfu.max_rel_error},
                {"exact_exp", sfu.exact_exp},
                {"exp_latency", sfu.exp_latency},
                {"leaky_latency", sfu.leaky_latency},
                {"divide_latency", sfu.divide_latency}};
    return j;
}

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

AcceleratorConfig AcceleratorConfig::from_json(const nlohmann::json& j) {
    AcceleratorConfig c;
    reject_unknown(j,
                   {"array_rows", "array_cols", "mac_profile", "freq_hz", "input_buffer_bytes",
                    "output_buffer_bytes", "weight_buffer_bytes", "dram_bandwidth_bytes_per_sec",
                    "dram_pj_per_bit", "mac_pj_per_op", "buffer_pj_per_byte",
                    "dram_first_access_latency_cycles", "psum_slots", "cache", "sfu"},
                   "config");
    maybe(j, "array_rows", c.array_rows);
    maybe(j, "array_cols", c.array_cols);
    if (j.contains("mac_profile")) {
        const auto& m = j.at("mac_profile");
        reject_unknown(m, {"group_row_bounds", "macs_per_cpe"}, "mac_profile");
        maybe(m, "group_row_bounds", c.mac_profile.group_row_bounds);
        maybe(m, "macs_per_cpe", c.mac_profile.macs_per_cpe);
    }
    maybe(j, "freq_hz", c.freq_hz);
    maybe(j, "input_buffer_bytes", c.input_buffer_bytes);
    maybe(j, "output_buffer_bytes", c.output_buffer_bytes);
    maybe(j, "weight_buffer_bytes", c.weight_buffer_bytes);
    maybe(j, "dram_bandwidth_bytes_per_sec", c.dram_bandwidth_bytes_per_sec);
    maybe(j, "dram_pj_per_bit", c.dram_pj_per_bit);
    maybe(j, "mac_pj_per_op", c.mac_pj_per_op);
    maybe(j, "buffer_pj_per_byte", c.buffer_pj_per_byte);
    maybe(j, "dram_first_access_latency_cycles", c.dram_first_access_latency_cycles);
    maybe(j, "psum_slots", c.psum_slots);
    if (j.contains("cache")) {
        const auto& k = j.at("cache");
        reject_unknown(k,
                       {"capacity_vertices", "gamma", "r_evict", "associativity",
                        "block_size_vertices"},
                       "cache");
        maybe(k, "capacity_vertices", c.cache.capacity_vertices);
        maybe(k, "gamma", c.cache.gamma);
        maybe(k, "r_evict", c.cache.r_evict);
        maybe(k, "associativity", c.cache.associativity);
        maybe(k, "block_size_vertices", c.cache.block_size_vertices);
    }
    if (j.contains("sfu")) {
        const auto& s = j.at("sfu");
        reject_unknown(s,
                       {"lut_size", "clamp_lo", "clamp_hi", "max_rel_error", "exact_exp",
                        "exp_latency", "leaky_latency", "divide_latency"},
                       "sfu");
        maybe(s, "lut_size", c.sfu.lut_size);
        maybe(s, "clamp_lo", c.sfu.clamp_lo);
        maybe(s, "clamp_hi", c.sfu.clamp_hi);
        maybe(s, "max_rel_error", c.sfu.max_rel_error);
        maybe(s, "exact_exp", c.sfu.exact_exp);
        maybe(s, "exp_latency", c.sfu.exp_latency);
        maybe(s, "leaky_latency", c.sfu.leaky_latency);
        maybe(s, "divide_latency", c.sfu.divide_latency);
    }
    c.validate();
    return c;
}

AcceleratorConfig AcceleratorConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    return from_json(j);
}

}  // namespace gnnie
