#include "gnnie/sfu.hpp"

#include <cmath>

namespace gnnie {

SfuModel::SfuModel(const SfuConfig& cfg, double leaky_slope)
    : cfg_(cfg), leaky_slope_(leaky_slope) {
    cfg_.validate();
    pow2_table_.resize(cfg_.lut_size + 1);
    for (uint32_t i = 0; i <= cfg_.lut_size; ++i)
        pow2_table_[i] =
            static_cast<float>(std::exp2(static_cast<double>(i) / cfg_.lut_size));
}

float SfuModel::exp_eval(float x, PhaseStats* stats) const {
    if (stats) stats->sfu_ops++;
    float clamped = x;
    if (clamped < cfg_.clamp_lo) clamped = static_cast<float>(cfg_.clamp_lo);
    if (clamped > cfg_.clamp_hi) clamped = static_cast<float>(cfg_.clamp_hi);
    if (stats && clamped != x) stats->exp_clamp_events++;
    if (cfg_.exact_exp) return std::exp(clamped);

    // exp(x) = 2^(x*log2 e) = 2^n * 2^f with f in [0,1) taken from the table.
    float y = clamped * 1.4426950408889634f;
    float nf = std::floor(y);
    float f = y - nf;
    float scaled = f * cfg_.lut_size;
    auto idx = static_cast<uint32_t>(scaled);
    if (idx >= cfg_.lut_size) idx = cfg_.lut_size - 1;
    float t = scaled - idx;
    float p = pow2_table_[idx] + t * (pow2_table_[idx + 1] - pow2_table_[idx]);
    return std::ldexp(p, static_cast<int>(nf));
}

}  // namespace gnnie
