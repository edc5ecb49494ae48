#pragma once

#include <vector>

#include "gnnie/accel.hpp"
#include "gnnie/stats.hpp"

namespace gnnie {

// Special function unit: lookup-table exponentiation (range reduction to
// 2^f over [0,1) with linear interpolation between lut_size nodes) and
// LeakyReLU. Inputs outside the clamp domain saturate and are flagged.
class SfuModel {
public:
    explicit SfuModel(const SfuConfig& cfg, double leaky_slope = 0.01);

    float exp_eval(float x, PhaseStats* stats = nullptr) const;
    float leaky_relu(float x) const {
        return x >= 0.0f ? x : static_cast<float>(leaky_slope_) * x;
    }

    const SfuConfig& config() const { return cfg_; }
    double leaky_slope() const { return leaky_slope_; }

private:
    SfuConfig cfg_;
    double leaky_slope_;
    std::vector<float> pow2_table_;  // 2^f at f = i/lut_size, i in [0, lut_size]
};

}  // namespace gnnie
