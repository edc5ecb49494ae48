#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gnnie {

template <typename T>
struct DenseMatrix {
    uint32_t rows = 0;
    uint32_t cols = 0;
    std::vector<T> data;  // row-major

    DenseMatrix() = default;
    DenseMatrix(uint32_t r, uint32_t c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, T{}) {}

    T& at(uint32_t r, uint32_t c) { return data[static_cast<size_t>(r) * cols + c]; }
    T at(uint32_t r, uint32_t c) const { return data[static_cast<size_t>(r) * cols + c]; }
    std::span<T> row(uint32_t r) { return {data.data() + static_cast<size_t>(r) * cols, cols}; }
    std::span<const T> row(uint32_t r) const {
        return {data.data() + static_cast<size_t>(r) * cols, cols};
    }
    uint32_t row_nnz(uint32_t r) const {
        uint32_t nnz = 0;
        for (T v : row(r))
            if (v != T{}) ++nnz;
        return nnz;
    }
};

using FeatureMatrix = DenseMatrix<float>;    // simulator functional path
using FeatureMatrixD = DenseMatrix<double>;  // golden reference path

FeatureMatrixD widen(const FeatureMatrix& m);
FeatureMatrix narrow(const FeatureMatrixD& m);

// Run-length compression of a sparse row: each stored value is preceded by
// the count of zeros since the previous value; zeros after the last value
// are kept as an explicit trailing count. Lossless.
struct RlcRow {
    std::vector<std::pair<uint32_t, float>> runs;  // (zeros_before, value)
    uint32_t trailing_zeros = 0;

    uint32_t decoded_width() const;
};

RlcRow rlc_encode(std::span<const float> row);
std::vector<float> rlc_decode(const RlcRow& r);
// Checked variant: throws if the run sums do not reproduce expected_width.
std::vector<float> rlc_decode(const RlcRow& r, uint32_t expected_width);

// Encoded wire size: 1-byte run length + 4-byte value per run, plus a
// 5-byte row header (trailing count + terminator). Used for DRAM accounting.
uint64_t rlc_bytes(const RlcRow& r);
uint64_t rlc_row_bytes(std::span<const float> row);

// Binary feature file: "GNNF" + u32 rows + u32 width + f32 row-major (LE).
void save_features(const FeatureMatrix& m, const std::string& path);
FeatureMatrix load_features(const std::string& path);
// Text fallback: one row per line, whitespace-separated values.
FeatureMatrix load_features_text(const std::string& path);

// Synthetic input features with bimodal per-row sparsity (a mostly-sparse
// mode and a denser mode) and nonzero positions skewed toward low column
// indices, mimicking real text-feature datasets. Deterministic per seed.
struct SyntheticFeatureParams {
    double sparsity_lo = 0.99;   // sparse mode: fraction of zeros
    double sparsity_hi = 0.85;   // dense mode
    double dense_fraction = 0.3; // probability a row uses the dense mode
    double skew = 0.8;           // fraction of nonzeros biased toward low indices
};
FeatureMatrix synth_features_bimodal(uint32_t rows, uint32_t width,
                                     const SyntheticFeatureParams& params,
                                     uint64_t seed);

}  // namespace gnnie
