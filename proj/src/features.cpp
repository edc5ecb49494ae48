#include "gnnie/features.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gnnie/rng.hpp"

namespace gnnie {

FeatureMatrixD widen(const FeatureMatrix& m) {
    FeatureMatrixD out(m.rows, m.cols);
    for (size_t i = 0; i < m.data.size(); ++i) out.data[i] = m.data[i];
    return out;
}

FeatureMatrix narrow(const FeatureMatrixD& m) {
    FeatureMatrix out(m.rows, m.cols);
    for (size_t i = 0; i < m.data.size(); ++i) out.data[i] = static_cast<float>(m.data[i]);
    return out;
}

uint32_t RlcRow::decoded_width() const {
    uint32_t w = trailing_zeros;
    for (const auto& [zeros, value] : runs) w += zeros + 1;
    return w;
}

RlcRow rlc_encode(std::span<const float> row) {
    RlcRow out;
    uint32_t zeros = 0;
    for (float v : row) {
        if (v == 0.0f) {
            ++zeros;
        } else {
            out.runs.emplace_back(zeros, v);
            zeros = 0;
        }
    }
    out.trailing_zeros = zeros;
    return out;
}

std::vector<float> rlc_decode(const RlcRow& r) {
    std::vector<float> out;
    out.reserve(r.decoded_width());
    for (const auto& [zeros, value] : r.runs) {
        out.insert(out.end(), zeros, 0.0f);
        if (value == 0.0f) throw std::invalid_argument("rlc_decode: stored zero value");
        out.push_back(value);
    }
    out.insert(out.end(), r.trailing_zeros, 0.0f);
    return out;
}

std::vector<float> rlc_decode(const RlcRow& r, uint32_t expected_width) {
    if (r.decoded_width() != expected_width)
        throw std::invalid_argument("rlc_decode: run sums do not match row width");
    return rlc_decode(r);
}

uint64_t rlc_bytes(const RlcRow& r) { return 5u * r.runs.size() + 5u; }

uint64_t rlc_row_bytes(std::span<const float> row) {
    uint64_t nnz = 0;
    for (float v : row)
        if (v != 0.0f) ++nnz;
    return 5u * nnz + 5u;
}

namespace {
constexpr char kFeatureMagic[4] = {'G', 'N', 'N', 'F'};
}

void save_features(const FeatureMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write features: " + path);
    out.write(kFeatureMagic, 4);
    out.write(reinterpret_cast<const char*>(&m.rows), 4);
    out.write(reinterpret_cast<const char*>(&m.cols), 4);
    out.write(reinterpret_cast<const char*>(m.data.data()),
              static_cast<std::streamsize>(m.data.size() * sizeof(float)));
}

FeatureMatrix load_features(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open features: " + path);
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kFeatureMagic, 4) != 0)
        throw std::runtime_error("features: bad magic (expected GNNF): " + path);
    uint32_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), 4);
    in.read(reinterpret_cast<char*>(&cols), 4);
    FeatureMatrix m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * sizeof(float)));
    if (!in) throw std::runtime_error("features: truncated: " + path);
    return m;
}

FeatureMatrix load_features_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open features: " + path);
    std::vector<std::vector<float>> rows;
    std::string line;
    size_t width = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::vector<float> row;
        float v;
        while (ls >> v) row.push_back(v);
        if (rows.empty()) width = row.size();
        else if (row.size() != width)
            throw std::runtime_error("features text: ragged rows");
        rows.push_back(std::move(row));
    }
    FeatureMatrix m(static_cast<uint32_t>(rows.size()), static_cast<uint32_t>(width));
    for (uint32_t r = 0; r < m.rows; ++r)
        std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    return m;
}

FeatureMatrix synth_features_bimodal(uint32_t rows, uint32_t width,
                                     const SyntheticFeatureParams& p, uint64_t seed) {
    if (p.sparsity_lo < 0 || p.sparsity_lo > 1 || p.sparsity_hi < 0 || p.sparsity_hi > 1)
        throw std::invalid_argument("synth_features: sparsity out of [0,1]");
    FeatureMatrix m(rows, width);
    Rng rng(seed);
    for (uint32_t r = 0; r < rows; ++r) {
        double sparsity = (rng_u01(rng) < p.dense_fraction) ? p.sparsity_hi : p.sparsity_lo;
        uint32_t nnz = static_cast<uint32_t>(std::lround((1.0 - sparsity) * width));
        if (nnz == 0) nnz = 1;
        auto row = m.row(r);
        uint32_t placed = 0;
        while (placed < nnz) {
            double u = rng_u01(rng);
            // Cubing biases positions toward column 0 (frequent-word region).
            uint32_t c = (rng_u01(rng) < p.skew)
                             ? static_cast<uint32_t>(u * u * u * width)
                             : static_cast<uint32_t>(u * width);
            if (c >= width) c = width - 1;
            if (row[c] != 0.0f) continue;
            row[c] = static_cast<float>(rng_uniform(rng, 0.1, 1.0));
            ++placed;
        }
    }
    return m;
}

}  // namespace gnnie
