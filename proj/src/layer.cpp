#include "gnnie/layer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gnnie/rng.hpp"

namespace gnnie {

const char* to_string(LayerKind k) {
    switch (k) {
        case LayerKind::gcn: return "gcn";
        case LayerKind::graphsage: return "graphsage";
        case LayerKind::gat: return "gat";
        case LayerKind::ginconv: return "ginconv";
    }
    return "?";
}

const char* to_string(Aggregator a) {
    switch (a) {
        case Aggregator::sum: return "sum";
        case Aggregator::mean: return "mean";
        case Aggregator::max: return "max";
    }
    return "?";
}

const char* to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::none: return "none";
        case Activation::softmax: return "softmax";
    }
    return "?";
}

LayerKind layer_kind_from_string(const std::string& s) {
    if (s == "gcn") return LayerKind::gcn;
    if (s == "graphsage" || s == "sage") return LayerKind::graphsage;
    if (s == "gat") return LayerKind::gat;
    if (s == "ginconv" || s == "gin") return LayerKind::ginconv;
    throw std::invalid_argument("unknown model kind: " + s);
}

void LayerSpec::validate() const {
    if (f_in == 0 || f_out == 0) throw std::invalid_argument("layer: zero width");
    if (kind == LayerKind::ginconv) {
        if (mlp.w1.rows != f_in || mlp.w1.cols == 0 || mlp.w2.rows != mlp.w1.cols ||
            mlp.w2.cols != f_out)
            throw std::invalid_argument("layer: MLP shape mismatch");
        if (mlp.b1.size() != mlp.w1.cols || mlp.b2.size() != f_out)
            throw std::invalid_argument("layer: MLP bias shape mismatch");
    } else {
        if (weight.rows != f_in || weight.cols != f_out)
            throw std::invalid_argument("layer: weight shape mismatch");
    }
    if (kind == LayerKind::gat &&
        (attn_src.size() != f_out || attn_dst.size() != f_out))
        throw std::invalid_argument("layer: attention vector shape mismatch");
    if (kind == LayerKind::graphsage && sample_size < 1)
        throw std::invalid_argument("layer: sample_size < 1");
}

SampleStream SampleStream::pregenerate(uint64_t seed, size_t count) {
    SampleStream s;
    Rng rng(seed);
    s.values.resize(count);
    for (auto& v : s.values) v = rng();
    return s;
}

uint64_t SampleStream::next() {
    if (values.empty()) throw std::runtime_error("sample stream exhausted (empty)");
    uint64_t v = values[cursor % values.size()];
    ++cursor;
    return v;
}

std::vector<VertexId> sample_neighbors(const Graph& g, VertexId v, uint32_t sample_size,
                                       SampleStream& stream) {
    auto nb = g.neighbors(v);
    std::vector<VertexId> pool(nb.begin(), nb.end());
    uint32_t take = std::min<uint32_t>(sample_size, static_cast<uint32_t>(pool.size()));
    for (uint32_t t = 0; t < take; ++t) {
        size_t idx = t + stream.next() % (pool.size() - t);
        std::swap(pool[t], pool[idx]);
    }
    pool.resize(take);
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::vector<std::vector<VertexId>> sample_all_neighbors(const Graph& g, uint32_t sample_size,
                                                        SampleStream& stream) {
    std::vector<std::vector<VertexId>> out(g.num_vertices);
    for (VertexId v = 0; v < g.num_vertices; ++v)
        out[v] = sample_neighbors(g, v, sample_size, stream);
    return out;
}

template <typename T>
static void apply_activation_impl(std::span<T> row, Activation a) {
    switch (a) {
        case Activation::none:
            return;
        case Activation::relu:
            for (T& v : row)
                if (v < T{}) v = T{};
            return;
        case Activation::softmax: {
            if (row.empty()) return;
            T m = row[0];
            for (T v : row) m = std::max(m, v);
            T sum{};
            for (T& v : row) {
                v = std::exp(v - m);
                sum += v;
            }
            for (T& v : row) v /= sum;
            return;
        }
    }
}

void apply_activation(std::span<double> row, Activation a) { apply_activation_impl(row, a); }
void apply_activation(std::span<float> row, Activation a) { apply_activation_impl(row, a); }

static FeatureMatrixD random_matrix(uint32_t rows, uint32_t cols, Rng& rng) {
    FeatureMatrixD m(rows, cols);
    double limit = std::sqrt(6.0 / (rows + cols));
    for (auto& v : m.data) v = rng_uniform(rng, -limit, limit);
    return m;
}

LayerSpec make_layer_spec(LayerKind kind, uint32_t f_in, uint32_t f_out, uint64_t seed,
                          Aggregator aggregator, Activation activation,
                          uint32_t sample_size) {
    LayerSpec spec;
    spec.kind = kind;
    spec.f_in = f_in;
    spec.f_out = f_out;
    spec.aggregator = aggregator;
    spec.activation = activation;
    spec.sample_size = sample_size;
    Rng rng(seed);
    if (kind == LayerKind::ginconv) {
        uint32_t hidden = f_out;  // Table-3 style "128 / 128" MLP
        spec.mlp.w1 = random_matrix(f_in, hidden, rng);
        spec.mlp.w2 = random_matrix(hidden, f_out, rng);
        spec.mlp.b1.resize(hidden);
        spec.mlp.b2.resize(f_out);
        for (auto& b : spec.mlp.b1) b = rng_uniform(rng, -0.1, 0.1);
        for (auto& b : spec.mlp.b2) b = rng_uniform(rng, -0.1, 0.1);
        spec.epsilon = rng_uniform(rng, -0.5, 0.5);
        spec.activation = Activation::none;  // activation lives inside the MLP
    } else {
        spec.weight = random_matrix(f_in, f_out, rng);
    }
    if (kind == LayerKind::gat) {
        spec.attn_src.resize(f_out);
        spec.attn_dst.resize(f_out);
        double scale = 1.0 / std::sqrt(static_cast<double>(f_out));
        for (auto& v : spec.attn_src) v = rng_uniform(rng, -scale, scale);
        for (auto& v : spec.attn_dst) v = rng_uniform(rng, -scale, scale);
    }
    spec.validate();
    return spec;
}

}  // namespace gnnie
