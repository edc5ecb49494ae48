#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gnnie/features.hpp"
#include "gnnie/graph.hpp"

namespace gnnie {

enum class LayerKind { gcn, graphsage, gat, ginconv };
enum class Aggregator { sum, mean, max };
enum class Activation { relu, none, softmax };

const char* to_string(LayerKind k);
const char* to_string(Aggregator a);
const char* to_string(Activation a);
LayerKind layer_kind_from_string(const std::string& s);

// Two affine stages with ReLU between: relu(x*w1 + b1)*w2 + b2.
struct Mlp {
    FeatureMatrixD w1, w2;
    std::vector<double> b1, b2;
};

struct LayerSpec {
    LayerKind kind = LayerKind::gcn;
    uint32_t f_in = 0;
    uint32_t f_out = 0;
    FeatureMatrixD weight;               // f_in x f_out (unused for GINConv)
    std::vector<double> attn_src;        // a1, length f_out (GAT)
    std::vector<double> attn_dst;        // a2, length f_out (GAT)
    double leaky_slope = 0.01;
    double epsilon = 0.0;                // GINConv
    Mlp mlp;                             // GINConv: f_in -> hidden -> f_out
    Aggregator aggregator = Aggregator::sum;  // GraphSAGE
    uint32_t sample_size = 25;                // GraphSAGE
    Activation activation = Activation::relu;

    uint32_t mlp_hidden() const { return mlp.w1.cols; }
    void validate() const;
};

// Pregenerated random numbers consumed round-robin; replaying from the same
// seed reproduces every sampling decision.
struct SampleStream {
    std::vector<uint64_t> values;
    size_t cursor = 0;

    static SampleStream pregenerate(uint64_t seed, size_t count = 4096);
    uint64_t next();
    void reset() { cursor = 0; }
};

// min(sample_size, deg(v)) distinct neighbors of v, drawn via the stream
// (partial Fisher-Yates), returned sorted.
std::vector<VertexId> sample_neighbors(const Graph& g, VertexId v, uint32_t sample_size,
                                       SampleStream& stream);
// Per-vertex sample sets for the whole graph, vertices in ascending order.
std::vector<std::vector<VertexId>> sample_all_neighbors(const Graph& g, uint32_t sample_size,
                                                        SampleStream& stream);

void apply_activation(std::span<double> row, Activation a);
void apply_activation(std::span<float> row, Activation a);

// Seeded parameter initialization (uniform +-sqrt(6/(f_in+f_out)) weights).
LayerSpec make_layer_spec(LayerKind kind, uint32_t f_in, uint32_t f_out, uint64_t seed,
                          Aggregator aggregator = Aggregator::sum,
                          Activation activation = Activation::relu,
                          uint32_t sample_size = 25);

}  // namespace gnnie
