#pragma once

#include <span>
#include <vector>

#include "gnnie/features.hpp"
#include "gnnie/graph.hpp"
#include "gnnie/layer.hpp"

namespace gnnie::golden {

// Exact functional reference for each layer, double precision. Each vertex
// row is computed independently with a fixed operation order, so the OpenMP
// path (parallel=true) is bit-identical to the serial one; the serial path
// is kept as the reference the parallel kernels are tested against.

FeatureMatrixD gcn_layer(const Graph& g, const FeatureMatrixD& h, const LayerSpec& spec,
                         bool parallel = true);
FeatureMatrixD sage_layer(const Graph& g, const FeatureMatrixD& h, const LayerSpec& spec,
                          SampleStream& stream, bool parallel = true);
FeatureMatrixD gat_layer(const Graph& g, const FeatureMatrixD& h, const LayerSpec& spec,
                         bool parallel = true);
FeatureMatrixD gin_layer(const Graph& g, const FeatureMatrixD& h, const LayerSpec& spec,
                         bool parallel = true);

// Dispatch on spec.kind. stream may be null for non-GraphSAGE layers.
FeatureMatrixD run_layer(const Graph& g, const FeatureMatrixD& h, const LayerSpec& spec,
                         SampleStream* stream, bool parallel = true);

// Concatenation over layers of the per-layer sum of all vertex features.
std::vector<double> graph_readout(std::span<const FeatureMatrixD> per_layer);

// h * w with per-row parallelism; shared by the layer kernels.
FeatureMatrixD matmul(const FeatureMatrixD& h, const FeatureMatrixD& w, bool parallel = true);

// GCN normalization degree: |{i} union N(i)|.
uint32_t gcn_degree(const Graph& g, VertexId v);

}  // namespace gnnie::golden
