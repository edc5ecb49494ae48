#include "gnnie/golden.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gnnie::golden {

static void check_shapes(const FeatureMatrixD& h, const LayerSpec& spec) {
    if (h.cols != spec.f_in) throw std::invalid_argument("golden: H width != f_in");
}

FeatureMatrixD matmul(const FeatureMatrixD& h, const FeatureMatrixD& w, bool parallel) {
    if (h.cols != w.rows) throw std::invalid_argument("golden: matmul shape mismatch");
    FeatureMatrixD out(h.rows, w.cols);
    int64_t rows = h.rows;
#pragma omp parallel for schedule(static) if (parallel)
    for (int64_t v = 0; v < rows; ++v) {
        auto hrow = h.row(static_cast<uint32_t>(v));
        auto orow = out.row(static_cast<uint32_t>(v));
        for (uint32_t e = 0; e < h.cols; ++e) {
            double x = hrow[e];
            if (x == 0.0) continue;
            auto wrow = w.row(e);
            for (uint32_t c = 0; c < w.cols; ++c) orow[c] += x * wrow[c];
        }
    }
    return out;
}

uint32_t gcn_degree(const Graph& g, VertexId v) {
    return g.degree(v) + (g.has_self_loop(v) ? 0 : 1);
}

FeatureMatrixD gcn_layer(const Graph& g, const FeatureMatrixD& h, const LayerSpec& spec,
                         bool parallel) {
    check_shapes(h, spec);
    FeatureMatrixD hw = matmul(h, spec.weight, parallel);
    FeatureMatrixD out(h.rows, spec.f_out);
    int64_t n = g.num_vertices;
#pragma omp parallel for schedule(static) if (parallel)
    for (int64_t iv = 0; iv < n; ++iv) {
        auto i = static_cast<VertexId>(iv);
        double di = gcn_degree(g, i);
        auto orow = out.row(i);
        for (VertexId j : g.neighbors(i)) {
            double c = 1.0 / std::sqrt(di * gcn_degree(g, j));
            auto jrow = hw.row(j);
            for (uint32_t k = 0; k < spec.f_out; ++k) orow[k] += c * jrow[k];
        }
        if (!g.has_self_loop(i)) {
            double c = 1.0 / di;
            auto irow = hw.row(i);
            for (uint32_t k = 0; k < spec.f_out; ++k) orow[k] += c * irow[k];
        }
        apply_activation(orow, spec.activation);
    }
    return out;
}

FeatureMatrixD sage_layer(const Graph& g, const FeatureMatrixD& h, const LayerSpec& spec,
                          SampleStream& stream, bool parallel) {
    check_shapes(h, spec);
    FeatureMatrixD hw = matmul(h, spec.weight, parallel);
    // Sampling consumes the shared stream sequentially; done serially so the
    // draws are independent of the thread schedule.
    auto samples = sample_all_neighbors(g, spec.sample_size, stream);
    FeatureMatrixD out(h.rows, spec.f_out);
    int64_t n = g.num_vertices;
#pragma omp parallel for schedule(static) if (parallel)
    for (int64_t iv = 0; iv < n; ++iv) {
        auto i = static_cast<VertexId>(iv);
        auto orow = out.row(i);
        auto irow = hw.row(i);
        // {i} union S_N(i): start from the self member, skip i if sampled.
        std::copy(irow.begin(), irow.end(), orow.begin());
        uint32_t members = 1;
        for (VertexId j : samples[i]) {
            if (j == i) continue;
            auto jrow = hw.row(j);
            switch (spec.aggregator) {
                case Aggregator::sum:
                case Aggregator::mean:
                    for (uint32_t k = 0; k < spec.f_out; ++k) orow[k] += jrow[k];
                    break;
                case Aggregator::max:
                    for (uint32_t k = 0; k < spec.f_out; ++k)
                        orow[k] = std::max(orow[k], jrow[k]);
                    break;
            }
            ++members;
        }
        if (spec.aggregator == Aggregator::mean)
            for (uint32_t k = 0; k < spec.f_out; ++k) orow[k] /= members;
        apply_activation(orow, spec.activation);
    }
    return out;
}

FeatureMatrixD gat_layer(const Graph& g, const FeatureMatrixD& h, const LayerSpec& spec,
                         bool parallel) {
    check_shapes(h, spec);
    FeatureMatrixD eta = matmul(h, spec.weight, parallel);
    int64_t n = g.num_vertices;
    std::vector<double> e1(n), e2(n);
#pragma omp parallel for schedule(static) if (parallel)
    for (int64_t iv = 0; iv < n; ++iv) {
        auto row = eta.row(static_cast<uint32_t>(iv));
        double s1 = 0, s2 = 0;
        for (uint32_t k = 0; k < spec.f_out; ++k) {
            s1 += spec.attn_src[k] * row[k];
            s2 += spec.attn_dst[k] * row[k];
        }
        e1[iv] = s1;
        e2[iv] = s2;
    }

    auto leaky = [&](double x) { return x >= 0 ? x : spec.leaky_slope * x; };
    FeatureMatrixD out(h.rows, spec.f_out);
#pragma omp parallel for schedule(static) if (parallel)
    for (int64_t iv = 0; iv < n; ++iv) {
        auto i = static_cast<VertexId>(iv);
        bool self_in_nb = g.has_self_loop(i);
        // Stabilized softmax over {i} union N(i).
        double m = leaky(e1[i] + e2[i]);
        for (VertexId j : g.neighbors(i)) m = std::max(m, leaky(e1[i] + e2[j]));
        double denom = 0;
        auto orow = out.row(i);
        for (VertexId j : g.neighbors(i)) {
            double w = std::exp(leaky(e1[i] + e2[j]) - m);
            denom += w;
            auto jrow = eta.row(j);
            for (uint32_t k = 0; k < spec.f_out; ++k) orow[k] += w * jrow[k];
        }
        if (!self_in_nb) {
            double w = std::exp(leaky(e1[i] + e2[i]) - m);
            denom += w;
            auto irow = eta.row(i);
            for (uint32_t k = 0; k < spec.f_out; ++k) orow[k] += w * irow[k];
        }
        for (uint32_t k = 0; k < spec.f_out; ++k) orow[k] /= denom;
        apply_activation(orow, spec.activation);
    }
    return out;
}

FeatureMatrixD gin_layer(const Graph& g, const FeatureMatrixD& h, const LayerSpec& spec,
                         bool parallel) {
    check_shapes(h, spec);
    FeatureMatrixD agg(h.rows, spec.f_in);
    int64_t n = g.num_vertices;
#pragma omp parallel for schedule(static) if (parallel)
    for (int64_t iv = 0; iv < n; ++iv) {
        auto i = static_cast<VertexId>(iv);
        auto arow = agg.row(i);
        auto irow = h.row(i);
        double self_w = 1.0 + spec.epsilon;
        for (uint32_t k = 0; k < spec.f_in; ++k) arow[k] = self_w * irow[k];
        for (VertexId j : g.neighbors(i)) {
            auto jrow = h.row(j);
            for (uint32_t k = 0; k < spec.f_in; ++k) arow[k] += jrow[k];
        }
    }
    FeatureMatrixD hidden = matmul(agg, spec.mlp.w1, parallel);
#pragma omp parallel for schedule(static) if (parallel)
    for (int64_t iv = 0; iv < n; ++iv) {
        auto row = hidden.row(static_cast<uint32_t>(iv));
        for (uint32_t k = 0; k < hidden.cols; ++k) {
            row[k] += spec.mlp.b1[k];
            if (row[k] < 0) row[k] = 0;
        }
    }
    FeatureMatrixD out = matmul(hidden, spec.mlp.w2, parallel);
#pragma omp parallel for schedule(static) if (parallel)
    for (int64_t iv = 0; iv < n; ++iv) {
        auto row = out.row(static_cast<uint32_t>(iv));
        for (uint32_t k = 0; k < out.cols; ++k) row[k] += spec.mlp.b2[k];
    }
    return out;
}

FeatureMatrixD run_layer(const Graph& g, const FeatureMatrixD& h, const LayerSpec& spec,
                         SampleStream* stream, bool parallel) {
    switch (spec.kind) {
        case LayerKind::gcn: return gcn_layer(g, h, spec, parallel);
        case LayerKind::graphsage:
            if (!stream) throw std::invalid_argument("golden: GraphSAGE needs a sample stream");
            return sage_layer(g, h, spec, *stream, parallel);
        case LayerKind::gat: return gat_layer(g, h, spec, parallel);
        case LayerKind::ginconv: return gin_layer(g, h, spec, parallel);
    }
    throw std::logic_error("golden: bad layer kind");
}

std::vector<double> graph_readout(std::span<const FeatureMatrixD> per_layer) {
    if (per_layer.empty()) throw std::invalid_argument("graph_readout: empty input");
    std::vector<double> out;
    for (const auto& m : per_layer) {
        size_t base = out.size();
        out.resize(base + m.cols, 0.0);
        for (uint32_t r = 0; r < m.rows; ++r) {
            auto row = m.row(r);
            for (uint32_t c = 0; c < m.cols; ++c) out[base + c] += row[c];
        }
    }
    return out;
}

}  // namespace gnnie::golden
