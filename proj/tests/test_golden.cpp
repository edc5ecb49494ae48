#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "gnnie/golden.hpp"
#include "testutil.hpp"

using namespace gnnie;
using namespace testutil;

namespace {

LayerSpec identity_gcn(uint32_t f) {
    LayerSpec s;
    s.kind = LayerKind::gcn;
    s.f_in = s.f_out = f;
    s.weight = FeatureMatrixD(f, f);
    for (uint32_t i = 0; i < f; ++i) s.weight.at(i, i) = 1.0;
    return s;
}

double max_err(const FeatureMatrixD& a, const FeatureMatrixD& b) {
    double worst = 0;
    for (size_t i = 0; i < a.data.size(); ++i)
        worst = std::max(worst, rel_err(a.data[i], b.data[i]));
    return worst;
}

}  // namespace

TEST_CASE("gcn isolated vertex with identity weight") {
    Graph g = build_csr(std::vector<std::pair<VertexId, VertexId>>{}, 1, true);
    FeatureMatrixD h(1, 2);
    h.at(0, 0) = 1.0;
    auto out = golden::gcn_layer(g, h, identity_gcn(2));
    CHECK(out.at(0, 0) == doctest::Approx(1.0));
    CHECK(out.at(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("gcn K2 symmetry") {
    std::vector<std::pair<VertexId, VertexId>> e = {{0, 1}};
    Graph g = build_csr(e, 2, true);
    auto spec = make_layer_spec(LayerKind::gcn, 4, 3, 5);
    FeatureMatrixD h(2, 4);
    for (uint32_t c = 0; c < 4; ++c) h.at(0, c) = h.at(1, c) = 0.3 * (c + 1);
    auto out = golden::gcn_layer(g, h, spec);
    for (uint32_t c = 0; c < 3; ++c) CHECK(out.at(0, c) == out.at(1, c));
}

TEST_CASE("gcn matches the dense normalized-adjacency oracle") {
    Graph g = random_test_graph(1, 77);
    auto spec = make_layer_spec(LayerKind::gcn, 6, 5, 3);
    auto h = random_features_d(g.num_vertices, 6, 8);
    auto ours = golden::gcn_layer(g, h, spec);
    auto oracle = dense_gcn(g, h, spec);
    CHECK(max_err(ours, oracle) < 1e-12);
}

TEST_CASE("gcn permutation equivariance") {
    Graph g = generate_power_law(20, 2, 9);
    auto spec = make_layer_spec(LayerKind::gcn, 5, 4, 11);
    auto h = random_features_d(20, 5, 12);
    auto base = golden::gcn_layer(g, h, spec);

    // Relabel i -> (i + 7) mod n.
    uint32_t n = g.num_vertices;
    std::vector<std::pair<VertexId, VertexId>> edges;
    for (VertexId u = 0; u < n; ++u)
        for (VertexId v : g.neighbors(u))
            if (v >= u) edges.push_back({(u + 7) % n, (v + 7) % n});
    Graph gp = build_csr(edges, n, true);
    FeatureMatrixD hp(n, 5);
    for (VertexId v = 0; v < n; ++v)
        for (uint32_t c = 0; c < 5; ++c) hp.at((v + 7) % n, c) = h.at(v, c);
    auto perm = golden::gcn_layer(gp, hp, spec);
    for (VertexId v = 0; v < n; ++v)
        for (uint32_t c = 0; c < 4; ++c)
            CHECK(perm.at((v + 7) % n, c) == doctest::Approx(base.at(v, c)).epsilon(1e-12));
}

TEST_CASE("gat isolated vertex reduces to sigma(eta)") {
    Graph g = build_csr(std::vector<std::pair<VertexId, VertexId>>{}, 1, true);
    auto spec = make_layer_spec(LayerKind::gat, 3, 3, 2);
    auto h = random_features_d(1, 3, 4);
    auto out = golden::gat_layer(g, h, spec);
    auto eta = golden::matmul(h, spec.weight);
    for (uint32_t c = 0; c < 3; ++c)
        CHECK(out.at(0, c) == doctest::Approx(std::max(0.0, eta.at(0, c))));
}

TEST_CASE("gat K2 hand-computed attention") {
    // F=1, W=[1], a=[1,1], h=(2),(3): e_12 = LeakyReLU(2+3) = 5.
    std::vector<std::pair<VertexId, VertexId>> e = {{0, 1}};
    Graph g = build_csr(e, 2, true);
    LayerSpec spec;
    spec.kind = LayerKind::gat;
    spec.f_in = spec.f_out = 1;
    spec.weight = FeatureMatrixD(1, 1);
    spec.weight.at(0, 0) = 1.0;
    spec.attn_src = {1.0};
    spec.attn_dst = {1.0};
    spec.activation = Activation::none;
    FeatureMatrixD h(2, 1);
    h.at(0, 0) = 2.0;
    h.at(1, 0) = 3.0;
    auto out = golden::gat_layer(g, h, spec);
    double e11 = 4.0, e12 = 5.0;
    double expect0 =
        (std::exp(e11) * 2.0 + std::exp(e12) * 3.0) / (std::exp(e11) + std::exp(e12));
    CHECK(out.at(0, 0) == doctest::Approx(expect0).epsilon(1e-12));
}

TEST_CASE("gat matches the naive concatenated-product oracle") {
    for (uint32_t idx : {0u, 1u, 2u, 3u}) {
        Graph g = random_test_graph(idx, 31);
        auto spec = make_layer_spec(LayerKind::gat, 7, 6, 100 + idx);
        auto h = random_features_d(g.num_vertices, 7, 200 + idx);
        auto ours = golden::gat_layer(g, h, spec);
        auto oracle = dense_gat(g, h, spec);
        CHECK(max_err(ours, oracle) < 1e-9);
    }
}

TEST_CASE("gat attention rows sum to one") {
    // Row sums of attention are checked through a constant-eta construction:
    // with W mapping every vertex to the same eta, the output must equal
    // sigma(eta) exactly when coefficients sum to 1.
    Graph g = generate_power_law(30, 2, 4);
    auto spec = make_layer_spec(LayerKind::gat, 3, 4, 8);
    FeatureMatrixD h(30, 3);
    for (uint32_t v = 0; v < 30; ++v)
        for (uint32_t c = 0; c < 3; ++c) h.at(v, c) = 0.5 * (c + 1);
    auto out = golden::gat_layer(g, h, spec);
    auto eta = golden::matmul(h, spec.weight);
    for (uint32_t v = 0; v < 30; ++v)
        for (uint32_t c = 0; c < 4; ++c)
            CHECK(std::abs(out.at(v, c) - std::max(0.0, eta.at(v, c))) < 1e-6);
}

TEST_CASE("sage sampling: fewer neighbors than sample size") {
    std::vector<std::pair<VertexId, VertexId>> e = {{0, 1}};
    Graph g = build_csr(e, 2, true);
    auto stream = SampleStream::pregenerate(5);
    auto s = sample_neighbors(g, 0, 25, stream);
    REQUIRE(s.size() == 1);
    CHECK(s[0] == 1);
}

TEST_CASE("sage max aggregator over identical neighbors") {
    std::vector<std::pair<VertexId, VertexId>> e = {{0, 1}, {0, 2}, {0, 3}};
    Graph g = build_csr(e, 4, true);
    auto spec = make_layer_spec(LayerKind::graphsage, 3, 2, 6, Aggregator::max);
    FeatureMatrixD h(4, 3);
    for (uint32_t v = 0; v < 4; ++v)
        for (uint32_t c = 0; c < 3; ++c) h.at(v, c) = 0.25 * (c + 1);
    auto stream = SampleStream::pregenerate(17);
    auto out = golden::sage_layer(g, h, spec, stream);
    auto eta = golden::matmul(h, spec.weight);
    for (uint32_t c = 0; c < 2; ++c)
        CHECK(out.at(0, c) == doctest::Approx(std::max(0.0, eta.at(0, c))));
}

TEST_CASE("sage deterministic replay") {
    Graph g = random_test_graph(0, 55);
    auto spec = make_layer_spec(LayerKind::graphsage, 4, 4, 2, Aggregator::mean,
                                Activation::relu, 2);
    auto h = random_features_d(g.num_vertices, 4, 3);
    auto s1 = SampleStream::pregenerate(123);
    auto s2 = SampleStream::pregenerate(123);
    auto a = golden::sage_layer(g, h, spec, s1);
    auto b = golden::sage_layer(g, h, spec, s2);
    CHECK(a.data == b.data);
}

TEST_CASE("sage sum with sample covering all neighbors equals unsampled sum") {
    Graph g = random_test_graph(3, 43);
    uint32_t max_deg = 0;
    for (uint32_t d : g.degrees) max_deg = std::max(max_deg, d);
    auto spec = make_layer_spec(LayerKind::graphsage, 5, 4, 77, Aggregator::sum,
                                Activation::relu, max_deg + 1);
    auto h = random_features_d(g.num_vertices, 5, 19);
    auto stream = SampleStream::pregenerate(7);
    auto out = golden::sage_layer(g, h, spec, stream);

    auto eta = golden::matmul(h, spec.weight);
    for (VertexId v = 0; v < g.num_vertices; ++v) {
        for (uint32_t c = 0; c < 4; ++c) {
            double sum = eta.at(v, c);
            for (VertexId j : g.neighbors(v))
                if (j != v) sum += eta.at(j, c);
            CHECK(out.at(v, c) == doctest::Approx(std::max(0.0, sum)).epsilon(1e-12));
        }
    }
}

TEST_CASE("gin epsilon edge cases") {
    Graph g = build_csr(std::vector<std::pair<VertexId, VertexId>>{}, 1, true);
    LayerSpec spec;
    spec.kind = LayerKind::ginconv;
    spec.f_in = spec.f_out = 2;
    spec.mlp.w1 = FeatureMatrixD(2, 2);
    spec.mlp.w2 = FeatureMatrixD(2, 2);
    spec.mlp.w1.at(0, 0) = spec.mlp.w1.at(1, 1) = 1.0;
    spec.mlp.w2.at(0, 0) = spec.mlp.w2.at(1, 1) = 1.0;
    spec.mlp.b1 = {0.0, 0.0};
    spec.mlp.b2 = {0.0, 0.0};
    FeatureMatrixD h(1, 2);
    h.at(0, 0) = -1.5;
    h.at(0, 1) = 2.0;

    spec.epsilon = 0.0;
    auto out = golden::gin_layer(g, h, spec);
    CHECK(out.at(0, 0) == 0.0);  // relu
    CHECK(out.at(0, 1) == 2.0);

    spec.epsilon = -1.0;
    out = golden::gin_layer(g, h, spec);
    CHECK(out.at(0, 0) == 0.0);
    CHECK(out.at(0, 1) == 0.0);
}

TEST_CASE("gin path graph matches the dense oracle") {
    std::vector<std::pair<VertexId, VertexId>> e = {{0, 1}, {1, 2}, {2, 3}, {3, 4}};
    Graph g = build_csr(e, 5, true);
    auto spec = make_layer_spec(LayerKind::ginconv, 4, 3, 14);
    auto h = random_features_d(5, 4, 15);
    auto ours = golden::gin_layer(g, h, spec);
    auto oracle = dense_gin(g, h, spec);
    CHECK(max_err(ours, oracle) < 1e-12);
}

TEST_CASE("graph_readout") {
    FeatureMatrixD l1(2, 2);
    l1.at(0, 0) = 1;
    l1.at(0, 1) = 2;
    l1.at(1, 0) = 3;
    l1.at(1, 1) = 4;
    FeatureMatrixD l2(2, 3);
    std::vector<FeatureMatrixD> layers = {l1, l2};
    auto r = golden::graph_readout(layers);
    REQUIRE(r.size() == 5);
    CHECK(r[0] == 4.0);
    CHECK(r[1] == 6.0);
    CHECK(r[2] == 0.0);
    CHECK_THROWS(golden::graph_readout(std::span<const FeatureMatrixD>{}));
}

TEST_CASE("parallel kernels match the serial reference bit-for-bit") {
    Graph g = generate_power_law(300, 3, 21);
    auto h = random_features_d(300, 24, 22);
    for (LayerKind kind : {LayerKind::gcn, LayerKind::gat, LayerKind::ginconv}) {
        auto spec = make_layer_spec(kind, 24, 16, 23);
        auto serial = golden::run_layer(g, h, spec, nullptr, false);
        auto parallel = golden::run_layer(g, h, spec, nullptr, true);
        CHECK(serial.data == parallel.data);
    }
    auto spec = make_layer_spec(LayerKind::graphsage, 24, 16, 23, Aggregator::max);
    auto s1 = SampleStream::pregenerate(9);
    auto s2 = SampleStream::pregenerate(9);
    auto serial = golden::sage_layer(g, h, spec, s1, false);
    auto parallel = golden::sage_layer(g, h, spec, s2, true);
    CHECK(serial.data == parallel.data);
}

TEST_CASE("all kinds match dense oracles on random graphs up to 64 vertices") {
    for (uint32_t idx = 0; idx < 10; ++idx) {
        Graph g = random_test_graph(idx, 555);
        uint32_t f_in = 4 + idx;
        auto h = random_features_d(g.num_vertices, f_in, 600 + idx);
        auto gcn = make_layer_spec(LayerKind::gcn, f_in, 5, 700 + idx);
        CHECK(max_err(golden::gcn_layer(g, h, gcn), dense_gcn(g, h, gcn)) < 1e-5);
        auto gat = make_layer_spec(LayerKind::gat, f_in, 5, 800 + idx);
        CHECK(max_err(golden::gat_layer(g, h, gat), dense_gat(g, h, gat)) < 1e-5);
        auto gin = make_layer_spec(LayerKind::ginconv, f_in, 5, 900 + idx);
        CHECK(max_err(golden::gin_layer(g, h, gin), dense_gin(g, h, gin)) < 1e-5);
    }
}
