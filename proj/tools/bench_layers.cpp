// Benchmark: serial vs OpenMP golden layer kernels on a synthetic power-law
// graph, plus the weighting engine's functional kernel. The serial path is
// the reference; outputs must match bit-for-bit.

#include <chrono>
#include <cstdio>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gnnie/golden.hpp"
#include "gnnie/sim.hpp"

using namespace gnnie;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
    double best = 1e30;
    for (int i = 0; i < reps; ++i) {
        auto t0 = Clock::now();
        fn();
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

bool bit_equal(const FeatureMatrixD& a, const FeatureMatrixD& b) {
    return a.rows == b.rows && a.cols == b.cols &&
           std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0;
}

}  // namespace

int main(int argc, char** argv) {
    uint32_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 10000;
    uint32_t f_in = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 256;
    uint32_t f_out = 128;
    int reps = argc > 3 ? std::atoi(argv[3]) : 3;

    Graph g = generate_power_law(n, 4, 42);
    SyntheticFeatureParams fp;
    FeatureMatrix h = synth_features_bimodal(n, f_in, fp, 42);
    FeatureMatrixD hd = widen(h);

#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#endif
    std::printf("graph: %u vertices, %llu edges, features %ux%u -> %u\n", n,
                static_cast<unsigned long long>(g.num_undirected_edges()), n, f_in, f_out);
    std::printf("%-10s %12s %12s %9s %s\n", "kernel", "serial_s", "openmp_s", "speedup",
                "match");

    const LayerKind kinds[] = {LayerKind::gcn, LayerKind::gat, LayerKind::graphsage,
                               LayerKind::ginconv};
    for (LayerKind kind : kinds) {
        auto spec = make_layer_spec(kind, f_in, f_out, 7,
                                    kind == LayerKind::graphsage ? Aggregator::max
                                                                 : Aggregator::sum);
        FeatureMatrixD ref, par;
        auto run = [&](bool parallel) {
            if (kind == LayerKind::graphsage) {
                auto stream = SampleStream::pregenerate(99);
                return golden::sage_layer(g, hd, spec, stream, parallel);
            }
            return golden::run_layer(g, hd, spec, nullptr, parallel);
        };
        double ts = time_best_of(reps, [&] { ref = run(false); });
        double tp = time_best_of(reps, [&] { par = run(true); });
        std::printf("%-10s %12.4f %12.4f %8.2fx %s\n", to_string(kind), ts, tp,
                    ts / tp, bit_equal(ref, par) ? "exact" : "MISMATCH");
        if (!bit_equal(ref, par)) return 1;
    }
    return 0;
}
