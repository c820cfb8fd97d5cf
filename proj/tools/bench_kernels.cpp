// Compares the serial reference kernels against the OpenMP paths on a
// synthetic workload and checks they agree.

#include <chrono>
#include <cstdlib>
#include <iostream>

#include "labelaudit/dataset.hpp"
#include "labelaudit/detector.hpp"
#include "labelaudit/gradients.hpp"
#include "labelaudit/model.hpp"

using namespace labelaudit;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0)
        .count();
}

} // namespace

int main(int argc, char** argv) {
    int threads = argc > 1 ? std::atoi(argv[1]) : 4;
    std::size_t n = argc > 2 ? static_cast<std::size_t>(std::atoll(argv[2]))
                             : 4000;

    SynthSpec spec{8, 64, n / 8, 5.0, 1.0, 1};
    const Dataset d = generate_synthetic(spec);
    auto [audited, aux] = split_aux(d, 1000, 2);

    std::cout << "n=" << audited.size() << " m=" << aux.size()
              << " dim=" << d.dim << " threads=" << threads << "\n";

    // kNN: serial full-sort reference vs heap kernel, 1 thread vs `threads`.
    const std::size_t k = 100;
    auto t0 = Clock::now();
    std::vector<NeighborSet> ref(audited.size());
    for (std::size_t i = 0; i < audited.size(); ++i)
        ref[i] = knn_serial_reference(audited.row(i), aux.data.features,
                                      aux.data.labels, aux.data.ids, d.dim, k,
                                      SimilarityMeasure::cos, audited.ids[i]);
    const double t_ref = ms_since(t0);

    t0 = Clock::now();
    auto serial = knn_all(audited.features, audited.size(), aux.data.features,
                          aux.data.labels, aux.data.ids, d.dim, k,
                          SimilarityMeasure::cos, audited.ids, 1);
    const double t_serial = ms_since(t0);

    t0 = Clock::now();
    auto parallel = knn_all(audited.features, audited.size(),
                            aux.data.features, aux.data.labels, aux.data.ids,
                            d.dim, k, SimilarityMeasure::cos, audited.ids,
                            threads);
    const double t_parallel = ms_since(t0);

    for (std::size_t i = 0; i < audited.size(); ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (ref[i].neighbors[j].aux_id != serial[i].neighbors[j].aux_id ||
                serial[i].neighbors[j].aux_id !=
                    parallel[i].neighbors[j].aux_id) {
                std::cerr << "kernel mismatch at query " << i << "\n";
                return 1;
            }

    std::cout << "knn full-sort reference: " << t_ref << " ms\n"
              << "knn heap kernel (1 thread): " << t_serial << " ms\n"
              << "knn heap kernel (" << threads << " threads): " << t_parallel
              << " ms, speedup x" << t_serial / t_parallel << "\n";

    // Pairwise gradient aggregation, serial vs parallel.
    ModelCheckpoint m;
    m.input_dim = d.dim;
    m.num_classes = d.num_classes;
    m.head_w.assign(d.num_classes * d.dim, 0.01);
    m.head_b.assign(d.num_classes, 0.0);
    const auto tg = last_layer_gradients(m, audited, threads);
    const auto ag = last_layer_gradients(m, aux.data, threads);

    t0 = Clock::now();
    const auto s1 = aggregate_influence(tg, ag, InfluenceMethod::GD, 1);
    const double t_gd1 = ms_since(t0);
    t0 = Clock::now();
    const auto sp = aggregate_influence(tg, ag, InfluenceMethod::GD, threads);
    const double t_gdp = ms_since(t0);

    for (std::size_t i = 0; i < s1.entries.size(); ++i)
        if (s1.entries[i].id != sp.entries[i].id ||
            s1.entries[i].score != sp.entries[i].score) {
            std::cerr << "gd aggregation mismatch at rank " << i << "\n";
            return 1;
        }

    std::cout << "gd aggregation (1 thread): " << t_gd1 << " ms\n"
              << "gd aggregation (" << threads << " threads): " << t_gdp
              << " ms, speedup x" << t_gd1 / t_gdp << "\n"
              << "all kernels agree\n";
    return 0;
}
