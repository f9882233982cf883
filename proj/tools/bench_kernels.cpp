#include <chrono>
#include <cstdio>
#include <functional>

#include "coed/kernels.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_of(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) fn();
    return std::chrono::duration<double>(Clock::now() - t0).count() / reps;
}

}  // namespace

int main() {
    using namespace coed;

    std::printf("%-28s %12s %12s %8s\n", "kernel", "serial s", "parallel s", "speedup");

    Rng rng(7);
    for (int n : {128, 256, 512}) {
        Mat a(n, n), b(n, n), c;
        for (auto& v : a.d) v = rng.normal();
        for (auto& v : b.d) v = rng.normal();
        double ts = time_of([&] { kernels::gemm_nn_serial(a, b, c); }, 3);
        double tp = time_of([&] { kernels::gemm_nn(a, b, c); }, 3);
        char name[64];
        std::snprintf(name, sizeof(name), "gemm_nn %dx%d", n, n);
        std::printf("%-28s %12.6f %12.6f %8.2fx\n", name, ts, tp, ts / tp);
    }

    for (int n : {1000, 5000, 20000}) {
        FuzzyDiGraph g = random_fuzzy_graph(n, std::min(0.5, 10.0 / n), 11);
        auto plan = kernels::GatherPlan::build(g);
        int d = 32;
        Mat f(n, d), m_in, m_out;
        for (auto& v : f.d) v = rng.normal();
        std::vector<double> cth(plan.n_edges), sth(plan.n_edges), r_in(n, 1.0), r_out(n, 1.0);
        for (int e = 0; e < plan.n_edges; ++e) {
            cth[e] = std::cos(g.edges()[e].theta);
            sth[e] = std::sin(g.edges()[e].theta);
        }
        double ts = time_of(
            [&] {
                kernels::fuzzy_gather_serial(plan, cth.data(), sth.data(), r_in.data(),
                                             r_out.data(), f, m_in, m_out);
            },
            5);
        double tp = time_of(
            [&] {
                kernels::fuzzy_gather(plan, cth.data(), sth.data(), r_in.data(), r_out.data(), f,
                                      m_in, m_out);
            },
            5);
        char name[64];
        std::snprintf(name, sizeof(name), "fuzzy_gather n=%d d=%d", n, d);
        std::printf("%-28s %12.6f %12.6f %8.2fx\n", name, ts, tp, ts / tp);
    }
    return 0;
}
