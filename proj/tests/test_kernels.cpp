#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "coed/kernels.hpp"
#include "coed/sparse.hpp"

using namespace coed;

namespace {

Mat random_mat(int r, int c, uint64_t seed) {
    Mat m(r, c);
    Rng rng(seed);
    for (auto& v : m.d) v = rng.normal();
    return m;
}

// Naive triple-loop oracle.
Mat gemm_oracle(const Mat& a, const Mat& b, bool ta, bool tb) {
    int m = ta ? a.cols : a.rows;
    int k = ta ? a.rows : a.cols;
    int n = tb ? b.rows : b.cols;
    Mat c(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p)
                acc += (ta ? a(p, i) : a(i, p)) * (tb ? b(j, p) : b(p, j));
            c(i, j) = acc;
        }
    return c;
}

bool bitwise_equal(const Mat& a, const Mat& b) {
    if (!a.same_shape(b)) return false;
    for (size_t k = 0; k < a.d.size(); ++k)
        if (a.d[k] != b.d[k]) return false;
    return true;
}

struct PhaseData {
    FuzzyDiGraph graph;
    kernels::GatherPlan plan;
    std::vector<double> c, s, r_in, r_out;
};

PhaseData make_phase_data(int n, uint64_t seed) {
    PhaseData pd{random_fuzzy_graph(n, 0.3, seed), {}, {}, {}, {}, {}};
    pd.plan = kernels::GatherPlan::build(pd.graph);
    for (const Edge& e : pd.graph.edges()) {
        pd.c.push_back(std::cos(e.theta));
        pd.s.push_back(std::sin(e.theta));
    }
    std::vector<double> d_in(n), d_out(n);
    kernels::fuzzy_degrees(pd.plan, pd.c.data(), pd.s.data(), d_in.data(), d_out.data());
    for (int i = 0; i < n; ++i) {
        pd.r_in.push_back(1.0 / std::sqrt(std::max(d_in[i], kDegreeEpsilon)));
        pd.r_out.push_back(1.0 / std::sqrt(std::max(d_out[i], kDegreeEpsilon)));
    }
    return pd;
}

}  // namespace

TEST_CASE("gemm variants match the naive oracle") {
    Mat a = random_mat(7, 5, 1), b = random_mat(5, 9, 2);
    Mat c(7, 9);
    kernels::gemm_nn(a, b, c);
    Mat want = gemm_oracle(a, b, false, false);
    for (size_t k = 0; k < c.d.size(); ++k) CHECK(c.d[k] == doctest::Approx(want.d[k]));

    Mat bt = random_mat(9, 5, 3);
    Mat c2(7, 9);
    kernels::gemm_nt(a, bt, c2);
    want = gemm_oracle(a, bt, false, true);
    for (size_t k = 0; k < c2.d.size(); ++k) CHECK(c2.d[k] == doctest::Approx(want.d[k]));

    Mat at = random_mat(5, 7, 4);
    Mat c3(7, 9);
    kernels::gemm_tn(at, b, c3);
    want = gemm_oracle(at, b, true, false);
    for (size_t k = 0; k < c3.d.size(); ++k) CHECK(c3.d[k] == doctest::Approx(want.d[k]));
}

TEST_CASE("parallel gemm is bitwise identical to the serial reference") {
    Mat a = random_mat(33, 17, 5), b = random_mat(17, 29, 6);
    Mat cp(33, 29), cs(33, 29);
    kernels::gemm_nn(a, b, cp);
    kernels::gemm_nn_serial(a, b, cs);
    CHECK(bitwise_equal(cp, cs));

    Mat bt = random_mat(29, 17, 7);
    kernels::gemm_nt(a, bt, cp);
    kernels::gemm_nt_serial(a, bt, cs);
    CHECK(bitwise_equal(cp, cs));

    Mat at = random_mat(17, 33, 8);
    kernels::gemm_tn(at, b, cp);
    kernels::gemm_tn_serial(at, b, cs);
    CHECK(bitwise_equal(cp, cs));
}

TEST_CASE("fuzzy_degrees matches dense Laplacian row sums") {
    PhaseData pd = make_phase_data(19, 11);
    auto dense = build_fuzzy_laplacian(pd.graph).matrix.to_dense();
    int n = pd.graph.n_nodes();
    std::vector<double> d_in(n), d_out(n);
    kernels::fuzzy_degrees(pd.plan, pd.c.data(), pd.s.data(), d_in.data(), d_out.data());
    for (int i = 0; i < n; ++i) {
        double want_in = 0.0, want_out = 0.0;
        for (int j = 0; j < n; ++j) {
            want_in += dense[i][j].real();
            want_out += dense[i][j].imag();
        }
        CHECK(d_in[i] == doctest::Approx(want_in).epsilon(1e-12));
        CHECK(d_out[i] == doctest::Approx(want_out).epsilon(1e-12));
    }
}

TEST_CASE("fuzzy_gather equals dense propagation matrix products") {
    PhaseData pd = make_phase_data(21, 12);
    int n = pd.graph.n_nodes();
    Mat f = random_mat(n, 6, 13);
    Mat m_in(n, 6), m_out(n, 6);
    kernels::fuzzy_gather(pd.plan, pd.c.data(), pd.s.data(), pd.r_in.data(), pd.r_out.data(), f,
                          m_in, m_out);

    PropagationPair pair = propagation_matrices(build_fuzzy_laplacian(pd.graph));
    auto p_in = pair.p_in.to_dense();
    auto p_out = pair.p_out.to_dense();
    for (int i = 0; i < n; ++i)
        for (int col = 0; col < 6; ++col) {
            double want_in = 0.0, want_out = 0.0;
            for (int j = 0; j < n; ++j) {
                want_in += p_in[i][j] * f(j, col);
                want_out += p_out[i][j] * f(j, col);
            }
            CHECK(m_in(i, col) == doctest::Approx(want_in).epsilon(1e-12));
            CHECK(m_out(i, col) == doctest::Approx(want_out).epsilon(1e-12));
        }
}

TEST_CASE("parallel fuzzy_gather is bitwise identical to the serial reference") {
    PhaseData pd = make_phase_data(40, 14);
    int n = pd.graph.n_nodes();
    Mat f = random_mat(n, 8, 15);
    Mat ap(n, 8), bp(n, 8), as(n, 8), bs(n, 8);
    kernels::fuzzy_gather(pd.plan, pd.c.data(), pd.s.data(), pd.r_in.data(), pd.r_out.data(), f,
                          ap, bp);
    kernels::fuzzy_gather_serial(pd.plan, pd.c.data(), pd.s.data(), pd.r_in.data(),
                                 pd.r_out.data(), f, as, bs);
    CHECK(bitwise_equal(ap, as));
    CHECK(bitwise_equal(bp, bs));
}

TEST_CASE("gather plan covers each edge from both endpoints") {
    PhaseData pd = make_phase_data(12, 16);
    std::vector<int> seen(pd.plan.n_edges, 0);
    for (int node = 0; node < pd.plan.n_nodes; ++node)
        for (int k = pd.plan.node_ptr[node]; k < pd.plan.node_ptr[node + 1]; ++k) {
            const auto& inc = pd.plan.incident[k];
            seen[inc.edge]++;
            auto [i, j] = pd.plan.edge_endpoints[inc.edge];
            CHECK((inc.fwd ? i : j) == node);
            CHECK((inc.fwd ? j : i) == inc.nbr);
        }
    for (int e = 0; e < pd.plan.n_edges; ++e) CHECK(seen[e] == 2);
}
