#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>

#include "coed/spectral.hpp"

using namespace coed;
using cplx = std::complex<double>;

namespace {

Eigen::MatrixXcd dense_laplacian(const FuzzyDiGraph& g) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(g.n_nodes(), g.n_nodes());
    for (const Edge& e : g.edges()) {
        m(e.i, e.j) = std::polar(1.0, e.theta);
        m(e.j, e.i) = std::polar(1.0, kHalfPi - e.theta);
    }
    return m;
}

}  // namespace

TEST_CASE("two-node graph has the closed-form spectrum") {
    // L = [[0, e^{i a}], [e^{i(pi/2-a)}, 0]]; eigenvalues are the two square
    // roots of e^{i pi/2} = i, i.e. ±(1+i)/√2, independent of a.
    for (double a : {0.0, 0.3, kQuarterPi, 1.2}) {
        FuzzyDiGraph g(2, {{0, 1, a}});
        SpectralDecomposition dec = eigendecompose(build_fuzzy_laplacian(g));
        cplx root = std::sqrt(cplx(0.0, 1.0));
        REQUIRE(dec.eigenvalues.size() == 2);
        double direct = std::abs(dec.eigenvalues[0] - root) + std::abs(dec.eigenvalues[1] + root);
        double swapped = std::abs(dec.eigenvalues[0] + root) + std::abs(dec.eigenvalues[1] - root);
        CHECK(std::min(direct, swapped) < 1e-12);
    }
}

TEST_CASE("eigenvalues have the a+ia form and vectors are unitary") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        FuzzyDiGraph g = random_fuzzy_graph(6 + static_cast<int>(seed * 3), 0.3, 100 + seed);
        SpectralDecomposition dec = eigendecompose(build_fuzzy_laplacian(g));
        for (cplx lam : dec.eigenvalues) CHECK(std::abs(lam.real() - lam.imag()) < 1e-9);
        Eigen::MatrixXcd gram = dec.eigenvectors.adjoint() * dec.eigenvectors;
        CHECK((gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <
              1e-8);
        CHECK(dec.residual < 1e-8);
        // Ordering by descending magnitude.
        for (size_t k = 1; k < dec.eigenvalues.size(); ++k)
            CHECK(std::abs(dec.eigenvalues[k - 1]) >= std::abs(dec.eigenvalues[k]) - 1e-12);
    }
}

TEST_CASE("spectrum matches a general complex eigensolver as a set") {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        FuzzyDiGraph g = random_fuzzy_graph(14, 0.35, 200 + seed);
        SpectralDecomposition dec = eigendecompose(build_fuzzy_laplacian(g));
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(dense_laplacian(g));
        std::vector<cplx> want(solver.eigenvalues().data(),
                               solver.eigenvalues().data() + g.n_nodes());
        // Greedy set matching.
        for (cplx lam : dec.eigenvalues) {
            auto best = std::min_element(want.begin(), want.end(), [&](cplx a, cplx b) {
                return std::abs(a - lam) < std::abs(b - lam);
            });
            REQUIRE(best != want.end());
            CHECK(std::abs(*best - lam) < 1e-9);
            want.erase(best);
        }
    }
}

TEST_CASE("eigenvector gauge makes decompositions reproducible") {
    FuzzyDiGraph g = random_fuzzy_graph(12, 0.4, 300);
    SpectralDecomposition a = eigendecompose(build_fuzzy_laplacian(g));
    SpectralDecomposition b = eigendecompose(build_fuzzy_laplacian(g));
    CHECK((a.eigenvectors - b.eigenvectors).cwiseAbs().maxCoeff() == 0.0);
    // Largest component of each column is real and positive.
    for (int k = 0; k < a.eigenvectors.cols(); ++k) {
        int arg = 0;
        a.eigenvectors.col(k).cwiseAbs().maxCoeff(&arg);
        cplx pivot = a.eigenvectors(arg, k);
        CHECK(std::abs(pivot.imag()) < 1e-12);
        CHECK(pivot.real() > 0.0);
    }
}

TEST_CASE("positional encoding keeps the leading k orthonormal columns") {
    FuzzyDiGraph g = random_fuzzy_graph(15, 0.3, 301);
    PositionalEncoding enc = positional_encoding(build_fuzzy_laplacian(g), 4);
    CHECK(enc.k == 4);
    CHECK(enc.matrix.cols() == 4);
    Eigen::MatrixXcd gram = enc.matrix.adjoint() * enc.matrix;
    CHECK((gram - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("dirichlet energy closed forms") {
    FuzzyDiGraph pair(2, {{0, 1, kQuarterPi}});
    Mat f(2, 1);
    f(1, 0) = 1.0;
    CHECK(dirichlet_energy(f, pair) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    Mat flat(2, 1);
    flat.fill(3.5);
    CHECK(dirichlet_energy(flat, pair) == 0.0);

    // Translation invariance on a bigger graph.
    FuzzyDiGraph g = random_fuzzy_graph(10, 0.4, 302);
    Mat a(10, 3);
    Rng rng(303);
    for (auto& v : a.d) v = rng.normal();
    Mat shifted = a;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 3; ++j) shifted(i, j) += 7.25;
    CHECK(dirichlet_energy(a, g) == doctest::Approx(dirichlet_energy(shifted, g)).epsilon(1e-12));

    Mat wrong(3, 1);
    CHECK_THROWS_AS(dirichlet_energy(wrong, pair), ConfigError);
}
