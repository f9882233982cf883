#pragma once

#include <complex>

#include "coed/graph.hpp"

namespace coed {

// Compressed-row sparse matrix with sorted column indices inside each row.
// Sorted order makes accumulation order, and therefore gradients and hashes,
// reproducible.
template <typename T>
struct Csr {
    int n = 0;
    std::vector<int> row_ptr;  // size n + 1
    std::vector<int> col;
    std::vector<T> val;

    Csr() = default;
    explicit Csr(int n_) : n(n_), row_ptr(n_ + 1, 0) {}

    int nnz() const { return static_cast<int>(col.size()); }

    std::vector<std::vector<T>> to_dense() const {
        std::vector<std::vector<T>> m(n, std::vector<T>(n, T{}));
        for (int i = 0; i < n; ++i)
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) m[i][col[k]] = val[k];
        return m;
    }
};

using CsrC = Csr<std::complex<double>>;
using CsrD = Csr<double>;

template <typename T>
Csr<T> csr_from_triplets(int n, std::vector<std::tuple<int, int, T>> triplets);

struct FuzzyLaplacian {
    CsrC matrix;  // zero diagonal; (i,j) entry exp(i*theta_ij), |entry| = 1

    int dim() const { return matrix.n; }
    // Largest entrywise violation of L = i * L^dagger.
    double identity_residual() const;
};

FuzzyLaplacian build_fuzzy_laplacian(const FuzzyDiGraph& graph);

struct PropagationPair {
    CsrD p_in;               // D_in^{-1/2} A_in D_out^{-1/2}
    CsrD p_out;              // D_out^{-1/2} A_out D_in^{-1/2}
    std::vector<double> d_in;
    std::vector<double> d_out;
    double epsilon;
};

inline constexpr double kDegreeEpsilon = 1e-12;

PropagationPair propagation_matrices(const FuzzyLaplacian& laplacian,
                                     double epsilon = kDegreeEpsilon);

struct MagneticLaplacian {
    CsrC matrix;  // Hermitian, zero diagonal

    int dim() const { return matrix.n; }
    double hermitian_residual() const;
};

// Fuzzy-edge variant: entry angle solves ln(mu_ij / mu_ji) = tan(2*theta~).
// Boundary angles {0, pi/2} give an infinite log-ratio and are rejected.
MagneticLaplacian build_magnetic_laplacian(const FuzzyDiGraph& graph);

// Classic binary-edge variant H^(q) = S .* exp(i * 2*pi*q*(A - A^T)) built
// from a fuzzy graph whose angles are restricted to {0, pi/4, pi/2}.
// theta = 0 on canonical edge (i, j) means node j sends to node i.
MagneticLaplacian build_magnetic_laplacian_binary(const FuzzyDiGraph& graph, double q);

// Magnetic angle for one edge of the fuzzy variant.
double magnetic_angle(double theta);

}  // namespace coed
