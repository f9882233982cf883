#pragma once

#include <Eigen/Dense>

#include "coed/sparse.hpp"

namespace coed {

// Full eigenstructure of L_F. Eigenvalues come sorted by descending |λ| with
// ties broken by the ascending index of the first maximal-magnitude component
// of the (gauge-fixed) eigenvector; every eigenvector is scaled so its
// largest-magnitude component is real and positive.
struct SpectralDecomposition {
    std::vector<std::complex<double>> eigenvalues;
    Eigen::MatrixXcd eigenvectors;  // column k pairs with eigenvalues[k]
    double residual = 0.0;          // max |L v - λ v|
};

// Solves via the Hermitian reduction M = e^{-iπ/4} L_F (M† = M follows from
// L_F = i L_F†), then maps back with λ = e^{iπ/4} λ_M. Throws NumericError
// with diagnostics when the residual exceeds the tolerance.
SpectralDecomposition eigendecompose(const FuzzyLaplacian& laplacian, double tolerance = 1e-8);

struct PositionalEncoding {
    Eigen::MatrixXcd matrix;  // N x k
    int k = 0;
};

// Top-k eigenvectors by |λ| under the ordering above.
PositionalEncoding positional_encoding(const FuzzyLaplacian& laplacian, int k);

// (1/|E|) Σ_edges (cos θ + sin θ) ‖f_i − f_j‖².
double dirichlet_energy(const Mat& features, const FuzzyDiGraph& graph);

}  // namespace coed
