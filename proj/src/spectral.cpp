#include "coed/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace coed {

namespace {

Eigen::MatrixXcd dense_of(const CsrC& m) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m.n, m.n);
    for (int i = 0; i < m.n; ++i)
        for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) out(i, m.col[k]) = m.val[k];
    return out;
}

// Index of the first component of largest magnitude (the gauge pivot).
int pivot_index(const Eigen::VectorXcd& v) {
    int best = 0;
    double best_mag = std::abs(v(0));
    for (int i = 1; i < v.size(); ++i) {
        double mag = std::abs(v(i));
        if (mag > best_mag + 1e-12 * (1.0 + best_mag)) {
            best_mag = mag;
            best = i;
        }
    }
    return best;
}

}  // namespace

SpectralDecomposition eigendecompose(const FuzzyLaplacian& laplacian, double tolerance) {
    const int n = laplacian.dim();
    if (n == 0) throw ConfigError("empty laplacian");
    Eigen::MatrixXcd dense = dense_of(laplacian.matrix);
    const std::complex<double> rot = std::polar(1.0, -kQuarterPi);
    Eigen::MatrixXcd m = rot * dense;
    // Symmetrize away the last-bit asymmetry so the solver sees an exactly
    // Hermitian input.
    m = 0.5 * (m + m.adjoint().eval());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
    if (solver.info() != Eigen::Success) throw NumericError("Hermitian eigensolver failed");

    const std::complex<double> back = std::polar(1.0, kQuarterPi);
    SpectralDecomposition out;
    out.eigenvectors.resize(n, n);
    out.eigenvalues.resize(n);

    // Gauge-fix every column, then order by descending |λ| with the pivot
    // index as deterministic tie-break.
    Eigen::MatrixXcd vecs = solver.eigenvectors();
    std::vector<int> pivots(n);
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXcd col = vecs.col(k);
        int p = pivot_index(col);
        std::complex<double> z = col(p);
        double mag = std::abs(z);
        if (mag > 0.0) col *= std::conj(z) / mag;
        vecs.col(k) = col;
        pivots[k] = p;
    }
    std::vector<int> order(n);
    for (int k = 0; k < n; ++k) order[k] = k;
    const auto& evals = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        double ma = std::abs(evals(a)), mb = std::abs(evals(b));
        if (std::abs(ma - mb) > 1e-12 * (1.0 + std::max(ma, mb))) return ma > mb;
        return pivots[a] < pivots[b];
    });
    for (int k = 0; k < n; ++k) {
        out.eigenvalues[k] = back * std::complex<double>(evals(order[k]), 0.0);
        out.eigenvectors.col(k) = vecs.col(order[k]);
    }

    double residual = 0.0;
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXcd r = dense * out.eigenvectors.col(k) -
                             out.eigenvalues[k] * out.eigenvectors.col(k);
        residual = std::max(residual, r.cwiseAbs().maxCoeff());
    }
    out.residual = residual;
    if (residual > tolerance)
        throw NumericError("eigendecomposition residual " + std::to_string(residual) +
                           " exceeds tolerance " + std::to_string(tolerance));
    return out;
}

PositionalEncoding positional_encoding(const FuzzyLaplacian& laplacian, int k) {
    if (k < 1 || k > laplacian.dim()) throw ConfigError("encoding size k out of range");
    SpectralDecomposition dec = eigendecompose(laplacian);
    PositionalEncoding out;
    out.k = k;
    out.matrix = dec.eigenvectors.leftCols(k);
    return out;
}

double dirichlet_energy(const Mat& features, const FuzzyDiGraph& graph) {
    if (features.rows != graph.n_nodes()) throw ConfigError("feature rows != node count");
    if (graph.n_edges() == 0) return 0.0;
    double acc = 0.0;
    for (const Edge& e : graph.edges()) {
        double w = std::cos(e.theta) + std::sin(e.theta);
        double d2 = 0.0;
        for (int j = 0; j < features.cols; ++j) {
            double d = features(e.i, j) - features(e.j, j);
            d2 += d * d;
        }
        acc += w * d2;
    }
    return acc / graph.n_edges();
}

}  // namespace coed
