#include "coed/sparse.hpp"

#include <algorithm>
#include <tuple>

namespace coed {

template <typename T>
Csr<T> csr_from_triplets(int n, std::vector<std::tuple<int, int, T>> triplets) {
    std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    Csr<T> m(n);
    m.col.reserve(triplets.size());
    m.val.reserve(triplets.size());
    for (const auto& [i, j, v] : triplets) {
        m.row_ptr[i + 1]++;
        m.col.push_back(j);
        m.val.push_back(v);
    }
    for (int i = 0; i < n; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
    return m;
}

template Csr<double> csr_from_triplets(int, std::vector<std::tuple<int, int, double>>);
template Csr<std::complex<double>> csr_from_triplets(
    int, std::vector<std::tuple<int, int, std::complex<double>>>);

double FuzzyLaplacian::identity_residual() const {
    // L = i * L^dagger  <=>  L_ij = i * conj(L_ji).
    auto dense = matrix.to_dense();
    double worst = 0.0;
    const std::complex<double> iu(0.0, 1.0);
    for (int i = 0; i < matrix.n; ++i)
        for (int j = 0; j < matrix.n; ++j)
            worst = std::max(worst, std::abs(dense[i][j] - iu * std::conj(dense[j][i])));
    return worst;
}

FuzzyLaplacian build_fuzzy_laplacian(const FuzzyDiGraph& graph) {
    std::vector<std::tuple<int, int, std::complex<double>>> trip;
    trip.reserve(2 * graph.n_edges());
    for (const auto& e : graph.edges()) {
        trip.emplace_back(e.i, e.j, std::polar(1.0, e.theta));
        trip.emplace_back(e.j, e.i, std::polar(1.0, kHalfPi - e.theta));
    }
    return {csr_from_triplets(graph.n_nodes(), std::move(trip))};
}

PropagationPair propagation_matrices(const FuzzyLaplacian& laplacian, double epsilon) {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    const CsrC& lf = laplacian.matrix;
    const int n = lf.n;
    std::vector<double> d_in(n, 0.0), d_out(n, 0.0);
    // A_in = Re[L], A_out = Im[L]; in-degree is a row sum of A_in and
    // out-degree a row sum of A_out.
    for (int i = 0; i < n; ++i)
        for (int k = lf.row_ptr[i]; k < lf.row_ptr[i + 1]; ++k) {
            d_in[i] += lf.val[k].real();
            d_out[i] += lf.val[k].imag();
        }
    std::vector<double> r_in(n), r_out(n);
    for (int i = 0; i < n; ++i) {
        r_in[i] = 1.0 / std::sqrt(std::max(d_in[i], epsilon));
        r_out[i] = 1.0 / std::sqrt(std::max(d_out[i], epsilon));
    }
    CsrD p_in(n), p_out(n);
    p_in.row_ptr = lf.row_ptr;
    p_in.col = lf.col;
    p_out.row_ptr = lf.row_ptr;
    p_out.col = lf.col;
    p_in.val.resize(lf.val.size());
    p_out.val.resize(lf.val.size());
    for (int i = 0; i < n; ++i)
        for (int k = lf.row_ptr[i]; k < lf.row_ptr[i + 1]; ++k) {
            int j = lf.col[k];
            p_in.val[k] = r_in[i] * lf.val[k].real() * r_out[j];
            p_out.val[k] = r_out[i] * lf.val[k].imag() * r_in[j];
        }
    return {std::move(p_in), std::move(p_out), std::move(d_in), std::move(d_out), epsilon};
}

double MagneticLaplacian::hermitian_residual() const {
    auto dense = matrix.to_dense();
    double worst = 0.0;
    for (int i = 0; i < matrix.n; ++i)
        for (int j = 0; j < matrix.n; ++j)
            worst = std::max(worst, std::abs(dense[i][j] - std::conj(dense[j][i])));
    return worst;
}

double magnetic_angle(double theta) {
    return 0.5 * std::atan(std::log(std::cos(theta) / std::sin(theta)));
}

MagneticLaplacian build_magnetic_laplacian(const FuzzyDiGraph& graph) {
    std::vector<std::tuple<int, int, std::complex<double>>> trip;
    trip.reserve(2 * graph.n_edges());
    for (const auto& e : graph.edges()) {
        if (e.theta <= 0.0 || e.theta >= kHalfPi)
            throw NumericError("boundary angle on edge (" + std::to_string(e.i) + "," +
                               std::to_string(e.j) + "): magnetic log-ratio is infinite");
        double t = magnetic_angle(e.theta);
        trip.emplace_back(e.i, e.j, std::polar(1.0, t));
        trip.emplace_back(e.j, e.i, std::polar(1.0, -t));
    }
    return {csr_from_triplets(graph.n_nodes(), std::move(trip))};
}

MagneticLaplacian build_magnetic_laplacian_binary(const FuzzyDiGraph& graph, double q) {
    std::vector<std::tuple<int, int, std::complex<double>>> trip;
    trip.reserve(2 * graph.n_edges());
    for (const auto& e : graph.edges()) {
        // theta = 0: A_ij = 1, A_ji = 0 (j sends to i). theta = pi/2: the
        // reverse. theta = pi/4: bidirectional.
        double a_ij, a_ji;
        if (e.theta == 0.0) {
            a_ij = 1.0;
            a_ji = 0.0;
        } else if (e.theta == kHalfPi) {
            a_ij = 0.0;
            a_ji = 1.0;
        } else if (e.theta == kQuarterPi) {
            a_ij = 1.0;
            a_ji = 1.0;
        } else {
            throw ConfigError("binary magnetic Laplacian requires angles in {0, pi/4, pi/2}");
        }
        double s = 0.5 * (a_ij + a_ji);
        double phase = 2.0 * kPi * q * (a_ij - a_ji);
        trip.emplace_back(e.i, e.j, s * std::polar(1.0, phase));
        trip.emplace_back(e.j, e.i, s * std::polar(1.0, -phase));
    }
    return {csr_from_triplets(graph.n_nodes(), std::move(trip))};
}

}  // namespace coed
