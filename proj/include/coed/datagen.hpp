#pragma once

#include <array>

#include "coed/dataset.hpp"

namespace coed {

struct PotentialSpec {
    std::vector<Point2> centers = {{-1.0, 1.0}, {1.0, -1.0}};
    std::vector<std::array<double, 4>> stiffness = {{1, 0, 0, 1}, {1, 0, 0, 1}};  // row-major 2x2
    std::vector<double> magnitudes = {1.0, -1.0};

    double value(double x, double y) const;
};

// Offset-row triangular grid scaled into [-2, 2]^2; every edge starts at
// theta = pi/4 and interior nodes have degree 6.
FuzzyDiGraph triangular_lattice(int rows, int cols);

// theta_ij = pi/4 + (pi/4) * dV_ij / max|dV| with dV_ij = V(x_j) - V(x_i);
// the symmetric map is the only affine one preserving theta_ji = pi/2 -
// theta_ij. A constant potential degenerates to all pi/4 (warned on stderr).
FuzzyDiGraph potential_field_phases(const FuzzyDiGraph& graph, const PotentialSpec& spec = {});

// Divergence-free field F(x) = (sin(pi x) cos(pi y), -cos(pi x) sin(pi y));
// theta is half the angle between the i->j edge direction and F at the edge
// midpoint, so aligned edges get 0 and anti-aligned edges pi/2.
FuzzyDiGraph solenoidal_phases(const FuzzyDiGraph& graph);

// Random unit-norm features pushed through `hops` rounds of the Eq. 4 map
// with row renormalization in place of the activation; the shared standard
// normal weights and the true phases land in the metadata for recovery
// checks.
EnsembleDataset generate_lattice_ensemble(const FuzzyDiGraph& graph, int n_realizations,
                                          int feature_dim, int hops, uint64_t seed);

struct GrnSystem {
    int n_genes = 0;
    std::vector<uint8_t> adj;      // n x n row-major; adj[i*n+j] = 1 when j regulates i
    std::vector<int8_t> sign;      // +1 activating, -1 suppressing (where adj set)
    std::vector<double> gamma;     // interaction magnitude (where adj set)
    std::vector<double> k_half;    // half-saturation constant (where adj set)

    int n_edges() const;
    // Regulation topology as a fuzzy graph: one-way regulation is a full arc
    // (theta 0 or pi/2), mutual regulation is bidirectional (pi/4).
    FuzzyDiGraph regulation_graph() const;
};

GrnSystem grn_random(int n_genes, double edge_prob, uint64_t seed);

struct GrnTrajectory {
    std::vector<double> state;
    double final_deriv_max = 0.0;  // max-norm of the last step's derivative
    double min_state = 0.0;        // smallest concentration seen (nonnegativity check)
};

// Forward-Euler integration of dc_i/dt = sum_j gamma_ij F_ij(c_j) - c_i with
// Hill activation/suppression; genes in `clamp` are held at zero each step.
GrnTrajectory grn_integrate(const GrnSystem& system, std::vector<double> c0, int steps, double dt,
                            const std::vector<int>& clamp = {});

// Knockout ensemble: every single-gene knockout (train) plus n_doubles random
// pairs (val/test 20/80). Inputs are the clamped steady state, targets the
// state 100 steps later, masks exclude the perturbed genes.
EnsembleDataset grn_perturbation_ensemble(const GrnSystem& system, int n_doubles, uint64_t seed);

}  // namespace coed
