#pragma once

#include "coed/graph.hpp"

namespace coed {

enum class WlForm { Strong, Weak };

struct Coloring {
    std::vector<int> colors;  // dense ids starting at 0
    int iteration = 0;
    std::vector<std::pair<int, int>> histogram;  // (color, count), sorted by color
};

// Color refinement from the uniform coloring. Strong form hashes the multiset
// of (quantized mu_ij, neighbor color); weak form hashes, per neighbor
// color c, the pair of directed weight sums (quantized after summation).
// Returns every round, index 0 being the uniform start; stops once the color
// count stabilizes or after max_iter refinement rounds.
std::vector<Coloring> wl_refine(const FuzzyDiGraph& graph, WlForm form, int max_iter = 1000);

enum class WlVerdict { NonIsomorphic, PossiblyIsomorphic };

// Lockstep refinement of both graphs through one shared relabeling table, so
// color ids are comparable; the first round with differing histograms is
// decisive.
WlVerdict wl_isomorphism_test(const FuzzyDiGraph& g1, const FuzzyDiGraph& g2, WlForm form);

struct AliasingReport {
    // Aggregated magnetic-Laplacian row sums (Re, Im) for the two
    // neighborhoods; identical despite different memberships.
    double magnetic_a_re, magnetic_a_im;
    double magnetic_b_re, magnetic_b_im;
    // Fuzzy aggregates (sum mu_ij, sum mu_ji); these differ.
    double fuzzy_a_in, fuzzy_a_out;
    double fuzzy_b_in, fuzzy_b_out;
};

// The two-neighborhood construction showing the magnetic Laplacian aliasing
// distinct fuzzy neighborhoods onto the same aggregate.
AliasingReport magnetic_aliasing_demo();

// A pair of 4-regular circulant graphs whose per-color directed weight sums
// agree everywhere (weak refinement never splits either) while the weight
// multisets differ (strong refinement separates them in round one).
std::pair<FuzzyDiGraph, FuzzyDiGraph> fig_weak_blind_pair();

}  // namespace coed
