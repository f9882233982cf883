#include "coed/wl.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace coed {

namespace {

struct Nb {
    int j;
    double mu_ij;  // weight i -> j as seen from the signature owner i
    double mu_ji;
};

std::vector<std::vector<Nb>> adjacency(const FuzzyDiGraph& graph) {
    std::vector<std::vector<Nb>> adj(graph.n_nodes());
    for (const Edge& e : graph.edges()) {
        double c = std::cos(e.theta), s = std::sin(e.theta);
        adj[e.i].push_back({e.j, c, s});
        adj[e.j].push_back({e.i, s, c});
    }
    return adj;
}

long long q9(double x) { return std::llround(x * 1e9); }

std::string node_signature(const std::vector<Nb>& nbrs, const std::vector<int>& colors,
                           int own_color, WlForm form) {
    std::string sig = std::to_string(own_color);
    sig += '|';
    if (form == WlForm::Strong) {
        std::vector<std::pair<long long, int>> items;
        items.reserve(nbrs.size());
        for (const Nb& nb : nbrs) items.emplace_back(q9(nb.mu_ij), colors[nb.j]);
        std::sort(items.begin(), items.end());
        for (const auto& [w, c] : items) {
            sig += std::to_string(w);
            sig += ',';
            sig += std::to_string(c);
            sig += ';';
        }
    } else {
        std::map<int, std::pair<double, double>> sums;  // color -> (sum out, sum in)
        for (const Nb& nb : nbrs) {
            auto& s = sums[colors[nb.j]];
            s.first += nb.mu_ij;
            s.second += nb.mu_ji;
        }
        for (const auto& [c, s] : sums) {
            sig += std::to_string(q9(s.first));
            sig += ',';
            sig += std::to_string(q9(s.second));
            sig += ',';
            sig += std::to_string(c);
            sig += ';';
        }
    }
    return sig;
}

std::vector<std::pair<int, int>> histogram_of(const std::vector<int>& colors) {
    std::map<int, int> counts;
    for (int c : colors) ++counts[c];
    return {counts.begin(), counts.end()};
}

// One refinement round over several graphs sharing a relabel table. The
// table is keyed by the full signature preimage, so relabeling is injective
// by construction; ids are lexicographic ranks, which makes them independent
// of node order.
std::vector<std::vector<int>> refine_round(const std::vector<const std::vector<std::vector<Nb>>*>& adjs,
                                           const std::vector<std::vector<int>>& colors,
                                           WlForm form) {
    std::map<std::string, int> table;
    std::vector<std::vector<std::string>> sigs(adjs.size());
    for (size_t g = 0; g < adjs.size(); ++g) {
        const auto& adj = *adjs[g];
        sigs[g].reserve(adj.size());
        for (size_t i = 0; i < adj.size(); ++i) {
            sigs[g].push_back(node_signature(adj[i], colors[g], colors[g][i], form));
            table.emplace(sigs[g].back(), 0);
        }
    }
    int next = 0;
    for (auto& [key, id] : table) id = next++;
    std::vector<std::vector<int>> out(adjs.size());
    for (size_t g = 0; g < adjs.size(); ++g) {
        out[g].reserve(sigs[g].size());
        for (const auto& s : sigs[g]) out[g].push_back(table.at(s));
    }
    return out;
}

int distinct_count(const std::vector<std::vector<int>>& colorings) {
    std::vector<int> all;
    for (const auto& c : colorings) all.insert(all.end(), c.begin(), c.end());
    std::sort(all.begin(), all.end());
    return static_cast<int>(std::unique(all.begin(), all.end()) - all.begin());
}

}  // namespace

std::vector<Coloring> wl_refine(const FuzzyDiGraph& graph, WlForm form, int max_iter) {
    if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
    auto adj = adjacency(graph);
    std::vector<Coloring> rounds;
    std::vector<int> colors(graph.n_nodes(), 0);
    rounds.push_back({colors, 0, histogram_of(colors)});
    int prev_distinct = graph.n_nodes() > 0 ? 1 : 0;
    for (int t = 1; t <= max_iter; ++t) {
        colors = refine_round({&adj}, {colors}, form)[0];
        rounds.push_back({colors, t, histogram_of(colors)});
        int distinct = distinct_count({colors});
        if (distinct == prev_distinct) break;
        prev_distinct = distinct;
    }
    return rounds;
}

WlVerdict wl_isomorphism_test(const FuzzyDiGraph& g1, const FuzzyDiGraph& g2, WlForm form) {
    if (g1.n_nodes() != g2.n_nodes() || g1.n_edges() != g2.n_edges())
        return WlVerdict::NonIsomorphic;
    auto a1 = adjacency(g1), a2 = adjacency(g2);
    std::vector<std::vector<int>> colors{std::vector<int>(g1.n_nodes(), 0),
                                         std::vector<int>(g2.n_nodes(), 0)};
    int prev_distinct = 1;
    int bound = g1.n_nodes() + g2.n_nodes() + 1;
    for (int t = 1; t <= bound; ++t) {
        colors = refine_round({&a1, &a2}, colors, form);
        if (histogram_of(colors[0]) != histogram_of(colors[1])) return WlVerdict::NonIsomorphic;
        int distinct = distinct_count(colors);
        if (distinct == prev_distinct) break;
        prev_distinct = distinct;
    }
    return WlVerdict::PossiblyIsomorphic;
}

AliasingReport magnetic_aliasing_demo() {
    // Memberships whose magnetic angles land at (0.8, ±0.6) and (1, 0):
    // ln(mu/mu') = tan(2*theta~) inverted as mu = 1/sqrt(1 + exp(-2 tan)).
    auto mu_of = [](double tilde) {
        double t = std::tan(2.0 * tilde);
        return 1.0 / std::sqrt(1.0 + std::exp(-2.0 * t));
    };
    double plus = std::atan2(0.6, 0.8);
    double mu_hi = mu_of(plus);    // ~0.99947
    double mu_lo = mu_of(-plus);   // ~0.03241
    double mu_mid = mu_of(0.0);    // exactly 1/sqrt(2)

    AliasingReport r{};
    for (int k = 0; k < 5; ++k) {
        r.magnetic_a_re += 0.8 + 0.8;
        r.magnetic_a_im += 0.6 + (-0.6);
        r.fuzzy_a_in += mu_hi + mu_lo;
        r.fuzzy_a_out += std::sqrt(1.0 - mu_hi * mu_hi) + std::sqrt(1.0 - mu_lo * mu_lo);
    }
    for (int k = 0; k < 8; ++k) {
        r.magnetic_b_re += 1.0;
        r.magnetic_b_im += 0.0;
        r.fuzzy_b_in += mu_mid;
        r.fuzzy_b_out += std::sqrt(1.0 - mu_mid * mu_mid);
    }
    return r;
}

namespace {

FuzzyDiGraph circulant(int n, const std::vector<std::pair<int, double>>& classes) {
    std::vector<Edge> edges;
    for (const auto& [offset, theta] : classes)
        for (int u = 0; u < n; ++u) edges.push_back({u, (u + offset) % n, theta});
    return FuzzyDiGraph(n, std::move(edges));
}

// theta whose weight sum cos + sin equals g, taking the branch below pi/4.
double theta_of_sum(double g) { return kQuarterPi - std::acos(g / std::sqrt(2.0)); }

}  // namespace

std::pair<FuzzyDiGraph, FuzzyDiGraph> fig_weak_blind_pair() {
    const int n = 8;
    // Every node of either graph sees directed weight sums (2.6, 2.6); only
    // the multisets of individual weights tell the graphs apart.
    FuzzyDiGraph a = circulant(n, {{1, theta_of_sum(1.3)}, {2, theta_of_sum(1.3)}});
    FuzzyDiGraph b = circulant(n, {{1, theta_of_sum(1.2)}, {2, theta_of_sum(1.4)}});
    return {std::move(a), std::move(b)};
}

}  // namespace coed
