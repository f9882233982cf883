#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <utility>

#include "coed/core.hpp"

namespace coed {

struct Edge {
    int i;            // canonical: i < j
    int j;
    double theta;     // radians in [0, pi/2]; theta_ji = pi/2 - theta implicit
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

// Directed graph with fuzzy edges. Each undirected pair is stored once with
// i < j; the reverse angle pi/2 - theta is implied, so the consistency
// constraint can never be violated by construction.
class FuzzyDiGraph {
public:
    FuzzyDiGraph() = default;
    FuzzyDiGraph(int n_nodes, std::vector<Edge> edges,
                 std::optional<std::vector<Point2>> positions = std::nullopt);

    int n_nodes() const { return n_nodes_; }
    int n_edges() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    bool has_positions() const { return positions_.has_value(); }
    const std::vector<Point2>& positions() const { return *positions_; }

    FuzzyDiGraph with_thetas(const std::vector<double>& thetas) const;

    bool is_connected() const;

    // Hash over node count, edge list, and theta quantized to 9 decimals.
    // Guards checkpoint/dataset pairings.
    uint64_t hash() const;

    // Topology-only hash (ignores angles); used where learned phases differ
    // from the dataset's initial phases but the wiring must match.
    uint64_t topology_hash() const;

    void save(std::ostream& os) const;
    void save_file(const std::string& path) const;
    static FuzzyDiGraph load(std::istream& is);
    static FuzzyDiGraph load_file(const std::string& path);

private:
    int n_nodes_ = 0;
    std::vector<Edge> edges_;
    std::optional<std::vector<Point2>> positions_;
};

// All-pi/4 assignment over a raw edge list (self-loops and duplicates
// rejected).
FuzzyDiGraph undirected_phases(int n_nodes, const std::vector<std::pair<int, int>>& topology,
                               std::optional<std::vector<Point2>> positions = std::nullopt);

// Seeded Erdos-Renyi graph with uniform-random angles; test corpora helper.
FuzzyDiGraph random_fuzzy_graph(int n_nodes, double edge_prob, uint64_t seed,
                                bool random_thetas = true);

}  // namespace coed
