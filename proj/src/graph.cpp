#include "coed/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace coed {

namespace {

uint64_t fnv1a(uint64_t h, const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t k = 0; k < n; ++k) {
        h ^= p[k];
        h *= 0x100000001b3ULL;
    }
    return h;
}

uint64_t fnv1a_u64(uint64_t h, uint64_t v) { return fnv1a(h, &v, sizeof v); }

int64_t quantize_theta(double theta) {
    return static_cast<int64_t>(std::llround(theta * 1e9));
}

}  // namespace

FuzzyDiGraph::FuzzyDiGraph(int n_nodes, std::vector<Edge> edges,
                           std::optional<std::vector<Point2>> positions)
    : n_nodes_(n_nodes), edges_(std::move(edges)), positions_(std::move(positions)) {
    if (n_nodes_ < 0) throw ConfigError("negative node count");
    std::set<std::pair<int, int>> seen;
    for (auto& e : edges_) {
        if (e.i == e.j) throw ConfigError("self-loop on node " + std::to_string(e.i));
        if (e.i > e.j) {
            std::swap(e.i, e.j);
            e.theta = kHalfPi - e.theta;
        }
        if (e.i < 0 || e.j >= n_nodes_)
            throw ConfigError("edge endpoint out of range");
        if (!(e.theta >= 0.0 && e.theta <= kHalfPi))
            throw ConfigError("theta out of [0, pi/2] on edge (" + std::to_string(e.i) + "," +
                              std::to_string(e.j) + ")");
        if (!seen.insert({e.i, e.j}).second)
            throw ConfigError("duplicate edge (" + std::to_string(e.i) + "," +
                              std::to_string(e.j) + ")");
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
    if (positions_ && static_cast<int>(positions_->size()) != n_nodes_)
        throw ConfigError("position count does not match node count");
}

FuzzyDiGraph FuzzyDiGraph::with_thetas(const std::vector<double>& thetas) const {
    if (thetas.size() != edges_.size()) throw ConfigError("theta count mismatch");
    std::vector<Edge> es = edges_;
    for (size_t k = 0; k < es.size(); ++k) es[k].theta = thetas[k];
    return FuzzyDiGraph(n_nodes_, std::move(es), positions_);
}

bool FuzzyDiGraph::is_connected() const {
    if (n_nodes_ <= 1) return true;
    std::vector<std::vector<int>> adj(n_nodes_);
    for (const auto& e : edges_) {
        adj[e.i].push_back(e.j);
        adj[e.j].push_back(e.i);
    }
    std::vector<char> vis(n_nodes_, 0);
    std::vector<int> stack{0};
    vis[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v : adj[u])
            if (!vis[v]) {
                vis[v] = 1;
                ++count;
                stack.push_back(v);
            }
    }
    return count == n_nodes_;
}

uint64_t FuzzyDiGraph::hash() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a_u64(h, static_cast<uint64_t>(n_nodes_));
    for (const auto& e : edges_) {
        h = fnv1a_u64(h, static_cast<uint64_t>(e.i));
        h = fnv1a_u64(h, static_cast<uint64_t>(e.j));
        h = fnv1a_u64(h, static_cast<uint64_t>(quantize_theta(e.theta)));
    }
    return h;
}

uint64_t FuzzyDiGraph::topology_hash() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a_u64(h, static_cast<uint64_t>(n_nodes_));
    for (const auto& e : edges_) {
        h = fnv1a_u64(h, static_cast<uint64_t>(e.i));
        h = fnv1a_u64(h, static_cast<uint64_t>(e.j));
    }
    return h;
}

void FuzzyDiGraph::save(std::ostream& os) const {
    os << "FUZZYGRAPH v1 " << n_nodes_ << " " << edges_.size() << "\n";
    char buf[64];
    for (const auto& e : edges_) {
        std::snprintf(buf, sizeof buf, "%d %d %.17g\n", e.i, e.j, e.theta);
        os << buf;
    }
    if (positions_) {
        for (int i = 0; i < n_nodes_; ++i) {
            std::snprintf(buf, sizeof buf, "POS %d %.17g %.17g\n", i, (*positions_)[i].x,
                          (*positions_)[i].y);
            os << buf;
        }
    }
}

void FuzzyDiGraph::save_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    save(os);
    if (!os) throw IoError("write failure on " + path);
}

FuzzyDiGraph FuzzyDiGraph::load(std::istream& is) {
    std::string magic, version;
    int n = 0;
    size_t m = 0;
    if (!(is >> magic >> version >> n >> m) || magic != "FUZZYGRAPH" || version != "v1")
        throw IoError("not a FUZZYGRAPH v1 file");
    std::vector<Edge> edges;
    edges.reserve(m);
    for (size_t k = 0; k < m; ++k) {
        Edge e{};
        if (!(is >> e.i >> e.j >> e.theta)) throw IoError("truncated edge list");
        edges.push_back(e);
    }
    std::optional<std::vector<Point2>> pos;
    std::string tok;
    while (is >> tok) {
        if (tok != "POS") throw IoError("unexpected token '" + tok + "'");
        int i;
        double x, y;
        if (!(is >> i >> x >> y)) throw IoError("truncated POS line");
        if (!pos) pos.emplace(n);
        if (i < 0 || i >= n) throw IoError("POS index out of range");
        (*pos)[i] = {x, y};
    }
    return FuzzyDiGraph(n, std::move(edges), std::move(pos));
}

FuzzyDiGraph FuzzyDiGraph::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    return load(is);
}

FuzzyDiGraph undirected_phases(int n_nodes, const std::vector<std::pair<int, int>>& topology,
                               std::optional<std::vector<Point2>> positions) {
    std::vector<Edge> edges;
    edges.reserve(topology.size());
    for (auto [i, j] : topology) edges.push_back({i, j, kQuarterPi});
    return FuzzyDiGraph(n_nodes, std::move(edges), std::move(positions));
}

FuzzyDiGraph random_fuzzy_graph(int n_nodes, double edge_prob, uint64_t seed,
                                bool random_thetas) {
    Rng rng(seed);
    std::vector<Edge> edges;
    for (int i = 0; i < n_nodes; ++i)
        for (int j = i + 1; j < n_nodes; ++j)
            if (rng.uniform() < edge_prob)
                edges.push_back({i, j, random_thetas ? rng.uniform(0.0, kHalfPi) : kQuarterPi});
    return FuzzyDiGraph(n_nodes, std::move(edges));
}

}  // namespace coed
