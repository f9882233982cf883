#include "coed/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "coed/model.hpp"

namespace coed {

double PotentialSpec::value(double x, double y) const {
    if (centers.size() != stiffness.size() || centers.size() != magnitudes.size())
        throw ConfigError("potential spec component counts differ");
    double v = 0.0;
    for (size_t k = 0; k < centers.size(); ++k) {
        const auto& K = stiffness[k];
        if (std::abs(K[1] - K[2]) > 0.0) throw ConfigError("stiffness matrix must be symmetric");
        double dx = x - centers[k].x, dy = y - centers[k].y;
        v += magnitudes[k] * (dx * (K[0] * dx + K[1] * dy) + dy * (K[2] * dx + K[3] * dy));
    }
    return v;
}

FuzzyDiGraph triangular_lattice(int rows, int cols) {
    if (rows < 2 || cols < 2) throw ConfigError("lattice needs rows, cols >= 2");
    auto id = [cols](int r, int c) { return r * cols + c; };
    std::vector<Point2> pos(static_cast<size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            pos[id(r, c)] = {c + 0.5 * (r % 2), r * std::sqrt(3.0) / 2.0};

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& p : pos) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    for (auto& p : pos) {
        p.x = -2.0 + 4.0 * (p.x - xmin) / (xmax - xmin);
        p.y = -2.0 + 4.0 * (p.y - ymin) / (ymax - ymin);
    }

    std::vector<std::pair<int, int>> topo;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) topo.emplace_back(id(r, c), id(r, c + 1));
            if (r + 1 < rows) {
                topo.emplace_back(id(r, c), id(r + 1, c));
                // The offset row shares a second vertical neighbor: to the
                // left above even rows, to the right above odd rows.
                int c2 = (r % 2 == 0) ? c - 1 : c + 1;
                if (c2 >= 0 && c2 < cols) topo.emplace_back(id(r, c), id(r + 1, c2));
            }
        }
    return undirected_phases(rows * cols, topo, std::move(pos));
}

FuzzyDiGraph potential_field_phases(const FuzzyDiGraph& graph, const PotentialSpec& spec) {
    if (!graph.has_positions()) throw ConfigError("graph has no node positions");
    const auto& pos = graph.positions();
    std::vector<double> dv(graph.n_edges());
    double max_abs = 0.0;
    for (int e = 0; e < graph.n_edges(); ++e) {
        const Edge& ed = graph.edges()[e];
        dv[e] = spec.value(pos[ed.j].x, pos[ed.j].y) - spec.value(pos[ed.i].x, pos[ed.i].y);
        max_abs = std::max(max_abs, std::abs(dv[e]));
    }
    std::vector<double> thetas(graph.n_edges(), kQuarterPi);
    if (max_abs == 0.0) {
        std::fprintf(stderr, "warning: constant potential, all phases stay at pi/4\n");
    } else {
        for (int e = 0; e < graph.n_edges(); ++e)
            thetas[e] = kQuarterPi + kQuarterPi * dv[e] / max_abs;
    }
    return graph.with_thetas(thetas);
}

FuzzyDiGraph solenoidal_phases(const FuzzyDiGraph& graph) {
    if (!graph.has_positions()) throw ConfigError("graph has no node positions");
    const auto& pos = graph.positions();
    std::vector<double> thetas(graph.n_edges());
    for (int e = 0; e < graph.n_edges(); ++e) {
        const Edge& ed = graph.edges()[e];
        double ex = pos[ed.j].x - pos[ed.i].x, ey = pos[ed.j].y - pos[ed.i].y;
        double len = std::hypot(ex, ey);
        if (len == 0.0) throw ConfigError("zero-length edge");
        double mx = 0.5 * (pos[ed.i].x + pos[ed.j].x), my = 0.5 * (pos[ed.i].y + pos[ed.j].y);
        double fx = std::sin(kPi * mx) * std::cos(kPi * my);
        double fy = -std::cos(kPi * mx) * std::sin(kPi * my);
        double fn = std::hypot(fx, fy);
        if (fn < 1e-12) {
            thetas[e] = kQuarterPi;  // no flow information at the midpoint
            continue;
        }
        double cosang = std::clamp((ex * fx + ey * fy) / (len * fn), -1.0, 1.0);
        thetas[e] = 0.5 * std::acos(cosang);
    }
    return graph.with_thetas(thetas);
}

namespace {

void row_unit_normalize(Mat& m) {
    for (int i = 0; i < m.rows; ++i) {
        double n2 = 0.0;
        for (int j = 0; j < m.cols; ++j) n2 += m(i, j) * m(i, j);
        double n = std::sqrt(std::max(n2, 1e-300));
        for (int j = 0; j < m.cols; ++j) m(i, j) /= n;
    }
}

std::vector<Split> seeded_split(size_t n, size_t n_val_of, size_t n_test_of, Rng& rng) {
    // 60/20/20 by default via n/5 blocks; callers pass explicit block sizes.
    std::vector<int> order(n);
    for (size_t k = 0; k < n; ++k) order[k] = static_cast<int>(k);
    rng.shuffle(order);
    std::vector<Split> split(n, Split::Train);
    for (size_t k = 0; k < n_val_of && k < n; ++k) split[order[k]] = Split::Val;
    for (size_t k = n_val_of; k < n_val_of + n_test_of && k < n; ++k) split[order[k]] = Split::Test;
    return split;
}

}  // namespace

EnsembleDataset generate_lattice_ensemble(const FuzzyDiGraph& graph, int n_realizations,
                                          int feature_dim, int hops, uint64_t seed) {
    if (n_realizations < 1) throw ConfigError("need at least one realization");
    if (feature_dim < 1) throw ConfigError("feature_dim must be positive");
    if (hops < 0) throw ConfigError("hops must be nonnegative");
    const int n = graph.n_nodes();
    const int d = feature_dim;
    Rng rng(seed);

    Mat w_self(d, d), w_in(d, d), w_out(d, d);
    for (Mat* w : {&w_self, &w_in, &w_out})
        for (auto& v : w->d) v = rng.normal();

    std::vector<double> true_theta;
    for (const Edge& e : graph.edges()) true_theta.push_back(e.theta);

    CoEDModel gen_model;
    if (hops > 0) {
        std::vector<int> dims(hops + 1, d);
        gen_model = CoEDModel(graph, dims, false, true, Activation::UnitNorm, 0.5, 0);
        for (auto& l : gen_model.layers()) {
            l.w_self = w_self;
            l.w_in = w_in;
            l.w_out = w_out;
            l.bias.fill(0.0);
        }
    }

    EnsembleDataset out;
    out.graph = graph;
    for (int k = 0; k < n_realizations; ++k) {
        Sample s{Mat(n, d), Mat(n, d), std::vector<uint8_t>(n, 1)};
        for (auto& v : s.features.d) v = rng.normal();
        row_unit_normalize(s.features);
        s.targets = hops > 0 ? gen_model.forward_eval(s.features, &true_theta) : s.features;
        out.samples.push_back(std::move(s));
    }
    size_t n_val = n_realizations / 5, n_test = n_realizations / 5;
    out.split = seeded_split(out.samples.size(), n_val, n_test, rng);

    out.metadata = {{"task", "lattice"},
                    {"hops", hops},
                    {"feature_dim", d},
                    {"seed", seed},
                    {"true_theta", true_theta},
                    {"w_self", w_self.d},
                    {"w_in", w_in.d},
                    {"w_out", w_out.d}};
    return out;
}

int GrnSystem::n_edges() const {
    int m = 0;
    for (uint8_t v : adj) m += v;
    return m;
}

FuzzyDiGraph GrnSystem::regulation_graph() const {
    const int n = n_genes;
    std::vector<Edge> edges;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            bool ab = adj[static_cast<size_t>(b) * n + a];  // a regulates b
            bool ba = adj[static_cast<size_t>(a) * n + b];
            if (!ab && !ba) continue;
            double theta = ab && ba ? kQuarterPi : (ab ? 0.0 : kHalfPi);
            edges.push_back({a, b, theta});
        }
    return FuzzyDiGraph(n, std::move(edges));
}

GrnSystem grn_random(int n_genes, double edge_prob, uint64_t seed) {
    if (n_genes < 2) throw ConfigError("need at least two genes");
    if (edge_prob <= 0.0 || edge_prob >= 1.0) throw ConfigError("edge_prob outside (0, 1)");
    Rng rng(seed);
    for (int attempt = 0; attempt < 100; ++attempt) {
        GrnSystem sys;
        sys.n_genes = n_genes;
        size_t nn = static_cast<size_t>(n_genes) * n_genes;
        sys.adj.assign(nn, 0);
        sys.sign.assign(nn, 0);
        sys.gamma.assign(nn, 0.0);
        sys.k_half.assign(nn, 0.0);
        std::vector<size_t> positions;
        for (int i = 0; i < n_genes; ++i)
            for (int j = 0; j < n_genes; ++j) {
                if (i == j) continue;
                if (rng.uniform() < edge_prob) {
                    size_t p = static_cast<size_t>(i) * n_genes + j;
                    sys.adj[p] = 1;
                    positions.push_back(p);
                }
            }
        if (positions.empty()) continue;
        std::vector<size_t> shuffled = positions;
        rng.shuffle(shuffled);
        size_t n_act = (shuffled.size() + 1) / 2;
        for (size_t k = 0; k < shuffled.size(); ++k) sys.sign[shuffled[k]] = k < n_act ? 1 : -1;
        for (size_t p : positions) {
            sys.gamma[p] = rng.uniform(0.5, 1.5);
            sys.k_half[p] = rng.uniform(0.25, 0.75);
        }
        return sys;
    }
    throw NumericError("could not sample a non-empty regulation network");
}

GrnTrajectory grn_integrate(const GrnSystem& system, std::vector<double> c0, int steps, double dt,
                            const std::vector<int>& clamp) {
    const int n = system.n_genes;
    if (static_cast<int>(c0.size()) != n) throw ConfigError("state length != gene count");
    if (dt <= 0.0) throw ConfigError("dt must be positive");
    for (double v : c0)
        if (v < 0.0) throw ConfigError("negative initial concentration");

    auto deriv = [&](const std::vector<double>& c, std::vector<double>& d) {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            const size_t row = static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) {
                if (!system.adj[row + j]) continue;
                double k2 = system.k_half[row + j] * system.k_half[row + j];
                double x2 = c[j] * c[j];
                double hill = system.sign[row + j] > 0 ? x2 / (k2 + x2) : k2 / (k2 + x2);
                s += system.gamma[row + j] * hill;
            }
            d[i] = s - c[i];
        }
    };

    GrnTrajectory out;
    out.state = std::move(c0);
    for (int g : clamp) out.state.at(g) = 0.0;
    out.min_state = *std::min_element(out.state.begin(), out.state.end());
    std::vector<double> d(n);
    for (int step = 0; step < steps; ++step) {
        deriv(out.state, d);
        for (int i = 0; i < n; ++i) out.state[i] += dt * d[i];
        for (int g : clamp) out.state[g] = 0.0;
        for (int i = 0; i < n; ++i) {
            if (!std::isfinite(out.state[i]))
                throw NumericError("non-finite state at step " + std::to_string(step));
            out.min_state = std::min(out.min_state, out.state[i]);
        }
    }
    deriv(out.state, d);
    for (int g : clamp) d[g] = 0.0;
    for (int i = 0; i < n; ++i) out.final_deriv_max = std::max(out.final_deriv_max, std::abs(d[i]));
    return out;
}

EnsembleDataset grn_perturbation_ensemble(const GrnSystem& system, int n_doubles, uint64_t seed) {
    const int n = system.n_genes;
    if (n_doubles < 1) throw ConfigError("need at least one double knockout");
    Rng rng(seed);
    std::vector<double> c0(n);
    for (auto& v : c0) v = rng.uniform(0.1, 10.0);
    GrnTrajectory steady = grn_integrate(system, c0, 250, 0.05);

    std::vector<std::vector<int>> perturbations;
    for (int g = 0; g < n; ++g) perturbations.push_back({g});
    std::set<std::pair<int, int>> seen;
    long max_pairs = static_cast<long>(n) * (n - 1) / 2;
    if (n_doubles > max_pairs) throw ConfigError("more double knockouts than gene pairs");
    while (static_cast<int>(seen.size()) < n_doubles) {
        int a = static_cast<int>(rng.below(n)), b = static_cast<int>(rng.below(n));
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (seen.insert({a, b}).second) perturbations.push_back({a, b});
    }

    EnsembleDataset out;
    out.graph = system.regulation_graph();
    out.split.assign(perturbations.size(), Split::Train);
    for (size_t k = 0; k < perturbations.size(); ++k) {
        const auto& genes = perturbations[k];
        std::vector<double> input = steady.state;
        for (int g : genes) input[g] = 0.0;
        GrnTrajectory run = grn_integrate(system, input, 100, 0.05, genes);
        Sample s{Mat(n, 1), Mat(n, 1), std::vector<uint8_t>(n, 1)};
        for (int i = 0; i < n; ++i) {
            s.features(i, 0) = input[i];
            s.targets(i, 0) = run.state[i];
        }
        for (int g : genes) s.mask[g] = 0;
        out.samples.push_back(std::move(s));
    }
    // Singles train; doubles shuffle 20/80 into val/test.
    std::vector<int> doubles;
    for (size_t k = n; k < perturbations.size(); ++k) doubles.push_back(static_cast<int>(k));
    rng.shuffle(doubles);
    size_t n_val = doubles.size() / 5;
    for (size_t k = 0; k < doubles.size(); ++k)
        out.split[doubles[k]] = k < n_val ? Split::Val : Split::Test;

    std::vector<double> true_theta;
    for (const Edge& e : out.graph.edges()) true_theta.push_back(e.theta);
    std::vector<int> sign_list(system.sign.begin(), system.sign.end());
    out.metadata = {{"task", "grn"},
                    {"seed", seed},
                    {"n_doubles", n_doubles},
                    {"true_theta", true_theta},
                    {"adj", std::vector<int>(system.adj.begin(), system.adj.end())},
                    {"sign", sign_list},
                    {"gamma", system.gamma},
                    {"k_half", system.k_half},
                    {"steady_state", steady.state}};
    return out;
}

}  // namespace coed
