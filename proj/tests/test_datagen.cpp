#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <vector>

#include "coed/datagen.hpp"
#include "coed/dataset.hpp"
#include "coed/model.hpp"

using namespace coed;

TEST_CASE("triangular lattice shape and degrees") {
    FuzzyDiGraph g = triangular_lattice(2, 2);
    CHECK(g.n_nodes() == 4);
    CHECK(g.n_edges() == 5);  // 2 horizontal + 2 vertical-ish + 1 diagonal
    CHECK(g.is_connected());
    REQUIRE(g.has_positions());

    FuzzyDiGraph big = triangular_lattice(15, 15);
    CHECK(big.n_nodes() == 225);
    CHECK(big.is_connected());
    // Interior nodes of a triangular lattice have degree 6.
    std::vector<int> deg(big.n_nodes(), 0);
    for (const Edge& e : big.edges()) {
        deg[e.i]++;
        deg[e.j]++;
    }
    CHECK(*std::max_element(deg.begin(), deg.end()) == 6);
    int sixes = static_cast<int>(std::count(deg.begin(), deg.end(), 6));
    CHECK(sixes > 100);
    // Positions are scaled into [-2, 2] per axis.
    double max_abs = 0.0;
    for (const Point2& p : big.positions())
        max_abs = std::max({max_abs, std::abs(p.x), std::abs(p.y)});
    CHECK(max_abs == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("potential phases point downhill and respect the antisymmetry") {
    FuzzyDiGraph g = potential_field_phases(triangular_lattice(10, 10));
    PotentialSpec spec;
    double max_dv = 0.0;
    for (const Edge& e : g.edges()) {
        const Point2& a = g.positions()[e.i];
        const Point2& b = g.positions()[e.j];
        double dv = spec.value(b.x, b.y) - spec.value(a.x, a.y);
        max_dv = std::max(max_dv, std::abs(dv));
    }
    int extremes = 0;
    for (const Edge& e : g.edges()) {
        const Point2& a = g.positions()[e.i];
        const Point2& b = g.positions()[e.j];
        double dv = spec.value(b.x, b.y) - spec.value(a.x, a.y);
        double want = kQuarterPi + kQuarterPi * dv / max_dv;
        CHECK(e.theta == doctest::Approx(want).epsilon(1e-12));
        if (std::abs(std::abs(dv) - max_dv) < 1e-12) ++extremes;
    }
    CHECK(extremes >= 1);  // the steepest edge hits the boundary angle

    // A constant potential degenerates to the undirected assignment.
    PotentialSpec flat;
    flat.magnitudes = {0.0, 0.0};
    FuzzyDiGraph und = potential_field_phases(triangular_lattice(4, 4), flat);
    for (const Edge& e : und.edges()) CHECK(e.theta == doctest::Approx(kQuarterPi));
}

TEST_CASE("solenoidal phases align with the rotational field") {
    FuzzyDiGraph g = solenoidal_phases(triangular_lattice(12, 12));
    for (const Edge& e : g.edges()) {
        const Point2& a = g.positions()[e.i];
        const Point2& b = g.positions()[e.j];
        double mx = 0.5 * (a.x + b.x), my = 0.5 * (a.y + b.y);
        double fx = std::sin(kPi * mx) * std::cos(kPi * my);
        double fy = -std::cos(kPi * mx) * std::sin(kPi * my);
        double norm = std::hypot(fx, fy);
        if (norm < 1e-12) {
            CHECK(e.theta == doctest::Approx(kQuarterPi));
            continue;
        }
        double ex = b.x - a.x, ey = b.y - a.y;
        double cosang = (fx * ex + fy * ey) / (norm * std::hypot(ex, ey));
        cosang = std::clamp(cosang, -1.0, 1.0);
        CHECK(e.theta == doctest::Approx(0.5 * std::acos(cosang)).epsilon(1e-10));
    }
}

TEST_CASE("lattice ensemble reproduces its own targets through the model") {
    FuzzyDiGraph lattice = potential_field_phases(triangular_lattice(5, 5));
    EnsembleDataset data = generate_lattice_ensemble(lattice, 20, 4, 3, 9);
    REQUIRE(data.samples.size() == 20);
    CHECK(data.indices_of(Split::Train).size() == 12);
    CHECK(data.indices_of(Split::Val).size() == 4);
    CHECK(data.indices_of(Split::Test).size() == 4);

    // Generator round trip: a unit-norm model carrying the recorded weights
    // and true phases must reproduce every target to 1e-12.
    CoEDModel model(data.graph, {4, 4, 4, 4}, false, true, Activation::UnitNorm, 0.5, 0);
    Mat w_self(4, 4), w_in(4, 4), w_out(4, 4);
    w_self.d = data.metadata.at("w_self").get<std::vector<double>>();
    w_in.d = data.metadata.at("w_in").get<std::vector<double>>();
    w_out.d = data.metadata.at("w_out").get<std::vector<double>>();
    for (auto& layer : model.layers()) {
        layer.w_self = w_self;
        layer.w_in = w_in;
        layer.w_out = w_out;
        layer.bias.fill(0.0);
    }
    std::vector<double> truth = data.metadata.at("true_theta").get<std::vector<double>>();
    for (const Sample& s : data.samples) {
        Mat pred = model.forward_eval(s.features, &truth);
        double worst = 0.0;
        for (size_t k = 0; k < pred.d.size(); ++k)
            worst = std::max(worst, std::abs(pred.d[k] - s.targets.d[k]));
        CHECK(worst < 1e-12);
    }

    // Zero hops: targets are the raw features.
    EnsembleDataset flat = generate_lattice_ensemble(lattice, 3, 2, 0, 10);
    for (const Sample& s : flat.samples) CHECK(s.features.d == s.targets.d);
}

TEST_CASE("lattice ensemble is bitwise deterministic in the seed") {
    FuzzyDiGraph lattice = potential_field_phases(triangular_lattice(4, 4));
    EnsembleDataset a = generate_lattice_ensemble(lattice, 8, 3, 2, 77);
    EnsembleDataset b = generate_lattice_ensemble(lattice, 8, 3, 2, 77);
    EnsembleDataset c = generate_lattice_ensemble(lattice, 8, 3, 2, 78);
    REQUIRE(a.samples.size() == b.samples.size());
    for (size_t s = 0; s < a.samples.size(); ++s) {
        CHECK(a.samples[s].features.d == b.samples[s].features.d);
        CHECK(a.samples[s].targets.d == b.samples[s].targets.d);
        CHECK(a.split[s] == b.split[s]);
    }
    CHECK(a.samples[0].features.d != c.samples[0].features.d);
}

TEST_CASE("random GRN systems are well formed") {
    GrnSystem sys = grn_random(30, 0.08, 5);
    CHECK(sys.n_genes == 30);
    int m = sys.n_edges();
    CHECK(m > 0);
    int activating = 0;
    for (int i = 0; i < 30 * 30; ++i) {
        if (!sys.adj[i]) continue;
        CHECK((sys.sign[i] == 1 || sys.sign[i] == -1));
        CHECK(sys.gamma[i] > 0.0);
        CHECK(sys.k_half[i] > 0.0);
        if (sys.sign[i] == 1) ++activating;
    }
    CHECK(activating == (m + 1) / 2);
    for (int i = 0; i < 30; ++i) CHECK_FALSE(sys.adj[i * 30 + i]);  // no self-regulation

    FuzzyDiGraph reg = sys.regulation_graph();
    CHECK(reg.is_connected());
    for (const Edge& e : reg.edges()) {
        bool fwd = sys.adj[e.j * 30 + e.i];   // i regulates j
        bool bwd = sys.adj[e.i * 30 + e.j];   // j regulates i
        double want = fwd && bwd ? kQuarterPi : (fwd ? 0.0 : kHalfPi);
        CHECK(e.theta == doctest::Approx(want));
    }
}

TEST_CASE("isolated gene decays exponentially") {
    GrnSystem sys;
    sys.n_genes = 1;
    sys.adj = {0};
    sys.sign = {0};
    sys.gamma = {0.0};
    sys.k_half = {1.0};
    // dc/dt = -c under forward Euler: c <- c (1 - dt).
    GrnTrajectory tr = grn_integrate(sys, {5.0}, 250, 0.05);
    CHECK(tr.state[0] == doctest::Approx(5.0 * std::pow(0.95, 250)).epsilon(1e-12));
    CHECK(tr.min_state >= 0.0);
}

TEST_CASE("hill activation half-saturates at K") {
    // Gene 1 activates gene 0 with gamma = 2, K = c_1; clamping gene 1 at a
    // fixed value makes gene 0 settle at gamma * F = 2 * (c/ (c + K)) = 1.
    GrnSystem sys;
    sys.n_genes = 2;
    sys.adj = {0, 1, 0, 0};  // gene 1 regulates gene 0
    sys.sign = {0, 1, 0, 0};
    sys.gamma = {0.0, 2.0, 0.0, 0.0};
    sys.k_half = {1.0, 3.0, 1.0, 1.0};
    // Hold gene 1 at 3.0 by starting there with no regulation of gene 1; its
    // decay is counteracted by nothing, so instead check the steady state of
    // gene 0 against the analytic value along the trajectory start.
    GrnTrajectory tr = grn_integrate(sys, {0.0, 3.0}, 1, 0.05);
    // One Euler step: c0 <- 0 + dt * (2 * 3/(3+3) - 0) = 0.05.
    CHECK(tr.state[0] == doctest::Approx(0.05).epsilon(1e-13));
}

TEST_CASE("perturbation ensemble structure") {
    GrnSystem sys = grn_random(20, 0.1, 6);
    EnsembleDataset data = grn_perturbation_ensemble(sys, 40, 7);
    REQUIRE(data.samples.size() == 60);  // 20 singles + 40 doubles
    CHECK(data.indices_of(Split::Train).size() == 20);
    CHECK(data.indices_of(Split::Val).size() == 8);
    CHECK(data.indices_of(Split::Test).size() == 32);

    // Singles first: sample i knocks out gene i only.
    for (int i = 0; i < 20; ++i) {
        CHECK(data.split[i] == Split::Train);
        int masked = 0;
        for (int gene = 0; gene < 20; ++gene)
            if (!data.samples[i].mask[gene]) {
                ++masked;
                CHECK(gene == i);
                CHECK(data.samples[i].features(gene, 0) == 0.0);
            }
        CHECK(masked == 1);
    }
    std::set<std::pair<int, int>> pairs;
    for (size_t s = 20; s < 60; ++s) {
        std::vector<int> knocked;
        for (int gene = 0; gene < 20; ++gene)
            if (!data.samples[s].mask[gene]) knocked.push_back(gene);
        REQUIRE(knocked.size() == 2);
        CHECK(pairs.insert({knocked[0], knocked[1]}).second);  // unique pairs
    }

    // Concentrations remain nonnegative and finite all the way through.
    for (const Sample& s : data.samples)
        for (double v : s.targets.d) {
            CHECK(v >= 0.0);
            CHECK(std::isfinite(v));
        }

    // Determinism.
    EnsembleDataset again = grn_perturbation_ensemble(sys, 40, 7);
    for (size_t s = 0; s < data.samples.size(); ++s) {
        CHECK(data.samples[s].features.d == again.samples[s].features.d);
        CHECK(data.samples[s].targets.d == again.samples[s].targets.d);
    }
}

TEST_CASE("dataset files round trip bit-exactly") {
    FuzzyDiGraph lattice = potential_field_phases(triangular_lattice(3, 3));
    EnsembleDataset data = generate_lattice_ensemble(lattice, 6, 2, 2, 11);
    data.metadata["note"] = "round trip";
    const char* path = "test_datagen_ds.bin";
    data.save_file(path);
    EnsembleDataset back = EnsembleDataset::load_file(path);
    CHECK(back.graph.hash() == data.graph.hash());
    REQUIRE(back.samples.size() == data.samples.size());
    for (size_t s = 0; s < data.samples.size(); ++s) {
        CHECK(back.samples[s].features.d == data.samples[s].features.d);
        CHECK(back.samples[s].targets.d == data.samples[s].targets.d);
        CHECK(back.samples[s].mask == data.samples[s].mask);
        CHECK(back.split[s] == data.split[s]);
    }
    CHECK(back.metadata.at("note") == "round trip");

    // Saving the loaded copy reproduces the same bytes.
    const char* path2 = "test_datagen_ds2.bin";
    back.save_file(path2);
    auto slurp = [](const char* p) {
        FILE* f = std::fopen(p, "rb");
        REQUIRE(f);
        std::vector<unsigned char> bytes;
        int ch;
        while ((ch = std::fgetc(f)) != EOF) bytes.push_back(static_cast<unsigned char>(ch));
        std::fclose(f);
        return bytes;
    };
    CHECK(slurp(path) == slurp(path2));
    std::remove(path);
    std::remove(path2);
}
