#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <sstream>

#include "coed/graph.hpp"

using namespace coed;

TEST_CASE("edges are canonicalized to i < j") {
    FuzzyDiGraph g(3, {{2, 0, 0.3}, {1, 2, 0.7}});
    CHECK(g.edges()[0].i == 0);
    CHECK(g.edges()[0].j == 2);
    // Reversing an edge flips its angle to pi/2 - theta.
    CHECK(g.edges()[0].theta == doctest::Approx(kHalfPi - 0.3));
    CHECK(g.edges()[1].i == 1);
    CHECK(g.edges()[1].theta == doctest::Approx(0.7));
}

TEST_CASE("constructor rejects invalid edges") {
    CHECK_THROWS_AS(FuzzyDiGraph(2, {{0, 0, 0.1}}), ConfigError);
    CHECK_THROWS_AS(FuzzyDiGraph(2, {{0, 5, 0.1}}), ConfigError);
    CHECK_THROWS_AS(FuzzyDiGraph(2, {{0, 1, -0.1}}), ConfigError);
    CHECK_THROWS_AS(FuzzyDiGraph(2, {{0, 1, kHalfPi + 0.1}}), ConfigError);
    CHECK_THROWS_AS(FuzzyDiGraph(3, {{0, 1, 0.1}, {1, 0, 0.2}}), ConfigError);
}

TEST_CASE("with_thetas replaces angles and keeps wiring") {
    FuzzyDiGraph g(3, {{0, 1, 0.1}, {1, 2, 0.2}});
    FuzzyDiGraph h = g.with_thetas({0.5, 0.6});
    CHECK(h.edges()[0].theta == 0.5);
    CHECK(h.topology_hash() == g.topology_hash());
    CHECK(h.hash() != g.hash());
    CHECK_THROWS_AS(g.with_thetas({0.5}), ConfigError);
}

TEST_CASE("save/load round trip preserves everything") {
    FuzzyDiGraph g(4, {{0, 1, 0.125}, {1, 2, 1.5}, {0, 3, 0.0}},
                   std::vector<Point2>{{0, 0}, {1, 0}, {0.5, 1}, {2, 2}});
    std::stringstream ss;
    g.save(ss);
    FuzzyDiGraph h = FuzzyDiGraph::load(ss);
    REQUIRE(h.n_nodes() == 4);
    REQUIRE(h.n_edges() == 3);
    CHECK(h.hash() == g.hash());
    REQUIRE(h.has_positions());
    CHECK(h.positions()[2].y == doctest::Approx(1.0));

    std::stringstream bad("NOTAGRAPH");
    CHECK_THROWS_AS(FuzzyDiGraph::load(bad), IoError);
}

TEST_CASE("undirected assignment puts pi/4 everywhere") {
    FuzzyDiGraph g = undirected_phases(3, {{0, 1}, {1, 2}});
    for (const Edge& e : g.edges()) CHECK(e.theta == doctest::Approx(kQuarterPi));
}

TEST_CASE("connectivity check") {
    CHECK(FuzzyDiGraph(3, {{0, 1, 0.1}, {1, 2, 0.1}}).is_connected());
    CHECK_FALSE(FuzzyDiGraph(4, {{0, 1, 0.1}, {2, 3, 0.1}}).is_connected());
}

TEST_CASE("random graphs are valid, connected, and seed-deterministic") {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        FuzzyDiGraph g = random_fuzzy_graph(20, 0.3, seed);
        CHECK(g.is_connected());
        for (const Edge& e : g.edges()) {
            CHECK(e.i < e.j);
            CHECK(e.theta >= 0.0);
            CHECK(e.theta <= kHalfPi);
        }
        CHECK(g.hash() == random_fuzzy_graph(20, 0.3, seed).hash());
    }
    CHECK(random_fuzzy_graph(20, 0.3, 1).hash() != random_fuzzy_graph(20, 0.3, 2).hash());
}
