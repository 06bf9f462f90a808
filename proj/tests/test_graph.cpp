#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <sstream>

#include "ferro/graph.hpp"
#include "support/oracles.hpp"

using namespace ferro;

TEST_CASE("construction validates input") {
    CHECK_THROWS_AS(CouplingGraph(1, {}), TooFewVertices);
    CHECK_THROWS_AS(CouplingGraph(3, {{0, 0, 1.0}}), SelfLoop);
    CHECK_THROWS_AS(CouplingGraph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {1, 0, 2.0}}),
                    DuplicateEdge);
    CHECK_THROWS_AS(CouplingGraph(2, {{0, 1, 0.0}}), NonPositiveCoupling);
    CHECK_THROWS_AS(CouplingGraph(2, {{0, 1, -1.0}}), NonPositiveCoupling);
    CHECK_THROWS_AS(CouplingGraph(3, {{0, 1, 1.0}, {1, 3, 1.0}}), IndexOutOfRange);
    CHECK_THROWS_AS(CouplingGraph(3, {{0, 1, 1.0}}), DisconnectedGraph);
    CHECK_THROWS_AS(CouplingGraph(4, {{0, 1, 1.0}, {2, 3, 1.0}}), DisconnectedGraph);
}

TEST_CASE("edges are canonicalized and sorted") {
    CouplingGraph g(3, {{2, 1, 0.5}, {1, 0, 1.5}});
    REQUIRE(g.edges().size() == 2);
    CHECK(g.edges()[0].i == 0);
    CHECK(g.edges()[0].j == 1);
    CHECK(g.edges()[0].coupling == 1.5);
    CHECK(g.edges()[1].i == 1);
    CHECK(g.edges()[1].j == 2);
    CHECK(g.coupling_sum() == 2.0);
    CHECK(g.min_coupling() == 0.5);
    CHECK(g.max_coupling() == 1.5);
}

TEST_CASE("adjacency lists mirror the edge set") {
    CouplingGraph g(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {0, 3, 1.0}});
    for (int v = 0; v < 4; ++v) {
        CHECK(g.adjacency()[static_cast<std::size_t>(v)].size() == 2);
    }
    std::set<int> n0(g.adjacency()[0].begin(), g.adjacency()[0].end());
    CHECK(n0 == std::set<int>{1, 3});
}

TEST_CASE("unchecked skips validation for test fixtures") {
    auto g = CouplingGraph::unchecked(4, {{0, 1, 1.0}, {2, 3, 1.0}});
    CHECK(g.vertex_count() == 4);
    CHECK(g.edges().size() == 2);
}

TEST_CASE("is_connected_without agrees with a union-find oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 3 + static_cast<int>(rng.uniform_below(6));
        GeneratorSpec spec;
        spec.kind = GeneratorSpec::Kind::random_connected;
        spec.n = n;
        spec.edge_prob = 0.15 + 0.6 * rng.uniform();
        spec.seed = Rng::derive_seed(500, static_cast<std::uint64_t>(trial));
        const CouplingGraph g = generate(spec, CouplingRule::uniform(1.0));
        for (int v = 0; v < n; ++v) {
            CHECK(is_connected_without(g, v) ==
                  oracles::connected_without(n, g.edges(), v));
        }
    }
    CouplingGraph two(2, {{0, 1, 1.0}});
    CHECK(is_connected_without(two, 0));
    CHECK(is_connected_without(two, 1));
    CHECK_THROWS_AS(is_connected_without(two, 2), IndexOutOfRange);
}

TEST_CASE("find_removable_pair returns two distinct removable vertices") {
    SECTION("chain endpoints") {
        const auto [i0, j0] = find_removable_pair(make_chain(6));
        CHECK(i0 == 0);
        CHECK(j0 == 5);
    }
    SECTION("two spins") {
        const auto [i0, j0] = find_removable_pair(make_chain(2));
        CHECK(i0 == 0);
        CHECK(j0 == 1);
    }
    SECTION("star leaves, never the cut center") {
        CouplingGraph star(6, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}, {0, 4, 1.0},
                               {0, 5, 1.0}});
        const auto [i0, j0] = find_removable_pair(star);
        CHECK(i0 == 1);
        CHECK(j0 == 2);
    }
    SECTION("every connected graph through N=5") {
        for (int n = 2; n <= 5; ++n) {
            oracles::for_each_connected_graph(n, [n](const std::vector<Edge>& edges) {
                const CouplingGraph g(n, edges);
                const auto [i0, j0] = find_removable_pair(g);
                REQUIRE(i0 != j0);
                REQUIRE(oracles::connected_without(n, edges, i0));
                REQUIRE(oracles::connected_without(n, edges, j0));
            });
        }
    }
}

TEST_CASE("named generators produce the expected shapes") {
    SECTION("chain") {
        const CouplingGraph g = make_chain(5);
        REQUIRE(g.edges().size() == 4);
        for (std::size_t t = 0; t < 4; ++t) {
            CHECK(g.edges()[t].i == static_cast<int>(t));
            CHECK(g.edges()[t].j == static_cast<int>(t) + 1);
        }
    }
    SECTION("ring closes the loop") {
        const CouplingGraph g = make_ring(5);
        REQUIRE(g.edges().size() == 5);
        for (int v = 0; v < 5; ++v) {
            CHECK(g.adjacency()[static_cast<std::size_t>(v)].size() == 2);
        }
        CHECK_THROWS_AS(make_ring(2), InvalidParameter);
    }
    SECTION("grid has rows*cols vertices and the lattice edge count") {
        const CouplingGraph g = make_grid(3, 4);
        CHECK(g.vertex_count() == 12);
        CHECK(g.edges().size() == 3 * 3 + 2 * 4);  // horizontal + vertical
    }
    SECTION("complete graph has all pairs") {
        const CouplingGraph g = make_complete(6);
        CHECK(g.edges().size() == 15);
    }
    SECTION("random graphs are connected and seed-deterministic") {
        for (std::uint64_t seed : {7ULL, 8ULL, 9ULL}) {
            const CouplingGraph a = make_random_connected(9, 0.4, seed);
            const CouplingGraph b = make_random_connected(9, 0.4, seed);
            REQUIRE(a.edges().size() == b.edges().size());
            for (std::size_t t = 0; t < a.edges().size(); ++t) {
                CHECK(a.edges()[t] == b.edges()[t]);
            }
            CHECK(oracles::connected(9, a.edges()));
        }
        // prob 0 keeps only the spanning tree; prob 1 is complete
        CHECK(make_random_connected(8, 0.0, 3).edges().size() == 7);
        CHECK(make_random_connected(8, 1.0, 3).edges().size() == 28);
    }
}

TEST_CASE("coupling rules") {
    GeneratorSpec spec;
    spec.kind = GeneratorSpec::Kind::ring;
    spec.n = 8;
    SECTION("uniform assigns the same J everywhere") {
        const CouplingGraph g = generate(spec, CouplingRule::uniform(1.5));
        for (const Edge& e : g.edges()) CHECK(e.coupling == 1.5);
        CHECK_THROWS_AS(generate(spec, CouplingRule::uniform(0.0)), NonPositiveCoupling);
    }
    SECTION("random couplings stay in (lo, hi] and repeat per seed") {
        const CouplingGraph a = generate(spec, CouplingRule::random_in(0.5, 2.0, 3));
        const CouplingGraph b = generate(spec, CouplingRule::random_in(0.5, 2.0, 3));
        bool saw_distinct = false;
        for (std::size_t t = 0; t < a.edges().size(); ++t) {
            CHECK(a.edges()[t].coupling > 0.5);
            CHECK(a.edges()[t].coupling <= 2.0);
            CHECK(a.edges()[t].coupling == b.edges()[t].coupling);
            if (t > 0 && a.edges()[t].coupling != a.edges()[0].coupling) {
                saw_distinct = true;
            }
        }
        CHECK(saw_distinct);
        // bad ranges surface when couplings are drawn, not at rule construction
        CHECK_THROWS_AS(generate(spec, CouplingRule::random_in(2.0, 0.5, 3)),
                        InvalidParameter);
        CHECK_THROWS_AS(generate(spec, CouplingRule::random_in(-1.0, 1.0, 3)),
                        InvalidParameter);
    }
}

TEST_CASE("edge list round-trips through text") {
    const CouplingGraph g = make_random_connected(7, 0.5, 21, CouplingRule::random_in(0.1, 2.0, 4));
    std::ostringstream out;
    write_edge_list(g, out);
    std::istringstream in(out.str());
    const CouplingGraph back = parse_edge_list(in);
    REQUIRE(back.vertex_count() == g.vertex_count());
    REQUIRE(back.edges().size() == g.edges().size());
    for (std::size_t t = 0; t < g.edges().size(); ++t) {
        CHECK(back.edges()[t] == g.edges()[t]);
    }
}

TEST_CASE("parser reports line numbers") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return parse_edge_list(in);
    };
    SECTION("comments and blank lines are fine") {
        const CouplingGraph g = parse("# header\n\nN 2\n  # indented comment\nE 0 1 2.5\n");
        CHECK(g.vertex_count() == 2);
        CHECK(g.edges()[0].coupling == 2.5);
    }
    SECTION("failures carry the offending line") {
        CHECK_THROWS_WITH(parse("E 0 1 1.0\n"), Catch::Matchers::ContainsSubstring("line 1"));
        CHECK_THROWS_WITH(parse("N 2\nN 3\n"), Catch::Matchers::ContainsSubstring("line 2"));
        CHECK_THROWS_WITH(parse("N 2\nE 0 1\n"), Catch::Matchers::ContainsSubstring("line 2"));
        CHECK_THROWS_WITH(parse("N 2\nE 0 1 1.0 extra\n"),
                          Catch::Matchers::ContainsSubstring("line 2"));
        CHECK_THROWS_WITH(parse("N 2\nQ 0 1\n"), Catch::Matchers::ContainsSubstring("line 2"));
        CHECK_THROWS_AS(parse(""), ParseError);
        CHECK_THROWS_AS(parse("N two\n"), ParseError);
    }
    SECTION("semantic validation still applies") {
        CHECK_THROWS_AS(parse("N 4\nE 0 1 1.0\nE 2 3 1.0\n"), DisconnectedGraph);
        CHECK_THROWS_AS(parse("N 2\nE 0 1 -1.0\n"), NonPositiveCoupling);
    }
}

TEST_CASE("load_edge_list wraps file errors") {
    CHECK_THROWS_AS(load_edge_list("/nonexistent/ferro-missing.txt"), IoError);
}
