#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>

#include "monostat/errors.hpp"
#include "monostat/graphs.hpp"

using namespace monostat;

TEST_CASE("graph construction normalizes and validates") {
    Graph g(4, {{2, 1}, {0, 3}});  // reversed endpoints are normalized
    CHECK(g.vertex_count() == 4);
    CHECK(g.edge_count() == 2);
    CHECK(g.has_edge(1, 2));
    CHECK(g.has_edge(2, 1));
    CHECK(g.has_edge(3, 0));
    CHECK_FALSE(g.has_edge(0, 1));
    CHECK(g.degree(1) == 1);
    CHECK(g.neighbors(3) == std::vector<int>{0});

    CHECK_THROWS_AS(Graph(3, {{0, 3}}), input_error);           // out of range
    CHECK_THROWS_AS(Graph(3, {{1, 1}}), input_error);           // self-loop
    CHECK_THROWS_AS(Graph(3, {{1, 2}, {2, 1}}), input_error);   // duplicate
    CHECK_THROWS_AS(Graph(0, {}), input_error);                 // empty vertex set
}

TEST_CASE("pattern library matches hand counts") {
    struct Row {
        const char* name;
        int n, e;
        long long aut;
    };
    // |Aut|: complete k!, path 2, cycle 2k.
    const Row rows[] = {
        {"k2", 2, 1, 2},  {"k3", 3, 3, 6},  {"k4", 4, 6, 24}, {"p3", 3, 2, 2},
        {"p4", 4, 3, 2},  {"c4", 4, 4, 8},  {"c5", 5, 5, 10},
    };
    for (const Row& r : rows) {
        CAPTURE(r.name);
        const Graph h = pattern_graph(r.name);
        CHECK(h.vertex_count() == r.n);
        CHECK(h.edge_count() == r.e);
        CHECK(automorphism_count(h) == r.aut);
        CHECK(is_connected(h));
    }
    CHECK_THROWS_AS(pattern_graph("k9000"), input_error);
}

TEST_CASE("automorphism count divides factorial and handles asymmetry") {
    // paw graph: triangle plus a pendant edge; only the two triangle vertices
    // not touching the pendant can swap.
    const Graph paw(4, {{0, 1}, {1, 2}, {2, 0}, {0, 3}});
    CHECK(automorphism_count(paw) == 2);
    // disjoint union of an edge and an isolated vertex: swap edge ends only.
    const Graph eplus(3, {{0, 1}});
    CHECK(automorphism_count(eplus) == 2);
    long long fact = 1;
    for (int i = 2; i <= paw.vertex_count(); ++i) fact *= i;
    CHECK(fact % automorphism_count(paw) == 0);
}

TEST_CASE("graph join glues pin pairs") {
    const Graph k2 = pattern_graph("k2");
    const Graph p3 = pattern_graph("p3");
    // gluing the edge of K2 onto the end edge of P3 reproduces P3
    const Graph j = graph_join(p3, k2, {0, 1}, {0, 1});
    CHECK(j.vertex_count() == 3);
    CHECK(j.edge_count() == 2);
    // gluing K3 to K3 along an edge: the diamond, 4 vertices, 5 edges
    const Graph k3 = pattern_graph("k3");
    const Graph d = graph_join(k3, k3, {0, 1}, {0, 1});
    CHECK(d.vertex_count() == 4);
    CHECK(d.edge_count() == 5);
    // edge count can only drop through overlap
    CHECK(d.edge_count() <= k3.edge_count() * 2);
    CHECK(d.edge_count() >= k3.edge_count() * 2 - 1);
    CHECK_THROWS_AS(graph_join(k3, k3, {1, 1}, {0, 1}), input_error);
}

TEST_CASE("complement is an involution") {
    const Graph g(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}});
    const Graph gc = complement(g);
    CHECK(gc.edge_count() == 5 * 4 / 2 - 5);
    for (int u = 0; u < 5; ++u)
        for (int v = u + 1; v < 5; ++v) CHECK(g.has_edge(u, v) != gc.has_edge(u, v));
    CHECK(complement(gc) == g);
}

TEST_CASE("connectivity") {
    CHECK(is_connected(pattern_graph("c5")));
    CHECK_FALSE(is_connected(Graph(4, {{0, 1}, {2, 3}})));
    CHECK_FALSE(is_connected(Graph(2, {})));
}

TEST_CASE("multiplex and coloring validation") {
    const Graph a(3, {{0, 1}});
    const Graph b(3, {{1, 2}});
    const Multiplex m(3, {a, b});
    CHECK(m.layer_count() == 2);
    CHECK_THROWS_AS(Multiplex(4, {a}), input_error);  // size mismatch
    CHECK_THROWS_AS(Multiplex(3, {}), input_error);

    const Coloring x(3, {0, 2, 1});
    CHECK(x.vertex_count() == 3);
    CHECK_THROWS_AS(Coloring(2, {0, 2}), input_error);  // color value out of range
    CHECK_THROWS_AS(Coloring(1, {0}), input_error);     // needs at least two colors
}

TEST_CASE("graph json round trip and error reporting") {
    const Graph g(4, {{0, 1}, {2, 3}, {1, 2}});
    const Graph back = parse_graph_json(graph_to_json(g));
    CHECK(back == g);

    CHECK_THROWS_AS(parse_graph_json("{\"n\": 2"), input_error);        // truncated
    CHECK_THROWS_AS(parse_graph_json("{\"edges\": []}"), input_error);  // missing n
    CHECK_THROWS_AS(parse_graph_json("{\"n\": 2, \"edges\": [[0, 2]]}"), input_error);
    // parse errors carry a position
    try {
        parse_graph_json("{\"n\": 2,, }");
        CHECK(false);
    } catch (const input_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line") != std::string::npos);
        CHECK(msg.find("column") != std::string::npos);
    }
}

TEST_CASE("coloring json uses one-based color values") {
    const Coloring x = parse_coloring_json("{\"c\": 3, \"colors\": [1, 3, 2]}");
    CHECK(x.c == 3);
    CHECK(x.colors == std::vector<std::uint8_t>{0, 2, 1});
    const Coloring back = parse_coloring_json(coloring_to_json(x));
    CHECK(back.colors == x.colors);
    CHECK_THROWS_AS(parse_coloring_json("{\"c\": 2, \"colors\": [0, 1]}"), input_error);
    CHECK_THROWS_AS(parse_coloring_json("{\"c\": 2, \"colors\": [1, 3]}"), input_error);
}

TEST_CASE("multiplex json round trip") {
    const Multiplex m(3, {Graph(3, {{0, 1}}), Graph(3, {{1, 2}, {0, 2}})});
    const Multiplex back = parse_multiplex_json(multiplex_to_json(m));
    CHECK(back.n == 3);
    REQUIRE(back.layer_count() == 2);
    CHECK(back.layers[0] == m.layers[0]);
    CHECK(back.layers[1] == m.layers[1]);
    CHECK_THROWS_AS(parse_multiplex_json("{\"n\": 3, \"layers\": []}"), input_error);
}
