#pragma once

// Finite simple graphs, multiplex collections of them on a shared vertex set,
// and vertex colorings.
//
// Conventions: vertices are 0-based contiguous integers internally and in the
// JSON files; colors are stored 0-based but serialized 1-based (values in
// {1,...,c}) to match the usual statistical notation.  Edges are kept as a
// sorted list of (u,v) with u < v, plus bit-packed adjacency rows for the hot
// counting loops.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "monostat/errors.hpp"

namespace monostat {

class Graph {
  public:
    Graph() = default;
    // Validates: n >= 0, endpoints in range, no self-loops, no duplicates
    // (after normalising to u < v).
    Graph(int n, std::vector<std::pair<int, int>> edge_list);

    int vertex_count() const { return n_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

    bool has_edge(int u, int v) const {
        return u != v && (row(u)[v >> 6] >> (v & 63)) & 1u;
    }
    int degree(int v) const;
    std::vector<int> neighbors(int v) const;

    // Bit-packed adjacency row of v: words_per_row() 64-bit words.
    const std::uint64_t* row(int v) const { return rows_.data() + static_cast<size_t>(v) * words_; }
    int words_per_row() const { return words_; }

    bool operator==(const Graph& o) const { return n_ == o.n_ && edges_ == o.edges_; }

  private:
    int n_ = 0;
    int words_ = 0;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::uint64_t> rows_;
};

// d graphs on one vertex set.
struct Multiplex {
    Multiplex() = default;
    Multiplex(int n, std::vector<Graph> layer_list);

    int vertex_count() const { return n; }
    int layer_count() const { return static_cast<int>(layers.size()); }

    int n = 0;
    std::vector<Graph> layers;
};

// A c-coloring of n vertices; entries stored 0-based in [0, c).
struct Coloring {
    Coloring() = default;
    Coloring(int c_, std::vector<std::uint8_t> colors_);

    int vertex_count() const { return static_cast<int>(colors.size()); }

    int c = 0;
    std::vector<std::uint8_t> colors;
};

// ---- operations ----

// |Aut(H)| by exhaustive search over vertex permutations with pruning.
// Budget: |V| <= 10.
long long automorphism_count(const Graph& h);

// Glue h2 onto h1 by identifying the ordered pin pair (a2,b2) of h2 with
// (a1,b1) of h1; all other vertices stay distinct.  The result is simple:
// coincident edges are kept once.  Pins must satisfy a!=b in each graph.
Graph graph_join(const Graph& h1, const Graph& h2, std::pair<int, int> pins1,
                 std::pair<int, int> pins2);

Graph complement(const Graph& g);

bool is_connected(const Graph& g);

// Small pattern library: k2 k3 k4 p3 p4 c4 c5 (paths/cycles by vertex count).
Graph pattern_graph(const std::string& name);
Graph complete_graph(int k);
Graph path_graph(int k);
Graph cycle_graph(int k);

// ---- JSON ----
// graph      {"n": 4, "edges": [[0,1],[1,2]]}
// multiplex  {"n": 4, "layers": [<graph>, ...]}   (each layer same n)
// coloring   {"c": 2, "colors": [1,2,1,1]}        (1-based values)

Graph parse_graph_json(const std::string& text);
std::string graph_to_json(const Graph& g);
Multiplex parse_multiplex_json(const std::string& text);
std::string multiplex_to_json(const Multiplex& m);
Coloring parse_coloring_json(const std::string& text);
std::string coloring_to_json(const Coloring& x);

}  // namespace monostat
