#include "monostat/graphs.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include "json.hpp"

namespace monostat {

Graph::Graph(int n, std::vector<std::pair<int, int>> edge_list) : n_(n) {
    require_input(n >= 1, "graph: needs at least one vertex");
    for (auto& [u, v] : edge_list) {
        require_input(u >= 0 && u < n && v >= 0 && v < n, "graph: edge endpoint out of range");
        require_input(u != v, "graph: self-loops are not allowed");
        if (u > v) std::swap(u, v);
    }
    std::sort(edge_list.begin(), edge_list.end());
    require_input(std::adjacent_find(edge_list.begin(), edge_list.end()) == edge_list.end(),
                  "graph: duplicate edge");
    edges_ = std::move(edge_list);
    words_ = (n + 63) / 64;
    rows_.assign(static_cast<size_t>(n) * words_, 0ull);
    for (const auto& [u, v] : edges_) {
        rows_[static_cast<size_t>(u) * words_ + (v >> 6)] |= 1ull << (v & 63);
        rows_[static_cast<size_t>(v) * words_ + (u >> 6)] |= 1ull << (u & 63);
    }
}

int Graph::degree(int v) const {
    int d = 0;
    const std::uint64_t* r = row(v);
    for (int w = 0; w < words_; ++w) d += std::popcount(r[w]);
    return d;
}

std::vector<int> Graph::neighbors(int v) const {
    std::vector<int> out;
    const std::uint64_t* r = row(v);
    for (int w = 0; w < words_; ++w) {
        std::uint64_t bits = r[w];
        while (bits) {
            out.push_back(w * 64 + std::countr_zero(bits));
            bits &= bits - 1;
        }
    }
    return out;
}

Multiplex::Multiplex(int n_, std::vector<Graph> layer_list) : n(n_), layers(std::move(layer_list)) {
    require_input(n >= 0, "multiplex: vertex count must be nonnegative");
    require_input(!layers.empty(), "multiplex: needs at least one layer");
    for (const Graph& g : layers)
        require_input(g.vertex_count() == n, "multiplex: layer vertex count mismatch");
}

Coloring::Coloring(int c_, std::vector<std::uint8_t> colors_) : c(c_), colors(std::move(colors_)) {
    require_input(c >= 2, "coloring: needs at least two colors");
    require_input(c <= 255, "coloring: more than 255 colors not supported");
    for (auto v : colors) require_input(v < c, "coloring: color value out of range");
}

namespace {

// Backtracking over images of vertices 0..n-1 in order; prefix must preserve
// adjacency and non-adjacency both ways.
long long count_automorphisms_rec(const Graph& h, std::vector<int>& image, std::vector<bool>& used,
                                  int depth) {
    const int n = h.vertex_count();
    if (depth == n) return 1;
    long long total = 0;
    for (int cand = 0; cand < n; ++cand) {
        if (used[cand]) continue;
        bool ok = true;
        for (int prev = 0; prev < depth; ++prev) {
            if (h.has_edge(prev, depth) != h.has_edge(image[prev], cand)) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        image[depth] = cand;
        used[cand] = true;
        total += count_automorphisms_rec(h, image, used, depth + 1);
        used[cand] = false;
    }
    return total;
}

}  // namespace

long long automorphism_count(const Graph& h) {
    const int n = h.vertex_count();
    require_budget(n <= 10, "automorphism_count: exhaustive search limited to 10 vertices");
    if (n == 0) return 1;
    std::vector<int> image(n, -1);
    std::vector<bool> used(n, false);
    return count_automorphisms_rec(h, image, used, 0);
}

Graph graph_join(const Graph& h1, const Graph& h2, std::pair<int, int> pins1,
                 std::pair<int, int> pins2) {
    const int n1 = h1.vertex_count(), n2 = h2.vertex_count();
    auto [a1, b1] = pins1;
    auto [a2, b2] = pins2;
    require_input(a1 >= 0 && a1 < n1 && b1 >= 0 && b1 < n1, "graph_join: pin out of range");
    require_input(a2 >= 0 && a2 < n2 && b2 >= 0 && b2 < n2, "graph_join: pin out of range");
    require_input(a1 != b1 && a2 != b2, "graph_join: pins must be distinct vertices");

    // h1 keeps its labels; h2's pins map onto h1's, the rest are appended.
    std::vector<int> map2(n2);
    int next = n1;
    for (int v = 0; v < n2; ++v) {
        if (v == a2)
            map2[v] = a1;
        else if (v == b2)
            map2[v] = b1;
        else
            map2[v] = next++;
    }
    std::vector<std::pair<int, int>> edges = h1.edges();
    for (auto [u, v] : h2.edges()) {
        int mu = map2[u], mv = map2[v];
        if (mu > mv) std::swap(mu, mv);
        edges.emplace_back(mu, mv);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return Graph(next, std::move(edges));
}

Graph complement(const Graph& g) {
    const int n = g.vertex_count();
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (!g.has_edge(u, v)) edges.emplace_back(u, v);
    return Graph(n, std::move(edges));
}

bool is_connected(const Graph& g) {
    const int n = g.vertex_count();
    if (n <= 1) return true;
    std::vector<bool> seen(n, false);
    std::vector<int> stack{0};
    seen[0] = true;
    int reached = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : g.neighbors(v)) {
            if (!seen[w]) {
                seen[w] = true;
                ++reached;
                stack.push_back(w);
            }
        }
    }
    return reached == n;
}

Graph complete_graph(int k) {
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < k; ++u)
        for (int v = u + 1; v < k; ++v) edges.emplace_back(u, v);
    return Graph(k, std::move(edges));
}

Graph path_graph(int k) {
    std::vector<std::pair<int, int>> edges;
    for (int v = 0; v + 1 < k; ++v) edges.emplace_back(v, v + 1);
    return Graph(k, std::move(edges));
}

Graph cycle_graph(int k) {
    require_input(k >= 3, "cycle_graph: needs at least 3 vertices");
    std::vector<std::pair<int, int>> edges;
    for (int v = 0; v + 1 < k; ++v) edges.emplace_back(v, v + 1);
    edges.emplace_back(0, k - 1);
    return Graph(k, std::move(edges));
}

Graph pattern_graph(const std::string& name) {
    if (name == "k2") return complete_graph(2);
    if (name == "k3") return complete_graph(3);
    if (name == "k4") return complete_graph(4);
    if (name == "p3") return path_graph(3);
    if (name == "p4") return path_graph(4);
    if (name == "c4") return cycle_graph(4);
    if (name == "c5") return cycle_graph(5);
    throw input_error("unknown pattern '" + name + "' (expected k2|k3|k4|p3|p4|c4|c5)");
}

// ---- JSON ----

namespace {

using nlohmann::json;

json parse_json_text(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // e.what() carries line/column of the failure
        throw input_error(std::string(what) + ": " + e.what());
    }
}

Graph graph_from_json(const json& j) {
    require_input(j.is_object() && j.contains("n") && j.contains("edges"),
                  "graph: expected object with fields n, edges");
    require_input(j["n"].is_number_integer(), "graph: n must be an integer");
    const int n = j["n"].get<int>();
    require_input(j["edges"].is_array(), "graph: edges must be an array");
    std::vector<std::pair<int, int>> edges;
    edges.reserve(j["edges"].size());
    for (const auto& e : j["edges"]) {
        require_input(e.is_array() && e.size() == 2 && e[0].is_number_integer() &&
                          e[1].is_number_integer(),
                      "graph: each edge must be a pair of integers");
        edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return Graph(n, std::move(edges));
}

json graph_to_json_obj(const Graph& g) {
    json edges = json::array();
    for (auto [u, v] : g.edges()) edges.push_back(json::array({u, v}));
    return json{{"n", g.vertex_count()}, {"edges", std::move(edges)}};
}

}  // namespace

Graph parse_graph_json(const std::string& text) {
    return graph_from_json(parse_json_text(text, "graph"));
}

std::string graph_to_json(const Graph& g) { return graph_to_json_obj(g).dump(); }

Multiplex parse_multiplex_json(const std::string& text) {
    json j = parse_json_text(text, "multiplex");
    require_input(j.is_object() && j.contains("n") && j.contains("layers"),
                  "multiplex: expected object with fields n, layers");
    require_input(j["n"].is_number_integer(), "multiplex: n must be an integer");
    require_input(j["layers"].is_array() && !j["layers"].empty(),
                  "multiplex: layers must be a nonempty array");
    std::vector<Graph> layers;
    for (const auto& l : j["layers"]) layers.push_back(graph_from_json(l));
    return Multiplex(j["n"].get<int>(), std::move(layers));
}

std::string multiplex_to_json(const Multiplex& m) {
    json layers = json::array();
    for (const Graph& g : m.layers) layers.push_back(graph_to_json_obj(g));
    return json{{"n", m.n}, {"layers", std::move(layers)}}.dump();
}

Coloring parse_coloring_json(const std::string& text) {
    json j = parse_json_text(text, "coloring");
    require_input(j.is_object() && j.contains("c") && j.contains("colors"),
                  "coloring: expected object with fields c, colors");
    require_input(j["c"].is_number_integer(), "coloring: c must be an integer");
    const int c = j["c"].get<int>();
    require_input(c >= 2 && c <= 255, "coloring: c out of range");
    require_input(j["colors"].is_array(), "coloring: colors must be an array");
    std::vector<std::uint8_t> colors;
    colors.reserve(j["colors"].size());
    for (const auto& v : j["colors"]) {
        require_input(v.is_number_integer(), "coloring: color values must be integers");
        const int x = v.get<int>();
        require_input(x >= 1 && x <= c, "coloring: color value outside {1..c}");
        colors.push_back(static_cast<std::uint8_t>(x - 1));
    }
    return Coloring(c, std::move(colors));
}

std::string coloring_to_json(const Coloring& x) {
    json colors = json::array();
    for (auto v : x.colors) colors.push_back(static_cast<int>(v) + 1);
    return json{{"c", x.c}, {"colors", std::move(colors)}}.dump();
}

}  // namespace monostat
