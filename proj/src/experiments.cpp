#include "monostat/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "monostat/rng.hpp"

namespace monostat {

namespace {

std::uint64_t pair_index(int u, int v) {
    // u < v
    return static_cast<std::uint64_t>(v) * (static_cast<std::uint64_t>(v) - 1) / 2 + u;
}

}  // namespace

Graph erdos_renyi(int n, double p, std::uint64_t seed, std::uint64_t salt) {
    require_input(n >= 0, "erdos_renyi: negative vertex count");
    require_input(p >= 0.0 && p <= 1.0, "erdos_renyi: p must lie in [0,1]");
    std::vector<std::pair<int, int>> edges;
    for (int v = 1; v < n; ++v)
        for (int u = 0; u < v; ++u)
            if (keyed_uniform(seed, stream::layer_edges ^ salt, pair_index(u, v)) < p)
                edges.emplace_back(u, v);
    return Graph(n, std::move(edges));
}

Multiplex sample_correlated_er(int n, double p, double q, double rho, std::uint64_t seed) {
    require_input(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0,
                  "sample_correlated_er: marginals must lie in [0,1]");
    const double p12 = rho + p * q;
    const double lo = std::max(p + q - 1.0, 0.0);
    const double hi = std::min(p, q);
    require_input(p12 >= lo - 1e-12 && p12 <= hi + 1e-12,
                  "sample_correlated_er: joint probability rho + p q outside [max(p+q-1,0), "
                  "min(p,q)]");
    // per pair: one uniform decides (both, only layer 1, only layer 2, none)
    const double both = std::clamp(p12, lo, hi);
    const double only1 = p - both;
    const double only2 = q - both;
    std::vector<std::pair<int, int>> e1, e2;
    for (int v = 1; v < n; ++v)
        for (int u = 0; u < v; ++u) {
            const double r = keyed_uniform(seed, stream::layer_edges, pair_index(u, v));
            if (r < both) {
                e1.emplace_back(u, v);
                e2.emplace_back(u, v);
            } else if (r < both + only1) {
                e1.emplace_back(u, v);
            } else if (r < both + only1 + only2) {
                e2.emplace_back(u, v);
            }
        }
    return Multiplex(n, {Graph(n, std::move(e1)), Graph(n, std::move(e2))});
}

Multiplex complement_multiplex(int n, double p, std::uint64_t seed) {
    Graph g = erdos_renyi(n, p, seed);
    Graph gc = complement(g);
    return Multiplex(n, {std::move(g), std::move(gc)});
}

std::pair<Multiplex, Multiplex> path_blowup_multiplexes(int group) {
    require_input(group >= 1, "path_blowup_multiplexes: group size must be positive");
    const int n = 4 * group;
    auto band = [&](std::vector<std::pair<int, int>>& edges, int ga, int gb) {
        for (int u = ga * group; u < (ga + 1) * group; ++u)
            for (int v = gb * group; v < (gb + 1) * group; ++v) edges.emplace_back(u, v);
    };
    std::vector<std::pair<int, int>> e1, e2, e3;
    band(e1, 0, 1);
    band(e1, 1, 2);
    band(e1, 2, 3);
    band(e2, 0, 1);
    band(e3, 1, 2);
    Graph g1(n, std::move(e1)), g2(n, std::move(e2)), g3(n, std::move(e3));
    Multiplex a(n, {g1, std::move(g2)});
    Multiplex b(n, {std::move(g1), std::move(g3)});
    return {std::move(a), std::move(b)};
}

std::array<StepKernel, 3> path_blowup_kernels() {
    const std::vector<double> mu(4, 0.25);
    auto bands = [&](std::initializer_list<std::pair<int, int>> list) {
        std::vector<double> v(16, 0.0);
        for (auto [i, j] : list) {
            v[static_cast<size_t>(i) * 4 + j] = 1.0;
            v[static_cast<size_t>(j) * 4 + i] = 1.0;
        }
        return make_step_graphon(mu, std::move(v));
    };
    return {bands({{0, 1}, {1, 2}, {2, 3}}), bands({{0, 1}}), bands({{1, 2}})};
}

// ---- summaries ----

EmpiricalDistribution summarize(std::vector<double> data, int d) {
    require_input(d >= 1, "summarize: dimension must be positive");
    require_input(data.size() % d == 0, "summarize: data size must be a multiple of d");
    EmpiricalDistribution out;
    out.d = d;
    out.draws = static_cast<std::int64_t>(data.size()) / d;
    out.data = std::move(data);
    const std::int64_t n = out.draws;
    require_input(n >= 2, "summarize: needs at least two draws");
    const double invn = 1.0 / static_cast<double>(n);

    auto value = [&](std::int64_t row, int i) { return out.data[row * d + i]; };
    std::vector<double> mean(d, 0.0);
    for (int i = 0; i < d; ++i) {
        Kahan acc;
        for (std::int64_t r = 0; r < n; ++r) acc.add(value(r, i));
        mean[i] = acc.value() * invn;
    }

    // helper: mean and standard error of an arbitrary per-draw functional
    auto stat_of = [&](const std::string& name, auto&& f) {
        Kahan s, ss;
        for (std::int64_t r = 0; r < n; ++r) {
            const double x = f(r);
            s.add(x);
            ss.add(x * x);
        }
        const double m = s.value() * invn;
        const double var = std::max(0.0, ss.value() * invn - m * m);
        out.stats.push_back({name, m, std::sqrt(var * invn)});
    };

    for (int i = 0; i < d; ++i)
        stat_of("mean[" + std::to_string(i) + "]", [&](std::int64_t r) { return value(r, i); });
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
            stat_of("cov[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                    [&](std::int64_t r) {
                        return (value(r, i) - mean[i]) * (value(r, j) - mean[j]);
                    });
    for (int i = 0; i < d; ++i)
        stat_of("central3[" + std::to_string(i) + "]", [&](std::int64_t r) {
            const double x = value(r, i) - mean[i];
            return x * x * x;
        });
    for (int i = 0; i < d; ++i)
        stat_of("central4[" + std::to_string(i) + "]", [&](std::int64_t r) {
            const double x = value(r, i) - mean[i];
            return x * x * x * x;
        });
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            stat_of("diff4[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                    [&](std::int64_t r) { return sq(sq(value(r, i) - value(r, j))); });
    return out;
}

EmpiricalDistribution mc_empirical(const std::vector<Graph>& hs, const Multiplex& m, int c,
                                   std::int64_t colorings, std::uint64_t seed,
                                   const Parallel& par) {
    const int d = m.layer_count();
    require_input(hs.size() == static_cast<size_t>(d), "mc_empirical: one pattern per layer");
    require_input(c >= 2, "mc_empirical: needs c >= 2");
    require_input(colorings >= 2, "mc_empirical: needs at least two colorings");
    const int n = m.vertex_count();

    // per-layer constants of the standardization
    std::vector<double> et(d), scale(d);
    for (int i = 0; i < d; ++i) {
        et[i] = expected_count(hs[i], m.layers[i], c);
        const int mv = hs[i].vertex_count();
        scale[i] = static_cast<double>(automorphism_count(hs[i])) *
                   std::pow(static_cast<double>(c), mv - 1.5) /
                   std::pow(static_cast<double>(n), mv - 1);
    }

    std::vector<double> data(static_cast<size_t>(colorings) * d);
    constexpr std::int64_t kColorChunk = 64;
    const std::int64_t chunks = chunk_count(colorings, kColorChunk);
    par.run_chunks(chunks, [&](std::int64_t ci) {
        Rng rng(seed, chunk_key(stream::coloring, static_cast<std::uint64_t>(ci)));
        const std::int64_t lo = ci * kColorChunk;
        const std::int64_t hi = std::min(colorings, lo + kColorChunk);
        std::vector<std::uint8_t> colors(n);
        for (std::int64_t dr = lo; dr < hi; ++dr) {
            for (int v = 0; v < n; ++v) colors[v] = static_cast<std::uint8_t>(rng.below(c));
            const Coloring x(c, colors);
            for (int i = 0; i < d; ++i) {
                const double t = static_cast<double>(count_monochromatic(hs[i], m.layers[i], x));
                data[static_cast<size_t>(dr) * d + i] = scale[i] * (t - et[i]);
            }
        }
    });
    return summarize(std::move(data), d);
}

// ---- comparisons ----

namespace {

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const size_t na = a.size(), nb = b.size();
    size_t i = 0, j = 0;
    double best = 0.0;
    // step past whole tie groups on both sides before comparing the CDFs, so
    // repeated values (and identical samples) are handled exactly
    while (i < na && j < nb) {
        const double x = std::min(a[i], b[j]);
        while (i < na && a[i] == x) ++i;
        while (j < nb && b[j] == x) ++j;
        best = std::max(best, std::abs(static_cast<double>(i) / na -
                                       static_cast<double>(j) / nb));
    }
    return best;
}

}  // namespace

std::vector<GapRow> compare(const EmpiricalDistribution& emp, const EmpiricalDistribution& lim) {
    require_input(emp.d == lim.d, "compare: dimension mismatch");
    require_input(emp.stats.size() == lim.stats.size(), "compare: summary shape mismatch");
    std::vector<GapRow> rows;
    rows.reserve(emp.stats.size() + emp.d);
    for (size_t s = 0; s < emp.stats.size(); ++s) {
        const SummaryStat& a = emp.stats[s];
        const SummaryStat& b = lim.stats[s];
        require_input(a.name == b.name, "compare: summary name mismatch");
        GapRow row;
        row.name = a.name;
        row.empirical = a.value;
        row.limit = b.value;
        row.gap = a.value - b.value;
        row.se = std::sqrt(sq(a.se) + sq(b.se));
        rows.push_back(std::move(row));
    }
    for (int i = 0; i < emp.d; ++i) {
        std::vector<double> a(emp.draws), b(lim.draws);
        for (std::int64_t r = 0; r < emp.draws; ++r) a[r] = emp.data[r * emp.d + i];
        for (std::int64_t r = 0; r < lim.draws; ++r) b[r] = lim.data[r * lim.d + i];
        GapRow row;
        row.name = "ks[" + std::to_string(i) + "]";
        row.empirical = ks_statistic(std::move(a), std::move(b));
        row.limit = 0.0;
        row.gap = row.empirical;
        row.se = std::sqrt(static_cast<double>(emp.draws + lim.draws) /
                           (static_cast<double>(emp.draws) * static_cast<double>(lim.draws)));
        rows.push_back(std::move(row));
    }
    return rows;
}

void tag_acceptance_rows(std::vector<GapRow>& rows, const std::vector<std::string>& prefixes,
                         double multiplier) {
    for (GapRow& row : rows)
        for (const std::string& p : prefixes)
            if (row.name.rfind(p, 0) == 0) {
                row.acceptance = true;
                row.multiplier = multiplier;
            }
}

bool report_ok(const ExperimentReport& report) {
    for (const GapRow& row : report.rows)
        if (row.acceptance && std::abs(row.gap) > row.multiplier * row.se) return false;
    return true;
}

std::string report_to_json(const ExperimentReport& report) {
    nlohmann::ordered_json j;
    j["config"] = nlohmann::ordered_json::parse(report.config_json);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const GapRow& row : report.rows) {
        nlohmann::ordered_json r;
        r["name"] = row.name;
        r["empirical"] = row.empirical;
        r["limit"] = row.limit;
        r["gap"] = row.gap;
        r["stderr"] = row.se;
        r["acceptance"] = row.acceptance;
        if (row.acceptance) r["multiplier"] = row.multiplier;
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    j["ok"] = report_ok(report);
    return j.dump(2) + "\n";
}

std::string report_to_csv(const ExperimentReport& report) {
    std::string out = "name,empirical,limit,gap,stderr\n";
    for (const GapRow& row : report.rows) {
        out += row.name;
        out += ',';
        out += format_double(row.empirical);
        out += ',';
        out += format_double(row.limit);
        out += ',';
        out += format_double(row.gap);
        out += ',';
        out += format_double(row.se);
        out += '\n';
    }
    return out;
}

}  // namespace monostat
