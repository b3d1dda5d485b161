#include "monostat/graphon.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "monostat/numeric.hpp"

namespace monostat {

namespace {

double pow_count(int n, int r) {
    double out = 1.0;
    for (int i = 0; i < r; ++i) out *= n;
    return out;
}

void validate_kernel(const StepKernel& kernel) {
    const int k = kernel.k();
    require_input(k >= 1, "step kernel: needs at least one block");
    require_input(kernel.values.size() == static_cast<size_t>(k) * k,
                  "step kernel: values must be a k x k table");
    double total = 0.0;
    for (double m : kernel.measures) {
        require_input(m > 0.0, "step kernel: block measures must be positive");
        total += m;
    }
    require_input(std::abs(total - 1.0) <= 1e-12, "step kernel: measures must sum to 1");
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            require_input(std::abs(kernel.at(i, j) - kernel.at(j, i)) <= 1e-12,
                          "step kernel: values must be symmetric");
    for (double v : kernel.values)
        require_input(std::abs(v) <= kernel.bound + 1e-12, "step kernel: value exceeds bound");
}

}  // namespace

StepKernel make_step_kernel(std::vector<double> measures, std::vector<double> values,
                            double bound) {
    StepKernel kernel;
    kernel.measures = std::move(measures);
    kernel.values = std::move(values);
    kernel.bound = bound;
    validate_kernel(kernel);
    return kernel;
}

StepKernel make_step_kernel(std::vector<double> measures, std::vector<double> values) {
    double bound = 0.0;
    for (double v : values) bound = std::max(bound, std::abs(v));
    return make_step_kernel(std::move(measures), std::move(values), bound);
}

StepKernel make_step_graphon(std::vector<double> measures, std::vector<double> values) {
    for (double v : values)
        require_input(v >= 0.0 && v <= 1.0, "step graphon: values must lie in [0,1]");
    return make_step_kernel(std::move(measures), std::move(values), 1.0);
}

StepKernel constant_graphon(double p) { return make_step_graphon({1.0}, {p}); }

StepKernel empirical_graphon(const Graph& g) {
    const int n = g.vertex_count();
    require_input(n >= 1, "empirical_graphon: empty graph");
    std::vector<double> measures(n, 1.0 / n);
    std::vector<double> values(static_cast<size_t>(n) * n, 0.0);
    for (auto [u, v] : g.edges()) {
        values[static_cast<size_t>(u) * n + v] = 1.0;
        values[static_cast<size_t>(v) * n + u] = 1.0;
    }
    return make_step_graphon(std::move(measures), std::move(values));
}

double hom_density(const Graph& f, const StepKernel& kernel) {
    const int m = f.vertex_count();
    const int k = kernel.k();
    if (m == 0) return 1.0;
    require_budget(pow_count(k, m) <= 2e8, "hom_density: k^|V(F)| too large");
    std::vector<int> phi(m, 0);
    Kahan acc;
    for (;;) {
        double prod = 1.0;
        for (int v = 0; v < m; ++v) prod *= kernel.measures[phi[v]];
        if (prod != 0.0)
            for (auto [u, v] : f.edges()) {
                prod *= kernel.at(phi[u], phi[v]);
                if (prod == 0.0) break;
            }
        acc.add(prod);
        int pos = 0;
        while (pos < m && ++phi[pos] == k) phi[pos++] = 0;
        if (pos == m) break;
    }
    return acc.value();
}

StepKernel two_point_kernel(const Graph& h, const StepKernel& kernel) {
    const int m = h.vertex_count();
    const int k = kernel.k();
    require_input(m >= 2, "two_point_kernel: pattern needs at least two vertices");
    require_budget(pow_count(k, m - 2) * k * k * m * m <= 5e8, "two_point_kernel: budget exceeded");

    std::vector<Kahan> acc(static_cast<size_t>(k) * k);
    std::vector<int> phi(m, 0);  // block assignment of all pattern vertices
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
            if (a == b) continue;
            // free vertices keep their odometer; pins are overwritten below
            std::vector<int> free_pos;
            for (int v = 0; v < m; ++v)
                if (v != a && v != b) free_pos.push_back(v);
            for (int x = 0; x < k; ++x) {
                for (int y = 0; y < k; ++y) {
                    phi[a] = x;
                    phi[b] = y;
                    for (int fp : free_pos) phi[fp] = 0;
                    Kahan cell;
                    for (;;) {
                        double prod = 1.0;
                        for (int fp : free_pos) prod *= kernel.measures[phi[fp]];
                        if (prod != 0.0)
                            for (auto [u, v] : h.edges()) {
                                prod *= kernel.at(phi[u], phi[v]);
                                if (prod == 0.0) break;
                            }
                        cell.add(prod);
                        size_t pos = 0;
                        while (pos < free_pos.size() && ++phi[free_pos[pos]] == k)
                            phi[free_pos[pos++]] = 0;
                        if (pos == free_pos.size()) break;
                    }
                    acc[static_cast<size_t>(x) * k + y].add(cell.value());
                }
            }
        }
    }
    std::vector<double> values(static_cast<size_t>(k) * k);
    for (size_t i = 0; i < values.size(); ++i) values[i] = acc[i].value();
    // numerical symmetrization: the pin sum is symmetric exactly, but the two
    // summation orders may differ in the last ulp
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            const double sym = 0.5 * (values[static_cast<size_t>(i) * k + j] +
                                      values[static_cast<size_t>(j) * k + i]);
            values[static_cast<size_t>(i) * k + j] = sym;
            values[static_cast<size_t>(j) * k + i] = sym;
        }
    const double bound = m * (m - 1) * std::pow(std::max(kernel.bound, 0.0), h.edge_count());
    return make_step_kernel(kernel.measures, std::move(values), bound);
}

namespace {

// Common refinement of two block partitions of [0,1]: returns refined block
// measures plus, per refined block, the source block in each input.
struct Refinement {
    std::vector<double> measures;
    std::vector<int> from1;
    std::vector<int> from2;
};

Refinement refine(const StepKernel& k1, const StepKernel& k2) {
    Refinement out;
    size_t i = 0, j = 0;
    double used1 = 0.0, used2 = 0.0;  // measure consumed within current blocks
    while (i < k1.measures.size() && j < k2.measures.size()) {
        const double rem1 = k1.measures[i] - used1;
        const double rem2 = k2.measures[j] - used2;
        const double step = std::min(rem1, rem2);
        if (step > 1e-15) {
            out.measures.push_back(step);
            out.from1.push_back(static_cast<int>(i));
            out.from2.push_back(static_cast<int>(j));
        }
        used1 += step;
        used2 += step;
        if (k1.measures[i] - used1 <= 1e-15) {
            ++i;
            used1 = 0.0;
        }
        if (j < k2.measures.size() && k2.measures[j] - used2 <= 1e-15) {
            ++j;
            used2 = 0.0;
        }
    }
    return out;
}

bool same_partition(const StepKernel& k1, const StepKernel& k2) {
    if (k1.k() != k2.k()) return false;
    for (int i = 0; i < k1.k(); ++i)
        if (std::abs(k1.measures[i] - k2.measures[i]) > 1e-12) return false;
    return true;
}

}  // namespace

double kernel_inner_product(const StepKernel& k1, const StepKernel& k2) {
    if (same_partition(k1, k2)) {
        const int k = k1.k();
        Kahan acc;
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                acc.add(k1.measures[i] * k1.measures[j] * k1.at(i, j) * k2.at(i, j));
        return acc.value();
    }
    const Refinement ref = refine(k1, k2);
    const int k = static_cast<int>(ref.measures.size());
    Kahan acc;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            acc.add(ref.measures[i] * ref.measures[j] * k1.at(ref.from1[i], ref.from1[j]) *
                    k2.at(ref.from2[i], ref.from2[j]));
    return acc.value();
}

StepKernel kernel_combine(double a, const StepKernel& k1, double b, const StepKernel& k2) {
    if (same_partition(k1, k2)) {
        std::vector<double> values(k1.values.size());
        for (size_t i = 0; i < values.size(); ++i)
            values[i] = a * k1.values[i] + b * k2.values[i];
        return make_step_kernel(k1.measures, std::move(values),
                                std::abs(a) * k1.bound + std::abs(b) * k2.bound);
    }
    const Refinement ref = refine(k1, k2);
    const int k = static_cast<int>(ref.measures.size());
    std::vector<double> values(static_cast<size_t>(k) * k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            values[static_cast<size_t>(i) * k + j] =
                a * k1.at(ref.from1[i], ref.from1[j]) + b * k2.at(ref.from2[i], ref.from2[j]);
    return make_step_kernel(ref.measures, std::move(values),
                            std::abs(a) * k1.bound + std::abs(b) * k2.bound);
}

StepKernel kernel_scale(double a, const StepKernel& k1) {
    std::vector<double> values(k1.values.size());
    for (size_t i = 0; i < values.size(); ++i) values[i] = a * k1.values[i];
    return make_step_kernel(k1.measures, std::move(values), std::abs(a) * k1.bound);
}

double cut_norm(const StepKernel& kernel) {
    const int k = kernel.k();
    require_budget(k <= 20, "cut_norm: exact enumeration limited to 20 blocks");
    // weighted entries
    std::vector<double> w(static_cast<size_t>(k) * k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            w[static_cast<size_t>(i) * k + j] = kernel.measures[i] * kernel.measures[j] *
                                                kernel.at(i, j);
    // Gray-code walk over S; col[j] = sum_{i in S} w[i][j].  For fixed S the
    // best T takes all positive columns (or all negative ones for the
    // absolute value).
    std::vector<double> col(k, 0.0);
    double best = 0.0;
    const unsigned total = 1u << k;
    unsigned gray = 0;
    for (unsigned step = 1; step < total; ++step) {
        const unsigned next = step ^ (step >> 1);
        const unsigned flipped = gray ^ next;
        const int i = std::countr_zero(flipped);
        const double sign = (next & flipped) ? 1.0 : -1.0;
        for (int j = 0; j < k; ++j) col[j] += sign * w[static_cast<size_t>(i) * k + j];
        gray = next;
        double pos = 0.0, neg = 0.0;
        for (int j = 0; j < k; ++j) {
            if (col[j] > 0.0)
                pos += col[j];
            else
                neg -= col[j];
        }
        best = std::max(best, std::max(pos, neg));
    }
    return best;
}

double cut_distance_aligned(const StepKernel& k1, const StepKernel& k2) {
    const int k = k1.k();
    require_input(k2.k() == k, "cut_distance_aligned: block counts differ");
    for (int i = 0; i < k; ++i) {
        require_input(std::abs(k1.measures[i] - 1.0 / k) <= 1e-12 &&
                          std::abs(k2.measures[i] - 1.0 / k) <= 1e-12,
                      "cut_distance_aligned: blocks must have equal measure 1/k");
    }
    require_budget(k <= 9, "cut_distance_aligned: permutation search limited to 9 blocks");

    std::vector<int> perm(k);
    for (int i = 0; i < k; ++i) perm[i] = i;
    double best = std::numeric_limits<double>::infinity();
    do {
        std::vector<double> values(static_cast<size_t>(k) * k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                values[static_cast<size_t>(i) * k + j] = k1.at(i, j) - k2.at(perm[i], perm[j]);
        best = std::min(best, cut_norm(make_step_kernel(k1.measures, std::move(values),
                                                        k1.bound + k2.bound)));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

double join_density_sum(const Graph& h1, const Graph& h2, const StepKernel& kernel) {
    const int m1 = h1.vertex_count(), m2 = h2.vertex_count();
    require_input(m1 >= 2 && m2 >= 2, "join_density_sum: patterns need at least two vertices");
    Kahan acc;
    for (int a1 = 0; a1 < m1; ++a1)
        for (int b1 = 0; b1 < m1; ++b1) {
            if (a1 == b1) continue;
            for (int a2 = 0; a2 < m2; ++a2)
                for (int b2 = 0; b2 < m2; ++b2) {
                    if (a2 == b2) continue;
                    acc.add(hom_density(graph_join(h1, h2, {a1, b1}, {a2, b2}), kernel));
                }
        }
    return acc.value();
}

std::vector<double> lipschitz_probe(const Graph& h, const StepKernel& w, const StepKernel& r,
                                    const std::vector<double>& ts) {
    const double denom_base = cut_norm(r);
    require_input(denom_base > 0.0, "lipschitz_probe: perturbation has zero cut norm");
    const StepKernel wh = two_point_kernel(h, w);
    std::vector<double> out;
    out.reserve(ts.size());
    for (double t : ts) {
        require_input(t > 0.0, "lipschitz_probe: scales must be positive");
        const StepKernel moved = two_point_kernel(h, kernel_combine(1.0, w, t, r));
        out.push_back(cut_norm(kernel_combine(1.0, moved, -1.0, wh)) / (t * denom_base));
    }
    return out;
}

StepKernel parse_kernel_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw input_error(std::string("kernel: ") + e.what());
    }
    require_input(j.is_object() && j.contains("measures") && j.contains("values"),
                  "kernel: expected object with fields measures, values");
    require_input(j["measures"].is_array() && j["values"].is_array(),
                  "kernel: measures and values must be arrays");
    std::vector<double> measures;
    for (const auto& m : j["measures"]) {
        require_input(m.is_number(), "kernel: measures must be numbers");
        measures.push_back(m.get<double>());
    }
    const size_t k = measures.size();
    require_input(j["values"].size() == k, "kernel: values must be a k x k table");
    std::vector<double> values;
    values.reserve(k * k);
    for (const auto& row : j["values"]) {
        require_input(row.is_array() && row.size() == k, "kernel: values must be a k x k table");
        for (const auto& v : row) {
            require_input(v.is_number(), "kernel: values must be numbers");
            values.push_back(v.get<double>());
        }
    }
    return make_step_kernel(std::move(measures), std::move(values));
}

std::string kernel_to_json(const StepKernel& kernel) {
    nlohmann::json measures = nlohmann::json::array();
    for (double m : kernel.measures) measures.push_back(m);
    nlohmann::json values = nlohmann::json::array();
    const int k = kernel.k();
    for (int i = 0; i < k; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < k; ++j) row.push_back(kernel.at(i, j));
        values.push_back(std::move(row));
    }
    return nlohmann::json{{"measures", std::move(measures)}, {"values", std::move(values)}}.dump();
}

}  // namespace monostat
