#include "monostat/counting.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

namespace monostat {

namespace {

double int_pow(double base, int e) {
    double out = 1.0;
    for (int i = 0; i < e; ++i) out *= base;
    return out;
}

// checked n^r as double for budget decisions
double pow_count(int n, int r) { return int_pow(static_cast<double>(n), r); }

template <class Fn>
void for_each_distinct_tuple(int n, int r, Fn&& fn) {
    std::vector<int> t(r, 0);
    std::vector<bool> used(n, false);
    int level = 0;
    t[0] = -1;
    while (level >= 0) {
        // advance the counter at this level to the next unused value
        int v = t[level] + 1;
        if (t[level] >= 0) used[t[level]] = false;
        while (v < n && used[v]) ++v;
        if (v >= n) {
            t[level] = -1;
            --level;
            continue;
        }
        t[level] = v;
        used[v] = true;
        if (level == r - 1) {
            fn(t.data());
        } else {
            ++level;
            t[level] = -1;
        }
    }
}

}  // namespace

TupleFunction make_dense_tuple_function(int r, int n, std::vector<double> table) {
    require_input(r >= 1 && n >= 1, "tuple function: bad arity or domain");
    require_input(r <= 3, "tuple function: dense storage is limited to arity 3");
    require_input(table.size() == static_cast<size_t>(pow_count(n, r)),
                  "tuple function: table size must be n^r");
    TupleFunction f;
    f.r = r;
    f.n = n;
    f.table = std::move(table);
    double b = 0.0;
    for (double v : f.table) b = std::max(b, std::abs(v));
    f.bound = b;
    return f;
}

TupleFunction make_closure_tuple_function(int r, int n, double bound,
                                          std::function<double(const int*)> fn) {
    require_input(r >= 1 && n >= 1, "tuple function: bad arity or domain");
    require_input(bound >= 0.0, "tuple function: bound must be nonnegative");
    TupleFunction f;
    f.r = r;
    f.n = n;
    f.bound = bound;
    f.fn = std::move(fn);
    return f;
}

TupleFunction symmetrize(const TupleFunction& f) {
    const int r = f.r, n = f.n;
    std::vector<int> perm(r);
    std::vector<std::vector<int>> perms;
    for (int i = 0; i < r; ++i) perm[i] = i;
    do {
        perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const double scale = 1.0 / static_cast<double>(perms.size());

    if (f.dense()) {
        std::vector<double> table(f.table.size(), 0.0);
        std::vector<int> s(r);
        for_each_distinct_tuple(n, r, [&](const int* t) {
            Kahan acc;
            for (const auto& p : perms) {
                for (int j = 0; j < r; ++j) s[j] = t[p[j]];
                acc.add(f.eval(s.data()));
            }
            std::size_t idx = 0;
            for (int j = 0; j < r; ++j) idx = idx * n + static_cast<std::size_t>(t[j]);
            table[idx] = acc.value() * scale;
        });
        return make_dense_tuple_function(r, n, std::move(table));
    }
    // closure: average on demand
    auto base = f;  // copy keeps the original alive inside the lambda
    return make_closure_tuple_function(
        r, n, f.bound, [base, perms, scale](const int* t) {
            std::vector<int> s(base.r);
            Kahan acc;
            for (const auto& p : perms) {
                for (int j = 0; j < base.r; ++j) s[j] = t[p[j]];
                acc.add(base.eval(s.data()));
            }
            return acc.value() * scale;
        });
}

CenteredColorMatrix::CenteredColorMatrix(int n_, int c_, std::vector<double> values_)
    : n(n_), c(c_), values(std::move(values_)) {
    require_input(n >= 0 && c >= 1, "centered color matrix: bad shape");
    require_input(values.size() == static_cast<size_t>(n) * c,
                  "centered color matrix: value count must be n*c");
    for (int v = 0; v < n; ++v) {
        double row = 0.0;
        for (int a = 0; a < c; ++a) row += at(v, a);
        require_input(std::abs(row) <= 1e-9, "centered color matrix: row does not sum to zero");
    }
}

CenteredColorMatrix centered_color_matrix(const Coloring& x) {
    const int n = x.vertex_count(), c = x.c;
    const double root_c = std::sqrt(static_cast<double>(c));
    std::vector<double> values(static_cast<size_t>(n) * c, -root_c / c);
    for (int v = 0; v < n; ++v) values[static_cast<size_t>(v) * c + x.colors[v]] += root_c;
    return CenteredColorMatrix(n, c, std::move(values));
}

CenteredColorMatrix gaussian_centered_matrix(int n, int c, Rng& rng) {
    std::vector<double> values(static_cast<size_t>(n) * c);
    for (int v = 0; v < n; ++v) {
        double mean = 0.0;
        double* row = values.data() + static_cast<size_t>(v) * c;
        for (int a = 0; a < c; ++a) mean += row[a] = rng.normal();
        mean /= c;
        double resid = 0.0;
        for (int a = 0; a < c; ++a) resid += row[a] -= mean;
        row[c - 1] -= resid;  // absorb rounding so the row sums to exactly 0
    }
    return CenteredColorMatrix(n, c, std::move(values));
}

// ---- embedding counts ----

namespace {

struct EmbedPlan {
    std::vector<int> order;                    // pattern vertices in assignment order
    std::vector<std::vector<int>> back_edges;  // per level, placed pattern vertices adjacent in H
};

EmbedPlan make_plan(const Graph& h) {
    const int m = h.vertex_count();
    EmbedPlan plan;
    std::vector<bool> placed(m, false);
    for (int step = 0; step < m; ++step) {
        int best = -1, best_links = -1, best_deg = -1;
        for (int v = 0; v < m; ++v) {
            if (placed[v]) continue;
            int links = 0;
            for (int u : plan.order)
                if (h.has_edge(u, v)) ++links;
            const int deg = h.degree(v);
            if (links > best_links || (links == best_links && deg > best_deg)) {
                best = v;
                best_links = links;
                best_deg = deg;
            }
        }
        placed[best] = true;
        plan.order.push_back(best);
        // pattern vertices already placed that constrain this level
        std::vector<int> back;
        for (int lvl = 0; lvl < step; ++lvl)
            if (h.has_edge(plan.order[lvl], best)) back.push_back(plan.order[lvl]);
        plan.back_edges.push_back(std::move(back));
    }
    return plan;
}

// Count injective homomorphisms of H into G with all images inside
// `allowed` (bitmask over G's vertices).
long long count_embeddings(const Graph& h, const Graph& g, const EmbedPlan& plan,
                           const std::uint64_t* allowed, std::vector<std::uint64_t>& scratch) {
    const int m = h.vertex_count();
    const int n = g.vertex_count();
    const int words = g.words_per_row();
    if (m > n) return 0;
    if (m == 0) return 1;

    // scratch layout: [used | level candidate masks]
    scratch.assign(static_cast<size_t>(words) * (m + 1), 0ull);
    std::uint64_t* used = scratch.data();
    auto cand = [&](int level) { return scratch.data() + static_cast<size_t>(words) * (1 + level); };

    std::vector<int> image(m, -1);
    std::vector<int> cursor(m, 0);  // word index being scanned per level
    std::vector<std::uint64_t> pending(m, 0);

    long long total = 0;
    int level = 0;
    bool fresh = true;
    while (level >= 0) {
        if (fresh) {
            std::uint64_t* cm = cand(level);
            std::memcpy(cm, allowed, sizeof(std::uint64_t) * words);
            for (int w = 0; w < words; ++w) cm[w] &= ~used[w];
            for (int back : plan.back_edges[level]) {
                const std::uint64_t* row = g.row(image[back]);
                for (int w = 0; w < words; ++w) cm[w] &= row[w];
            }
            if (level == m - 1) {
                for (int w = 0; w < words; ++w) total += std::popcount(cm[w]);
                --level;
                fresh = false;
                continue;
            }
            cursor[level] = 0;
            pending[level] = cm[0];
        }
        // resume scanning candidates at this level
        std::uint64_t* cm = cand(level);
        int w = cursor[level];
        std::uint64_t bits = pending[level];
        while (w < words && bits == 0) {
            ++w;
            if (w < words) bits = cm[w];
        }
        if (w >= words) {
            // exhausted: undo and pop
            if (image[plan.order[level]] >= 0) {
                const int v = image[plan.order[level]];
                used[v >> 6] &= ~(1ull << (v & 63));
                image[plan.order[level]] = -1;
            }
            --level;
            fresh = false;
            continue;
        }
        const int v = w * 64 + std::countr_zero(bits);
        bits &= bits - 1;
        cursor[level] = w;
        pending[level] = bits;
        // undo previous assignment at this level, make the new one
        if (image[plan.order[level]] >= 0) {
            const int prev = image[plan.order[level]];
            used[prev >> 6] &= ~(1ull << (prev & 63));
        }
        image[plan.order[level]] = v;
        used[v >> 6] |= 1ull << (v & 63);
        ++level;
        fresh = true;
    }
    return total;
}

std::vector<std::uint64_t> full_mask(int n) {
    const int words = (n + 63) / 64;
    std::vector<std::uint64_t> mask(words, ~0ull);
    if (n % 64) mask[words - 1] = (1ull << (n % 64)) - 1;
    if (words == 0) mask.assign(1, 0ull);
    return mask;
}

}  // namespace

long long count_copies(const Graph& h, const Graph& g) {
    require_budget(h.vertex_count() <= 10, "count_copies: pattern limited to 10 vertices");
    const EmbedPlan plan = make_plan(h);
    auto allowed = full_mask(g.vertex_count());
    std::vector<std::uint64_t> scratch;
    const long long embeddings = count_embeddings(h, g, plan, allowed.data(), scratch);
    const long long aut = automorphism_count(h);
    return embeddings / aut;
}

long long count_monochromatic(const Graph& h, const Graph& g, const Coloring& x) {
    require_budget(h.vertex_count() <= 10, "count_monochromatic: pattern limited to 10 vertices");
    require_input(x.vertex_count() == g.vertex_count(),
                  "count_monochromatic: coloring size mismatch");
    const int n = g.vertex_count();
    const int words = g.words_per_row();
    const EmbedPlan plan = make_plan(h);
    std::vector<std::uint64_t> masks(static_cast<size_t>(x.c) * std::max(words, 1), 0ull);
    for (int v = 0; v < n; ++v)
        masks[static_cast<size_t>(x.colors[v]) * words + (v >> 6)] |= 1ull << (v & 63);
    std::vector<std::uint64_t> scratch;
    long long embeddings = 0;
    for (int a = 0; a < x.c; ++a)
        embeddings += count_embeddings(h, g, plan, masks.data() + static_cast<size_t>(a) * words,
                                       scratch);
    return embeddings / automorphism_count(h);
}

double expected_count(const Graph& h, const Graph& g, int c) {
    require_input(c >= 1, "expected_count: c must be positive");
    return static_cast<double>(count_copies(h, g)) / int_pow(c, h.vertex_count() - 1);
}

double gamma_statistic(const Graph& h, const Graph& g, const Coloring& x) {
    const int m = h.vertex_count();
    const int n = g.vertex_count();
    const double t = static_cast<double>(count_monochromatic(h, g, x));
    const double et = expected_count(h, g, x.c);
    const double aut = static_cast<double>(automorphism_count(h));
    return aut * std::pow(static_cast<double>(x.c), m - 1.5) * (t - et) / int_pow(n, m - 1);
}

std::vector<double> gamma_vector(const std::vector<Graph>& hs, const Multiplex& m,
                                 const Coloring& x) {
    require_input(hs.size() == static_cast<size_t>(m.layer_count()),
                  "gamma_vector: one pattern per layer required");
    std::vector<double> out;
    out.reserve(hs.size());
    for (size_t i = 0; i < hs.size(); ++i)
        out.push_back(gamma_statistic(hs[i], m.layers[i], x));
    return out;
}

// ---- multilinear expansion ----

double multilinear_form(const TupleFunction& f, const CenteredColorMatrix& m) {
    require_input(f.n == m.n, "multilinear_form: domain mismatch");
    require_budget(pow_count(f.n, f.r) <= 5e7, "multilinear_form: n^r too large");
    const int c = m.c;
    Kahan acc;
    for_each_distinct_tuple(f.n, f.r, [&](const int* t) {
        const double v = f.eval(t);
        if (v == 0.0) return;
        for (int a = 0; a < c; ++a) {
            double prod = v;
            for (int j = 0; j < f.r; ++j) prod *= m.at(t[j], a);
            acc.add(prod);
        }
    });
    return acc.value() / (std::pow(static_cast<double>(f.n), f.r / 2.0) *
                          std::sqrt(static_cast<double>(c)));
}

namespace {

// Walk all injective homomorphisms of H into G (images of vertices 0..m-1 in
// natural order, pruning on edges into the assigned prefix) and hand each
// image tuple to fn.
template <class Fn>
void for_each_hom(const Graph& h, const Graph& g, Fn&& fn) {
    const int m = h.vertex_count();
    const int n = g.vertex_count();
    if (m > n) return;
    std::vector<std::vector<int>> back(m);
    for (int v = 0; v < m; ++v)
        for (int u = 0; u < v; ++u)
            if (h.has_edge(u, v)) back[v].push_back(u);
    std::vector<int> s(m, -1);
    std::vector<bool> used(n, false);
    int level = 0;
    while (level >= 0) {
        int v = s[level] + 1;
        if (s[level] >= 0) used[s[level]] = false;
        for (; v < n; ++v) {
            if (used[v]) continue;
            bool ok = true;
            for (int u : back[level]) {
                if (!g.has_edge(s[u], v)) {
                    ok = false;
                    break;
                }
            }
            if (ok) break;
        }
        if (v >= n) {
            s[level] = -1;
            --level;
            continue;
        }
        s[level] = v;
        used[v] = true;
        if (level == m - 1) {
            fn(s.data());
        } else {
            ++level;
        }
    }
}

}  // namespace

TupleFunction f_HJ(const Graph& h, const Graph& g, const std::vector<int>& j_set) {
    const int m = h.vertex_count();
    const int n = g.vertex_count();
    const int r = static_cast<int>(j_set.size());
    require_input(r >= 1 && r <= m, "f_HJ: J must be a nonempty subset of the pattern vertices");
    for (int i = 0; i < r; ++i) {
        require_input(j_set[i] >= 0 && j_set[i] < m, "f_HJ: J entry out of range");
        require_input(i == 0 || j_set[i] > j_set[i - 1], "f_HJ: J must be strictly increasing");
    }
    const double scale = 1.0 / pow_count(n, m - r);

    if (r <= 3) {
        require_budget(pow_count(n, m) <= 2e8, "f_HJ: n^|V(H)| too large for dense table");
        std::vector<double> table(static_cast<size_t>(pow_count(n, r)), 0.0);
        for_each_hom(h, g, [&](const int* s) {
            std::size_t idx = 0;
            for (int i = 0; i < r; ++i) idx = idx * n + static_cast<std::size_t>(s[j_set[i]]);
            table[idx] += scale;
        });
        return make_dense_tuple_function(r, n, std::move(table));
    }

    // arity >= 4: evaluate on demand by completing the pinned positions
    Graph hc = h;
    Graph gc = g;
    std::vector<int> pins = j_set;
    return make_closure_tuple_function(r, n, 1.0, [hc, gc, pins, scale](const int* t) {
        const int mv = hc.vertex_count();
        const int nv = gc.vertex_count();
        const int rv = static_cast<int>(pins.size());
        std::vector<int> s(mv, -1);
        std::vector<bool> used(nv, false);
        for (int i = 0; i < rv; ++i) {
            if (used[t[i]]) return 0.0;  // repeated pin: not a distinct tuple
            s[pins[i]] = t[i];
            used[t[i]] = true;
        }
        std::vector<int> free_pos;
        for (int v = 0; v < mv; ++v)
            if (s[v] < 0) free_pos.push_back(v);
        long long count = 0;
        // odometer over assignments of the free positions
        std::vector<int> cur(free_pos.size(), -1);
        int level = 0;
        auto consistent = [&](int pos, int img) {
            for (int u = 0; u < mv; ++u)
                if (s[u] >= 0 && u != pos && hc.has_edge(u, pos) && !gc.has_edge(s[u], img))
                    return false;
            return true;
        };
        if (free_pos.empty()) {
            bool ok = true;
            for (auto [u, v] : hc.edges())
                if (!gc.has_edge(s[u], s[v])) ok = false;
            return ok ? scale : 0.0;
        }
        while (level >= 0) {
            const int pos = free_pos[level];
            int img = cur[level] + 1;
            if (cur[level] >= 0) {
                used[s[pos]] = false;
                s[pos] = -1;
            }
            for (; img < nv; ++img)
                if (!used[img] && consistent(pos, img)) break;
            if (img >= nv) {
                cur[level] = -1;
                --level;
                continue;
            }
            cur[level] = img;
            s[pos] = img;
            used[img] = true;
            if (level + 1 == static_cast<int>(free_pos.size())) {
                ++count;
            } else {
                ++level;
            }
        }
        // edges among pinned positions are enforced by `consistent` only when
        // one endpoint is free; check the pinned-pinned edges once
        for (int i = 0; i < rv; ++i)
            for (int k = i + 1; k < rv; ++k)
                if (hc.has_edge(pins[i], pins[k]) && !gc.has_edge(t[i], t[k])) return 0.0;
        return count * scale;
    });
}

double expansion_value(const Graph& h, const Graph& g, const Coloring& x) {
    const int m = h.vertex_count();
    const int n = g.vertex_count();
    const int c = x.c;
    require_input(x.vertex_count() == n, "expansion_value: coloring size mismatch");
    require_budget(m <= 6 && pow_count(n, m) <= 2e8, "expansion_value: pattern or host too large");

    const CenteredColorMatrix xm = centered_color_matrix(x);
    const int nmask = 1 << m;
    std::vector<Kahan> sums(nmask);  // sum over homs of sum_a prod_{i in J} X~
    std::vector<double> prod(static_cast<size_t>(nmask), 0.0);
    for_each_hom(h, g, [&](const int* s) {
        for (int a = 0; a < c; ++a) {
            prod[0] = 1.0;
            for (int mask = 1; mask < nmask; ++mask) {
                const int low = std::countr_zero(static_cast<unsigned>(mask));
                prod[mask] = prod[mask & (mask - 1)] * xm.at(s[low], a);
            }
            for (int mask = 1; mask < nmask; ++mask)
                if (std::popcount(static_cast<unsigned>(mask)) >= 2) sums[mask].add(prod[mask]);
        }
    });

    // term_J = S_J * n^-(m-r) * n^(-r/2) * c^(-1/2) * n^(m-r/2) * c^((r+1)/2-m)
    //        = S_J * c^(r/2 - m); the n powers cancel exactly.
    Kahan total;
    for (int mask = 1; mask < nmask; ++mask) {
        const int r = std::popcount(static_cast<unsigned>(mask));
        if (r < 2) continue;
        total.add(sums[mask].value() * std::pow(static_cast<double>(c), r / 2.0 - m));
    }
    return total.value() / static_cast<double>(automorphism_count(h));
}

Matrix pair_slice_matrix(const Graph& h, const Graph& g) {
    const int m = h.vertex_count();
    const int n = g.vertex_count();
    Matrix f(n, n);
    require_input(m >= 2, "pair_slice_matrix: pattern needs at least two vertices");

    if (m == 3 && h.edge_count() == 3) {
        // triangle: F(u,v) = 3 a_uv |N(u) cap N(v)| / n, via packed rows
        const int words = g.words_per_row();
        for (auto [u, v] : g.edges()) {
            const std::uint64_t* ru = g.row(u);
            const std::uint64_t* rv = g.row(v);
            long long common = 0;
            for (int w = 0; w < words; ++w) common += std::popcount(ru[w] & rv[w]);
            const double val = 3.0 * static_cast<double>(common) / n;
            f.at(u, v) = val;
            f.at(v, u) = val;
        }
        return f;
    }

    require_budget(pow_count(n, m) <= 2e8, "pair_slice_matrix: n^|V(H)| too large");
    const double scale = 1.0 / pow_count(n, m - 2);
    for_each_hom(h, g, [&](const int* s) {
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) f.at(s[i], s[j]) += scale;
    });
    // symmetrize: the degree-2 contraction only sees (F(u,v)+F(v,u))/2
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) {
            const double sym = 0.5 * (f.at(u, v) + f.at(v, u));
            f.at(u, v) = sym;
            f.at(v, u) = sym;
        }
    return f;
}

// ---- covariance ----

double eta_factor(int r, int c) {
    return std::pow((c - 1.0) / c, r) + (c - 1) * std::pow(-1.0 / c, r);
}

double covariance_bruteforce(const TupleFunction& f, const TupleFunction& g, int c) {
    require_input(f.n == g.n, "covariance_bruteforce: domain mismatch");
    require_input(c >= 2, "covariance_bruteforce: needs c >= 2");
    const int n = f.n;
    const double total = std::pow(static_cast<double>(c), n);
    require_budget(total <= 1e7, "covariance_bruteforce: c^n exceeds the enumeration budget");

    std::vector<std::uint8_t> colors(n, 0);
    Kahan sa, sb, sab;
    long long count = 0;
    for (;;) {
        const Coloring x(c, colors);
        const CenteredColorMatrix m = centered_color_matrix(x);
        const double a = multilinear_form(f, m);
        const double b = multilinear_form(g, m);
        sa.add(a);
        sb.add(b);
        sab.add(a * b);
        ++count;
        int pos = 0;
        while (pos < n && ++colors[pos] == c) colors[pos++] = 0;
        if (pos == n) break;
    }
    const double inv = 1.0 / static_cast<double>(count);
    return sab.value() * inv - (sa.value() * inv) * (sb.value() * inv);
}

double bullet_inner_product(const TupleFunction& f, const TupleFunction& g) {
    require_input(f.n == g.n, "bullet_inner_product: domain mismatch");
    require_input(f.r == g.r, "bullet_inner_product: arity mismatch");
    const int r = f.r, n = f.n;
    require_budget(pow_count(n, r) * std::tgamma(r + 1.0) <= 1e8,
                   "bullet_inner_product: n^r * r! too large");
    std::vector<std::vector<int>> perms;
    std::vector<int> perm(r);
    for (int i = 0; i < r; ++i) perm[i] = i;
    do {
        perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));

    Kahan acc;
    std::vector<int> s(r);
    for_each_distinct_tuple(n, r, [&](const int* t) {
        const double fv = f.eval(t);
        if (fv == 0.0) return;
        for (const auto& p : perms) {
            for (int j = 0; j < r; ++j) s[j] = t[p[j]];
            acc.add(fv * g.eval(s.data()));
        }
    });
    double norm = pow_count(n, r);
    for (int i = 2; i <= r; ++i) norm *= i;
    return acc.value() / norm;
}

// ---- moment comparison ----

namespace {

struct PairEntry {
    int u;
    int v;
    double w;  // f(u,v) + f(v,u)
};

struct PairForm {
    std::vector<PairEntry> entries;
    double total = 0.0;  // sum of w over u < v
};

PairForm build_pair_form(const TupleFunction& f) {
    PairForm pf;
    Kahan tot;
    for (int u = 0; u < f.n; ++u) {
        for (int v = u + 1; v < f.n; ++v) {
            const double w = f.table[static_cast<size_t>(u) * f.n + v] +
                             f.table[static_cast<size_t>(v) * f.n + u];
            if (w != 0.0) {
                pf.entries.push_back({u, v, w});
                tot.add(w);
            }
        }
    }
    pf.total = tot.value();
    return pf;
}

struct ChunkMoments {
    double sum = 0.0;
    double sumsq = 0.0;
    std::int64_t count = 0;
};

constexpr std::int64_t kDrawChunk = 1024;

}  // namespace

MomentGapReport invariance_moment_gap(const std::vector<const TupleFunction*>& fs, int c,
                                      std::int64_t x_draws, std::int64_t z_draws,
                                      std::uint64_t seed, const Parallel& par) {
    require_input(!fs.empty() && fs.size() <= 4, "invariance_moment_gap: 1 to 4 factors");
    require_input(c >= 2, "invariance_moment_gap: needs c >= 2");
    const int n = fs[0]->n;
    for (const auto* f : fs)
        require_input(f->n == n, "invariance_moment_gap: factors must share a domain");
    require_input(z_draws >= 2, "invariance_moment_gap: needs Gaussian draws");

    // unique factors; factor k is ufs[slot[k]]
    std::vector<const TupleFunction*> ufs;
    std::vector<int> slot(fs.size());
    for (size_t k = 0; k < fs.size(); ++k) {
        int found = -1;
        for (size_t u = 0; u < ufs.size(); ++u)
            if (ufs[u] == fs[k]) found = static_cast<int>(u);
        if (found < 0) {
            found = static_cast<int>(ufs.size());
            ufs.push_back(fs[k]);
        }
        slot[k] = found;
    }

    const bool fast_pairs = std::all_of(ufs.begin(), ufs.end(), [](const TupleFunction* f) {
        return f->r == 2 && f->dense();
    });
    std::vector<PairForm> pair_forms;
    if (fast_pairs)
        for (const auto* f : ufs) pair_forms.push_back(build_pair_form(*f));

    const double inv_nrc = 1.0 / (static_cast<double>(n) * std::sqrt(static_cast<double>(c)));

    auto product_of_forms = [&](const std::vector<double>& tvals) {
        double prod = 1.0;
        for (int s : slot) prod *= tvals[s];
        return prod;
    };

    // Evaluate all unique forms for one draw.
    auto eval_x = [&](const Coloring& x, std::vector<double>& tvals,
                      const CenteredColorMatrix* xmat) {
        if (fast_pairs) {
            for (size_t u = 0; u < ufs.size(); ++u) {
                Kahan mono;
                for (const PairEntry& e : pair_forms[u].entries)
                    if (x.colors[e.u] == x.colors[e.v]) mono.add(e.w);
                tvals[u] = inv_nrc * (c * mono.value() - pair_forms[u].total);
            }
        } else {
            for (size_t u = 0; u < ufs.size(); ++u) tvals[u] = multilinear_form(*ufs[u], *xmat);
        }
    };
    auto eval_z = [&](const CenteredColorMatrix& zm, std::vector<double>& tvals) {
        if (fast_pairs) {
            for (size_t u = 0; u < ufs.size(); ++u) {
                Kahan acc;
                for (const PairEntry& e : pair_forms[u].entries) {
                    double dot = 0.0;
                    for (int a = 0; a < c; ++a) dot += zm.at(e.u, a) * zm.at(e.v, a);
                    acc.add(e.w * dot);
                }
                tvals[u] = inv_nrc * acc.value();
            }
        } else {
            for (size_t u = 0; u < ufs.size(); ++u) tvals[u] = multilinear_form(*ufs[u], zm);
        }
    };

    MomentGapReport rep;

    if (x_draws == 0) {
        const double total = std::pow(static_cast<double>(c), n);
        require_budget(total <= 1e6, "invariance_moment_gap: exhaustive side needs c^n <= 1e6");
        std::vector<std::uint8_t> colors(n, 0);
        std::vector<double> tvals(ufs.size());
        Kahan acc;
        long long count = 0;
        for (;;) {
            const Coloring x(c, colors);
            CenteredColorMatrix xm;
            if (!fast_pairs) xm = centered_color_matrix(x);
            eval_x(x, tvals, &xm);
            acc.add(product_of_forms(tvals));
            ++count;
            int pos = 0;
            while (pos < n && ++colors[pos] == c) colors[pos++] = 0;
            if (pos == n) break;
        }
        rep.x_estimate = acc.value() / static_cast<double>(count);
        rep.x_exact = true;
    } else {
        const std::int64_t chunks = chunk_count(x_draws, kDrawChunk);
        std::vector<ChunkMoments> parts(chunks);
        par.run_chunks(chunks, [&](std::int64_t ci) {
            Rng rng(seed, chunk_key(stream::coloring, static_cast<std::uint64_t>(ci)));
            const std::int64_t lo = ci * kDrawChunk;
            const std::int64_t hi = std::min<std::int64_t>(x_draws, lo + kDrawChunk);
            std::vector<std::uint8_t> colors(n);
            std::vector<double> tvals(ufs.size());
            Kahan sum, sumsq;
            for (std::int64_t d = lo; d < hi; ++d) {
                for (int v = 0; v < n; ++v) colors[v] = static_cast<std::uint8_t>(rng.below(c));
                const Coloring x(c, colors);
                CenteredColorMatrix xm;
                if (!fast_pairs) xm = centered_color_matrix(x);
                eval_x(x, tvals, &xm);
                const double p = product_of_forms(tvals);
                sum.add(p);
                sumsq.add(p * p);
            }
            parts[ci] = {sum.value(), sumsq.value(), hi - lo};
        });
        Kahan sum, sumsq;
        for (const auto& p : parts) {
            sum.add(p.sum);
            sumsq.add(p.sumsq);
        }
        const double mean = sum.value() / static_cast<double>(x_draws);
        const double var =
            std::max(0.0, sumsq.value() / static_cast<double>(x_draws) - mean * mean);
        rep.x_estimate = mean;
        rep.x_stderr = std::sqrt(var / static_cast<double>(x_draws));
    }

    {
        const std::int64_t chunks = chunk_count(z_draws, kDrawChunk);
        std::vector<ChunkMoments> parts(chunks);
        par.run_chunks(chunks, [&](std::int64_t ci) {
            Rng rng(seed, chunk_key(stream::gaussian, static_cast<std::uint64_t>(ci)));
            const std::int64_t lo = ci * kDrawChunk;
            const std::int64_t hi = std::min<std::int64_t>(z_draws, lo + kDrawChunk);
            std::vector<double> tvals(ufs.size());
            Kahan sum, sumsq;
            for (std::int64_t d = lo; d < hi; ++d) {
                const CenteredColorMatrix zm = gaussian_centered_matrix(n, c, rng);
                eval_z(zm, tvals);
                const double p = product_of_forms(tvals);
                sum.add(p);
                sumsq.add(p * p);
            }
            parts[ci] = {sum.value(), sumsq.value(), hi - lo};
        });
        Kahan sum, sumsq;
        for (const auto& p : parts) {
            sum.add(p.sum);
            sumsq.add(p.sumsq);
        }
        const double mean = sum.value() / static_cast<double>(z_draws);
        const double var =
            std::max(0.0, sumsq.value() / static_cast<double>(z_draws) - mean * mean);
        rep.z_estimate = mean;
        rep.z_stderr = std::sqrt(var / static_cast<double>(z_draws));
    }

    rep.gap = rep.x_estimate - rep.z_estimate;
    rep.pooled_stderr = std::sqrt(sq(rep.x_stderr) + sq(rep.z_stderr));
    return rep;
}

}  // namespace monostat
