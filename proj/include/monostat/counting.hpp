#pragma once

// Monochromatic subgraph statistics and the multilinear machinery behind
// their limit theory.
//
// Central objects, for a pattern H with m vertices, a host graph G on n
// vertices and a uniform c-coloring X:
//
//   T(H,G,X)   monochromatic copy count: injective embeddings of H into G
//              whose image is single-colored, divided by |Aut(H)|.
//   E T        = count_copies(H,G) / c^(m-1).
//   Gamma      = |Aut(H)| * c^(m-3/2) * (T - E T) / n^(m-1), the standardized
//              statistic whose joint law across layers stabilizes for large n.
//
// The fluctuation T - E T expands exactly (per coloring, every n) into
// degree-|J| multilinear forms in the centered color indicators:
//
//   T - E T = (1/|Aut(H)|) * sum over J subset of V(H), |J| >= 2 of
//             form(f_{H,J}; X~) * n^(m-|J|/2) * c^((|J|+1)/2 - m)
//
// where X~[v][a] = sqrt(c) (1{X_v=a} - 1/c) and
//   form(f; M) = n^(-r/2) c^(-1/2) * sum_a sum_{s distinct} f(s) prod_j M[s_j][a].
//
// expansion_value computes the right-hand side so tests can pin the identity
// to near machine precision; everything here accumulates with compensated
// summation for that reason.

#include <cstdint>
#include <functional>
#include <vector>

#include "monostat/graphs.hpp"
#include "monostat/numeric.hpp"
#include "monostat/parallel.hpp"
#include "monostat/rng.hpp"

namespace monostat {

// A function on r-tuples of distinct indices from {0,...,n-1}.  Dense storage
// (full n^r table) for r <= 3; closures beyond.  Entries at tuples with
// repeated coordinates are never read.
struct TupleFunction {
    int r = 0;
    int n = 0;
    double bound = 0.0;  // sup |f| over distinct tuples
    std::vector<double> table;
    std::function<double(const int*)> fn;

    bool dense() const { return !table.empty(); }

    double eval(const int* t) const {
        if (!table.empty()) {
            std::size_t idx = 0;
            for (int j = 0; j < r; ++j) idx = idx * n + static_cast<std::size_t>(t[j]);
            return table[idx];
        }
        return fn(t);
    }
};

TupleFunction make_dense_tuple_function(int r, int n, std::vector<double> table);
TupleFunction make_closure_tuple_function(int r, int n, double bound,
                                          std::function<double(const int*)> fn);

// (1/r!) sum over permutations of the arguments.
TupleFunction symmetrize(const TupleFunction& f);

// n x c matrix whose rows sum to zero (within 1e-9): centered color
// indicators or their Gaussian surrogates.
struct CenteredColorMatrix {
    CenteredColorMatrix() = default;
    CenteredColorMatrix(int n_, int c_, std::vector<double> values_);

    double at(int v, int a) const { return values[static_cast<size_t>(v) * c + a]; }

    int n = 0;
    int c = 0;
    std::vector<double> values;
};

// X~[v][a] = sqrt(c) (1{X_v = a} - 1/c)
CenteredColorMatrix centered_color_matrix(const Coloring& x);
// Z~[v][a] = Z[v][a] - rowmean(Z[v]), Z iid standard normal
CenteredColorMatrix gaussian_centered_matrix(int n, int c, Rng& rng);

// ---- counts ----

// Copies of H in G: injective homomorphisms / |Aut(H)|.
long long count_copies(const Graph& h, const Graph& g);
// Copies whose image is monochromatic under x.
long long count_monochromatic(const Graph& h, const Graph& g, const Coloring& x);
// count_copies(h,g) / c^(|V(h)|-1)
double expected_count(const Graph& h, const Graph& g, int c);

double gamma_statistic(const Graph& h, const Graph& g, const Coloring& x);
// Shared coloring across layers; hs.size() must equal m.layer_count().
std::vector<double> gamma_vector(const std::vector<Graph>& hs, const Multiplex& m,
                                 const Coloring& x);

// ---- multilinear expansion ----

// form(f; M) as defined above.
double multilinear_form(const TupleFunction& f, const CenteredColorMatrix& m);

// f_{H,J}(t) = n^-(m-|J|) * sum over distinct s in [n]_m with s restricted to
// positions J (ascending) equal to t, of prod_{uv in E(H)} a_{s_u s_v}.
// J holds 0-based vertex positions of H, strictly increasing.
TupleFunction f_HJ(const Graph& h, const Graph& g, const std::vector<int>& j_set);

// Right-hand side of the expansion identity; equals T - E T exactly.
double expansion_value(const Graph& h, const Graph& g, const Coloring& x);

// Symmetric n x n matrix F(u,v) = sum over |J|=2 of f_{H,J}, symmetrized.
// This is half the discrete two-point kernel the degree-2 part of the
// expansion contracts against.  Specialized for the triangle (popcount over
// packed rows); generic patterns sweep all distinct m-tuples.
Matrix pair_slice_matrix(const Graph& h, const Graph& g);

// ---- covariance of the multilinear forms ----

// Exact covariance of form(f; X~) and form(g; X~) over all c^n colorings.
// Budget: c^n <= 1e7.
double covariance_bruteforce(const TupleFunction& f, const TupleFunction& g, int c);

// <f, g>_bullet = (1/(n^r r!)) sum over pairs of distinct tuples with equal
// underlying sets of f(s) g(s').  Zero arity mismatch is the caller's check.
double bullet_inner_product(const TupleFunction& f, const TupleFunction& g);

// eta(r,c) = (1-1/c)^r + (c-1) (-1/c)^r; the exact covariance for equal
// arities is eta * r! * bullet inner product.
double eta_factor(int r, int c);

// ---- moment comparison between the color side and the Gaussian side ----

struct MomentGapReport {
    double x_estimate = 0.0;
    double x_stderr = 0.0;  // 0 when the color side was enumerated exactly
    bool x_exact = false;
    double z_estimate = 0.0;
    double z_stderr = 0.0;
    double gap = 0.0;
    double pooled_stderr = 0.0;
};

// Estimates E prod_k form(f_k; X~) against E prod_k form(f_k; Z~) for up to 4
// factors (repeats allowed; duplicate pointers are evaluated once per draw).
// x_draws == 0 requests exhaustive enumeration of colorings (budget c^n <=
// 1e6); otherwise both sides are Monte Carlo with the given draw counts.
MomentGapReport invariance_moment_gap(const std::vector<const TupleFunction*>& fs, int c,
                                      std::int64_t x_draws, std::int64_t z_draws,
                                      std::uint64_t seed, const Parallel& par);

}  // namespace monostat
