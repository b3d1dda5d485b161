#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "monostat/errors.hpp"
#include "monostat/experiments.hpp"
#include "monostat/graphon.hpp"
#include "monostat/limitlaw.hpp"
#include "monostat/numeric.hpp"
#include "monostat/parallel.hpp"
#include "monostat/rng.hpp"

using namespace monostat;

namespace {

struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

Moments column_moments(const Matrix& draws, int col) {
    Kahan s, ss;
    for (int i = 0; i < draws.rows; ++i) {
        const double x = draws.a[static_cast<size_t>(i) * draws.cols + col];
        s.add(x);
        ss.add(x * x);
    }
    const double mean = s.value() / draws.rows;
    return {mean, ss.value() / draws.rows - mean * mean};
}

double column_cross(const Matrix& draws, int i, int j) {
    Kahan s, si, sj;
    for (int r = 0; r < draws.rows; ++r) {
        const double a = draws.a[static_cast<size_t>(r) * draws.cols + i];
        const double b = draws.a[static_cast<size_t>(r) * draws.cols + j];
        s.add(a * b);
        si.add(a);
        sj.add(b);
    }
    const double n = static_cast<double>(draws.rows);
    return s.value() / n - (si.value() / n) * (sj.value() / n);
}

}  // namespace

TEST_CASE("limit spec validation") {
    const StepKernel k = constant_graphon(0.5);
    Matrix sigma(1, 1);
    sigma.at(0, 0) = 1.0;
    CHECK_NOTHROW(make_limit_spec(2, {k}, sigma));
    CHECK_THROWS_AS(make_limit_spec(1, {k}, sigma), input_error);

    Matrix neg(1, 1);
    neg.at(0, 0) = -0.1;
    CHECK_THROWS_AS(make_limit_spec(2, {k}, neg), input_error);

    // mismatched partitions
    const StepKernel k2 = make_step_kernel({0.5, 0.5}, {1, 0, 0, 1});
    Matrix s2(2, 2);
    s2.at(0, 0) = s2.at(1, 1) = 1.0;
    CHECK_THROWS_AS(make_limit_spec(2, {k, k2}, s2), input_error);

    // rho must satisfy rho_ii = sigma_ii + |K_i|^2
    Matrix rho(1, 1);
    rho.at(0, 0) = 1.0 + 0.25;  // |const 0.5|^2 = 0.25
    CHECK_NOTHROW(make_limit_spec(2, {k}, sigma, rho));
    rho.at(0, 0) = 2.0;
    CHECK_THROWS_AS(make_limit_spec(2, {k}, sigma, rho), input_error);
}

TEST_CASE("sigma matrix closed forms on constant graphons") {
    // K2: join sum 4p, |K|^2 = 4p^2, sigma = 4p(1-p)
    const double p = 0.35;
    const Matrix s2 = sigma_matrix({pattern_graph("k2")}, {constant_graphon(p)}, nullptr);
    CHECK(s2.at(0, 0) == doctest::Approx(4 * p * (1 - p)).epsilon(1e-12));

    // general pattern: 4 |E|^2 p^(2|E|-1) (1-p)
    for (const char* name : {"k3", "p3", "c4"}) {
        CAPTURE(name);
        const Graph h = pattern_graph(name);
        const double e = static_cast<double>(h.edge_count());
        const Matrix s = sigma_matrix({h}, {constant_graphon(p)}, nullptr);
        CHECK(s.at(0, 0) ==
              doctest::Approx(4 * e * e * std::pow(p, 2 * e - 1) * (1 - p)).epsilon(1e-10));
    }

    // two different graphons without rho are rejected
    CHECK_THROWS_AS(sigma_matrix({pattern_graph("k2"), pattern_graph("k2")},
                                 {constant_graphon(0.3), constant_graphon(0.4)}, nullptr),
                    input_error);
}

TEST_CASE("rho_finite for edges counts shared edges") {
    const Graph gi = erdos_renyi(30, 0.5, 5);
    const Graph gj = erdos_renyi(30, 0.5, 6);
    long long shared = 0;
    for (const auto& [u, v] : gi.edges()) shared += gj.has_edge(u, v) ? 1 : 0;
    const Graph k2 = pattern_graph("k2");
    CHECK(rho_finite(k2, k2, gi, gj) ==
          doctest::Approx(8.0 * static_cast<double>(shared) / 900.0).epsilon(1e-12));
    // diagonal: 8 |E| / n^2
    CHECK(rho_finite(k2, k2, gi, gi) ==
          doctest::Approx(8.0 * gi.edge_count() / 900.0).epsilon(1e-12));
}

TEST_CASE("integral sampler satisfies the isometry") {
    // Var of each component = (c-1)/(2c) * 2 |K|^2 / 2 ... with the 1/(2 sqrt c)
    // prefactor: Var = (c-1) * |K|^2 / (2c)
    const Parallel par(4);
    const StepKernel k = make_step_kernel({0.25, 0.75}, {1.2, -0.4, -0.4, 0.8});
    const double k2 = kernel_inner_product(k, k);
    for (const int c : {2, 4}) {
        CAPTURE(c);
        Matrix sigma(1, 1);
        const LimitSpec spec = make_limit_spec(c, {k}, sigma);
        const Matrix draws = stochastic_integral_sample(spec, 300000, 21, par);
        const Moments m = column_moments(draws, 0);
        const double expect = (c - 1) * k2 / (2.0 * c);
        CHECK(std::abs(m.mean) < 5 * std::sqrt(expect / 300000.0) * 3);
        CHECK(m.var == doctest::Approx(expect).epsilon(0.03));
    }
}

TEST_CASE("chi-square representation matches the integral sampler in law") {
    const Parallel par(4);
    const StepKernel k = make_step_kernel({0.5, 0.5}, {0.9, 0.3, 0.3, 0.1});
    const auto weights = chi_square_representation(k);
    // weights are exactly the kernel spectrum
    const Spectrum sp = spectrum(k);
    REQUIRE(weights.size() == sp.eigenvalues.size());
    for (size_t i = 0; i < weights.size(); ++i)
        CHECK(weights[i] == doctest::Approx(sp.eigenvalues[i]));

    const int c = 3;
    Matrix sigma(1, 1);
    const LimitSpec spec = make_limit_spec(c, {k}, sigma);
    const std::int64_t draws = 400000;
    const Matrix qf = stochastic_integral_sample(spec, draws, 4, par);
    const auto cs = chi_square_representation_sample(weights, c, draws, 5, par);

    Kahan s2a, s2b, s3a, s3b;
    for (std::int64_t i = 0; i < draws; ++i) {
        const double a = qf.a[i], b = cs[i];
        s2a.add(a * a);
        s2b.add(b * b);
        s3a.add(a * a * a);
        s3b.add(b * b * b);
    }
    const double va = s2a.value() / draws, vb = s2b.value() / draws;
    CHECK(va == doctest::Approx(vb).epsilon(0.03));
    const double ta = s3a.value() / draws, tb = s3b.value() / draws;
    CHECK(ta == doctest::Approx(tb).epsilon(0.12).scale(std::max(1.0, std::abs(ta))));
}

TEST_CASE("full limit covariance is (c-1)/(2c) rho") {
    const Parallel par(4);
    const double p = 0.5, q = 0.4;
    const StepKernel ka = two_point_kernel(pattern_graph("k2"), constant_graphon(p));
    const StepKernel kb = two_point_kernel(pattern_graph("k2"), constant_graphon(q));
    Matrix sigma(2, 2);
    sigma.at(0, 0) = 4 * p * (1 - p);
    sigma.at(1, 1) = 4 * q * (1 - q);
    sigma.at(0, 1) = sigma.at(1, 0) = 0.3;
    Matrix rho(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            rho.at(i, j) = sigma.at(i, j) +
                           kernel_inner_product(i == 0 ? ka : kb, j == 0 ? ka : kb);
    const int c = 2;
    const LimitSpec spec = make_limit_spec(c, {ka, kb}, sigma, rho);
    const Matrix draws = limit_sample(spec, 400000, 77, par);
    const double scale = (c - 1) / (2.0 * c);
    CHECK(column_moments(draws, 0).var == doctest::Approx(scale * rho.at(0, 0)).epsilon(0.03));
    CHECK(column_moments(draws, 1).var == doctest::Approx(scale * rho.at(1, 1)).epsilon(0.03));
    CHECK(column_cross(draws, 0, 1) == doctest::Approx(scale * rho.at(0, 1)).epsilon(0.05));
}

TEST_CASE("limit sampler is worker-count invariant") {
    const StepKernel k = constant_graphon(0.5);
    Matrix sigma(1, 1);
    sigma.at(0, 0) = 1.0;
    const LimitSpec spec = make_limit_spec(2, {k}, sigma);
    const Parallel p1(1), p6(6);
    const Matrix a = limit_sample(spec, 20000, 3, p1);
    const Matrix b = limit_sample(spec, 20000, 3, p6);
    CHECK(a.a == b.a);
}

TEST_CASE("finite q2 sampler variance matches the quadratic form") {
    const Parallel par(4);
    const Graph g = erdos_renyi(40, 0.5, 9);
    const Graph h = pattern_graph("k3");
    const int c = 2;
    const Matrix f = pair_slice_matrix(h, g);
    double fsq = 0.0;
    for (int u = 0; u < 40; ++u)
        for (int v = u + 1; v < 40; ++v) fsq += f.at(u, v) * f.at(u, v);
    // Var Q2 = (c-1)/(n^2 c) * sum_{u<v} Wt^2 with Wt = 2F
    const double expect = (c - 1) * 4.0 * fsq / (1600.0 * c);
    const auto draws = q2_finite_sample(h, g, c, 300000, 13, par);
    Kahan s, ss;
    for (const double x : draws) {
        s.add(x);
        ss.add(x * x);
    }
    const double mean = s.value() / static_cast<double>(draws.size());
    const double var = ss.value() / static_cast<double>(draws.size()) - mean * mean;
    CHECK(std::abs(mean) < 5 * std::sqrt(expect / 300000.0) * 2);
    CHECK(var == doctest::Approx(expect).epsilon(0.03));
}

TEST_CASE("independence diagnostics vanish exactly for orthogonal kernels") {
    // disjointly supported blocks: R lives on block 1, W on block 2
    const StepKernel r = make_step_kernel({0.5, 0.5}, {1, 0, 0, 0});
    const StepKernel w = make_step_kernel({0.5, 0.5}, {0, 0, 0, 1});
    const auto [first, second] = independence_diagnostics(r, w);
    CHECK(first == doctest::Approx(0.0));
    CHECK(second == doctest::Approx(0.0));
    const auto [self1, self2] = independence_diagnostics(r, r);
    CHECK(self1 == doctest::Approx(kernel_inner_product(r, r)));
    CHECK(self2 > 0.0);
}

TEST_CASE("limit spec json round trip") {
    const StepKernel k = make_step_kernel({0.5, 0.5}, {0.8, 0.2, 0.2, 0.6});
    Matrix sigma(1, 1);
    sigma.at(0, 0) = 0.7;
    Matrix rho(1, 1);
    rho.at(0, 0) = 0.7 + kernel_inner_product(k, k);
    const LimitSpec spec = make_limit_spec(3, {k}, sigma, rho);
    const LimitSpec back = parse_limit_spec_json(limit_spec_to_json(spec));
    CHECK(back.c == 3);
    REQUIRE(back.dimension() == 1);
    CHECK(back.sigma.at(0, 0) == doctest::Approx(0.7));
    REQUIRE(back.rho.has_value());
    CHECK(back.rho->at(0, 0) == doctest::Approx(rho.at(0, 0)));
    CHECK(back.kernels[0].at(0, 1) == doctest::Approx(0.2));

    const LimitSpec no_rho = make_limit_spec(2, {k}, sigma);
    const LimitSpec back2 = parse_limit_spec_json(limit_spec_to_json(no_rho));
    CHECK_FALSE(back2.rho.has_value());

    CHECK_THROWS_AS(parse_limit_spec_json("{\"c\": 2}"), input_error);
    CHECK_THROWS_AS(parse_limit_spec_json("{{{"), input_error);
}
