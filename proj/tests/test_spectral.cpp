#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <vector>

#include "monostat/graphon.hpp"
#include "monostat/numeric.hpp"
#include "monostat/parallel.hpp"
#include "monostat/rng.hpp"
#include "monostat/spectral.hpp"

using namespace monostat;

namespace {

StepKernel random_kernel(int k, Rng& rng, double amp = 1.0) {
    std::vector<double> measures(k);
    double total = 0.0;
    for (double& m : measures) {
        m = 0.3 + rng.uniform();
        total += m;
    }
    for (double& m : measures) m /= total;
    std::vector<double> values(k * k);
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j)
            values[i * k + j] = values[j * k + i] = amp * (rng.uniform() * 2 - 1);
    return make_step_kernel(std::move(measures), std::move(values));
}

}  // namespace

TEST_CASE("jacobi solves small closed-form problems") {
    // [[2,1],[1,2]]: eigenvalues 3 and 1
    const auto ev = jacobi_eigenvalues({2, 1, 1, 2}, 2);
    REQUIRE(ev.size() == 2);
    CHECK(ev[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(ev[1] == doctest::Approx(1.0).epsilon(1e-12));

    // rank-one uu^T with u = (1,2,2): single eigenvalue |u|^2 = 9
    const std::vector<double> u = {1, 2, 2};
    std::vector<double> m(9);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i * 3 + j] = u[i] * u[j];
    const auto ev3 = jacobi_eigenvalues(m, 3);
    CHECK(ev3[0] == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(std::abs(ev3[1]) < 1e-10);
    CHECK(std::abs(ev3[2]) < 1e-10);
}

TEST_CASE("jacobi eigenvectors satisfy the eigen equation") {
    Rng rng(17, 3);
    const int k = 6;
    std::vector<double> a(k * k);
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) a[i * k + j] = a[j * k + i] = rng.uniform() * 2 - 1;
    std::vector<double> vecs;
    const auto ev = jacobi_eigenvalues(a, k, &vecs);
    REQUIRE(static_cast<int>(vecs.size()) == k * k);
    for (int s = 0; s < k; ++s) {
        for (int i = 0; i < k; ++i) {
            double av = 0.0;
            for (int j = 0; j < k; ++j) av += a[i * k + j] * vecs[j * k + s];
            CHECK(av == doctest::Approx(ev[s] * vecs[i * k + s]).epsilon(1e-8).scale(1.0));
        }
    }
    // trace identity
    double tr = 0.0, evsum = 0.0;
    for (int i = 0; i < k; ++i) tr += a[i * k + i];
    for (const double e : ev) evsum += e;
    CHECK(evsum == doctest::Approx(tr).epsilon(1e-10));
}

TEST_CASE("kernel spectrum satisfies the moment identities") {
    Rng rng(55, 1);
    for (int trial = 0; trial < 8; ++trial) {
        const StepKernel kern = random_kernel(3 + static_cast<int>(rng.below(6)), rng);
        const Spectrum sp = spectrum(kern);

        // sum lambda^2 = |K|_2^2
        double l2 = 0.0, l3 = 0.0;
        for (const double e : sp.eigenvalues) {
            l2 += e * e;
            l3 += e * e * e;
        }
        CHECK(l2 == doctest::Approx(kernel_inner_product(kern, kern)).epsilon(1e-10));

        // sum lambda^3 = triangle density of the kernel
        CHECK(l3 == doctest::Approx(hom_density(pattern_graph("k3"), kern))
                        .epsilon(1e-9)
                        .scale(std::max(1.0, std::abs(l3))));
        // ordering: descending absolute value
        for (size_t i = 1; i < sp.eigenvalues.size(); ++i)
            CHECK(std::abs(sp.eigenvalues[i - 1]) >= std::abs(sp.eigenvalues[i]) - 1e-12);
    }
}

TEST_CASE("constant kernel has a single nonzero eigenvalue") {
    const Spectrum sp = spectrum(constant_graphon(0.6));
    REQUIRE(sp.eigenvalues.size() == 1);
    CHECK(sp.eigenvalues[0] == doctest::Approx(0.6));
}

TEST_CASE("weighted chi-square sampler has the right two moments") {
    const Parallel par(4);
    const std::vector<double> weights = {0.8, -0.5, 0.3};
    const int dof = 2;
    const std::int64_t draws = 400000;
    const auto xs = weighted_chisq_sample(weights, dof, draws, 2025, par);
    REQUIRE(static_cast<std::int64_t>(xs.size()) == draws);
    Kahan sum, sumsq;
    for (const double x : xs) {
        sum.add(x);
        sumsq.add(x * x);
    }
    const double mean = sum.value() / draws;
    const double var = sumsq.value() / draws - mean * mean;
    double w2 = 0.0;
    for (const double w : weights) w2 += w * w;
    // Var = 2 dof sum w^2; mean = 0 by centering
    const double sd = std::sqrt(2.0 * dof * w2);
    CHECK(std::abs(mean) < 5 * sd / std::sqrt(static_cast<double>(draws)));
    CHECK(var == doctest::Approx(2.0 * dof * w2).epsilon(0.02));
}

TEST_CASE("chi-square sampler is worker-count invariant") {
    const std::vector<double> weights = {1.0, 0.25};
    const Parallel p1(1), p5(5);
    const auto a = weighted_chisq_sample(weights, 3, 9000, 7, p1);
    const auto b = weighted_chisq_sample(weights, 3, 9000, 7, p5);
    CHECK(a == b);  // byte identical
}

TEST_CASE("clt condition report flags flat weight profiles") {
    const std::vector<std::vector<double>> rows = {
        {1.0, 0.0, 0.0},            // concentrated: max = full scale
        {0.1, 0.1, 0.1, 0.1},       // flat: max small against the sum
    };
    const auto rep = clt_condition_report(rows);
    REQUIRE(rep.size() == 2);
    CHECK(rep[0].max_abs == doctest::Approx(1.0));
    CHECK(rep[0].sum_sq == doctest::Approx(1.0));
    CHECK(rep[1].max_abs == doctest::Approx(0.1));
    CHECK(rep[1].sum_sq == doctest::Approx(0.04));
    CHECK(rep[1].max_abs / std::sqrt(rep[1].sum_sq) == doctest::Approx(0.5));
}
