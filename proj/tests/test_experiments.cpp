#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "monostat/errors.hpp"
#include "monostat/experiments.hpp"
#include "monostat/graphs.hpp"
#include "monostat/parallel.hpp"

using namespace monostat;

namespace {

const SummaryStat& stat_named(const EmpiricalDistribution& e, const std::string& name) {
    for (const SummaryStat& s : e.stats)
        if (s.name == name) return s;
    REQUIRE_MESSAGE(false, "missing stat " << name);
    static SummaryStat dummy;
    return dummy;
}

}  // namespace

TEST_CASE("erdos renyi generator is keyed and calibrated") {
    const Graph a = erdos_renyi(60, 0.3, 42);
    const Graph b = erdos_renyi(60, 0.3, 42);
    CHECK(a == b);
    const Graph c = erdos_renyi(60, 0.3, 43);
    CHECK_FALSE(a == c);
    // 60*59/2 = 1770 pairs; mean 531, sd ~ 19
    CHECK(a.edge_count() > 531 - 5 * 20);
    CHECK(a.edge_count() < 531 + 5 * 20);
    CHECK(erdos_renyi(10, 0.0, 1).edge_count() == 0);
    CHECK(erdos_renyi(10, 1.0, 1).edge_count() == 45);
}

TEST_CASE("correlated pair has the requested joint behaviour") {
    const int n = 80;
    const double p = 0.5, q = 0.4, rho = 0.15;  // p12 = 0.35
    const Multiplex m = sample_correlated_er(n, p, q, rho, 7);
    REQUIRE(m.layer_count() == 2);
    const double pairs = n * (n - 1) / 2.0;
    long long both = 0;
    for (const auto& [u, v] : m.layers[0].edges()) both += m.layers[1].has_edge(u, v) ? 1 : 0;
    // binomial(3160, .35): sd ~ 27
    CHECK(std::abs(both / pairs - 0.35) < 5 * 27 / pairs);
    CHECK(std::abs(m.layers[0].edge_count() / pairs - p) < 0.06);
    CHECK(std::abs(m.layers[1].edge_count() / pairs - q) < 0.06);

    // maximal coupling nests the sparser layer inside the denser one
    const Multiplex nested = sample_correlated_er(n, p, q, q - p * q, 9);
    for (const auto& [u, v] : nested.layers[1].edges()) CHECK(nested.layers[0].has_edge(u, v));

    CHECK_THROWS_AS(sample_correlated_er(n, p, q, 0.9, 1), input_error);   // p12 > min(p,q)
    CHECK_THROWS_AS(sample_correlated_er(n, 0.9, 0.9, -0.5, 1), input_error);
}

TEST_CASE("complement multiplex is an exact complement") {
    const Multiplex m = complement_multiplex(25, 0.45, 11);
    REQUIRE(m.layer_count() == 2);
    CHECK(m.layers[1] == complement(m.layers[0]));
    CHECK(m.layers[0].edge_count() + m.layers[1].edge_count() == 25 * 24 / 2);
}

TEST_CASE("path blow-up has the band structure") {
    const int group = 5;
    const auto [ma, mb] = path_blowup_multiplexes(group);
    CHECK(ma.n == 4 * group);
    CHECK(mb.n == 4 * group);
    // layer 1 is shared: three full bands of group^2 edges
    CHECK(ma.layers[0] == mb.layers[0]);
    CHECK(ma.layers[0].edge_count() == 3 * group * group);
    CHECK(ma.layers[1].edge_count() == group * group);  // band (1,2)
    CHECK(mb.layers[1].edge_count() == group * group);  // band (2,3)
    // every edge of layer 2 of A sits between groups 0 and 1
    for (const auto& [u, v] : ma.layers[1].edges()) {
        CHECK(u / group == 0);
        CHECK(v / group == 1);
    }
    for (const auto& [u, v] : mb.layers[1].edges()) {
        CHECK(u / group == 1);
        CHECK(v / group == 2);
    }
    // the kernels integrate to the same edge densities
    const auto kernels = path_blowup_kernels();
    CHECK(hom_density(pattern_graph("k2"), kernels[0]) == doctest::Approx(6.0 / 16));
    CHECK(hom_density(pattern_graph("k2"), kernels[1]) == doctest::Approx(2.0 / 16));
    CHECK(hom_density(pattern_graph("k2"), kernels[2]) == doctest::Approx(2.0 / 16));
    // blown-up graphs match their kernels exactly
    CHECK(2.0 * ma.layers[0].edge_count() / (ma.n * ma.n) ==
          doctest::Approx(6.0 / 16).epsilon(1e-12));
}

TEST_CASE("summarize computes the documented statistics") {
    // two-dimensional data with four draws
    const std::vector<double> data = {1, 2, 3, 2, 1, 0, 3, 4};
    const EmpiricalDistribution e = summarize(data, 2);
    CHECK(e.draws == 4);
    CHECK(stat_named(e, "mean[0]").value == doctest::Approx(2.0));
    CHECK(stat_named(e, "mean[1]").value == doctest::Approx(2.0));
    // population covariance: x = (1,3,1,3), y = (2,2,0,4)
    CHECK(stat_named(e, "cov[0][0]").value == doctest::Approx(1.0));
    CHECK(stat_named(e, "cov[1][1]").value == doctest::Approx(2.0));
    CHECK(stat_named(e, "cov[0][1]").value == doctest::Approx(1.0));
    CHECK(stat_named(e, "central3[0]").value == doctest::Approx(0.0));
    CHECK(stat_named(e, "central4[0]").value == doctest::Approx(1.0));
    // standard errors are positive for non-degenerate data
    CHECK(stat_named(e, "mean[0]").se > 0.0);
    // repeated call is bit identical
    const EmpiricalDistribution e2 = summarize(data, 2);
    for (size_t i = 0; i < e.stats.size(); ++i) {
        CHECK(e.stats[i].value == e2.stats[i].value);
        CHECK(e.stats[i].se == e2.stats[i].se);
    }
    CHECK_THROWS_AS(summarize({1.0}, 1), input_error);  // needs two draws
}

TEST_CASE("mc empirical ties identical layers together exactly") {
    const Parallel par(3);
    const Graph g = erdos_renyi(30, 0.5, 21);
    const Multiplex m(30, {g, g});
    const Graph k2 = pattern_graph("k2");
    const EmpiricalDistribution e = mc_empirical({k2, k2}, m, 2, 4000, 17, par);
    CHECK(e.d == 2);
    CHECK(e.draws == 4000);
    // both columns are the same statistic of the same coloring
    CHECK(stat_named(e, "cov[0][0]").value ==
          doctest::Approx(stat_named(e, "cov[0][1]").value).epsilon(1e-12));
    CHECK(stat_named(e, "mean[0]").value ==
          doctest::Approx(stat_named(e, "mean[1]").value).epsilon(1e-12));
    // standardized mean is near zero: 5 sigma
    CHECK(std::abs(stat_named(e, "mean[0]").value) < 5 * stat_named(e, "mean[0]").se);
}

TEST_CASE("mc empirical is worker-count invariant") {
    const Graph g = erdos_renyi(20, 0.5, 2);
    const Multiplex m(20, {g});
    const Graph k2 = pattern_graph("k2");
    const Parallel p1(1), p7(7);
    const EmpiricalDistribution a = mc_empirical({k2}, m, 3, 2000, 5, p1);
    const EmpiricalDistribution b = mc_empirical({k2}, m, 3, 2000, 5, p7);
    CHECK(a.data == b.data);
}

TEST_CASE("comparison report gates on tagged rows only") {
    const std::vector<double> d1 = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
    const std::vector<double> d2 = {0.1, 1.1, 2.1, 2.9, 4.2, 5.0};
    const EmpiricalDistribution a = summarize(d1, 1);
    const EmpiricalDistribution b = summarize(d2, 1);
    std::vector<GapRow> rows = compare(a, b);
    REQUIRE_FALSE(rows.empty());
    bool saw_ks = false;
    for (const GapRow& r : rows) {
        CHECK(r.gap == doctest::Approx(r.empirical - r.limit));
        if (r.name.rfind("ks[", 0) == 0) {
            saw_ks = true;
            CHECK(r.empirical >= 0.0);
            CHECK(r.empirical <= 1.0);
        }
    }
    CHECK(saw_ks);

    // nothing tagged: report passes regardless of gaps
    ExperimentReport rep;
    rep.rows = rows;
    CHECK(report_ok(rep));

    // tag means with a huge multiplier: passes; with a tiny one: fails
    tag_acceptance_rows(rep.rows, {"mean["}, 1e9);
    CHECK(report_ok(rep));
    std::vector<GapRow> strict = compare(a, b);
    tag_acceptance_rows(strict, {"mean["}, 1e-9);
    ExperimentReport rep2;
    rep2.rows = strict;
    CHECK_FALSE(report_ok(rep2));
}

TEST_CASE("identical samples give zero ks distance") {
    const std::vector<double> d = {3, 1, 4, 1, 5, 9, 2, 6};
    const EmpiricalDistribution a = summarize(d, 1);
    std::vector<GapRow> rows = compare(a, a);
    for (const GapRow& r : rows) {
        if (r.name.rfind("ks[", 0) == 0) CHECK(r.empirical == doctest::Approx(0.0));
    }
}

TEST_CASE("report serialization schemas") {
    const std::vector<double> d1 = {0, 1, 2, 3};
    const std::vector<double> d2 = {0, 1, 2, 4};
    ExperimentReport rep;
    rep.config_json = "{\"seed\": 1}";
    rep.rows = compare(summarize(d1, 1), summarize(d2, 1));
    tag_acceptance_rows(rep.rows, {"mean["}, 5.0);

    const std::string csv = report_to_csv(rep);
    CHECK(csv.rfind("name,empirical,limit,gap,stderr\n", 0) == 0);
    // one line per row plus header
    size_t lines = 0;
    for (const char ch : csv)
        if (ch == '\n') ++lines;
    CHECK(lines == rep.rows.size() + 1);

    const std::string json = report_to_json(rep);
    CHECK(json.find("\"config\"") != std::string::npos);
    CHECK(json.find("\"rows\"") != std::string::npos);
    CHECK(json.find("\"ok\"") != std::string::npos);
    CHECK(json.find("\"acceptance\": true") != std::string::npos);
    CHECK(json.back() == '\n');
}
