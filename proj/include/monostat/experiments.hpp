#pragma once

// Experiment harness: random multiplex generators, the Monte Carlo loop that
// colors a fixed multiplex and collects standardized count vectors, and the
// comparison report against draws from a limit sampler.
//
// All generators are keyed: edge indicators come from a counter-based hash of
// (seed, pair index), so a graph is reproducible independent of iteration
// order, and two layers with the same seed share their coupling exactly.

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "monostat/counting.hpp"
#include "monostat/graphs.hpp"
#include "monostat/graphon.hpp"
#include "monostat/numeric.hpp"
#include "monostat/parallel.hpp"

namespace monostat {

// G(n, p) with edges decided by keyed_uniform(seed, salt, pair index).
Graph erdos_renyi(int n, double p, std::uint64_t seed, std::uint64_t salt = 0);

// Two layers with marginals p, q and per-pair joint probability
// p12 = rho + p q; errors out unless max(p+q-1, 0) <= p12 <= min(p, q).
Multiplex sample_correlated_er(int n, double p, double q, double rho, std::uint64_t seed);

// (G, complement of G) with G = G(n, p).
Multiplex complement_multiplex(int n, double p, std::uint64_t seed);

// Blow-up of the path on four groups of `group` vertices each (n = 4*group):
// layer G1 joins consecutive groups (1,2), (2,3), (3,4); G2 keeps only the
// (1,2) band and G3 only the (2,3) band.  Returns the multiplex pair
// A = (G1, G2) and B = (G1, G3).
std::pair<Multiplex, Multiplex> path_blowup_multiplexes(int group);

// The three band graphons underlying the blow-up, on four blocks of measure
// 1/4: full path bands, the (1,2) band, the (2,3) band.
std::array<StepKernel, 3> path_blowup_kernels();

// ---- empirical distributions ----

struct SummaryStat {
    std::string name;
    double value = 0.0;
    double se = 0.0;
};

struct EmpiricalDistribution {
    int d = 0;
    std::int64_t draws = 0;
    std::vector<double> data;  // draws x d, row-major
    // mean[i], cov[i][j] (i <= j), central3[i], central4[i], diff4[i][j]
    std::vector<SummaryStat> stats;
};

// Deterministic summary (fixed-order compensated sums) of draws x d data.
EmpiricalDistribution summarize(std::vector<double> data, int d);

// Colors the multiplex uniformly `colorings` times and records the gamma
// vector of each draw.  hs.size() must match the layer count.
EmpiricalDistribution mc_empirical(const std::vector<Graph>& hs, const Multiplex& m, int c,
                                   std::int64_t colorings, std::uint64_t seed,
                                   const Parallel& par);

// ---- comparison reports ----

struct GapRow {
    std::string name;
    double empirical = 0.0;
    double limit = 0.0;
    double gap = 0.0;
    double se = 0.0;         // pooled standard error (or scale for KS rows)
    bool acceptance = false; // participates in the exit-code gate
    double multiplier = 0.0; // allowed gap in units of se
};

struct ExperimentReport {
    std::string config_json;  // echo of the run configuration
    std::vector<GapRow> rows;
};

// Matches the two summaries stat by stat and appends a descriptive
// two-sample KS row per marginal.
std::vector<GapRow> compare(const EmpiricalDistribution& emp, const EmpiricalDistribution& lim);

// Tags rows whose name starts with one of the prefixes as acceptance rows.
void tag_acceptance_rows(std::vector<GapRow>& rows, const std::vector<std::string>& prefixes,
                         double multiplier);

bool report_ok(const ExperimentReport& report);

std::string report_to_json(const ExperimentReport& report);
// CSV schema: name,empirical,limit,gap,stderr
std::string report_to_csv(const ExperimentReport& report);

}  // namespace monostat
