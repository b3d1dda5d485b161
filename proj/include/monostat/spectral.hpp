#pragma once

// Spectra of step kernels and the weighted chi-square machinery built on
// them.
//
// The spectrum of a step kernel K with block measures mu is the eigenvalue
// list of the k x k matrix M = D^(1/2) V D^(1/2), D = diag(mu), V the value
// table: these are the eigenvalues of the integral operator attached to K,
// so sum lambda^2 = |K|_2^2 and sum lambda^4 = t(C4, K) hold exactly and the
// tests pin both.  Tiny eigenvalues are kept; order is descending |lambda|.

#include <cstdint>
#include <vector>

#include "monostat/graphon.hpp"
#include "monostat/parallel.hpp"

namespace monostat {

struct Spectrum {
    std::vector<double> eigenvalues;  // descending by absolute value
};

// Cyclic Jacobi on the symmetric matrix a (row-major k x k, destroyed);
// converges until the off-diagonal Frobenius norm is below 1e-12 times
// max(1, |A|_F).  If vectors is non-null it receives the k x k matrix whose
// COLUMNS are the eigenvectors, in the same order as the returned values.
std::vector<double> jacobi_eigenvalues(std::vector<double> a, int k,
                                       std::vector<double>* vectors = nullptr);

// Budget: k <= 2000.
Spectrum spectrum(const StepKernel& kernel);

// Draws of sum_s weights[s] * (chi2_dof - dof), the chi-squares sampled as
// sums of dof squared standard normals.  Deterministic in (seed) for any
// worker count.
std::vector<double> weighted_chisq_sample(const std::vector<double>& weights, int dof,
                                          std::int64_t count, std::uint64_t seed,
                                          const Parallel& par);

// Per weight row: the two quantities governing whether the weighted sum is
// approximately Gaussian (max |a_s| against the total scale).  Reported as
// data; no pass/fail here.
struct CltConditionRow {
    double max_abs = 0.0;
    double sum_sq = 0.0;
};

std::vector<CltConditionRow> clt_condition_report(
    const std::vector<std::vector<double>>& weight_rows);

}  // namespace monostat
