#pragma once

// The joint limiting law of the standardized monochromatic counts and its
// samplers.
//
// For layer graphons W_i, patterns H_i and c colors, the limit of the Gamma
// vector is
//
//   sqrt((c-1)/(2c)) * N(0, Sigma)
//     + (1/(2 sqrt(c))) * sum_{a=1}^{c-1} I_2(K_i; B^(a)) per component i,
//
// where K_i = (W_i)_{H_i} is the two-point kernel, the double integrals share
// the same c-1 independent Brownian sheets across components, and
//
//   Sigma_ij = rho_ij - <K_i, K_j>,
//   rho_ij   = limit of the empirical inner products; in the shared-graphon
//              regime rho_ij = join_density_sum(H_i, H_j, W).
//
// On step kernels the double integral is an exact quadratic form: with block
// increments xi_u ~ N(0, mu_u),
//
//   I_2(K) = sum_{u,v} K(u,v) (xi_u xi_v - 1{u=v} mu_u)
//          = g^T M g - tr(M),   M = D^(1/2) V D^(1/2),  g ~ N(0, I_k);
//
// for a single kernel this also equals sum_s lambda_s (chi2_{c-1} - (c-1))
// over the kernel's spectrum, which is the chi-square representation.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "monostat/counting.hpp"
#include "monostat/graphon.hpp"
#include "monostat/numeric.hpp"
#include "monostat/parallel.hpp"
#include "monostat/spectral.hpp"

namespace monostat {

// Independent block increments of a Brownian sheet slice: xi_u ~ N(0, mu_u).
struct GaussianIncrement {
    std::vector<double> xi;
};

GaussianIncrement sample_increment(const std::vector<double>& measures, Rng& rng);

struct LimitSpec {
    int c = 2;
    std::vector<StepKernel> kernels;  // one per component, common partition
    Matrix sigma;                     // d x d, symmetric PSD
    std::optional<Matrix> rho;        // the inner-product limits, if known

    int dimension() const { return static_cast<int>(kernels.size()); }
};

// Validates: c >= 2, kernels nonempty on a common partition, sigma symmetric
// d x d with smallest eigenvalue >= -1e-10 * max(1, |Sigma|), and, when rho
// is present, rho_ii = sigma_ii + |K_i|^2 within 1e-8 (self-consistency of
// the stored pieces).
LimitSpec make_limit_spec(int c, std::vector<StepKernel> kernels, Matrix sigma,
                          std::optional<Matrix> rho = std::nullopt);

// Sigma from patterns and layer graphons.  With rho == nullptr all layers
// must share one graphon and rho_ij = join_density_sum(H_i, H_j, W);
// otherwise the caller-provided rho (e.g. from rho_finite) is used.
// Eigenvalues in [-1e-10 * scale, 0) are clamped to 0; below that the matrix
// is rejected as indefinite.
Matrix sigma_matrix(const std::vector<Graph>& hs, const std::vector<StepKernel>& ws,
                    const Matrix* rho);

// Finite-n plug-in for rho: <(W^Gi)_{Hi}, (W^Gj)_{Hj}> on the empirical
// graphons.  For H = K2 this is 8 |E_i cap E_j| / n^2.
double rho_finite(const Graph& hi, const Graph& hj, const Graph& gi, const Graph& gj);

// count x d draws of the shared-sheet integral vector (the second line of the
// limit law, including the 1/(2 sqrt c) prefactor).
Matrix stochastic_integral_sample(const LimitSpec& spec, std::int64_t count, std::uint64_t seed,
                                  const Parallel& par);

// Spectrum of the kernel; sampling contract: (1/(2 sqrt c)) sum_s w_s
// (chi2_{c-1} - (c-1)).
std::vector<double> chi_square_representation(const StepKernel& kernel);
std::vector<double> chi_square_representation_sample(const std::vector<double>& weights, int c,
                                                     std::int64_t count, std::uint64_t seed,
                                                     const Parallel& par);

// count x d draws of the full limit: Gaussian part plus independent integral
// part.  Fails (input_error) if sigma cannot be factored PSD.
Matrix limit_sample(const LimitSpec& spec, std::int64_t count, std::uint64_t seed,
                    const Parallel& par);

// Finite-n Gaussian surrogate of the degree-2 term:
//   Q2 = (1/(2 n sqrt c)) sum_a sum_{u != v} Wt(u,v) Zt_u,a Zt_v,a
// with Wt = 2 * pair_slice_matrix(H, G) and Zt a fresh centered Gaussian
// matrix per draw.
std::vector<double> q2_finite_sample(const Graph& h, const Graph& g, int c, std::int64_t count,
                                     std::uint64_t seed, const Parallel& par);

// The two exact integrals governing asymptotic independence of the integral
// parts driven by kernels R and W: (int R*W, int_x,y (int_z R(x,z) W(z,y))^2).
// Both are zero exactly when the kernels are orthogonal in the operator
// sense.
std::pair<double, double> independence_diagnostics(const StepKernel& r, const StepKernel& w);

// JSON: {"c":2, "kernels":[...], "sigma":[[...]], "rho":[[...]] | null}
LimitSpec parse_limit_spec_json(const std::string& text);
std::string limit_spec_to_json(const LimitSpec& spec);

}  // namespace monostat
