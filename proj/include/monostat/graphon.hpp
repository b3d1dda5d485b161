#pragma once

// Step kernels and graphons on a common block structure.
//
// A step kernel is a symmetric function on [0,1]^2 that is constant on the
// cells of a product partition: block i has measure mu_i (> 0, summing to 1)
// and the value on block (i,j) is values[i][j].  A step graphon additionally
// takes values in [0,1].  The class of kernels is closed under everything we
// do here: differences, the two-point operation, rescaling.
//
// The two-point kernel of a pattern H in W generalizes degree and
// codegree: pin an ordered pair of distinct vertices of H at (x,y), integrate
// the product of W over all edges of H against the free vertices, and sum
// over the m(m-1) ordered pins.  For H = K2 this is exactly 2W; its inner
// products against other two-point kernels produce the covariance structure
// of the limiting law.

#include <string>
#include <utility>
#include <vector>

#include "monostat/graphs.hpp"

namespace monostat {

struct StepKernel {
    std::vector<double> measures;  // k block measures, positive, sum to 1
    std::vector<double> values;    // k*k, symmetric
    double bound = 0.0;            // sup bound on |values| (may exceed the max)

    int k() const { return static_cast<int>(measures.size()); }
    double at(int i, int j) const { return values[static_cast<size_t>(i) * k() + j]; }
    double& at(int i, int j) { return values[static_cast<size_t>(i) * k() + j]; }
};

// Validates measures (positive, sum within 1e-12 of 1) and symmetry; the
// bound defaults to max |value|.
StepKernel make_step_kernel(std::vector<double> measures, std::vector<double> values);
StepKernel make_step_kernel(std::vector<double> measures, std::vector<double> values,
                            double bound);
// As above, plus values constrained to [0,1].
StepKernel make_step_graphon(std::vector<double> measures, std::vector<double> values);
StepKernel constant_graphon(double p);

// k = n blocks of measure 1/n, values = adjacency (0/1, zero diagonal).
StepKernel empirical_graphon(const Graph& g);

// Homomorphism density t(F, K): all maps V(F) -> blocks, not only injective.
// Budget: k^|V(F)| <= 2e8 evaluations.
double hom_density(const Graph& f, const StepKernel& kernel);

// Two-point kernel (W)_H described above; same partition as the input,
// bound = m(m-1) * bound^|E(H)|.
StepKernel two_point_kernel(const Graph& h, const StepKernel& kernel);

// L2 inner product <K1, K2> = sum mu_i mu_j K1(i,j) K2(i,j) over the common
// refinement of the two partitions.
double kernel_inner_product(const StepKernel& k1, const StepKernel& k2);

// Pointwise a*K1 + b*K2 on the common refinement.
StepKernel kernel_combine(double a, const StepKernel& k1, double b, const StepKernel& k2);
StepKernel kernel_scale(double a, const StepKernel& k1);

// Exact cut norm sup_{S,T} |sum_{S x T} mu_i mu_j K(i,j)| over block subsets.
// Budget: k <= 20 (Gray-code enumeration of S, greedy optimal T).
double cut_norm(const StepKernel& kernel);

// Cut distance restricted to relabelings: both kernels must have the same
// number of equal-measure blocks; minimizes cut_norm(K1 - K2 o pi) over all
// block permutations pi.  Budget: k <= 9.
double cut_distance_aligned(const StepKernel& k1, const StepKernel& k2);

// Sum of hom densities of all m1(m1-1) * m2(m2-1) pin-pair joins of H1 and
// H2 in the kernel.  For 0/1-valued kernels this equals
// <(W)_H1, (W)_H2>; off the 0/1 case the simple join deduplicates the glued
// edge and the identity acquires the variance gap.
double join_density_sum(const Graph& h1, const Graph& h2, const StepKernel& kernel);

// Ratios cut_norm((W + t R)_H - (W)_H) / (t * cut_norm(R)) for each t.
// Errors out when cut_norm(R) is zero.
std::vector<double> lipschitz_probe(const Graph& h, const StepKernel& w, const StepKernel& r,
                                    const std::vector<double>& ts);

// JSON: {"measures": [...], "values": [[...], ...]}
StepKernel parse_kernel_json(const std::string& text);
std::string kernel_to_json(const StepKernel& kernel);

}  // namespace monostat
