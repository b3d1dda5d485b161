#include "monostat/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "monostat/numeric.hpp"
#include "monostat/rng.hpp"

namespace monostat {

std::vector<double> jacobi_eigenvalues(std::vector<double> a, int k,
                                       std::vector<double>* vectors) {
    require_input(k >= 1 && a.size() == static_cast<size_t>(k) * k,
                  "jacobi: matrix must be k x k");
    auto at = [&](int i, int j) -> double& { return a[static_cast<size_t>(i) * k + j]; };

    std::vector<double> v;
    if (vectors) {
        v.assign(static_cast<size_t>(k) * k, 0.0);
        for (int i = 0; i < k; ++i) v[static_cast<size_t>(i) * k + i] = 1.0;
    }

    double fro = 0.0;
    for (double x : a) fro += x * x;
    const double target = 1e-12 * std::max(1.0, std::sqrt(fro));

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) off += 2.0 * sq(at(i, j));
        if (std::sqrt(off) < target) break;

        for (int p = 0; p < k - 1; ++p) {
            for (int q = p + 1; q < k; ++q) {
                const double apq = at(p, q);
                if (apq == 0.0) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                const double app = at(p, p), aqq = at(q, q);
                at(p, p) = app - t * apq;
                at(q, q) = aqq + t * apq;
                at(p, q) = 0.0;
                at(q, p) = 0.0;
                for (int i = 0; i < k; ++i) {
                    if (i == p || i == q) continue;
                    const double aip = at(i, p), aiq = at(i, q);
                    at(i, p) = aip - s * (aiq + tau * aip);
                    at(p, i) = at(i, p);
                    at(i, q) = aiq + s * (aip - tau * aiq);
                    at(q, i) = at(i, q);
                }
                if (vectors) {
                    for (int i = 0; i < k; ++i) {
                        double& vip = v[static_cast<size_t>(i) * k + p];
                        double& viq = v[static_cast<size_t>(i) * k + q];
                        const double a1 = vip, a2 = viq;
                        vip = a1 - s * (a2 + tau * a1);
                        viq = a2 + s * (a1 - tau * a2);
                    }
                }
            }
        }
    }

    std::vector<double> evals(k);
    for (int i = 0; i < k; ++i) evals[i] = at(i, i);

    // order by descending absolute value, carrying the eigenvector columns
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        return std::abs(evals[x]) > std::abs(evals[y]);
    });
    std::vector<double> sorted(k);
    for (int i = 0; i < k; ++i) sorted[i] = evals[order[i]];
    if (vectors) {
        vectors->assign(static_cast<size_t>(k) * k, 0.0);
        for (int col = 0; col < k; ++col)
            for (int row = 0; row < k; ++row)
                (*vectors)[static_cast<size_t>(row) * k + col] =
                    v[static_cast<size_t>(row) * k + order[col]];
    }
    return sorted;
}

Spectrum spectrum(const StepKernel& kernel) {
    const int k = kernel.k();
    require_budget(k <= 2000, "spectrum: limited to 2000 blocks");
    std::vector<double> m(static_cast<size_t>(k) * k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            m[static_cast<size_t>(i) * k + j] =
                std::sqrt(kernel.measures[i] * kernel.measures[j]) * kernel.at(i, j);
    return Spectrum{jacobi_eigenvalues(std::move(m), k)};
}

std::vector<double> weighted_chisq_sample(const std::vector<double>& weights, int dof,
                                          std::int64_t count, std::uint64_t seed,
                                          const Parallel& par) {
    require_input(dof >= 1, "weighted_chisq_sample: dof must be positive");
    require_input(count >= 0, "weighted_chisq_sample: negative draw count");
    std::vector<double> out(static_cast<size_t>(count));
    constexpr std::int64_t kChunk = 4096;
    const std::int64_t chunks = chunk_count(count, kChunk);
    par.run_chunks(chunks, [&](std::int64_t ci) {
        Rng rng(seed, chunk_key(stream::chisq, static_cast<std::uint64_t>(ci)));
        const std::int64_t lo = ci * kChunk;
        const std::int64_t hi = std::min(count, lo + kChunk);
        for (std::int64_t d = lo; d < hi; ++d) {
            Kahan acc;
            for (double w : weights) {
                double chi = 0.0;
                for (int i = 0; i < dof; ++i) chi += sq(rng.normal());
                acc.add(w * (chi - dof));
            }
            out[static_cast<size_t>(d)] = acc.value();
        }
    });
    return out;
}

std::vector<CltConditionRow> clt_condition_report(
    const std::vector<std::vector<double>>& weight_rows) {
    std::vector<CltConditionRow> out;
    out.reserve(weight_rows.size());
    for (const auto& row : weight_rows) {
        CltConditionRow r;
        Kahan ss;
        for (double w : row) {
            r.max_abs = std::max(r.max_abs, std::abs(w));
            ss.add(w * w);
        }
        r.sum_sq = ss.value();
        out.push_back(r);
    }
    return out;
}

}  // namespace monostat
