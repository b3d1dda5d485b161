#include "monostat/limitlaw.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace monostat {

namespace {

bool same_partition(const StepKernel& k1, const StepKernel& k2) {
    if (k1.k() != k2.k()) return false;
    for (int i = 0; i < k1.k(); ++i)
        if (std::abs(k1.measures[i] - k2.measures[i]) > 1e-12) return false;
    return true;
}

// M = D^(1/2) V D^(1/2), the quadratic-form matrix of the integral.
std::vector<double> form_matrix(const StepKernel& kernel) {
    const int k = kernel.k();
    std::vector<double> m(static_cast<size_t>(k) * k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            m[static_cast<size_t>(i) * k + j] =
                std::sqrt(kernel.measures[i] * kernel.measures[j]) * kernel.at(i, j);
    return m;
}

double trace_of(const std::vector<double>& m, int k) {
    double tr = 0.0;
    for (int i = 0; i < k; ++i) tr += m[static_cast<size_t>(i) * k + i];
    return tr;
}

constexpr std::int64_t kChunk = 4096;

}  // namespace

GaussianIncrement sample_increment(const std::vector<double>& measures, Rng& rng) {
    GaussianIncrement inc;
    inc.xi.reserve(measures.size());
    for (double mu : measures) inc.xi.push_back(std::sqrt(mu) * rng.normal());
    return inc;
}

LimitSpec make_limit_spec(int c, std::vector<StepKernel> kernels, Matrix sigma,
                          std::optional<Matrix> rho) {
    require_input(c >= 2, "limit spec: needs c >= 2");
    require_input(!kernels.empty(), "limit spec: needs at least one kernel");
    const int d = static_cast<int>(kernels.size());
    for (int i = 1; i < d; ++i)
        require_input(same_partition(kernels[0], kernels[i]),
                      "limit spec: kernels must share one partition");
    require_input(sigma.rows == d && sigma.cols == d, "limit spec: sigma must be d x d");
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            require_input(std::abs(sigma.at(i, j) - sigma.at(j, i)) <= 1e-12,
                          "limit spec: sigma must be symmetric");
    // PSD within tolerance
    double scale = 1.0;
    for (double v : sigma.a) scale = std::max(scale, std::abs(v));
    const std::vector<double> evals = jacobi_eigenvalues(sigma.a, d);
    for (double ev : evals)
        require_input(ev >= -1e-10 * scale, "limit spec: sigma is not positive semidefinite");
    if (rho) {
        require_input(rho->rows == d && rho->cols == d, "limit spec: rho must be d x d");
        for (int i = 0; i < d; ++i) {
            const double norm2 = kernel_inner_product(kernels[i], kernels[i]);
            require_input(std::abs(rho->at(i, i) - (sigma.at(i, i) + norm2)) <= 1e-8,
                          "limit spec: rho diagonal inconsistent with sigma and kernels");
        }
    }
    LimitSpec spec;
    spec.c = c;
    spec.kernels = std::move(kernels);
    spec.sigma = std::move(sigma);
    spec.rho = std::move(rho);
    return spec;
}

Matrix sigma_matrix(const std::vector<Graph>& hs, const std::vector<StepKernel>& ws,
                    const Matrix* rho) {
    const int d = static_cast<int>(hs.size());
    require_input(d >= 1 && ws.size() == static_cast<size_t>(d),
                  "sigma_matrix: one pattern and one graphon per layer");
    if (!rho) {
        for (int i = 1; i < d; ++i)
            require_input(same_partition(ws[0], ws[i]) && ws[0].values == ws[i].values,
                          "sigma_matrix: shared-graphon regime requires identical graphons; "
                          "supply rho for distinct layers");
    } else {
        require_input(rho->rows == d && rho->cols == d, "sigma_matrix: rho must be d x d");
    }

    std::vector<StepKernel> kernels;
    kernels.reserve(d);
    for (int i = 0; i < d; ++i) kernels.push_back(two_point_kernel(hs[i], ws[i]));

    Matrix sigma(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            const double rij = rho ? rho->at(i, j) : join_density_sum(hs[i], hs[j], ws[0]);
            const double val = rij - kernel_inner_product(kernels[i], kernels[j]);
            sigma.at(i, j) = val;
            sigma.at(j, i) = val;
        }
    }

    double scale = 1.0;
    for (double v : sigma.a) scale = std::max(scale, std::abs(v));
    std::vector<double> evals = jacobi_eigenvalues(sigma.a, d);
    for (double ev : evals)
        require_input(ev >= -1e-10 * scale,
                      "sigma_matrix: result is indefinite beyond tolerance (inconsistent rho?)");
    return sigma;
}

double rho_finite(const Graph& hi, const Graph& hj, const Graph& gi, const Graph& gj) {
    require_input(gi.vertex_count() == gj.vertex_count(),
                  "rho_finite: hosts must share a vertex set");
    const StepKernel ki = two_point_kernel(hi, empirical_graphon(gi));
    const StepKernel kj = two_point_kernel(hj, empirical_graphon(gj));
    return kernel_inner_product(ki, kj);
}

Matrix stochastic_integral_sample(const LimitSpec& spec, std::int64_t count, std::uint64_t seed,
                                  const Parallel& par) {
    const int d = spec.dimension();
    const int k = spec.kernels[0].k();
    const int sheets = spec.c - 1;
    std::vector<std::vector<double>> ms;
    std::vector<double> traces;
    for (const StepKernel& kernel : spec.kernels) {
        ms.push_back(form_matrix(kernel));
        traces.push_back(trace_of(ms.back(), k));
    }
    const double pref = 1.0 / (2.0 * std::sqrt(static_cast<double>(spec.c)));

    Matrix out(static_cast<int>(count), d);
    const std::int64_t chunks = chunk_count(count, kChunk);
    par.run_chunks(chunks, [&](std::int64_t ci) {
        Rng rng(seed, chunk_key(stream::limit, static_cast<std::uint64_t>(ci)));
        const std::int64_t lo = ci * kChunk;
        const std::int64_t hi = std::min(count, lo + kChunk);
        std::vector<double> g(k);
        std::vector<double> acc(d);
        for (std::int64_t dr = lo; dr < hi; ++dr) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int a = 0; a < sheets; ++a) {
                for (int u = 0; u < k; ++u) g[u] = rng.normal();
                for (int i = 0; i < d; ++i) {
                    const std::vector<double>& m = ms[i];
                    double quad = 0.0;
                    for (int u = 0; u < k; ++u) {
                        const double* row = m.data() + static_cast<size_t>(u) * k;
                        double dot = 0.0;
                        for (int v = 0; v < k; ++v) dot += row[v] * g[v];
                        quad += g[u] * dot;
                    }
                    acc[i] += quad - traces[i];
                }
            }
            for (int i = 0; i < d; ++i) out.at(static_cast<int>(dr), i) = pref * acc[i];
        }
    });
    return out;
}

std::vector<double> chi_square_representation(const StepKernel& kernel) {
    return spectrum(kernel).eigenvalues;
}

std::vector<double> chi_square_representation_sample(const std::vector<double>& weights, int c,
                                                     std::int64_t count, std::uint64_t seed,
                                                     const Parallel& par) {
    require_input(c >= 2, "chi-square representation: needs c >= 2");
    std::vector<double> out = weighted_chisq_sample(weights, c - 1, count, seed, par);
    const double pref = 1.0 / (2.0 * std::sqrt(static_cast<double>(c)));
    for (double& v : out) v *= pref;
    return out;
}

namespace {

// Sigma = Q diag(l) Q^T -> factor L = Q diag(sqrt(max(l,0))); negative
// eigenvalues beyond tolerance are an error.
Matrix psd_factor(const Matrix& sigma) {
    const int d = sigma.rows;
    double scale = 1.0;
    for (double v : sigma.a) scale = std::max(scale, std::abs(v));
    std::vector<double> vecs;
    std::vector<double> evals = jacobi_eigenvalues(sigma.a, d, &vecs);
    Matrix l(d, d);
    for (int j = 0; j < d; ++j) {
        require_input(evals[j] >= -1e-10 * scale, "limit_sample: sigma is not PSD");
        const double root = std::sqrt(std::max(evals[j], 0.0));
        for (int i = 0; i < d; ++i) l.at(i, j) = vecs[static_cast<size_t>(i) * d + j] * root;
    }
    return l;
}

}  // namespace

Matrix limit_sample(const LimitSpec& spec, std::int64_t count, std::uint64_t seed,
                    const Parallel& par) {
    const int d = spec.dimension();
    const int k = spec.kernels[0].k();
    const int sheets = spec.c - 1;
    const Matrix lfac = psd_factor(spec.sigma);
    const double gauss_pref = std::sqrt((spec.c - 1.0) / (2.0 * spec.c));
    const double int_pref = 1.0 / (2.0 * std::sqrt(static_cast<double>(spec.c)));

    std::vector<std::vector<double>> ms;
    std::vector<double> traces;
    for (const StepKernel& kernel : spec.kernels) {
        ms.push_back(form_matrix(kernel));
        traces.push_back(trace_of(ms.back(), k));
    }

    Matrix out(static_cast<int>(count), d);
    const std::int64_t chunks = chunk_count(count, kChunk);
    par.run_chunks(chunks, [&](std::int64_t ci) {
        Rng rng(seed, chunk_key(stream::limit, static_cast<std::uint64_t>(ci)));
        const std::int64_t lo = ci * kChunk;
        const std::int64_t hi = std::min(count, lo + kChunk);
        std::vector<double> g(k);
        std::vector<double> gd(d);
        std::vector<double> acc(d);
        for (std::int64_t dr = lo; dr < hi; ++dr) {
            // Gaussian component first, then the shared-sheet integrals; the
            // fixed order keeps the stream layout reproducible.
            for (int i = 0; i < d; ++i) gd[i] = rng.normal();
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int a = 0; a < sheets; ++a) {
                for (int u = 0; u < k; ++u) g[u] = rng.normal();
                for (int i = 0; i < d; ++i) {
                    const std::vector<double>& m = ms[i];
                    double quad = 0.0;
                    for (int u = 0; u < k; ++u) {
                        const double* row = m.data() + static_cast<size_t>(u) * k;
                        double dot = 0.0;
                        for (int v = 0; v < k; ++v) dot += row[v] * g[v];
                        quad += g[u] * dot;
                    }
                    acc[i] += quad - traces[i];
                }
            }
            for (int i = 0; i < d; ++i) {
                double gauss = 0.0;
                for (int j = 0; j < d; ++j) gauss += lfac.at(i, j) * gd[j];
                out.at(static_cast<int>(dr), i) = gauss_pref * gauss + int_pref * acc[i];
            }
        }
    });
    return out;
}

std::vector<double> q2_finite_sample(const Graph& h, const Graph& g, int c, std::int64_t count,
                                     std::uint64_t seed, const Parallel& par) {
    require_input(c >= 2, "q2_finite_sample: needs c >= 2");
    const int n = g.vertex_count();
    const Matrix f = pair_slice_matrix(h, g);

    // sparse upper-triangular list of 2*F(u,v) (the symmetrized kernel)
    struct Entry {
        int u, v;
        double w;
    };
    std::vector<Entry> entries;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (f.at(u, v) != 0.0) entries.push_back({u, v, 2.0 * f.at(u, v)});

    const double pref = 1.0 / (static_cast<double>(n) * std::sqrt(static_cast<double>(c)));
    std::vector<double> out(static_cast<size_t>(count));
    const std::int64_t chunks = chunk_count(count, kChunk);
    par.run_chunks(chunks, [&](std::int64_t ci) {
        Rng rng(seed, chunk_key(stream::q2, static_cast<std::uint64_t>(ci)));
        const std::int64_t lo = ci * kChunk;
        const std::int64_t hi = std::min(count, lo + kChunk);
        for (std::int64_t dr = lo; dr < hi; ++dr) {
            const CenteredColorMatrix zm = gaussian_centered_matrix(n, c, rng);
            Kahan acc;
            for (const Entry& e : entries) {
                double dot = 0.0;
                for (int a = 0; a < c; ++a) dot += zm.at(e.u, a) * zm.at(e.v, a);
                acc.add(e.w * dot);
            }
            out[static_cast<size_t>(dr)] = pref * acc.value();
        }
    });
    return out;
}

std::pair<double, double> independence_diagnostics(const StepKernel& r, const StepKernel& w) {
    const double first = kernel_inner_product(r, w);
    // operator product S(x,y) = int R(x,z) W(z,y) dz on the common refinement
    const StepKernel rr = kernel_combine(1.0, r, 0.0, w);  // r on the refined partition
    const StepKernel ww = kernel_combine(0.0, r, 1.0, w);
    const int k = rr.k();
    Kahan second;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            Kahan s;
            for (int z = 0; z < k; ++z) s.add(rr.measures[z] * rr.at(i, z) * ww.at(z, j));
            second.add(rr.measures[i] * rr.measures[j] * sq(s.value()));
        }
    return {first, second.value()};
}

// ---- JSON ----

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols; ++j) row.push_back(m.at(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const char* what) {
    require_input(j.is_array() && !j.empty(), std::string(what) + ": expected a matrix");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j[0].size());
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        require_input(j[i].is_array() && static_cast<int>(j[i].size()) == cols,
                      std::string(what) + ": ragged matrix");
        for (int jj = 0; jj < cols; ++jj) {
            require_input(j[i][jj].is_number(), std::string(what) + ": non-numeric entry");
            m.at(i, jj) = j[i][jj].get<double>();
        }
    }
    return m;
}

}  // namespace

LimitSpec parse_limit_spec_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw input_error(std::string("limit spec: ") + e.what());
    }
    require_input(j.is_object() && j.contains("c") && j.contains("kernels") &&
                      j.contains("sigma"),
                  "limit spec: expected fields c, kernels, sigma");
    require_input(j["c"].is_number_integer(), "limit spec: c must be an integer");
    std::vector<StepKernel> kernels;
    require_input(j["kernels"].is_array() && !j["kernels"].empty(),
                  "limit spec: kernels must be a nonempty array");
    for (const auto& kj : j["kernels"]) kernels.push_back(parse_kernel_json(kj.dump()));
    Matrix sigma = matrix_from_json(j["sigma"], "limit spec sigma");
    std::optional<Matrix> rho;
    if (j.contains("rho") && !j["rho"].is_null())
        rho = matrix_from_json(j["rho"], "limit spec rho");
    return make_limit_spec(j["c"].get<int>(), std::move(kernels), std::move(sigma),
                           std::move(rho));
}

std::string limit_spec_to_json(const LimitSpec& spec) {
    json kernels = json::array();
    for (const StepKernel& k : spec.kernels)
        kernels.push_back(json::parse(kernel_to_json(k)));
    json j{{"c", spec.c},
           {"kernels", std::move(kernels)},
           {"sigma", matrix_to_json(spec.sigma)},
           {"rho", spec.rho ? matrix_to_json(*spec.rho) : json(nullptr)}};
    return j.dump();
}

}  // namespace monostat
