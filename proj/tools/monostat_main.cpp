// monostat: monochromatic subgraph statistics on multiplex graphs.
//
//   monostat count      --graph g.json --pattern k3 (--coloring x.json | --random --c 2)
//   monostat kernel     --pattern k3 --graphon w.json
//   monostat experiment --preset er-correlated|complement|path-blowup|custom ...
//
// Exit codes: 0 success, 2 invalid input, 3 budget exceeded, 4 an
// acceptance-tagged gap in an experiment report exceeded its allowance.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "monostat/counting.hpp"
#include "monostat/errors.hpp"
#include "monostat/experiments.hpp"
#include "monostat/graphon.hpp"
#include "monostat/graphs.hpp"
#include "monostat/limitlaw.hpp"
#include "monostat/numeric.hpp"
#include "monostat/parallel.hpp"
#include "monostat/rng.hpp"

namespace {

using namespace monostat;
using ojson = nlohmann::ordered_json;

struct RunConfig {
    std::uint64_t seed = 1;
    int workers = 1;
    std::string format = "json";
    std::int64_t max_n = 5000;
    std::int64_t max_colorings = 20000000;
    std::int64_t max_draws = 20000000;
    int max_k = 2000;
    double gap_multiplier = 5.0;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Content is fully materialized before the file is opened, so a failed run
// never leaves a partial file behind.
void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw input_error("cannot write file: " + path);
    out << content;
    out.flush();
    if (!out) throw input_error("write failed: " + path);
}

Graph load_pattern(const std::string& spec) {
    const std::vector<std::string> names = {"k2", "k3", "k4", "p3", "p4", "c4", "c5"};
    for (const std::string& n : names)
        if (spec == n) return pattern_graph(spec);
    return parse_graph_json(read_file(spec));
}

void emit(const RunConfig& cfg, const ojson& obj, const std::string& out_path) {
    std::string text;
    if (cfg.format == "json") {
        text = obj.dump(2) + "\n";
    } else {
        // csv: flat name,value rows
        text = "name,value\n";
        for (const auto& [key, val] : obj.items()) {
            text += key;
            text += ',';
            if (val.is_number_float())
                text += format_double(val.get<double>());
            else
                text += val.dump();
            text += '\n';
        }
    }
    if (out_path.empty())
        std::cout << text;
    else
        write_file(out_path, text);
}

// ---- count ----

struct CountArgs {
    std::string graph_path;
    std::string pattern = "k2";
    std::string coloring_path;
    bool random_coloring = false;
    int c = 2;
    bool exhaustive = false;
    std::string out;
};

int cmd_count(const RunConfig& cfg, const CountArgs& args) {
    const Graph g = parse_graph_json(read_file(args.graph_path));
    const Graph h = load_pattern(args.pattern);
    require_budget(g.vertex_count() <= cfg.max_n, "count: graph exceeds --max-n");

    Coloring x;
    if (args.random_coloring) {
        require_input(args.c >= 2, "count: --random needs --c >= 2");
        Rng rng(cfg.seed, chunk_key(stream::coloring, 0));
        std::vector<std::uint8_t> colors(g.vertex_count());
        for (auto& col : colors) col = static_cast<std::uint8_t>(rng.below(args.c));
        x = Coloring(args.c, std::move(colors));
    } else {
        require_input(!args.coloring_path.empty(), "count: need --coloring FILE or --random");
        x = parse_coloring_json(read_file(args.coloring_path));
        require_input(x.vertex_count() == g.vertex_count(),
                      "count: coloring size does not match the graph");
    }

    const long long t = count_monochromatic(h, g, x);
    const double et = expected_count(h, g, x.c);
    const double gamma = gamma_statistic(h, g, x);

    ojson out;
    out["T"] = t;
    out["ET"] = et;
    out["gamma"] = gamma;

    if (args.exhaustive) {
        const int n = g.vertex_count();
        const double total = std::pow(static_cast<double>(x.c), n);
        require_budget(total <= 1e7, "count: exhaustive enumeration needs c^n <= 1e7");
        std::vector<std::uint8_t> colors(n, 0);
        Kahan s, ss;
        long long colorings = 0;
        for (;;) {
            const Coloring xc(x.c, colors);
            const double tv = static_cast<double>(count_monochromatic(h, g, xc));
            s.add(tv);
            ss.add(tv * tv);
            ++colorings;
            int pos = 0;
            while (pos < n && ++colors[pos] == x.c) colors[pos++] = 0;
            if (pos == n) break;
        }
        const double inv = 1.0 / static_cast<double>(colorings);
        const double mean_t = s.value() * inv;
        const double var_t = ss.value() * inv - mean_t * mean_t;
        const int mv = h.vertex_count();
        const double scale = static_cast<double>(automorphism_count(h)) *
                             std::pow(static_cast<double>(x.c), mv - 1.5) /
                             std::pow(static_cast<double>(n), mv - 1);
        out["exact_mean_T"] = mean_t;
        out["exact_variance_T"] = var_t;
        out["exact_variance_gamma"] = scale * scale * var_t;
    }
    emit(cfg, out, args.out);
    return 0;
}

// ---- kernel ----

struct KernelArgs {
    std::string pattern = "k2";
    std::string graphon_path;
    std::string out;
};

int cmd_kernel(const RunConfig& cfg, const KernelArgs& args) {
    const Graph h = load_pattern(args.pattern);
    require_input(h.edge_count() > 0, "kernel: pattern must have at least one edge");
    require_input(is_connected(h), "kernel: pattern must be connected");
    const StepKernel w = parse_kernel_json(read_file(args.graphon_path));
    require_budget(w.k() <= cfg.max_k, "kernel: block count exceeds --max-k");
    const StepKernel result = two_point_kernel(h, w);
    const std::string text = kernel_to_json(result) + "\n";
    if (args.out.empty())
        std::cout << text;
    else
        write_file(args.out, text);
    return 0;
}

// ---- experiment ----

struct ExperimentArgs {
    std::string preset = "custom";
    int n = 200;
    double p = 0.5;
    double q = 0.5;
    double rho = 0.0;
    int c = 2;
    std::int64_t colorings = 20000;
    std::int64_t limit_draws = 200000;
    std::string pattern = "k2";
    std::string out = "report";
};

// sigma for two layers on constant graphons p and q with per-pair joint
// correlation rho: diagonal entries from the single-layer join sums,
// off-diagonal 4 e1 e2 rho p^(e1-1) q^(e2-1).
Matrix correlated_sigma(const Graph& h1, const Graph& h2, double p, double q, double rho) {
    Matrix sigma(2, 2);
    sigma.at(0, 0) = sigma_matrix({h1}, {constant_graphon(p)}, nullptr).at(0, 0);
    sigma.at(1, 1) = sigma_matrix({h2}, {constant_graphon(q)}, nullptr).at(0, 0);
    const int e1 = h1.edge_count(), e2 = h2.edge_count();
    const double off = 4.0 * e1 * e2 * rho * std::pow(p, e1 - 1) * std::pow(q, e2 - 1);
    sigma.at(0, 1) = off;
    sigma.at(1, 0) = off;
    return sigma;
}

LimitSpec two_layer_spec(const Graph& h1, const Graph& h2, double p, double q, double rho,
                         int c) {
    std::vector<StepKernel> kernels = {two_point_kernel(h1, constant_graphon(p)),
                                       two_point_kernel(h2, constant_graphon(q))};
    Matrix sigma = correlated_sigma(h1, h2, p, q, rho);
    Matrix rho_mat(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            rho_mat.at(i, j) = sigma.at(i, j) + kernel_inner_product(kernels[i], kernels[j]);
    return make_limit_spec(c, std::move(kernels), std::move(sigma), std::move(rho_mat));
}

std::vector<GapRow> run_comparison(const RunConfig& cfg, const std::vector<Graph>& hs,
                                   const Multiplex& m, const LimitSpec& spec,
                                   std::int64_t colorings, std::int64_t limit_draws,
                                   const Parallel& par) {
    const EmpiricalDistribution emp = mc_empirical(hs, m, spec.c, colorings, cfg.seed, par);
    const Matrix draws = limit_sample(spec, limit_draws, cfg.seed, par);
    const EmpiricalDistribution lim = summarize(draws.a, draws.cols);
    std::vector<GapRow> rows = compare(emp, lim);
    tag_acceptance_rows(rows, {"mean[", "cov["}, cfg.gap_multiplier);
    return rows;
}

int cmd_experiment(const RunConfig& cfg, const ExperimentArgs& args) {
    require_budget(args.n <= cfg.max_n, "experiment: --n exceeds --max-n");
    require_budget(args.colorings <= cfg.max_colorings,
                   "experiment: --colorings exceeds --max-colorings");
    require_budget(args.limit_draws <= cfg.max_draws,
                   "experiment: --limit-draws exceeds --max-draws");
    require_input(args.colorings >= 2 && args.limit_draws >= 2,
                  "experiment: needs at least two colorings and two draws");
    require_input(args.c >= 2, "experiment: needs --c >= 2");
    const Parallel par(cfg.workers);

    ojson config;
    config["command"] = "experiment";
    config["preset"] = args.preset;
    config["n"] = args.n;
    config["p"] = args.p;
    config["q"] = args.q;
    config["rho"] = args.rho;
    config["c"] = args.c;
    config["colorings"] = args.colorings;
    config["limit_draws"] = args.limit_draws;
    config["pattern"] = args.pattern;
    config["seed"] = cfg.seed;
    config["workers"] = cfg.workers;
    config["gap_multiplier"] = cfg.gap_multiplier;

    ExperimentReport report;
    std::vector<GapRow> rows;

    if (args.preset == "er-correlated") {
        const Graph h = load_pattern(args.pattern);
        const Multiplex m = sample_correlated_er(args.n, args.p, args.q, args.rho, cfg.seed);
        const LimitSpec spec = two_layer_spec(h, h, args.p, args.q, args.rho, args.c);
        rows = run_comparison(cfg, {h, h}, m, spec, args.colorings, args.limit_draws, par);
        config["sigma_source"] = "constant-graphon closed form";
    } else if (args.preset == "complement") {
        const Graph h = load_pattern(args.pattern);
        const Multiplex m = complement_multiplex(args.n, args.p, cfg.seed);
        // joint edge probability is zero: rho = -p(1-p)
        const double q = 1.0 - args.p;
        const LimitSpec spec = two_layer_spec(h, h, args.p, q, -args.p * q, args.c);
        rows = run_comparison(cfg, {h, h}, m, spec, args.colorings, args.limit_draws, par);
        config["sigma_source"] = "constant-graphon closed form";
    } else if (args.preset == "path-blowup") {
        const Graph k2 = pattern_graph("k2");
        const auto [ma, mb] = path_blowup_multiplexes(args.n);
        const auto make_spec = [&](const Multiplex& m) {
            Matrix rho(2, 2);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    rho.at(i, j) = rho_finite(k2, k2, m.layers[i], m.layers[j]);
            std::vector<StepKernel> ws = {empirical_graphon(m.layers[0]),
                                          empirical_graphon(m.layers[1])};
            Matrix sigma = sigma_matrix({k2, k2}, ws, &rho);
            std::vector<StepKernel> kernels = {two_point_kernel(k2, ws[0]),
                                               two_point_kernel(k2, ws[1])};
            return make_limit_spec(args.c, std::move(kernels), std::move(sigma),
                                   std::move(rho));
        };
        rows = run_comparison(cfg, {k2, k2}, ma, make_spec(ma), args.colorings,
                              args.limit_draws, par);
        for (GapRow& r : rows) r.name = "A." + r.name;
        std::vector<GapRow> rows_b = run_comparison(cfg, {k2, k2}, mb, make_spec(mb),
                                                    args.colorings, args.limit_draws, par);
        for (GapRow& r : rows_b) r.name = "B." + r.name;
        rows.insert(rows.end(), rows_b.begin(), rows_b.end());
        config["sigma_source"] = "finite-n plug-in (exact for blow-ups)";
    } else if (args.preset == "custom") {
        const Graph h = load_pattern(args.pattern);
        const Graph g = erdos_renyi(args.n, args.p, cfg.seed);
        const Multiplex m(args.n, {g});
        const std::vector<StepKernel> ws = {constant_graphon(args.p)};
        Matrix sigma = sigma_matrix({h}, ws, nullptr);
        LimitSpec spec = make_limit_spec(args.c, {two_point_kernel(h, ws[0])},
                                         std::move(sigma));
        rows = run_comparison(cfg, {h}, m, spec, args.colorings, args.limit_draws, par);
        config["sigma_source"] = "shared-graphon join sums";
    } else {
        throw input_error("experiment: unknown preset '" + args.preset +
                          "' (expected er-correlated|complement|path-blowup|custom)");
    }

    report.config_json = config.dump();
    report.rows = std::move(rows);

    const std::string json_text = report_to_json(report);
    const std::string csv_text = report_to_csv(report);
    write_file(args.out + ".json", json_text);
    write_file(args.out + ".csv", csv_text);
    std::cout << (cfg.format == "csv" ? csv_text : json_text);
    return report_ok(report) ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"monochromatic subgraph statistics on multiplex graphs"};
    app.require_subcommand(1);

    RunConfig cfg;
    app.add_option("--seed", cfg.seed, "random seed");
    app.add_option("--workers", cfg.workers, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--format", cfg.format, "output format: json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--max-n", cfg.max_n, "largest allowed host graph");
    app.add_option("--max-colorings", cfg.max_colorings, "largest allowed coloring count");
    app.add_option("--max-draws", cfg.max_draws, "largest allowed sampler draw count");
    app.add_option("--max-k", cfg.max_k, "largest allowed kernel block count");
    app.add_option("--gap-multiplier", cfg.gap_multiplier,
                   "allowed gap in pooled standard errors for acceptance rows");

    CountArgs count_args;
    CLI::App* count = app.add_subcommand("count", "count monochromatic copies and Gamma");
    count->add_option("--graph", count_args.graph_path, "host graph JSON")->required();
    count->add_option("--pattern", count_args.pattern, "pattern name or JSON file");
    count->add_option("--coloring", count_args.coloring_path, "coloring JSON");
    count->add_flag("--random", count_args.random_coloring, "draw a uniform coloring");
    count->add_option("--c", count_args.c, "color count for --random");
    count->add_flag("--exhaustive", count_args.exhaustive,
                    "also enumerate all colorings (c^n <= 1e7)");
    count->add_option("--out", count_args.out, "write output here instead of stdout");

    KernelArgs kernel_args;
    CLI::App* kernel = app.add_subcommand("kernel", "two-point kernel of a pattern in a graphon");
    kernel->add_option("--pattern", kernel_args.pattern, "pattern name or JSON file");
    kernel->add_option("--graphon", kernel_args.graphon_path, "step kernel JSON")->required();
    kernel->add_option("--out", kernel_args.out, "write output here instead of stdout");

    ExperimentArgs exp_args;
    CLI::App* experiment = app.add_subcommand("experiment", "empirical vs limit comparison");
    experiment->add_option("--preset", exp_args.preset,
                           "er-correlated|complement|path-blowup|custom");
    experiment->add_option("--n", exp_args.n, "host size (group size for path-blowup)");
    experiment->add_option("--p", exp_args.p, "layer-1 edge probability");
    experiment->add_option("--q", exp_args.q, "layer-2 edge probability");
    experiment->add_option("--rho", exp_args.rho, "per-pair edge correlation");
    experiment->add_option("--c", exp_args.c, "color count");
    experiment->add_option("--colorings", exp_args.colorings, "Monte Carlo colorings");
    experiment->add_option("--limit-draws", exp_args.limit_draws, "limit sampler draws");
    experiment->add_option("--pattern", exp_args.pattern, "pattern name or JSON file");
    experiment->add_option("--out", exp_args.out, "output base path (writes .json and .csv)");

    try {
        app.parse(argc, argv);
        if (count->parsed()) return cmd_count(cfg, count_args);
        if (kernel->parsed()) return cmd_kernel(cfg, kernel_args);
        if (experiment->parsed()) return cmd_experiment(cfg, exp_args);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const budget_error& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return 3;
    } catch (const input_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
