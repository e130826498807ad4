// mixsem command-line interface.
//
// Exit codes: 0 success, 2 usage, 3 input parse or contract violation,
// 4 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mixsem/io.hpp"
#include "mixsem/mixsem.hpp"

using namespace mixsem;
using io::json;

namespace {

enum class Format { Json, Csv, Table };

struct Common {
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "json";
    int threads = default_thread_count();

    Format fmt() const { return format == "csv" ? Format::Csv : format == "table" ? Format::Table : Format::Json; }
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    cmd->add_option("--out", c.out, "Output file (default: stdout)");
    cmd->add_option("--format", c.format, "Output format")
        ->check(CLI::IsMember({"json", "csv", "table"}))
        ->capture_default_str();
    cmd->add_option("--threads", c.threads, "Worker threads (default: MIXSEM_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    out << text;
}

std::string scalar_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

/// Generic rendering of a flat JSON object.
std::string render(const json& j, Format f) {
    if (f == Format::Json) return io::dump(j);
    const json r = io::rounded(j);
    std::ostringstream os;
    if (f == Format::Csv) os << "key,value\n";
    for (auto it = r.begin(); it != r.end(); ++it) {
        const std::string v = scalar_text(it.value());
        if (f == Format::Csv)
            os << it.key() << "," << (v.find(',') != std::string::npos ? "\"" + v + "\"" : v) << "\n";
        else
            os << it.key() << ": " << v << "\n";
    }
    return os.str();
}

std::string graph_line(const MixedGraph& g) { return g.to_string(); }

struct CovInput {
    Matrix s;
    double n = 0;
    bool copula = false;
    bool floored = false;
    double floor = 0;
    std::int64_t tied_pairs = 0;
    std::vector<std::string> names;
};

CovInput covariance_from_csv(const std::string& path, bool header, bool copula) {
    Dataset d = io::read_csv(path, header);
    CovInput c;
    c.n = static_cast<double>(d.n());
    c.copula = copula;
    c.names = d.names;
    if (copula) {
        auto k = kendall_tau_matrix(d);
        c.s = k.corr;
        c.floored = k.floored;
        c.floor = k.floor;
        c.tied_pairs = k.tied_pairs;
    } else {
        c.s = sample_cov(d);
    }
    return c;
}

void require_same_p(const MixedGraph& g, Eigen::Index p, const std::string& what) {
    if (g.p() != p)
        throw ContractError(what + " has " + std::to_string(g.p()) + " vertices but the data has " +
                            std::to_string(p) + " columns");
}

// --- subcommands -----------------------------------------------------------

struct SimulateArgs {
    Common c;
    std::string graph;
    int p = 5;
    int n = 1000;
    std::string data;
};

int cmd_simulate(const SimulateArgs& a) {
    Rng rng = substream(a.c.seed);
    MixedGraph g = a.graph.empty() ? random_simple_graph(a.p, rng) : io::read_graph(a.graph);
    require_simple(g, "simulate");
    Params params = simulate_parameters(g, rng);
    Rng data_rng = substream(a.c.seed, {1});
    Dataset d = sample_data(g, params, a.n, data_rng);
    for (int i = 1; i <= g.p(); ++i) d.names.push_back("X" + std::to_string(i));
    if (!a.data.empty()) write_text(a.data, io::to_csv(d));
    if (a.c.fmt() == Format::Csv) {
        write_text(a.c.out, io::to_csv(d));
    } else if (a.c.fmt() == Format::Table) {
        std::ostringstream os;
        os << "graph: " << graph_line(g) << "\nn: " << a.n << "\nlambda:\n"
           << params.lambda << "\nomega:\n"
           << params.omega << "\n";
        write_text(a.c.out, os.str());
    } else {
        write_text(a.c.out, io::dump(io::to_json(g, params)));
    }
    return 0;
}

struct DimArgs {
    Common c;
    std::string graph;
    int trials = 5;
    bool require_simple = false;
};

int cmd_dim(const DimArgs& a) {
    MixedGraph g = io::read_graph(a.graph, true);
    const bool simple = is_simple(g);
    if (a.require_simple && !simple)
        throw ContractError(a.graph + ": graph is not simple (" + graph_line(g) +
                            "); the parameter count is only guaranteed to be the dimension for simple graphs");
    const auto expected = parameter_count(g);
    const auto certified = model_dimension(g, a.trials, a.c.seed);
    if (certified < expected)
        std::cerr << "warning: certified dimension " << certified << " is below the parameter count " << expected
                  << "\n";
    json j = {{"expected", expected}, {"certified", certified}, {"simple", simple}};
    write_text(a.c.out, render(j, a.c.fmt()));
    return 0;
}

struct EquivArgs {
    Common c;
    std::string a, b, params;
};

int cmd_equiv(const EquivArgs& a) {
    MixedGraph g1 = io::read_graph(a.a), g2 = io::read_graph(a.b);
    if (g1.p() != g2.p()) throw ContractError("graphs have different vertex counts");
    const bool skel = skeleton(g1) == skeleton(g2);
    const bool coll = collider_triples(g1) == collider_triples(g2);
    json j = {{"same_skeleton", skel},
              {"same_colliders", coll},
              {"verdict", skel && coll ? "equivalent (markers match)" : "inconclusive"},
              {"residual", nullptr}};
    if (!a.params.empty()) {
        auto gp = io::read_params(a.params);
        if (gp.graph != g1) throw ContractError(a.params + ": parameters belong to a different graph than " + a.a);
        if (skel && coll) {
            auto t = transfer_parameters(g1, g2, gp.params);
            j["residual"] = t.residual;
            j["det1"] = t.det1;
            j["det2"] = t.det2;
            j["omega_positive_definite"] = t.omega_positive_definite;
            if (a.c.fmt() == Format::Json) j["transferred"] = io::to_json(g2, t.params);
        }
    }
    write_text(a.c.out, render(j, a.c.fmt()));
    return 0;
}

struct FitArgs {
    Common c;
    std::string graph, data;
    bool header = false, copula = false, trace = false;
    std::string penalty = "standard";
    int restarts = 5;
};

int cmd_fit(const FitArgs& a) {
    MixedGraph g = io::read_graph(a.graph);
    CovInput in = covariance_from_csv(a.data, a.header, a.copula);
    require_same_p(g, in.s.rows(), a.graph);
    FitConfig cfg;
    cfg.restarts = a.restarts;
    cfg.seed = a.c.seed;
    auto fit = fit_mle(g, in.s, in.n, cfg);
    const PenaltyKind kind = io::penalty_from_string(a.penalty);
    json j = io::to_json(fit, a.trace);
    j["graph"] = io::to_json(g);
    j["score"] = score_from_fit(g, fit, kind);
    j["penalty"] = to_string(kind);
    j["copula"] = in.copula;
    if (in.copula) j["eigenvalue_floor"] = in.floored ? json(in.floor) : json(nullptr);
    if (a.c.fmt() == Format::Json) {
        write_text(a.c.out, io::dump(j));
    } else {
        json flat = {{"graph", graph_line(g)}, {"loglik", fit.loglik},       {"score", j["score"]},
                     {"n", fit.n},            {"sweeps_used", fit.sweeps_used}, {"converged", fit.converged},
                     {"ridge", fit.ridge},    {"copula", in.copula}};
        write_text(a.c.out, render(flat, a.c.fmt()));
    }
    return 0;
}

struct SearchArgs {
    Common c;
    std::string data, start, truth, trace_dir;
    bool header = false, copula = false;
    std::string penalty = "standard";
    int restarts = 300, max_iters = 10000, fit_restarts = 5;
};

int cmd_search(const SearchArgs& a) {
    CovInput in = covariance_from_csv(a.data, a.header, a.copula);
    SearchConfig cfg;
    cfg.restarts = a.restarts;
    cfg.max_iters = a.max_iters;
    cfg.penalty = io::penalty_from_string(a.penalty);
    cfg.fit.restarts = a.fit_restarts;
    cfg.seed = a.c.seed;
    cfg.threads = a.c.threads;
    if (!a.start.empty()) {
        cfg.start = io::read_graph(a.start);
        require_same_p(*cfg.start, in.s.rows(), a.start);
    }
    auto result = multi_restart_search(in.s, in.n, cfg);
    const auto& best = result.best;

    if (!a.trace_dir.empty()) {
        std::filesystem::create_directories(a.trace_dir);
        for (const auto& t : result.all) {
            char name[32];
            std::snprintf(name, sizeof name, "restart_%04d.csv", t.restart);
            write_text((std::filesystem::path(a.trace_dir) / name).string(), io::trace_csv(t));
        }
    }

    json failures = json::object();
    for (const auto& [k, msg] : result.failures) failures[std::to_string(k)] = msg;
    json j = {{"graph", io::to_json(best.final_graph)},
              {"score", best.final_score},
              {"edges", io::edge_summary(best.final_graph)},
              {"best_restart", best.restart},
              {"restarts", cfg.restarts},
              {"failures", failures},
              {"penalty", to_string(cfg.penalty)},
              {"copula", in.copula},
              {"n", in.n}};
    if (in.copula) j["eigenvalue_floor"] = in.floored ? json(in.floor) : json(nullptr);
    if (!in.names.empty()) j["names"] = in.names;
    std::optional<RecoveryMetrics> metrics;
    if (!a.truth.empty()) {
        MixedGraph truth = io::read_graph(a.truth);
        require_same_p(truth, in.s.rows(), a.truth);
        metrics = recovery_metrics(best.final_graph, truth);
        j["metrics"] = io::to_json(*metrics);
    }
    if (a.c.fmt() == Format::Json) {
        write_text(a.c.out, io::dump(j));
        return 0;
    }
    json flat = {{"graph", graph_line(best.final_graph)},
                 {"score", best.final_score},
                 {"edges_all", best.final_graph.edge_count()},
                 {"edges_directed", best.final_graph.directed().size()},
                 {"edges_bidirected", best.final_graph.bidirected().size()},
                 {"best_restart", best.restart},
                 {"failed_restarts", result.failures.size()},
                 {"copula", in.copula}};
    if (metrics) {
        flat["Dim"] = metrics->same_dimension;
        flat["Skel"] = metrics->same_skeleton;
        flat["SkelColl"] = metrics->same_skeleton_and_colliders;
        flat["SHDstar"] = metrics->shd_star ? json(*metrics->shd_star) : json(nullptr);
    }
    write_text(a.c.out, render(flat, a.c.fmt()));
    return 0;
}

struct ShdArgs {
    Common c;
    std::string a, b;
    std::size_t cap = kDefaultMarkerCap;
};

int cmd_shd(const ShdArgs& a) {
    MixedGraph g1 = io::read_graph(a.a), g2 = io::read_graph(a.b);
    json j = {{"shd", shd(g1, g2)}, {"shd_star", nullptr}};
    try {
        j["shd_star"] = shd_star(g1, g2, a.cap);
    } catch (const EnumerationTooLarge& e) {
        std::cerr << "warning: " << e.what() << "\n";
    }
    write_text(a.c.out, render(j, a.c.fmt()));
    return 0;
}

struct BenchArgs {
    Common c;
    std::string config;
    bool seed_given = false;
    bool threads_given = false;
};

int cmd_bench(const BenchArgs& a) {
    const json raw = io::parse_json(io::read_file(a.config), a.config);
    BenchConfig cfg = io::bench_config_from_json(raw);
    // Command-line flags override the file; the file overrides defaults.
    if (a.seed_given) cfg.seed = a.c.seed;
    if (a.threads_given || !raw.contains("threads")) cfg.threads = a.c.threads;
    auto report = run_benchmark(cfg);
    const std::string prefix = a.c.out.empty() ? "bench" : a.c.out;
    write_text(prefix + ".json", io::dump(io::to_json(report)));
    write_text(prefix + ".csv", io::replicate_csv(report));
    for (const auto& f : report.failures) std::cerr << "warning: " << f << "\n";
    if (a.c.fmt() == Format::Csv) {
        std::cout << io::replicate_csv(report);
    } else if (a.c.fmt() == Format::Table) {
        std::cout << io::aggregate_table(report);
    } else {
        std::cout << io::dump(io::to_json(report)["aggregate"]);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structure learning and model analysis for linear SEMs on mixed graphs"};
    app.set_version_flag("--version", std::string("mixsem ") + MIXSEM_VERSION);
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Draw a graph, parameters and Gaussian data");
    add_common(c_sim, sim.c);
    c_sim->add_option("--graph", sim.graph, "Graph JSON (default: uniform random simple graph)");
    c_sim->add_option("--p", sim.p, "Vertex count for a random graph")->check(CLI::Range(1, 64))->capture_default_str();
    c_sim->add_option("--n", sim.n, "Sample size")->check(CLI::Range(2, 100000000))->capture_default_str();
    c_sim->add_option("--data", sim.data, "Also write the data as CSV to this file");

    DimArgs dim;
    auto* c_dim = app.add_subcommand("dim", "Compare the parameter count with the certified model dimension");
    add_common(c_dim, dim.c);
    c_dim->add_option("graph", dim.graph, "Graph JSON")->required();
    c_dim->add_option("--trials", dim.trials, "Random parameter draws")->check(CLI::PositiveNumber)->capture_default_str();
    c_dim->add_flag("--require-simple", dim.require_simple, "Fail on non-simple graphs");

    EquivArgs eq;
    auto* c_eq = app.add_subcommand("equiv", "Compare skeletons and collider triples; transfer parameters");
    add_common(c_eq, eq.c);
    c_eq->add_option("graph_a", eq.a, "First graph JSON")->required();
    c_eq->add_option("graph_b", eq.b, "Second graph JSON")->required();
    c_eq->add_option("--params", eq.params, "Parameters for the first graph (JSON)");

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit", "Maximum-likelihood fit of one graph");
    add_common(c_fit, fit.c);
    c_fit->add_option("--graph", fit.graph, "Graph JSON")->required();
    c_fit->add_option("--data", fit.data, "Data CSV")->required();
    c_fit->add_flag("--header", fit.header, "First CSV row holds column names");
    c_fit->add_flag("--copula", fit.copula, "Use the Kendall-tau correlation instead of the sample covariance");
    c_fit->add_flag("--trace", fit.trace, "Include the per-sweep log-likelihood trace");
    c_fit->add_option("--penalty", fit.penalty, "Score penalty")
        ->check(CLI::IsMember({"standard", "increased"}))
        ->capture_default_str();
    c_fit->add_option("--restarts", fit.restarts, "Fit restarts")->check(CLI::PositiveNumber)->capture_default_str();

    SearchArgs se;
    auto* c_se = app.add_subcommand("search", "Greedy structure search with random restarts");
    add_common(c_se, se.c);
    c_se->add_option("data", se.data, "Data CSV")->required();
    c_se->add_flag("--header", se.header, "First CSV row holds column names");
    c_se->add_flag("--copula", se.copula, "Use the Kendall-tau correlation instead of the sample covariance");
    c_se->add_option("--penalty", se.penalty, "Score penalty")
        ->check(CLI::IsMember({"standard", "increased"}))
        ->capture_default_str();
    c_se->add_option("--restarts", se.restarts, "Greedy runs")->check(CLI::PositiveNumber)->capture_default_str();
    c_se->add_option("--max-iters", se.max_iters, "Moves per run")->check(CLI::PositiveNumber)->capture_default_str();
    c_se->add_option("--fit-restarts", se.fit_restarts, "Restarts per likelihood fit")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    c_se->add_option("--start", se.start, "Graph JSON used as the first start");
    c_se->add_option("--truth", se.truth, "True graph JSON; adds recovery metrics");
    c_se->add_option("--trace-dir", se.trace_dir, "Write one score trace CSV per restart here");

    ShdArgs sh;
    auto* c_sh = app.add_subcommand("shd", "Structural Hamming distances between two graphs");
    add_common(c_sh, sh.c);
    c_sh->add_option("graph_a", sh.a, "First graph JSON")->required();
    c_sh->add_option("graph_b", sh.b, "Second graph JSON")->required();
    c_sh->add_option("--cap", sh.cap, "Maximum edge count for marker-class enumeration")->capture_default_str();

    BenchArgs be;
    auto* c_be = app.add_subcommand("bench", "Simulation benchmark; writes <out>.json and <out>.csv");
    add_common(c_be, be.c);
    c_be->add_option("config", be.config, "Benchmark config JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*c_sim) return cmd_simulate(sim);
        if (*c_dim) return cmd_dim(dim);
        if (*c_eq) return cmd_equiv(eq);
        if (*c_fit) return cmd_fit(fit);
        if (*c_se) return cmd_search(se);
        if (*c_sh) return cmd_shd(sh);
        if (*c_be) {
            be.seed_given = c_be->count("--seed") > 0;
            be.threads_given = c_be->count("--threads") > 0;
            return cmd_bench(be);
        }
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
