#pragma once

// JSON and CSV formats: graphs, parameters, datasets, fit/search results and
// benchmark reports.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixsem/data.hpp"
#include "mixsem/graph.hpp"
#include "mixsem/likelihood.hpp"
#include "mixsem/model.hpp"
#include "mixsem/search.hpp"

namespace mixsem::io {

using json = nlohmann::json;

/// Rounds every floating-point value to 12 significant digits so that the
/// serialized text is stable.
inline json rounded(const json& j) {
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (!std::isfinite(v)) return nullptr;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", v);
        return std::strtod(buf, nullptr);
    }
    if (j.is_array()) {
        json out = json::array();
        for (const auto& e : j) out.push_back(rounded(e));
        return out;
    }
    if (j.is_object()) {
        json out = json::object();
        for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = rounded(it.value());
        return out;
    }
    return j;
}

inline std::string dump(const json& j) { return rounded(j).dump(2) + "\n"; }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json parse_json(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(source + ": " + e.what());
    }
}

// --- graphs ----------------------------------------------------------------

inline json to_json(const MixedGraph& g) {
    json d = json::array(), b = json::array();
    for (auto [i, j] : g.directed()) d.push_back({i, j});
    for (auto [i, j] : g.bidirected()) b.push_back({i, j});
    return {{"p", g.p()}, {"directed", d}, {"bidirected", b}};
}

/// Reads {"p": .., "directed": [[i,j],..], "bidirected": [[i,j],..]} with
/// 1-based labels. Self-loops and repeated entries are rejected; a pair
/// carrying two different edges is kept only when allow_multi is set.
inline MixedGraph graph_from_json(const json& j, bool allow_multi = false) {
    if (!j.is_object() || !j.contains("p") || !j["p"].is_number_integer())
        throw ParseError("graph: field \"p\" (integer) is required");
    const int p = j["p"].get<int>();
    if (p < 1) throw ParseError("graph: \"p\" must be positive");
    MixedGraph g(p);
    auto read_pairs = [&](const char* field, bool directed) {
        if (!j.contains(field)) return;
        const json& arr = j[field];
        if (!arr.is_array()) throw ParseError(std::string("graph: \"") + field + "\" must be an array");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const json& e = arr[k];
            const std::string where = std::string("graph: ") + field + "[" + std::to_string(k) + "]";
            if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
                throw ParseError(where + " must be a pair of integers");
            const int a = e[0].get<int>(), b = e[1].get<int>();
            const std::string pair = "(" + std::to_string(a) + "," + std::to_string(b) + ")";
            if (a == b) throw ParseError(where + ": self-loop " + pair);
            if (a < 1 || b < 1 || a > p || b > p) throw ParseError(where + ": label out of range in " + pair);
            if (directed ? g.has_directed(a, b) : g.has_bidirected(a, b))
                throw ParseError(where + ": duplicate edge " + pair);
            if (!allow_multi && g.adjacent(a, b))
                throw ParseError(where + ": conflicting second edge on pair " + pair);
            if (directed)
                g.add_directed(a, b);
            else
                g.add_bidirected(a, b);
        }
    };
    read_pairs("directed", true);
    read_pairs("bidirected", false);
    return g;
}

inline MixedGraph read_graph(const std::string& path, bool allow_multi = false) {
    const json j = parse_json(read_file(path), path);
    try {
        return graph_from_json(j, allow_multi);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

// --- matrices and parameters -----------------------------------------------

inline json to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

inline Matrix matrix_from_json(const json& j, Eigen::Index p, const std::string& what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != p)
        throw ParseError(what + ": expected " + std::to_string(p) + " rows");
    Matrix m(p, p);
    for (Eigen::Index r = 0; r < p; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != p)
            throw ParseError(what + ": row " + std::to_string(r + 1) + " must have " + std::to_string(p) + " entries");
        for (Eigen::Index c = 0; c < p; ++c) {
            if (!row[static_cast<std::size_t>(c)].is_number())
                throw ParseError(what + ": entry (" + std::to_string(r + 1) + "," + std::to_string(c + 1) +
                                 ") is not a number");
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

inline json to_json(const MixedGraph& g, const Params& params) {
    return {{"graph", to_json(g)}, {"lambda", to_json(params.lambda)}, {"omega", to_json(params.omega)}};
}

struct GraphParams {
    MixedGraph graph;
    Params params;
};

inline GraphParams params_from_json(const json& j) {
    if (!j.is_object() || !j.contains("graph") || !j.contains("lambda") || !j.contains("omega"))
        throw ParseError("params: fields \"graph\", \"lambda\" and \"omega\" are required");
    GraphParams out;
    out.graph = graph_from_json(j["graph"]);
    out.params.lambda = matrix_from_json(j["lambda"], out.graph.p(), "lambda");
    out.params.omega = matrix_from_json(j["omega"], out.graph.p(), "omega");
    try {
        validate_support(out.graph, out.params);
    } catch (const ContractError& e) {
        throw ParseError(std::string("params: ") + e.what());
    }
    return out;
}

inline GraphParams read_params(const std::string& path) {
    const json j = parse_json(read_file(path), path);
    try {
        return params_from_json(j);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

// --- datasets ----------------------------------------------------------------

/// Comma-separated samples, one per row; `header` says whether the first
/// row holds column names.
inline Dataset parse_csv(const std::string& text, bool header, const std::string& source = "csv") {
    Dataset out;
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    auto split = [](const std::string& l) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(l);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!l.empty() && l.back() == ',') cells.emplace_back();
        return cells;
    };
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split(line);
        if (header && out.names.empty() && rows.empty()) {
            for (auto& c : cells) out.names.push_back(trim(c));
            width = cells.size();
            continue;
        }
        if (width == 0) width = cells.size();
        if (cells.size() != width)
            throw ParseError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(width) +
                             " fields, found " + std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(width);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string cell = trim(cells[c]);
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v))
                throw ParseError(source + ":" + std::to_string(lineno) + ": field " + std::to_string(c + 1) +
                                 " is not a finite number (\"" + cell + "\")");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw ParseError(source + ": need at least 2 data rows");
    out.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < width; ++c)
            out.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return out;
}

inline Dataset read_csv(const std::string& path, bool header) { return parse_csv(read_file(path), header, path); }

inline std::string to_csv(const Dataset& data) {
    std::ostringstream os;
    os << std::setprecision(17);
    if (!data.names.empty()) {
        for (std::size_t c = 0; c < data.names.size(); ++c) os << (c ? "," : "") << data.names[c];
        os << "\n";
    }
    for (Eigen::Index r = 0; r < data.n(); ++r) {
        for (Eigen::Index c = 0; c < data.p(); ++c) os << (c ? "," : "") << data.x(r, c);
        os << "\n";
    }
    return os.str();
}

// --- results -------------------------------------------------------------------

inline json to_json(const FitResult& fit, bool with_trace) {
    json j = {{"lambda", to_json(fit.params.lambda)},
              {"omega", to_json(fit.params.omega)},
              {"loglik", fit.loglik},
              {"n", fit.n},
              {"sweeps_used", fit.sweeps_used},
              {"converged", fit.converged},
              {"restart", fit.restart},
              {"ridge", fit.ridge}};
    if (with_trace) j["trace"] = fit.trace;
    return j;
}

inline json edge_summary(const MixedGraph& g) {
    return {{"all", g.edge_count()}, {"directed", g.directed().size()}, {"bidirected", g.bidirected().size()}};
}

inline json to_json(const RecoveryMetrics& m) {
    return {{"same_dimension", m.same_dimension},
            {"same_skeleton", m.same_skeleton},
            {"same_skeleton_and_colliders", m.same_skeleton_and_colliders},
            {"shd_star", m.shd_star ? json(*m.shd_star) : json(nullptr)},
            {"shd", m.shd},
            {"dimension_difference", m.dimension_difference}};
}

inline const char* kTraceHeader = "iteration,elapsed_s,score,move";

inline std::string trace_csv(const SearchTrace& t) {
    std::ostringstream os;
    os << kTraceHeader << "\n";
    char buf[64];
    os << 0 << ",0," << (std::snprintf(buf, sizeof buf, "%.12g", t.start_score), buf) << ",start\n";
    for (const auto& s : t.steps) {
        os << s.iteration << ",";
        std::snprintf(buf, sizeof buf, "%.6f", s.elapsed_s);
        os << buf << ",";
        std::snprintf(buf, sizeof buf, "%.12g", s.score);
        os << buf << "," << s.move << "\n";
    }
    return os.str();
}

inline json to_json(const SearchTrace& t) {
    json steps = json::array();
    for (const auto& s : t.steps)
        steps.push_back({{"iteration", s.iteration}, {"move", s.move}, {"score", s.score}, {"elapsed_s", s.elapsed_s}});
    return {{"restart", t.restart},
            {"start", to_json(t.start)},
            {"start_score", t.start_score},
            {"final_graph", to_json(t.final_graph)},
            {"final_score", t.final_score},
            {"steps", steps}};
}

// --- benchmark -----------------------------------------------------------------

inline StartMode start_mode_from_string(const std::string& s) {
    if (s == "R") return StartMode::Random;
    if (s == "TG") return StartMode::TrueGraph;
    throw ParseError("unknown start mode \"" + s + "\" (expected R or TG)");
}

inline PenaltyKind penalty_from_string(const std::string& s) {
    if (s == "standard") return PenaltyKind::Standard;
    if (s == "increased") return PenaltyKind::Increased;
    throw ParseError("unknown penalty \"" + s + "\" (expected standard or increased)");
}

/// Benchmark configuration. Every field is optional; unknown fields are
/// rejected.
inline BenchConfig bench_config_from_json(const json& j) {
    static const std::set<std::string> known{"p",        "replicates", "sample_sizes", "modes",     "penalty",
                                             "restarts", "max_iters",  "fit_restarts", "fit_tol",   "fit_max_sweeps",
                                             "copula",   "seed",       "threads",      "shd_cap"};
    if (!j.is_object()) throw ParseError("bench config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw ParseError("bench config: unknown field \"" + it.key() + "\"");
    BenchConfig c;
    try {
        if (j.contains("p")) c.p = j["p"].get<int>();
        if (j.contains("replicates")) c.replicates = j["replicates"].get<int>();
        if (j.contains("sample_sizes")) c.sample_sizes = j["sample_sizes"].get<std::vector<int>>();
        if (j.contains("modes")) {
            c.modes.clear();
            for (const auto& m : j["modes"]) c.modes.push_back(start_mode_from_string(m.get<std::string>()));
        }
        if (j.contains("penalty")) c.penalty = penalty_from_string(j["penalty"].get<std::string>());
        if (j.contains("restarts")) c.restarts = j["restarts"].get<int>();
        if (j.contains("max_iters")) c.max_iters = j["max_iters"].get<int>();
        if (j.contains("fit_restarts")) c.fit.restarts = j["fit_restarts"].get<int>();
        if (j.contains("fit_tol")) c.fit.tol = j["fit_tol"].get<double>();
        if (j.contains("fit_max_sweeps")) c.fit.max_sweeps = j["fit_max_sweeps"].get<int>();
        if (j.contains("copula")) c.copula = j["copula"].get<bool>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("threads")) c.threads = j["threads"].get<int>();
        if (j.contains("shd_cap")) c.shd_cap = j["shd_cap"].get<std::size_t>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("bench config: ") + e.what());
    }
    if (c.p < 2 || c.replicates < 0 || c.restarts < 1 || c.max_iters < 1 || c.sample_sizes.empty())
        throw ParseError("bench config: p >= 2, replicates >= 0, restarts >= 1, max_iters >= 1 and a nonempty "
                         "sample_sizes list are required");
    for (int n : c.sample_sizes)
        if (n < 2) throw ParseError("bench config: every sample size must be at least 2");
    return c;
}

inline json to_json(const ExperimentReport& r) {
    json records = json::array();
    for (const auto& rec : r.records)
        records.push_back({{"replicate", rec.replicate},
                           {"n", rec.n},
                           {"start", to_string(rec.mode)},
                           {"truth", to_json(rec.truth)},
                           {"estimate", to_json(rec.estimate)},
                           {"score", rec.score},
                           {"metrics", to_json(rec.metrics)}});
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"n", row.n},
                        {"start", to_string(row.mode)},
                        {"count", row.count},
                        {"Dim", row.dim},
                        {"Skel", row.skel},
                        {"SkelColl", row.skel_coll},
                        {"SHDstar", row.shd_star ? json(*row.shd_star) : json(nullptr)}});
    json freq = json::array();
    for (const auto& f : r.dim_diff) {
        json counts = json::object();
        for (std::size_t b = 0; b < kDimDiffBins.size(); ++b) counts[std::to_string(kDimDiffBins[b])] = f.counts[b];
        freq.push_back({{"n", f.n}, {"start", to_string(f.mode)}, {"counts", counts}});
    }
    json modes = json::array();
    for (auto m : r.config.modes) modes.push_back(to_string(m));
    json config = {{"p", r.config.p},
                   {"replicates", r.config.replicates},
                   {"sample_sizes", r.config.sample_sizes},
                   {"modes", modes},
                   {"penalty", to_string(r.config.penalty)},
                   {"restarts", r.config.restarts},
                   {"max_iters", r.config.max_iters},
                   {"fit_restarts", r.config.fit.restarts},
                   {"copula", r.config.copula},
                   {"seed", r.config.seed}};
    return {{"config", config},
            {"records", records},
            {"aggregate", rows},
            {"dimension_difference", freq},
            {"failures", r.failures}};
}

/// One row per replicate, with the recovery columns named as in the
/// aggregate table.
inline std::string replicate_csv(const ExperimentReport& r) {
    std::ostringstream os;
    os << "replicate,n,start,Dim,Skel,SkelColl,SHDstar,dim_diff\n";
    for (const auto& rec : r.records) {
        const auto& m = rec.metrics;
        os << rec.replicate << "," << rec.n << "," << to_string(rec.mode) << "," << int(m.same_dimension) << ","
           << int(m.same_skeleton) << "," << int(m.same_skeleton_and_colliders) << ","
           << (m.shd_star ? std::to_string(*m.shd_star) : std::string("NA")) << "," << m.dimension_difference << "\n";
    }
    return os.str();
}

inline std::string aggregate_table(const ExperimentReport& r) {
    std::ostringstream os;
    os << std::left << std::setw(8) << "n" << std::setw(7) << "Start" << std::setw(7) << "count" << std::setw(8)
       << "Dim" << std::setw(8) << "Skel" << std::setw(10) << "SkelColl" << "SHDstar\n";
    os << std::fixed << std::setprecision(2);
    for (const auto& row : r.rows) {
        os << std::setw(8) << row.n << std::setw(7) << to_string(row.mode) << std::setw(7) << row.count
           << std::setw(8) << row.dim << std::setw(8) << row.skel << std::setw(10) << row.skel_coll;
        if (row.shd_star)
            os << *row.shd_star;
        else
            os << "NA";
        os << "\n";
    }
    os << "\nDim(EST) - Dim(TG)\n" << std::setw(8) << "n" << std::setw(7) << "Start";
    for (int b : kDimDiffBins) os << std::setw(5) << b;
    os << "\n";
    for (const auto& f : r.dim_diff) {
        os << std::setw(8) << f.n << std::setw(7) << to_string(f.mode);
        for (int c : f.counts) os << std::setw(5) << c;
        os << "\n";
    }
    return os.str();
}

}  // namespace mixsem::io
