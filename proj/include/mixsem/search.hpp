#pragma once

// Greedy hill climbing over simple mixed graphs with random restarts.

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mixsem/dimension.hpp"
#include "mixsem/graph.hpp"
#include "mixsem/likelihood.hpp"
#include "mixsem/parallel.hpp"
#include "mixsem/random.hpp"

namespace mixsem {

/// Uniform over the 4^{p(p-1)/2} simple graphs on p vertices: every pair is
/// independently empty, i->j, j->i or i<->j with probability 1/4.
inline MixedGraph random_simple_graph(int p, Rng& rng) {
    if (p < 1) throw ContractError("random_simple_graph: p must be positive");
    MixedGraph g(p);
    std::uniform_int_distribution<int> pick(0, 3);
    for (auto [i, j] : vertex_pairs(p)) g.set_state(i, j, static_cast<PairState>(pick(rng)));
    return g;
}

struct SearchConfig {
    int restarts = 300;
    int max_iters = 10000;
    PenaltyKind penalty = PenaltyKind::Standard;
    FitConfig fit;
    std::uint64_t seed = 0;
    std::optional<MixedGraph> start;
    int threads = 1;
};

struct SearchStep {
    int iteration = 0;
    std::string move;
    double score = 0.0;
    double elapsed_s = 0.0;
};

struct SearchTrace {
    int restart = 0;
    MixedGraph start;
    double start_score = 0.0;
    std::vector<SearchStep> steps;
    MixedGraph final_graph;
    double final_score = 0.0;
};

/// Scores graphs against fixed data, memoized by canonical key. The score
/// of a graph is a pure function of (graph, S, n, config), so sharing the
/// cache across threads does not affect results.
class GraphScorer {
public:
    GraphScorer(Matrix s, double n, PenaltyKind kind, FitConfig fit)
        : s_(std::move(s)), n_(n), kind_(kind), fit_(fit) {}

    double operator()(const MixedGraph& g) const {
        const std::string key = g.key();
        {
            std::shared_lock lock(mutex_);
            if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        }
        const double value = score(g, s_, n_, kind_, fit_);
        std::unique_lock lock(mutex_);
        cache_.emplace(key, value);
        return value;
    }

    std::size_t evaluations() const {
        std::shared_lock lock(mutex_);
        return cache_.size();
    }

    const Matrix& covariance() const noexcept { return s_; }
    double sample_size() const noexcept { return n_; }

private:
    Matrix s_;
    double n_;
    PenaltyKind kind_;
    FitConfig fit_;
    mutable std::shared_mutex mutex_;
    mutable std::unordered_map<std::string, double> cache_;
};

/// Best strictly improving neighbor of g. Ties go to the canonically
/// smallest graph.
inline std::optional<std::pair<MixedGraph, double>> greedy_step(const MixedGraph& g, double current_score,
                                                                const GraphScorer& scorer) {
    std::optional<std::pair<MixedGraph, double>> best;
    for (MixedGraph& h : neighborhood(g)) {
        const double s = scorer(h);
        if (s > current_score && (!best || s > best->second)) best.emplace(std::move(h), s);
    }
    return best;
}

inline std::optional<std::pair<MixedGraph, double>> greedy_step(const MixedGraph& g, const GraphScorer& scorer) {
    return greedy_step(g, scorer(g), scorer);
}

inline SearchTrace greedy_search(const MixedGraph& start, const GraphScorer& scorer, int max_iters,
                                 int restart_index = 0) {
    require_simple(start, "greedy_search");
    if (max_iters < 1) throw ContractError("greedy_search: max_iters must be positive");
    const auto t0 = std::chrono::steady_clock::now();
    SearchTrace trace;
    trace.restart = restart_index;
    trace.start = start;
    trace.start_score = scorer(start);
    MixedGraph current = start;
    double current_score = trace.start_score;
    for (int it = 1; it <= max_iters; ++it) {
        auto next = greedy_step(current, current_score, scorer);
        if (!next) break;
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        trace.steps.push_back({it, describe_move(current, next->first), next->second, elapsed});
        current = std::move(next->first);
        current_score = next->second;
    }
    trace.final_graph = std::move(current);
    trace.final_score = current_score;
    return trace;
}

inline SearchTrace greedy_search(const MixedGraph& start, const Matrix& s, double n, const SearchConfig& cfg) {
    GraphScorer scorer(s, n, cfg.penalty, cfg.fit);
    return greedy_search(start, scorer, cfg.max_iters);
}

struct MultiSearchResult {
    SearchTrace best;
    std::vector<SearchTrace> all;  // ordered by restart index
    std::map<int, std::string> failures;
};

/// Exactly cfg.restarts greedy runs: restart 0 from cfg.start when given,
/// every other restart from a uniform random graph drawn from substream
/// (seed, restart). The best run has the highest final score, ties going to
/// the lowest restart index.
inline MultiSearchResult multi_restart_search(const Matrix& s, double n, const SearchConfig& cfg) {
    if (cfg.restarts < 1) throw ContractError("multi_restart_search: restarts must be positive");
    const int p = static_cast<int>(s.rows());
    GraphScorer scorer(s, n, cfg.penalty, cfg.fit);
    std::vector<std::optional<SearchTrace>> runs(static_cast<std::size_t>(cfg.restarts));
    std::vector<std::string> errors(runs.size());
    parallel_for(runs.size(), cfg.threads, [&](std::size_t k) {
        try {
            MixedGraph start;
            if (k == 0 && cfg.start) {
                start = *cfg.start;
            } else {
                Rng rng = substream(cfg.seed, {0x73656172ULL, k});
                start = random_simple_graph(p, rng);
            }
            runs[k] = greedy_search(start, scorer, cfg.max_iters, static_cast<int>(k));
        } catch (const Error& e) {
            errors[k] = e.what();
        }
    });
    MultiSearchResult out;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        if (!runs[k]) {
            out.failures.emplace(static_cast<int>(k), errors[k]);
            continue;
        }
        out.all.push_back(std::move(*runs[k]));
    }
    if (out.all.empty()) throw NumericalError("multi_restart_search: every restart failed");
    const SearchTrace* best = &out.all.front();
    for (const auto& t : out.all)
        if (t.final_score > best->final_score) best = &t;
    out.best = *best;
    return out;
}

struct RecoveryMetrics {
    bool same_dimension = false;
    bool same_skeleton = false;
    bool same_skeleton_and_colliders = false;
    std::optional<int> shd_star;  // empty when the marker classes are too large to enumerate
    int shd = 0;
    int dimension_difference = 0;  // dim(estimate) - dim(truth)
};

inline RecoveryMetrics recovery_metrics(const MixedGraph& est, const MixedGraph& truth,
                                        std::size_t cap = kDefaultMarkerCap) {
    RecoveryMetrics m;
    const auto de = static_cast<int>(expected_dimension(est));
    const auto dt = static_cast<int>(expected_dimension(truth));
    m.dimension_difference = de - dt;
    m.same_dimension = de == dt;
    m.same_skeleton = skeleton(est) == skeleton(truth);
    m.same_skeleton_and_colliders = m.same_skeleton && collider_triples(est) == collider_triples(truth);
    m.shd = shd(est, truth);
    try {
        m.shd_star = shd_star(est, truth, cap);
    } catch (const EnumerationTooLarge&) {
    }
    return m;
}

}  // namespace mixsem
