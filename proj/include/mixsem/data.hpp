#pragma once

// Simulation of parameters and Gaussian data, covariance estimation (sample
// and Kendall-tau based), and the recovery benchmark.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mixsem/graph.hpp"
#include "mixsem/likelihood.hpp"
#include "mixsem/model.hpp"
#include "mixsem/parallel.hpp"
#include "mixsem/random.hpp"
#include "mixsem/search.hpp"

namespace mixsem {

/// Edge weights uniform on [-0.9, -0.5] u [0.5, 0.9]; error variances equal
/// the absolute off-diagonal row sums of omega plus a chi-square(1) draw.
inline Params simulate_parameters(const MixedGraph& g, Rng& rng, int max_attempts = 100) {
    require_simple(g, "simulate_parameters");
    const int p = g.p();
    auto weight = [&] {
        const double magnitude = uniform(rng, 0.5, 0.9);
        return std::bernoulli_distribution(0.5)(rng) ? magnitude : -magnitude;
    };
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Params out{Matrix::Zero(p, p), Matrix::Zero(p, p)};
        for (auto [a, b] : g.directed()) out.lambda(a - 1, b - 1) = weight();
        for (auto [a, b] : g.bidirected()) {
            const double w = weight();
            out.omega(a - 1, b - 1) = w;
            out.omega(b - 1, a - 1) = w;
        }
        for (int i = 0; i < p; ++i) {
            const double z = standard_normal(rng);
            out.omega(i, i) = out.omega.row(i).cwiseAbs().sum() + z * z;
        }
        Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(p, p) - out.lambda);
        if (lu.rcond() >= tolerance::kSingularRcond && Eigen::LLT<Matrix>(out.omega).info() == Eigen::Success)
            return out;
    }
    throw NumericalError("simulate_parameters: no regular draw in " + std::to_string(max_attempts) + " attempts");
}

struct Dataset {
    Matrix x;  // n x p, one sample per row
    std::vector<std::string> names;

    Eigen::Index n() const noexcept { return x.rows(); }
    Eigen::Index p() const noexcept { return x.cols(); }
};

/// n draws of X = (I - L)^{-T} eps, eps ~ N(0, Omega).
inline Dataset sample_data(const MixedGraph& g, const Params& params, Eigen::Index n, Rng& rng) {
    validate_support(g, params);
    const Eigen::Index p = g.p();
    Eigen::LLT<Matrix> llt(params.omega);
    if (llt.info() != Eigen::Success) throw NumericalError("sample_data: Omega is not positive definite");
    Matrix inv = inverse_i_minus(params.lambda);
    Matrix z(n, p);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < p; ++c) z(r, c) = standard_normal(rng);
    // Rows: x = inv^T L z  ->  X = Z L^T inv.
    Dataset out;
    out.x = z * llt.matrixL().transpose() * inv;
    return out;
}

/// X^T X / n after centering the columns.
inline Matrix sample_cov(const Dataset& data) {
    if (data.n() < 2) throw ContractError("sample_cov: need at least 2 samples");
    Matrix centered = data.x.rowwise() - data.x.colwise().mean();
    return symmetrized(centered.transpose() * centered / static_cast<double>(data.n()));
}

/// Floors the eigenvalues of a symmetric matrix at `floor`.
inline Matrix floor_eigenvalues(const Matrix& m, double floor, bool* clipped = nullptr) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
    Vector ev = es.eigenvalues();
    const bool any = (ev.array() < floor).any();
    if (clipped) *clipped = any;
    if (!any) return m;
    ev = ev.cwiseMax(floor);
    return symmetrized(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
}

struct KendallTau {
    double tau = 0.0;        // (concordant - discordant) / (n choose 2)
    std::int64_t ties_x = 0;  // pairs tied in x
    std::int64_t ties_y = 0;
};

/// Kendall's tau-a in O(n log n): sort by (x, y), then count discordant
/// pairs as the inversions of y in a merge sort.
inline KendallTau kendall_tau(const Vector& x, const Vector& y) {
    const Eigen::Index n = x.size();
    if (n != y.size()) throw ContractError("kendall_tau: length mismatch");
    if (n < 2) throw ContractError("kendall_tau: need at least 2 samples");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return x(a) < x(b) || (x(a) == x(b) && y(a) < y(b));
    });

    auto tied_pairs = [](const std::vector<double>& sorted_vals) {
        std::int64_t total = 0, run = 1;
        for (std::size_t i = 1; i <= sorted_vals.size(); ++i) {
            if (i < sorted_vals.size() && sorted_vals[i] == sorted_vals[i - 1]) {
                ++run;
            } else {
                total += run * (run - 1) / 2;
                run = 1;
            }
        }
        return total;
    };

    std::vector<double> xs(order.size()), ys(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        xs[i] = x(order[i]);
        ys[i] = y(order[i]);
    }
    const std::int64_t n1 = tied_pairs(xs);
    std::int64_t n3 = 0;  // tied in both
    {
        std::int64_t run = 1;
        for (std::size_t i = 1; i <= xs.size(); ++i) {
            if (i < xs.size() && xs[i] == xs[i - 1] && ys[i] == ys[i - 1]) {
                ++run;
            } else {
                n3 += run * (run - 1) / 2;
                run = 1;
            }
        }
    }

    // Bottom-up merge sort of ys counting strict inversions.
    std::int64_t swaps = 0;
    std::vector<double> buf(ys.size());
    for (std::size_t width = 1; width < ys.size(); width *= 2) {
        for (std::size_t lo = 0; lo < ys.size(); lo += 2 * width) {
            const std::size_t mid = std::min(lo + width, ys.size());
            const std::size_t hi = std::min(lo + 2 * width, ys.size());
            std::size_t a = lo, b = mid, k = lo;
            while (a < mid && b < hi) {
                if (ys[b] < ys[a]) {
                    swaps += static_cast<std::int64_t>(mid - a);
                    buf[k++] = ys[b++];
                } else {
                    buf[k++] = ys[a++];
                }
            }
            while (a < mid) buf[k++] = ys[a++];
            while (b < hi) buf[k++] = ys[b++];
        }
        std::swap(ys, buf);
    }
    const std::int64_t n2 = tied_pairs(ys);  // ys is now sorted
    const std::int64_t n0 = static_cast<std::int64_t>(n) * (n - 1) / 2;
    const std::int64_t concordant_minus_discordant = n0 - n1 - n2 + n3 - 2 * swaps;
    return {static_cast<double>(concordant_minus_discordant) / static_cast<double>(n0), n1, n2};
}

struct CopulaCorrelation {
    Matrix corr;  // PD-repaired sin(pi/2 tau) matrix
    Matrix tau;
    double floor = 0.0;
    bool floored = false;
    std::int64_t tied_pairs = 0;
};

/// Rank-based correlation for Gaussian copula data: entries sin(pi/2 tau_ij),
/// eigenvalues floored at 1e-8 p.
inline CopulaCorrelation kendall_tau_matrix(const Dataset& data) {
    const Eigen::Index p = data.p();
    if (data.n() < 2) throw ContractError("kendall_tau_matrix: need at least 2 samples");
    for (Eigen::Index c = 0; c < p; ++c)
        if ((data.x.col(c).array() == data.x(0, c)).all()) {
            std::string name = c < static_cast<Eigen::Index>(data.names.size()) ? data.names[c]
                                                                                : std::to_string(c + 1);
            throw ContractError("kendall_tau_matrix: column " + name + " is constant, tau is undefined");
        }
    CopulaCorrelation out;
    out.tau = Matrix::Identity(p, p);
    out.corr = Matrix::Identity(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j) {
            KendallTau kt = kendall_tau(data.x.col(i), data.x.col(j));
            out.tau(i, j) = out.tau(j, i) = kt.tau;
            out.corr(i, j) = out.corr(j, i) = std::sin(std::numbers::pi / 2.0 * kt.tau);
            out.tied_pairs += kt.ties_x + kt.ties_y;
        }
    out.floor = 1e-8 * static_cast<double>(p);
    out.corr = floor_eigenvalues(out.corr, out.floor, &out.floored);
    return out;
}

// ---------------------------------------------------------------------------
// Benchmark

enum class StartMode { Random, TrueGraph };

inline std::string to_string(StartMode m) { return m == StartMode::Random ? "R" : "TG"; }

struct BenchConfig {
    int p = 5;
    int replicates = 100;
    std::vector<int> sample_sizes{100, 1000, 10000};
    std::vector<StartMode> modes{StartMode::Random, StartMode::TrueGraph};
    PenaltyKind penalty = PenaltyKind::Standard;
    int restarts = 300;  // random starts per data set in mode R
    int max_iters = 10000;
    FitConfig fit;
    bool copula = false;
    std::uint64_t seed = 0;
    int threads = 1;
    std::size_t shd_cap = kDefaultMarkerCap;
};

struct ReplicateRecord {
    int replicate = 0;
    int n = 0;
    StartMode mode = StartMode::Random;
    MixedGraph truth;
    MixedGraph estimate;
    double score = 0.0;
    RecoveryMetrics metrics;
};

struct AggregateRow {
    int n = 0;
    StartMode mode = StartMode::Random;
    int count = 0;
    double dim = 0.0;
    double skel = 0.0;
    double skel_coll = 0.0;
    std::optional<double> shd_star;  // mean over replicates where it is available
    double shd = 0.0;
};

/// Columns of the dimension-difference table; the end bins absorb the tails.
inline constexpr std::array<int, 6> kDimDiffBins{-3, -2, -1, 0, 1, 2};

struct FrequencyRow {
    int n = 0;
    StartMode mode = StartMode::Random;
    std::array<int, kDimDiffBins.size()> counts{};
};

struct ExperimentReport {
    BenchConfig config;
    std::vector<ReplicateRecord> records;
    std::vector<AggregateRow> rows;
    std::vector<FrequencyRow> dim_diff;
    std::vector<std::string> failures;
};

inline std::size_t dim_diff_bin(int diff) {
    const int clamped = std::clamp(diff, kDimDiffBins.front(), kDimDiffBins.back());
    return static_cast<std::size_t>(clamped - kDimDiffBins.front());
}

inline void aggregate(ExperimentReport& report) {
    report.rows.clear();
    report.dim_diff.clear();
    for (int n : report.config.sample_sizes)
        for (StartMode mode : report.config.modes) {
            AggregateRow row;
            row.n = n;
            row.mode = mode;
            FrequencyRow freq;
            freq.n = n;
            freq.mode = mode;
            double shd_star_sum = 0.0;
            int shd_star_count = 0;
            for (const auto& r : report.records) {
                if (r.n != n || r.mode != mode) continue;
                ++row.count;
                row.dim += r.metrics.same_dimension;
                row.skel += r.metrics.same_skeleton;
                row.skel_coll += r.metrics.same_skeleton_and_colliders;
                row.shd += r.metrics.shd;
                if (r.metrics.shd_star) {
                    shd_star_sum += *r.metrics.shd_star;
                    ++shd_star_count;
                }
                ++freq.counts[dim_diff_bin(r.metrics.dimension_difference)];
            }
            if (row.count > 0) {
                row.dim /= row.count;
                row.skel /= row.count;
                row.skel_coll /= row.count;
                row.shd /= row.count;
            }
            if (shd_star_count > 0) row.shd_star = shd_star_sum / shd_star_count;
            report.rows.push_back(row);
            report.dim_diff.push_back(freq);
        }
}

/// Draws replicate graphs, parameters and data, runs the search in every
/// requested start mode, and tabulates recovery. Replicate r uses substreams
/// derived from (seed, r), so results do not depend on the thread count.
inline ExperimentReport run_benchmark(const BenchConfig& cfg) {
    if (cfg.p < 2 || cfg.replicates < 0) throw ContractError("run_benchmark: invalid configuration");
    ExperimentReport report;
    report.config = cfg;
    const auto reps = static_cast<std::size_t>(cfg.replicates);
    std::vector<std::vector<ReplicateRecord>> per_rep(reps);
    std::vector<std::vector<std::string>> per_rep_failures(reps);

    parallel_for(reps, cfg.threads, [&](std::size_t r) {
        Rng graph_rng = substream(cfg.seed, {r, 0});
        const MixedGraph truth = random_simple_graph(cfg.p, graph_rng);
        Params params;
        try {
            params = simulate_parameters(truth, graph_rng);
        } catch (const Error& e) {
            per_rep_failures[r].push_back("replicate " + std::to_string(r) + ": " + e.what());
            return;
        }
        for (std::size_t ni = 0; ni < cfg.sample_sizes.size(); ++ni) {
            const int n = cfg.sample_sizes[ni];
            try {
                Rng data_rng = substream(cfg.seed, {r, 1, ni});
                Dataset data = sample_data(truth, params, n, data_rng);
                Matrix s = cfg.copula ? kendall_tau_matrix(data).corr : sample_cov(data);
                GraphScorer scorer(s, n, cfg.penalty, cfg.fit);
                for (StartMode mode : cfg.modes) {
                    SearchTrace best;
                    if (mode == StartMode::TrueGraph) {
                        best = greedy_search(truth, scorer, cfg.max_iters);
                    } else {
                        SearchConfig sc;
                        sc.restarts = cfg.restarts;
                        sc.max_iters = cfg.max_iters;
                        sc.penalty = cfg.penalty;
                        sc.fit = cfg.fit;
                        sc.seed = cfg.seed ^ (0x9e3779b97f4a7c15ULL * (r + 1)) ^ (static_cast<std::uint64_t>(ni) << 48);
                        sc.threads = 1;
                        best = multi_restart_search(s, n, sc).best;
                    }
                    per_rep[r].push_back({static_cast<int>(r), n, mode, truth, best.final_graph, best.final_score,
                                          recovery_metrics(best.final_graph, truth, cfg.shd_cap)});
                }
            } catch (const Error& e) {
                per_rep_failures[r].push_back("replicate " + std::to_string(r) + ", n=" + std::to_string(n) +
                                              ": " + e.what());
            }
        }
    });
    for (std::size_t r = 0; r < reps; ++r) {
        for (auto& rec : per_rep[r]) report.records.push_back(std::move(rec));
        for (auto& f : per_rep_failures[r]) report.failures.push_back(std::move(f));
    }
    aggregate(report);
    return report;
}

}  // namespace mixsem
