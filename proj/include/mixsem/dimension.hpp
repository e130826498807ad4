#pragma once

// Numerical certification of model dimension through the reduced Jacobian of
// g(L, S) = (I - L)^T S (I - L) restricted to the non-bidirected pairs.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/SVD>

#include "mixsem/graph.hpp"
#include "mixsem/model.hpp"
#include "mixsem/random.hpp"

namespace mixsem {

inline Matrix g_map(const Matrix& lambda, const Matrix& sigma) {
    const Eigen::Index p = lambda.rows();
    Matrix e = Matrix::Identity(p, p) - lambda;
    return e.transpose() * sigma * e;
}

/// Rows: unordered pairs not joined by a bidirected edge. Columns: directed
/// edges.
struct ReducedJacobian {
    std::vector<Pair> rows;
    std::vector<Pair> cols;
    Matrix values;
};

/// Derivatives of the off-diagonal entries g_ij, {i,j} not in B, with respect
/// to the edge coefficients. The formula does not need simplicity, so
/// non-simple graphs (where the rank collapses) are accepted too.
inline ReducedJacobian reduced_jacobian(const MixedGraph& g, const Matrix& lambda, const Matrix& sigma) {
    ReducedJacobian jac;
    for (auto [i, j] : vertex_pairs(g.p()))
        if (!g.has_bidirected(i, j)) jac.rows.emplace_back(i, j);
    jac.cols.assign(g.directed().begin(), g.directed().end());
    const Eigen::Index p = lambda.rows();
    Matrix m = (Matrix::Identity(p, p) - lambda).transpose() * sigma;
    jac.values = Matrix::Zero(static_cast<Eigen::Index>(jac.rows.size()),
                              static_cast<Eigen::Index>(jac.cols.size()));
    for (std::size_t r = 0; r < jac.rows.size(); ++r) {
        auto [i, j] = jac.rows[r];
        for (std::size_t c = 0; c < jac.cols.size(); ++c) {
            auto [k, l] = jac.cols[c];
            double v = 0.0;
            if (l == i) v -= m(j - 1, k - 1);
            if (l == j) v -= m(i - 1, k - 1);
            jac.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
    }
    return jac;
}

/// Singular-value threshold. Default: max(rows, cols) * sigma_max * eps.
struct RankPolicy {
    std::optional<double> absolute_tol;
};

inline double rank_threshold(const Vector& singular_values, Eigen::Index rows, Eigen::Index cols,
                             const RankPolicy& policy = {}) {
    if (policy.absolute_tol) return *policy.absolute_tol;
    const double smax = singular_values.size() ? singular_values.maxCoeff() : 0.0;
    return static_cast<double>(std::max(rows, cols)) * smax * std::numeric_limits<double>::epsilon();
}

inline int numeric_rank(const Matrix& m, const RankPolicy& policy = {}) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const Vector& s = svd.singularValues();
    const double tol = rank_threshold(s, m.rows(), m.cols(), policy);
    return static_cast<int>((s.array() > tol).count());
}

inline std::size_t parameter_count(const MixedGraph& g) {
    return static_cast<std::size_t>(g.p()) + g.directed().size() + g.bidirected().size();
}

/// |V| + |D| + |B|, the dimension of any simple graph's model.
inline std::size_t expected_dimension(const MixedGraph& g) {
    if (!is_simple(g))
        throw ContractError("expected_dimension: the parameter-count dimension is only guaranteed for simple "
                            "graphs, got " +
                            g.to_string());
    return parameter_count(g);
}

namespace detail {

/// Random regular point: lambda in (-0.3, 0.3) on D scaled to rho <= 0.9,
/// omega strictly diagonally dominant on B.
inline Params random_regular_point(const MixedGraph& g, Rng& rng) {
    const int p = g.p();
    Params out{Matrix::Zero(p, p), Matrix::Zero(p, p)};
    for (auto [a, b] : g.directed()) out.lambda(a - 1, b - 1) = uniform(rng, -0.3, 0.3);
    const double rho = spectral_radius(out.lambda);
    if (rho > 0.9) out.lambda *= 0.9 / rho;
    for (auto [a, b] : g.bidirected()) {
        double w = uniform(rng, -0.3, 0.3);
        out.omega(a - 1, b - 1) = w;
        out.omega(b - 1, a - 1) = w;
    }
    for (int i = 0; i < p; ++i)
        out.omega(i, i) = out.omega.row(i).cwiseAbs().sum() + uniform(rng, 0.5, 1.5);
    return out;
}

}  // namespace detail

struct DimensionOptions {
    int max_redraws = 20;
    /// Singular values within this factor above the threshold are treated as
    /// ambiguous and trigger a redraw.
    double ambiguity_factor = 1e3;
    RankPolicy policy;
};

/// Max over `trials` parameter draws of rank(reduced Jacobian) + |B| + |V|.
/// Draw 0 is (Lambda, Omega) = (0, I); draw t > 0 uses substream (seed, t).
inline std::size_t model_dimension(const MixedGraph& g, int trials, std::uint64_t seed,
                                   const DimensionOptions& opts = {}) {
    if (trials < 1) throw ContractError("model_dimension: trials must be positive");
    const int p = g.p();
    const std::size_t base = g.bidirected().size() + static_cast<std::size_t>(p);
    const int full = static_cast<int>(g.directed().size());
    int best = -1;
    for (int t = 0; t < trials && best < full; ++t) {
        Rng rng = substream(seed, {static_cast<std::uint64_t>(t)});
        std::optional<int> rank;
        for (int attempt = 0; attempt <= opts.max_redraws && !rank; ++attempt) {
            Params point = t == 0 && attempt == 0 ? Params{Matrix::Zero(p, p), Matrix::Identity(p, p)}
                                                  : detail::random_regular_point(g, rng);
            Matrix sigma;
            try {
                sigma = covariance_of(point.lambda, point.omega);
            } catch (const SingularityError&) {
                continue;
            }
            Matrix j = reduced_jacobian(g, point.lambda, sigma).values;
            if (j.size() == 0) {
                rank = 0;
                break;
            }
            Eigen::JacobiSVD<Matrix> svd(j);
            const Vector& s = svd.singularValues();
            const double tol = rank_threshold(s, j.rows(), j.cols(), opts.policy);
            const bool ambiguous = ((s.array() > tol) && (s.array() <= opts.ambiguity_factor * tol)).any();
            if (ambiguous && attempt < opts.max_redraws) continue;
            rank = static_cast<int>((s.array() > tol).count());
        }
        if (!rank) continue;
        best = std::max(best, *rank);
    }
    if (best < 0)
        throw NumericalError("model_dimension: every parameter draw produced a singular I - Lambda");
    return static_cast<std::size_t>(best) + base;
}

}  // namespace mixsem
