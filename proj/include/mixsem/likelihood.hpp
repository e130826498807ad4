#pragma once

// Gaussian likelihood, maximum-likelihood fitting over a graph's model by
// block coordinate descent, and the penalized score used by the search.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "mixsem/dimension.hpp"
#include "mixsem/graph.hpp"
#include "mixsem/model.hpp"
#include "mixsem/random.hpp"

namespace mixsem {

/// l(Sigma; S) = -(n/2) [log det(2 pi Sigma) + tr(Sigma^{-1} S)].
inline double log_likelihood(const Matrix& sigma, const Matrix& s, double n) {
    if (sigma.rows() != s.rows() || sigma.cols() != s.cols())
        throw ContractError("log_likelihood: dimension mismatch");
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) throw NumericalError("log_likelihood: Sigma is not positive definite");
    const double p = static_cast<double>(sigma.rows());
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double trace = llt.solve(s).trace();
    return -0.5 * n * (p * std::log(2.0 * std::numbers::pi) + logdet + trace);
}

enum class PenaltyKind { Standard, Increased };

inline std::string to_string(PenaltyKind k) { return k == PenaltyKind::Standard ? "standard" : "increased"; }

/// BIC penalty 0.5 (p + k) log n, optionally plus log(p^{2k} 3^k).
inline double penalty(int p, int k, double n, PenaltyKind kind) {
    if (n < 2) throw ContractError("penalty: sample size must be at least 2");
    double out = 0.5 * (p + k) * std::log(n);
    if (kind == PenaltyKind::Increased) out += 2.0 * k * std::log(static_cast<double>(p)) + k * std::log(3.0);
    return out;
}

struct FitConfig {
    int max_sweeps = 5000;
    double tol = 1e-10;  // relative log-likelihood improvement per sweep
    int restarts = 5;
    std::uint64_t seed = 0;
    /// Diagonal inflation of S. Unset: 1e-8 tr(S)/p, applied only when S is
    /// not positive definite.
    std::optional<double> ridge;
};

struct FitResult {
    Params params;
    double loglik = -std::numeric_limits<double>::infinity();  // total, over n samples
    double n = 0;
    int sweeps_used = 0;
    bool converged = false;
    int restart = 0;
    double ridge = 0.0;
    std::vector<double> trace;  // loglik after each sweep of the winning restart
};

namespace detail {

/// Per-sample log-likelihood from the parameters directly:
/// -1/2 [p log 2pi + log det O - 2 log|det(I - L)| + tr(O^{-1} (I-L)^T S (I-L))].
inline double loglik_per_sample(const Matrix& lambda, const Matrix& omega, const Matrix& s) {
    const Eigen::Index p = s.rows();
    Matrix e = Matrix::Identity(p, p) - lambda;
    Eigen::LLT<Matrix> llt(omega);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const double det_e = e.determinant();
    if (det_e == 0.0 || !std::isfinite(det_e)) return -std::numeric_limits<double>::infinity();
    const double logdet_omega = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double trace = llt.solve(e.transpose() * s * e).trace();
    return -0.5 * (static_cast<double>(p) * std::log(2.0 * std::numbers::pi) + logdet_omega -
                   2.0 * std::log(std::abs(det_e)) + trace);
}

/// Exact maximization of the likelihood over the block owned by vertex v:
/// the coefficients on edges into v, the covariances on bidirected edges at
/// v and the error variance of v. Everything else stays fixed.
///
/// With eps = (I - L)^T X the likelihood factors into the density of
/// eps_{-v} (untouched) times that of eps_v | eps_{-v} and the Jacobian
/// |det(I - L)|, which is affine in column v of L. The block problem is a
/// regression of X_v on its parents and on the pseudo-variables
/// Z = O_{-v,-v}^{-1} eps_{-v} of its siblings, with an extra log|c + a'b|
/// term; its maximizer is the OLS solution shifted along A^{-1} a.
inline void update_block(const MixedGraph& g, int v, const Matrix& s, Params& params) {
    const Eigen::Index p = s.rows();
    const Eigen::Index vi = v - 1;
    const std::vector<int> pa = g.parents(v);
    const std::vector<int> sib = g.siblings(v);
    const Eigen::Index np = static_cast<Eigen::Index>(pa.size());
    const Eigen::Index ns = static_cast<Eigen::Index>(sib.size());
    const Eigen::Index m = np + ns;

    Matrix e = Matrix::Identity(p, p) - params.lambda;

    // Other vertices and, for siblings, the rows of O_{-v,-v}^{-1}.
    std::vector<Eigen::Index> others;
    for (Eigen::Index k = 0; k < p; ++k)
        if (k != vi) others.push_back(k);
    Matrix omega_oo_inv;
    std::vector<Eigen::Index> sib_pos;  // position of each sibling in `others`
    if (ns > 0) {
        Matrix omega_oo = params.omega(others, others);
        omega_oo_inv = omega_oo.llt().solve(Matrix::Identity(p - 1, p - 1));
        for (int s_v : sib) sib_pos.push_back(s_v - 1 < vi ? s_v - 1 : s_v - 2);
    }

    if (m == 0) {
        params.omega(vi, vi) = s(vi, vi);
        return;
    }

    // Regressors as linear maps of X: rows of w.
    Matrix w = Matrix::Zero(m, p);
    for (Eigen::Index r = 0; r < np; ++r) w(r, pa[r] - 1) = 1.0;
    if (ns > 0) {
        Matrix z = omega_oo_inv * e(Eigen::all, others).transpose();  // (p-1) x p
        for (Eigen::Index r = 0; r < ns; ++r) w.row(np + r) = z.row(sib_pos[r]);
    }
    Matrix a_mat = w * s * w.transpose();
    Vector b = w * s.col(vi);
    Eigen::LDLT<Matrix> ldlt(a_mat);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        a_mat.diagonal().array() += 1e-12 * std::max(1.0, a_mat.trace());
        ldlt.compute(a_mat);
    }
    Vector beta_ols = ldlt.solve(b);
    double rss0 = s(vi, vi) - b.dot(beta_ols);
    rss0 = std::max(rss0, 1e-300);

    // det(I - L) = c + a' beta, affine in the parent coefficients.
    Vector a = Vector::Zero(m);
    double c = 1.0;
    if (np > 0) {
        Eigen::PartialPivLU<Matrix> lu(e);
        const double det_e = lu.determinant();
        Matrix inv = lu.inverse();
        // Cofactor C(k, v) = det(E) * inv(v, k).
        c = det_e * inv(vi, vi);
        for (Eigen::Index r = 0; r < np; ++r) a(r) = -det_e * inv(vi, pa[r] - 1);
    }
    Vector ainv_a = ldlt.solve(a);
    const double u = c + a.dot(beta_ols);
    const double v_q = a.dot(ainv_a);

    Vector beta = beta_ols;
    double delta = rss0;
    if (np > 0 && v_q > 0.0) {
        // Supremum is not attained when u == 0; leave the block unchanged.
        if (std::abs(u) <= 1e-14 * (std::abs(c) + a.cwiseAbs().sum())) return;
        const double kappa = rss0 / u;
        beta = beta_ols + kappa * ainv_a;
        delta = rss0 + kappa * kappa * v_q;
    }

    for (Eigen::Index r = 0; r < np; ++r) params.lambda(pa[r] - 1, vi) = beta(r);
    double quad = 0.0;
    if (ns > 0) {
        Vector gamma = beta.tail(ns);
        for (Eigen::Index r = 0; r < ns; ++r) {
            params.omega(vi, sib[r] - 1) = gamma(r);
            params.omega(sib[r] - 1, vi) = gamma(r);
        }
        for (Eigen::Index r = 0; r < ns; ++r)
            for (Eigen::Index q = 0; q < ns; ++q) quad += gamma(r) * omega_oo_inv(sib_pos[r], sib_pos[q]) * gamma(q);
    }
    params.omega(vi, vi) = delta + quad;
}

inline Params initial_point(const MixedGraph& g, const Matrix& s, int restart, std::uint64_t seed) {
    const int p = g.p();
    Params out{Matrix::Zero(p, p), Matrix::Zero(p, p)};
    out.omega.diagonal() = s.diagonal();
    if (restart == 0) return out;
    Rng rng = substream(seed, {0x66697400ULL, static_cast<std::uint64_t>(restart)});
    for (int attempt = 0; attempt < 100; ++attempt) {
        out.lambda.setZero();
        for (auto [a, b] : g.directed())
            out.lambda(a - 1, b - 1) = uniform(rng, -0.5, 0.5) * std::sqrt(s(b - 1, b - 1) / s(a - 1, a - 1));
        if (std::abs((Matrix::Identity(p, p) - out.lambda).determinant()) > 1e-3) break;
    }
    out.omega.setZero();
    for (auto [a, b] : g.bidirected()) {
        double w = uniform(rng, -0.3, 0.3) * std::sqrt(s(a - 1, a - 1) * s(b - 1, b - 1));
        out.omega(a - 1, b - 1) = w;
        out.omega(b - 1, a - 1) = w;
    }
    for (int i = 0; i < p; ++i)
        out.omega(i, i) = std::max(s(i, i), out.omega.row(i).cwiseAbs().sum() + 0.1 * s(i, i));
    return out;
}

}  // namespace detail

/// Ridge actually used for S under the config's policy.
inline double effective_ridge(const Matrix& s, const FitConfig& cfg) {
    if (cfg.ridge) return *cfg.ridge;
    if (Eigen::LLT<Matrix>(s).info() == Eigen::Success) return 0.0;
    return 1e-8 * s.trace() / static_cast<double>(s.rows());
}

/// Maximum-likelihood fit of graph g to the covariance S of n samples.
/// Restart 0 starts at (0, diag S); later restarts at random points.
inline FitResult fit_mle(const MixedGraph& g, const Matrix& s_in, double n, const FitConfig& cfg = {}) {
    require_simple(g, "fit_mle");
    if (cfg.max_sweeps < 1 || !(cfg.tol > 0.0) || cfg.restarts < 1)
        throw ContractError("fit_mle: invalid configuration");
    if (s_in.rows() != g.p() || s_in.cols() != g.p())
        throw ContractError("fit_mle: covariance matrix must be " + std::to_string(g.p()) + "x" +
                            std::to_string(g.p()));
    const double ridge = effective_ridge(s_in, cfg);
    Matrix s = s_in;
    s.diagonal().array() += ridge;
    if (Eigen::LLT<Matrix>(s).info() != Eigen::Success)
        throw ContractError("fit_mle: sample covariance is not positive definite");

    FitResult best;
    best.n = n;
    best.ridge = ridge;
    bool any = false;
    std::string last_error;
    for (int r = 0; r < cfg.restarts; ++r) {
        Params params = detail::initial_point(g, s, r, cfg.seed);
        double ll = detail::loglik_per_sample(params.lambda, params.omega, s);
        std::vector<double> trace;
        int sweeps = 0;
        bool converged = false;
        while (sweeps < cfg.max_sweeps) {
            for (int v = 1; v <= g.p(); ++v) detail::update_block(g, v, s, params);
            ++sweeps;
            const double next = detail::loglik_per_sample(params.lambda, params.omega, s);
            trace.push_back(next * n);
            if (!std::isfinite(next)) break;
            const double gain = next - ll;
            ll = next;
            if (gain <= cfg.tol * std::max(1.0, std::abs(ll))) {
                converged = true;
                break;
            }
        }
        if (!std::isfinite(ll)) {
            last_error = "restart " + std::to_string(r) + " produced a non-finite log-likelihood";
            continue;
        }
        if (!any || ll * n > best.loglik) {
            any = true;
            best.params = params;
            best.loglik = ll * n;
            best.sweeps_used = sweeps;
            best.converged = converged;
            best.restart = r;
            best.trace = std::move(trace);
        }
    }
    if (!any) throw NumericalError("fit_mle: " + last_error);
    return best;
}

/// (1/n) (max loglik - penalty(p, |D| + |B|, n)).
inline double score_from_fit(const MixedGraph& g, const FitResult& fit, PenaltyKind kind) {
    return (fit.loglik - penalty(g.p(), static_cast<int>(g.edge_count()), fit.n, kind)) / fit.n;
}

inline double score(const MixedGraph& g, const Matrix& s, double n, PenaltyKind kind, const FitConfig& cfg = {}) {
    return score_from_fit(g, fit_mle(g, s, n, cfg), kind);
}

}  // namespace mixsem
