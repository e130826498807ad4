#pragma once

// Covariance parametrization of linear structural equation models over mixed
// graphs, and the constructions that carry parameters of one graph over to a
// marker-equivalent graph.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixsem/error.hpp"
#include "mixsem/graph.hpp"

namespace mixsem {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Edge coefficients and error covariance. lambda(i-1, j-1) is the
/// coefficient on i->j; omega is symmetric.
struct Params {
    Matrix lambda;
    Matrix omega;
};

namespace tolerance {
inline constexpr double kSingularRcond = 1e-12;
inline constexpr double kDegenerateDet = 1e-10;
inline constexpr double kAbs = 1e-10;
inline constexpr double kRel = 1e-8;
}  // namespace tolerance

inline bool approx_equal(const Matrix& a, const Matrix& b, double atol = tolerance::kAbs,
                         double rtol = tolerance::kRel) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    return ((a - b).array().abs() <= atol + rtol * b.array().abs()).all();
}

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Throws unless lambda is supported on D and omega on B (off the diagonal).
inline void validate_support(const MixedGraph& g, const Params& params) {
    const int p = g.p();
    if (params.lambda.rows() != p || params.lambda.cols() != p || params.omega.rows() != p ||
        params.omega.cols() != p)
        throw ContractError("parameter matrices must be " + std::to_string(p) + "x" + std::to_string(p));
    for (int i = 1; i <= p; ++i)
        for (int j = 1; j <= p; ++j) {
            if (i == j) {
                if (params.lambda(i - 1, i - 1) != 0.0)
                    throw ContractError("lambda has a nonzero diagonal entry at " + std::to_string(i));
                continue;
            }
            if (params.lambda(i - 1, j - 1) != 0.0 && !g.has_directed(i, j))
                throw ContractError("lambda(" + std::to_string(i) + "," + std::to_string(j) +
                                    ") is nonzero but " + std::to_string(i) + "->" + std::to_string(j) +
                                    " is not an edge");
            if (params.omega(i - 1, j - 1) != params.omega(j - 1, i - 1))
                throw ContractError("omega is not symmetric");
            if (params.omega(i - 1, j - 1) != 0.0 && !g.has_bidirected(i, j))
                throw ContractError("omega(" + std::to_string(i) + "," + std::to_string(j) +
                                    ") is nonzero but " + std::to_string(i) + "<->" + std::to_string(j) +
                                    " is not an edge");
        }
}

/// Inverse of I - lambda, rejecting (near-)singular systems.
inline Matrix inverse_i_minus(const Matrix& lambda) {
    const Eigen::Index p = lambda.rows();
    Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(p, p) - lambda);
    if (p > 0 && !(lu.rcond() >= tolerance::kSingularRcond))
        throw SingularityError("I - Lambda is singular (reciprocal condition " + std::to_string(lu.rcond()) +
                               ")");
    return lu.inverse();
}

/// (I - L)^{-T} O (I - L)^{-1} without support checks.
inline Matrix covariance_of(const Matrix& lambda, const Matrix& omega) {
    Matrix inv = inverse_i_minus(lambda);
    return symmetrized(inv.transpose() * omega * inv);
}

/// The covariance parametrization of graph g.
inline Matrix phi(const MixedGraph& g, const Params& params) {
    validate_support(g, params);
    return covariance_of(params.lambda, params.omega);
}

inline double spectral_radius(const Matrix& m) {
    if (m.rows() != m.cols()) throw ContractError("spectral_radius: matrix must be square");
    if (m.size() == 0) return 0.0;
    Eigen::EigenSolver<Matrix> es(m, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline Matrix correlation(const Matrix& s) {
    Vector d = s.diagonal();
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (!(d(i) > 0.0))
            throw ContractError("correlation: nonpositive diagonal entry at " + std::to_string(i + 1));
    Vector inv_sqrt = d.array().rsqrt();
    Matrix r = inv_sqrt.asDiagonal() * s * inv_sqrt.asDiagonal();
    r.diagonal().setOnes();
    return symmetrized(r);
}

struct Standardized {
    Params params;
    Vector delta;  // delta(i) = Sigma_ii^{-1/2}
};

/// Rescales parameters so that phi becomes the correlation matrix:
/// lambda -> D^{-1} lambda D, omega -> D omega D with D = diag(Sigma)^{-1/2}.
inline Standardized standardize(const MixedGraph& g, const Params& params) {
    Matrix sigma = phi(g, params);
    Vector delta = sigma.diagonal().array().rsqrt();
    Vector inv = delta.cwiseInverse();
    Standardized out;
    out.delta = delta;
    out.params.lambda = inv.asDiagonal() * params.lambda * delta.asDiagonal();
    out.params.omega = symmetrized(delta.asDiagonal() * params.omega * delta.asDiagonal());
    return out;
}

/// Inverse of standardize for a given scaling.
inline Params destandardize(const Params& params, const Vector& delta) {
    Vector inv = delta.cwiseInverse();
    return {delta.asDiagonal() * params.lambda * inv.asDiagonal(),
            symmetrized(inv.asDiagonal() * params.omega * inv.asDiagonal())};
}

struct EdgeLabeling {
    Matrix lambda;
    Matrix omega_offdiag;  // zero diagonal
};

/// Copies the label of every skeleton pair of g1 onto the edge that g2 has
/// on the same pair, whatever its type or orientation.
inline EdgeLabeling induced_edge_labeling(const MixedGraph& g1, const MixedGraph& g2, const Params& p1) {
    require_simple(g1, "induced_edge_labeling");
    require_simple(g2, "induced_edge_labeling");
    if (skeleton(g1) != skeleton(g2)) throw ContractError("induced_edge_labeling: skeletons differ");
    validate_support(g1, p1);
    const int p = g1.p();
    EdgeLabeling out{Matrix::Zero(p, p), Matrix::Zero(p, p)};
    for (auto [i, j] : vertex_pairs(p)) {
        double label = 0.0;
        switch (g1.state(i, j)) {
            case PairState::None: continue;
            case PairState::Forward: label = p1.lambda(i - 1, j - 1); break;
            case PairState::Backward: label = p1.lambda(j - 1, i - 1); break;
            case PairState::Bidirected: label = p1.omega(i - 1, j - 1); break;
        }
        switch (g2.state(i, j)) {
            case PairState::None: break;
            case PairState::Forward: out.lambda(i - 1, j - 1) = label; break;
            case PairState::Backward: out.lambda(j - 1, i - 1) = label; break;
            case PairState::Bidirected:
                out.omega_offdiag(i - 1, j - 1) = label;
                out.omega_offdiag(j - 1, i - 1) = label;
                break;
        }
    }
    return out;
}

/// det(I - lambda) as a signed sum over permutations that move every vertex
/// either to itself or along a directed edge, i.e. over collections of
/// disjoint directed cycles. Valid whether or not I - lambda is invertible.
inline double det_cycle_expansion(const MixedGraph& g, const Matrix& lambda) {
    const int p = g.p();
    std::vector<std::vector<int>> targets(p);
    for (int v = 0; v < p; ++v) {
        targets[v].push_back(v);
        for (int c : g.children(v + 1)) targets[v].push_back(c - 1);
    }
    std::vector<int> sigma(p, -1);
    std::vector<char> used(p, 0);
    double total = 0.0;

    std::function<void(int)> extend = [&](int v) {
        if (v == p) {
            // (-1)^{#nontrivial cycles} times the product of their edge weights.
            std::vector<char> seen(p, 0);
            double term = 1.0;
            for (int s = 0; s < p; ++s) {
                if (seen[s] || sigma[s] == s) continue;
                int u = s;
                do {
                    seen[u] = 1;
                    term *= lambda(u, sigma[u]);
                    u = sigma[u];
                } while (u != s);
                term = -term;
            }
            total += term;
            return;
        }
        for (int t : targets[v]) {
            if (used[t]) continue;
            used[t] = 1;
            sigma[v] = t;
            extend(v + 1);
            used[t] = 0;
        }
    };
    extend(0);
    return total;
}

/// A trek between two vertices: left and right are directed paths listed
/// from the top down to the endpoints. For a node top both start at the same
/// vertex; for a bidirected top they start at the two ends of that edge.
struct Trek {
    std::vector<int> left;
    std::vector<int> right;
    bool bidirected_top = false;

    friend bool operator==(const Trek&, const Trek&) = default;
};

namespace detail {

/// All directed paths without repeated vertices from `from` to `to`.
inline std::vector<std::vector<int>> directed_paths(const MixedGraph& g, int from, int to) {
    std::vector<std::vector<int>> out;
    std::vector<int> path{from};
    std::vector<char> on_path(g.p() + 1, 0);
    on_path[from] = 1;
    std::function<void(int)> walk = [&](int v) {
        if (v == to) {
            out.push_back(path);
            return;
        }
        for (int c : g.children(v)) {
            if (on_path[c]) continue;
            on_path[c] = 1;
            path.push_back(c);
            walk(c);
            path.pop_back();
            on_path[c] = 0;
        }
    };
    walk(from);
    return out;
}

inline bool disjoint_sides(const std::vector<int>& left, const std::vector<int>& right, bool shared_top) {
    for (std::size_t a = shared_top ? 1 : 0; a < left.size(); ++a)
        for (std::size_t b = 0; b < right.size(); ++b)
            if (left[a] == right[b]) return false;
    if (shared_top)
        for (std::size_t b = 1; b < right.size(); ++b)
            if (right[b] == left[0]) return false;
    return true;
}

}  // namespace detail

/// All simple treks from i to j (i != j).
inline std::vector<Trek> simple_treks(const MixedGraph& g, int i, int j) {
    require_simple(g, "simple_treks");
    if (i == j) throw ContractError("simple_treks: endpoints must differ");
    if (i < 1 || j < 1 || i > g.p() || j > g.p()) throw ContractError("simple_treks: vertex out of range");
    std::vector<Trek> out;
    for (int top = 1; top <= g.p(); ++top) {
        auto lefts = detail::directed_paths(g, top, i);
        if (lefts.empty()) continue;
        auto rights = detail::directed_paths(g, top, j);
        for (const auto& l : lefts)
            for (const auto& r : rights)
                if (detail::disjoint_sides(l, r, true)) out.push_back({l, r, false});
    }
    for (auto [u, w] : g.bidirected()) {
        for (auto [a, b] : {Pair{u, w}, Pair{w, u}}) {
            auto lefts = detail::directed_paths(g, a, i);
            if (lefts.empty()) continue;
            auto rights = detail::directed_paths(g, b, j);
            for (const auto& l : lefts)
                for (const auto& r : rights)
                    if (detail::disjoint_sides(l, r, false)) out.push_back({l, r, true});
        }
    }
    return out;
}

/// Sum over simple treks of edge-label products. Only defined when phi is a
/// correlation matrix and rho(lambda) < 1; both are checked.
inline double trek_sum_entry(const MixedGraph& g, const Params& params, int i, int j) {
    if (i == j) throw ContractError("trek_sum_entry: only off-diagonal entries are defined");
    Matrix sigma = phi(g, params);
    if (((sigma.diagonal().array() - 1.0).abs() > 1e-8).any())
        throw ContractError("trek_sum_entry: phi is not a correlation matrix");
    const double rho = spectral_radius(params.lambda);
    if (!(rho < 1.0))
        throw ContractError("trek_sum_entry: spectral radius " + std::to_string(rho) + " is not below 1");
    double total = 0.0;
    for (const Trek& t : simple_treks(g, i, j)) {
        double term = t.bidirected_top ? params.omega(t.left.front() - 1, t.right.front() - 1) : 1.0;
        for (const auto* side : {&t.left, &t.right})
            for (std::size_t k = 1; k < side->size(); ++k) term *= params.lambda((*side)[k - 1] - 1, (*side)[k] - 1);
        total += term;
    }
    return total;
}

/// (I - L)^{-T} o (I - L)^{-T}: maps a diagonal error covariance to the
/// diagonal of the implied covariance.
inline Matrix hadamard_square(const Matrix& lambda) {
    Matrix a = inverse_i_minus(lambda).transpose();
    return a.cwiseProduct(a);
}

/// Diagonal of omega making phi(lambda, diag(x) + omega_offdiag) have a unit
/// diagonal.
inline Vector complete_diagonal(const MixedGraph& g2, const Matrix& lambda, const Matrix& omega_offdiag) {
    (void)g2;
    const Eigen::Index p = lambda.rows();
    Matrix a = inverse_i_minus(lambda).transpose();
    Matrix h = a.cwiseProduct(a);
    double scale = 1.0;
    for (Eigen::Index r = 0; r < p; ++r) scale *= std::max(h.row(r).norm(), 1e-300);
    Eigen::PartialPivLU<Matrix> lu(h);
    const double det = p > 0 ? lu.determinant() : 1.0;
    if (!(std::abs(det) >= tolerance::kDegenerateDet * scale))
        throw DegenerateTransferError("diagonal completion system is degenerate (|det H| = " +
                                      std::to_string(std::abs(det)) + ")");
    Vector b = Vector::Ones(p) - (a * omega_offdiag * a.transpose()).diagonal();
    return lu.solve(b);
}

struct TransferResult {
    Params params;
    double residual = 0.0;
    double det1 = 0.0;  // det(I - lambda1)
    double det2 = 0.0;  // det(I - lambda2)
    bool omega_positive_definite = false;
};

/// Parameters for g2 reproducing phi_{g1}(p1), for simple graphs with equal
/// skeleton and collider triples: standardize, relabel, complete the
/// diagonal, destandardize.
inline TransferResult transfer_parameters(const MixedGraph& g1, const MixedGraph& g2, const Params& p1) {
    require_simple(g1, "transfer_parameters");
    require_simple(g2, "transfer_parameters");
    if (g1.p() != g2.p()) throw ContractError("transfer_parameters: vertex counts differ");
    if (skeleton(g1) != skeleton(g2)) throw ContractError("transfer_parameters: marker mismatch (skeletons differ)");
    if (collider_triples(g1) != collider_triples(g2))
        throw ContractError("transfer_parameters: marker mismatch (collider triples differ)");

    Matrix sigma1 = phi(g1, p1);
    if (g1 == g2) {
        TransferResult same;
        same.params = p1;
        same.det1 = same.det2 = (Matrix::Identity(p1.lambda.rows(), p1.lambda.rows()) - p1.lambda).determinant();
        same.omega_positive_definite = Eigen::LLT<Matrix>(p1.omega).info() == Eigen::Success;
        return same;
    }
    Standardized s1 = standardize(g1, p1);
    const double rho1 = spectral_radius(s1.params.lambda);
    if (!(rho1 < 1.0))
        throw TransferPreconditionError(1, "transfer_parameters: spectral radius of graph 1 is " +
                                               std::to_string(rho1));
    EdgeLabeling lab = induced_edge_labeling(g1, g2, s1.params);
    const double rho2 = spectral_radius(lab.lambda);
    if (!(rho2 < 1.0))
        throw TransferPreconditionError(2, "transfer_parameters: spectral radius of graph 2 is " +
                                               std::to_string(rho2));
    Vector diag = complete_diagonal(g2, lab.lambda, lab.omega_offdiag);
    Params tilde2{lab.lambda, lab.omega_offdiag};
    tilde2.omega.diagonal() = diag;

    TransferResult out;
    out.params = destandardize(tilde2, s1.delta);
    const Eigen::Index p = p1.lambda.rows();
    out.det1 = (Matrix::Identity(p, p) - p1.lambda).determinant();
    out.det2 = (Matrix::Identity(p, p) - out.params.lambda).determinant();
    if (std::abs(out.det1 - out.det2) > 1e-10 * (1.0 + std::abs(out.det1)))
        throw NumericalError("transfer_parameters: det(I - Lambda) changed under relabeling (" +
                             std::to_string(out.det1) + " vs " + std::to_string(out.det2) + ")");
    out.residual = (phi(g2, out.params) - sigma1).cwiseAbs().maxCoeff();
    out.omega_positive_definite = Eigen::LLT<Matrix>(out.params.omega).info() == Eigen::Success;
    return out;
}

}  // namespace mixsem
