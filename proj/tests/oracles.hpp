#pragma once

// Test-only reference computations that share no code with the paths they
// check.

#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixsem/graph.hpp"

namespace oracle {

using mixsem::MixedGraph;

/// Every simple graph on p vertices, decoded from base-4 integers.
inline std::vector<MixedGraph> all_simple_graphs(int p) {
    auto pairs = mixsem::vertex_pairs(p);
    std::uint64_t total = 1;
    for (std::size_t k = 0; k < pairs.size(); ++k) total *= 4;
    std::vector<MixedGraph> out;
    for (std::uint64_t code = 0; code < total; ++code) {
        MixedGraph g(p);
        std::uint64_t c = code;
        for (auto [i, j] : pairs) {
            switch (c % 4) {
                case 1: g.add_directed(i, j); break;
                case 2: g.add_directed(j, i); break;
                case 3: g.add_bidirected(i, j); break;
                default: break;
            }
            c /= 4;
        }
        out.push_back(g);
    }
    return out;
}

/// Every mixed graph (simple or not) on p vertices: each pair carries any
/// subset of {i->j, j->i, i<->j}.
inline std::vector<MixedGraph> all_mixed_graphs(int p) {
    auto pairs = mixsem::vertex_pairs(p);
    std::uint64_t total = 1;
    for (std::size_t k = 0; k < pairs.size(); ++k) total *= 8;
    std::vector<MixedGraph> out;
    for (std::uint64_t code = 0; code < total; ++code) {
        MixedGraph g(p);
        std::uint64_t c = code;
        for (auto [i, j] : pairs) {
            if (c & 1) g.add_directed(i, j);
            if (c & 2) g.add_directed(j, i);
            if (c & 4) g.add_bidirected(i, j);
            c /= 8;
        }
        out.push_back(g);
    }
    return out;
}

/// Single-move relation computed from the raw edge sets: the graphs differ
/// on exactly one pair, and the change is an addition, a deletion, or the
/// reversal of a directed edge.
inline bool one_move_apart(const MixedGraph& a, const MixedGraph& b) {
    int differing = 0;
    bool legal = true;
    for (auto [i, j] : mixsem::vertex_pairs(a.p())) {
        const unsigned x = a.pair_mask(i, j), y = b.pair_mask(i, j);
        if (x == y) continue;
        ++differing;
        const bool reversal = (x == 1 && y == 2) || (x == 2 && y == 1);
        legal = legal && (x == 0 || y == 0 || reversal);
    }
    return differing == 1 && legal;
}

/// Shortest move-path distances from `source` over all simple graphs on p.
inline std::map<std::string, int> bfs_move_distances(const MixedGraph& source) {
    auto graphs = all_simple_graphs(source.p());
    std::map<std::string, int> dist{{source.key(), 0}};
    std::deque<MixedGraph> queue{source};
    while (!queue.empty()) {
        MixedGraph g = queue.front();
        queue.pop_front();
        for (const auto& h : graphs) {
            if (dist.count(h.key()) || !one_move_apart(g, h)) continue;
            dist[h.key()] = dist[g.key()] + 1;
            queue.push_back(h);
        }
    }
    return dist;
}

/// Marker class by filtering all simple graphs.
inline std::vector<MixedGraph> marker_class_brute(const MixedGraph& g) {
    std::vector<MixedGraph> out;
    const auto skel = mixsem::skeleton(g);
    const auto coll = mixsem::collider_triples(g);
    for (const auto& h : all_simple_graphs(g.p()))
        if (mixsem::skeleton(h) == skel && mixsem::collider_triples(h) == coll) out.push_back(h);
    return out;
}

/// Collider triples straight from the definition over all vertex triples.
inline std::set<mixsem::Triple> colliders_by_definition(const MixedGraph& g) {
    std::set<mixsem::Triple> out;
    for (int i = 1; i <= g.p(); ++i)
        for (int k = i + 1; k <= g.p(); ++k)
            for (int j = 1; j <= g.p(); ++j) {
                if (j == i || j == k) continue;
                const bool ij = g.has_directed(i, j) || g.has_bidirected(i, j);
                const bool kj = g.has_directed(k, j) || g.has_bidirected(k, j);
                if (ij && kj) out.emplace(i, j, k);
            }
    return out;
}

/// Covariance by explicit matrix inversion.
inline Eigen::MatrixXd phi_direct(const Eigen::MatrixXd& lambda, const Eigen::MatrixXd& omega) {
    const auto p = lambda.rows();
    Eigen::MatrixXd inv = (Eigen::MatrixXd::Identity(p, p) - lambda).inverse();
    return inv.transpose() * omega * inv;
}

}  // namespace oracle
