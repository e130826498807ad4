#pragma once

// Mixed graphs with directed (i->j) and bidirected (i<->j) edges on vertices
// 1..p, their structural markers (skeleton, collider triples), the local
// search neighborhood and structural Hamming distances.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "mixsem/error.hpp"

namespace mixsem {

using Pair = std::pair<int, int>;
using Triple = std::tuple<int, int, int>;

/// Edge state of an unordered pair {i, j}, i < j, in a simple graph.
enum class PairState : std::uint8_t {
    None = 0,
    Forward = 1,     // i -> j
    Backward = 2,    // j -> i
    Bidirected = 3,  // i <-> j
};

/// All unordered pairs {i, j}, i < j, in lexicographic order.
inline std::vector<Pair> vertex_pairs(int p) {
    std::vector<Pair> out;
    out.reserve(static_cast<std::size_t>(p) * (p > 0 ? p - 1 : 0) / 2);
    for (int i = 1; i <= p; ++i)
        for (int j = i + 1; j <= p; ++j) out.emplace_back(i, j);
    return out;
}

class MixedGraph {
public:
    MixedGraph() = default;

    explicit MixedGraph(int p) : p_(p) {
        if (p < 0) throw ContractError("vertex count must be nonnegative");
    }

    MixedGraph(int p, const std::vector<Pair>& directed, const std::vector<Pair>& bidirected)
        : MixedGraph(p) {
        for (auto [i, j] : directed) add_directed(i, j);
        for (auto [i, j] : bidirected) add_bidirected(i, j);
    }

    int p() const noexcept { return p_; }
    const std::set<Pair>& directed() const noexcept { return directed_; }
    /// Stored normalized as (i, j) with i < j.
    const std::set<Pair>& bidirected() const noexcept { return bidirected_; }
    std::size_t edge_count() const noexcept { return directed_.size() + bidirected_.size(); }

    void add_directed(int from, int to) {
        check_pair(from, to);
        directed_.emplace(from, to);
    }
    void add_bidirected(int a, int b) {
        check_pair(a, b);
        bidirected_.insert(normalized(a, b));
    }
    void remove_directed(int from, int to) { directed_.erase({from, to}); }
    void remove_bidirected(int a, int b) { bidirected_.erase(normalized(a, b)); }

    bool has_directed(int from, int to) const { return directed_.count({from, to}) > 0; }
    bool has_bidirected(int a, int b) const { return bidirected_.count(normalized(a, b)) > 0; }
    bool adjacent(int a, int b) const {
        return has_directed(a, b) || has_directed(b, a) || has_bidirected(a, b);
    }
    /// True if some edge between a and b has an arrowhead at b.
    bool head_at(int a, int b) const { return has_directed(a, b) || has_bidirected(a, b); }

    /// Bit mask of the edges on {i, j}, i < j: 1 = i->j, 2 = j->i, 4 = i<->j.
    unsigned pair_mask(int i, int j) const {
        return (has_directed(i, j) ? 1u : 0u) | (has_directed(j, i) ? 2u : 0u) |
               (has_bidirected(i, j) ? 4u : 0u);
    }

    /// State of {i, j}, i < j. The pair must carry at most one edge.
    PairState state(int i, int j) const {
        switch (pair_mask(i, j)) {
            case 0: return PairState::None;
            case 1: return PairState::Forward;
            case 2: return PairState::Backward;
            case 4: return PairState::Bidirected;
            default:
                throw ContractError("pair {" + std::to_string(i) + "," + std::to_string(j) +
                                    "} carries more than one edge");
        }
    }

    /// Replaces whatever sits on {i, j}, i < j, with the given state.
    void set_state(int i, int j, PairState s) {
        remove_directed(i, j);
        remove_directed(j, i);
        remove_bidirected(i, j);
        switch (s) {
            case PairState::None: break;
            case PairState::Forward: add_directed(i, j); break;
            case PairState::Backward: add_directed(j, i); break;
            case PairState::Bidirected: add_bidirected(i, j); break;
        }
    }

    std::vector<int> parents(int v) const {
        std::vector<int> out;
        for (auto [a, b] : directed_)
            if (b == v) out.push_back(a);
        return out;
    }
    std::vector<int> children(int v) const {
        std::vector<int> out;
        for (auto [a, b] : directed_)
            if (a == v) out.push_back(b);
        return out;
    }
    std::vector<int> siblings(int v) const {
        std::vector<int> out;
        for (auto [a, b] : bidirected_) {
            if (a == v) out.push_back(b);
            if (b == v) out.push_back(a);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Canonical encoding: one character per pair in lexicographic order.
    /// Graphs are ordered by (p, key); this is the search tie-break order.
    std::string key() const {
        std::string k;
        k.reserve(static_cast<std::size_t>(p_) * (p_ > 0 ? p_ - 1 : 0) / 2);
        for (int i = 1; i <= p_; ++i)
            for (int j = i + 1; j <= p_; ++j)
                k.push_back(static_cast<char>('0' + pair_mask(i, j)));
        return k;
    }

    std::string to_string() const {
        std::ostringstream os;
        os << "p=" << p_ << " {";
        bool first = true;
        for (auto [a, b] : directed_) {
            os << (first ? "" : ", ") << a << "->" << b;
            first = false;
        }
        for (auto [a, b] : bidirected_) {
            os << (first ? "" : ", ") << a << "<->" << b;
            first = false;
        }
        os << "}";
        return os.str();
    }

    friend bool operator==(const MixedGraph&, const MixedGraph&) = default;
    friend std::ostream& operator<<(std::ostream& os, const MixedGraph& g) { return os << g.to_string(); }

private:
    static Pair normalized(int a, int b) { return a < b ? Pair{a, b} : Pair{b, a}; }

    void check_pair(int a, int b) const {
        if (a < 1 || a > p_ || b < 1 || b > p_)
            throw ContractError("vertex label out of range 1.." + std::to_string(p_) + " in pair (" +
                                std::to_string(a) + "," + std::to_string(b) + ")");
        if (a == b) throw ContractError("self-loop at vertex " + std::to_string(a));
    }

    int p_ = 0;
    std::set<Pair> directed_;
    std::set<Pair> bidirected_;
};

inline bool canonical_less(const MixedGraph& a, const MixedGraph& b) {
    if (a.p() != b.p()) return a.p() < b.p();
    return a.key() < b.key();
}

struct Skeleton {
    int p = 0;
    std::set<Pair> edges;  // (i, j), i < j
    friend bool operator==(const Skeleton&, const Skeleton&) = default;
};

struct ColliderSet {
    std::set<Triple> triples;  // (i, j, k): collider at j, i < k
    friend bool operator==(const ColliderSet&, const ColliderSet&) = default;
};

inline bool is_simple(const MixedGraph& g) {
    for (auto [i, j] : vertex_pairs(g.p())) {
        unsigned m = g.pair_mask(i, j);
        if (m != 0 && (m & (m - 1)) != 0) return false;
    }
    return true;
}

inline void require_simple(const MixedGraph& g, const char* what) {
    if (!is_simple(g))
        throw ContractError(std::string(what) + ": graph must be simple (at most one edge per pair), got " +
                            g.to_string());
}

inline Skeleton skeleton(const MixedGraph& g) {
    Skeleton s{g.p(), {}};
    for (auto [a, b] : g.directed()) s.edges.insert(a < b ? Pair{a, b} : Pair{b, a});
    for (auto e : g.bidirected()) s.edges.insert(e);
    return s;
}

inline ColliderSet collider_triples(const MixedGraph& g) {
    ColliderSet out;
    for (int j = 1; j <= g.p(); ++j) {
        std::vector<int> into;
        for (int i = 1; i <= g.p(); ++i)
            if (i != j && g.head_at(i, j)) into.push_back(i);
        for (std::size_t a = 0; a < into.size(); ++a)
            for (std::size_t b = a + 1; b < into.size(); ++b) out.triples.emplace(into[a], j, into[b]);
    }
    return out;
}

/// Same skeleton and same collider triples.
inline bool same_markers(const MixedGraph& a, const MixedGraph& b) {
    return skeleton(a) == skeleton(b) && collider_triples(a) == collider_triples(b);
}

/// Every simple graph one move away: add an edge of any type on an empty
/// pair, remove an edge, or reverse a directed edge. Sorted canonically.
inline std::vector<MixedGraph> neighborhood(const MixedGraph& g) {
    require_simple(g, "neighborhood");
    std::vector<MixedGraph> out;
    for (auto [i, j] : vertex_pairs(g.p())) {
        auto push = [&](PairState s) {
            MixedGraph h = g;
            h.set_state(i, j, s);
            out.push_back(std::move(h));
        };
        switch (g.state(i, j)) {
            case PairState::None:
                push(PairState::Forward);
                push(PairState::Backward);
                push(PairState::Bidirected);
                break;
            case PairState::Forward:
                push(PairState::None);
                push(PairState::Backward);
                break;
            case PairState::Backward:
                push(PairState::None);
                push(PairState::Forward);
                break;
            case PairState::Bidirected:
                push(PairState::None);
                break;
        }
    }
    std::sort(out.begin(), out.end(), canonical_less);
    return out;
}

/// Human-readable description of the single move turning `from` into `to`.
inline std::string describe_move(const MixedGraph& from, const MixedGraph& to) {
    auto edge = [](int i, int j, PairState s) {
        switch (s) {
            case PairState::Forward: return std::to_string(i) + "->" + std::to_string(j);
            case PairState::Backward: return std::to_string(j) + "->" + std::to_string(i);
            case PairState::Bidirected: return std::to_string(i) + "<->" + std::to_string(j);
            default: return std::string{};
        }
    };
    std::string out;
    for (auto [i, j] : vertex_pairs(from.p())) {
        PairState a = from.state(i, j), b = to.state(i, j);
        if (a == b) continue;
        if (!out.empty()) out += "; ";
        if (a == PairState::None)
            out += "add " + edge(i, j, b);
        else if (b == PairState::None)
            out += "remove " + edge(i, j, a);
        else if (a != PairState::Bidirected && b != PairState::Bidirected)
            out += "reverse " + edge(i, j, a);
        else
            out += "replace " + edge(i, j, a) + " by " + edge(i, j, b);
    }
    return out;
}

/// Structural Hamming distance under the add/remove/reverse move set:
/// per pair 0 if equal, 1 for a missing edge or a reversal, 2 for a change
/// between directed and bidirected.
inline int shd(const MixedGraph& a, const MixedGraph& b) {
    if (a.p() != b.p())
        throw ContractError("shd: vertex counts differ (" + std::to_string(a.p()) + " vs " +
                            std::to_string(b.p()) + ")");
    require_simple(a, "shd");
    require_simple(b, "shd");
    int d = 0;
    for (auto [i, j] : vertex_pairs(a.p())) {
        PairState x = a.state(i, j), y = b.state(i, j);
        if (x == y) continue;
        if (x == PairState::None || y == PairState::None)
            d += 1;
        else if (x != PairState::Bidirected && y != PairState::Bidirected)
            d += 1;
        else
            d += 2;
    }
    return d;
}

inline constexpr std::size_t kDefaultMarkerCap = 12;

/// All simple graphs with exactly this skeleton and collider set. Searches
/// the 3^|edges| typings depth-first, pruning on partial collider mismatch.
inline std::vector<MixedGraph> marker_class(const Skeleton& skel, const ColliderSet& coll,
                                            std::size_t cap = kDefaultMarkerCap) {
    std::vector<Pair> edges(skel.edges.begin(), skel.edges.end());
    if (edges.size() > cap)
        throw EnumerationTooLarge("marker class enumeration over " + std::to_string(edges.size()) +
                                  " skeleton edges exceeds the cap of " + std::to_string(cap));
    MixedGraph g(skel.p);
    std::vector<MixedGraph> out;
    constexpr PairState kTypes[] = {PairState::Forward, PairState::Backward, PairState::Bidirected};

    // Collider status at v of the pair of edges e and f meeting at v must
    // match the target set.
    auto consistent = [&](std::size_t e) {
        auto [a, b] = edges[e];
        for (std::size_t f = 0; f < e; ++f) {
            auto [c, d] = edges[f];
            int v, x, y;
            if (a == c) { v = a; x = b; y = d; }
            else if (a == d) { v = a; x = b; y = c; }
            else if (b == c) { v = b; x = a; y = d; }
            else if (b == d) { v = b; x = a; y = c; }
            else continue;
            bool is_collider = g.head_at(x, v) && g.head_at(y, v);
            Triple t{std::min(x, y), v, std::max(x, y)};
            if (is_collider != (coll.triples.count(t) > 0)) return false;
        }
        return true;
    };

    std::function<void(std::size_t)> assign = [&](std::size_t e) {
        if (e == edges.size()) {
            if (collider_triples(g) == coll) out.push_back(g);
            return;
        }
        for (PairState s : kTypes) {
            g.set_state(edges[e].first, edges[e].second, s);
            if (consistent(e)) assign(e + 1);
        }
        g.set_state(edges[e].first, edges[e].second, PairState::None);
    };
    assign(0);
    std::sort(out.begin(), out.end(), canonical_less);
    return out;
}

/// SHD minimized over both graphs' marker classes.
inline int shd_star(const MixedGraph& a, const MixedGraph& b, std::size_t cap = kDefaultMarkerCap) {
    if (a.p() != b.p()) throw ContractError("shd_star: vertex counts differ");
    require_simple(a, "shd_star");
    require_simple(b, "shd_star");
    auto ca = marker_class(skeleton(a), collider_triples(a), cap);
    auto cb = marker_class(skeleton(b), collider_triples(b), cap);
    int best = shd(a, b);
    for (const auto& x : ca)
        for (const auto& y : cb) {
            if (best == 0) return 0;
            best = std::min(best, shd(x, y));
        }
    return best;
}

}  // namespace mixsem
