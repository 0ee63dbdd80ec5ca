#pragma once

// Correlation graphs and modularity-based community detection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "mix.hpp"
#include "trait_stats.hpp"

namespace nkcomm {

struct Edge {
    std::size_t i;
    std::size_t j;
    double w;

    friend bool operator==(const Edge&, const Edge&) = default;
};

// Undirected graph with strictly positive weights, no self-loops and no
// parallel edges. Edges are stored with i < j in insertion order.
class WeightedGraph {
public:
    WeightedGraph() = default;
    WeightedGraph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges))
    {
        std::vector<std::pair<std::size_t, std::size_t>> seen;
        seen.reserve(edges_.size());
        for (auto& e : edges_) {
            if (e.i > e.j) std::swap(e.i, e.j);
            if (e.j >= n_) throw ParameterError("edge endpoint out of range");
            if (e.i == e.j) throw ParameterError("self-loops are not allowed");
            if (!(e.w > 0.0) || !std::isfinite(e.w)) throw ParameterError("edge weights must be finite and > 0");
            seen.emplace_back(e.i, e.j);
            total_weight_ += e.w;
        }
        std::sort(seen.begin(), seen.end());
        if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
            throw ParameterError("duplicate edge");
    }

    std::size_t n() const noexcept { return n_; }
    std::span<const Edge> edges() const noexcept { return edges_; }
    /// m: sum of edge weights.
    double total_weight() const noexcept { return total_weight_; }

    std::vector<double> degrees() const
    {
        std::vector<double> k(n_, 0.0);
        for (const auto& e : edges_) {
            k[e.i] += e.w;
            k[e.j] += e.w;
        }
        return k;
    }

private:
    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    double total_weight_ = 0.0;
};

enum class WeightMode { Abs, Squared, ClipPositive };

inline std::string_view to_string(WeightMode mode) noexcept
{
    switch (mode) {
    case WeightMode::Abs: return "abs";
    case WeightMode::Squared: return "squared";
    case WeightMode::ClipPositive: return "clip_positive";
    }
    return "abs";
}

inline std::optional<WeightMode> parse_weight_mode(std::string_view s) noexcept
{
    if (s == "abs") return WeightMode::Abs;
    if (s == "squared") return WeightMode::Squared;
    if (s == "clip_positive") return WeightMode::ClipPositive;
    return std::nullopt;
}

/// Drops near-zero correlations such as the rounding residue at k = 0.
inline constexpr double kDefaultEdgeThreshold = 1e-12;

inline WeightedGraph graph_from_correlation(const CorrelationMatrix& c, WeightMode mode = WeightMode::Abs,
                                            double threshold = kDefaultEdgeThreshold)
{
    if (!(threshold >= 0.0)) throw ParameterError("edge threshold must be >= 0");
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < c.n(); ++i) {
        for (std::size_t j = i + 1; j < c.n(); ++j) {
            const double rho = c(i, j);
            double w = 0.0;
            switch (mode) {
            case WeightMode::Abs: w = std::abs(rho); break;
            case WeightMode::Squared: w = rho * rho; break;
            case WeightMode::ClipPositive: w = std::max(rho, 0.0); break;
            }
            if (w > threshold) edges.push_back({i, j, w});
        }
    }
    return WeightedGraph(c.n(), std::move(edges));
}

/// Newman weighted modularity; 0 for a graph without edges.
inline double modularity(const WeightedGraph& g, std::span<const std::size_t> assignment)
{
    if (assignment.size() != g.n()) throw ParameterError("assignment must cover every node");
    const double m = g.total_weight();
    if (m <= 0.0) return 0.0;
    const std::size_t ids = assignment.empty() ? 0 : *std::max_element(assignment.begin(), assignment.end()) + 1;
    std::vector<double> internal(ids, 0.0);
    std::vector<double> total(ids, 0.0);
    for (const auto& e : g.edges()) {
        if (assignment[e.i] == assignment[e.j]) internal[assignment[e.i]] += e.w;
        total[assignment[e.i]] += e.w;
        total[assignment[e.j]] += e.w;
    }
    double q = 0.0;
    for (std::size_t c = 0; c < ids; ++c) {
        const double frac = total[c] / (2.0 * m);
        q += internal[c] / m - frac * frac;
    }
    return q;
}

struct Partition {
    std::vector<std::size_t> assignment; ///< dense ids, first appearance order
    std::size_t nc = 0;
    double q = 0.0;
};

/// Relabels ids densely in order of first appearance (a restricted growth
/// string) and returns the number of communities.
inline std::size_t normalize_assignment(std::vector<std::size_t>& assignment)
{
    std::map<std::size_t, std::size_t> relabel;
    for (auto& c : assignment) {
        auto [it, inserted] = relabel.try_emplace(c, relabel.size());
        c = it->second;
    }
    return relabel.size();
}

inline Partition make_partition(const WeightedGraph& g, std::vector<std::size_t> assignment)
{
    Partition p;
    p.nc = normalize_assignment(assignment);
    p.q = modularity(g, assignment);
    p.assignment = std::move(assignment);
    return p;
}

inline Partition singleton_partition(const WeightedGraph& g)
{
    std::vector<std::size_t> a(g.n());
    std::iota(a.begin(), a.end(), std::size_t{0});
    return make_partition(g, std::move(a));
}

namespace detail {

// Graph at one aggregation level. self_loop holds the total weight of the
// edges folded into each super-node; it counts twice in the degree.
struct LevelGraph {
    std::vector<std::vector<std::pair<std::size_t, double>>> adj;
    std::vector<double> self_loop;
    std::vector<double> degree;

    std::size_t size() const noexcept { return adj.size(); }
};

inline LevelGraph level_from(const WeightedGraph& g)
{
    LevelGraph lg;
    lg.adj.resize(g.n());
    lg.self_loop.assign(g.n(), 0.0);
    lg.degree = g.degrees();
    for (const auto& e : g.edges()) {
        lg.adj[e.i].emplace_back(e.j, e.w);
        lg.adj[e.j].emplace_back(e.i, e.w);
    }
    return lg;
}

// Local moving phase. Returns true if any node changed community.
inline bool move_nodes(const LevelGraph& lg, double m2, std::uint64_t seed, std::vector<std::size_t>& community)
{
    const std::size_t n = lg.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMixStream stream(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[stream.below(i)]);

    community.resize(n);
    std::iota(community.begin(), community.end(), std::size_t{0});
    std::vector<double> tot = lg.degree;

    std::vector<double> link(n, 0.0);
    std::vector<std::size_t> touched;
    bool any_move = false;
    constexpr int kMaxSweeps = 10000;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool moved = false;
        for (std::size_t node : order) {
            const std::size_t own = community[node];
            const double k = lg.degree[node];
            touched.clear();
            for (auto [nb, w] : lg.adj[node]) {
                const std::size_t c = community[nb];
                if (link[c] == 0.0) touched.push_back(c);
                link[c] += w;
            }
            tot[own] -= k;
            const double stay = link[own] - tot[own] * k / m2;
            std::sort(touched.begin(), touched.end());
            std::size_t best = own;
            double best_gain = 0.0;
            for (std::size_t c : touched) {
                if (c == own) continue;
                const double gain = (link[c] - tot[c] * k / m2) - stay;
                if (gain > best_gain) {
                    best_gain = gain;
                    best = c;
                }
            }
            // Guard against moves that only shuffle rounding error.
            if (best != own && best_gain <= 1e-12 * k) best = own;
            tot[best] += k;
            if (best != own) {
                community[node] = best;
                moved = true;
            }
            for (std::size_t c : touched) link[c] = 0.0;
        }
        if (!moved) break;
        any_move = true;
    }
    return any_move;
}

inline LevelGraph aggregate(const LevelGraph& lg, const std::vector<std::size_t>& community, std::size_t groups)
{
    LevelGraph next;
    next.adj.resize(groups);
    next.self_loop.assign(groups, 0.0);
    next.degree.assign(groups, 0.0);
    std::vector<std::map<std::size_t, double>> inter(groups);
    for (std::size_t v = 0; v < lg.size(); ++v) {
        const std::size_t cv = community[v];
        next.self_loop[cv] += lg.self_loop[v];
        next.degree[cv] += lg.degree[v];
        for (auto [u, w] : lg.adj[v]) {
            const std::size_t cu = community[u];
            if (cu == cv) {
                if (u > v) next.self_loop[cv] += w;
            } else {
                inter[cv][cu] += w;
            }
        }
    }
    for (std::size_t c = 0; c < groups; ++c)
        for (auto [d, w] : inter[c]) next.adj[c].emplace_back(d, w);
    return next;
}

} // namespace detail

// Two-phase Louvain: local moves in a seeded random node order, then
// aggregation of communities into super-nodes, until a level makes no move.
// A node only moves for a strictly positive gain; equal gains go to the
// lowest community id.
inline Partition louvain(const WeightedGraph& g, std::uint64_t seed = 0)
{
    const double m = g.total_weight();
    if (m <= 0.0) return singleton_partition(g);
    const double m2 = 2.0 * m;

    std::vector<std::size_t> membership(g.n());
    std::iota(membership.begin(), membership.end(), std::size_t{0});
    detail::LevelGraph level = detail::level_from(g);

    for (std::uint64_t depth = 0;; ++depth) {
        std::vector<std::size_t> community;
        const bool moved = detail::move_nodes(level, m2, seed ^ mix64(depth), community);
        const std::size_t groups = normalize_assignment(community);
        if (!moved || groups == level.size()) break;
        for (auto& c : membership) c = community[c];
        level = detail::aggregate(level, community, groups);
    }
    return make_partition(g, std::move(membership));
}

/// Largest graph the exhaustive oracle accepts; Bell(10) = 115975 partitions.
inline constexpr std::size_t kBruteForceMaxNodes = 10;

// Exhaustive search over all set partitions, enumerated as restricted growth
// strings in lexicographic order. A later string must beat the incumbent by
// more than 1e-12 to replace it, so ties resolve to the smallest string.
inline Partition brute_force_max_modularity(const WeightedGraph& g)
{
    const std::size_t n = g.n();
    if (n > kBruteForceMaxNodes)
        throw CapacityError("brute-force modularity is capped at n <= " + std::to_string(kBruteForceMaxNodes));
    if (g.total_weight() <= 0.0 || n == 0) return singleton_partition(g);

    std::vector<std::size_t> rgs(n, 0);
    std::vector<std::size_t> prefix_max(n, 0); // max of rgs[0..i]
    std::vector<std::size_t> best = rgs;
    double best_q = modularity(g, rgs);
    while (true) {
        std::size_t i = n - 1;
        while (i > 0 && rgs[i] > prefix_max[i - 1]) --i;
        if (i == 0) break;
        ++rgs[i];
        prefix_max[i] = std::max(prefix_max[i - 1], rgs[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
            rgs[j] = 0;
            prefix_max[j] = prefix_max[i];
        }
        const double q = modularity(g, rgs);
        if (q > best_q + 1e-12) {
            best_q = q;
            best = rgs;
        }
    }
    return make_partition(g, std::move(best));
}

} // namespace nkcomm
