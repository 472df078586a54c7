#pragma once

#include "anonet/error.hpp"

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace anonet {

using NodeId = std::size_t;
// Rounds are 1-based for communication; round 0 denotes initial states.
using Round = std::size_t;

struct Edge {
    NodeId u;
    NodeId v;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Undirected simple graph on nodes 0..n-1. Edges are stored normalized
// (u < v) and sorted.
class InstantGraph {
public:
    InstantGraph() = default;

    explicit InstantGraph(std::size_t n) : n_(n), adjacency_(n) {}

    InstantGraph(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& edges) : InstantGraph(n)
    {
        edges_.reserve(edges.size());
        for (auto [a, b] : edges) {
            if (a == b) {
                throw ValidationError("self-loop on node " + std::to_string(a));
            }
            if (a >= n || b >= n) {
                throw ValidationError("edge {" + std::to_string(a) + "," + std::to_string(b) +
                                      "} has an endpoint outside 0.." + std::to_string(n == 0 ? 0 : n - 1));
            }
            edges_.push_back(Edge{std::min(a, b), std::max(a, b)});
        }
        std::sort(edges_.begin(), edges_.end());
        if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
            throw ValidationError("duplicate edge");
        }
        for (const auto& e : edges_) {
            adjacency_[e.u].push_back(e.v);
            adjacency_[e.v].push_back(e.u);
        }
        for (auto& nbrs : adjacency_) {
            std::sort(nbrs.begin(), nbrs.end());
        }
    }

    std::size_t node_count() const noexcept { return n_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    // Sorted ascending.
    const std::vector<NodeId>& neighbors(NodeId u) const { return adjacency_.at(u); }
    std::size_t degree(NodeId u) const { return adjacency_.at(u).size(); }

    std::size_t max_degree() const
    {
        std::size_t d = 0;
        for (const auto& nbrs : adjacency_) {
            d = std::max(d, nbrs.size());
        }
        return d;
    }

    bool has_edge(NodeId a, NodeId b) const
    {
        const auto& nbrs = adjacency_.at(a);
        return std::binary_search(nbrs.begin(), nbrs.end(), b);
    }

    friend bool operator==(const InstantGraph& a, const InstantGraph& b)
    {
        return a.n_ == b.n_ && a.edges_ == b.edges_;
    }

private:
    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<NodeId>> adjacency_;
};

// Finite prefix of a dynamic graph: rounds[r - 1] is E(r).
class DynamicSchedule {
public:
    DynamicSchedule() = default;
    explicit DynamicSchedule(std::size_t n) : n_(n) {}
    DynamicSchedule(std::size_t n, std::vector<InstantGraph> rounds) : n_(n)
    {
        for (auto& g : rounds) {
            push_back(std::move(g));
        }
    }

    std::size_t node_count() const noexcept { return n_; }
    std::size_t length() const noexcept { return rounds_.size(); }
    const std::vector<InstantGraph>& rounds() const noexcept { return rounds_; }

    const InstantGraph& at_round(Round r) const
    {
        if (r == 0 || r > rounds_.size()) {
            throw RangeError("round " + std::to_string(r) + " outside 1.." + std::to_string(rounds_.size()));
        }
        return rounds_[r - 1];
    }

    void push_back(InstantGraph g)
    {
        if (g.node_count() != n_) {
            throw ValidationError("round graph has " + std::to_string(g.node_count()) + " nodes, schedule has " +
                                  std::to_string(n_));
        }
        rounds_.push_back(std::move(g));
    }

    friend bool operator==(const DynamicSchedule&, const DynamicSchedule&) = default;

private:
    std::size_t n_ = 0;
    std::vector<InstantGraph> rounds_;
};

inline bool is_connected(const InstantGraph& g)
{
    const std::size_t n = g.node_count();
    if (n <= 1) {
        return true;
    }
    std::vector<char> seen(n, 0);
    std::vector<NodeId> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const NodeId u = stack.back();
        stack.pop_back();
        for (NodeId v : g.neighbors(u)) {
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                stack.push_back(v);
            }
        }
    }
    return reached == n;
}

// Rounds (1-based, ascending) whose graph is disconnected.
inline std::vector<Round> validate_one_interval(const DynamicSchedule& s)
{
    std::vector<Round> bad;
    for (Round r = 1; r <= s.length(); ++r) {
        if (!is_connected(s.at_round(r))) {
            bad.push_back(r);
        }
    }
    return bad;
}

inline void require_one_interval(const DynamicSchedule& s, Round horizon)
{
    for (Round r = 1; r <= horizon; ++r) {
        if (!is_connected(s.at_round(r))) {
            throw ValidationError("round " + std::to_string(r) + " is disconnected");
        }
    }
}

// Breadth-first distances from `source`; unreachable nodes get SIZE_MAX.
inline std::vector<std::size_t> bfs_distances(const InstantGraph& g, NodeId source)
{
    std::vector<std::size_t> dist(g.node_count(), static_cast<std::size_t>(-1));
    std::vector<NodeId> queue{source};
    dist[source] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const NodeId u = queue[head];
        for (NodeId v : g.neighbors(u)) {
            if (dist[v] == static_cast<std::size_t>(-1)) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

} // namespace anonet
