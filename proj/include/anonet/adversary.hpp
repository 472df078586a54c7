#pragma once

#include "anonet/digest.hpp"
#include "anonet/error.hpp"
#include "anonet/graph.hpp"
#include "anonet/rng.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace anonet {

enum class Mode { broadcast, one_to_each };

inline std::string to_string(Mode m) { return m == Mode::broadcast ? "broadcast" : "one-to-each"; }

using Label = std::size_t;

// Per-round local edge labels: at every node u, a bijection between u's
// incident edges and 1..deg(u).
class EdgeLabeling {
public:
    EdgeLabeling() = default;

    // by_label[u][i - 1] is the neighbor behind u's label i.
    EdgeLabeling(const InstantGraph& g, std::vector<std::vector<NodeId>> by_label)
        : by_label_(std::move(by_label)), label_of_(g.node_count())
    {
        if (by_label_.size() != g.node_count()) {
            throw ValidationError("labeling covers " + std::to_string(by_label_.size()) + " nodes, graph has " +
                                  std::to_string(g.node_count()));
        }
        for (NodeId u = 0; u < g.node_count(); ++u) {
            std::vector<NodeId> sorted = by_label_[u];
            std::sort(sorted.begin(), sorted.end());
            if (sorted != g.neighbors(u)) {
                throw ValidationError("labels at node " + std::to_string(u) + " are not a bijection onto its edges");
            }
            auto& entries = label_of_[u];
            for (std::size_t i = 0; i < by_label_[u].size(); ++i) {
                entries.emplace_back(by_label_[u][i], i + 1);
            }
            std::sort(entries.begin(), entries.end());
        }
    }

    std::size_t node_count() const noexcept { return by_label_.size(); }
    std::size_t degree(NodeId u) const { return by_label_.at(u).size(); }

    NodeId neighbor(NodeId u, Label label) const
    {
        const auto& row = by_label_.at(u);
        if (label == 0 || label > row.size()) {
            throw RangeError("label " + std::to_string(label) + " not held by node " + std::to_string(u));
        }
        return row[label - 1];
    }

    Label label(NodeId u, NodeId v) const
    {
        const auto& entries = label_of_.at(u);
        auto it = std::lower_bound(entries.begin(), entries.end(), std::pair<NodeId, Label>{v, 0});
        if (it == entries.end() || it->first != v) {
            throw RangeError("no edge {" + std::to_string(u) + "," + std::to_string(v) + "}");
        }
        return it->second;
    }

    const std::vector<std::vector<NodeId>>& by_label() const noexcept { return by_label_; }

    // Labels aligned with u's neighbors in ascending index order.
    std::vector<Label> labels_by_neighbor(NodeId u) const
    {
        std::vector<Label> out;
        for (const auto& [v, l] : label_of_.at(u)) {
            out.push_back(l);
        }
        return out;
    }

    friend bool operator==(const EdgeLabeling& a, const EdgeLabeling& b) { return a.by_label_ == b.by_label_; }

private:
    std::vector<std::vector<NodeId>> by_label_;
    std::vector<std::vector<std::pair<NodeId, Label>>> label_of_;
};

// Seeded random permutation of each node's incident edges, fresh per round.
inline EdgeLabeling random_labeling(const InstantGraph& g, std::uint64_t seed, Round round)
{
    std::vector<std::vector<NodeId>> rows(g.node_count());
    for (NodeId u = 0; u < g.node_count(); ++u) {
        Rng rng(derive_seed(seed, {0x1abe1, round, u}));
        rows[u] = g.neighbors(u);
        shuffle(rows[u], rng);
    }
    return EdgeLabeling(g, std::move(rows));
}

// Everything the adversary may inspect before choosing a round's edges.
struct AdversaryContext {
    Round round = 1;
    std::span<const StateDigest> state_digests;
    std::uint64_t rng_seed = 0;
};

struct RoundPlan {
    InstantGraph graph;
    std::optional<EdgeLabeling> labels;
};

class Adversary {
public:
    virtual ~Adversary() = default;

    virtual std::string name() const = 0;
    virtual std::size_t node_count() const = 0;
    // Strategies that read state digests; the engine skips hashing otherwise.
    virtual bool inspects_states() const { return false; }

    // Emits E(r) and, in one-to-each mode, the round's labeling.
    RoundPlan next_round(const AdversaryContext& ctx, Mode mode)
    {
        if (ctx.round == 0) {
            throw RangeError("adversary rounds start at 1");
        }
        RoundPlan plan = choose(ctx, mode);
        if (plan.graph.node_count() != node_count()) {
            throw ValidationError(name() + " emitted a graph on the wrong node count in round " +
                                  std::to_string(ctx.round));
        }
        if (!is_connected(plan.graph)) {
            throw ValidationError(name() + " emitted a disconnected graph in round " + std::to_string(ctx.round));
        }
        if (mode == Mode::broadcast) {
            plan.labels.reset();
        } else if (!plan.labels) {
            plan.labels = random_labeling(plan.graph, ctx.rng_seed, ctx.round);
        }
        return plan;
    }

protected:
    // Strategies may leave labels empty to get the default random labeling.
    virtual RoundPlan choose(const AdversaryContext& ctx, Mode mode) = 0;
};

// ---------------------------------------------------------------------------
// Topology builders. Node 0 is the leader position.

inline InstantGraph star(std::size_t n)
{
    if (n == 0) {
        throw ValidationError("star needs at least one node");
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId v = 1; v < n; ++v) {
        edges.emplace_back(0, v);
    }
    return InstantGraph(n, edges);
}

// Path through all nodes. With leader_at_end the order is 0,1,..,n-1;
// otherwise node 0 sits at the middle position.
inline InstantGraph line(std::size_t n, bool leader_at_end = true)
{
    if (n == 0) {
        throw ValidationError("line needs at least one node");
    }
    std::vector<NodeId> order;
    if (leader_at_end) {
        for (NodeId v = 0; v < n; ++v) {
            order.push_back(v);
        }
    } else {
        const std::size_t middle = (n - 1) / 2;
        for (NodeId v = 1; v <= middle; ++v) {
            order.push_back(v);
        }
        order.push_back(0);
        for (NodeId v = middle + 1; v < n; ++v) {
            order.push_back(v);
        }
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        edges.emplace_back(order[i], order[i + 1]);
    }
    return InstantGraph(n, edges);
}

inline InstantGraph ring(std::size_t n)
{
    if (n == 0) {
        throw ValidationError("ring needs at least one node");
    }
    if (n <= 2) {
        return line(n);
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId v = 0; v < n; ++v) {
        edges.emplace_back(v, (v + 1) % n);
    }
    return InstantGraph(n, edges);
}

// Root 0 with `branches` identical paths of `per_branch` nodes. Branch b
// holds nodes 1 + b*per_branch .. (b+1)*per_branch, nearest the root first.
inline InstantGraph symmetric_tree(std::size_t per_branch, std::size_t branches)
{
    if (per_branch == 0) {
        throw ValidationError("symmetric tree needs at least one node per branch");
    }
    if (branches < 2) {
        throw ValidationError("symmetric tree needs at least two branches");
    }
    const std::size_t n = 1 + per_branch * branches;
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t b = 0; b < branches; ++b) {
        NodeId prev = 0;
        for (std::size_t t = 0; t < per_branch; ++t) {
            const NodeId v = 1 + b * per_branch + t;
            edges.emplace_back(prev, v);
            prev = v;
        }
    }
    return InstantGraph(n, edges);
}

// Uniform random labeled spanning tree (random Pruefer sequence) plus every
// other edge independently with probability 1/2.
inline InstantGraph random_connected_graph(std::size_t n, Rng& rng)
{
    if (n == 0) {
        throw ValidationError("graph needs at least one node");
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    if (n == 2) {
        edges.emplace_back(0, 1);
    } else if (n > 2) {
        std::vector<NodeId> code(n - 2);
        for (auto& c : code) {
            c = uniform_below(rng, n);
        }
        std::vector<std::size_t> degree(n, 1);
        for (NodeId c : code) {
            ++degree[c];
        }
        for (NodeId c : code) {
            NodeId leaf = 0;
            while (degree[leaf] != 1) {
                ++leaf;
            }
            edges.emplace_back(leaf, c);
            --degree[leaf];
            --degree[c];
        }
        NodeId a = n, b = n;
        for (NodeId v = 0; v < n; ++v) {
            if (degree[v] == 1) {
                (a == n ? a : b) = v;
            }
        }
        edges.emplace_back(a, b);
    }
    std::vector<std::vector<char>> in_tree(n, std::vector<char>(n, 0));
    for (auto [a, b] : edges) {
        in_tree[a][b] = in_tree[b][a] = 1;
    }
    for (NodeId a = 0; a < n; ++a) {
        for (NodeId b = a + 1; b < n; ++b) {
            if (!in_tree[a][b] && coin(rng)) {
                edges.emplace_back(a, b);
            }
        }
    }
    return InstantGraph(n, edges);
}

// ---------------------------------------------------------------------------
// Strategies.

class StaticAdversary final : public Adversary {
public:
    explicit StaticAdversary(InstantGraph g, std::string label = "static") : graph_(std::move(g)), name_(std::move(label))
    {
        if (!is_connected(graph_)) {
            throw ValidationError("static adversary needs a connected graph");
        }
    }

    std::string name() const override { return name_; }
    std::size_t node_count() const override { return graph_.node_count(); }

protected:
    RoundPlan choose(const AdversaryContext&, Mode) override { return {graph_, std::nullopt}; }

private:
    InstantGraph graph_;
    std::string name_;
};

class RandomConnectedAdversary final : public Adversary {
public:
    RandomConnectedAdversary(std::size_t n, std::uint64_t seed) : n_(n), seed_(seed)
    {
        if (n == 0) {
            throw ValidationError("random adversary needs at least one node");
        }
    }

    std::string name() const override { return "random-connected"; }
    std::size_t node_count() const override { return n_; }

    InstantGraph graph_at(Round r) const
    {
        Rng rng(derive_seed(seed_, {0x9a9b, r}));
        return random_connected_graph(n_, rng);
    }

protected:
    RoundPlan choose(const AdversaryContext& ctx, Mode) override { return {graph_at(ctx.round), std::nullopt}; }

private:
    std::size_t n_;
    std::uint64_t seed_;
};

// Round r: a path with the leader at one end and node ((r-1) mod (n-1)) + 1
// next to it; the rest follow in index order.
class FairMeetAllAdversary final : public Adversary {
public:
    explicit FairMeetAllAdversary(std::size_t n) : n_(n)
    {
        if (n < 2) {
            throw ValidationError("fair-meet-all needs at least two nodes");
        }
    }

    std::string name() const override { return "fair-meet-all"; }
    std::size_t node_count() const override { return n_; }

    static NodeId leader_neighbor(std::size_t n, Round r) { return ((r - 1) % (n - 1)) + 1; }

protected:
    RoundPlan choose(const AdversaryContext& ctx, Mode) override
    {
        const NodeId first = leader_neighbor(n_, ctx.round);
        std::vector<NodeId> order{0, first};
        for (NodeId v = 1; v < n_; ++v) {
            if (v != first) {
                order.push_back(v);
            }
        }
        std::vector<std::pair<NodeId, NodeId>> edges;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            edges.emplace_back(order[i], order[i + 1]);
        }
        return {InstantGraph(n_, edges), std::nullopt};
    }

private:
    std::size_t n_;
};

enum class MirrorPattern { fixed, oscillating };

// Trees of identical branches hanging off the leader. Each round the same
// permutation of depth positions is applied to every branch, so the k-th node
// of one branch always sits at the same depth as the k-th node of the others.
class SymmetricMirrorAdversary final : public Adversary {
public:
    SymmetricMirrorAdversary(std::size_t branch_len, MirrorPattern pattern, std::size_t branches = 2)
        : branch_len_(branch_len), branches_(branches), pattern_(pattern)
    {
        symmetric_tree(branch_len, branches); // validates sizes
    }

    std::string name() const override { return "mirror"; }
    std::size_t node_count() const override { return 1 + branch_len_ * branches_; }

    // Node ids that occupy the same branch position.
    std::vector<std::pair<NodeId, NodeId>> mirror_pairs() const
    {
        std::vector<std::pair<NodeId, NodeId>> pairs;
        for (std::size_t t = 0; t < branch_len_; ++t) {
            for (std::size_t b = 1; b < branches_; ++b) {
                pairs.emplace_back(1 + t, 1 + b * branch_len_ + t);
            }
        }
        return pairs;
    }

    // Position order (nearest the root first) used in round r.
    std::vector<std::size_t> order_at(Round r) const
    {
        std::vector<std::size_t> order(branch_len_);
        for (std::size_t t = 0; t < branch_len_; ++t) {
            order[t] = t;
        }
        if (pattern_ == MirrorPattern::oscillating && r % 2 == 0) {
            std::reverse(order.begin(), order.end());
        }
        return order;
    }

protected:
    RoundPlan choose(const AdversaryContext& ctx, Mode) override
    {
        const auto order = order_at(ctx.round);
        std::vector<std::pair<NodeId, NodeId>> edges;
        for (std::size_t b = 0; b < branches_; ++b) {
            NodeId prev = 0;
            for (std::size_t position : order) {
                const NodeId v = 1 + b * branch_len_ + position;
                edges.emplace_back(prev, v);
                prev = v;
            }
        }
        return {InstantGraph(node_count(), edges), std::nullopt};
    }

private:
    std::size_t branch_len_;
    std::size_t branches_;
    MirrorPattern pattern_;
};

enum class ReplayTail { error, cycle };

// Replays a recorded schedule, optionally with recorded labelings.
class ReplayAdversary final : public Adversary {
public:
    ReplayAdversary(DynamicSchedule schedule, std::vector<EdgeLabeling> labels = {},
                    ReplayTail tail = ReplayTail::error)
        : schedule_(std::move(schedule)), labels_(std::move(labels)), tail_(tail)
    {
        if (schedule_.length() == 0) {
            throw ValidationError("replay needs at least one round");
        }
        if (!labels_.empty() && labels_.size() != schedule_.length()) {
            throw ValidationError("replay labelings must cover every round");
        }
        if (auto bad = validate_one_interval(schedule_); !bad.empty()) {
            throw ValidationError("replay schedule is disconnected in round " + std::to_string(bad.front()));
        }
    }

    std::string name() const override { return "replay"; }
    std::size_t node_count() const override { return schedule_.node_count(); }

protected:
    RoundPlan choose(const AdversaryContext& ctx, Mode) override
    {
        Round r = ctx.round;
        if (r > schedule_.length()) {
            if (tail_ == ReplayTail::error) {
                throw InsufficientSchedule("replay schedule has " + std::to_string(schedule_.length()) +
                                           " rounds; round " + std::to_string(r) + " requested");
            }
            r = (r - 1) % schedule_.length() + 1;
        }
        RoundPlan plan{schedule_.at_round(r), std::nullopt};
        if (!labels_.empty()) {
            plan.labels = labels_[r - 1];
        }
        return plan;
    }

private:
    DynamicSchedule schedule_;
    std::vector<EdgeLabeling> labels_;
    ReplayTail tail_;
};

// Holds every graph of the wrapped adversary for two consecutive rounds:
// rounds 2m-1 and 2m both use the inner adversary's round m.
class DuplicatingAdversary final : public Adversary {
public:
    explicit DuplicatingAdversary(std::unique_ptr<Adversary> inner) : inner_(std::move(inner)) {}

    std::string name() const override { return inner_->name() + "-duplicated"; }
    std::size_t node_count() const override { return inner_->node_count(); }
    bool inspects_states() const override { return inner_->inspects_states(); }

protected:
    RoundPlan choose(const AdversaryContext& ctx, Mode mode) override
    {
        const Round inner_round = (ctx.round + 1) / 2;
        if (!held_ || held_round_ != inner_round) {
            AdversaryContext inner_ctx = ctx;
            inner_ctx.round = inner_round;
            held_ = inner_->next_round(inner_ctx, mode).graph;
            held_round_ = inner_round;
        }
        return {*held_, std::nullopt};
    }

private:
    std::unique_ptr<Adversary> inner_;
    std::optional<InstantGraph> held_;
    Round held_round_ = 0;
};

// Strategy given as a callable; may inspect state digests.
class FunctionAdversary final : public Adversary {
public:
    using Chooser = std::function<RoundPlan(const AdversaryContext&, Mode)>;

    FunctionAdversary(std::size_t n, std::string label, Chooser chooser)
        : n_(n), name_(std::move(label)), chooser_(std::move(chooser))
    {
    }

    std::string name() const override { return name_; }
    std::size_t node_count() const override { return n_; }
    bool inspects_states() const override { return true; }

protected:
    RoundPlan choose(const AdversaryContext& ctx, Mode mode) override { return chooser_(ctx, mode); }

private:
    std::size_t n_;
    std::string name_;
    Chooser chooser_;
};

// Drives an adversary that does not inspect states for `rounds` rounds.
inline DynamicSchedule materialize(Adversary& adversary, Round rounds, std::uint64_t rng_seed = 0)
{
    DynamicSchedule s(adversary.node_count());
    const std::vector<StateDigest> digests(adversary.node_count());
    for (Round r = 1; r <= rounds; ++r) {
        AdversaryContext ctx{r, digests, rng_seed};
        s.push_back(adversary.next_round(ctx, Mode::broadcast).graph);
    }
    return s;
}

} // namespace anonet
