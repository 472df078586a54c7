#pragma once

// Causal order over (node, round) pairs: (u,r) -> (v,r+1) iff u == v or
// {u,v} in E(r+1), closed reflexively and transitively. Round 0 carries no
// edges, so initial states influence others only through E(1) onward.

#include "anonet/error.hpp"
#include "anonet/graph.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace anonet {

namespace detail {

inline void require_horizon(const DynamicSchedule& s, Round horizon)
{
    if (horizon > s.length()) {
        throw InsufficientSchedule("horizon " + std::to_string(horizon) + " exceeds schedule length " +
                                   std::to_string(s.length()));
    }
}

// For a fixed start round, tracks for every target v the set of sources u
// with (u,start) ~> (v,current). Sets are packed bit rows.
class InfluenceSweep {
public:
    InfluenceSweep(const DynamicSchedule& s, Round start)
        : schedule_(&s), n_(s.node_count()), words_((n_ + 63) / 64), current_(start), rows_(n_ * words_, 0)
    {
        for (NodeId v = 0; v < n_; ++v) {
            set_bit(rows_, v, v);
        }
    }

    Round current() const noexcept { return current_; }
    std::size_t words() const noexcept { return words_; }
    const std::vector<std::uint64_t>& rows() const noexcept { return rows_; }

    void advance()
    {
        const InstantGraph& g = schedule_->at_round(current_ + 1);
        std::vector<std::uint64_t> next = rows_;
        for (const Edge& e : g.edges()) {
            for (std::size_t w = 0; w < words_; ++w) {
                next[e.u * words_ + w] |= rows_[e.v * words_ + w];
                next[e.v * words_ + w] |= rows_[e.u * words_ + w];
            }
        }
        rows_ = std::move(next);
        ++current_;
    }

    bool reaches(NodeId source, NodeId target) const { return test_bit(rows_, target, source); }

    std::size_t past_size(NodeId target) const
    {
        std::size_t count = 0;
        for (std::size_t w = 0; w < words_; ++w) {
            count += static_cast<std::size_t>(std::popcount(rows_[target * words_ + w]));
        }
        return count;
    }

    std::size_t future_size(NodeId source) const
    {
        std::size_t count = 0;
        for (NodeId v = 0; v < n_; ++v) {
            count += reaches(source, v) ? 1 : 0;
        }
        return count;
    }

private:
    void set_bit(std::vector<std::uint64_t>& rows, NodeId row, NodeId bit) const
    {
        rows[row * words_ + bit / 64] |= std::uint64_t{1} << (bit % 64);
    }
    bool test_bit(const std::vector<std::uint64_t>& rows, NodeId row, NodeId bit) const
    {
        return (rows[row * words_ + bit / 64] >> (bit % 64)) & 1U;
    }

    const DynamicSchedule* schedule_;
    std::size_t n_;
    std::size_t words_;
    Round current_;
    std::vector<std::uint64_t> rows_;
};

} // namespace detail

// The causal order materialized for all pairs of rounds 0 <= r <= r' <= horizon.
class CausalReachability {
public:
    CausalReachability(std::size_t n, Round horizon)
        : n_(n), horizon_(horizon), words_((n + 63) / 64),
          bits_(block_count(horizon) * n * words_, 0)
    {
    }

    std::size_t node_count() const noexcept { return n_; }
    Round horizon() const noexcept { return horizon_; }

    bool reaches(NodeId u, Round r, NodeId v, Round r_prime) const
    {
        check(u, r, r_prime);
        check_node(v);
        const std::size_t base = block_offset(r, r_prime) + v * words_;
        return (bits_[base + u / 64] >> (u % 64)) & 1U;
    }

    void store(Round r, Round r_prime, const std::vector<std::uint64_t>& rows)
    {
        std::copy(rows.begin(), rows.end(), bits_.begin() + static_cast<std::ptrdiff_t>(block_offset(r, r_prime)));
    }

private:
    static std::size_t block_count(Round horizon) { return (horizon + 1) * (horizon + 2) / 2; }

    std::size_t block_offset(Round r, Round r_prime) const
    {
        // Blocks are laid out by start round r, then by r' = r..horizon.
        const std::size_t before = r * (horizon_ + 1) - (r * (r - 1)) / 2;
        return (before + (r_prime - r)) * n_ * words_;
    }

    void check_node(NodeId u) const
    {
        if (u >= n_) {
            throw RangeError("node " + std::to_string(u) + " outside 0.." + std::to_string(n_ - 1));
        }
    }

    void check(NodeId u, Round r, Round r_prime) const
    {
        check_node(u);
        if (r > r_prime || r_prime > horizon_) {
            throw RangeError("rounds (" + std::to_string(r) + ", " + std::to_string(r_prime) +
                             ") outside 0 <= r <= r' <= " + std::to_string(horizon_));
        }
    }

    std::size_t n_;
    Round horizon_;
    std::size_t words_;
    std::vector<std::uint64_t> bits_;
};

inline CausalReachability causal_closure(const DynamicSchedule& s, Round horizon)
{
    detail::require_horizon(s, horizon);
    CausalReachability closure(s.node_count(), horizon);
    for (Round start = 0; start <= horizon; ++start) {
        detail::InfluenceSweep sweep(s, start);
        closure.store(start, start, sweep.rows());
        while (sweep.current() < horizon) {
            sweep.advance();
            closure.store(start, sweep.current(), sweep.rows());
        }
    }
    return closure;
}

// {v : (u,r) ~> (v,r')}, ascending.
inline std::vector<NodeId> future_set(const CausalReachability& c, NodeId u, Round r, Round r_prime)
{
    std::vector<NodeId> out;
    for (NodeId v = 0; v < c.node_count(); ++v) {
        if (c.reaches(u, r, v, r_prime)) {
            out.push_back(v);
        }
    }
    return out;
}

// Both directions of the influence bound from round 0: every node's 0-state
// reaches at least min(r+1, n) nodes by round r, and every node is reached by
// at least that many 0-states.
inline bool check_influence_lemma(const DynamicSchedule& s, Round horizon)
{
    detail::require_horizon(s, horizon);
    require_one_interval(s, horizon);
    const std::size_t n = s.node_count();
    detail::InfluenceSweep sweep(s, 0);
    for (;;) {
        const std::size_t bound = std::min<std::size_t>(sweep.current() + 1, n);
        for (NodeId u = 0; u < n; ++u) {
            if (sweep.future_size(u) < bound || sweep.past_size(u) < bound) {
                return false;
            }
        }
        if (sweep.current() == horizon) {
            return true;
        }
        sweep.advance();
    }
}

// Largest one-round growth of any future set within the horizon.
inline std::size_t max_expansion(const DynamicSchedule& s, Round horizon)
{
    detail::require_horizon(s, horizon);
    const std::size_t n = s.node_count();
    std::size_t best = 0;
    for (Round start = 0; start < horizon; ++start) {
        detail::InfluenceSweep sweep(s, start);
        std::vector<std::size_t> sizes(n, 1);
        while (sweep.current() < horizon) {
            sweep.advance();
            for (NodeId u = 0; u < n; ++u) {
                const std::size_t size = sweep.future_size(u);
                best = std::max(best, size - sizes[u]);
                sizes[u] = size;
            }
        }
    }
    return best;
}

// arrival_(u,r)(v) = min{r' > r : (u,r) ~> (v,r')} for every v, computed up to
// the horizon; nullopt where v is not reached by then. The entry for u itself
// is its first later round, r + 1.
inline std::vector<std::optional<Round>> arrival_times(const DynamicSchedule& s, NodeId u, Round r, Round horizon)
{
    detail::require_horizon(s, horizon);
    if (u >= s.node_count()) {
        throw RangeError("node " + std::to_string(u) + " outside schedule");
    }
    if (r > horizon) {
        throw RangeError("start round " + std::to_string(r) + " beyond horizon " + std::to_string(horizon));
    }
    const std::size_t n = s.node_count();
    std::vector<std::optional<Round>> arrival(n);
    std::vector<char> reached(n, 0);
    reached[u] = 1;
    if (r < horizon) {
        arrival[u] = r + 1;
    }
    std::size_t missing = n - 1;
    for (Round t = r + 1; t <= horizon && missing > 0; ++t) {
        std::vector<char> next = reached;
        for (const Edge& e : s.at_round(t).edges()) {
            if (reached[e.u]) {
                next[e.v] = 1;
            }
            if (reached[e.v]) {
                next[e.u] = 1;
            }
        }
        for (NodeId v = 0; v < n; ++v) {
            if (next[v] && !reached[v]) {
                arrival[v] = t;
                --missing;
            }
        }
        reached = std::move(next);
    }
    return arrival;
}

} // namespace anonet
