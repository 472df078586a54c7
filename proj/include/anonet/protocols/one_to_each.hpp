#pragma once

// Naming with a leader under one-to-each transmission: Fair and Delegate
// (stabilizing), Dynamic_Naming (terminating), and the renaming of unique ids
// to 0..n-1.

#include "anonet/engine.hpp"
#include "anonet/value.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace anonet {

namespace detail {

// Fair and Delegate differ only in who assigns: the leader alone, or every
// named node. Ids are (clock, assigner id, counter + i) with the leader's own
// id (0, 1, 1).
class TupleNaming {
public:
    struct state_type {
        std::int64_t clock = 0;
        std::optional<Value> id;
        bool leader = false;
        std::int64_t counter = 0;

        Value encode() const
        {
            return Value::tuple({Value(clock), id ? Value::tuple({*id}) : Value::empty_tuple(),
                                 Value(leader ? 1 : 0), Value(counter)});
        }
    };

    explicit TupleNaming(bool delegate) : delegate_(delegate) {}

    ProtocolInfo info() const
    {
        return {delegate_ ? "delegate" : "fair", Mode::one_to_each, true, false, OutputShape::scalar};
    }

    state_type initial_state(bool is_leader) const
    {
        state_type s;
        if (is_leader) {
            s.leader = true;
            s.id = root();
            s.counter = 1;
        }
        return s;
    }

    static Value root() { return Value::tuple({Value(0), Value(1), Value(1)}); }

    Action step(state_type& s, const StepInput& in) const
    {
        Action a;
        if (!s.id) {
            std::optional<Value> lowest;
            in.for_each(MessageKind::assign, [&](const Value& body, const Received&) {
                if (!lowest || body < *lowest) {
                    lowest = body;
                }
            });
            s.id = lowest;
        }
        if (s.id && (s.leader || delegate_)) {
            const std::size_t d = in.channels();
            for (std::size_t i = 1; i <= d; ++i) {
                a.out.send(i, MessageKind::assign,
                           Value::tuple({Value(s.clock), *s.id, Value(s.counter + static_cast<std::int64_t>(i))}));
            }
            s.counter += static_cast<std::int64_t>(d);
        }
        ++s.clock;
        return a;
    }

    std::optional<Value> observe(const state_type& s) const { return s.id; }

private:
    bool delegate_;
};

} // namespace detail

class Fair : public detail::TupleNaming {
public:
    Fair() : TupleNaming(false) {}
};

class Delegate : public detail::TupleNaming {
public:
    Delegate() : TupleNaming(true) {}
};

// Terminating naming. Named nodes keep assigning (id, count + i) on every
// label; nodes flood the set of ids they know and unnamed nodes announce the
// round; the leader stops once it learned no new id and no unnamed evidence
// for |known_ids| rounds. Outputs (id, n).
class DynamicNaming {
public:
    struct state_type {
        bool leader = false;
        std::optional<Value> id;
        std::int64_t count = 0;
        std::set<Value> acks;
        std::int64_t latest_unassigned = 0;
        // Leader only.
        std::int64_t latest_new = 0;
        std::int64_t time_bound = 1;
        std::set<Value> known_ids;
        // Halting.
        std::optional<std::int64_t> n;
        std::int64_t halt_left = 0;

        Value encode() const
        {
            return Value::tuple({Value(leader ? 1 : 0), id ? Value::tuple({*id}) : Value::empty_tuple(),
                                 Value(count), Value::set({acks.begin(), acks.end()}), Value(latest_unassigned),
                                 Value(latest_new), Value(time_bound), Value::set({known_ids.begin(), known_ids.end()}),
                                 Value(n ? *n + 1 : 0), Value(halt_left)});
        }
    };

    ProtocolInfo info() const { return {"dynamic-naming", Mode::one_to_each, true, true, OutputShape::id_and_count}; }

    state_type initial_state(bool is_leader) const
    {
        state_type s;
        if (is_leader) {
            s.leader = true;
            s.id = Value(0);
            s.known_ids.insert(Value(0));
        }
        return s;
    }

    Action step(state_type& s, const StepInput& in) const
    {
        Action a;
        const auto r = static_cast<std::int64_t>(in.round);
        if (s.n) {
            return relay(s, std::move(a));
        }
        if (!s.leader) {
            std::optional<std::int64_t> heard;
            in.for_each(MessageKind::halt, [&](const Value& body, const Received&) { heard = body.as_int64(); });
            if (heard) {
                s.n = *heard;
                s.halt_left = std::max<std::int64_t>(0, *heard - 2);
                return relay(s, std::move(a));
            }
        }

        std::set<Value> incoming;
        in.for_each(MessageKind::ack, [&](const Value& body, const Received&) {
            incoming.insert(body.items().begin(), body.items().end());
        });
        std::int64_t unassigned = 0;
        in.for_each(MessageKind::unassigned,
                    [&](const Value& body, const Received&) { unassigned = std::max(unassigned, body.as_int64()); });

        if (s.leader) {
            if (r == 1) {
                for (std::size_t i = 1; i <= in.channels(); ++i) {
                    s.known_ids.insert(Value::tuple({*s.id, Value(static_cast<std::int64_t>(i))}));
                }
                // The first ids are taken in round 2, when the assignments are processed.
                s.latest_new = 2;
                s.time_bound = 2 + static_cast<std::int64_t>(s.known_ids.size());
            }
            const std::size_t before = s.known_ids.size();
            s.known_ids.insert(incoming.begin(), incoming.end());
            if (s.known_ids.size() != before) {
                s.latest_new = r;
                s.time_bound = r + static_cast<std::int64_t>(s.known_ids.size());
            }
            s.latest_unassigned = std::max(s.latest_unassigned, unassigned);
            if (r > s.time_bound && s.latest_unassigned < s.latest_new) {
                s.n = static_cast<std::int64_t>(s.known_ids.size());
                s.halt_left = *s.n - 1;
                return relay(s, std::move(a));
            }
        } else {
            if (!s.id) {
                std::optional<Value> best;
                std::size_t best_bits = 0;
                in.for_each(MessageKind::assign, [&](const Value& body, const Received&) {
                    const std::size_t bits = bit_cost(body);
                    if (!best || bits < best_bits || (bits == best_bits && body < *best)) {
                        best = body;
                        best_bits = bits;
                    }
                });
                if (best) {
                    s.id = best;
                    s.acks.insert(*best);
                }
            }
            s.acks.insert(incoming.begin(), incoming.end());
            if (!s.acks.empty()) {
                a.out.broadcast(MessageKind::ack, Value::set({s.acks.begin(), s.acks.end()}));
            }
            if (!s.id) {
                a.out.broadcast(MessageKind::unassigned, Value(r));
            } else {
                s.latest_unassigned = std::max(s.latest_unassigned, unassigned);
                if (s.latest_unassigned > 0) {
                    a.out.broadcast(MessageKind::unassigned, Value(s.latest_unassigned));
                }
            }
        }

        if (s.id) {
            const std::size_t k = in.channels();
            for (std::size_t i = 1; i <= k; ++i) {
                a.out.send(i, MessageKind::assign,
                           Value::tuple({*s.id, Value(s.count + static_cast<std::int64_t>(i))}));
            }
            s.count += static_cast<std::int64_t>(k);
        }
        return a;
    }

    std::optional<Value> observe(const state_type& s) const { return s.id; }

private:
    static Action relay(state_type& s, Action a)
    {
        if (s.halt_left > 0) {
            a.out.broadcast(MessageKind::halt, Value(*s.n));
            --s.halt_left;
        }
        if (s.halt_left == 0) {
            a.halt_output = Value::tuple({s.id ? *s.id : Value::empty_tuple(), Value(*s.n)});
        }
        return a;
    }
};

// Replaces unique ids by their rank 0..n-1 under the id order (the leader's
// integer id 0 sorts first). Accepts plain ids or (id, n) outputs.
inline std::vector<std::int64_t> minimal_renaming(const std::vector<Value>& ids)
{
    std::vector<Value> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw ValidationError("renaming needs unique ids");
    }
    std::vector<std::int64_t> out;
    out.reserve(ids.size());
    for (const Value& v : ids) {
        out.push_back(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
    }
    return out;
}

} // namespace anonet
