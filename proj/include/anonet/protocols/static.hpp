#pragma once

// Leader-based labeling and counting on static networks under broadcast, and
// the leaderless degree labeling.

#include "anonet/engine.hpp"
#include "anonet/value.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>

namespace anonet {

namespace detail {

// Distance labeling shared by LeaderEccentricity and AnonymousCounting.
// The leader floods assign(i); a node labels itself on first contact and
// acknowledges; acks climb back to the leader, which stops after hearing
// nothing new for long enough and floods halt(max_asgned). Every node then
// finishes in the same round: label i finishes at r + max_asgned - i, where
// r is the round it first handled halt.
struct EccCore {
    bool leader = false;
    std::optional<std::int64_t> label;
    std::int64_t up = 0;
    std::int64_t max_asgned = 0;  // leader only
    std::int64_t ack_high = 0;    // largest ack value already forwarded
    std::optional<std::int64_t> epsilon;
    std::optional<Round> finish_round;

    Value encode() const
    {
        return Value::tuple({Value(leader ? 1 : 0), Value(label ? *label + 1 : 0), Value(up), Value(max_asgned),
                             Value(ack_high), Value(epsilon ? *epsilon + 1 : 0),
                             Value(finish_round ? static_cast<std::int64_t>(*finish_round) : 0)});
    }

    static EccCore initial(bool is_leader)
    {
        EccCore s;
        s.leader = is_leader;
        if (is_leader) {
            s.label = 0;
        }
        return s;
    }

    void begin_halt(Round r, std::int64_t eps, Outbox& out)
    {
        epsilon = eps;
        const std::int64_t i = label.value_or(eps);
        finish_round = r + static_cast<Round>(std::max<std::int64_t>(0, eps - i));
        out.broadcast(MessageKind::halt, Value(eps));
    }

    // One phase-1 step. Returns true when the node's phase-1 finish round is r.
    bool step(const StepInput& in, Outbox& out)
    {
        const Round r = in.round;
        if (finish_round) {
            return r >= *finish_round;
        }
        std::optional<std::int64_t> halt_eps;
        in.for_each(MessageKind::halt, [&](const Value& body, const Received&) {
            halt_eps = std::max(halt_eps.value_or(0), body.as_int64());
        });
        if (halt_eps) {
            begin_halt(r, *halt_eps, out);
            return r >= *finish_round;
        }

        if (leader) {
            if (r == 1) {
                out.broadcast(MessageKind::assign, Value(1));
            }
            in.for_each(MessageKind::ack, [&](const Value& body, const Received&) {
                max_asgned = std::max(max_asgned, body.as_int64());
            });
            if (static_cast<std::int64_t>(r) > 2 * (max_asgned + 1)) {
                begin_halt(r, max_asgned, out);
                return r >= *finish_round;
            }
            return false;
        }

        if (!label) {
            std::optional<std::int64_t> lowest;
            in.for_each(MessageKind::assign, [&](const Value& body, const Received&) {
                const std::int64_t i = body.as_int64();
                lowest = lowest ? std::min(*lowest, i) : i;
            });
            if (lowest) {
                label = *lowest;
                up = static_cast<std::int64_t>(in.senders_of(MessageKind::assign));
                ack_high = *lowest;
                out.broadcast(MessageKind::assign, Value(*lowest + 1));
                out.broadcast(MessageKind::ack, Value(*lowest));
            }
            return false;
        }

        std::int64_t heard = 0;
        in.for_each(MessageKind::ack, [&](const Value& body, const Received&) {
            heard = std::max(heard, body.as_int64());
        });
        if (heard > std::max(*label, ack_high)) {
            ack_high = heard;
            out.broadcast(MessageKind::ack, Value(heard));
        }
        return false;
    }
};

} // namespace detail

class LeaderEccentricity {
public:
    using state_type = detail::EccCore;

    ProtocolInfo info() const { return {"leader-eccentricity", Mode::broadcast, true, true, OutputShape::scalar}; }

    state_type initial_state(bool is_leader) const { return state_type::initial(is_leader); }

    Action step(state_type& s, const StepInput& in) const
    {
        Action a;
        if (s.step(in, a.out)) {
            // Nodes never reached by assign report the empty tuple.
            a.halt_output = s.label ? Value(*s.label) : Value::empty_tuple();
        }
        return a;
    }

    std::optional<Value> observe(const state_type& s) const
    {
        return s.label ? std::optional<Value>(Value(*s.label)) : std::nullopt;
    }
};

// Counting by convergecast of exact partial counts over the distance levels.
class AnonymousCounting {
public:
    struct state_type {
        detail::EccCore ecc;
        // Round in which phase 2 started counting from 1; 0 while in phase 1.
        Round phase_start = 0;

        Value encode() const
        {
            return Value::tuple({ecc.encode(), Value(static_cast<std::int64_t>(phase_start))});
        }
    };

    ProtocolInfo info() const { return {"anonymous-counting", Mode::broadcast, true, true, OutputShape::scalar}; }

    state_type initial_state(bool is_leader) const { return {detail::EccCore::initial(is_leader), 0}; }

    Action step(state_type& s, const StepInput& in) const
    {
        Action a;
        if (s.phase_start == 0) {
            if (s.ecc.step(in, a.out)) {
                s.phase_start = in.round;
            }
            return a;
        }
        const auto rho = static_cast<std::int64_t>(in.round - s.phase_start);
        const std::int64_t eps = *s.ecc.epsilon;
        const std::int64_t label = s.ecc.label.value_or(eps);

        if (s.ecc.leader) {
            if (rho == eps + 1) {
                const Integer count = sum_partials(in, 1, "leader");
                a.out.broadcast(MessageKind::halt, Value(count));
                a.halt_output = Value(count);
            }
            return a;
        }
        if (rho >= eps + 2) {
            std::optional<Value> count;
            in.for_each(MessageKind::halt, [&](const Value& body, const Received&) { count = body; });
            if (count) {
                a.out.broadcast(MessageKind::halt, *count);
                a.halt_output = *count;
            }
            return a;
        }
        if (eps - rho + 1 == label) {
            if (s.ecc.up == 0) {
                throw ProtocolError("labeled node with no upper-level neighbors");
            }
            Rational total(1);
            in.for_each(MessageKind::partial_count,
                        [&](const Value& body, const Received&) { total += as_rational(body); });
            a.out.broadcast(MessageKind::partial_count, rational_value(total / s.ecc.up));
        }
        return a;
    }

    std::optional<Value> observe(const state_type&) const { return std::nullopt; }

private:
    static Integer sum_partials(const StepInput& in, std::int64_t base, const char* who)
    {
        Rational total(base);
        in.for_each(MessageKind::partial_count, [&](const Value& body, const Received&) { total += as_rational(body); });
        if (boost::multiprecision::denominator(total) != 1) {
            throw ProtocolError(std::string("non-integral count at the ") + who);
        }
        return boost::multiprecision::numerator(total);
    }
};

// Leaderless: every node announces itself once and outputs the number of
// announcements it heard, i.e. its degree.
class DegreeKLabeling {
public:
    struct state_type {
        std::int64_t heard = -1;

        Value encode() const { return Value(heard + 1); }
    };

    ProtocolInfo info() const { return {"degree-klabeling", Mode::broadcast, false, true, OutputShape::scalar}; }

    state_type initial_state(bool) const { return {}; }

    Action step(state_type& s, const StepInput& in) const
    {
        Action a;
        if (in.round == 1) {
            a.out.broadcast(MessageKind::hello, Value::empty_tuple());
        } else {
            s.heard = static_cast<std::int64_t>(in.inbox.size());
            a.halt_output = Value(s.heard);
        }
        return a;
    }

    std::optional<Value> observe(const state_type& s) const
    {
        return s.heard < 0 ? std::nullopt : std::optional<Value>(Value(s.heard));
    }
};

} // namespace anonet
