#pragma once

// Broadcast protocols for dynamic networks that need extra knowledge: a degree
// bound, an expansion bound, or a high-dynamicity schedule.

#include "anonet/causal.hpp"
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

// Label-wave counting. The leader assigns label r in every round r, labeled
// nodes keep assigning and announce their label, unlabeled nodes announce the
// rounds in which they were still unlabeled, and everyone floods the largest
// announcements heard. The leader turns the largest label index L it has
// evidence for into an upper bound via Growth and stops once no new evidence
// arrived for `count` rounds.
template <class Growth>
class WaveCounting {
public:
    struct state_type {
        bool leader = false;
        std::optional<std::int64_t> label;
        Integer count = 0;
        std::int64_t latest_event = 0;
        std::int64_t max_label = 0;
        std::int64_t heard_label = 0;
        std::int64_t heard_unassigned = 0;
        // Rounds of halt(count) broadcasting still owed, once halting.
        std::optional<Integer> halt_left;

        Value encode() const
        {
            return Value::tuple({Value(leader ? 1 : 0), Value(label ? *label + 1 : 0), Value(count),
                                 Value(latest_event), Value(max_label), Value(heard_label), Value(heard_unassigned),
                                 halt_left ? Value::tuple({Value(*halt_left)}) : Value::empty_tuple()});
        }
    };

    WaveCounting(std::string name, Growth growth, ProtocolInfo extra = {})
        : name_(std::move(name)), growth_(growth), extra_(std::move(extra))
    {
    }

    ProtocolInfo info() const
    {
        ProtocolInfo i = extra_;
        i.name = name_;
        i.native_mode = Mode::broadcast;
        i.uses_leader = true;
        i.terminating = true;
        i.output_shape = OutputShape::scalar;
        return i;
    }

    state_type initial_state(bool is_leader) const
    {
        state_type s;
        s.leader = is_leader;
        if (is_leader) {
            s.label = 0;
            s.count = 1;
        }
        return s;
    }

    Action step(state_type& s, const StepInput& in) const
    {
        Action a;
        const auto r = static_cast<std::int64_t>(in.round);
        if (!s.halt_left) {
            std::optional<Integer> heard_halt;
            in.for_each(MessageKind::halt, [&](const Value& body, const Received&) {
                const Integer c = body.as_integer();
                heard_halt = heard_halt ? std::max(*heard_halt, c) : c;
            });
            if (heard_halt) {
                s.count = *heard_halt;
                s.halt_left = s.count;
            }
        }
        if (s.halt_left) {
            a.out.broadcast(MessageKind::halt, Value(s.count));
            *s.halt_left -= 1;
            if (*s.halt_left <= 0) {
                a.halt_output = Value(s.count);
            }
            return a;
        }

        std::int64_t got_label = 0;
        std::int64_t got_unassigned = 0;
        in.for_each(MessageKind::my_label, [&](const Value& body, const Received&) {
            got_label = std::max(got_label, body.as_int64());
        });
        in.for_each(MessageKind::unassigned, [&](const Value& body, const Received&) {
            got_unassigned = std::max(got_unassigned, body.as_int64());
        });

        if (s.leader) {
            std::int64_t level = 0;
            if (got_unassigned > s.latest_event) {
                level = std::max(level, got_unassigned);
            }
            if (got_label > s.max_label) {
                level = std::max(level, got_label);
            }
            if (level > 0) {
                s.count = growth_(level);
                s.max_label = level;
                s.latest_event = r;
            }
        } else if (!s.label) {
            std::optional<std::int64_t> assigned;
            in.for_each(MessageKind::assign, [&](const Value& body, const Received&) {
                const std::int64_t v = body.as_int64();
                assigned = assigned ? std::min(*assigned, v) : v;
            });
            if (assigned) {
                s.label = *assigned;
            }
        }

        s.heard_label = std::max(s.heard_label, got_label);
        s.heard_unassigned = std::max(s.heard_unassigned, got_unassigned);

        if (s.label) {
            a.out.broadcast(MessageKind::assign, Value(r));
            if (!s.leader) {
                a.out.broadcast(MessageKind::my_label, Value(*s.label));
            }
        } else {
            a.out.broadcast(MessageKind::unassigned, Value(r));
        }
        if (s.heard_label > 0) {
            a.out.broadcast(MessageKind::my_label, Value(s.heard_label));
        }
        if (s.heard_unassigned > 0) {
            a.out.broadcast(MessageKind::unassigned, Value(s.heard_unassigned));
        }

        // Nothing can arrive in round 1, so the first decision is in round 2.
        if (s.leader && r >= 2 && Integer(r) > s.count + s.latest_event - 1) {
            s.halt_left = s.count;
            a.out = Outbox{};
            a.out.broadcast(MessageKind::halt, Value(s.count));
            *s.halt_left -= 1;
            if (*s.halt_left <= 0) {
                a.halt_output = Value(s.count);
            }
        }
        return a;
    }

    std::optional<Value> observe(const state_type&) const { return std::nullopt; }

private:
    std::string name_;
    Growth growth_;
    ProtocolInfo extra_;
};

struct DegreeGrowth {
    std::int64_t d;
    // (1 + d)^level, the repeated count <- count + d * count.
    Integer operator()(std::int64_t level) const
    {
        Integer c = 1;
        for (std::int64_t k = 0; k < level; ++k) {
            c += d * c;
        }
        return c;
    }
};

struct ExpansionGrowth {
    std::int64_t e;
    Integer operator()(std::int64_t level) const { return Integer(1) + Integer(e) * level; }
};

} // namespace detail

// Upper bound (1 + d)^L on n from the deepest label wave L, given a bound d on
// every node's degree in every round.
class DegreeCounting : public detail::WaveCounting<detail::DegreeGrowth> {
public:
    explicit DegreeCounting(std::int64_t d) : WaveCounting("degree-counting", detail::DegreeGrowth{check(d)}, extra(d))
    {
    }

    std::int64_t d() const { return info().degree_bound.value_or(0); }

private:
    static std::int64_t check(std::int64_t d)
    {
        if (d < 1) {
            throw ValidationError("degree bound must be at least 1");
        }
        return d;
    }
    static ProtocolInfo extra(std::int64_t d)
    {
        ProtocolInfo i;
        i.degree_bound = static_cast<std::size_t>(d);
        return i;
    }
};

// Additive variant: count = 1 + e * L, given a bound e on the maximum expansion.
class ExpansionCounting : public detail::WaveCounting<detail::ExpansionGrowth> {
public:
    explicit ExpansionCounting(std::int64_t e)
        : WaveCounting("expansion-counting", detail::ExpansionGrowth{check(e)}, extra(e))
    {
    }

private:
    static std::int64_t check(std::int64_t e)
    {
        if (e < 1) {
            throw ValidationError("expansion bound must be at least 1");
        }
        return e;
    }
    static ProtocolInfo extra(std::int64_t e)
    {
        ProtocolInfo i;
        i.expansion_bound = static_cast<std::size_t>(e);
        return i;
    }
};

// ---------------------------------------------------------------------------

// Naming under broadcast on schedules where every graph persists for two
// rounds (an odd round and the following even round) and arrival vectors of
// the leader's states eventually separate all nodes.
//
// The leader runs cycles c = 1, 2, ...:
//   go(c)    id holders acknowledge and assign c in every odd round;
//   stop(c)  issued two rounds after all acknowledgements are in, so some odd
//            round had every holder assigning at once;
//   a node newly reached by assign(c) answers with the number l of assigners
//            it heard, each of them adds 1/l, and holders report their sums;
//   the sum of the reports is j, the number of nodes named c. For j >= 2
//            those nodes report the arrival rounds of the leader's timestamps
//            from the stop round on, and the leader waits for j distinct
//            vectors reported in a common round T. The next go carries
//            (c, T) and every c-node takes id (c, its vector at T).
// A cycle with j = 0 means everyone holds an id: the leader floods halt(n).
// If a vector phase lasts longer than k_cap rounds the leader gives up and the
// run does not converge.
class HighDynamicityNaming {
public:
    enum class Command : std::int64_t { go = 0, stop = 1 };

    struct Control {
        std::int64_t seq = 0;
        Command command = Command::go;
        std::int64_t cycle = 0;
        // stop: this cycle's stop round.
        std::int64_t stop_round = 0;
        // go: naming of the previous cycle's nodes (vector start, report round).
        std::int64_t name_cycle = 0;
        std::int64_t name_from = 0;
        std::int64_t name_round = 0;

        Value value() const
        {
            return Value::tuple({Value(seq), Value(static_cast<std::int64_t>(command)), Value(cycle),
                                 Value(stop_round), Value(name_cycle), Value(name_from), Value(name_round)});
        }
        static Control from(const Value& v)
        {
            if (!v.is_tuple() || v.size() != 7) {
                throw ProtocolError("malformed control record " + v.to_string());
            }
            Control c;
            c.seq = v[0].as_int64();
            c.command = static_cast<Command>(v[1].as_int64());
            c.cycle = v[2].as_int64();
            c.stop_round = v[3].as_int64();
            c.name_cycle = v[4].as_int64();
            c.name_from = v[5].as_int64();
            c.name_round = v[6].as_int64();
            return c;
        }
    };

    struct state_type {
        bool leader = false;
        std::optional<Value> id;
        // Cycle whose assign reached this node while it had no id.
        std::int64_t tentative_cycle = 0;
        std::optional<std::int64_t> pending_tally;
        std::int64_t probe_max = 0;
        // arrival[t - 1] is the round in which leader timestamp t first arrived.
        std::vector<std::int64_t> arrival;
        std::optional<Control> control;
        // Flooded records (type, cycle, ...) of the current cycle.
        std::set<Value> facts;

        // Holder bookkeeping.
        std::int64_t acked_cycle = 0;
        std::int64_t last_assign = 0;
        Rational count = 0;
        std::int64_t reported_cycle = 0;

        // Leader only.
        std::vector<Value> holders;
        std::int64_t stage = 0;
        std::int64_t acked_round = 0;
        std::int64_t phase_start = 0;
        std::int64_t expected = 0;
        bool failed = false;

        std::optional<std::int64_t> n;
        std::int64_t halt_left = 0;

        Value encode() const
        {
            std::vector<Value> arr(arrival.begin(), arrival.end());
            std::vector<Value> f(facts.begin(), facts.end());
            return Value::tuple(
                {Value(leader ? 1 : 0), id ? Value::tuple({*id}) : Value::empty_tuple(), Value(tentative_cycle),
                 Value(pending_tally ? *pending_tally + 1 : 0), Value(probe_max), Value::tuple(std::move(arr)),
                 control ? control->value() : Value::empty_tuple(), Value::tuple(std::move(f)), Value(acked_cycle),
                 Value(last_assign), rational_value(count), Value(reported_cycle), Value::tuple(holders),
                 Value(stage), Value(acked_round), Value(phase_start), Value(expected), Value(failed ? 1 : 0),
                 Value(n ? *n + 1 : 0), Value(halt_left)});
        }
    };

    explicit HighDynamicityNaming(std::int64_t k_cap = 64) : k_cap_(k_cap)
    {
        if (k_cap < 1) {
            throw ValidationError("k_cap must be at least 1");
        }
    }

    std::int64_t k_cap() const { return k_cap_; }

    ProtocolInfo info() const
    {
        ProtocolInfo i{"hd-naming", Mode::broadcast, true, true, OutputShape::id_and_count};
        return i;
    }

    state_type initial_state(bool is_leader) const
    {
        state_type s;
        s.leader = is_leader;
        if (is_leader) {
            s.id = Value::tuple({Value(0), Value::empty_tuple()});
            s.holders.push_back(*s.id);
        }
        return s;
    }

    Action step(state_type& s, const StepInput& in) const
    {
        Action a;
        const auto r = static_cast<std::int64_t>(in.round);
        if (s.n) {
            return relay_halt(s, std::move(a));
        }
        std::optional<std::int64_t> heard_n;
        in.for_each(MessageKind::halt, [&](const Value& body, const Received&) { heard_n = body.as_int64(); });
        if (heard_n) {
            s.n = *heard_n;
            s.halt_left = std::max<std::int64_t>(0, *heard_n - 2);
            return relay_halt(s, std::move(a));
        }

        absorb(s, in, r);
        if (s.leader) {
            lead(s, r);
            if (s.n) {
                s.halt_left = *s.n - 1;
                return relay_halt(s, std::move(a));
            }
        }
        follow(s, r);

        if (s.id && s.control && s.control->command == Command::go && s.acked_cycle == s.control->cycle &&
            r % 2 == 1) {
            a.out.broadcast(MessageKind::assign, Value(s.control->cycle));
            s.last_assign = r;
        }
        if (s.pending_tally) {
            a.out.broadcast(MessageKind::tally, Value(*s.pending_tally));
            s.pending_tally.reset();
        }
        a.out.broadcast(MessageKind::arrival_probe, Value(s.leader ? r : s.probe_max));
        if (s.control) {
            a.out.broadcast(s.control->command == Command::go ? MessageKind::unfreeze : MessageKind::freeze,
                            s.control->value());
        }
        const std::pair<std::int64_t, MessageKind> kinds[] = {{fact_ack, MessageKind::my_label},
                                                              {fact_count, MessageKind::count_report},
                                                              {fact_vector, MessageKind::vector_report}};
        for (const auto& [type, kind] : kinds) {
            std::vector<Value> part;
            for (const Value& f : s.facts) {
                if (f[0].as_int64() == type) {
                    part.push_back(f);
                }
            }
            if (!part.empty()) {
                a.out.broadcast(kind, Value::set(std::move(part)));
            }
        }
        return a;
    }

    std::optional<Value> observe(const state_type& s) const { return s.id; }

private:
    static constexpr std::int64_t fact_ack = 0;
    static constexpr std::int64_t fact_count = 1;
    static constexpr std::int64_t fact_vector = 2;

    static Action relay_halt(state_type& s, Action a)
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

    static void absorb(state_type& s, const StepInput& in, std::int64_t r)
    {
        std::int64_t probe = s.probe_max;
        in.for_each(MessageKind::arrival_probe,
                    [&](const Value& body, const Received&) { probe = std::max(probe, body.as_int64()); });
        while (static_cast<std::int64_t>(s.arrival.size()) < probe) {
            s.arrival.push_back(r);
        }
        s.probe_max = probe;

        for (MessageKind k : {MessageKind::unfreeze, MessageKind::freeze}) {
            in.for_each(k, [&](const Value& body, const Received&) {
                const Control c = Control::from(body);
                if (!s.control || c.seq > s.control->seq) {
                    s.control = c;
                }
            });
        }
        for (MessageKind k : {MessageKind::my_label, MessageKind::count_report, MessageKind::vector_report}) {
            in.for_each(k, [&](const Value& body, const Received&) {
                for (const Value& f : body.items()) {
                    s.facts.insert(f);
                }
            });
        }
        const std::int64_t cycle = s.control ? s.control->cycle : 0;
        std::erase_if(s.facts, [&](const Value& f) { return f[1].as_int64() < cycle; });
        prune_vectors(s);

        if (s.id && s.last_assign == r - 2) {
            in.for_each(MessageKind::tally, [&](const Value& body, const Received&) {
                s.count += Rational(1, body.as_int64());
            });
        }

        if (!s.id && s.tentative_cycle == 0) {
            std::optional<std::int64_t> c;
            in.for_each(MessageKind::assign, [&](const Value& body, const Received&) { c = body.as_int64(); });
            if (c) {
                s.tentative_cycle = *c;
                s.pending_tally = static_cast<std::int64_t>(in.senders_of(MessageKind::assign));
            }
        }
    }

    static bool has_fact(const state_type& s, std::int64_t type, std::int64_t cycle, const Value& id)
    {
        auto it = s.facts.lower_bound(Value::tuple({Value(type), Value(cycle), id}));
        return it != s.facts.end() && (*it)[0].as_int64() == type && (*it)[1].as_int64() == cycle && (*it)[2] == id;
    }

    void issue(state_type& s, Control c) const
    {
        c.seq = s.control ? s.control->seq + 1 : 1;
        s.control = c;
    }

    void start_cycle(state_type& s, std::int64_t cycle, std::int64_t name_cycle, std::int64_t name_from,
                     std::int64_t name_round) const
    {
        Control c;
        c.command = Command::go;
        c.cycle = cycle;
        c.name_cycle = name_cycle;
        c.name_from = name_from;
        c.name_round = name_round;
        issue(s, c);
        s.stage = 0;
        s.acked_round = 0;
    }

    void lead(state_type& s, std::int64_t r) const
    {
        if (s.failed) {
            return;
        }
        if (!s.control) {
            start_cycle(s, 1, 0, 0, 0);
            return;
        }
        const Control c = *s.control;
        switch (s.stage) {
        case 0: {
            if (s.acked_round == 0 &&
                std::all_of(s.holders.begin(), s.holders.end(),
                            [&](const Value& h) { return has_fact(s, fact_ack, c.cycle, h); })) {
                s.acked_round = r;
            }
            if (s.acked_round != 0 && r >= s.acked_round + 2) {
                Control stop;
                stop.command = Command::stop;
                stop.cycle = c.cycle;
                stop.stop_round = r;
                issue(s, stop);
                s.stage = 1;
            }
            break;
        }
        case 1: {
            Rational j = 0;
            for (const Value& h : s.holders) {
                auto it = s.facts.lower_bound(Value::tuple({Value(fact_count), Value(c.cycle), h}));
                if (it == s.facts.end() || (*it)[0].as_int64() != fact_count || (*it)[1].as_int64() != c.cycle ||
                    (*it)[2] != h) {
                    return;
                }
                j += as_rational((*it)[3]);
            }
            if (boost::multiprecision::denominator(j) != 1) {
                throw ProtocolError("assignment counts summed to a non-integer " + j.str());
            }
            const auto assigned = static_cast<std::int64_t>(boost::multiprecision::numerator(j));
            if (assigned == 0) {
                s.n = static_cast<std::int64_t>(s.holders.size());
            } else if (assigned == 1) {
                s.holders.push_back(Value::tuple({Value(c.cycle), Value::empty_tuple()}));
                start_cycle(s, c.cycle + 1, c.cycle, c.stop_round, 0);
            } else {
                s.stage = 2;
                s.expected = assigned;
                s.phase_start = r;
            }
            break;
        }
        case 2: {
            std::vector<Value> reports;
            std::int64_t latest = 0;
            for (const Value& f : s.facts) {
                if (f[0].as_int64() == fact_vector && f[1].as_int64() == c.cycle) {
                    reports.push_back(f);
                    latest = std::max(latest, f[2].as_int64());
                }
            }
            for (std::int64_t t = c.stop_round; t <= latest; ++t) {
                // Every report from round t on yields its node's vector at t.
                std::set<Value> vectors;
                for (const Value& f : reports) {
                    if (f[2].as_int64() >= t) {
                        vectors.insert(prefix_at(f[3], t));
                    }
                }
                if (static_cast<std::int64_t>(vectors.size()) == s.expected) {
                    for (const Value& v : vectors) {
                        s.holders.push_back(Value::tuple({Value(c.cycle), v}));
                    }
                    std::sort(s.holders.begin(), s.holders.end());
                    start_cycle(s, c.cycle + 1, c.cycle, c.stop_round, t);
                    return;
                }
            }
            if (r - s.phase_start > k_cap_) {
                s.failed = true;
            }
            break;
        }
        default: break;
        }
    }

    static void follow(state_type& s, std::int64_t r)
    {
        if (!s.control) {
            return;
        }
        const Control& c = *s.control;
        if (!s.id && s.tentative_cycle != 0 && c.command == Command::go && c.name_cycle == s.tentative_cycle) {
            s.id = Value::tuple({Value(s.tentative_cycle), vector_at(s, c.name_from, c.name_round)});
        }
        if (s.id && c.command == Command::go && s.acked_cycle < c.cycle) {
            s.acked_cycle = c.cycle;
            s.count = 0;
            s.facts.insert(Value::tuple({Value(fact_ack), Value(c.cycle), *s.id}));
        }
        if (s.id && c.command == Command::stop && s.acked_cycle == c.cycle && s.reported_cycle < c.cycle &&
            r >= s.last_assign + 2) {
            s.reported_cycle = c.cycle;
            s.facts.insert(Value::tuple({Value(fact_count), Value(c.cycle), *s.id, rational_value(s.count)}));
        }
        if (!s.id && s.tentative_cycle == c.cycle && c.command == Command::stop) {
            s.facts.insert(
                Value::tuple({Value(fact_vector), Value(c.cycle), Value(r), vector_at(s, c.stop_round, r)}));
            prune_vectors(s);
        }
    }

    // A node's vector at round t is the part of its later vector with entries
    // <= t.
    static Value prefix_at(const Value& v, std::int64_t t)
    {
        std::vector<Value> out;
        for (const Value& x : v.items()) {
            if (x.as_int64() > t) {
                break;
            }
            out.push_back(x);
        }
        return Value::tuple(std::move(out));
    }

    // Drops vector reports implied by a later report of the same cycle, which
    // keeps one report per distinct history instead of one per round.
    static void prune_vectors(state_type& s)
    {
        std::vector<Value> reports;
        for (const Value& f : s.facts) {
            if (f[0].as_int64() == fact_vector) {
                reports.push_back(f);
            }
        }
        for (const Value& f : reports) {
            const std::int64_t t = f[2].as_int64();
            const bool implied = std::any_of(reports.begin(), reports.end(), [&](const Value& g) {
                return g[1] == f[1] && g[2].as_int64() > t && prefix_at(g[3], t) == f[3];
            });
            if (implied) {
                s.facts.erase(f);
            }
        }
    }

    // Arrival rounds of leader timestamps from, from + 1, ... that arrived by
    // round `at`; `at` = 0 selects the empty vector.
    static Value vector_at(const state_type& s, std::int64_t from, std::int64_t at)
    {
        std::vector<Value> v;
        if (at == 0) {
            return Value::tuple(std::move(v));
        }
        for (std::int64_t t = std::max<std::int64_t>(from, 1); t <= static_cast<std::int64_t>(s.arrival.size());
             ++t) {
            const std::int64_t arrived = s.arrival[t - 1];
            if (arrived > at) {
                break;
            }
            v.push_back(Value(arrived));
        }
        return Value::tuple(std::move(v));
    }

    std::int64_t k_cap_;
};

// True iff, for every node u and every start round r whose window still fits
// in the schedule, the length-k arrival vectors of u's states r..r+k-1 differ
// between every two distinct nodes other than u. Windows are checked for
// r = 0 .. length - (n - 1) - (k - 1) so that every arrival inside a window is
// realized within the prefix.
inline bool check_high_dynamicity(const DynamicSchedule& s, std::size_t k)
{
    const std::size_t n = s.node_count();
    if (k == 0) {
        throw RangeError("window length must be at least 1");
    }
    if (n <= 2) {
        return true;
    }
    const std::size_t need = (n - 1) + (k - 1);
    if (s.length() < need) {
        throw RangeError("schedule of " + std::to_string(s.length()) + " rounds is too short for k = " +
                         std::to_string(k) + " on " + std::to_string(n) + " nodes");
    }
    require_one_interval(s, s.length());
    const Round horizon = s.length();
    for (NodeId u = 0; u < n; ++u) {
        for (Round r = 0; r + need <= horizon; ++r) {
            std::vector<std::vector<std::optional<Round>>> rows;
            for (std::size_t i = 0; i < k; ++i) {
                rows.push_back(arrival_times(s, u, r + i, horizon));
            }
            for (NodeId v = 0; v < n; ++v) {
                for (NodeId w = v + 1; w < n; ++w) {
                    if (v == u || w == u) {
                        continue;
                    }
                    bool differ = false;
                    for (std::size_t i = 0; i < k && !differ; ++i) {
                        differ = rows[i][v] != rows[i][w];
                    }
                    if (!differ) {
                        return false;
                    }
                }
            }
        }
    }
    return true;
}

} // namespace anonet
