#pragma once

// Minimal naming with logarithmic messages under one-to-each transmission.
//
// Permanent ids 0..d-1 are held by "holders". A cycle:
//   unfreeze  the leader talks to holders 1..d-1 in turn; an unfrozen holder j
//             assigns temporary names k*d + j (k = 1, 2, ...) on every label
//             in every round. The leader assigns from the cycle start until
//             the last holder confirmed, so in that round everybody assigns.
//   collect   holders are frozen in id order and hand over, one per
//             conversation, the names they possibly assigned (sent to a
//             neighbor that still reported no id).
//   resolve   the smallest listed name surely belongs to a node; the leader
//             asks that node for the names it rejected, drops them, and gives
//             the node the next permanent id d + m.
// A cycle with nothing possibly assigned means every node holds an id; the
// leader floods halt(d).
//
// Conversations travel by flooding: every node forwards the conversation
// message with the largest timestamp it has seen, and the target answers with
// a fresher timestamp. All fields are O(log n) bits.

#include "anonet/engine.hpp"
#include "anonet/value.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace anonet {

class IndividualConversations {
public:
    enum class Role : std::int64_t { unnamed = 0, holder = 1, tentative = 2 };
    enum class Phase : std::int64_t { unfreeze = 0, collect = 1, resolve = 2 };

    struct state_type {
        bool leader = false;
        Role role = Role::unnamed;
        std::int64_t id = 0;       // permanent id (holder)
        std::int64_t name = 0;     // temporary name (tentative)
        std::vector<std::int64_t> rejected;

        // Holder assignment.
        std::int64_t d = 0;
        bool assigning = false;
        std::int64_t k = 1;
        std::set<std::int64_t> reusable;
        std::map<Label, std::int64_t> sent;  // names sent last round, by label
        std::set<std::int64_t> possibly;

        // Conversation relay.
        std::optional<Message> conv;
        std::int64_t answered = 0;

        // Leader.
        Phase phase = Phase::unfreeze;
        std::int64_t cursor = 0;
        std::int64_t arg = 0;
        std::int64_t pending = 0;
        std::set<std::int64_t> listed;
        std::int64_t seeking = 0;
        std::int64_t added = 0;
        bool cycle_open = false;

        std::optional<std::int64_t> n;
        std::int64_t halt_left = 0;

        Value encode() const
        {
            auto ints = [](const auto& c) {
                std::vector<Value> v;
                for (auto x : c) {
                    v.push_back(Value(x));
                }
                return Value::tuple(std::move(v));
            };
            std::vector<Value> sent_v;
            for (const auto& [l, x] : sent) {
                sent_v.push_back(Value::tuple({Value(static_cast<std::int64_t>(l)), Value(x)}));
            }
            return Value::tuple(
                {Value(leader ? 1 : 0), Value(static_cast<std::int64_t>(role)), Value(id), Value(name),
                 ints(rejected), Value(d), Value(assigning ? 1 : 0), Value(k), ints(reusable),
                 Value::tuple(std::move(sent_v)), ints(possibly),
                 conv ? Value::tuple({Value(static_cast<int>(conv->kind)), conv->body}) : Value::empty_tuple(),
                 Value(answered), Value(static_cast<std::int64_t>(phase)), Value(cursor), Value(arg), Value(pending),
                 ints(listed), Value(seeking), Value(added), Value(cycle_open ? 1 : 0), Value(n ? *n + 1 : 0),
                 Value(halt_left)});
        }
    };

    ProtocolInfo info() const
    {
        return {"individual-conversations", Mode::one_to_each, true, true, OutputShape::id_and_count};
    }

    state_type initial_state(bool is_leader) const
    {
        state_type s;
        if (is_leader) {
            s.leader = true;
            s.role = Role::holder;
            s.id = 0;
            s.d = 1;
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
        if (!s.leader) {
            std::optional<std::int64_t> heard;
            in.for_each(MessageKind::halt, [&](const Value& body, const Received&) { heard = body.as_int64(); });
            if (heard) {
                s.n = *heard;
                s.halt_left = std::max<std::int64_t>(0, *heard - 2);
                return relay_halt(s, std::move(a));
            }
        }

        tally_replies(s, in);
        if (s.role == Role::unnamed) {
            take_name(s, in);
        }
        absorb_conversation(s, in);
        if (!s.leader) {
            answer(s, r);
        } else {
            lead(s, r);
            if (s.n) {
                s.halt_left = *s.n - 1;
                return relay_halt(s, std::move(a));
            }
        }

        a.out.broadcast(MessageKind::id, beacon(s));
        if (s.role == Role::holder && s.assigning) {
            for (Label l = 1; l <= in.channels(); ++l) {
                std::int64_t x;
                if (!s.reusable.empty()) {
                    x = *s.reusable.begin();
                    s.reusable.erase(s.reusable.begin());
                } else {
                    x = s.k * s.d + s.id;
                    ++s.k;
                }
                s.sent[l] = x;
                a.out.send(l, MessageKind::assign, Value(x));
            }
        }
        if (s.conv) {
            a.out.broadcast(s.conv->kind, s.conv->body);
        }
        return a;
    }

    std::optional<Value> observe(const state_type& s) const
    {
        return s.role == Role::holder ? std::optional<Value>(Value(s.id)) : std::nullopt;
    }

    // Temporary name of a tentative node, for invariant checks.
    static std::optional<std::int64_t> temporary_name(const state_type& s)
    {
        return s.role == Role::tentative ? std::optional<std::int64_t>(s.name) : std::nullopt;
    }

    // Timestamp of the conversation message a node forwards, if any.
    static std::optional<std::int64_t> conversation_stamp(const state_type& s)
    {
        return s.conv ? std::optional<std::int64_t>(s.conv->body[0].as_int64()) : std::nullopt;
    }

private:
    static constexpr std::int64_t none = 0;

    static bool is_conversation(MessageKind k)
    {
        return k == MessageKind::unfreeze || k == MessageKind::freeze || k == MessageKind::request ||
               k == MessageKind::reassign || k == MessageKind::report;
    }

    static Value beacon(const state_type& s)
    {
        switch (s.role) {
        case Role::holder: return Value::tuple({Value(1), Value(s.id)});
        case Role::tentative: return Value::tuple({Value(2), Value(s.name)});
        case Role::unnamed: break;
        }
        return Value::tuple({Value(0), Value(0)});
    }

    static Action relay_halt(state_type& s, Action a)
    {
        if (s.halt_left > 0) {
            a.out.broadcast(MessageKind::halt, Value(*s.n));
            --s.halt_left;
        }
        if (s.halt_left == 0) {
            a.halt_output = Value::tuple({s.role == Role::holder ? Value(s.id) : Value::empty_tuple(), Value(*s.n)});
        }
        return a;
    }

    // A name sent last round over label l is possibly taken iff the neighbor
    // on l still reported no id in that round; otherwise it may be reused.
    static void tally_replies(state_type& s, const StepInput& in)
    {
        if (s.sent.empty()) {
            return;
        }
        std::map<Label, bool> unnamed;
        for (const auto& rec : in.inbox) {
            const Label l = rec.label.value_or(1);
            for (const auto& m : rec.bundle) {
                if (m.kind == MessageKind::id) {
                    unnamed[l] = unnamed[l] || m.body[0].as_int64() == 0;
                }
            }
        }
        for (const auto& [l, x] : s.sent) {
            auto it = unnamed.find(l);
            if (it == unnamed.end() || it->second) {
                s.possibly.insert(x);
            } else {
                s.reusable.insert(x);
            }
        }
        s.sent.clear();
    }

    static void take_name(state_type& s, const StepInput& in)
    {
        std::vector<std::int64_t> names;
        in.for_each(MessageKind::assign, [&](const Value& body, const Received&) { names.push_back(body.as_int64()); });
        if (names.empty()) {
            return;
        }
        std::sort(names.begin(), names.end());
        names.erase(std::unique(names.begin(), names.end()), names.end());
        s.role = Role::tentative;
        s.name = names.front();
        s.rejected.assign(names.begin() + 1, names.end());
    }

    static void absorb_conversation(state_type& s, const StepInput& in)
    {
        for (const auto& rec : in.inbox) {
            for (const auto& m : rec.bundle) {
                if (is_conversation(m.kind) && (!s.conv || m.body[0] > s.conv->body[0])) {
                    s.conv = m;
                }
            }
        }
    }

    static std::int64_t next_after(const auto& sorted, std::int64_t after)
    {
        auto it = std::upper_bound(sorted.begin(), sorted.end(), after);
        return it == sorted.end() ? none : *it;
    }

    // Requests are (timestamp, target role, target, argument); reports are
    // (timestamp, request timestamp, result).
    static void answer(state_type& s, std::int64_t r)
    {
        if (!s.conv || s.conv->kind == MessageKind::report) {
            return;
        }
        const Value& b = s.conv->body;
        const std::int64_t ts = b[0].as_int64();
        if (ts <= s.answered) {
            return;
        }
        const auto role = static_cast<Role>(b[1].as_int64());
        const std::int64_t target = b[2].as_int64();
        const std::int64_t arg = b[3].as_int64();
        const bool mine = role == s.role && (role == Role::holder ? s.id == target : s.name == target) &&
                          role != Role::unnamed;
        if (!mine) {
            return;
        }
        std::int64_t result = none;
        switch (s.conv->kind) {
        case MessageKind::unfreeze:
            s.d = arg;
            s.assigning = true;
            s.k = 1;
            s.reusable.clear();
            s.possibly.clear();
            s.sent.clear();
            break;
        case MessageKind::freeze:
            s.assigning = false;
            result = next_after(s.possibly, arg);
            break;
        case MessageKind::request: result = next_after(s.rejected, arg); break;
        case MessageKind::reassign:
            s.role = Role::holder;
            s.id = arg;
            s.name = 0;
            s.rejected.clear();
            break;
        default: return;
        }
        s.answered = ts;
        s.conv = Message{MessageKind::report, Value::tuple({Value(r), Value(ts), Value(result)})};
    }

    static void ask(state_type& s, std::int64_t r, MessageKind kind, Role role, std::int64_t target, std::int64_t arg)
    {
        s.pending = r;
        s.conv = Message{kind, Value::tuple({Value(r), Value(static_cast<std::int64_t>(role)), Value(target),
                                             Value(arg)})};
    }

    static void open_cycle(state_type& s, std::int64_t r)
    {
        s.cycle_open = true;
        s.phase = Phase::unfreeze;
        s.assigning = true;
        s.k = 1;
        s.reusable.clear();
        s.possibly.clear();
        s.sent.clear();
        s.listed.clear();
        s.added = 0;
        s.cursor = 1;
        if (s.d == 1) {
            s.phase = Phase::collect;
            s.cursor = 0;
        } else {
            ask(s, r, MessageKind::unfreeze, Role::holder, 1, s.d);
        }
    }

    // Next step of the resolve phase once `seeking` is settled or removed.
    static void seek_next(state_type& s, std::int64_t r)
    {
        if (s.listed.empty()) {
            s.d += s.added;
            s.cycle_open = false;
            open_cycle(s, r);
            return;
        }
        s.seeking = *s.listed.begin();
        s.arg = 0;
        ask(s, r, MessageKind::request, Role::tentative, s.seeking, 0);
    }

    static void lead(state_type& s, std::int64_t r)
    {
        if (!s.cycle_open) {
            open_cycle(s, r);
            return;
        }
        std::optional<std::int64_t> result;
        if (s.pending != 0 && s.conv && s.conv->kind == MessageKind::report && s.conv->body[1].as_int64() == s.pending) {
            result = s.conv->body[2].as_int64();
            s.pending = 0;
        }

        switch (s.phase) {
        case Phase::unfreeze:
            if (!result) {
                return;
            }
            ++s.cursor;
            if (s.cursor < s.d) {
                ask(s, r, MessageKind::unfreeze, Role::holder, s.cursor, s.d);
            } else {
                // Every holder is assigning in this round, the leader too.
                s.phase = Phase::collect;
                s.cursor = 0;
            }
            return;
        case Phase::collect:
            if (s.cursor == 0) {
                s.assigning = false;
                s.listed.insert(s.possibly.begin(), s.possibly.end());
                s.cursor = 1;
                s.arg = 0;
            } else {
                if (!result) {
                    return;
                }
                if (*result != none) {
                    s.listed.insert(*result);
                    s.arg = *result;
                } else {
                    ++s.cursor;
                    s.arg = 0;
                }
            }
            if (s.cursor < s.d) {
                ask(s, r, MessageKind::freeze, Role::holder, s.cursor, s.arg);
                return;
            }
            if (s.listed.empty()) {
                s.n = s.d;
                return;
            }
            s.phase = Phase::resolve;
            seek_next(s, r);
            return;
        case Phase::resolve: {
            if (!result) {
                return;
            }
            const bool reassigned = s.conv && s.conv->kind == MessageKind::report && s.arg < 0;
            if (reassigned) {
                s.listed.erase(s.seeking);
                ++s.added;
                seek_next(s, r);
            } else if (*result != none) {
                s.listed.erase(*result);
                s.arg = *result;
                ask(s, r, MessageKind::request, Role::tentative, s.seeking, s.arg);
            } else {
                s.arg = -1;
                ask(s, r, MessageKind::reassign, Role::tentative, s.seeking, s.d + s.added);
            }
            return;
        }
        }
    }
};

} // namespace anonet
