#pragma once

// Synchronous round execution. Each round r: the adversary picks E(r) (and
// labels in one-to-each mode) after inspecting state digests; every running
// node steps on what was delivered in round r-1; the outboxes travel along
// E(r) and are processed in round r+1.

#include "anonet/adversary.hpp"
#include "anonet/causal.hpp"
#include "anonet/digest.hpp"
#include "anonet/error.hpp"
#include "anonet/graph.hpp"
#include "anonet/value.hpp"

#include <algorithm>
#include <array>
#include <concepts>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace anonet {

enum class MessageKind : std::uint8_t {
    hello = 1,
    assign = 2,
    ack = 3,
    halt = 4,
    partial_count = 5,
    my_label = 6,
    unassigned = 7,
    arrival_probe = 8,
    vector_report = 9,
    freeze = 10,
    unfreeze = 11,
    count_report = 12,
    tally = 13,
    request = 14,
    report = 15,
    reassign = 16,
    max_announce = 17,
    id = 18,
};

inline std::string_view kind_name(MessageKind k)
{
    switch (k) {
    case MessageKind::hello: return "hello";
    case MessageKind::assign: return "assign";
    case MessageKind::ack: return "ack";
    case MessageKind::halt: return "halt";
    case MessageKind::partial_count: return "partial_count";
    case MessageKind::my_label: return "my_label";
    case MessageKind::unassigned: return "unassigned";
    case MessageKind::arrival_probe: return "arrival_probe";
    case MessageKind::vector_report: return "vector_report";
    case MessageKind::freeze: return "freeze";
    case MessageKind::unfreeze: return "unfreeze";
    case MessageKind::count_report: return "count_report";
    case MessageKind::tally: return "tally";
    case MessageKind::request: return "request";
    case MessageKind::report: return "report";
    case MessageKind::reassign: return "reassign";
    case MessageKind::max_announce: return "max_announce";
    case MessageKind::id: return "id";
    }
    return "unknown";
}

struct Message {
    MessageKind kind;
    Value body;

    friend bool operator==(const Message&, const Message&) = default;
    friend auto operator<=>(const Message& a, const Message& b)
    {
        if (auto c = a.kind <=> b.kind; c != 0) {
            return c;
        }
        return a.body <=> b.body;
    }
};

// Everything one node sends over one edge in one round.
using Bundle = std::vector<Message>;

// A bundle travels as a tuple of (kind code, body) pairs.
inline Value bundle_value(const Bundle& bundle)
{
    std::vector<Value> items;
    items.reserve(bundle.size());
    for (const auto& m : bundle) {
        items.push_back(Value::tuple({Value(static_cast<int>(m.kind)), m.body}));
    }
    return Value::tuple(std::move(items));
}

inline std::size_t bundle_bits(const Bundle& bundle)
{
    std::size_t bits = 0;
    for (const auto& m : bundle) {
        bits += bit_cost(Value(static_cast<int>(m.kind))) + 2 + bit_cost(m.body) + 2 + 2;
    }
    return bits;
}

inline std::string bundle_kinds(const Bundle& bundle)
{
    std::string out;
    for (const auto& m : bundle) {
        if (!out.empty()) {
            out += '+';
        }
        out += kind_name(m.kind);
    }
    return out;
}

struct Received {
    Bundle bundle;
    // Receiver's local label of the carrying edge in the round it was sent;
    // present only in one-to-each mode.
    std::optional<Label> label;
};

struct StepInput {
    Round round;
    Mode mode;
    std::span<const Received> inbox;
    // d_u(r) in one-to-each mode; absent under broadcast.
    std::optional<std::size_t> degree;

    // Number of distinct outgoing channels this round. Under broadcast the
    // single channel is label 1 and reaches every neighbor.
    std::size_t channels() const { return degree.value_or(1); }

    template <class F>
    void for_each(MessageKind kind, F&& f) const
    {
        for (const auto& rec : inbox) {
            for (const auto& m : rec.bundle) {
                if (m.kind == kind) {
                    f(m.body, rec);
                }
            }
        }
    }

    std::vector<Value> bodies(MessageKind kind) const
    {
        std::vector<Value> out;
        for_each(kind, [&](const Value& body, const Received&) { out.push_back(body); });
        return out;
    }

    // Number of received bundles carrying at least one message of `kind`.
    std::size_t senders_of(MessageKind kind) const
    {
        std::size_t count = 0;
        for (const auto& rec : inbox) {
            count += std::any_of(rec.bundle.begin(), rec.bundle.end(),
                                 [&](const Message& m) { return m.kind == kind; })
                         ? 1
                         : 0;
        }
        return count;
    }
};

struct Outbox {
    Bundle to_all;
    std::map<Label, Bundle> per_label;

    void broadcast(MessageKind kind, Value body) { to_all.push_back({kind, std::move(body)}); }
    void send(Label label, MessageKind kind, Value body) { per_label[label].push_back({kind, std::move(body)}); }
    bool empty() const
    {
        return to_all.empty() && std::all_of(per_label.begin(), per_label.end(),
                                             [](const auto& kv) { return kv.second.empty(); });
    }
};

struct Action {
    Outbox out;
    // Present when the node outputs and halts this round; the outbox of the
    // halting step is still transmitted.
    std::optional<Value> halt_output;
};

enum class OutputShape {
    scalar,        // the output is the answer itself
    id_and_count,  // (id, n) pair
};

struct ProtocolInfo {
    std::string name;
    Mode native_mode = Mode::broadcast;
    bool uses_leader = true;
    bool terminating = true;
    OutputShape output_shape = OutputShape::scalar;
    // Knowledge the protocol is built with; runs outside these bounds are
    // flagged as precondition violations.
    std::optional<std::size_t> degree_bound;
    std::optional<std::size_t> expansion_bound;
};

template <class P>
concept Protocol = requires(const P& p, typename P::state_type& s, const typename P::state_type& cs,
                            const StepInput& in) {
    { p.info() } -> std::convertible_to<ProtocolInfo>;
    { p.initial_state(true) } -> std::same_as<typename P::state_type>;
    { p.step(s, in) } -> std::same_as<Action>;
    { p.observe(cs) } -> std::same_as<std::optional<Value>>;
    { cs.encode() } -> std::same_as<Value>;
};

// ---------------------------------------------------------------------------

enum class TraceLevel {
    none,     // schedule and counters only
    rounds,   // plus per-round digests and observed outputs
    full,     // plus every delivered message and the labelings
};

struct RunConfig {
    std::size_t n = 1;
    std::uint64_t seed = 0;
    Mode mode = Mode::broadcast;
    // 0 selects 20n + 100.
    Round max_rounds = 0;
    std::optional<NodeId> leader = NodeId{0};
    TraceLevel trace = TraceLevel::full;

    Round round_cap() const { return max_rounds == 0 ? 20 * n + 100 : max_rounds; }
};

struct MessageRecord {
    NodeId from;
    NodeId to;
    std::size_t bits;
    std::string kinds;

    friend bool operator==(const MessageRecord&, const MessageRecord&) = default;
};

struct RoundRecord {
    Round round = 0;
    std::vector<Edge> edges;
    std::optional<EdgeLabeling> labels;
    std::vector<MessageRecord> messages;
    // States after the round's step.
    std::vector<StateDigest> digests;
    // Output of halted nodes, tentative output of running ones.
    std::vector<std::optional<Value>> observed;
};

struct RunResult {
    ProtocolInfo protocol;
    std::string adversary;
    RunConfig config;
    bool halted = false;
    Round rounds_executed = 0;
    std::vector<std::optional<Value>> outputs;
    std::vector<std::optional<Round>> halt_round;
    std::vector<std::optional<Value>> final_observed;
    std::size_t max_message_bits = 0;
    std::size_t total_message_bits = 0;
    std::size_t total_messages = 0;
    // Set when the schedule broke the protocol's degree or expansion bound.
    std::optional<std::string> precondition_violation;
    DynamicSchedule schedule;
    std::vector<StateDigest> initial_digests;
    std::vector<RoundRecord> trace;
};

namespace detail {

inline bool received_less(const Received& a, const Received& b)
{
    if (a.label != b.label) {
        return a.label < b.label;
    }
    return a.bundle < b.bundle;
}

} // namespace detail

// Called after every round with the post-step states; lets tests check
// protocol invariants the trace does not carry.
struct NoObserver {
    template <class S>
    void operator()(Round, const std::vector<S>&) const
    {
    }
};

template <Protocol P, class Observer = NoObserver>
RunResult run(const P& protocol, Adversary& adversary, const RunConfig& config, Observer&& observer = {})
{
    const std::size_t n = config.n;
    if (n == 0) {
        throw ValidationError("a run needs at least one node");
    }
    if (adversary.node_count() != n) {
        throw ValidationError("adversary is built for " + std::to_string(adversary.node_count()) + " nodes, run has " +
                              std::to_string(n));
    }
    if (config.leader && *config.leader >= n) {
        throw ValidationError("leader index outside the node range");
    }
    const Round cap = config.round_cap();
    if (cap == 0) {
        throw ValidationError("max_rounds must be at least 1");
    }

    RunResult result;
    result.protocol = protocol.info();
    result.adversary = adversary.name();
    result.config = config;
    result.config.max_rounds = cap;
    result.outputs.assign(n, std::nullopt);
    result.halt_round.assign(n, std::nullopt);
    result.schedule = DynamicSchedule(n);

    using State = typename P::state_type;
    std::vector<State> states;
    states.reserve(n);
    for (NodeId u = 0; u < n; ++u) {
        states.push_back(protocol.initial_state(config.leader && *config.leader == u));
    }
    std::vector<StateDigest> digests(n);
    for (NodeId u = 0; u < n; ++u) {
        digests[u] = state_digest(states[u]);
    }
    result.initial_digests = digests;

    const bool hashing = adversary.inspects_states() || config.trace != TraceLevel::none;
    std::vector<char> halted(n, 0);
    std::size_t running = n;
    std::vector<std::vector<Received>> inbox(n);

    for (Round r = 1; r <= cap && running > 0; ++r) {
        const AdversaryContext ctx{r, digests, config.seed};
        RoundPlan plan = adversary.next_round(ctx, config.mode);
        const InstantGraph& g = plan.graph;
        result.schedule.push_back(g);
        if (const auto& d = result.protocol.degree_bound;
            d && !result.precondition_violation && g.max_degree() > *d) {
            result.precondition_violation = "round " + std::to_string(r) + " has degree " +
                                            std::to_string(g.max_degree()) + " > " + std::to_string(*d);
        }

        std::vector<Outbox> out(n);
        for (NodeId u = 0; u < n; ++u) {
            if (halted[u]) {
                continue;
            }
            std::sort(inbox[u].begin(), inbox[u].end(), detail::received_less);
            StepInput in{r, config.mode, inbox[u], std::nullopt};
            if (config.mode == Mode::one_to_each) {
                in.degree = g.degree(u);
            }
            Action action = protocol.step(states[u], in);
            out[u] = std::move(action.out);
            if (action.halt_output) {
                result.outputs[u] = std::move(action.halt_output);
                result.halt_round[u] = r;
            }
        }

        RoundRecord record;
        record.round = r;
        if (config.trace != TraceLevel::none) {
            record.edges = g.edges();
        }
        if (config.trace == TraceLevel::full) {
            record.labels = plan.labels;
        }

        std::vector<std::vector<Received>> next(n);
        auto deliver = [&](NodeId from, NodeId to, Bundle bundle) {
            if (bundle.empty()) {
                return;
            }
            const std::size_t bits = bundle_bits(bundle);
            result.max_message_bits = std::max(result.max_message_bits, bits);
            if (halted[to] || result.halt_round[to]) {
                return;
            }
            result.total_message_bits += bits;
            ++result.total_messages;
            if (config.trace == TraceLevel::full) {
                record.messages.push_back({from, to, bits, bundle_kinds(bundle)});
            }
            std::optional<Label> label;
            if (plan.labels) {
                label = plan.labels->label(to, from);
            }
            next[to].push_back({std::move(bundle), label});
        };

        for (NodeId u = 0; u < n; ++u) {
            if (halted[u]) {
                continue;
            }
            Outbox& o = out[u];
            if (config.mode == Mode::broadcast) {
                for (auto& [label, bundle] : o.per_label) {
                    if (label != 1) {
                        throw ProtocolError(result.protocol.name + " addressed label " + std::to_string(label) +
                                            " under broadcast");
                    }
                    o.to_all.insert(o.to_all.end(), bundle.begin(), bundle.end());
                }
                for (NodeId v : g.neighbors(u)) {
                    deliver(u, v, o.to_all);
                }
            } else {
                const std::size_t d = g.degree(u);
                for (const auto& [label, bundle] : o.per_label) {
                    if (label == 0 || label > d) {
                        throw ProtocolError(result.protocol.name + " addressed label " + std::to_string(label) +
                                            " at a node of degree " + std::to_string(d));
                    }
                }
                for (Label l = 1; l <= d; ++l) {
                    Bundle bundle = o.to_all;
                    if (auto it = o.per_label.find(l); it != o.per_label.end()) {
                        bundle.insert(bundle.end(), it->second.begin(), it->second.end());
                    }
                    deliver(u, plan.labels->neighbor(u, l), std::move(bundle));
                }
            }
        }

        for (NodeId u = 0; u < n; ++u) {
            if (!halted[u] && result.halt_round[u]) {
                halted[u] = 1;
                --running;
            }
            if (hashing) {
                digests[u] = state_digest(states[u]);
            }
        }
        observer(r, std::as_const(states));
        inbox = std::move(next);
        result.rounds_executed = r;

        if (config.trace != TraceLevel::none) {
            record.digests = digests;
            record.observed.resize(n);
            for (NodeId u = 0; u < n; ++u) {
                record.observed[u] = halted[u] ? result.outputs[u] : protocol.observe(states[u]);
            }
            result.trace.push_back(std::move(record));
        }
    }

    result.halted = running == 0;
    if (const auto& e = result.protocol.expansion_bound; e && !result.precondition_violation) {
        const std::size_t observed = max_expansion(result.schedule, result.rounds_executed);
        if (observed > *e) {
            result.precondition_violation =
                "schedule expansion " + std::to_string(observed) + " > " + std::to_string(*e);
        }
    }
    result.final_observed.resize(n);
    for (NodeId u = 0; u < n; ++u) {
        result.final_observed[u] = halted[u] ? result.outputs[u] : protocol.observe(states[u]);
    }
    return result;
}

} // namespace anonet
