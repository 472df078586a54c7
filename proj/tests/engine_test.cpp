#include "anonet/engine.hpp"
#include "anonet/protocols/static.hpp"
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <numeric>
#include <random>

using namespace anonet;

namespace {

// The leader says hello in round 1 and halts with output 1. Everyone else
// relays the first hello it handles and halts with that round as output.
struct Flood {
    struct state_type {
        bool leader = false;
        Value encode() const { return Value(leader ? 1 : 0); }
    };

    ProtocolInfo info() const { return {.name = "flood"}; }
    state_type initial_state(bool leader) const { return {leader}; }
    std::optional<Value> observe(const state_type&) const { return std::nullopt; }

    Action step(state_type& s, const StepInput& in) const
    {
        Action a;
        if (s.leader || in.senders_of(MessageKind::hello) > 0) {
            a.out.broadcast(MessageKind::hello, Value(0));
            a.halt_output = Value(static_cast<std::int64_t>(in.round));
        }
        return a;
    }
};

// Records, every round, the rounds stamped on everything it received and
// the labels they came in on. Sends its own round number on every channel.
struct Recorder {
    struct state_type {
        std::vector<Value> log;
        Value encode() const { return Value::tuple(log); }
    };

    Round stop_after = 4;

    ProtocolInfo info() const { return {.name = "recorder", .terminating = false}; }
    state_type initial_state(bool) const { return {}; }
    std::optional<Value> observe(const state_type& s) const
    {
        return s.log.empty() ? std::nullopt : std::optional<Value>(s.log.back());
    }

    Action step(state_type& s, const StepInput& in) const
    {
        std::vector<Value> got;
        for (const auto& rec : in.inbox) {
            got.push_back(Value::tuple(
                {rec.bundle.front().body, Value(static_cast<std::int64_t>(rec.label.value_or(0)))}));
        }
        s.log.push_back(Value::tuple(got));
        Action a;
        for (Label l = 1; l <= in.channels(); ++l) {
            a.out.send(l, MessageKind::hello, Value(static_cast<std::int64_t>(in.round)));
        }
        if (in.round >= stop_after) {
            a.halt_output = Value(static_cast<std::int64_t>(s.log.size()));
        }
        return a;
    }
};

struct BadLabel {
    struct state_type {
        Value encode() const { return Value(0); }
    };
    Label label = 2;
    ProtocolInfo info() const { return {.name = "bad"}; }
    state_type initial_state(bool) const { return {}; }
    std::optional<Value> observe(const state_type&) const { return std::nullopt; }
    Action step(state_type&, const StepInput&) const
    {
        Action a;
        a.out.send(label, MessageKind::hello, Value(0));
        return a;
    }
};

RunConfig config(std::size_t n, Mode mode = Mode::broadcast)
{
    RunConfig c;
    c.n = n;
    c.mode = mode;
    return c;
}

} // namespace

TEST_CASE("messages sent in round r are handled in round r+1")
{
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const std::size_t n = 2 + seed % 9;
        RandomConnectedAdversary adv(n, seed);
        const auto res = run(Flood{}, adv, config(n));
        REQUIRE(res.halted);
        const auto o = oracle::closure(res.schedule, res.rounds_executed);
        for (NodeId v = 1; v < n; ++v) {
            // First round in which (0,0) reaches v, plus one for handling.
            Round first = 0;
            for (Round t = 1; t <= res.rounds_executed; ++t) {
                if (o.reaches(0, 0, v, t)) {
                    first = t;
                    break;
                }
            }
            REQUIRE(first > 0);
            REQUIRE(res.outputs[v] == Value(static_cast<std::int64_t>(first + 1)));
            REQUIRE(res.halt_round[v] == first + 1);
        }
        REQUIRE(res.outputs[0] == Value(1));
    }
}

TEST_CASE("static flood outputs distance plus one")
{
    StaticAdversary adv(line(6));
    const auto res = run(Flood{}, adv, config(6));
    for (NodeId v = 0; v < 6; ++v) {
        CHECK(res.outputs[v] == Value(static_cast<std::int64_t>(v + 1)));
    }
    CHECK(res.rounds_executed == 6);
}

TEST_CASE("halted nodes neither send nor receive")
{
    RandomConnectedAdversary adv(8, 3);
    const auto res = run(Flood{}, adv, config(8));
    REQUIRE(res.halted);
    for (const auto& rec : res.trace) {
        for (const auto& m : rec.messages) {
            REQUIRE(*res.halt_round[m.from] >= rec.round);
            // Deliveries to nodes that halted this round or earlier are dropped.
            REQUIRE_FALSE((res.halt_round[m.to] && *res.halt_round[m.to] <= rec.round));
        }
    }
}

TEST_CASE("broadcast inboxes are sorted and carry no labels")
{
    StaticAdversary adv(star(5));
    const auto res = run(Recorder{}, adv, config(5));
    REQUIRE(res.halted);
    // The centre hears four copies of "1" in round 2.
    const auto& centre = res.trace[1].observed[0];
    REQUIRE(centre);
    CHECK(centre->size() == 4);
    for (const auto& item : centre->items()) {
        CHECK(item == Value::tuple({Value(1), Value(0)}));
    }
    // Nothing is received in round 1.
    CHECK(res.trace[0].observed[3] == Value::tuple({}));
}

TEST_CASE("one-to-each delivery follows the labeling")
{
    RandomConnectedAdversary adv(6, 12);
    RunConfig c = config(6, Mode::one_to_each);
    c.seed = 5;
    const auto res = run(Recorder{}, adv, c);
    REQUIRE(res.halted);
    // The last record holds halt outputs, not logs.
    for (std::size_t i = 1; i + 1 < res.trace.size(); ++i) {
        const auto& prev = res.trace[i - 1];
        REQUIRE(prev.labels);
        for (NodeId u = 0; u < 6; ++u) {
            const auto& got = *res.trace[i].observed[u];
            REQUIRE(got.size() == prev.labels->degree(u));
            // Inbox is ordered by the receiver's label.
            for (std::size_t k = 0; k < got.size(); ++k) {
                REQUIRE(got[k][1] == Value(static_cast<std::int64_t>(k + 1)));
            }
        }
    }
}

TEST_CASE("runs are deterministic")
{
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        RandomConnectedAdversary a(7, seed), b(7, seed);
        RunConfig c = config(7, Mode::one_to_each);
        c.seed = seed;
        const auto x = run(Recorder{}, a, c);
        const auto y = run(Recorder{}, b, c);
        REQUIRE(x.schedule == y.schedule);
        REQUIRE(x.outputs == y.outputs);
        REQUIRE(x.total_message_bits == y.total_message_bits);
        for (std::size_t i = 0; i < x.trace.size(); ++i) {
            REQUIRE(x.trace[i].digests == y.trace[i].digests);
            REQUIRE(x.trace[i].messages == y.trace[i].messages);
            REQUIRE(x.trace[i].labels == y.trace[i].labels);
        }
    }
}

TEST_CASE("renaming non-leader nodes permutes the outputs")
{
    // Anonymity: a protocol cannot depend on node indices, so relabeling
    // the network relabels the outcome.
    std::mt19937_64 rng(31);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const std::size_t n = 3 + seed % 6;
        // Counting assumes a static network.
        StaticAdversary src(RandomConnectedAdversary(n, seed).graph_at(1));
        const DynamicSchedule s = materialize(src, 30 * n);
        std::vector<NodeId> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin() + 1, perm.end(), rng);
        DynamicSchedule t(n);
        for (const auto& g : s.rounds()) {
            std::vector<std::pair<NodeId, NodeId>> edges;
            for (const auto& e : g.edges()) {
                edges.emplace_back(perm[e.u], perm[e.v]);
            }
            t.push_back(InstantGraph(n, edges));
        }
        ReplayAdversary a(s), b(t);
        RunConfig c = config(n);
        c.max_rounds = 30 * n;
        const auto x = run(AnonymousCounting{}, a, c);
        const auto y = run(AnonymousCounting{}, b, c);
        REQUIRE(x.halted);
        REQUIRE(x.outputs[0] == Value(static_cast<std::int64_t>(n)));
        REQUIRE(x.rounds_executed == y.rounds_executed);
        for (NodeId v = 0; v < n; ++v) {
            REQUIRE(x.outputs[v] == y.outputs[perm[v]]);
            REQUIRE(x.halt_round[v] == y.halt_round[perm[v]]);
            REQUIRE(x.trace.back().digests[v] == y.trace.back().digests[perm[v]]);
        }
    }
}

TEST_CASE("observer sees post-step states every round")
{
    StaticAdversary adv(line(3));
    std::vector<std::size_t> sizes;
    run(Recorder{}, adv, config(3), [&](Round r, const std::vector<Recorder::state_type>& states) {
        REQUIRE(states.size() == 3);
        REQUIRE(states[0].log.size() == r);
        sizes.push_back(r);
    });
    CHECK(sizes == std::vector<std::size_t>{1, 2, 3, 4});
}

TEST_CASE("run configuration errors")
{
    StaticAdversary adv(star(3));
    CHECK_THROWS_AS(run(Flood{}, adv, config(4)), ValidationError);
    RunConfig c = config(3);
    c.leader = 3;
    CHECK_THROWS_AS(run(Flood{}, adv, c), ValidationError);
    RunConfig zero = config(0);
    CHECK_THROWS_AS(run(Flood{}, adv, zero), ValidationError);
    CHECK_THROWS_AS(run(BadLabel{}, adv, config(3)), ProtocolError);
    CHECK_THROWS_AS(run(BadLabel{3}, adv, config(3, Mode::one_to_each)), ProtocolError);
    CHECK_THROWS_AS(run(BadLabel{0}, adv, config(3, Mode::one_to_each)), ProtocolError);
}

TEST_CASE("round cap and trace levels")
{
    StaticAdversary adv(line(4));
    RunConfig c = config(4);
    c.max_rounds = 2;
    const auto res = run(Flood{}, adv, c);
    CHECK_FALSE(res.halted);
    CHECK(res.rounds_executed == 2);
    CHECK_FALSE(res.outputs[3]);
    c.max_rounds = 0;
    CHECK(c.round_cap() == 180);
    c.trace = TraceLevel::none;
    CHECK(run(Flood{}, adv, c).trace.empty());
    c.trace = TraceLevel::rounds;
    const auto rounds = run(Flood{}, adv, c);
    CHECK(rounds.trace.front().messages.empty());
    CHECK_FALSE(rounds.trace.front().edges.empty());
}

TEST_CASE("bundle bits price kind and body")
{
    const Bundle b{{MessageKind::hello, Value(0)}, {MessageKind::assign, Value(5)}};
    CHECK(bundle_bits(b) == (oracle::integer_bits(1) + 2 + oracle::integer_bits(0) + 4) +
                                (oracle::integer_bits(2) + 2 + oracle::integer_bits(5) + 4));
    CHECK(bundle_kinds(b) == "hello+assign");
}
