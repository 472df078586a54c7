#include "anonet/adversary.hpp"
#include "anonet/analysis.hpp"
#include "anonet/engine.hpp"
#include "anonet/protocols/individual_conversations.hpp"
#include "anonet/protocols/one_to_each.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>

using namespace anonet;

namespace {

RunConfig config(std::size_t n, std::uint64_t seed, Round cap = 0, TraceLevel trace = TraceLevel::rounds)
{
    RunConfig c;
    c.n = n;
    c.seed = seed;
    c.mode = Mode::one_to_each;
    c.max_rounds = cap;
    c.trace = trace;
    return c;
}

std::set<Value> distinct_ids(const std::vector<std::optional<Value>>& ids)
{
    std::set<Value> out;
    for (const auto& id : ids) {
        if (id) {
            out.insert(*id);
        }
    }
    return out;
}

} // namespace

TEST_CASE("fair names a node on each meeting with the leader")
{
    for (std::size_t n = 2; n <= 9; ++n) {
        FairMeetAllAdversary adv(n);
        const auto res = run(Fair{}, adv, config(n, 1, 3 * n));
        REQUIRE_FALSE(res.halted);
        REQUIRE(ids_unique_every_round(res));
        // After n - 1 rounds every node has met the leader; one more to handle it.
        const auto& rec = res.trace.at(n - 1);
        REQUIRE(distinct_ids(ids_at(res, rec)).size() == n);
        REQUIRE(naming_convergence_round(res));
    }
}

TEST_CASE("fair examples")
{
    FairMeetAllAdversary adv(3);
    const auto res = run(Fair{}, adv, config(3, 1, 6));
    // Leader id is (0,1,1). In round 1 the leader sends (0,(0,1,1),2) to node 1.
    CHECK(res.final_observed[0] == detail::TupleNaming::root());
    CHECK(res.final_observed[1] == Value::tuple({Value(0), detail::TupleNaming::root(), Value(2)}));
    CHECK(res.final_observed[2] == Value::tuple({Value(1), detail::TupleNaming::root(), Value(3)}));
}

TEST_CASE("fair and delegate keep ids unique and converge")
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const std::size_t n = 2 + seed % 10;
        RandomConnectedAdversary a(n, seed), b(n, seed);
        const auto fair = run(Fair{}, a, config(n, seed, 8 * n));
        const auto del = run(Delegate{}, b, config(n, seed, 8 * n));
        REQUIRE(ids_unique_every_round(fair));
        REQUIRE(ids_unique_every_round(del));
        // Named nodes grow by at least one per round under delegation.
        for (const auto& rec : del.trace) {
            REQUIRE(distinct_ids(ids_at(del, rec)).size() >= std::min<std::size_t>(rec.round, n));
        }
        REQUIRE(naming_convergence_round(del));
        REQUIRE(*naming_convergence_round(del) <= n);
        REQUIRE(verdict({Problem::naming}, del, n, Judge::final_configuration) == Verdict::holds);
    }
}

TEST_CASE("ids once taken never change")
{
    RandomConnectedAdversary adv(9, 4);
    const auto res = run(Delegate{}, adv, config(9, 4, 40));
    std::vector<std::optional<Value>> first(9);
    for (const auto& rec : res.trace) {
        for (NodeId u = 0; u < 9; ++u) {
            if (first[u]) {
                REQUIRE(rec.observed[u] == first[u]);
            } else {
                first[u] = rec.observed[u];
            }
        }
    }
}

TEST_CASE("dynamic naming terminates with unique ids and the true count")
{
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const std::size_t n = 1 + seed % 12;
        RandomConnectedAdversary adv(n, seed);
        const auto res = run(DynamicNaming{}, adv, config(n, seed, 50 * n));
        REQUIRE(res.halted);
        REQUIRE(res.rounds_executed <= 4 * n);
        REQUIRE(ids_unique_every_round(res));
        REQUIRE(verdict({Problem::naming}, res, n) == Verdict::holds);
        REQUIRE(verdict({Problem::counting}, res, n) == Verdict::holds);
    }
}

TEST_CASE("dynamic naming on a triangle")
{
    StaticAdversary adv(ring(3));
    const auto res = run(DynamicNaming{}, adv, config(3, 1));
    REQUIRE(res.halted);
    std::set<Value> ids;
    for (const auto& out : res.outputs) {
        REQUIRE((*out)[1] == Value(3));
        ids.insert((*out)[0]);
    }
    CHECK(ids == std::set<Value>{Value(0), Value::tuple({Value(0), Value(1)}), Value::tuple({Value(0), Value(2)})});
}

TEST_CASE("dynamic naming on a long line")
{
    StaticAdversary adv(line(12));
    const auto res = run(DynamicNaming{}, adv, config(12, 1, 0, TraceLevel::none));
    REQUIRE(res.halted);
    CHECK(verdict({Problem::naming}, res, 12) == Verdict::holds);
    CHECK(verdict({Problem::counting}, res, 12) == Verdict::holds);
}

TEST_CASE("minimal renaming ranks ids")
{
    const std::vector<Value> ids{Value::tuple({Value(0), Value(2)}), Value(0), Value::tuple({Value(0), Value(1)})};
    CHECK(minimal_renaming(ids) == std::vector<std::int64_t>{2, 0, 1});
    CHECK_THROWS_AS(minimal_renaming({Value(1), Value(1)}), ValidationError);

    RandomConnectedAdversary adv(7, 3);
    const auto res = run(DynamicNaming{}, adv, config(7, 3));
    std::vector<Value> outs;
    for (const auto& o : res.outputs) {
        outs.push_back(*o);
    }
    auto ranks = minimal_renaming(outs);
    std::sort(ranks.begin(), ranks.end());
    CHECK(ranks == std::vector<std::int64_t>{0, 1, 2, 3, 4, 5, 6});
}

TEST_CASE("individual conversations names minimally")
{
    for (std::uint64_t seed = 1; seed <= 16; ++seed) {
        const std::size_t n = 1 + seed % 10;
        RandomConnectedAdversary adv(n, seed);
        const auto res = run(IndividualConversations{}, adv, config(n, seed, 2 * n * n * n + 50, TraceLevel::none));
        REQUIRE(res.halted);
        REQUIRE(verdict({Problem::minimal_naming}, res, n) == Verdict::holds);
        REQUIRE(verdict({Problem::counting}, res, n) == Verdict::holds);
        const double bound = 14 * std::log2(std::max<double>(2, n)) + 80;
        REQUIRE(static_cast<double>(res.max_message_bits) <= bound);
    }
}

TEST_CASE("individual conversations invariants hold every round")
{
    using IC = IndividualConversations;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const std::size_t n = 3 + seed % 6;
        RandomConnectedAdversary adv(n, seed);
        std::vector<std::int64_t> last_stamp(n, 0);
        std::size_t holders_before = 1;
        const auto res = run(IC{}, adv, config(n, seed, 2 * n * n * n + 50, TraceLevel::none),
                             [&](Round, const std::vector<IC::state_type>& states) {
                                 std::set<std::int64_t> perm;
                                 std::size_t holders = 0;
                                 for (NodeId u = 0; u < n; ++u) {
                                     const auto& s = states[u];
                                     if (s.role == IC::Role::holder) {
                                         ++holders;
                                         // Permanent ids are exclusive and dense enough to stay below n.
                                         REQUIRE(perm.insert(s.id).second);
                                         REQUIRE(s.id >= 0);
                                         REQUIRE(s.id < static_cast<std::int64_t>(n));
                                     }
                                     // Relayed conversations only move forward in time.
                                     if (auto stamp = IC::conversation_stamp(s)) {
                                         REQUIRE(*stamp >= last_stamp[u]);
                                         last_stamp[u] = *stamp;
                                     }
                                 }
                                 // Holders never lose their id.
                                 REQUIRE(holders >= holders_before);
                                 holders_before = holders;
                             });
        REQUIRE(res.halted);
    }
}

TEST_CASE("individual conversations on one and two nodes")
{
    StaticAdversary one(star(1));
    const auto r1 = run(IndividualConversations{}, one, config(1, 1));
    REQUIRE(r1.halted);
    CHECK(r1.outputs[0] == Value::tuple({Value(0), Value(1)}));
    StaticAdversary two(line(2));
    const auto r2 = run(IndividualConversations{}, two, config(2, 1));
    REQUIRE(r2.halted);
    CHECK(verdict({Problem::minimal_naming}, r2, 2) == Verdict::holds);
}
