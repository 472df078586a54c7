#include "anonet/adversary.hpp"
#include "anonet/engine.hpp"
#include "anonet/protocols/static.hpp"
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace anonet;

namespace {

std::vector<std::pair<NodeId, NodeId>> pairs_of(const InstantGraph& g)
{
    std::vector<std::pair<NodeId, NodeId>> out;
    for (const auto& e : g.edges()) {
        out.emplace_back(e.u, e.v);
    }
    return out;
}

template <class P>
RunResult run_static(const P& p, const InstantGraph& g, NodeId leader = 0)
{
    StaticAdversary adv(g);
    RunConfig c;
    c.n = g.node_count();
    c.leader = leader;
    c.trace = TraceLevel::none;
    return run(p, adv, c);
}

std::vector<InstantGraph> corpus()
{
    std::vector<InstantGraph> gs;
    for (std::size_t n = 1; n <= 9; ++n) {
        gs.push_back(star(n));
        gs.push_back(line(n));
        gs.push_back(line(n, false));
        gs.push_back(ring(n));
    }
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        gs.push_back(RandomConnectedAdversary(2 + seed % 13, seed).graph_at(1));
    }
    return gs;
}

} // namespace

TEST_CASE("leader eccentricity outputs BFS distances from the leader")
{
    for (const auto& g : corpus()) {
        const std::size_t n = g.node_count();
        for (NodeId leader : {NodeId{0}, n - 1}) {
            const auto res = run_static(LeaderEccentricity{}, g, leader);
            REQUIRE(res.halted);
            const auto d = oracle::distances(n, pairs_of(g));
            for (NodeId v = 0; v < n; ++v) {
                REQUIRE(res.outputs[v] == Value(static_cast<std::int64_t>(d[leader][v])));
            }
        }
    }
}

TEST_CASE("leader eccentricity on a line of four")
{
    const auto res = run_static(LeaderEccentricity{}, line(4));
    CHECK(res.outputs ==
          std::vector<std::optional<Value>>{Value(0), Value(1), Value(2), Value(3)});
    // Every node finishes in the same round.
    for (const auto& h : res.halt_round) {
        CHECK(h == res.halt_round[0]);
    }
}

TEST_CASE("anonymous counting outputs n everywhere")
{
    for (const auto& g : corpus()) {
        const std::size_t n = g.node_count();
        const auto res = run_static(AnonymousCounting{}, g);
        REQUIRE(res.halted);
        for (NodeId v = 0; v < n; ++v) {
            REQUIRE(res.outputs[v] == Value(static_cast<std::int64_t>(n)));
        }
        REQUIRE(res.rounds_executed <= 6 * n + 10);
    }
}

TEST_CASE("anonymous counting with the leader off-centre")
{
    const auto res = run_static(AnonymousCounting{}, symmetric_tree(3, 3), 4);
    for (const auto& out : res.outputs) {
        CHECK(out == Value(10));
    }
}

TEST_CASE("degree labeling outputs each node's degree")
{
    for (const auto& g : corpus()) {
        const auto res = run_static(DegreeKLabeling{}, g);
        REQUIRE(res.halted);
        REQUIRE(res.rounds_executed == 2);
        for (NodeId v = 0; v < g.node_count(); ++v) {
            REQUIRE(res.outputs[v] == Value(static_cast<std::int64_t>(g.degree(v))));
        }
    }
    const auto l4 = run_static(DegreeKLabeling{}, line(4));
    CHECK(l4.outputs == std::vector<std::optional<Value>>{Value(1), Value(2), Value(2), Value(1)});
}

TEST_CASE("degree labeling needs no leader")
{
    StaticAdversary adv(ring(5));
    RunConfig c;
    c.n = 5;
    c.leader = std::nullopt;
    const auto res = run(DegreeKLabeling{}, adv, c);
    for (const auto& out : res.outputs) {
        CHECK(out == Value(2));
    }
}
