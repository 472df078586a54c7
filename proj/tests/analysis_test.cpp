#include "anonet/analysis.hpp"
#include "anonet/protocols/one_to_each.hpp"
#include "anonet/protocols/static.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace anonet;
using Catch::Approx;

namespace {

RunResult fake(OutputShape shape, bool terminating, bool halted, std::vector<std::optional<Value>> outputs,
               std::vector<std::optional<Value>> observed = {})
{
    RunResult r;
    r.protocol.output_shape = shape;
    r.protocol.terminating = terminating;
    r.halted = halted;
    r.outputs = std::move(outputs);
    r.final_observed = observed.empty() ? r.outputs : std::move(observed);
    return r;
}

Value pair(Value id, std::int64_t n) { return Value::tuple({std::move(id), Value(n)}); }

} // namespace

TEST_CASE("verdicts on scalar outputs")
{
    const auto ok = fake(OutputShape::scalar, true, true, {Value(3), Value(3), Value(3)});
    CHECK(verdict({Problem::counting}, ok, 3) == Verdict::holds);
    CHECK(verdict({Problem::counting}, ok, 4) == Verdict::fails);
    CHECK(verdict({Problem::counting_upper_bound}, ok, 3) == Verdict::holds);
    const auto over = fake(OutputShape::scalar, true, true, {Value(9), Value(9), Value(9)});
    CHECK(verdict({Problem::counting_upper_bound}, over, 3) == Verdict::holds);
    CHECK(verdict({Problem::counting}, over, 3) == Verdict::fails);
    const auto under = fake(OutputShape::scalar, true, true, {Value(2), Value(2), Value(2)});
    CHECK(verdict({Problem::counting_upper_bound}, under, 3) == Verdict::fails);
    const auto split = fake(OutputShape::scalar, true, true, {Value(9), Value(5), Value(9)});
    CHECK(verdict({Problem::counting_upper_bound}, split, 3) == Verdict::fails);
    CHECK(verdict({Problem::k_labeling, 1}, ok, 3) == Verdict::holds);
    CHECK(verdict({Problem::k_labeling, 2}, ok, 3) == Verdict::fails);
    CHECK(verdict({Problem::naming}, ok, 3) == Verdict::fails);

    const auto names = fake(OutputShape::scalar, true, true, {Value(2), Value(0), Value(1)});
    CHECK(verdict({Problem::naming}, names, 3) == Verdict::holds);
    CHECK(verdict({Problem::minimal_naming}, names, 3) == Verdict::holds);
    const auto gaps = fake(OutputShape::scalar, true, true, {Value(2), Value(0), Value(5)});
    CHECK(verdict({Problem::naming}, gaps, 3) == Verdict::holds);
    CHECK(verdict({Problem::minimal_naming}, gaps, 3) == Verdict::fails);

    const auto missing = fake(OutputShape::scalar, true, true, {Value(0), std::nullopt});
    CHECK(verdict({Problem::naming}, missing, 2) == Verdict::fails);
}

TEST_CASE("unhalted terminating runs have no verdict")
{
    const auto running = fake(OutputShape::scalar, true, false, {std::nullopt, std::nullopt}, {Value(0), Value(1)});
    CHECK(verdict({Problem::naming}, running, 2) == Verdict::undefined);
    // Their end configuration can still be judged.
    CHECK(verdict({Problem::naming}, running, 2, Judge::final_configuration) == Verdict::holds);
    const auto stabilizing = fake(OutputShape::scalar, false, false, {std::nullopt, std::nullopt}, {Value(0), Value(0)});
    CHECK(verdict({Problem::naming}, stabilizing, 2) == Verdict::fails);
    CHECK(to_string(Verdict::undefined) == "undefined");
}

TEST_CASE("id-and-count outputs are projected per problem")
{
    const auto r = fake(OutputShape::id_and_count, true, true, {pair(Value(0), 2), pair(Value(1), 2)});
    CHECK(verdict({Problem::naming}, r, 2) == Verdict::holds);
    CHECK(verdict({Problem::minimal_naming}, r, 2) == Verdict::holds);
    CHECK(verdict({Problem::counting}, r, 2) == Verdict::holds);
    CHECK(verdict({Problem::counting}, r, 3) == Verdict::fails);
    const auto shared = fake(OutputShape::id_and_count, true, true, {pair(Value(0), 2), pair(Value(0), 2)});
    CHECK(verdict({Problem::naming}, shared, 2) == Verdict::fails);
    CHECK(verdict({Problem::counting}, shared, 2) == Verdict::holds);
}

TEST_CASE("lockstep: symmetric leaves cannot be told apart")
{
    StaticAdversary adv(star(5));
    const auto report = lockstep_check(Delegate{}, adv, 5, 1, 20, star_leaf_pairs(5));
    CHECK(report.protocol == "delegate");
    CHECK(report.rows.size() == 21 * 3);
    CHECK(report.all_equal());
    CHECK_FALSE(report.first_difference());

    StaticAdversary again(star(5));
    CHECK(lockstep_check(DynamicNaming{}, again, 5, 1, 20, star_leaf_pairs(5)).all_equal());
}

TEST_CASE("lockstep under the mirror adversary")
{
    SymmetricMirrorAdversary adv(3, MirrorPattern::oscillating);
    CHECK(lockstep_check(Fair{}, adv, 7, 1, 30, adv.mirror_pairs()).all_equal());
}

TEST_CASE("lockstep reports the first difference")
{
    StaticAdversary adv(line(3));
    const auto report = lockstep_check(LeaderEccentricity{}, adv, 3, 1, 10, {{1, 2}});
    REQUIRE(report.first_difference());
    CHECK(report.first_difference()->round == 2);
    CHECK(report.rows.front().equal);
}

TEST_CASE("lockstep refuses labels and bad pairs")
{
    StaticAdversary adv(star(3));
    CHECK_THROWS_AS(lockstep_check(Fair{}, adv, 3, 1, 5, {{1, 2}}, Mode::one_to_each), InapplicableError);
    CHECK_THROWS_AS(lockstep_check(Fair{}, adv, 3, 1, 5, {{1, 3}}), RangeError);
}

TEST_CASE("ring demonstration")
{
    for (std::size_t n : {3u, 4u, 5u, 8u}) {
        const auto demo = ring_indistinguishability_demo(SilenceCounter{}, n);
        CHECK(demo.other_size == demo.k + 1);
        CHECK(demo.same_output());
        // At most one of the two rings can have been counted correctly.
        CHECK((demo.output_n != Value(static_cast<std::int64_t>(n)) ||
               demo.output_other != Value(static_cast<std::int64_t>(demo.other_size))));
    }
    CHECK_THROWS_AS(ring_indistinguishability_demo(AnonymousCounting{}, 4), InapplicableError);
    CHECK_THROWS_AS(ring_indistinguishability_demo(Fair{}, 4), InapplicableError);
}

TEST_CASE("log-log fits recover exponents")
{
    std::vector<Sample> quad, lin;
    for (double n : {8.0, 16.0, 32.0, 64.0}) {
        for (int i = 0; i < 5; ++i) {
            quad.push_back({n, 3 * n * n});
            lin.push_back({n, 5 * n * (1 + 0.01 * i)});
        }
    }
    const auto q = growth_fit(quad);
    CHECK(q.slope == Approx(2.0).margin(1e-9));
    CHECK(std::exp(q.intercept) == Approx(3.0).epsilon(1e-9));
    CHECK(q.max_residual < 1e-9);
    CHECK(q.points == 20);
    CHECK(growth_fit(lin).slope == Approx(1.0).margin(0.01));

    std::vector<Sample> few(quad.begin(), quad.begin() + 15);
    CHECK_THROWS_AS(growth_fit(few), ValidationError);
    std::vector<Sample> thin{{8, 1}, {16, 1}, {32, 1}, {64, 1}};
    CHECK_THROWS_AS(growth_fit(thin), ValidationError);
    CHECK_THROWS_AS(fit_loglog({{8, 1}, {8, 2}}), ValidationError);
    CHECK_THROWS_AS(fit_loglog({{8, 0}, {16, 2}}), ValidationError);
}

TEST_CASE("doubling increments of logarithmic growth")
{
    std::vector<Sample> s;
    for (double n : {4.0, 8.0, 16.0, 32.0}) {
        s.push_back({n, 13 * std::log2(n) + 40});
        s.push_back({n, 13 * std::log2(n) + 42});
    }
    CHECK(max_doubling_increment(s) == Approx(13.0));
    CHECK_THROWS_AS(max_doubling_increment({{3, 1}, {5, 1}}), ValidationError);
}
