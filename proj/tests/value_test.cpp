#include "anonet/value.hpp"
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using anonet::bit_cost;
using anonet::Value;

TEST_CASE("integer bit cost matches the self-delimiting code length")
{
    for (std::uint64_t v = 0; v < 5000; ++v) {
        REQUIRE(bit_cost(Value(static_cast<std::int64_t>(v))) == oracle::integer_bits(v));
    }
    CHECK(bit_cost(Value(0)) == 3);
    CHECK(bit_cost(Value(1)) == 5);
    CHECK(bit_cost(Value(2)) == 5);
    CHECK(bit_cost(Value(3)) == 7);
}

TEST_CASE("bit cost is monotone in integer value")
{
    std::size_t prev = 0;
    for (std::int64_t v = 0; v < 70000; v += 7) {
        const auto c = bit_cost(Value(v));
        REQUIRE(c >= prev);
        prev = c;
    }
}

TEST_CASE("big integers cost like their bit width")
{
    anonet::Integer big = 1;
    big <<= 100; // 2^100, so v + 1 has 101 bits
    CHECK(bit_cost(Value(big)) == 2 * 101 + 1);
    anonet::Integer all_ones = (anonet::Integer(1) << 80) - 1; // v + 1 = 2^80
    CHECK(bit_cost(Value(all_ones)) == 2 * 81 + 1);
}

TEST_CASE("compound costs add per-part overhead")
{
    const Value t = Value::tuple({Value(0), Value(3)});
    CHECK(bit_cost(t) == (3 + 2) + (7 + 2));
    CHECK(bit_cost(Value::empty_tuple()) == 0);
    const Value s = Value::set({Value(1), Value(2)});
    CHECK(bit_cost(s) == oracle::integer_bits(2) + (5 + 2) + (5 + 2));
    CHECK(bit_cost(Value::set({})) == oracle::integer_bits(0));
    const Value nested = Value::tuple({t, s});
    CHECK(bit_cost(nested) == bit_cost(t) + 2 + bit_cost(s) + 2);
}

TEST_CASE("negative integers have no encoding")
{
    CHECK_THROWS_AS(bit_cost(Value(-1)), anonet::EncodingError);
    CHECK_THROWS_AS(bit_cost(Value::tuple({Value(1), Value(-5)})), anonet::EncodingError);
    CHECK_THROWS_AS(bit_cost(Value(anonet::Integer(-(anonet::Integer(1) << 90)))), anonet::EncodingError);
}

TEST_CASE("sets are canonical: order and duplicates do not matter")
{
    const Value a = Value::set({Value(3), Value(1), Value(2)});
    const Value b = Value::set({Value(2), Value(3), Value(1), Value(3)});
    CHECK(a == b);
    CHECK(a.size() == 3);
    CHECK(a.to_string() == "{1,2,3}");
}

TEST_CASE("value order is a strict total order consistent with byte encoding")
{
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> small(0, 4);
    auto random_value = [&](auto&& self, int depth) -> Value {
        const int kind = depth == 0 ? 0 : small(rng) % 3;
        if (kind == 0) {
            return Value(small(rng));
        }
        std::vector<Value> items;
        const int count = small(rng) % 3;
        for (int i = 0; i < count; ++i) {
            items.push_back(self(self, depth - 1));
        }
        return kind == 1 ? Value::tuple(items) : Value::set(items);
    };
    for (int i = 0; i < 500; ++i) {
        const Value a = random_value(random_value, 3);
        const Value b = random_value(random_value, 3);
        std::vector<std::uint8_t> ea, eb;
        a.append_bytes(ea);
        b.append_bytes(eb);
        REQUIRE((a == b) == (ea == eb));
        REQUIRE(((a <=> b) < 0) == ((b <=> a) > 0));
    }
}

TEST_CASE("integer accessors")
{
    const Value v(anonet::Integer(1) << 70);
    CHECK(v.is_integer());
    CHECK_FALSE(v.fits_int64());
    CHECK(Value(42).as_int64() == 42);
    CHECK_THROWS_AS(Value::tuple({}).as_integer(), anonet::EncodingError);
}

TEST_CASE("rationals travel reduced")
{
    const anonet::Rational q(6, 4);
    const Value v = anonet::rational_value(q);
    CHECK(v == Value::tuple({Value(3), Value(2)}));
    CHECK(anonet::as_rational(v) == q);
    CHECK_THROWS_AS(anonet::as_rational(Value::tuple({Value(1), Value(0)})), anonet::EncodingError);
}
