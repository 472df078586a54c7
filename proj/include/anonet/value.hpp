#pragma once

// Immutable structured terms: integers, tuples, and sets. Message payloads,
// protocol outputs, and canonical state encodings are all expressed as terms,
// which gives one total order, one bit-cost model, and one byte encoding for
// digests.

#include "anonet/error.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <limits>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace anonet {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

class Value {
public:
    enum class Kind : std::uint8_t { integer = 0, tuple = 1, set = 2 };

    Value() = default;
    Value(std::int64_t v) : small_(v) {}
    Value(int v) : small_(v) {}
    Value(std::uint64_t v) { assign_integer(Integer(v)); }
    Value(unsigned v) : small_(static_cast<std::int64_t>(v)) {}
    Value(unsigned long long v) { assign_integer(Integer(v)); }
    Value(const Integer& v) { assign_integer(v); }

    static Value tuple(std::vector<Value> items)
    {
        Value v;
        v.kind_ = Kind::tuple;
        v.items_ = std::make_shared<const std::vector<Value>>(std::move(items));
        return v;
    }
    static Value tuple(std::initializer_list<Value> items)
    {
        return tuple(std::vector<Value>(items));
    }

    // Elements are sorted and deduplicated.
    static Value set(std::vector<Value> items)
    {
        std::sort(items.begin(), items.end());
        items.erase(std::unique(items.begin(), items.end()), items.end());
        Value v;
        v.kind_ = Kind::set;
        v.items_ = std::make_shared<const std::vector<Value>>(std::move(items));
        return v;
    }
    static Value set(std::initializer_list<Value> items) { return set(std::vector<Value>(items)); }

    static Value empty_tuple() { return tuple(std::vector<Value>{}); }

    Kind kind() const noexcept { return kind_; }
    bool is_integer() const noexcept { return kind_ == Kind::integer; }
    bool is_tuple() const noexcept { return kind_ == Kind::tuple; }
    bool is_set() const noexcept { return kind_ == Kind::set; }

    Integer as_integer() const
    {
        require(Kind::integer);
        return big_ ? *big_ : Integer(small_);
    }

    // Throws when the integer does not fit.
    std::int64_t as_int64() const
    {
        require(Kind::integer);
        if (big_) {
            throw EncodingError("integer value does not fit in 64 bits");
        }
        return small_;
    }

    bool fits_int64() const noexcept { return kind_ == Kind::integer && !big_; }

    std::span<const Value> items() const
    {
        if (kind_ == Kind::integer) {
            throw EncodingError("integer value has no items");
        }
        return {items_->data(), items_->size()};
    }
    std::size_t size() const { return items().size(); }
    const Value& operator[](std::size_t i) const { return items()[i]; }

    friend std::strong_ordering operator<=>(const Value& a, const Value& b)
    {
        if (a.kind_ != b.kind_) {
            return a.kind_ <=> b.kind_;
        }
        if (a.kind_ == Kind::integer) {
            if (!a.big_ && !b.big_) {
                return a.small_ <=> b.small_;
            }
            const Integer x = a.as_integer();
            const Integer y = b.as_integer();
            return x < y ? std::strong_ordering::less
                         : (y < x ? std::strong_ordering::greater : std::strong_ordering::equal);
        }
        if (a.items_ == b.items_) {
            return std::strong_ordering::equal;
        }
        const auto& xs = *a.items_;
        const auto& ys = *b.items_;
        const std::size_t common = std::min(xs.size(), ys.size());
        for (std::size_t i = 0; i < common; ++i) {
            if (auto c = xs[i] <=> ys[i]; c != 0) {
                return c;
            }
        }
        return xs.size() <=> ys.size();
    }
    friend bool operator==(const Value& a, const Value& b) { return (a <=> b) == 0; }

    std::string to_string() const
    {
        std::string out;
        append_text(out);
        return out;
    }

    // Canonical byte encoding; equal values encode identically.
    void append_bytes(std::vector<std::uint8_t>& out) const
    {
        out.push_back(static_cast<std::uint8_t>(kind_));
        if (kind_ == Kind::integer) {
            const Integer v = as_integer();
            out.push_back(v < 0 ? 1 : 0);
            std::vector<std::uint8_t> mag;
            const Integer magnitude = boost::multiprecision::abs(v);
            boost::multiprecision::export_bits(magnitude, std::back_inserter(mag), 8);
            append_length(out, mag.size());
            out.insert(out.end(), mag.begin(), mag.end());
            return;
        }
        append_length(out, items_->size());
        for (const auto& item : *items_) {
            item.append_bytes(out);
        }
    }

private:
    void require(Kind k) const
    {
        if (kind_ != k) {
            throw EncodingError("value has unexpected kind");
        }
    }

    void assign_integer(const Integer& v)
    {
        kind_ = Kind::integer;
        if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max()) {
            small_ = static_cast<std::int64_t>(v);
            big_.reset();
        } else {
            small_ = 0;
            big_ = std::make_shared<const Integer>(v);
        }
    }

    static void append_length(std::vector<std::uint8_t>& out, std::size_t len)
    {
        // LEB128
        do {
            std::uint8_t byte = len & 0x7f;
            len >>= 7;
            if (len != 0) {
                byte |= 0x80;
            }
            out.push_back(byte);
        } while (len != 0);
    }

    void append_text(std::string& out) const
    {
        switch (kind_) {
        case Kind::integer:
            out += big_ ? big_->str() : std::to_string(small_);
            return;
        case Kind::tuple:
        case Kind::set: {
            out += kind_ == Kind::tuple ? '(' : '{';
            bool first = true;
            for (const auto& item : *items_) {
                if (!first) {
                    out += ',';
                }
                first = false;
                item.append_text(out);
            }
            out += kind_ == Kind::tuple ? ')' : '}';
            return;
        }
        }
    }

    Kind kind_ = Kind::integer;
    std::int64_t small_ = 0;
    std::shared_ptr<const Integer> big_;
    std::shared_ptr<const std::vector<Value>> items_;
};

inline std::ostream& operator<<(std::ostream& os, const Value& v) { return os << v.to_string(); }

// Number of significant bits used by the cost model: floor(log2(v + 1)) + 1.
inline std::size_t integer_width(const Integer& v)
{
    const Integer w = v + 1;
    return static_cast<std::size_t>(boost::multiprecision::msb(w)) + 1;
}

// Deterministic size of a term under a self-delimiting encoding:
//   integer v >= 0 : B + (B + 1) where B = floor(log2(v + 1)) + 1
//                    (B value bits, then B in unary plus a terminator)
//   tuple          : sum of parts + 2 per part
//   set            : sum of elements + 2 per element + cost(element count)
// Negative integers have no encoding.
inline std::size_t bit_cost(const Value& v)
{
    switch (v.kind()) {
    case Value::Kind::integer: {
        if (v.fits_int64()) {
            const std::int64_t x = v.as_int64();
            if (x < 0) {
                throw EncodingError("negative integers have no encoding: " + std::to_string(x));
            }
            const auto width = static_cast<std::size_t>(std::bit_width(static_cast<std::uint64_t>(x) + 1));
            return 2 * width + 1;
        }
        const Integer x = v.as_integer();
        if (x < 0) {
            throw EncodingError("negative integers have no encoding: " + x.str());
        }
        const std::size_t width = std::max<std::size_t>(1, integer_width(x));
        return 2 * width + 1;
    }
    case Value::Kind::tuple: {
        std::size_t total = 0;
        for (const auto& part : v.items()) {
            total += bit_cost(part) + 2;
        }
        return total;
    }
    case Value::Kind::set: {
        std::size_t total = bit_cost(Value(static_cast<std::int64_t>(v.size())));
        for (const auto& element : v.items()) {
            total += bit_cost(element) + 2;
        }
        return total;
    }
    }
    return 0;
}

// Rationals travel as the reduced pair (numerator, denominator).
inline Value rational_value(const Rational& q)
{
    return Value::tuple({Value(boost::multiprecision::numerator(q)), Value(boost::multiprecision::denominator(q))});
}

inline Rational as_rational(const Value& v)
{
    if (!v.is_tuple() || v.size() != 2) {
        throw EncodingError("rational must be a (numerator, denominator) pair: " + v.to_string());
    }
    const Integer den = v[1].as_integer();
    if (den == 0) {
        throw EncodingError("rational with zero denominator");
    }
    return Rational(v[0].as_integer(), den);
}

} // namespace anonet
