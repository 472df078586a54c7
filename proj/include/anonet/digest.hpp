#pragma once

#include "anonet/value.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace anonet {

// 128-bit FNV-1a over the canonical byte encoding of a state term.
class StateDigest {
public:
    StateDigest() = default;

    static StateDigest of_bytes(std::span<const std::uint8_t> bytes)
    {
        using u128 = unsigned __int128;
        constexpr u128 offset = (static_cast<u128>(0x6c62272e07bb0142ULL) << 64) | 0x62b821756295c58dULL;
        constexpr u128 prime = (static_cast<u128>(0x0000000001000000ULL) << 64) | 0x000000000000013BULL;
        u128 h = offset;
        for (std::uint8_t b : bytes) {
            h ^= b;
            h *= prime;
        }
        StateDigest d;
        d.hi_ = static_cast<std::uint64_t>(h >> 64);
        d.lo_ = static_cast<std::uint64_t>(h);
        return d;
    }

    static StateDigest of(const Value& state)
    {
        std::vector<std::uint8_t> bytes;
        state.append_bytes(bytes);
        return of_bytes(bytes);
    }

    std::string hex() const
    {
        static constexpr char digits[] = "0123456789abcdef";
        std::string out(32, '0');
        for (int i = 0; i < 16; ++i) {
            out[15 - i] = digits[(hi_ >> (4 * i)) & 0xf];
            out[31 - i] = digits[(lo_ >> (4 * i)) & 0xf];
        }
        return out;
    }

    friend auto operator<=>(const StateDigest&, const StateDigest&) = default;

private:
    std::uint64_t hi_ = 0;
    std::uint64_t lo_ = 0;
};

template <class State>
StateDigest state_digest(const State& state)
{
    return StateDigest::of(state.encode());
}

} // namespace anonet
