#pragma once

// Protocols and adversaries by name, as used on the command line.

#include "anonet/adversary.hpp"
#include "anonet/error.hpp"
#include "anonet/io.hpp"
#include "anonet/protocols/broadcast_dynamic.hpp"
#include "anonet/protocols/individual_conversations.hpp"
#include "anonet/protocols/one_to_each.hpp"
#include "anonet/protocols/static.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace anonet {

struct ProtocolParams {
    std::optional<std::int64_t> d;
    std::optional<std::int64_t> e;
    std::int64_t k_cap = 64;
};

inline const std::vector<std::string>& protocol_names()
{
    static const std::vector<std::string> names = {
        "leader-eccentricity", "anonymous-counting", "degree-klabeling", "degree-counting", "expansion-counting",
        "hd-naming",           "fair",               "delegate",         "dynamic-naming",  "individual-conversations"};
    return names;
}

// Calls f with the named protocol object.
template <class F>
decltype(auto) with_protocol(const std::string& name, const ProtocolParams& p, F&& f)
{
    if (name == "leader-eccentricity") {
        return f(LeaderEccentricity{});
    }
    if (name == "anonymous-counting") {
        return f(AnonymousCounting{});
    }
    if (name == "degree-klabeling") {
        return f(DegreeKLabeling{});
    }
    if (name == "degree-counting") {
        if (!p.d) {
            throw ValidationError("degree-counting needs --d");
        }
        return f(DegreeCounting(*p.d));
    }
    if (name == "expansion-counting") {
        if (!p.e) {
            throw ValidationError("expansion-counting needs --e");
        }
        return f(ExpansionCounting(*p.e));
    }
    if (name == "hd-naming") {
        return f(HighDynamicityNaming(p.k_cap));
    }
    if (name == "fair") {
        return f(Fair{});
    }
    if (name == "delegate") {
        return f(Delegate{});
    }
    if (name == "dynamic-naming") {
        return f(DynamicNaming{});
    }
    if (name == "individual-conversations") {
        return f(IndividualConversations{});
    }
    throw ValidationError("unknown protocol " + name);
}

inline const std::vector<std::string>& adversary_names()
{
    static const std::vector<std::string> names = {"static-star",      "static-line",   "static-ring", "symmetric-tree",
                                                   "random-connected", "fair-meet-all", "mirror"};
    return names;
}

struct AdversaryParams {
    std::size_t n = 1;
    std::uint64_t seed = 0;
    std::size_t branches = 2;
};

inline std::size_t branch_length(std::size_t n, std::size_t branches, const std::string& what)
{
    if (branches < 2 || n < 1 + branches || (n - 1) % branches != 0) {
        throw ValidationError(what + " needs n = 1 + branches * length with at least two branches");
    }
    return (n - 1) / branches;
}

// Node count of an adversary spec: replay files carry their own.
inline std::optional<std::size_t> replay_node_count(const std::string& spec)
{
    if (spec.rfind("replay:", 0) != 0) {
        return std::nullopt;
    }
    return read_schedule(spec.substr(7)).schedule.node_count();
}

// Names are those of adversary_names() plus "replay:FILE". Replays cycle
// through their file.
inline std::unique_ptr<Adversary> make_adversary(const std::string& spec, const AdversaryParams& p)
{
    if (spec == "static-star") {
        return std::make_unique<StaticAdversary>(star(p.n), spec);
    }
    if (spec == "static-line") {
        return std::make_unique<StaticAdversary>(line(p.n, true), spec);
    }
    if (spec == "static-ring") {
        return std::make_unique<StaticAdversary>(ring(p.n), spec);
    }
    if (spec == "symmetric-tree") {
        return std::make_unique<StaticAdversary>(symmetric_tree(branch_length(p.n, p.branches, spec), p.branches),
                                                 spec);
    }
    if (spec == "random-connected") {
        return std::make_unique<RandomConnectedAdversary>(p.n, p.seed);
    }
    if (spec == "fair-meet-all") {
        return std::make_unique<FairMeetAllAdversary>(p.n);
    }
    if (spec == "mirror") {
        return std::make_unique<SymmetricMirrorAdversary>(branch_length(p.n, p.branches, spec),
                                                          MirrorPattern::oscillating, p.branches);
    }
    if (spec.rfind("replay:", 0) == 0) {
        ScheduleFile f = read_schedule(spec.substr(7));
        if (f.schedule.node_count() != p.n) {
            throw ValidationError("replay file has " + std::to_string(f.schedule.node_count()) + " nodes, run has " +
                                  std::to_string(p.n));
        }
        return std::make_unique<ReplayAdversary>(std::move(f.schedule), std::move(f.labels), ReplayTail::cycle);
    }
    throw ValidationError("unknown adversary " + spec);
}

} // namespace anonet
