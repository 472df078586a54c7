#pragma once

// Verdicts for the labeling/naming/counting problems, the lockstep symmetry
// check, the ring indistinguishability demonstration, and growth-rate fits.

#include "anonet/adversary.hpp"
#include "anonet/engine.hpp"
#include "anonet/error.hpp"
#include "anonet/value.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace anonet {

enum class Problem { k_labeling, naming, minimal_naming, counting, counting_upper_bound };

struct Task {
    Problem problem;
    std::size_t k = 0;  // k-labeling only
};

enum class Verdict { holds, fails, undefined };

inline std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::undefined: return "undefined";
    }
    return "?";
}

// What to judge: the halting outputs (unhalted terminating runs have no
// verdict), or the configuration at the end of the run, i.e. outputs of
// halted nodes and tentative outputs of the others.
enum class Judge { halted_outputs, final_configuration };

namespace detail {

// The part of an output a problem talks about: ids for labeling problems,
// the count for counting problems.
inline std::optional<Value> project(const std::optional<Value>& out, OutputShape shape, Problem p, bool is_output)
{
    if (!out || shape == OutputShape::scalar || !is_output) {
        return out;
    }
    if (!out->is_tuple() || out->size() != 2) {
        return std::nullopt;
    }
    const bool counting = p == Problem::counting || p == Problem::counting_upper_bound;
    return (*out)[counting ? 1 : 0];
}

inline Verdict judge(const Task& task, const std::vector<std::optional<Value>>& values, std::size_t n)
{
    if (values.size() != n || std::any_of(values.begin(), values.end(), [](const auto& v) { return !v; })) {
        return Verdict::fails;
    }
    std::set<Value> distinct;
    for (const auto& v : values) {
        distinct.insert(*v);
    }
    auto result = [](bool ok) { return ok ? Verdict::holds : Verdict::fails; };
    switch (task.problem) {
    case Problem::k_labeling: return result(distinct.size() >= task.k);
    case Problem::naming: return result(distinct.size() == n);
    case Problem::minimal_naming: {
        std::set<Value> expected;
        for (std::size_t i = 0; i < n; ++i) {
            expected.insert(Value(static_cast<std::int64_t>(i)));
        }
        return result(distinct == expected);
    }
    case Problem::counting: return result(distinct.size() == 1 && *distinct.begin() == Value(static_cast<std::int64_t>(n)));
    case Problem::counting_upper_bound: {
        if (distinct.size() != 1 || !distinct.begin()->is_integer()) {
            return Verdict::fails;
        }
        return result(distinct.begin()->as_integer() >= static_cast<std::int64_t>(n));
    }
    }
    return Verdict::fails;
}

} // namespace detail

inline Verdict verdict(const Task& task, const RunResult& run, std::size_t truth_n,
                       Judge how = Judge::halted_outputs)
{
    const OutputShape shape = run.protocol.output_shape;
    std::vector<std::optional<Value>> values;
    if (how == Judge::halted_outputs) {
        if (!run.halted && run.protocol.terminating) {
            return Verdict::undefined;
        }
        const auto& src = run.halted ? run.outputs : run.final_observed;
        for (const auto& v : src) {
            values.push_back(detail::project(v, shape, task.problem, run.halted));
        }
    } else {
        for (std::size_t u = 0; u < run.final_observed.size(); ++u) {
            values.push_back(detail::project(run.final_observed[u], shape, task.problem, run.outputs[u].has_value()));
        }
    }
    return detail::judge(task, values, truth_n);
}

// Ids held in a trace round, projected out of (id, n) outputs of nodes that
// had halted by then.
inline std::vector<std::optional<Value>> ids_at(const RunResult& run, const RoundRecord& rec)
{
    std::vector<std::optional<Value>> ids;
    for (std::size_t u = 0; u < rec.observed.size(); ++u) {
        const bool halted = run.halt_round[u] && *run.halt_round[u] <= rec.round;
        ids.push_back(detail::project(rec.observed[u], run.protocol.output_shape, Problem::naming, halted));
    }
    return ids;
}

// No two nodes hold the same id in any traced round.
inline bool ids_unique_every_round(const RunResult& run)
{
    for (const auto& rec : run.trace) {
        std::set<Value> seen;
        for (const auto& id : ids_at(run, rec)) {
            if (id && !seen.insert(*id).second) {
                return false;
            }
        }
    }
    return true;
}

// First traced round from which every node holds an id, ids are pairwise
// distinct, and nothing changes until the end of the trace.
inline std::optional<Round> naming_convergence_round(const RunResult& run)
{
    if (run.trace.empty()) {
        return std::nullopt;
    }
    const auto last = ids_at(run, run.trace.back());
    std::set<Value> distinct;
    for (const auto& id : last) {
        if (!id) {
            return std::nullopt;
        }
        distinct.insert(*id);
    }
    if (distinct.size() != last.size()) {
        return std::nullopt;
    }
    Round first = run.trace.back().round;
    for (auto it = run.trace.rbegin(); it != run.trace.rend(); ++it) {
        if (ids_at(run, *it) != last) {
            break;
        }
        first = it->round;
    }
    return first;
}

// ---------------------------------------------------------------------------

struct LockstepRow {
    Round round;
    NodeId a;
    NodeId b;
    bool equal;
};

struct LockstepReport {
    std::string protocol;
    std::string adversary;
    std::vector<LockstepRow> rows;

    bool all_equal() const
    {
        return std::all_of(rows.begin(), rows.end(), [](const LockstepRow& r) { return r.equal; });
    }
    std::optional<LockstepRow> first_difference() const
    {
        for (const auto& r : rows) {
            if (!r.equal) {
                return r;
            }
        }
        return std::nullopt;
    }
};

// Compares state digests of the given node pairs after every round (round 0
// is the initial state). Labels would let protocols tell symmetric nodes
// apart, so one-to-each runs are refused; one-to-each protocols can be
// checked in their broadcast-degraded form.
template <Protocol P>
LockstepReport lockstep_check(const P& protocol, Adversary& adversary, std::size_t n, std::uint64_t seed, Round rounds,
                              const std::vector<std::pair<NodeId, NodeId>>& pairs, Mode mode = Mode::broadcast)
{
    if (mode != Mode::broadcast) {
        throw InapplicableError("lockstep check needs broadcast mode");
    }
    for (const auto& [a, b] : pairs) {
        if (a >= n || b >= n) {
            throw RangeError("lockstep pair outside the node range");
        }
    }
    RunConfig cfg;
    cfg.n = n;
    cfg.seed = seed;
    cfg.mode = mode;
    cfg.max_rounds = rounds;
    cfg.trace = TraceLevel::rounds;
    const RunResult res = run(protocol, adversary, cfg);

    LockstepReport report{res.protocol.name, res.adversary, {}};
    for (const auto& [a, b] : pairs) {
        report.rows.push_back({0, a, b, res.initial_digests[a] == res.initial_digests[b]});
    }
    for (const auto& rec : res.trace) {
        for (const auto& [a, b] : pairs) {
            report.rows.push_back({rec.round, a, b, rec.digests[a] == rec.digests[b]});
        }
    }
    return report;
}

// Consecutive leaf pairs of star(n): (1,2), (2,3), ...
inline std::vector<std::pair<NodeId, NodeId>> star_leaf_pairs(std::size_t n)
{
    std::vector<std::pair<NodeId, NodeId>> out;
    for (NodeId u = 1; u + 1 < n; ++u) {
        out.emplace_back(u, u + 1);
    }
    return out;
}

// ---------------------------------------------------------------------------

// Leaderless strawman that tries to count on rings: it announces itself every
// round and outputs the current round once its inbox has looked the same for
// two rounds.
class SilenceCounter {
public:
    struct state_type {
        std::int64_t last_size = -1;
        std::int64_t last_change = 0;

        Value encode() const { return Value::tuple({Value(last_size), Value(last_change)}); }
    };

    ProtocolInfo info() const { return {"silence-counter", Mode::broadcast, false, true, OutputShape::scalar}; }
    state_type initial_state(bool) const { return {}; }

    Action step(state_type& s, const StepInput& in) const
    {
        Action a;
        const auto r = static_cast<std::int64_t>(in.round);
        const auto size = static_cast<std::int64_t>(in.inbox.size());
        if (size != s.last_size) {
            s.last_size = size;
            s.last_change = r;
        }
        a.out.broadcast(MessageKind::hello, Value::empty_tuple());
        if (r - s.last_change >= 2) {
            a.halt_output = Value(r);
        }
        return a;
    }

    std::optional<Value> observe(const state_type&) const { return std::nullopt; }
};

struct RingDemo {
    std::size_t n = 0;
    Round k = 0;  // first halting round on ring(n)
    Value output_n;
    std::size_t other_size = 0;  // k + 1
    Round other_halt_round = 0;
    Value output_other;

    bool same_output() const { return output_n == output_other; }
};

namespace detail {

struct FirstHalt {
    Round round;
    Value output;
};

template <Protocol P>
std::optional<FirstHalt> first_halt_on_ring(const P& protocol, std::size_t n, Round cap)
{
    StaticAdversary adv(ring(n), "static-ring");
    RunConfig cfg;
    cfg.n = n;
    cfg.max_rounds = cap;
    cfg.leader = std::nullopt;
    cfg.trace = TraceLevel::none;
    const RunResult res = run(protocol, adv, cfg);
    std::optional<FirstHalt> best;
    for (NodeId u = 0; u < n; ++u) {
        if (res.halt_round[u] && (!best || *res.halt_round[u] < best->round)) {
            best = FirstHalt{*res.halt_round[u], *res.outputs[u]};
        }
    }
    return best;
}

} // namespace detail

// A leaderless protocol whose first node halts on ring(n) in round k gives
// the same output on ring(k + 1): no node can see past its k-neighborhood,
// which is a path in both rings.
template <Protocol P>
RingDemo ring_indistinguishability_demo(const P& protocol, std::size_t n, Round cap = 1000)
{
    const ProtocolInfo info = protocol.info();
    if (info.uses_leader) {
        throw InapplicableError(info.name + " uses a leader");
    }
    if (info.native_mode != Mode::broadcast) {
        throw InapplicableError(info.name + " is not a broadcast protocol");
    }
    const auto first = detail::first_halt_on_ring(protocol, n, cap);
    if (!first) {
        throw InapplicableError(info.name + " does not halt on ring(" + std::to_string(n) + ") within " +
                                std::to_string(cap) + " rounds");
    }
    RingDemo demo;
    demo.n = n;
    demo.k = first->round;
    demo.output_n = first->output;
    demo.other_size = static_cast<std::size_t>(first->round) + 1;
    const auto other = detail::first_halt_on_ring(protocol, demo.other_size, cap);
    if (!other) {
        throw InapplicableError(info.name + " does not halt on the larger ring");
    }
    demo.other_halt_round = other->round;
    demo.output_other = other->output;
    return demo;
}

// ---------------------------------------------------------------------------

struct Sample {
    double n;
    double value;
};

struct GrowthFit {
    double slope = 0;
    double intercept = 0;
    double max_residual = 0;
    std::size_t points = 0;
};

// Least-squares line through (log n, log value).
inline GrowthFit fit_loglog(const std::vector<Sample>& samples)
{
    std::set<double> ns;
    for (const auto& s : samples) {
        if (s.n <= 0 || s.value <= 0) {
            throw ValidationError("log-log fit needs positive samples");
        }
        ns.insert(s.n);
    }
    if (ns.size() < 2) {
        throw ValidationError("log-log fit needs at least two distinct n");
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(samples.size());
    for (const auto& s : samples) {
        const double x = std::log(s.n), y = std::log(s.value);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    GrowthFit fit;
    fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / m;
    fit.points = samples.size();
    for (const auto& s : samples) {
        fit.max_residual =
            std::max(fit.max_residual, std::abs(std::log(s.value) - (fit.intercept + fit.slope * std::log(s.n))));
    }
    return fit;
}

// fit_loglog with the sweep-size requirement of at least 4 distinct n values
// and 5 samples for each.
inline GrowthFit growth_fit(const std::vector<Sample>& samples)
{
    std::map<double, std::size_t> per_n;
    for (const auto& s : samples) {
        ++per_n[s.n];
    }
    if (per_n.size() < 4) {
        throw ValidationError("growth fit needs at least 4 distinct n values");
    }
    for (const auto& [n, count] : per_n) {
        if (count < 5) {
            throw ValidationError("growth fit needs at least 5 samples per n");
        }
    }
    return fit_loglog(samples);
}

// Largest mean(value at 2n) - mean(value at n) over the n whose double was
// sampled; bounded for logarithmic growth.
inline double max_doubling_increment(const std::vector<Sample>& samples)
{
    std::map<double, std::pair<double, std::size_t>> acc;
    for (const auto& s : samples) {
        acc[s.n].first += s.value;
        ++acc[s.n].second;
    }
    std::optional<double> worst;
    for (const auto& [n, sum_count] : acc) {
        auto it = acc.find(2 * n);
        if (it == acc.end()) {
            continue;
        }
        const double inc = it->second.first / it->second.second - sum_count.first / sum_count.second;
        worst = worst ? std::max(*worst, inc) : inc;
    }
    if (!worst) {
        throw ValidationError("no n together with 2n in the samples");
    }
    return *worst;
}

} // namespace anonet
