// Command-line driver: run, sweep, verify, demo.
//
// Exit codes: 0 property holds / run solved its problem, 2 it does not,
// 3 no halt (or no convergence for stabilizing protocols), 64 usage, 65
// unreadable input, 1 anything else.

#include "anonet/anonet.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace anonet;

namespace {

constexpr int exit_holds = 0;
constexpr int exit_fails = 2;
constexpr int exit_no_halt = 3;
constexpr int exit_usage = 64;
constexpr int exit_data = 65;

struct RunArgs {
    std::string protocol;
    std::string adversary = "random-connected";
    std::size_t n = 8;
    std::uint64_t seed = 1;
    std::string mode;
    Round max_rounds = 0;
    std::optional<std::int64_t> d;
    std::optional<std::int64_t> e;
    std::optional<std::size_t> k;
    std::int64_t k_cap = 64;
    std::size_t branches = 2;
    std::string trace_path;
    std::string metrics_path;
    std::string result_path;
};

void add_run_flags(CLI::App* cmd, RunArgs& a, bool with_n)
{
    cmd->add_option("--protocol", a.protocol, "protocol name")->required()->check(CLI::IsMember(protocol_names()));
    cmd->add_option("--adversary", a.adversary, "adversary: " + [] {
        std::string s;
        for (const auto& n : adversary_names()) {
            s += n + ", ";
        }
        return s + "replay:FILE";
    }());
    if (with_n) {
        cmd->add_option("--n", a.n, "node count")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", a.seed, "seed");
    }
    cmd->add_option("--mode", a.mode, "broadcast or one-to-each (default: the protocol's own)")
        ->check(CLI::IsMember({"broadcast", "one-to-each"}));
    cmd->add_option("--max-rounds", a.max_rounds, "round cap (default 20n+100)");
    cmd->add_option("--d", a.d, "degree bound for degree-counting");
    cmd->add_option("--e", a.e, "expansion bound for expansion-counting");
    cmd->add_option("--k", a.k, "k for the k-labeling verdict");
    cmd->add_option("--k-cap", a.k_cap, "vector phase budget for hd-naming");
    cmd->add_option("--branches", a.branches, "branches of symmetric-tree and mirror");
    cmd->add_option("--trace", a.trace_path, "JSON-lines trace file");
    cmd->add_option("--metrics", a.metrics_path, "metrics TSV file");
}

// The problem each protocol is meant to solve; k-labeling thresholds come
// from the first round's graph (exact for static adversaries).
Task task_for(const std::string& protocol, const RunResult& res, std::optional<std::size_t> k)
{
    if (protocol == "anonymous-counting") {
        return {Problem::counting};
    }
    if (protocol == "degree-counting" || protocol == "expansion-counting") {
        return {Problem::counting_upper_bound};
    }
    if (protocol == "individual-conversations") {
        return {Problem::minimal_naming};
    }
    if (protocol == "leader-eccentricity" || protocol == "degree-klabeling") {
        if (!k) {
            const InstantGraph& g = res.schedule.at_round(1);
            std::set<std::size_t> distinct;
            if (protocol == "leader-eccentricity") {
                for (std::size_t dist : bfs_distances(g, 0)) {
                    distinct.insert(dist);
                }
            } else {
                for (NodeId u = 0; u < g.node_count(); ++u) {
                    distinct.insert(g.degree(u));
                }
            }
            k = distinct.size();
        }
        return {Problem::k_labeling, *k};
    }
    return {Problem::naming};
}

struct Outcome {
    RunResult result;
    Verdict verdict;
    int code;
};

Outcome execute(const RunArgs& a, std::size_t n, std::uint64_t seed)
{
    ProtocolParams pp{a.d, a.e, a.k_cap};
    return with_protocol(a.protocol, pp, [&](const auto& protocol) {
        const ProtocolInfo info = protocol.info();
        RunConfig cfg;
        cfg.n = n;
        cfg.seed = seed;
        cfg.mode = a.mode.empty() ? info.native_mode : (a.mode == "broadcast" ? Mode::broadcast : Mode::one_to_each);
        if (info.native_mode == Mode::one_to_each && cfg.mode == Mode::broadcast) {
            throw ValidationError(info.name + " needs one-to-each transmission");
        }
        cfg.max_rounds = a.max_rounds;
        cfg.leader = info.uses_leader ? std::optional<NodeId>(0) : std::nullopt;
        cfg.trace = a.trace_path.empty() ? TraceLevel::none : TraceLevel::full;
        auto adversary = make_adversary(a.adversary, {n, seed, a.branches});
        RunResult res = run(protocol, *adversary, cfg);
        const Task task = task_for(a.protocol, res, a.k);
        Outcome out{std::move(res), Verdict::undefined, exit_no_halt};
        if (info.terminating) {
            out.verdict = verdict(task, out.result, n);
            out.code = out.verdict == Verdict::undefined ? exit_no_halt
                       : out.verdict == Verdict::holds   ? exit_holds
                                                         : exit_fails;
        } else {
            out.verdict = verdict(task, out.result, n, Judge::final_configuration);
            out.code = out.verdict == Verdict::holds ? exit_holds : exit_no_halt;
        }
        return out;
    });
}

MetricsRow metrics_of(const Outcome& o)
{
    const RunResult& r = o.result;
    return {r.protocol.name,       r.adversary, r.config.n, r.config.seed, r.rounds_executed, r.max_message_bits,
            r.total_message_bits, to_string(o.verdict), r.precondition_violation.value_or("")};
}

int cmd_run(const RunArgs& a)
{
    std::size_t n = a.n;
    if (auto file_n = replay_node_count(a.adversary)) {
        n = *file_n;
    }
    const Outcome o = execute(a, n, a.seed);
    if (!a.trace_path.empty()) {
        std::ofstream out(a.trace_path);
        write_trace(out, o.result);
    }
    if (!a.metrics_path.empty()) {
        std::ofstream out(a.metrics_path);
        out << metrics_header();
        write_metrics_row(out, metrics_of(o));
    }
    if (!a.result_path.empty()) {
        std::ofstream out(a.result_path);
        out << result_to_json(o.result).dump(2) << '\n';
    }
    const RunResult& r = o.result;
    std::cout << r.protocol.name << " on " << r.adversary << ", n=" << n << ", " << to_string(r.config.mode) << ": "
              << (r.halted ? "halted" : "did not halt") << " after " << r.rounds_executed << " rounds, verdict "
              << to_string(o.verdict) << ", max message " << r.max_message_bits << " bits\n";
    std::cout << "outputs:";
    for (std::size_t u = 0; u < n; ++u) {
        const auto& v = r.outputs[u] ? r.outputs[u] : r.final_observed[u];
        std::cout << ' ' << (v ? v->to_string() : "-");
    }
    std::cout << '\n';
    if (r.precondition_violation) {
        std::cout << "precondition violated: " << *r.precondition_violation << '\n';
    }
    return o.code;
}

std::vector<std::size_t> parse_list(const std::string& text)
{
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoul(item));
        } catch (const std::exception&) {
            throw ValidationError("bad list entry '" + item + "'");
        }
    }
    if (out.empty()) {
        throw ValidationError("empty list");
    }
    return out;
}

int cmd_sweep(const RunArgs& a, const std::string& n_list, std::size_t seeds, const std::string& fit)
{
    std::ofstream file;
    if (!a.metrics_path.empty()) {
        file.open(a.metrics_path);
    }
    std::ostream& out = a.metrics_path.empty() ? std::cout : file;
    out << metrics_header();
    std::vector<Sample> samples;
    for (std::size_t n : parse_list(n_list)) {
        for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
            MetricsRow row;
            try {
                const Outcome o = execute(a, n, seed);
                row = metrics_of(o);
                if (o.result.halted || !o.result.protocol.terminating) {
                    const double v = fit == "rounds" ? static_cast<double>(o.result.rounds_executed)
                                                     : static_cast<double>(o.result.max_message_bits);
                    samples.push_back({static_cast<double>(n), v});
                }
            } catch (const ValidationError&) {
                throw;
            } catch (const Error& e) {
                row = {a.protocol, a.adversary, n, seed, 0, 0, 0, "error", e.what()};
            }
            write_metrics_row(out, row);
        }
    }
    if (!fit.empty()) {
        const GrowthFit g = fit_loglog(samples);
        std::cout << "fit " << fit << ": slope " << g.slope << ", max residual " << g.max_residual << ", "
                  << g.points << " points\n";
    }
    return exit_holds;
}

std::vector<std::pair<NodeId, NodeId>> parse_pairs(const std::string& spec, std::size_t n, const Adversary& adv)
{
    if (spec == "leaves") {
        return star_leaf_pairs(n);
    }
    if (spec == "mirror") {
        const auto* m = dynamic_cast<const SymmetricMirrorAdversary*>(&adv);
        if (m == nullptr) {
            throw ValidationError("mirror pairs need the mirror adversary");
        }
        return m->mirror_pairs();
    }
    std::vector<std::pair<NodeId, NodeId>> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto dash = item.find('-');
        if (dash == std::string::npos) {
            throw ValidationError("pairs are written a-b,c-d");
        }
        out.emplace_back(std::stoul(item.substr(0, dash)), std::stoul(item.substr(dash + 1)));
    }
    return out;
}

int report(bool holds, const std::string& what, const std::string& counterexample = "")
{
    std::cout << what << ": " << (holds ? "holds" : "fails") << '\n';
    if (!holds && !counterexample.empty()) {
        std::cout << counterexample << '\n';
    }
    return holds ? exit_holds : exit_fails;
}

int verify_schedule(const std::string& what, const std::string& path, std::size_t k)
{
    const ScheduleFile f = read_schedule(path);
    const DynamicSchedule& s = f.schedule;
    if (what == "connectivity") {
        const auto bad = validate_one_interval(s);
        std::string ce;
        if (!bad.empty()) {
            ce = "disconnected rounds:";
            for (Round r : bad) {
                ce += " " + std::to_string(r);
            }
        }
        return report(bad.empty(), "1-interval connectivity over " + std::to_string(s.length()) + " rounds", ce);
    }
    if (const auto bad = validate_one_interval(s); !bad.empty()) {
        return report(false, what, "round " + std::to_string(bad.front()) + " is disconnected");
    }
    if (what == "lemma1") {
        return report(check_influence_lemma(s, s.length()), "influence lemma up to round " + std::to_string(s.length()));
    }
    return report(check_high_dynamicity(s, k), "high dynamicity with k = " + std::to_string(k));
}

int verify_lockstep(const RunArgs& a, const std::string& pairs, Round rounds)
{
    ProtocolParams pp{a.d, a.e, a.k_cap};
    return with_protocol(a.protocol, pp, [&](const auto& protocol) {
        if (!a.mode.empty() && a.mode != "broadcast") {
            throw ValidationError("lockstep runs under broadcast");
        }
        const std::size_t n = replay_node_count(a.adversary).value_or(a.n);
        auto adversary = make_adversary(a.adversary, {n, a.seed, a.branches});
        const auto p = parse_pairs(pairs, n, *adversary);
        const LockstepReport rep = lockstep_check(protocol, *adversary, n, a.seed, rounds, p);
        std::string ce;
        if (auto row = rep.first_difference()) {
            ce = "round " + std::to_string(row->round) + ": nodes " + std::to_string(row->a) + " and " +
                 std::to_string(row->b) + " differ";
        }
        return report(rep.all_equal(), "lockstep of " + rep.protocol + " on " + rep.adversary, ce);
    });
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Anonymous dynamic network simulator"};
    app.require_subcommand(1);

    RunArgs args;
    auto* run_cmd = app.add_subcommand("run", "run one experiment");
    add_run_flags(run_cmd, args, true);
    run_cmd->add_option("--result", args.result_path, "run summary JSON file");

    std::string n_list = "8,16,32";
    std::size_t seeds = 5;
    std::string fit;
    auto* sweep_cmd = app.add_subcommand("sweep", "metrics over a grid of n and seeds");
    add_run_flags(sweep_cmd, args, false);
    sweep_cmd->add_option("--n-list", n_list, "comma-separated node counts");
    sweep_cmd->add_option("--seeds", seeds, "seeds 1..S per node count")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--fit", fit, "report a log-log slope of this metric")
        ->check(CLI::IsMember({"rounds", "max_bits"}));

    auto* verify_cmd = app.add_subcommand("verify", "check a property");
    verify_cmd->require_subcommand(1);
    std::string schedule_path;
    std::size_t k = 1;
    auto* v_lemma = verify_cmd->add_subcommand("lemma1", "influence lemma on a schedule");
    v_lemma->add_option("--schedule", schedule_path)->required();
    auto* v_conn = verify_cmd->add_subcommand("connectivity", "1-interval connectivity of a schedule");
    v_conn->add_option("--schedule", schedule_path)->required();
    auto* v_hd = verify_cmd->add_subcommand("high-dynamicity", "arrival vector separation");
    v_hd->add_option("--schedule", schedule_path)->required();
    v_hd->add_option("--k", k)->required();
    RunArgs lock_args;
    std::string pairs = "leaves";
    Round lock_rounds = 50;
    auto* v_lock = verify_cmd->add_subcommand("lockstep", "state equality of node pairs under broadcast");
    add_run_flags(v_lock, lock_args, true);
    v_lock->add_option("--pairs", pairs, "leaves, mirror, or a-b,c-d");
    v_lock->add_option("--rounds", lock_rounds, "rounds to compare");

    std::string sched_adv = "random-connected";
    std::size_t sched_n = 8;
    std::uint64_t sched_seed = 1;
    Round sched_rounds = 16;
    std::size_t sched_branches = 2;
    std::string sched_out;
    auto* sched_cmd = app.add_subcommand("schedule", "write an adversary's first rounds as a schedule file");
    sched_cmd->add_option("--adversary", sched_adv, "adversary name");
    sched_cmd->add_option("--n", sched_n, "node count")->check(CLI::PositiveNumber);
    sched_cmd->add_option("--seed", sched_seed, "seed");
    sched_cmd->add_option("--rounds", sched_rounds, "rounds")->check(CLI::PositiveNumber);
    sched_cmd->add_option("--branches", sched_branches, "branches of symmetric-tree and mirror");
    sched_cmd->add_option("--out", sched_out, "output file (default stdout)");

    std::size_t ring_n = 3;
    auto* demo_cmd = app.add_subcommand("demo-ring", "ring indistinguishability with a silence-based counter");
    demo_cmd->add_option("--n", ring_n, "ring size")->check(CLI::Range(3, 1000));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : exit_usage;
    }

    try {
        if (*run_cmd) {
            return cmd_run(args);
        }
        if (*sweep_cmd) {
            return cmd_sweep(args, n_list, seeds, fit);
        }
        if (*v_lemma) {
            return verify_schedule("lemma1", schedule_path, k);
        }
        if (*v_conn) {
            return verify_schedule("connectivity", schedule_path, k);
        }
        if (*v_hd) {
            return verify_schedule("high-dynamicity", schedule_path, k);
        }
        if (*v_lock) {
            return verify_lockstep(lock_args, pairs, lock_rounds);
        }
        if (*sched_cmd) {
            auto adversary = make_adversary(sched_adv, {sched_n, sched_seed, sched_branches});
            const DynamicSchedule s = materialize(*adversary, sched_rounds, sched_seed);
            if (sched_out.empty()) {
                std::cout << schedule_to_text(s);
            } else {
                write_schedule(sched_out, s);
            }
            return exit_holds;
        }
        if (*demo_cmd) {
            const RingDemo d = ring_indistinguishability_demo(SilenceCounter{}, ring_n);
            std::cout << "ring(" << d.n << "): first halt in round " << d.k << " with output " << d.output_n.to_string()
                      << "\nring(" << d.other_size << "): first halt in round " << d.other_halt_round << " with output "
                      << d.output_other.to_string() << "\n"
                      << (d.same_output() ? "same output on both rings" : "outputs differ") << '\n';
            return d.same_output() ? exit_holds : exit_fails;
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_data;
    } catch (const ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return exit_usage;
    } catch (const RangeError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return exit_usage;
}
