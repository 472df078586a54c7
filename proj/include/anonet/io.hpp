#pragma once

// File formats.
//   schedule  JSON {"n": N, "rounds": [[[u, v], ...], ...], "labels": [...]}
//             where the optional labels hold, per round, per node, the
//             neighbor behind label 1, 2, ...
//   trace     JSON lines, one object per round
//   result    one JSON object summarizing a RunResult
//   metrics   tab-separated, header row first

#include "anonet/adversary.hpp"
#include "anonet/engine.hpp"
#include "anonet/error.hpp"
#include "anonet/graph.hpp"

#include "json.hpp"

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace anonet {

using Json = nlohmann::ordered_json;

struct ScheduleFile {
    DynamicSchedule schedule{1};
    std::vector<EdgeLabeling> labels;
};

inline Json schedule_to_json(const DynamicSchedule& s, const std::vector<EdgeLabeling>& labels = {})
{
    Json rounds = Json::array();
    for (Round r = 1; r <= s.length(); ++r) {
        Json edges = Json::array();
        for (const auto& [u, v] : s.at_round(r).edges()) {
            edges.push_back({u, v});
        }
        rounds.push_back(std::move(edges));
    }
    Json out = {{"n", s.node_count()}, {"rounds", std::move(rounds)}};
    if (!labels.empty()) {
        Json ls = Json::array();
        for (const auto& l : labels) {
            ls.push_back(l.by_label());
        }
        out["labels"] = std::move(ls);
    }
    return out;
}

inline ScheduleFile schedule_from_json(const Json& j)
{
    try {
        if (!j.is_object() || !j.contains("n") || !j.contains("rounds")) {
            throw ParseError("schedule needs fields n and rounds");
        }
        const auto n = j.at("n").get<std::size_t>();
        ScheduleFile f;
        f.schedule = DynamicSchedule(n);
        for (const auto& round : j.at("rounds")) {
            std::vector<std::pair<NodeId, NodeId>> edges;
            for (const auto& e : round) {
                if (!e.is_array() || e.size() != 2) {
                    throw ParseError("edge entries must be [u, v] pairs");
                }
                edges.emplace_back(e[0].get<NodeId>(), e[1].get<NodeId>());
            }
            f.schedule.push_back(InstantGraph(n, edges));
        }
        if (j.contains("labels")) {
            const auto& ls = j.at("labels");
            if (ls.size() != f.schedule.length()) {
                throw ParseError("labels must cover every round");
            }
            for (std::size_t r = 0; r < ls.size(); ++r) {
                f.labels.emplace_back(f.schedule.at_round(r + 1), ls[r].get<std::vector<std::vector<NodeId>>>());
            }
        }
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed schedule: ") + e.what());
    } catch (const ValidationError& e) {
        throw ParseError(std::string("invalid schedule: ") + e.what());
    }
}

inline std::string schedule_to_text(const DynamicSchedule& s, const std::vector<EdgeLabeling>& labels = {})
{
    return schedule_to_json(s, labels).dump() + "\n";
}

inline ScheduleFile schedule_from_text(const std::string& text)
{
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("schedule is not JSON: ") + e.what());
    }
    return schedule_from_json(j);
}

inline ScheduleFile read_schedule(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open schedule " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return schedule_from_text(buf.str());
}

inline void write_schedule(const std::string& path, const DynamicSchedule& s, const std::vector<EdgeLabeling>& labels = {})
{
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path);
    }
    out << schedule_to_text(s, labels);
}

// ---------------------------------------------------------------------------

inline Json optional_value_json(const std::optional<Value>& v)
{
    return v ? Json(v->to_string()) : Json(nullptr);
}

inline Json round_to_json(const RoundRecord& rec)
{
    Json edges = Json::array();
    for (const auto& [u, v] : rec.edges) {
        edges.push_back({u, v});
    }
    Json out = {{"round", rec.round}, {"edges", std::move(edges)}};
    if (rec.labels) {
        out["labels"] = rec.labels->by_label();
    }
    Json msgs = Json::array();
    for (const auto& m : rec.messages) {
        msgs.push_back({{"from", m.from}, {"to", m.to}, {"bits", m.bits}, {"kind", m.kinds}});
    }
    out["messages"] = std::move(msgs);
    Json digests = Json::array();
    for (const auto& d : rec.digests) {
        digests.push_back(d.hex());
    }
    out["digests"] = std::move(digests);
    Json observed = Json::array();
    for (const auto& o : rec.observed) {
        observed.push_back(optional_value_json(o));
    }
    out["observed"] = std::move(observed);
    return out;
}

inline void write_trace(std::ostream& out, const RunResult& res)
{
    for (const auto& rec : res.trace) {
        out << round_to_json(rec).dump() << '\n';
    }
}

inline Json result_to_json(const RunResult& res)
{
    Json outputs = Json::array();
    Json halts = Json::array();
    Json observed = Json::array();
    for (std::size_t u = 0; u < res.outputs.size(); ++u) {
        outputs.push_back(optional_value_json(res.outputs[u]));
        halts.push_back(res.halt_round[u] ? Json(*res.halt_round[u]) : Json(nullptr));
        observed.push_back(optional_value_json(res.final_observed[u]));
    }
    return {{"protocol", res.protocol.name},
            {"adversary", res.adversary},
            {"n", res.config.n},
            {"seed", res.config.seed},
            {"mode", to_string(res.config.mode)},
            {"max_rounds", res.config.max_rounds},
            {"halted", res.halted},
            {"rounds_executed", res.rounds_executed},
            {"outputs", std::move(outputs)},
            {"halt_round", std::move(halts)},
            {"final_observed", std::move(observed)},
            {"max_message_bits", res.max_message_bits},
            {"total_message_bits", res.total_message_bits},
            {"total_messages", res.total_messages},
            {"precondition_violation",
             res.precondition_violation ? Json(*res.precondition_violation) : Json(nullptr)}};
}

struct MetricsRow {
    std::string protocol;
    std::string adversary;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    Round rounds = 0;
    std::size_t max_bits = 0;
    std::size_t total_bits = 0;
    std::string verdict;
    std::string note;
};

inline const char* metrics_header() { return "protocol\tadversary\tn\tseed\trounds\tmax_bits\ttotal_bits\tverdict\tnote\n"; }

inline void write_metrics_row(std::ostream& out, const MetricsRow& m)
{
    out << m.protocol << '\t' << m.adversary << '\t' << m.n << '\t' << m.seed << '\t' << m.rounds << '\t'
        << m.max_bits << '\t' << m.total_bits << '\t' << m.verdict << '\t' << (m.note.empty() ? "-" : m.note)
        << '\n';
}

} // namespace anonet
