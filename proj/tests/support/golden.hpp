#pragma once

#include "cosim/scenario/config.hpp"
#include "cosim/scenario/runner.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>
#include <vector>

namespace testsupport {

inline std::string fixture_path(const std::string& name)
{
    return std::string(COSIM_FIXTURE_DIR) + "/" + name;
}

inline std::string scenario_path(const std::string& name)
{
    return std::string(COSIM_SCENARIO_DIR) + "/" + name + ".json";
}

inline nlohmann::json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return nlohmann::json::parse(in);
}

inline cosim::scenario::ScenarioConfig canonical(const std::string& name)
{
    return cosim::scenario::load_scenario(scenario_path(name));
}

/// Differences between a run and a frozen reference outcome; empty if equal.
inline std::vector<std::string> compare_with_golden(const cosim::scenario::RunResult& run,
                                                    const nlohmann::json& golden)
{
    using nlohmann::json;
    std::vector<std::string> diffs;
    const auto& rep = run.report;

    const json term = rep.termination_time ? json(rep.termination_time->micros()) : json(nullptr);
    if (term != golden["termination_us"]) {
        diffs.push_back("termination " + term.dump() + " != " + golden["termination_us"].dump());
    }
    json solved = json::array();
    for (const auto& [id, _] : run.stats.solved_states) solved.push_back(id);
    if (solved != golden["solved"]) {
        diffs.push_back("solved " + solved.dump() + " != " + golden["solved"].dump());
    }
    for (const char* key : {"messages_sent", "messages_delivered", "messages_lost"}) {
        const std::uint64_t mine = key == std::string("messages_sent") ? run.stats.messages_sent
                                   : key == std::string("messages_delivered")
                                       ? run.stats.messages_delivered
                                       : run.stats.messages_lost;
        if (json(mine) != golden[key]) {
            diffs.push_back(std::string(key) + " " + std::to_string(mine) + " != " +
                            golden[key].dump());
        }
    }
    const auto& gm = golden["messages"];
    if (gm.size() != rep.messages.size()) {
        diffs.push_back("message count " + std::to_string(rep.messages.size()) +
                        " != " + std::to_string(gm.size()));
    } else {
        for (std::size_t i = 0; i < gm.size(); ++i) {
            const auto& m = rep.messages[i];
            const json mine = {m.msg_id,
                               m.sender,
                               m.receiver,
                               m.size_bytes,
                               m.sent_at.micros(),
                               m.delivered_at ? json(m.delivered_at->micros()) : json(nullptr),
                               m.lost_at ? json(m.lost_at->micros()) : json(nullptr)};
            if (mine != gm[i]) {
                diffs.push_back("message #" + std::to_string(i) + " " + mine.dump() +
                                " != " + gm[i].dump());
            }
        }
    }
    for (const auto& [id, st] : golden["states"].items()) {
        auto it = rep.states.find(id);
        if (it == rep.states.end()) {
            diffs.push_back("no state for " + id);
            continue;
        }
        json known = json::object();
        for (const auto& [k, v] : it->second.contributions) known[k] = v;
        if (it->second.started != st["started"].get<bool>() || known != st["known"]) {
            diffs.push_back("state of " + id + " " + known.dump() + " != " + st["known"].dump());
        }
    }
    return diffs;
}

}  // namespace testsupport
