#pragma once

#include "cosim/orchestrator/orchestrator.hpp"
#include "cosim/scenario/config.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cosim::scenario {

COSIM_DEFINE_ERROR(IoError, Error);

struct MessageStat {
    std::string msg_id;
    std::string sender;
    std::string receiver;
    SimTime sent_at;
    std::optional<SimTime> delivered_at;
    std::optional<SimTime> lost_at;

    [[nodiscard]] std::optional<std::uint64_t> delay_us() const
    {
        if (!delivered_at) return std::nullopt;
        return (*delivered_at - sent_at).micros();
    }
};

struct RunStats {
    std::uint64_t messages_sent = 0;
    std::uint64_t messages_delivered = 0;
    std::uint64_t messages_lost = 0;
    std::vector<MessageStat> messages;
    std::optional<SimTime> termination_time;
    std::map<std::string, orchestrator::SystemState> solved_states;
};

struct RunOptions {
    /// Command that starts a netsim speaking the wire protocol on its stdin
    /// and stdout. Empty: wire mode runs the netsim on a thread behind a
    /// socketpair instead of a child process.
    std::vector<std::string> netsim_command;
};

struct RunResult {
    orchestrator::RunReport report;
    RunStats stats;
};

/// Builds the overlay, power sources, agents and (unless ideal) the network
/// and runs the scenario to completion in `cfg.mode`.
RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options = {});

RunStats collect_stats(const orchestrator::RunReport& report, std::int64_t threshold_w);

/// Connections and simulators for a scenario, without running it. Exposed
/// for tests that need to drive the orchestrator by hand.
void populate(orchestrator::Orchestrator& orch, const ScenarioConfig& cfg);

std::string events_csv(const orchestrator::RunReport& report);
std::string stats_json(const RunStats& stats);
std::string states_json(const orchestrator::RunReport& report, std::int64_t threshold_w);

/// Writes events.csv, stats.json and states.json into `out_dir`.
void export_results(const RunResult& result, std::int64_t threshold_w,
                    const std::filesystem::path& out_dir);

/// Netsim entry point for a spawned process: answers frames on stdin/stdout
/// for the network described in `cfg`.
void serve_netsim_stdio(const ScenarioConfig& cfg);

}  // namespace cosim::scenario
