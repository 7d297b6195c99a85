#include "cosim/scenario/runner.hpp"

#include "cosim/agents/agent.hpp"
#include "cosim/agents/overlay.hpp"
#include "cosim/bridge/transport.hpp"

#include <nlohmann/json.hpp>

#include <unistd.h>

#include <fstream>
#include <sstream>

namespace cosim::scenario {

using nlohmann::json;
using orchestrator::Connection;
using orchestrator::Orchestrator;
using orchestrator::SimulatorKind;

namespace {

constexpr const char* kBridgeId = "comm";

}  // namespace

void populate(Orchestrator& orch, const ScenarioConfig& cfg)
{
    const auto overlay = agents::generate_overlay(cfg.num_agents, cfg.overlay.k, cfg.overlay.p,
                                                  cfg.overlay.seed);
    std::map<std::string, std::int64_t> pv;
    std::map<std::string, std::int64_t> household;
    for (const auto& [id, split] : cfg.power_fixture) {
        pv.emplace(id, split.pv);
        household.emplace(id, split.household);
    }
    orch.register_simulator("household", SimulatorKind::power_source,
                            std::make_unique<agents::PowerSourceSimulator>(household));
    orch.register_simulator("pv", SimulatorKind::power_source,
                            std::make_unique<agents::PowerSourceSimulator>(pv));

    const agents::AgentConfig agent_cfg{cfg.waiting_period, cfg.threshold_w, cfg.initiator};
    for (std::size_t i = 0; i < cfg.num_agents; ++i) {
        orch.register_simulator(agents::agent_id(i), SimulatorKind::agent,
                                std::make_unique<agents::AgentSimulator>(
                                    agents::agent_id(i), overlay.neighbor_ids(i), agent_cfg));
    }
    for (std::size_t i = 0; i < cfg.num_agents; ++i) {
        const auto id = agents::agent_id(i);
        orch.connect(Connection{{"pv", id, "p_w"}, {id, "agent", "pv_w"}});
        orch.connect(Connection{{"household", id, "p_w"}, {id, "agent", "household_w"}});
    }
    orch.set_waiting_period(cfg.waiting_period);
}

namespace {

void wire_agents_direct(Orchestrator& orch, const ScenarioConfig& cfg)
{
    const auto overlay = agents::generate_overlay(cfg.num_agents, cfg.overlay.k, cfg.overlay.p,
                                                  cfg.overlay.seed);
    for (std::size_t i = 0; i < cfg.num_agents; ++i) {
        for (const auto& n : overlay.neighbor_ids(i)) {
            orch.connect(Connection{{agents::agent_id(i), "agent", "outbox"}, {n, "agent", "inbox"}});
        }
    }
}

void wire_agents_bridge(Orchestrator& orch, const ScenarioConfig& cfg, bridge::BridgeSession& session)
{
    std::vector<std::string> entities;
    for (std::size_t i = 0; i < cfg.num_agents; ++i) entities.push_back(agents::agent_id(i));
    orch.register_bridge(kBridgeId, entities, session);
    for (const auto& id : entities) {
        orch.connect(Connection{{id, "agent", "outbox"}, {kBridgeId, id, "message"}});
        orch.connect(Connection{{kBridgeId, id, "message"}, {id, "agent", "inbox"}});
    }
    for (const auto& change : cfg.infrastructure_changes) {
        orch.add_infrastructure_change(change);
    }
}

std::unique_ptr<bridge::NetsimServer> make_server(const ScenarioConfig& cfg)
{
    return std::make_unique<bridge::NetsimServer>(
        netsim::NetworkEngine(netsim::NetworkTopology::build(*cfg.network)));
}

}  // namespace

RunStats collect_stats(const orchestrator::RunReport& report, std::int64_t threshold_w)
{
    RunStats s;
    s.termination_time = report.termination_time;
    for (const auto& m : report.messages) {
        s.messages.push_back({m.msg_id, m.sender, m.receiver, m.sent_at, m.delivered_at, m.lost_at});
        ++s.messages_sent;
        if (m.delivered_at) ++s.messages_delivered;
        if (m.lost_at) ++s.messages_lost;
    }
    for (const auto& [id, state] : report.states) {
        std::int64_t sum = 0;
        for (const auto& [_, w] : state.contributions) sum += w;
        if (sum >= threshold_w) s.solved_states.emplace(id, state);
    }
    return s;
}

RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options)
{
    validate(cfg);
    Orchestrator orch;
    populate(orch, cfg);

    RunResult result;
    switch (cfg.mode) {
    case Mode::ideal:
        wire_agents_direct(orch, cfg);
        result.report = orch.run_until(cfg.until);
        break;
    case Mode::netsim_inproc: {
        auto server = make_server(cfg);
        bridge::InProcessLink link(*server);
        bridge::BridgeSession session(link);
        wire_agents_bridge(orch, cfg, session);
        result.report = orch.run_until(cfg.until);
        break;
    }
    case Mode::netsim_wire:
        if (options.netsim_command.empty()) {
            bridge::NetsimThread netsim(make_server(cfg));
            bridge::BridgeSession session(netsim.link());
            wire_agents_bridge(orch, cfg, session);
            result.report = orch.run_until(cfg.until);
            netsim.join();
        } else {
            bridge::NetsimProcess netsim(options.netsim_command);
            bridge::BridgeSession session(netsim.link());
            wire_agents_bridge(orch, cfg, session);
            result.report = orch.run_until(cfg.until);
            if (const int status = netsim.wait(); status != 0) {
                throw bridge::TransportError("netsim process exited with status " +
                                             std::to_string(status));
            }
        }
        break;
    }
    result.stats = collect_stats(result.report, cfg.threshold_w);
    return result;
}

namespace {

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

json knowledge_json(const orchestrator::SystemState& state)
{
    json j = json::object();
    for (const auto& [id, w] : state.contributions) j[id] = w;
    return j;
}

}  // namespace

std::string events_csv(const orchestrator::RunReport& report)
{
    std::ostringstream out;
    out << "seq,time_us,kind,actor,msg_id,detail\n";
    std::size_t seq = 0;
    for (const auto& e : report.trace) {
        out << seq++ << ',' << e.time.micros() << ',' << orchestrator::to_string(e.kind) << ','
            << csv_field(e.actor) << ',' << csv_field(e.msg_id) << ',' << csv_field(e.detail)
            << '\n';
    }
    return out.str();
}

std::string stats_json(const RunStats& stats)
{
    json delays = json::array();
    json losses = json::array();
    for (const auto& m : stats.messages) {
        if (const auto d = m.delay_us()) {
            delays.push_back({{"msg_id", m.msg_id},
                              {"sender", m.sender},
                              {"receiver", m.receiver},
                              {"delay_us", *d}});
        } else if (m.lost_at) {
            losses.push_back({{"msg_id", m.msg_id},
                              {"sender", m.sender},
                              {"receiver", m.receiver},
                              {"sent_at_us", m.sent_at.micros()},
                              {"lost_at_us", m.lost_at->micros()}});
        }
    }
    json j = {{"messages_sent", stats.messages_sent},
              {"messages_delivered", stats.messages_delivered},
              {"messages_lost", stats.messages_lost},
              {"termination_time_us", stats.termination_time
                                          ? json(stats.termination_time->micros())
                                          : json(nullptr)},
              {"delays", std::move(delays)},
              {"losses", std::move(losses)}};
    return j.dump(2) + "\n";
}

std::string states_json(const orchestrator::RunReport& report, std::int64_t threshold_w)
{
    json solved = json::object();
    json all = json::object();
    for (const auto& [id, state] : report.states) {
        std::int64_t sum = 0;
        for (const auto& [_, w] : state.contributions) sum += w;
        all[id] = knowledge_json(state);
        if (sum >= threshold_w) solved[id] = knowledge_json(state);
    }
    json j = {{"all", std::move(all)}, {"solved", std::move(solved)}};
    return j.dump(2) + "\n";
}

void export_results(const RunResult& result, std::int64_t threshold_w,
                    const std::filesystem::path& out_dir)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    }
    auto write = [&](const char* name, const std::string& content) {
        const auto path = out_dir / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << content;
        out.close();
        if (!out) {
            throw IoError("cannot write " + path.string());
        }
    };
    write("events.csv", events_csv(result.report));
    write("stats.json", stats_json(result.stats));
    write("states.json", states_json(result.report, threshold_w));
}

void serve_netsim_stdio(const ScenarioConfig& cfg)
{
    if (!cfg.network) {
        throw ConfigValidationError("network", "the netsim needs a network description");
    }
    auto server = make_server(cfg);
    bridge::FrameStream stream(bridge::UniqueFd(::dup(STDIN_FILENO)),
                               bridge::UniqueFd(::dup(STDOUT_FILENO)));
    bridge::serve(*server, stream);
}

}  // namespace cosim::scenario
