#pragma once

#include "cosim/bridge/session.hpp"
#include "cosim/error.hpp"
#include "cosim/kernel/event_queue.hpp"
#include "cosim/netsim/engine.hpp"
#include "cosim/orchestrator/simulator.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cosim::orchestrator {

COSIM_DEFINE_ERROR(DuplicateSimId, Error);
COSIM_DEFINE_ERROR(UnknownEndpoint, Error);
COSIM_DEFINE_ERROR(ClockRegression, Error);
COSIM_DEFINE_ERROR(DeadlockDetected, Error);

struct SimulatorHandle {
    std::string sim_id;
    SimulatorKind kind = SimulatorKind::agent;
    SimTime local_time;
    std::optional<SimTime> next_step;
};

struct Endpoint {
    std::string sim_id;
    std::string entity;
    std::string attr;

    bool operator==(const Endpoint&) const = default;
};

struct Connection {
    Endpoint src;
    Endpoint dst;
};

enum class TraceKind { step, send, deliver, lose, sync, infra, solve };

std::string_view to_string(TraceKind kind);

struct TraceEntry {
    SimTime time;
    TraceKind kind = TraceKind::step;
    std::string actor;
    std::string msg_id;
    std::string detail;

    bool operator==(const TraceEntry&) const = default;
};

struct MessageRecord {
    std::string msg_id;
    std::string sender;
    std::string receiver;
    std::uint64_t size_bytes = 0;
    SimTime sent_at;
    std::optional<SimTime> delivered_at;
    std::optional<SimTime> lost_at;
};

struct RunReport {
    SimTime final_clock;
    std::optional<SimTime> termination_time;
    std::vector<TraceEntry> trace;
    std::map<std::string, SystemState> states;  // every simulator exposing one
    std::set<std::string> solved;               // solution reported at termination
    std::vector<MessageRecord> messages;        // in send order
    std::vector<bridge::ProtocolRecord> protocol;
};

/// Event-discrete master: steps simulators at the times they request or
/// when input is due, routes outputs along connections, and couples the
/// network simulator through a BridgeSession.
///
/// Simulators due at the same time step in ascending sim_id order; new
/// same-time input re-steps the receiver until the time is quiescent. Once
/// a simulator reports a solution the current time is finished and no
/// further steps are scheduled.
class Orchestrator {
public:
    Orchestrator() = default;
    Orchestrator(const Orchestrator&) = delete;
    Orchestrator& operator=(const Orchestrator&) = delete;

    const SimulatorHandle& register_simulator(std::string sim_id, SimulatorKind kind,
                                              std::unique_ptr<Simulator> model);

    /// Registers the communication simulator. Messages connected into it are
    /// forwarded to the network through `session`; deliveries come back out
    /// of the entity named after the receiver.
    const SimulatorHandle& register_bridge(std::string sim_id, std::vector<std::string> entities,
                                           bridge::BridgeSession& session);

    void connect(Connection connection);

    /// Queued for the network side; sent right after the session opens.
    void add_infrastructure_change(netsim::InfrastructureChange change);

    void set_waiting_period(SimTime period) { waiting_period_ = period; }

    [[nodiscard]] SimTime compute_max_advance(std::string_view for_sim) const;
    void advance_clock_to(SimTime t);

    RunReport run_until(SimTime end);

    [[nodiscard]] SimTime clock() const noexcept { return clock_; }
    [[nodiscard]] const SimulatorHandle& handle(std::string_view sim_id) const;
    [[nodiscard]] const Simulator* model(std::string_view sim_id) const;

private:
    struct Entry {
        SimulatorHandle handle;
        std::unique_ptr<Simulator> model;  // null for the bridge
        std::vector<std::string> entities;
        std::optional<kernel::EventId> step_event;
        std::set<std::string> upstream;  // sims whose events can reach this one
    };

    Entry& entry(std::string_view sim_id);
    const Entry& entry(std::string_view sim_id) const;
    [[nodiscard]] std::optional<SimTime> next_local_time() const;
    void compute_upstream();
    void execute_time(SimTime t);
    void step_simulator(Entry& e, SimTime t, std::vector<Message>& to_bridge);
    void route_output(const Entry& from, const OutputDatum& out, SimTime t,
                      std::vector<Message>& to_bridge);
    void forward_to_bridge(std::vector<Message> batch, SimTime t);
    void integrate(const bridge::Integration& integration);
    void schedule_step(Entry& e, std::optional<SimTime> at);
    void enqueue_input(const std::string& dst_sim, InputDatum datum);
    void trace(SimTime t, TraceKind kind, std::string actor, std::string msg_id,
               std::string detail);
    void drain_network();
    /// Latest time either side of the coupling has reached; stamps grants.
    [[nodiscard]] SimTime link_time() const;

    std::map<std::string, Entry, std::less<>> sims_;
    std::vector<Connection> connections_;
    std::vector<netsim::InfrastructureChange> infra_changes_;
    kernel::EventQueue<std::string> steps_;
    std::map<SimTime, std::map<std::string, std::vector<InputDatum>>> pending_;
    SimTime clock_;
    SimTime end_ = SimTime::max();
    SimTime waiting_period_;
    bool running_ = false;
    bool terminated_ = false;

    std::string bridge_id_;
    bridge::BridgeSession* session_ = nullptr;

    RunReport report_;
    std::map<std::string, std::size_t> record_index_;
    std::map<std::string, std::uint64_t> message_counter_;
};

}  // namespace cosim::orchestrator
