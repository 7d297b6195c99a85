#pragma once

#include "cosim/error.hpp"
#include "cosim/kernel/event_queue.hpp"
#include "cosim/netsim/topology.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cosim::netsim {

COSIM_DEFINE_ERROR(UnboundSimulator, Error);
COSIM_DEFINE_ERROR(DuplicateMessage, Error);

enum class InfraAction { disconnect, reconnect };

std::string_view to_string(InfraAction action);
InfraAction infra_action_from_string(std::string_view name);

struct InfrastructureChange {
    InfraAction action = InfraAction::disconnect;
    std::string node;
    SimTime at;

    bool operator==(const InfrastructureChange&) const = default;
};

enum class PacketStatus { in_transit, delivered, lost };

struct Packet {
    std::string msg_id;
    std::string src_sim;
    std::string dst_sim;
    std::string src_node;
    std::string dst_node;
    std::uint64_t size_bytes = 0;  // on the wire, framing included
    SimTime sent_at;
    std::optional<SimTime> delivered_at;
    PacketStatus status = PacketStatus::in_transit;
    Path path;  // fixed at send time; empty if unroutable
    SimTime min_path_delay;
};

struct PacketDelivered {
    std::string msg_id;
    SimTime at;
};
struct PacketLost {
    std::string msg_id;
    SimTime at;
};
struct SyncPointReached {
    SimTime at;
};
struct Parked {
    SimTime at;
};

/// What stopped a call to NetworkEngine::run_until.
using RunOutcome = std::variant<PacketDelivered, PacketLost, SyncPointReached, Parked>;

/// Store-and-forward packet network over a NetworkTopology.
///
/// Each directed link has its own FIFO transmitter; a base station has one
/// shared transmitter for everything it sends. A packet fully arrives at a
/// node before it is queued on the next link. Connectivity is checked at
/// every hop event against the rest of the packet's fixed path.
class NetworkEngine {
public:
    explicit NetworkEngine(NetworkTopology topology);

    [[nodiscard]] SimTime now() const noexcept { return clock_; }
    [[nodiscard]] const NetworkTopology& topology() const noexcept { return topology_; }

    /// Schedules the application-level send of a message between two bound
    /// simulators. Routing is resolved when the send event fires.
    const std::string& send_packet(std::string msg_id, std::string_view src_sim,
                                   std::string_view dst_sim, std::uint64_t payload_bytes,
                                   SimTime at);

    /// Schedules a connectivity flip at change.at.
    void apply_infrastructure_change(const InfrastructureChange& change);

    /// Replaces any pending synchronization point with one at `at`.
    void set_sync_point(SimTime at);
    [[nodiscard]] std::optional<SimTime> sync_point() const;

    /// Processes events with time <= bound until one produces a report.
    /// With nothing left at or before bound the engine parks at bound.
    RunOutcome run_until(SimTime bound);

    [[nodiscard]] const Packet& packet(std::string_view msg_id) const;
    [[nodiscard]] const std::vector<Packet>& packets() const noexcept { return packets_; }
    [[nodiscard]] std::size_t pending_events() const noexcept { return fes_.size(); }
    [[nodiscard]] std::uint64_t sent_count() const noexcept { return sent_; }
    [[nodiscard]] std::uint64_t delivered_count() const noexcept { return delivered_; }
    [[nodiscard]] std::uint64_t lost_count() const noexcept { return lost_; }
    [[nodiscard]] const std::vector<std::string>& notes() const noexcept { return notes_; }

private:
    struct SendEvent {
        std::size_t packet;
    };
    struct HopArrival {
        std::size_t packet;
        std::size_t hop;
    };
    struct InfraEvent {
        InfrastructureChange change;
    };
    struct SyncEvent {};
    using Payload = std::variant<SendEvent, HopArrival, InfraEvent, SyncEvent>;

    std::optional<RunOutcome> at_hop(std::size_t packet, std::size_t hop);
    RunOutcome lose(std::size_t packet);
    SimTime& transmitter(const std::string& from, const std::string& to);

    NetworkTopology topology_;
    kernel::EventQueue<Payload> fes_;
    SimTime clock_;
    std::optional<kernel::EventId> sync_event_;
    std::optional<SimTime> sync_time_;
    std::vector<Packet> packets_;
    std::map<std::string, std::size_t, std::less<>> by_msg_id_;
    std::map<std::pair<std::string, std::string>, SimTime> busy_until_;
    std::uint64_t sent_ = 0;
    std::uint64_t delivered_ = 0;
    std::uint64_t lost_ = 0;
    std::vector<std::string> notes_;
};

}  // namespace cosim::netsim
