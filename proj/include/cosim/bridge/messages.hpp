#pragma once

#include "cosim/kernel/sim_time.hpp"
#include "cosim/netsim/engine.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace cosim::bridge {

using kernel::SimTime;

inline constexpr std::uint32_t kProtocolVersion = 1;

/// First message of a session: run parameters for the network side.
struct InitialMessage {
    SimTime until;
    SimTime waiting_period;
    std::uint32_t protocol_version = kProtocolVersion;

    bool operator==(const InitialMessage&) const = default;
};

/// One simulator-to-simulator message to be carried over the network,
/// together with the orchestrator's current lookahead bound.
struct InfoMessage {
    std::string msg_id;
    std::string sender;
    std::string receiver;
    SimTime sim_time;
    SimTime max_advance;
    std::string payload;  // opaque bytes
    std::uint64_t size_bytes = 0;

    bool operator==(const InfoMessage&) const = default;
};

enum class SyncKind { max_advance, waiting, transmission_error };

std::string_view to_string(SyncKind kind);

struct SynchronizationMessage {
    SyncKind kind = SyncKind::waiting;
    SimTime sim_time;
    std::optional<std::string> msg_id;

    bool operator==(const SynchronizationMessage&) const = default;
};

struct InfrastructureMessage {
    netsim::InfrastructureChange change;

    bool operator==(const InfrastructureMessage&) const = default;
};

struct DeliveryMessage {
    std::string msg_id;
    std::string sender;
    std::string receiver;
    std::string payload;
    SimTime delivered_at;

    bool operator==(const DeliveryMessage&) const = default;
};

using ProtocolMessage = std::variant<InitialMessage, InfoMessage, SynchronizationMessage,
                                     InfrastructureMessage, DeliveryMessage>;

enum class Origin { orchestrator, netsim };

/// True for message kinds the orchestrator may send. WAITING is valid from
/// either side.
bool may_originate(Origin origin, const ProtocolMessage& message);

/// Short human-readable rendering, e.g. `INFO(a,1000us,max_advance=5000us)`.
std::string describe(const ProtocolMessage& message);

}  // namespace cosim::bridge
