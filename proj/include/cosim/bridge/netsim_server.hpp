#pragma once

#include "cosim/bridge/messages.hpp"
#include "cosim/error.hpp"
#include "cosim/netsim/engine.hpp"

#include <map>
#include <string>

namespace cosim::bridge {

COSIM_DEFINE_ERROR(ProtocolViolation, Error);
COSIM_DEFINE_ERROR(HandshakeFailure, Error);

/// Network-side end of the coupling. Inserts orchestrator messages into the
/// engine's event set, keeps exactly one pending synchronization point at
/// the latest granted bound, and answers every incoming message with the
/// first report the engine produces.
class NetsimServer {
public:
    explicit NetsimServer(netsim::NetworkEngine engine);

    /// Consumes one orchestrator message and returns the netsim's reply.
    ProtocolMessage handle(const ProtocolMessage& incoming);

    [[nodiscard]] const netsim::NetworkEngine& engine() const noexcept { return engine_; }
    [[nodiscard]] SimTime bound() const noexcept { return bound_; }
    [[nodiscard]] bool initialized() const noexcept { return initialized_; }

private:
    ProtocolMessage advance();
    void grant(SimTime bound);

    netsim::NetworkEngine engine_;
    bool initialized_ = false;
    InitialMessage init_;
    SimTime bound_;
    std::map<std::string, InfoMessage, std::less<>> in_flight_;
};

}  // namespace cosim::bridge
