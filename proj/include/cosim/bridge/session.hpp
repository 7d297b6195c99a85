#pragma once

#include "cosim/bridge/messages.hpp"
#include "cosim/bridge/netsim_server.hpp"
#include "cosim/error.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cosim::bridge {

COSIM_DEFINE_ERROR(UnknownMsgId, ProtocolViolation);
COSIM_DEFINE_ERROR(TransportError, Error);

/// Carries protocol messages to the network side and back. `send` hands the
/// token over; `receive` blocks until the netsim hands it back.
class NetsimLink {
public:
    virtual ~NetsimLink() = default;
    virtual void send(const ProtocolMessage& message) = 0;
    virtual ProtocolMessage receive() = 0;
    virtual void close() {}
};

/// Direct calls into a NetsimServer living in the same process.
class InProcessLink final : public NetsimLink {
public:
    explicit InProcessLink(NetsimServer& server) : server_(server) {}

    void send(const ProtocolMessage& message) override;
    ProtocolMessage receive() override;

private:
    NetsimServer& server_;
    std::optional<ProtocolMessage> reply_;
};

enum class TokenHolder { orchestrator, netsim };

struct BridgeState {
    TokenHolder token_holder = TokenHolder::orchestrator;
    SimTime current_bound;
    std::set<std::string> in_flight;
};

struct ProtocolRecord {
    Origin origin;
    ProtocolMessage message;

    bool operator==(const ProtocolRecord&) const = default;
};

/// What the orchestrator has to do with a netsim yield.
struct Integration {
    enum class Kind { deliver, lose, bound_reached, idle };

    Kind kind = Kind::idle;
    SimTime time;
    std::optional<DeliveryMessage> delivery;  // set for deliver
    std::optional<InfoMessage> lost;          // set for lose
};

/// Orchestrator-side end of the coupling.
///
/// Enforces strict token alternation: every orchestrator message (INITIAL,
/// INFO, INFRA or a WAITING grant) is answered by exactly one netsim message
/// before the next one may be sent. Tracks in-flight messages and checks
/// every yield against the granted bound.
class BridgeSession {
public:
    explicit BridgeSession(NetsimLink& link) : link_(link) {}

    /// Sends INITIAL and waits for the netsim's WAITING acknowledgement.
    void open(const InitialMessage& init);

    void forward_info(const InfoMessage& message);
    void forward_infrastructure(const InfrastructureMessage& message);
    /// Lets the netsim proceed up to `bound` (a WAITING from the orchestrator).
    void grant(SimTime bound);

    /// Blocks until the netsim hands the token back.
    ProtocolMessage await_yield();
    /// Validates a yield and updates the in-flight bookkeeping.
    Integration integrate(const ProtocolMessage& yield);

    /// Convenience: await_yield followed by integrate.
    Integration exchange_reply() { return integrate(await_yield()); }

    /// Ends the session. Requires the token and an empty in-flight set.
    void close();

    [[nodiscard]] bool is_open() const noexcept { return open_; }
    [[nodiscard]] const BridgeState& state() const noexcept { return state_; }
    [[nodiscard]] const std::vector<ProtocolRecord>& trace() const noexcept { return trace_; }
    /// Time of the last netsim yield; the network clock as far as we know.
    [[nodiscard]] SimTime netsim_time() const noexcept { return netsim_time_; }
    /// True while the network still has something to run towards: messages
    /// in flight, a granted bound not yet reached, or infrastructure changes
    /// scheduled after its clock.
    [[nodiscard]] bool netsim_has_work() const;

private:
    void send(ProtocolMessage message);
    void require_token(const char* what) const;

    NetsimLink& link_;
    BridgeState state_;
    bool open_ = false;
    bool closed_ = false;
    SimTime netsim_time_;
    std::map<std::string, InfoMessage, std::less<>> pending_info_;
    std::multiset<SimTime> pending_infra_;
    std::vector<ProtocolRecord> trace_;
};

}  // namespace cosim::bridge
