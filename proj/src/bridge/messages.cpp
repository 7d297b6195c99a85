#include "cosim/bridge/messages.hpp"

#include <string>

namespace cosim::bridge {

std::string_view to_string(SyncKind kind)
{
    switch (kind) {
    case SyncKind::max_advance:
        return "MAX_ADVANCE";
    case SyncKind::waiting:
        return "WAITING";
    case SyncKind::transmission_error:
        return "TRANSMISSION_ERROR";
    }
    return "UNKNOWN";
}

bool may_originate(Origin origin, const ProtocolMessage& message)
{
    if (const auto* sync = std::get_if<SynchronizationMessage>(&message)) {
        return sync->kind == SyncKind::waiting || origin == Origin::netsim;
    }
    const bool from_orchestrator = std::holds_alternative<InitialMessage>(message) ||
                                   std::holds_alternative<InfoMessage>(message) ||
                                   std::holds_alternative<InfrastructureMessage>(message);
    return from_orchestrator == (origin == Origin::orchestrator);
}

namespace {

std::string us(SimTime t) { return std::to_string(t.micros()) + "us"; }

}  // namespace

std::string describe(const ProtocolMessage& message)
{
    struct Visitor {
        std::string operator()(const InitialMessage& m) const
        {
            return "INITIAL(until=" + us(m.until) + ",waiting=" + us(m.waiting_period) +
                   ",v" + std::to_string(m.protocol_version) + ")";
        }
        std::string operator()(const InfoMessage& m) const
        {
            return "INFO(" + m.msg_id + "," + m.sender + "->" + m.receiver + "," +
                   us(m.sim_time) + ",max_advance=" + us(m.max_advance) + ")";
        }
        std::string operator()(const SynchronizationMessage& m) const
        {
            std::string out = std::string(to_string(m.kind)) + "(" + us(m.sim_time);
            if (m.msg_id) {
                out += "," + *m.msg_id;
            }
            return out + ")";
        }
        std::string operator()(const InfrastructureMessage& m) const
        {
            return "INFRA(" + std::string(netsim::to_string(m.change.action)) + "," +
                   m.change.node + "," + us(m.change.at) + ")";
        }
        std::string operator()(const DeliveryMessage& m) const
        {
            return "DELIVERY(" + m.msg_id + "," + m.sender + "->" + m.receiver + "," +
                   us(m.delivered_at) + ")";
        }
    };
    return std::visit(Visitor{}, message);
}

}  // namespace cosim::bridge
