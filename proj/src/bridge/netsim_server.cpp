#include "cosim/bridge/netsim_server.hpp"

#include <utility>

namespace cosim::bridge {

NetsimServer::NetsimServer(netsim::NetworkEngine engine) : engine_(std::move(engine)) {}

void NetsimServer::grant(SimTime bound)
{
    if (bound < engine_.now()) {
        throw ProtocolViolation("granted bound " + std::to_string(bound.micros()) +
                                "us lies before the network clock " +
                                std::to_string(engine_.now().micros()) + "us");
    }
    bound_ = bound;
    engine_.set_sync_point(bound);
}

ProtocolMessage NetsimServer::handle(const ProtocolMessage& incoming)
{
    if (!may_originate(Origin::orchestrator, incoming)) {
        throw ProtocolViolation("netsim received " + describe(incoming) +
                                ", which only the netsim may send");
    }
    if (const auto* init = std::get_if<InitialMessage>(&incoming)) {
        if (initialized_) {
            throw HandshakeFailure("INITIAL received twice");
        }
        if (init->protocol_version != kProtocolVersion) {
            throw HandshakeFailure("protocol version " + std::to_string(init->protocol_version) +
                                   " unsupported (expected " +
                                   std::to_string(kProtocolVersion) + ")");
        }
        initialized_ = true;
        init_ = *init;
        return SynchronizationMessage{SyncKind::waiting, engine_.now(), std::nullopt};
    }
    if (!initialized_) {
        throw ProtocolViolation("first message must be INITIAL, got " + describe(incoming));
    }

    if (const auto* info = std::get_if<InfoMessage>(&incoming)) {
        if (info->max_advance < info->sim_time) {
            throw ProtocolViolation("INFO " + info->msg_id + " has max_advance before sim_time");
        }
        if (info->sim_time < engine_.now()) {
            throw ProtocolViolation("INFO " + info->msg_id + " sent at " +
                                    std::to_string(info->sim_time.micros()) +
                                    "us but the network is already at " +
                                    std::to_string(engine_.now().micros()) + "us");
        }
        engine_.send_packet(info->msg_id, info->sender, info->receiver, info->size_bytes,
                            info->sim_time);
        in_flight_.emplace(info->msg_id, *info);
        grant(info->max_advance);
    } else if (const auto* infra = std::get_if<InfrastructureMessage>(&incoming)) {
        engine_.apply_infrastructure_change(infra->change);
    } else if (const auto* sync = std::get_if<SynchronizationMessage>(&incoming)) {
        grant(sync->sim_time);
    }
    return advance();
}

ProtocolMessage NetsimServer::advance()
{
    const auto outcome = engine_.run_until(bound_);
    if (const auto* d = std::get_if<netsim::PacketDelivered>(&outcome)) {
        auto node = in_flight_.extract(d->msg_id);
        const InfoMessage& info = node.mapped();
        return DeliveryMessage{info.msg_id, info.sender, info.receiver, info.payload, d->at};
    }
    if (const auto* l = std::get_if<netsim::PacketLost>(&outcome)) {
        in_flight_.erase(l->msg_id);
        return SynchronizationMessage{SyncKind::transmission_error, l->at, l->msg_id};
    }
    if (const auto* s = std::get_if<netsim::SyncPointReached>(&outcome)) {
        return SynchronizationMessage{SyncKind::max_advance, s->at, std::nullopt};
    }
    return SynchronizationMessage{SyncKind::waiting, std::get<netsim::Parked>(outcome).at,
                                  std::nullopt};
}

}  // namespace cosim::bridge
