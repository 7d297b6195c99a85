#include "cosim/bridge/session.hpp"

#include <utility>

namespace cosim::bridge {

void InProcessLink::send(const ProtocolMessage& message)
{
    if (reply_) {
        throw ProtocolViolation("in-process link: previous reply was never received");
    }
    reply_ = server_.handle(message);
}

ProtocolMessage InProcessLink::receive()
{
    if (!reply_) {
        throw TransportError("in-process link: nothing to receive");
    }
    ProtocolMessage out = std::move(*reply_);
    reply_.reset();
    return out;
}

namespace {

std::string us(SimTime t) { return std::to_string(t.micros()) + "us"; }

}  // namespace

void BridgeSession::require_token(const char* what) const
{
    if (!open_ && !std::string_view(what).starts_with("INITIAL")) {
        throw ProtocolViolation(std::string(what) + " on a session that is not open");
    }
    if (closed_) {
        throw ProtocolViolation(std::string(what) + " on a closed session");
    }
    if (state_.token_holder != TokenHolder::orchestrator) {
        throw ProtocolViolation(std::string(what) + " while the netsim holds the token");
    }
}

void BridgeSession::send(ProtocolMessage message)
{
    link_.send(message);
    trace_.push_back({Origin::orchestrator, std::move(message)});
    state_.token_holder = TokenHolder::netsim;
}

void BridgeSession::open(const InitialMessage& init)
{
    if (open_ || closed_) {
        throw HandshakeFailure("session already opened");
    }
    require_token("INITIAL");
    ProtocolMessage reply;
    try {
        send(init);
        reply = await_yield();
    } catch (const HandshakeFailure&) {
        throw;
    } catch (const Error& e) {
        throw HandshakeFailure(std::string("handshake failed: ") + e.what());
    }
    const auto* ack = std::get_if<SynchronizationMessage>(&reply);
    if (ack == nullptr || ack->kind != SyncKind::waiting) {
        throw HandshakeFailure("expected WAITING acknowledgement, got " + describe(reply));
    }
    netsim_time_ = ack->sim_time;
    state_.current_bound = SimTime::zero();
    open_ = true;
}

void BridgeSession::forward_info(const InfoMessage& message)
{
    require_token("INFO");
    if (message.max_advance < message.sim_time) {
        throw ProtocolViolation("INFO " + message.msg_id + " has max_advance " +
                                us(message.max_advance) + " before sim_time " +
                                us(message.sim_time));
    }
    if (pending_info_.contains(message.msg_id)) {
        throw ProtocolViolation("INFO " + message.msg_id + " is already in flight");
    }
    send(message);
    pending_info_.emplace(message.msg_id, message);
    state_.in_flight.insert(message.msg_id);
    state_.current_bound = message.max_advance;
}

void BridgeSession::forward_infrastructure(const InfrastructureMessage& message)
{
    require_token("INFRA");
    send(message);
    pending_infra_.insert(message.change.at);
}

void BridgeSession::grant(SimTime bound)
{
    require_token("WAITING");
    send(SynchronizationMessage{SyncKind::waiting, bound, std::nullopt});
    state_.current_bound = bound;
}

ProtocolMessage BridgeSession::await_yield()
{
    if (state_.token_holder != TokenHolder::netsim) {
        throw ProtocolViolation("awaiting a netsim yield while holding the token");
    }
    ProtocolMessage reply = link_.receive();
    if (!may_originate(Origin::netsim, reply)) {
        throw ProtocolViolation("netsim sent " + describe(reply) +
                                ", which only the orchestrator may send");
    }
    trace_.push_back({Origin::netsim, reply});
    state_.token_holder = TokenHolder::orchestrator;
    return reply;
}

Integration BridgeSession::integrate(const ProtocolMessage& yield)
{
    auto check_time = [&](SimTime t, const std::string& what) {
        if (t > state_.current_bound) {
            throw ProtocolViolation(what + " at " + us(t) + " exceeds granted bound " +
                                    us(state_.current_bound));
        }
        if (t < netsim_time_) {
            throw ProtocolViolation(what + " at " + us(t) + " precedes earlier netsim report at " +
                                    us(netsim_time_));
        }
        netsim_time_ = t;
    };
    auto take = [&](const std::string& msg_id, const std::string& what) {
        auto node = pending_info_.extract(msg_id);
        if (node.empty()) {
            throw UnknownMsgId(what + " references unknown message '" + msg_id + "'");
        }
        state_.in_flight.erase(msg_id);
        return std::move(node.mapped());
    };

    Integration out;
    if (const auto* d = std::get_if<DeliveryMessage>(&yield)) {
        check_time(d->delivered_at, "DELIVERY " + d->msg_id);
        InfoMessage info = take(d->msg_id, "DELIVERY");
        if (d->delivered_at < info.sim_time) {
            throw ProtocolViolation("DELIVERY " + d->msg_id + " at " + us(d->delivered_at) +
                                    " precedes its send time " + us(info.sim_time));
        }
        if (d->sender != info.sender || d->receiver != info.receiver) {
            throw ProtocolViolation("DELIVERY " + d->msg_id + " does not match its INFO");
        }
        out.kind = Integration::Kind::deliver;
        out.time = d->delivered_at;
        out.delivery = *d;
        return out;
    }
    const auto& sync = std::get<SynchronizationMessage>(yield);
    switch (sync.kind) {
    case SyncKind::transmission_error: {
        if (!sync.msg_id) {
            throw ProtocolViolation("TRANSMISSION_ERROR without msg_id");
        }
        check_time(sync.sim_time, "TRANSMISSION_ERROR " + *sync.msg_id);
        out.kind = Integration::Kind::lose;
        out.time = sync.sim_time;
        out.lost = take(*sync.msg_id, "TRANSMISSION_ERROR");
        return out;
    }
    case SyncKind::max_advance:
        if (sync.sim_time != state_.current_bound) {
            throw ProtocolViolation("MAX_ADVANCE at " + us(sync.sim_time) +
                                    " does not match granted bound " +
                                    us(state_.current_bound));
        }
        check_time(sync.sim_time, "MAX_ADVANCE");
        out.kind = Integration::Kind::bound_reached;
        out.time = sync.sim_time;
        return out;
    case SyncKind::waiting:
        check_time(sync.sim_time, "WAITING");
        out.kind = Integration::Kind::idle;
        out.time = sync.sim_time;
        return out;
    }
    throw ProtocolViolation("unhandled yield " + describe(yield));
}

bool BridgeSession::netsim_has_work() const
{
    if (!state_.in_flight.empty() || state_.current_bound > netsim_time_) {
        return true;
    }
    return pending_infra_.upper_bound(netsim_time_) != pending_infra_.end();
}

void BridgeSession::close()
{
    if (closed_) {
        return;
    }
    require_token("close");
    if (!state_.in_flight.empty()) {
        throw ProtocolViolation("closing session with " + std::to_string(state_.in_flight.size()) +
                                " message(s) in flight");
    }
    closed_ = true;
    link_.close();
}

}  // namespace cosim::bridge
