#include "cosim/netsim/engine.hpp"

#include <algorithm>
#include <utility>

namespace cosim::netsim {

std::string_view to_string(InfraAction action)
{
    return action == InfraAction::disconnect ? "disconnect" : "reconnect";
}

InfraAction infra_action_from_string(std::string_view name)
{
    if (name == "disconnect") return InfraAction::disconnect;
    if (name == "reconnect") return InfraAction::reconnect;
    throw Error("unknown infrastructure action '" + std::string(name) + "'");
}

NetworkEngine::NetworkEngine(NetworkTopology topology) : topology_(std::move(topology)) {}

const std::string& NetworkEngine::send_packet(std::string msg_id, std::string_view src_sim,
                                              std::string_view dst_sim,
                                              std::uint64_t payload_bytes, SimTime at)
{
    const std::string* src_node = topology_.binding(src_sim);
    const std::string* dst_node = topology_.binding(dst_sim);
    if (src_node == nullptr) {
        throw UnboundSimulator("simulator '" + std::string(src_sim) + "' has no network node");
    }
    if (dst_node == nullptr) {
        throw UnboundSimulator("simulator '" + std::string(dst_sim) + "' has no network node");
    }
    if (by_msg_id_.contains(msg_id)) {
        throw DuplicateMessage("message id '" + msg_id + "' already sent");
    }

    Packet p;
    p.msg_id = std::move(msg_id);
    p.src_sim = src_sim;
    p.dst_sim = dst_sim;
    p.src_node = *src_node;
    p.dst_node = *dst_node;
    p.size_bytes = payload_bytes + kFramingOverheadBytes;
    p.sent_at = at;

    const std::size_t idx = packets_.size();
    fes_.schedule(at, p.src_node, SendEvent{idx}, clock_);
    by_msg_id_.emplace(p.msg_id, idx);
    packets_.push_back(std::move(p));
    ++sent_;
    return packets_.back().msg_id;
}

void NetworkEngine::apply_infrastructure_change(const InfrastructureChange& change)
{
    if (!topology_.has_node(change.node)) {
        throw UnknownNode("infrastructure change references unknown node '" + change.node + "'");
    }
    fes_.schedule(change.at, change.node, InfraEvent{change}, clock_);
}

void NetworkEngine::set_sync_point(SimTime at)
{
    if (sync_event_) {
        fes_.cancel(*sync_event_);
    }
    sync_event_ = fes_.schedule(at, "sync", SyncEvent{}, clock_);
    sync_time_ = at;
}

std::optional<SimTime> NetworkEngine::sync_point() const { return sync_time_; }

const Packet& NetworkEngine::packet(std::string_view msg_id) const
{
    auto it = by_msg_id_.find(msg_id);
    if (it == by_msg_id_.end()) {
        throw Error("unknown packet '" + std::string(msg_id) + "'");
    }
    return packets_[it->second];
}

SimTime& NetworkEngine::transmitter(const std::string& from, const std::string& to)
{
    if (topology_.node(from).kind == NodeKind::base_station) {
        return busy_until_[{from, std::string()}];
    }
    return busy_until_[{from, to}];
}

RunOutcome NetworkEngine::lose(std::size_t packet)
{
    auto& p = packets_[packet];
    p.status = PacketStatus::lost;
    ++lost_;
    return PacketLost{p.msg_id, clock_};
}

std::optional<RunOutcome> NetworkEngine::at_hop(std::size_t packet, std::size_t hop)
{
    auto& p = packets_[packet];
    for (std::size_t i = hop; i < p.path.size(); ++i) {
        if (!topology_.node(p.path[i]).connected) {
            return lose(packet);
        }
    }
    if (hop + 1 == p.path.size()) {
        p.status = PacketStatus::delivered;
        p.delivered_at = clock_;
        ++delivered_;
        return PacketDelivered{p.msg_id, clock_};
    }

    const auto& from = p.path[hop];
    const auto& to = p.path[hop + 1];
    const Link& link = topology_.link_between(from, to);
    SimTime& busy = transmitter(from, to);
    const SimTime start = std::max(clock_, busy);
    busy = start + serialization_time(link, p.size_bytes);
    fes_.schedule(busy + link.propagation_delay, to, HopArrival{packet, hop + 1}, clock_);
    return std::nullopt;
}

RunOutcome NetworkEngine::run_until(SimTime bound)
{
    if (bound < clock_) {
        throw kernel::SchedulingInPast("network bound " + std::to_string(bound.micros()) +
                                       "us is before engine clock " +
                                       std::to_string(clock_.micros()) + "us");
    }
    while (true) {
        const auto next = fes_.peek_time();
        if (!next || *next > bound) {
            clock_ = bound;
            return Parked{bound};
        }
        auto ev = fes_.pop_next();
        clock_ = ev->time;

        std::optional<RunOutcome> outcome = std::visit(
            [&](auto& payload) -> std::optional<RunOutcome> {
                using T = std::decay_t<decltype(payload)>;
                if constexpr (std::is_same_v<T, SyncEvent>) {
                    sync_event_.reset();
                    sync_time_.reset();
                    return SyncPointReached{clock_};
                } else if constexpr (std::is_same_v<T, InfraEvent>) {
                    const auto& change = payload.change;
                    const bool target = change.action == InfraAction::reconnect;
                    if (topology_.node(change.node).connected == target) {
                        notes_.push_back(std::to_string(clock_.micros()) + "us: " +
                                         std::string(to_string(change.action)) + " of '" +
                                         change.node + "' is a no-op");
                    }
                    topology_.set_connected(change.node, target);
                    return std::nullopt;
                } else if constexpr (std::is_same_v<T, SendEvent>) {
                    auto& p = packets_[payload.packet];
                    auto path = topology_.route(p.src_node, p.dst_node);
                    if (!path) {
                        return lose(payload.packet);
                    }
                    SimTime min_delay;
                    for (std::size_t i = 0; i + 1 < path->size(); ++i) {
                        min_delay += transmission_delay(
                            topology_.link_between((*path)[i], (*path)[i + 1]), p.size_bytes);
                    }
                    p.path = std::move(*path);
                    p.min_path_delay = min_delay;
                    return at_hop(payload.packet, 0);
                } else {
                    return at_hop(payload.packet, payload.hop);
                }
            },
            ev->payload);
        if (outcome) {
            return *outcome;
        }
    }
}

}  // namespace cosim::netsim
