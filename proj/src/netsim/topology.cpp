#include "cosim/netsim/topology.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <set>

namespace cosim::netsim {

std::string_view to_string(NodeKind kind)
{
    switch (kind) {
    case NodeKind::client:
        return "client";
    case NodeKind::router:
        return "router";
    case NodeKind::switch_:
        return "switch";
    case NodeKind::base_station:
        return "base_station";
    case NodeKind::gateway:
        return "gateway";
    }
    return "unknown";
}

NodeKind node_kind_from_string(std::string_view name)
{
    if (name == "client") return NodeKind::client;
    if (name == "router") return NodeKind::router;
    if (name == "switch") return NodeKind::switch_;
    if (name == "base_station") return NodeKind::base_station;
    if (name == "gateway") return NodeKind::gateway;
    throw MalformedTopology("unknown node kind '" + std::string(name) + "'");
}

SimTime serialization_time(const Link& link, std::uint64_t size_bytes)
{
    if (link.data_rate.is_ideal() || size_bytes == 0) {
        return SimTime::zero();
    }
    const auto rate = static_cast<unsigned __int128>(*link.data_rate.bits_per_second);
    const unsigned __int128 scaled = static_cast<unsigned __int128>(size_bytes) * 8u * 1'000'000u;
    const unsigned __int128 micros = (scaled + rate - 1) / rate;
    if (micros > std::numeric_limits<std::uint64_t>::max()) {
        throw kernel::TimeOverflow("serialization time overflows 64-bit microseconds");
    }
    return SimTime(static_cast<std::uint64_t>(micros));
}

SimTime transmission_delay(const Link& link, std::uint64_t size_bytes)
{
    return link.propagation_delay + serialization_time(link, size_bytes);
}

NetworkTopology NetworkTopology::build(const NetworkDescription& description)
{
    NetworkTopology topo;
    for (const auto& spec : description.nodes) {
        if (spec.id.empty()) {
            throw MalformedTopology("node with empty id");
        }
        if (topo.index_.contains(spec.id)) {
            throw MalformedTopology("duplicate node id '" + spec.id + "'");
        }
        topo.index_.emplace(spec.id, topo.nodes_.size());
        topo.nodes_.push_back(Node{spec.id, spec.kind, spec.connected});
    }
    topo.adjacency_.resize(topo.nodes_.size());

    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& spec : description.links) {
        if (!topo.index_.contains(spec.a) || !topo.index_.contains(spec.b)) {
            throw MalformedTopology("link " + spec.a + "<->" + spec.b +
                                    " references an undeclared node");
        }
        if (spec.a == spec.b) {
            throw MalformedTopology("self-link on node '" + spec.a + "'");
        }
        if (spec.prop_delay_us < 0) {
            throw MalformedTopology("link " + spec.a + "<->" + spec.b +
                                    " has negative propagation delay");
        }
        if (spec.data_rate.bits_per_second && *spec.data_rate.bits_per_second == 0) {
            throw MalformedTopology("link " + spec.a + "<->" + spec.b + " has zero data rate");
        }
        auto key = std::minmax(spec.a, spec.b);
        if (!seen.emplace(key.first, key.second).second) {
            throw MalformedTopology("duplicate link " + spec.a + "<->" + spec.b);
        }
        const std::size_t link_idx = topo.links_.size();
        topo.links_.push_back(Link{spec.a, spec.b,
                                   SimTime(static_cast<std::uint64_t>(spec.prop_delay_us)),
                                   spec.data_rate});
        const auto ia = topo.index_.at(spec.a);
        const auto ib = topo.index_.at(spec.b);
        topo.adjacency_[ia].push_back({ib, link_idx});
        topo.adjacency_[ib].push_back({ia, link_idx});
    }
    for (auto& adj : topo.adjacency_) {
        std::sort(adj.begin(), adj.end(), [&](const Adjacent& x, const Adjacent& y) {
            return topo.nodes_[x.node].id < topo.nodes_[y.node].id;
        });
    }

    std::set<std::string> bound_nodes;
    for (const auto& [sim, node_id] : description.client_binding) {
        auto it = topo.index_.find(node_id);
        if (it == topo.index_.end()) {
            throw MalformedTopology("simulator '" + sim + "' bound to undeclared node '" +
                                    node_id + "'");
        }
        if (topo.nodes_[it->second].kind != NodeKind::client) {
            throw MalformedTopology("simulator '" + sim + "' bound to non-client node '" +
                                    node_id + "'");
        }
        if (!bound_nodes.insert(node_id).second) {
            throw MalformedTopology("node '" + node_id + "' hosts more than one simulator");
        }
    }
    topo.client_binding_ = description.client_binding;
    return topo;
}

std::size_t NetworkTopology::index_of(std::string_view id) const
{
    auto it = index_.find(id);
    if (it == index_.end()) {
        throw UnknownNode("unknown node '" + std::string(id) + "'");
    }
    return it->second;
}

bool NetworkTopology::has_node(std::string_view id) const { return index_.contains(id); }

const Node& NetworkTopology::node(std::string_view id) const { return nodes_[index_of(id)]; }

const Link& NetworkTopology::link_between(std::string_view a, std::string_view b) const
{
    const auto ia = index_of(a);
    const auto ib = index_of(b);
    for (const auto& adj : adjacency_[ia]) {
        if (adj.node == ib) {
            return links_[adj.link];
        }
    }
    throw UnknownNode("no link between '" + std::string(a) + "' and '" + std::string(b) + "'");
}

const std::string* NetworkTopology::binding(std::string_view sim_id) const
{
    auto it = client_binding_.find(std::string(sim_id));
    return it == client_binding_.end() ? nullptr : &it->second;
}

void NetworkTopology::set_connected(std::string_view id, bool connected)
{
    nodes_[index_of(id)].connected = connected;
}

std::vector<std::string> NetworkTopology::neighbors(std::string_view id) const
{
    std::vector<std::string> out;
    for (const auto& adj : adjacency_[index_of(id)]) {
        out.push_back(nodes_[adj.node].id);
    }
    return out;
}

std::optional<Path> NetworkTopology::route(std::string_view src, std::string_view dst) const
{
    const auto is = index_of(src);
    const auto id = index_of(dst);
    if (!nodes_[is].connected || !nodes_[id].connected) {
        return std::nullopt;
    }
    if (is == id) {
        return Path{nodes_[is].id};
    }

    // Hop distances to dst over connected nodes, then walk greedily from src
    // taking the smallest-id neighbor that is one hop closer.
    constexpr auto kUnreached = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> dist(nodes_.size(), kUnreached);
    std::deque<std::size_t> frontier{id};
    dist[id] = 0;
    while (!frontier.empty()) {
        const auto u = frontier.front();
        frontier.pop_front();
        for (const auto& adj : adjacency_[u]) {
            if (nodes_[adj.node].connected && dist[adj.node] == kUnreached) {
                dist[adj.node] = dist[u] + 1;
                frontier.push_back(adj.node);
            }
        }
    }
    if (dist[is] == kUnreached) {
        return std::nullopt;
    }

    Path path{nodes_[is].id};
    auto u = is;
    while (u != id) {
        for (const auto& adj : adjacency_[u]) {
            if (dist[adj.node] != kUnreached && dist[adj.node] + 1 == dist[u]) {
                u = adj.node;
                break;
            }
        }
        path.push_back(nodes_[u].id);
    }
    return path;
}

}  // namespace cosim::netsim
