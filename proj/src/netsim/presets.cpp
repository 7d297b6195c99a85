#include "cosim/netsim/presets.hpp"

namespace cosim::netsim {

std::size_t cell_of(const HybridNetworkParams& params, std::size_t client)
{
    if (params.cell_assignment == "round_robin") {
        return client % params.cells;
    }
    if (params.cell_assignment == "block") {
        const std::size_t per_cell = (params.clients + params.cells - 1) / params.cells;
        return client / per_cell;
    }
    throw MalformedTopology("unknown cell assignment '" + params.cell_assignment + "'");
}

NetworkDescription hybrid_lte_network(const HybridNetworkParams& params)
{
    if (params.cells == 0) {
        throw MalformedTopology("hybrid network needs at least one cell");
    }
    NetworkDescription d;
    d.nodes.push_back({"pgw", NodeKind::gateway, true});
    d.nodes.push_back({"router0", NodeKind::router, true});
    d.links.push_back({"pgw", "router0", params.core_delay_us, params.core_rate});
    for (std::size_t c = 0; c < params.cells; ++c) {
        const auto enb = "enb" + std::to_string(c);
        d.nodes.push_back({enb, NodeKind::base_station, true});
        d.links.push_back({enb, "router0", params.core_delay_us, params.core_rate});
    }
    std::size_t overridden = 0;
    for (std::size_t i = 0; i < params.clients; ++i) {
        const auto id = "client" + std::to_string(i);
        auto delay = params.access_delay_us;
        if (auto it = params.access_delay_overrides_us.find(id);
            it != params.access_delay_overrides_us.end()) {
            delay = it->second;
            ++overridden;
        }
        d.nodes.push_back({id, NodeKind::client, true});
        d.links.push_back({id, "enb" + std::to_string(cell_of(params, i)), delay,
                           params.access_rate});
        d.client_binding.emplace(id, id);
    }
    if (overridden != params.access_delay_overrides_us.size()) {
        throw MalformedTopology("access delay override for a client outside the network");
    }
    return d;
}

}  // namespace cosim::netsim
