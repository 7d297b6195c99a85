#pragma once

#include "cosim/netsim/topology.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace cosim::netsim {

/// Parameters of the bundled cellular access network: every client hangs off
/// one of `cells` base stations, and the base stations meet at a router that
/// also connects a packet gateway.
struct HybridNetworkParams {
    std::size_t clients = 50;
    std::size_t cells = 2;
    std::int64_t access_delay_us = 15'000;
    DataRate access_rate = DataRate::bps(1'000'000);
    std::int64_t core_delay_us = 2;
    DataRate core_rate = DataRate::bps(10'000'000'000);
    /// "block": first clients/cells clients on cell 0 and so on;
    /// "round_robin": client i on cell i % cells.
    std::string cell_assignment = "block";
    /// Per-client access link propagation delay, e.g. for devices far from
    /// their base station. Keys are client node ids.
    std::map<std::string, std::int64_t> access_delay_overrides_us;
};

/// Nodes: client<i>, enb<c>, router0, pgw. Simulator client<i> binds to
/// node client<i>.
NetworkDescription hybrid_lte_network(const HybridNetworkParams& params);

std::size_t cell_of(const HybridNetworkParams& params, std::size_t client);

}  // namespace cosim::netsim
