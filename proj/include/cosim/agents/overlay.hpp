#pragma once

#include "cosim/error.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cosim::agents {

COSIM_DEFINE_ERROR(InvalidParams, Error);

struct OverlayParams {
    std::size_t n = 50;
    std::size_t k = 4;
    double p = 0.1;
    std::uint64_t seed = 42;

    bool operator==(const OverlayParams&) const = default;
};

/// Undirected agent overlay. Node i is the agent "client<i>".
struct OverlayTopology {
    OverlayParams params;
    std::vector<std::vector<std::size_t>> adjacency;  // each list sorted ascending

    [[nodiscard]] std::size_t size() const { return adjacency.size(); }
    [[nodiscard]] std::size_t edge_count() const;
    [[nodiscard]] bool is_connected() const;
    /// Neighbor agent ids of agent i, in ascending id order.
    [[nodiscard]] std::vector<std::string> neighbor_ids(std::size_t i) const;

    bool operator==(const OverlayTopology&) const = default;
};

std::string agent_id(std::size_t index);

/// Watts-Strogatz small world: a ring lattice where every node links to its
/// k nearest neighbors, after which each lattice edge (u, u+i) is visited in
/// ascending u, then i, and with probability p rewired to a uniformly drawn
/// node that is neither u nor already adjacent to u.
///
/// The generator is mt19937_64. A uniform double is the top 53 bits of one
/// draw; a uniform index uses rejection sampling, so results do not depend
/// on the standard library's distribution implementations.
OverlayTopology generate_overlay(std::size_t n, std::size_t k, double p, std::uint64_t seed);

}  // namespace cosim::agents
