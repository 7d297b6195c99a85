#include "cosim/agents/overlay.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <random>
#include <set>

namespace cosim::agents {

namespace {

double uniform01(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n)
{
    const std::uint64_t span = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t r = rng();
    while (r >= limit) {
        r = rng();
    }
    return static_cast<std::size_t>(r % span);
}

}  // namespace

std::string agent_id(std::size_t index) { return "client" + std::to_string(index); }

std::size_t OverlayTopology::edge_count() const
{
    std::size_t sum = 0;
    for (const auto& adj : adjacency) sum += adj.size();
    return sum / 2;
}

bool OverlayTopology::is_connected() const
{
    if (adjacency.empty()) return true;
    std::vector<bool> seen(adjacency.size(), false);
    std::deque<std::size_t> frontier{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        const auto u = frontier.front();
        frontier.pop_front();
        for (auto v : adjacency[u]) {
            if (!seen[v]) {
                seen[v] = true;
                ++reached;
                frontier.push_back(v);
            }
        }
    }
    return reached == adjacency.size();
}

std::vector<std::string> OverlayTopology::neighbor_ids(std::size_t i) const
{
    std::vector<std::string> ids;
    for (auto v : adjacency.at(i)) ids.push_back(agent_id(v));
    std::sort(ids.begin(), ids.end());
    return ids;
}

OverlayTopology generate_overlay(std::size_t n, std::size_t k, double p, std::uint64_t seed)
{
    if (k < 2 || k % 2 != 0) {
        throw InvalidParams("overlay degree k must be even and >= 2, got " + std::to_string(k));
    }
    if (k >= n) {
        throw InvalidParams("overlay needs n > k (n=" + std::to_string(n) +
                            ", k=" + std::to_string(k) + ")");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidParams("rewiring probability must lie in [0, 1]");
    }

    std::vector<std::set<std::size_t>> adj(n);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t i = 1; i <= k / 2; ++i) {
            const auto v = (u + i) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }

    std::mt19937_64 rng(seed);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t i = 1; i <= k / 2; ++i) {
            const auto v = (u + i) % n;
            const bool rewire = uniform01(rng) < p;
            if (!rewire || adj[u].size() >= n - 1 || !adj[u].contains(v)) {
                continue;
            }
            std::size_t w = uniform_index(rng, n);
            while (w == u || adj[u].contains(w)) {
                w = uniform_index(rng, n);
            }
            adj[u].erase(v);
            adj[v].erase(u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }

    OverlayTopology topo{OverlayParams{n, k, p, seed}, {}};
    topo.adjacency.reserve(n);
    for (auto& s : adj) topo.adjacency.emplace_back(s.begin(), s.end());
    return topo;
}

}  // namespace cosim::agents
