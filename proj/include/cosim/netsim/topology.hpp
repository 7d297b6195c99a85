#pragma once

#include "cosim/error.hpp"
#include "cosim/kernel/sim_time.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cosim::netsim {

using kernel::SimTime;

COSIM_DEFINE_ERROR(MalformedTopology, Error);
COSIM_DEFINE_ERROR(UnknownNode, Error);

/// Bytes added to every packet's payload on the wire (link, network and
/// transport headers folded into one constant).
inline constexpr std::uint64_t kFramingOverheadBytes = 60;

enum class NodeKind { client, router, switch_, base_station, gateway };

std::string_view to_string(NodeKind kind);
NodeKind node_kind_from_string(std::string_view name);

struct Node {
    std::string id;
    NodeKind kind = NodeKind::client;
    bool connected = true;
};

/// Link data rate; an empty value is an ideal link (no serialization time).
struct DataRate {
    std::optional<std::uint64_t> bits_per_second;

    static DataRate ideal() { return {}; }
    static DataRate bps(std::uint64_t v) { return DataRate{v}; }
    [[nodiscard]] bool is_ideal() const { return !bits_per_second.has_value(); }
    bool operator==(const DataRate&) const = default;
};

struct Link {
    std::string a;
    std::string b;
    SimTime propagation_delay;
    DataRate data_rate;
};

struct NodeSpec {
    std::string id;
    NodeKind kind = NodeKind::client;
    bool connected = true;
};

struct LinkSpec {
    std::string a;
    std::string b;
    std::int64_t prop_delay_us = 0;
    DataRate data_rate;
};

/// Declarative network as it appears in a scenario file.
struct NetworkDescription {
    std::vector<NodeSpec> nodes;
    std::vector<LinkSpec> links;
    std::map<std::string, std::string> client_binding;  // sim_id -> node_id
};

using Path = std::vector<std::string>;

/// Time to push `size_bytes` onto the link, rounded up to whole microseconds.
/// Zero on ideal links; at least 1us on any non-ideal link for a non-empty packet.
SimTime serialization_time(const Link& link, std::uint64_t size_bytes);

/// Propagation plus serialization delay of one packet over one link.
SimTime transmission_delay(const Link& link, std::uint64_t size_bytes);

class NetworkTopology {
public:
    /// Validates and builds a topology; every node starts in its declared
    /// connectivity state. Throws MalformedTopology.
    static NetworkTopology build(const NetworkDescription& description);

    [[nodiscard]] bool has_node(std::string_view id) const;
    [[nodiscard]] const Node& node(std::string_view id) const;
    [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }
    [[nodiscard]] const std::vector<Link>& links() const { return links_; }
    [[nodiscard]] const Link& link_between(std::string_view a, std::string_view b) const;

    /// Node hosting the given simulator, if bound.
    [[nodiscard]] const std::string* binding(std::string_view sim_id) const;
    [[nodiscard]] const std::map<std::string, std::string>& client_binding() const
    {
        return client_binding_;
    }

    void set_connected(std::string_view id, bool connected);

    /// Shortest path by hop count over connected nodes. Among equally short
    /// paths the lexicographically smallest node-id sequence wins. Empty when
    /// unreachable or when either endpoint is disconnected.
    [[nodiscard]] std::optional<Path> route(std::string_view src, std::string_view dst) const;

    /// Sorted neighbor ids of a node, regardless of connectivity.
    [[nodiscard]] std::vector<std::string> neighbors(std::string_view id) const;

private:
    struct Adjacent {
        std::size_t node;
        std::size_t link;
    };

    [[nodiscard]] std::size_t index_of(std::string_view id) const;

    std::vector<Node> nodes_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::vector<Link> links_;
    std::vector<std::vector<Adjacent>> adjacency_;  // sorted by neighbor id
    std::map<std::string, std::string> client_binding_;
};

}  // namespace cosim::netsim
