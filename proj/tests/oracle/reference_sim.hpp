#pragma once

// Reference model of the aggregation scenario used to derive expected
// results. Deliberately naive and self-contained: it links nothing from the
// library and recomputes overlay order, payload sizes, paths and queueing
// on its own terms.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

struct CellularNet {
    std::size_t cells = 2;
    bool round_robin = false;
    std::int64_t access_delay_us = 15000;
    std::map<std::string, std::int64_t> access_delay_overrides_us;
    std::uint64_t access_rate_bps = 0;  // 0: ideal
    std::int64_t core_delay_us = 2;
    std::uint64_t core_rate_bps = 0;  // 0: ideal
};

struct Disconnect {
    bool reconnect = false;
    std::string node;
    std::int64_t at_us = 0;
};

struct Scenario {
    std::vector<std::vector<std::size_t>> adjacency;  // node i is "client<i>"
    std::vector<std::int64_t> power_w;
    std::int64_t waiting_us = 50000;
    std::int64_t threshold_w = 700;
    std::string initiator = "client0";
    std::int64_t until_us = 1000000;
    std::optional<CellularNet> net;  // empty: messages arrive instantly
    std::vector<Disconnect> changes;
};

struct Msg {
    std::string id;
    std::string sender;
    std::string receiver;
    std::uint64_t payload_bytes = 0;
    std::int64_t sent_us = 0;
    std::optional<std::int64_t> delivered_us;
    std::optional<std::int64_t> lost_us;
};

struct AgentState {
    bool started = false;
    std::map<std::string, std::int64_t> known;
};

struct Outcome {
    std::optional<std::int64_t> termination_us;
    std::map<std::string, AgentState> states;
    std::vector<std::string> solved;  // sorted
    std::vector<Msg> messages;        // in send order
};

Outcome simulate(const Scenario& s);

}  // namespace oracle
