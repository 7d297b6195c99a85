#pragma once

#include "cosim/error.hpp"
#include "cosim/orchestrator/simulator.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cosim::agents {

using kernel::SimTime;
using orchestrator::InputDatum;
using orchestrator::StepResult;

COSIM_DEFINE_ERROR(MalformedPayload, Error);

/// What an agent knows about the system: contributions in watts.
struct AgentKnowledge {
    std::string self_id;
    bool started = false;
    std::map<std::string, std::int64_t> contributions;

    bool operator==(const AgentKnowledge&) const = default;
};

/// Negotiation payload: `{"contributions":{...},"started":bool}`, keys sorted.
std::string encode_knowledge(const std::map<std::string, std::int64_t>& contributions,
                             bool started);

struct DecodedKnowledge {
    bool started = false;
    std::map<std::string, std::int64_t> contributions;

    bool operator==(const DecodedKnowledge&) const = default;
};

DecodedKnowledge decode_knowledge(std::string_view payload);

struct AgentConfig {
    SimTime waiting_period = SimTime::from_ms(50);
    std::int64_t threshold_w = 700;
    std::string initiator = "client0";
};

struct ReceivedMessage {
    std::string sender;
    std::string payload;
    SimTime delivered_at;
};

struct Decision {
    bool solution_found = false;
    std::int64_t aggregate = 0;
};

/// Folds received knowledge into `k`. Only messages delivered strictly
/// before `now` are consumed; the rest stay in `inbox` for a later wakeup.
/// Returns how many messages were processed.
std::size_t perceive(AgentKnowledge& k, std::vector<ReceivedMessage>& inbox, SimTime now,
                     std::int64_t own_power, bool is_initiator);

Decision decide(const AgentKnowledge& k, const AgentConfig& cfg);

/// Agent simulator: buffers arriving messages and power readings, and runs
/// perceive, decide and act at every waiting-period boundary.
class AgentSimulator final : public orchestrator::Simulator {
public:
    AgentSimulator(std::string self_id, std::vector<std::string> neighbors, AgentConfig cfg);

    [[nodiscard]] std::vector<std::string> entities() const override { return {"agent"}; }
    [[nodiscard]] std::optional<SimTime> first_step() const override { return next_wakeup_; }
    StepResult step(SimTime now, std::span<const InputDatum> inputs, SimTime max_advance) override;
    [[nodiscard]] std::optional<orchestrator::SystemState> system_state() const override;

    [[nodiscard]] const AgentKnowledge& knowledge() const noexcept { return knowledge_; }
    [[nodiscard]] bool solved() const noexcept { return solved_; }
    [[nodiscard]] std::int64_t own_power() const noexcept;
    [[nodiscard]] std::int64_t last_aggregate() const noexcept { return last_aggregate_; }
    [[nodiscard]] std::size_t buffered() const noexcept { return inbox_.size(); }

private:
    AgentConfig cfg_;
    std::vector<std::string> neighbors_;
    AgentKnowledge knowledge_;
    std::map<std::string, std::int64_t> last_sent_;
    std::vector<ReceivedMessage> inbox_;
    std::map<std::string, double> power_;  // attr -> latest reading
    std::optional<SimTime> next_wakeup_;
    bool solved_ = false;
    std::int64_t last_aggregate_ = 0;
};

/// Constant power source with one entity per agent; publishes every value
/// once at t=0 under attribute "p_w".
class PowerSourceSimulator final : public orchestrator::Simulator {
public:
    explicit PowerSourceSimulator(std::map<std::string, std::int64_t> watts);

    [[nodiscard]] std::vector<std::string> entities() const override;
    [[nodiscard]] std::optional<SimTime> first_step() const override { return SimTime::zero(); }
    StepResult step(SimTime now, std::span<const InputDatum> inputs, SimTime max_advance) override;

private:
    std::map<std::string, std::int64_t> watts_;
};

}  // namespace cosim::agents
