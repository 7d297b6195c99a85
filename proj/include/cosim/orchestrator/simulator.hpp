#pragma once

#include "cosim/kernel/sim_time.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cosim::orchestrator {

using kernel::SimTime;

enum class SimulatorKind { agent, power_source, comm_bridge };

std::string_view to_string(SimulatorKind kind);

/// Simulator-to-simulator message. `msg_id` is assigned by the orchestrator
/// when the message leaves its sender.
struct Message {
    std::string msg_id;
    std::string sender;
    std::string receiver;
    std::string payload;

    bool operator==(const Message&) const = default;
};

using Value = std::variant<double, std::vector<Message>>;

struct InputDatum {
    std::string entity;  // receiving entity
    std::string attr;
    std::string source;  // "sim.entity" of the producer
    Value value;
    SimTime due;
};

struct OutputDatum {
    std::string entity;
    std::string attr;
    Value value;
};

struct StepResult {
    std::vector<OutputDatum> outputs;
    std::optional<SimTime> next_step;
    bool solution_found = false;
    std::string note;  // free text for the event trace
};

/// An agent's view of the system: known contributions in watts.
struct SystemState {
    bool started = false;
    std::map<std::string, std::int64_t> contributions;

    bool operator==(const SystemState&) const = default;
};

/// Interface every coupled model implements.
class Simulator {
public:
    virtual ~Simulator() = default;

    [[nodiscard]] virtual std::vector<std::string> entities() const = 0;
    /// Time of the first self-scheduled step, if any.
    [[nodiscard]] virtual std::optional<SimTime> first_step() const = 0;
    /// Advances the model to `now`. `max_advance` is the earliest time at
    /// which new input could arrive from other simulators.
    virtual StepResult step(SimTime now, std::span<const InputDatum> inputs,
                            SimTime max_advance) = 0;
    [[nodiscard]] virtual std::optional<SystemState> system_state() const
    {
        return std::nullopt;
    }
};

}  // namespace cosim::orchestrator
