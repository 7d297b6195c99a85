#pragma once

#include "cosim/agents/overlay.hpp"
#include "cosim/error.hpp"
#include "cosim/kernel/sim_time.hpp"
#include "cosim/netsim/engine.hpp"
#include "cosim/netsim/topology.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cosim::scenario {

using kernel::SimTime;

COSIM_DEFINE_ERROR(ConfigParseError, Error);

/// Invalid but well-formed configuration. `field()` names the offending
/// entry as a dotted path, e.g. "overlay.k" or "infrastructure_changes[0].node".
class ConfigValidationError : public Error {
public:
    ConfigValidationError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field))
    {
    }
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

enum class Mode { ideal, netsim_inproc, netsim_wire };

std::string_view to_string(Mode mode);
/// Accepts the config spellings and the command-line ones ("netsim", "netsim-wire").
Mode mode_from_string(std::string_view name);

struct PowerSplit {
    std::int64_t pv = 0;
    std::int64_t household = 0;

    [[nodiscard]] std::int64_t total() const { return pv + household; }
    bool operator==(const PowerSplit&) const = default;
};

struct ScenarioConfig {
    std::size_t num_agents = 0;
    SimTime until;
    SimTime waiting_period = SimTime::from_ms(50);
    std::int64_t threshold_w = 700;
    std::string initiator = "client0";
    Mode mode = Mode::netsim_inproc;
    agents::OverlayParams overlay;
    std::optional<netsim::NetworkDescription> network;
    std::map<std::string, PowerSplit> power_fixture;
    std::vector<netsim::InfrastructureChange> infrastructure_changes;
};

ScenarioConfig parse_scenario(std::string_view json_text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Re-checks cross-field invariants; parse_scenario calls this too.
void validate(const ScenarioConfig& cfg);

}  // namespace cosim::scenario
