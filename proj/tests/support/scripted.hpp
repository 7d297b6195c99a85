#pragma once

#include "cosim/orchestrator/simulator.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace testsupport {

using cosim::kernel::SimTime;
using cosim::orchestrator::InputDatum;
using cosim::orchestrator::Message;
using cosim::orchestrator::StepResult;

/// Simulator driven by a fixed script of self-scheduled steps. Steps caused
/// by input only record what arrived.
class ScriptedSim final : public cosim::orchestrator::Simulator {
public:
    struct Action {
        std::vector<std::pair<std::string, std::string>> sends;  // receiver, payload
        std::vector<double> values;
        std::optional<SimTime> next;
    };
    struct Step {
        SimTime now;
        SimTime max_advance;
        std::vector<Message> received;
        std::size_t values = 0;
    };

    ScriptedSim(std::optional<SimTime> first, std::map<SimTime, Action> script)
        : first_(first), planned_(first), script_(std::move(script))
    {
    }

    [[nodiscard]] std::vector<std::string> entities() const override { return {"e"}; }
    [[nodiscard]] std::optional<SimTime> first_step() const override { return first_; }

    StepResult step(SimTime now, std::span<const InputDatum> inputs, SimTime max_advance) override
    {
        Step rec{now, max_advance, {}, 0};
        for (const auto& in : inputs) {
            if (const auto* msgs = std::get_if<std::vector<Message>>(&in.value)) {
                rec.received.insert(rec.received.end(), msgs->begin(), msgs->end());
            } else {
                ++rec.values;
            }
        }
        log.push_back(std::move(rec));

        StepResult r;
        if (planned_ && *planned_ == now) {
            const auto it = script_.find(now);
            planned_.reset();
            if (it != script_.end()) {
                std::vector<Message> out;
                for (const auto& [to, payload] : it->second.sends) {
                    out.push_back({"", "", to, payload});
                }
                if (!out.empty()) r.outputs.push_back({"e", "out", std::move(out)});
                for (double v : it->second.values) r.outputs.push_back({"e", "v", v});
                planned_ = it->second.next;
            }
        }
        r.next_step = planned_;
        return r;
    }

    std::vector<Step> log;

private:
    std::optional<SimTime> first_;
    std::optional<SimTime> planned_;
    std::map<SimTime, Action> script_;
};

}  // namespace testsupport
