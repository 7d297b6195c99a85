#include "cosim/agents/agent.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <utility>

namespace cosim::agents {

using nlohmann::json;

std::string encode_knowledge(const std::map<std::string, std::int64_t>& contributions,
                             bool started)
{
    json j = {{"contributions", json::object()}, {"started", started}};
    for (const auto& [id, w] : contributions) {
        j["contributions"][id] = w;
    }
    return j.dump();
}

DecodedKnowledge decode_knowledge(std::string_view payload)
{
    json j;
    try {
        j = json::parse(payload);
    } catch (const json::parse_error& e) {
        throw MalformedPayload(std::string("knowledge payload is not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("contributions") || !j.contains("started")) {
        throw MalformedPayload("knowledge payload needs 'contributions' and 'started'");
    }
    const auto& c = j["contributions"];
    if (!c.is_object() || !j["started"].is_boolean()) {
        throw MalformedPayload("knowledge payload has wrongly typed fields");
    }
    DecodedKnowledge out;
    out.started = j["started"].get<bool>();
    for (const auto& [id, w] : c.items()) {
        if (!w.is_number_integer() || w.get<std::int64_t>() < 0) {
            throw MalformedPayload("contribution of '" + id + "' is not a non-negative integer");
        }
        out.contributions.emplace(id, w.get<std::int64_t>());
    }
    return out;
}

std::size_t perceive(AgentKnowledge& k, std::vector<ReceivedMessage>& inbox, SimTime now,
                     std::int64_t own_power, bool is_initiator)
{
    std::size_t processed = 0;
    std::vector<ReceivedMessage> later;
    for (auto& m : inbox) {
        if (m.delivered_at >= now) {
            later.push_back(std::move(m));
            continue;
        }
        for (const auto& [id, w] : decode_knowledge(m.payload).contributions) {
            k.contributions[id] = w;
        }
        k.started = true;
        ++processed;
    }
    inbox = std::move(later);
    if (is_initiator) {
        k.started = true;
    }
    if (k.started) {
        k.contributions[k.self_id] = own_power;
    }
    return processed;
}

Decision decide(const AgentKnowledge& k, const AgentConfig& cfg)
{
    Decision d;
    for (const auto& [id, w] : k.contributions) d.aggregate += w;
    d.solution_found = d.aggregate >= cfg.threshold_w;
    return d;
}

AgentSimulator::AgentSimulator(std::string self_id, std::vector<std::string> neighbors,
                               AgentConfig cfg)
    : cfg_(std::move(cfg)), neighbors_(std::move(neighbors)), next_wakeup_(cfg_.waiting_period)
{
    if (cfg_.waiting_period == SimTime::zero()) {
        throw Error("waiting period must be positive");
    }
    knowledge_.self_id = std::move(self_id);
}

std::int64_t AgentSimulator::own_power() const noexcept
{
    double sum = 0;
    for (const auto& [attr, w] : power_) sum += w;
    return std::llround(sum);
}

StepResult AgentSimulator::step(SimTime now, std::span<const InputDatum> inputs, SimTime)
{
    for (const auto& in : inputs) {
        if (const auto* w = std::get_if<double>(&in.value)) {
            power_[in.attr] = *w;
            continue;
        }
        for (const auto& msg : std::get<std::vector<orchestrator::Message>>(in.value)) {
            inbox_.push_back({msg.sender, msg.payload, in.due});
        }
    }

    StepResult result;
    if (solved_ || !next_wakeup_ || now != *next_wakeup_) {
        result.next_step = next_wakeup_;
        result.note = "buffered=" + std::to_string(inbox_.size());
        return result;
    }

    const auto processed = perceive(knowledge_, inbox_, now, own_power(),
                                    knowledge_.self_id == cfg_.initiator);
    result.note = "perceived=" + std::to_string(processed);
    if (knowledge_.started) {
        const Decision d = decide(knowledge_, cfg_);
        last_aggregate_ = d.aggregate;
        result.note += " aggregate=" + std::to_string(d.aggregate);
        if (d.solution_found) {
            solved_ = true;
            next_wakeup_.reset();
            result.solution_found = true;
            return result;
        }
        if (knowledge_.contributions != last_sent_) {
            std::vector<orchestrator::Message> out;
            const auto payload = encode_knowledge(knowledge_.contributions, true);
            for (const auto& n : neighbors_) {
                out.push_back({"", knowledge_.self_id, n, payload});
            }
            last_sent_ = knowledge_.contributions;
            result.note += " sent=" + std::to_string(out.size());
            result.outputs.push_back({"agent", "outbox", std::move(out)});
        }
    }
    next_wakeup_ = now + cfg_.waiting_period;
    result.next_step = next_wakeup_;
    return result;
}

std::optional<orchestrator::SystemState> AgentSimulator::system_state() const
{
    return orchestrator::SystemState{knowledge_.started, knowledge_.contributions};
}

PowerSourceSimulator::PowerSourceSimulator(std::map<std::string, std::int64_t> watts)
    : watts_(std::move(watts))
{
    for (const auto& [id, w] : watts_) {
        if (w < 0) {
            throw Error("power value of '" + id + "' is negative");
        }
    }
}

std::vector<std::string> PowerSourceSimulator::entities() const
{
    std::vector<std::string> out;
    for (const auto& [id, w] : watts_) out.push_back(id);
    return out;
}

StepResult PowerSourceSimulator::step(SimTime, std::span<const InputDatum>, SimTime)
{
    StepResult result;
    for (const auto& [id, w] : watts_) {
        result.outputs.push_back({id, "p_w", static_cast<double>(w)});
    }
    return result;
}

}  // namespace cosim::agents
