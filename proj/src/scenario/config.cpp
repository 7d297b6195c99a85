#include "cosim/scenario/config.hpp"

#include "cosim/netsim/presets.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace cosim::scenario {

using nlohmann::json;

std::string_view to_string(Mode mode)
{
    switch (mode) {
    case Mode::ideal:
        return "ideal";
    case Mode::netsim_inproc:
        return "netsim_inproc";
    case Mode::netsim_wire:
        return "netsim_wire";
    }
    return "unknown";
}

Mode mode_from_string(std::string_view name)
{
    if (name == "ideal") return Mode::ideal;
    if (name == "netsim_inproc" || name == "netsim") return Mode::netsim_inproc;
    if (name == "netsim_wire" || name == "netsim-wire") return Mode::netsim_wire;
    throw ConfigValidationError("mode", "unknown mode '" + std::string(name) + "'");
}

namespace {

using Fail = ConfigValidationError;

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys)
{
    for (const auto& [key, _] : obj.items()) {
        bool known = false;
        for (const char* k : keys) known = known || key == k;
        if (!known) {
            throw Fail(path.empty() ? key : path + "." + key, "unknown field");
        }
    }
}

const json& object_at(const json& j, const std::string& path)
{
    if (!j.is_object()) throw Fail(path, "expected an object");
    return j;
}

std::int64_t int_at(const json& j, const std::string& path)
{
    if (!j.is_number_integer()) throw Fail(path, "expected an integer");
    if (j.is_number_unsigned() &&
        j.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
        throw Fail(path, "value out of range");
    }
    return j.get<std::int64_t>();
}

std::int64_t non_negative(const json& j, const std::string& path)
{
    const auto v = int_at(j, path);
    if (v < 0) throw Fail(path, "must not be negative");
    return v;
}

std::string string_at(const json& j, const std::string& path)
{
    if (!j.is_string()) throw Fail(path, "expected a string");
    return j.get<std::string>();
}

netsim::DataRate rate_at(const json& j, const std::string& path)
{
    if (j.is_string() && j.get<std::string>() == "ideal") return netsim::DataRate::ideal();
    const auto v = int_at(j, path);
    if (v <= 0) throw Fail(path, "data rate must be positive or \"ideal\"");
    return netsim::DataRate::bps(static_cast<std::uint64_t>(v));
}

netsim::NetworkDescription parse_network(const json& j, std::size_t num_agents)
{
    object_at(j, "network");
    if (j.contains("preset")) {
        only_keys(j, "network",
                  {"preset", "cells", "access_delay_us", "access_rate_bps", "core_delay_us",
                   "core_rate_bps", "cell_assignment", "access_delay_overrides_us"});
        const auto preset = string_at(j["preset"], "network.preset");
        if (preset != "hybrid_lte") {
            throw Fail("network.preset", "unknown preset '" + preset + "'");
        }
        netsim::HybridNetworkParams p;
        p.clients = num_agents;
        if (j.contains("cells")) {
            p.cells = static_cast<std::size_t>(non_negative(j["cells"], "network.cells"));
            if (p.cells == 0) throw Fail("network.cells", "needs at least one cell");
        }
        if (j.contains("access_delay_us"))
            p.access_delay_us = non_negative(j["access_delay_us"], "network.access_delay_us");
        if (j.contains("access_rate_bps"))
            p.access_rate = rate_at(j["access_rate_bps"], "network.access_rate_bps");
        if (j.contains("core_delay_us"))
            p.core_delay_us = non_negative(j["core_delay_us"], "network.core_delay_us");
        if (j.contains("core_rate_bps"))
            p.core_rate = rate_at(j["core_rate_bps"], "network.core_rate_bps");
        if (j.contains("cell_assignment")) {
            p.cell_assignment = string_at(j["cell_assignment"], "network.cell_assignment");
            if (p.cell_assignment != "block" && p.cell_assignment != "round_robin") {
                throw Fail("network.cell_assignment", "expected \"block\" or \"round_robin\"");
            }
        }
        if (j.contains("access_delay_overrides_us")) {
            const auto& o = object_at(j["access_delay_overrides_us"], "network.access_delay_overrides_us");
            for (const auto& [id, v] : o.items()) {
                p.access_delay_overrides_us.emplace(
                    id, non_negative(v, "network.access_delay_overrides_us." + id));
            }
        }
        return netsim::hybrid_lte_network(p);
    }

    only_keys(j, "network", {"nodes", "links", "client_binding"});
    netsim::NetworkDescription d;
    if (!j.contains("nodes") || !j["nodes"].is_array()) {
        throw Fail("network.nodes", "expected an array");
    }
    for (std::size_t i = 0; i < j["nodes"].size(); ++i) {
        const auto path = "network.nodes[" + std::to_string(i) + "]";
        const auto& n = object_at(j["nodes"][i], path);
        only_keys(n, path, {"id", "kind", "connected"});
        netsim::NodeSpec spec;
        spec.id = string_at(n.value("id", json()), path + ".id");
        try {
            spec.kind = netsim::node_kind_from_string(string_at(n.value("kind", json()), path + ".kind"));
        } catch (const netsim::MalformedTopology& e) {
            throw Fail(path + ".kind", e.what());
        }
        if (n.contains("connected")) {
            if (!n["connected"].is_boolean()) throw Fail(path + ".connected", "expected a boolean");
            spec.connected = n["connected"].get<bool>();
        }
        d.nodes.push_back(std::move(spec));
    }
    if (!j.contains("links") || !j["links"].is_array()) {
        throw Fail("network.links", "expected an array");
    }
    for (std::size_t i = 0; i < j["links"].size(); ++i) {
        const auto path = "network.links[" + std::to_string(i) + "]";
        const auto& l = object_at(j["links"][i], path);
        only_keys(l, path, {"a", "b", "prop_delay_us", "data_rate_bps"});
        netsim::LinkSpec spec;
        spec.a = string_at(l.value("a", json()), path + ".a");
        spec.b = string_at(l.value("b", json()), path + ".b");
        spec.prop_delay_us = non_negative(l.value("prop_delay_us", json()), path + ".prop_delay_us");
        spec.data_rate = rate_at(l.value("data_rate_bps", json()), path + ".data_rate_bps");
        d.links.push_back(std::move(spec));
    }
    if (!j.contains("client_binding")) {
        throw Fail("network.client_binding", "missing");
    }
    for (const auto& [sim, node] : object_at(j["client_binding"], "network.client_binding").items()) {
        d.client_binding.emplace(sim, string_at(node, "network.client_binding." + sim));
    }
    return d;
}

PowerSplit parse_power(const json& j, const std::string& path)
{
    if (j.is_number()) {
        return PowerSplit{non_negative(j, path), 0};
    }
    object_at(j, path);
    only_keys(j, path, {"pv", "household"});
    PowerSplit s;
    if (j.contains("pv")) s.pv = non_negative(j["pv"], path + ".pv");
    if (j.contains("household")) s.household = non_negative(j["household"], path + ".household");
    return s;
}

}  // namespace

void validate(const ScenarioConfig& cfg)
{
    if (cfg.num_agents == 0) throw Fail("num_agents", "must be positive");
    if (cfg.waiting_period == SimTime::zero()) throw Fail("waiting_period_us", "must be positive");
    if (cfg.threshold_w <= 0) throw Fail("threshold_w", "must be positive");
    if (cfg.overlay.k >= cfg.num_agents) {
        throw Fail("overlay.k", "must be smaller than num_agents");
    }
    if (cfg.overlay.k < 2 || cfg.overlay.k % 2 != 0) throw Fail("overlay.k", "must be even and >= 2");
    if (!(cfg.overlay.p >= 0.0 && cfg.overlay.p <= 1.0)) throw Fail("overlay.p", "must lie in [0, 1]");

    std::set<std::string> agents;
    for (std::size_t i = 0; i < cfg.num_agents; ++i) agents.insert(agents::agent_id(i));
    if (!agents.contains(cfg.initiator)) {
        throw Fail("initiator", "'" + cfg.initiator + "' is not one of the agents");
    }
    if (cfg.power_fixture.size() != cfg.num_agents) {
        throw Fail("power_fixture", "has " + std::to_string(cfg.power_fixture.size()) +
                                        " entries for " + std::to_string(cfg.num_agents) +
                                        " agents");
    }
    for (const auto& [id, _] : cfg.power_fixture) {
        if (!agents.contains(id)) throw Fail("power_fixture." + id, "unknown agent");
    }

    if (cfg.mode != Mode::ideal && !cfg.network) {
        throw Fail("network", "required for mode " + std::string(to_string(cfg.mode)));
    }
    if (cfg.network) {
        const auto& net = *cfg.network;
        if (net.client_binding.size() != cfg.num_agents) {
            throw Fail("network.client_binding",
                       "binds " + std::to_string(net.client_binding.size()) + " simulators for " +
                           std::to_string(cfg.num_agents) + " agents");
        }
        for (const auto& [sim, node] : net.client_binding) {
            if (!agents.contains(sim)) throw Fail("network.client_binding." + sim, "unknown agent");
        }
        try {
            (void)netsim::NetworkTopology::build(net);
        } catch (const netsim::MalformedTopology& e) {
            throw Fail("network", e.what());
        }
        for (std::size_t i = 0; i < cfg.infrastructure_changes.size(); ++i) {
            const auto& c = cfg.infrastructure_changes[i];
            const bool known = std::any_of(net.nodes.begin(), net.nodes.end(),
                                           [&](const auto& n) { return n.id == c.node; });
            if (!known) {
                throw Fail("infrastructure_changes[" + std::to_string(i) + "].node",
                           "unknown node '" + c.node + "'");
            }
        }
    } else if (!cfg.infrastructure_changes.empty()) {
        throw Fail("infrastructure_changes", "need a network");
    }
}

ScenarioConfig parse_scenario(std::string_view json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigParseError(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigParseError("scenario must be a JSON object");
    only_keys(j, "",
              {"num_agents", "until_us", "waiting_period_us", "threshold_w", "initiator", "mode",
               "overlay", "network", "power_fixture", "infrastructure_changes"});

    ScenarioConfig cfg;
    if (!j.contains("num_agents")) throw Fail("num_agents", "missing");
    cfg.num_agents = static_cast<std::size_t>(non_negative(j["num_agents"], "num_agents"));
    if (!j.contains("until_us")) throw Fail("until_us", "missing");
    cfg.until = SimTime(static_cast<std::uint64_t>(non_negative(j["until_us"], "until_us")));
    if (j.contains("waiting_period_us")) {
        cfg.waiting_period = SimTime(
            static_cast<std::uint64_t>(non_negative(j["waiting_period_us"], "waiting_period_us")));
    }
    if (j.contains("threshold_w")) cfg.threshold_w = int_at(j["threshold_w"], "threshold_w");
    if (j.contains("initiator")) cfg.initiator = string_at(j["initiator"], "initiator");
    if (j.contains("mode")) cfg.mode = mode_from_string(string_at(j["mode"], "mode"));

    if (j.contains("overlay")) {
        const auto& o = object_at(j["overlay"], "overlay");
        only_keys(o, "overlay", {"k", "p", "seed"});
        if (o.contains("k")) cfg.overlay.k = static_cast<std::size_t>(non_negative(o["k"], "overlay.k"));
        if (o.contains("p")) {
            if (!o["p"].is_number()) throw Fail("overlay.p", "expected a number");
            cfg.overlay.p = o["p"].get<double>();
        }
        if (o.contains("seed")) {
            if (!o["seed"].is_number_integer() || o["seed"].get<std::int64_t>() < 0)
                throw Fail("overlay.seed", "expected a non-negative integer");
            cfg.overlay.seed = o["seed"].get<std::uint64_t>();
        }
    }
    cfg.overlay.n = cfg.num_agents;

    if (j.contains("network")) {
        try {
            cfg.network = parse_network(j["network"], cfg.num_agents);
        } catch (const netsim::MalformedTopology& e) {
            throw Fail("network", e.what());
        }
    }

    if (!j.contains("power_fixture")) throw Fail("power_fixture", "missing");
    const auto& pf = j["power_fixture"];
    if (pf.is_number() || (pf.is_object() && (pf.contains("pv") || pf.contains("household")))) {
        // One value for everybody.
        const auto split = parse_power(pf, "power_fixture");
        for (std::size_t i = 0; i < cfg.num_agents; ++i) {
            cfg.power_fixture.emplace(agents::agent_id(i), split);
        }
    } else {
        for (const auto& [id, v] : object_at(pf, "power_fixture").items()) {
            cfg.power_fixture.emplace(id, parse_power(v, "power_fixture." + id));
        }
    }

    if (j.contains("infrastructure_changes")) {
        const auto& arr = j["infrastructure_changes"];
        if (!arr.is_array()) throw Fail("infrastructure_changes", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto path = "infrastructure_changes[" + std::to_string(i) + "]";
            const auto& c = object_at(arr[i], path);
            only_keys(c, path, {"action", "node", "at_us"});
            netsim::InfrastructureChange change;
            try {
                change.action =
                    netsim::infra_action_from_string(string_at(c.value("action", json()), path + ".action"));
            } catch (const Fail&) {
                throw;
            } catch (const Error& e) {
                throw Fail(path + ".action", e.what());
            }
            change.node = string_at(c.value("node", json()), path + ".node");
            change.at = SimTime(static_cast<std::uint64_t>(non_negative(c.value("at_us", json()), path + ".at_us")));
            cfg.infrastructure_changes.push_back(std::move(change));
        }
    }

    validate(cfg);
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigParseError("cannot open scenario file " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str());
}

}  // namespace cosim::scenario
