#include "cosim/orchestrator/orchestrator.hpp"

#include <algorithm>
#include <deque>
#include <utility>

namespace cosim::orchestrator {

std::string_view to_string(SimulatorKind kind)
{
    switch (kind) {
    case SimulatorKind::agent:
        return "agent";
    case SimulatorKind::power_source:
        return "power_source";
    case SimulatorKind::comm_bridge:
        return "comm_bridge";
    }
    return "unknown";
}

std::string_view to_string(TraceKind kind)
{
    switch (kind) {
    case TraceKind::step:
        return "step";
    case TraceKind::send:
        return "send";
    case TraceKind::deliver:
        return "deliver";
    case TraceKind::lose:
        return "lose";
    case TraceKind::sync:
        return "sync";
    case TraceKind::infra:
        return "infra";
    case TraceKind::solve:
        return "solve";
    }
    return "unknown";
}

namespace {

std::string us(SimTime t) { return std::to_string(t.micros()); }

}  // namespace

Orchestrator::Entry& Orchestrator::entry(std::string_view sim_id)
{
    auto it = sims_.find(sim_id);
    if (it == sims_.end()) {
        throw UnknownEndpoint("unknown simulator '" + std::string(sim_id) + "'");
    }
    return it->second;
}

const Orchestrator::Entry& Orchestrator::entry(std::string_view sim_id) const
{
    auto it = sims_.find(sim_id);
    if (it == sims_.end()) {
        throw UnknownEndpoint("unknown simulator '" + std::string(sim_id) + "'");
    }
    return it->second;
}

const SimulatorHandle& Orchestrator::handle(std::string_view sim_id) const
{
    return entry(sim_id).handle;
}

const Simulator* Orchestrator::model(std::string_view sim_id) const
{
    return entry(sim_id).model.get();
}

const SimulatorHandle& Orchestrator::register_simulator(std::string sim_id, SimulatorKind kind,
                                                        std::unique_ptr<Simulator> model)
{
    if (running_) {
        throw Error("cannot register simulators after the run started");
    }
    if (!model) {
        throw Error("simulator '" + sim_id + "' has no model");
    }
    if (kind == SimulatorKind::comm_bridge) {
        throw Error("use register_bridge for the communication simulator");
    }
    if (sims_.contains(sim_id)) {
        throw DuplicateSimId("simulator id '" + sim_id + "' already registered");
    }
    Entry e;
    e.handle = SimulatorHandle{sim_id, kind, SimTime::zero(), model->first_step()};
    e.entities = model->entities();
    e.model = std::move(model);
    return sims_.emplace(sim_id, std::move(e)).first->second.handle;
}

const SimulatorHandle& Orchestrator::register_bridge(std::string sim_id,
                                                     std::vector<std::string> entities,
                                                     bridge::BridgeSession& session)
{
    if (running_) {
        throw Error("cannot register simulators after the run started");
    }
    if (session_ != nullptr) {
        throw DuplicateSimId("a communication simulator is already registered");
    }
    if (sims_.contains(sim_id)) {
        throw DuplicateSimId("simulator id '" + sim_id + "' already registered");
    }
    Entry e;
    e.handle = SimulatorHandle{sim_id, SimulatorKind::comm_bridge, SimTime::zero(), std::nullopt};
    e.entities = std::move(entities);
    bridge_id_ = sim_id;
    session_ = &session;
    return sims_.emplace(sim_id, std::move(e)).first->second.handle;
}

void Orchestrator::connect(Connection connection)
{
    if (running_) {
        throw Error("cannot connect simulators after the run started");
    }
    auto check = [&](const Endpoint& ep) {
        auto it = sims_.find(ep.sim_id);
        if (it == sims_.end()) {
            throw UnknownEndpoint("connection references unregistered simulator '" + ep.sim_id +
                                  "'");
        }
        const auto& ents = it->second.entities;
        if (std::find(ents.begin(), ents.end(), ep.entity) == ents.end()) {
            throw UnknownEndpoint("simulator '" + ep.sim_id + "' has no entity '" + ep.entity +
                                  "'");
        }
    };
    check(connection.src);
    check(connection.dst);
    if (connection.src.sim_id == connection.dst.sim_id) {
        throw UnknownEndpoint("connection from '" + connection.src.sim_id + "' to itself");
    }
    connections_.push_back(std::move(connection));
}

void Orchestrator::add_infrastructure_change(netsim::InfrastructureChange change)
{
    infra_changes_.push_back(std::move(change));
}

void Orchestrator::advance_clock_to(SimTime t)
{
    if (t < clock_) {
        throw ClockRegression("clock regression: " + us(t) + "us < " + us(clock_) + "us");
    }
    clock_ = t;
}

void Orchestrator::compute_upstream()
{
    std::map<std::string, std::set<std::string>> feeders;
    for (const auto& c : connections_) {
        feeders[c.dst.sim_id].insert(c.src.sim_id);
    }
    for (auto& [id, e] : sims_) {
        std::set<std::string> seen;
        std::deque<std::string> frontier{id};
        while (!frontier.empty()) {
            const auto cur = frontier.front();
            frontier.pop_front();
            for (const auto& f : feeders[cur]) {
                if (seen.insert(f).second) {
                    frontier.push_back(f);
                }
            }
        }
        seen.erase(id);
        e.upstream = std::move(seen);
    }
}

SimTime Orchestrator::compute_max_advance(std::string_view for_sim) const
{
    const Entry& target = entry(for_sim);
    // After termination nothing may happen past the final instant.
    if (terminated_) {
        return clock_;
    }
    std::optional<SimTime> best;
    auto consider = [&](SimTime t) {
        if (!best || t < *best) best = t;
    };
    for (const auto& id : target.upstream) {
        const Entry& e = entry(id);
        if (e.step_event) {
            consider(*e.handle.next_step);
        }
    }
    for (const auto& [t, by_sim] : pending_) {
        for (const auto& [sim, _] : by_sim) {
            if (target.upstream.contains(sim)) {
                consider(t);
                break;
            }
        }
        if (best && *best <= t) break;
    }
    SimTime result = best ? std::min(*best, end_) : end_;
    return std::max(result, clock_);
}

std::optional<SimTime> Orchestrator::next_local_time() const
{
    std::optional<SimTime> t = steps_.peek_time();
    if (!pending_.empty() && (!t || pending_.begin()->first < *t)) {
        t = pending_.begin()->first;
    }
    return t;
}

void Orchestrator::trace(SimTime t, TraceKind kind, std::string actor, std::string msg_id,
                         std::string detail)
{
    report_.trace.push_back({t, kind, std::move(actor), std::move(msg_id), std::move(detail)});
}

void Orchestrator::schedule_step(Entry& e, std::optional<SimTime> at)
{
    if (e.step_event) {
        steps_.cancel(*e.step_event);
        e.step_event.reset();
    }
    e.handle.next_step.reset();
    if (!at || terminated_ || *at >= end_) {
        return;
    }
    e.step_event = steps_.schedule(*at, e.handle.sim_id, e.handle.sim_id, clock_);
    e.handle.next_step = at;
}

void Orchestrator::enqueue_input(const std::string& dst_sim, InputDatum datum)
{
    pending_[datum.due][dst_sim].push_back(std::move(datum));
}

void Orchestrator::route_output(const Entry& from, const OutputDatum& out, SimTime t,
                                std::vector<Message>& to_bridge)
{
    const std::string source = from.handle.sim_id + "." + out.entity;
    auto matches = [&](const Connection& c) {
        return c.src.sim_id == from.handle.sim_id && c.src.entity == out.entity &&
               c.src.attr == out.attr;
    };

    if (const auto* value = std::get_if<double>(&out.value)) {
        for (const auto& c : connections_) {
            if (matches(c) && c.dst.sim_id != bridge_id_) {
                enqueue_input(c.dst.sim_id, InputDatum{c.dst.entity, c.dst.attr, source, *value, t});
            }
        }
        return;
    }

    for (const auto& msg : std::get<std::vector<Message>>(out.value)) {
        bool routed = false;
        for (const auto& c : connections_) {
            if (!matches(c)) continue;
            if (c.dst.sim_id == bridge_id_) {
                to_bridge.push_back(msg);
                routed = true;
                break;
            }
            if (c.dst.sim_id == msg.receiver) {
                report_.messages.push_back(
                    {msg.msg_id, msg.sender, msg.receiver, msg.payload.size(), t, t, {}});
                trace(t, TraceKind::send, msg.sender, msg.msg_id,
                      "to=" + msg.receiver + " size=" + std::to_string(msg.payload.size()));
                trace(t, TraceKind::deliver, msg.receiver, msg.msg_id,
                      "from=" + msg.sender + " delay_us=0");
                enqueue_input(c.dst.sim_id,
                              InputDatum{c.dst.entity, c.dst.attr, source,
                                         std::vector<Message>{msg}, t});
                routed = true;
            }
        }
        if (!routed) {
            throw UnknownEndpoint("message " + msg.msg_id + " from '" + msg.sender + "' to '" +
                                  msg.receiver + "' matches no connection");
        }
    }
}

void Orchestrator::step_simulator(Entry& e, SimTime t, std::vector<Message>& to_bridge)
{
    if (t < e.handle.local_time) {
        throw ClockRegression("simulator '" + e.handle.sim_id + "' stepped at " + us(t) +
                              "us, before its local time " + us(e.handle.local_time) + "us");
    }
    std::vector<InputDatum> inputs;
    if (auto it = pending_.find(t); it != pending_.end()) {
        if (auto node = it->second.extract(e.handle.sim_id)) {
            inputs = std::move(node.mapped());
        }
        if (it->second.empty()) {
            pending_.erase(it);
        }
    }
    if (e.step_event && e.handle.next_step == t) {
        e.step_event.reset();  // already popped by the caller
    }

    const SimTime max_advance = compute_max_advance(e.handle.sim_id);
    StepResult result = e.model->step(t, inputs, max_advance);
    e.handle.local_time = t;

    std::string detail = "inputs=" + std::to_string(inputs.size());
    if (!result.note.empty()) {
        detail += " " + result.note;
    }
    trace(t, TraceKind::step, e.handle.sim_id, "", std::move(detail));
    if (result.solution_found) {
        report_.solved.insert(e.handle.sim_id);
        trace(t, TraceKind::solve, e.handle.sim_id, "", result.note);
    }
    if (result.next_step && *result.next_step < t) {
        throw ClockRegression("simulator '" + e.handle.sim_id + "' requested a step at " +
                              us(*result.next_step) + "us, before now " + us(t) + "us");
    }
    schedule_step(e, result.next_step);

    for (auto& out : result.outputs) {
        if (auto* msgs = std::get_if<std::vector<Message>>(&out.value)) {
            for (auto& m : *msgs) {
                m.sender = e.handle.sim_id;
                m.msg_id = e.handle.sim_id + "." + std::to_string(++message_counter_[m.sender]);
            }
        }
        route_output(e, out, t, to_bridge);
    }
}

void Orchestrator::execute_time(SimTime t)
{
    advance_clock_to(t);
    while (true) {
        std::vector<Message> batch;
        bool solved_now = false;
        while (true) {
            std::set<std::string> due;
            while (steps_.peek_time() == t) {
                due.insert(steps_.pop_next()->owner);
            }
            if (auto it = pending_.find(t); it != pending_.end()) {
                for (const auto& [sim, _] : it->second) {
                    due.insert(sim);
                }
            }
            if (due.empty()) {
                break;
            }
            for (const auto& sim : due) {
                const auto before = report_.solved.size();
                step_simulator(entry(sim), t, batch);
                solved_now = solved_now || report_.solved.size() != before;
            }
        }
        if (solved_now && !terminated_) {
            terminated_ = true;
            report_.termination_time = t;
            for (auto& [id, e] : sims_) {
                schedule_step(e, std::nullopt);
            }
        }
        if (batch.empty()) {
            return;
        }
        forward_to_bridge(std::move(batch), t);
        if (clock_ != t || !pending_.contains(t)) {
            return;
        }
    }
}

void Orchestrator::forward_to_bridge(std::vector<Message> batch, SimTime t)
{
    if (session_ == nullptr) {
        throw UnknownEndpoint("messages routed to a communication simulator that is not coupled");
    }
    for (std::size_t i = 0; i < batch.size(); ++i) {
        auto& msg = batch[i];
        // Later messages of the same instant are inputs for the bridge at t.
        const SimTime max_advance =
            i + 1 < batch.size() ? t : compute_max_advance(bridge_id_);
        const std::uint64_t size = msg.payload.size();
        report_.messages.push_back({msg.msg_id, msg.sender, msg.receiver, size, t, {}, {}});
        record_index_[msg.msg_id] = report_.messages.size() - 1;
        trace(t, TraceKind::send, msg.sender, msg.msg_id,
              "to=" + msg.receiver + " size=" + std::to_string(size) +
                  " max_advance=" + us(max_advance));
        session_->forward_info(bridge::InfoMessage{msg.msg_id, msg.sender, msg.receiver, t,
                                                   max_advance, std::move(msg.payload), size});
        integrate(session_->exchange_reply());
    }
}

void Orchestrator::integrate(const bridge::Integration& in)
{
    using Kind = bridge::Integration::Kind;
    switch (in.kind) {
    case Kind::deliver: {
        const auto& d = *in.delivery;
        advance_clock_to(d.delivered_at);
        auto& rec = report_.messages.at(record_index_.at(d.msg_id));
        rec.delivered_at = d.delivered_at;
        trace(d.delivered_at, TraceKind::deliver, d.receiver, d.msg_id,
              "from=" + d.sender + " delay_us=" + us(d.delivered_at - rec.sent_at));
        auto it = std::find_if(connections_.begin(), connections_.end(), [&](const Connection& c) {
            return c.src.sim_id == bridge_id_ && c.src.entity == d.receiver &&
                   c.dst.sim_id == d.receiver;
        });
        if (it == connections_.end()) {
            throw UnknownEndpoint("no connection from '" + bridge_id_ + "." + d.receiver +
                                  "' to the receiver");
        }
        enqueue_input(d.receiver,
                      InputDatum{it->dst.entity, it->dst.attr, bridge_id_ + "." + d.receiver,
                                 std::vector<Message>{{d.msg_id, d.sender, d.receiver, d.payload}},
                                 d.delivered_at});
        return;
    }
    case Kind::lose: {
        const auto& info = *in.lost;
        auto& rec = report_.messages.at(record_index_.at(info.msg_id));
        rec.lost_at = in.time;
        trace(in.time, TraceKind::lose, info.receiver, info.msg_id,
              "from=" + info.sender + " TRANSMISSION_ERROR");
        return;
    }
    case Kind::bound_reached:
        trace(in.time, TraceKind::sync, "netsim", "", "MAX_ADVANCE");
        return;
    case Kind::idle:
        trace(in.time, TraceKind::sync, "netsim", "", "WAITING");
        return;
    }
}

SimTime Orchestrator::link_time() const
{
    return std::max(clock_, session_->netsim_time());
}

void Orchestrator::drain_network()
{
    using Kind = bridge::Integration::Kind;
    while (!session_->state().in_flight.empty()) {
        session_->grant(SimTime::max());
        trace(link_time(), TraceKind::sync, "orchestrator", "", "WAITING drain");
        const auto in = session_->exchange_reply();
        if (in.kind == Kind::deliver) {
            const auto& d = *in.delivery;
            auto& rec = report_.messages.at(record_index_.at(d.msg_id));
            rec.delivered_at = d.delivered_at;
            trace(d.delivered_at, TraceKind::deliver, d.receiver, d.msg_id,
                  "from=" + d.sender + " delay_us=" + us(d.delivered_at - rec.sent_at) +
                      " after_end");
        } else if (in.kind == Kind::lose) {
            integrate(in);
        } else if (!session_->state().in_flight.empty()) {
            throw DeadlockDetected("netsim stopped with " +
                                   std::to_string(session_->state().in_flight.size()) +
                                   " message(s) that can never be resolved");
        }
    }
}

RunReport Orchestrator::run_until(SimTime end)
{
    if (running_) {
        throw Error("run_until may only be called once");
    }
    if (sims_.empty()) {
        throw Error("no simulators registered");
    }
    running_ = true;
    end_ = end;
    report_ = RunReport{};
    if (end == SimTime::zero()) {
        report_.final_clock = clock_;
        return report_;
    }

    compute_upstream();
    for (auto& [id, e] : sims_) {
        if (e.model) {
            schedule_step(e, e.model->first_step());
        }
    }

    if (session_ != nullptr) {
        session_->open(bridge::InitialMessage{end, waiting_period_, bridge::kProtocolVersion});
        trace(clock_, TraceKind::sync, "orchestrator", "", "INITIAL");
        trace(session_->netsim_time(), TraceKind::sync, "netsim", "", "WAITING");
        for (const auto& change : infra_changes_) {
            if (change.at < clock_) {
                throw ClockRegression("infrastructure change at " + us(change.at) +
                                      "us lies in the past");
            }
            session_->forward_infrastructure(bridge::InfrastructureMessage{change});
            trace(clock_, TraceKind::infra, change.node, "",
                  std::string(netsim::to_string(change.action)) + " at_us=" + us(change.at));
            integrate(session_->exchange_reply());
        }
    }

    while (!terminated_) {
        const auto t_local = next_local_time();
        const SimTime horizon = (t_local && *t_local < end) ? *t_local : end;
        if (session_ != nullptr && session_->netsim_has_work() &&
            session_->netsim_time() < horizon) {
            session_->grant(horizon);
            trace(link_time(), TraceKind::sync, "orchestrator", "", "WAITING bound=" + us(horizon));
            integrate(session_->exchange_reply());
            continue;
        }
        if (!t_local || *t_local >= end) {
            break;
        }
        execute_time(*t_local);
    }

    if (session_ != nullptr) {
        if (terminated_) {
            // Deliveries due at the termination instant still reach their receivers.
            // A netsim already past that instant has none left to report.
            while (!session_->state().in_flight.empty() && session_->netsim_time() <= clock_) {
                session_->grant(clock_);
                trace(link_time(), TraceKind::sync, "orchestrator", "", "WAITING bound=" + us(clock_));
                const auto in = session_->exchange_reply();
                integrate(in);
                if (in.kind == bridge::Integration::Kind::deliver) {
                    execute_time(clock_);
                } else if (in.kind != bridge::Integration::Kind::lose) {
                    break;
                }
            }
        }
        drain_network();
        session_->close();
        report_.protocol = session_->trace();
    }

    report_.final_clock = clock_;
    for (const auto& [id, e] : sims_) {
        if (e.model) {
            if (auto state = e.model->system_state()) {
                report_.states.emplace(id, std::move(*state));
            }
        }
    }
    return report_;
}

}  // namespace cosim::orchestrator
