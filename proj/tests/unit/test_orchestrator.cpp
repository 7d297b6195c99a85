#include "cosim/orchestrator/orchestrator.hpp"
#include "support/fig2.hpp"
#include "support/properties.hpp"
#include "support/scripted.hpp"

#include <doctest.h>

using namespace cosim::orchestrator;
using namespace cosim::kernel::literals;
using cosim::kernel::SimTime;
using testsupport::ScriptedSim;

namespace {

using Script = std::map<SimTime, ScriptedSim::Action>;

std::unique_ptr<ScriptedSim> scripted(std::optional<SimTime> first, Script script = {})
{
    return std::make_unique<ScriptedSim>(first, std::move(script));
}

// Two scripted sims exchanging messages directly, without a network.
struct Pair {
    Orchestrator orch;
    ScriptedSim* a = nullptr;
    ScriptedSim* b = nullptr;

    Pair(std::optional<SimTime> first_a, Script sa, std::optional<SimTime> first_b, Script sb)
    {
        auto pa = scripted(first_a, std::move(sa));
        auto pb = scripted(first_b, std::move(sb));
        a = pa.get();
        b = pb.get();
        orch.register_simulator("client0", SimulatorKind::agent, std::move(pa));
        orch.register_simulator("client1", SimulatorKind::agent, std::move(pb));
        orch.connect({{"client0", "e", "out"}, {"client1", "e", "in"}});
        orch.connect({{"client1", "e", "out"}, {"client0", "e", "in"}});
    }
};

cosim::bridge::NetsimServer fig2_server()
{
    return cosim::bridge::NetsimServer(
        cosim::netsim::NetworkEngine(cosim::netsim::NetworkTopology::build(testsupport::fig2_network())));
}

}  // namespace

TEST_CASE("registration and connection errors")
{
    Orchestrator o;
    o.register_simulator("a", SimulatorKind::agent, scripted(std::nullopt));
    CHECK_THROWS_AS(o.register_simulator("a", SimulatorKind::agent, scripted(std::nullopt)), DuplicateSimId);
    o.register_simulator("b", SimulatorKind::agent, scripted(std::nullopt));
    CHECK_THROWS_AS(o.connect({{"a", "e", "out"}, {"ghost", "e", "in"}}), UnknownEndpoint);
    CHECK_THROWS_AS(o.connect({{"a", "nope", "out"}, {"b", "e", "in"}}), UnknownEndpoint);
    CHECK_THROWS_AS(o.connect({{"a", "e", "out"}, {"a", "e", "in"}}), UnknownEndpoint);
    CHECK_NOTHROW(o.connect({{"a", "e", "out"}, {"b", "e", "in"}}));
    CHECK(o.handle("a").kind == SimulatorKind::agent);
    CHECK_THROWS_AS((void)o.handle("ghost"), UnknownEndpoint);
}

TEST_CASE("fifty registered agents get fifty handles")
{
    Orchestrator o;
    std::set<std::string> ids;
    for (int i = 0; i < 50; ++i) {
        ids.insert(o.register_simulator("client" + std::to_string(i), SimulatorKind::agent,
                                        scripted(std::nullopt))
                       .sim_id);
    }
    CHECK(ids.size() == 50);
}

TEST_CASE("advance_clock_to never goes back")
{
    Orchestrator o;
    o.advance_clock_to(5_ms);
    o.advance_clock_to(12_ms);
    CHECK(o.clock() == 12_ms);
    o.advance_clock_to(12_ms);
    CHECK(o.clock() == 12_ms);
    CHECK_THROWS_AS(o.advance_clock_to(3_ms), ClockRegression);
}

TEST_CASE("max_advance is the next event that can reach the simulator")
{
    Pair p(1_ms, {{1_ms, {{}, {}, 14_ms}}, {14_ms, {}}}, 5_ms, {{5_ms, {}}});
    p.orch.run_until(100_ms);
    REQUIRE(p.a->log.size() == 2);
    REQUIRE(p.b->log.size() == 1);
    CHECK(p.a->log[0].max_advance == 5_ms);   // client1 steps next at 5
    CHECK(p.b->log[0].max_advance == 14_ms);  // then client0 at 14
    CHECK(p.a->log[1].max_advance == 100_ms); // nothing left: the end
}

TEST_CASE("an isolated simulator may run to the end")
{
    Orchestrator o;
    auto s = scripted(2_ms, {{2_ms, {}}});
    auto* raw = s.get();
    o.register_simulator("solo", SimulatorKind::agent, std::move(s));
    o.register_simulator("other", SimulatorKind::agent, scripted(1_ms, {{1_ms, {{}, {}, 3_ms}}, {3_ms, {}}}));
    o.run_until(50_ms);
    REQUIRE(raw->log.size() == 1);
    CHECK(raw->log[0].max_advance == 50_ms);
}

TEST_CASE("end=0 runs nothing")
{
    Orchestrator o;
    o.register_simulator("a", SimulatorKind::agent, scripted(0_us, {{0_us, {}}}));
    const auto r = o.run_until(0_us);
    CHECK(r.trace.empty());
    CHECK(r.final_clock == 0_us);
}

TEST_CASE("direct messages arrive in the same instant")
{
    Pair p(1_ms, {{1_ms, {{{"client1", "hi"}}, {}, std::nullopt}}}, std::nullopt, {});
    const auto r = p.orch.run_until(10_ms);
    REQUIRE(p.b->log.size() == 1);
    CHECK(p.b->log[0].now == 1_ms);
    REQUIRE(p.b->log[0].received.size() == 1);
    CHECK(p.b->log[0].received[0].payload == "hi");
    CHECK(p.b->log[0].received[0].msg_id == "client0.1");
    REQUIRE(r.messages.size() == 1);
    CHECK(r.messages[0].delivered_at == 1_ms);
}

TEST_CASE("same-time steps run in sim id order")
{
    Orchestrator o;
    for (const auto* id : {"zeta", "alpha", "mid"}) {
        o.register_simulator(id, SimulatorKind::agent, scripted(3_ms, {{3_ms, {}}}));
    }
    const auto r = o.run_until(10_ms);
    std::vector<std::string> order;
    for (const auto& t : r.trace) {
        if (t.kind == TraceKind::step) order.push_back(t.actor);
    }
    CHECK(order == std::vector<std::string>{"alpha", "mid", "zeta"});
}

TEST_CASE("values flow along connections")
{
    Orchestrator o;
    auto src = scripted(0_us, {{0_us, {{}, {42.0}, std::nullopt}}});
    auto dst = scripted(std::nullopt);
    auto* d = dst.get();
    o.register_simulator("src", SimulatorKind::power_source, std::move(src));
    o.register_simulator("dst", SimulatorKind::agent, std::move(dst));
    o.connect({{"src", "e", "v"}, {"dst", "e", "vin"}});
    o.run_until(1_ms);
    REQUIRE(d->log.size() == 1);
    CHECK(d->log[0].now == 0_us);
    CHECK(d->log[0].values == 1);
}

TEST_CASE("unconnected message output is an error")
{
    Orchestrator o;
    o.register_simulator("a", SimulatorKind::agent, scripted(0_us, {{0_us, {{{"b", "x"}}, {}, std::nullopt}}}));
    o.register_simulator("b", SimulatorKind::agent, scripted(std::nullopt));
    CHECK_THROWS_AS(o.run_until(1_ms), UnknownEndpoint);
}

TEST_CASE("two-client ping over the network")
{
    auto server = fig2_server();
    cosim::bridge::InProcessLink link(server);
    const auto run = testsupport::run_fig2(link);
    const std::vector<std::string> expected = {
        "INFO(client0.1,t=1,max_advance=5)", "MAX_ADVANCE(5)", "INFO(client1.1,t=5,max_advance=14)",
        "DELIVERY(client0.1,t=8)",           "DELIVERY(client1.1,t=12)", "MAX_ADVANCE(14)"};
    CHECK(run.protocol == expected);
    CHECK(run.full_protocol.front() == "INITIAL");

    std::vector<std::pair<std::uint64_t, std::string>> steps;
    for (const auto& t : run.report.trace) {
        if (t.kind == TraceKind::step) steps.emplace_back(t.time.micros(), t.actor);
    }
    const std::vector<std::pair<std::uint64_t, std::string>> want = {
        {1000, "client0"}, {5000, "client1"}, {8000, "client1"}, {12000, "client0"}, {14000, "client0"}};
    CHECK(steps == want);
    REQUIRE(run.report.messages.size() == 2);
    CHECK(run.report.messages[0].delivered_at == 8_ms);
    CHECK(run.report.messages[1].delivered_at == 12_ms);
}

TEST_CASE("a solution stops further wakeups")
{
    struct Solver final : Simulator {
        std::vector<std::string> entities() const override { return {"e"}; }
        std::optional<SimTime> first_step() const override { return 10_ms; }
        StepResult step(SimTime now, std::span<const InputDatum>, SimTime) override
        {
            StepResult r;
            r.solution_found = now == 20_ms;
            r.next_step = now + 10_ms;
            return r;
        }
    };
    Orchestrator o;
    o.register_simulator("s", SimulatorKind::agent, std::make_unique<Solver>());
    auto other = scripted(5_ms, {{5_ms, {{}, {}, 50_ms}}, {50_ms, {}}});
    auto* raw = other.get();
    o.register_simulator("t", SimulatorKind::agent, std::move(other));
    const auto r = o.run_until(1000_ms);
    CHECK(r.termination_time == 20_ms);
    CHECK(r.solved == std::set<std::string>{"s"});
    CHECK(raw->log.size() == 1);
}

TEST_CASE("property: clock monotonicity and exactly-once delivery")
{
    const auto r = testsupport::check_clock_monotonicity(1000, 31);
    INFO(r.first_failure);
    CHECK(r.ok());
}
