#include "cosim/bridge/codec.hpp"
#include "cosim/bridge/netsim_server.hpp"
#include "cosim/bridge/session.hpp"
#include "cosim/bridge/transport.hpp"
#include "support/fig2.hpp"
#include "support/properties.hpp"

#include <doctest.h>

using namespace cosim::bridge;
using namespace cosim::kernel::literals;
using cosim::kernel::SimTime;
namespace netsim = cosim::netsim;

namespace {

NetsimServer fig2_server()
{
    return NetsimServer(netsim::NetworkEngine(netsim::NetworkTopology::build(testsupport::fig2_network())));
}

InfoMessage info(std::string id, std::string from, std::string to, SimTime t, SimTime bound)
{
    return InfoMessage{std::move(id), std::move(from), std::move(to), t, bound, "x", 1};
}

SynchronizationMessage sync(SyncKind kind, SimTime t, std::optional<std::string> id = std::nullopt)
{
    return SynchronizationMessage{kind, t, std::move(id)};
}

}  // namespace

TEST_CASE("codec round trip keeps every field")
{
    std::string payload(1024, '\0');
    for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<char>(i * 7);
    const std::vector<ProtocolMessage> samples = {
        InitialMessage{1000_ms, 50_ms, kProtocolVersion},
        InfoMessage{"client0.1", "client0", "client1", 1_ms, 5_ms, payload, payload.size()},
        sync(SyncKind::waiting, 0_us),
        sync(SyncKind::max_advance, 5_ms),
        sync(SyncKind::transmission_error, 12_ms, "client0.1"),
        InfrastructureMessage{{netsim::InfraAction::disconnect, "client1", 10_ms}},
        DeliveryMessage{"client0.1", "client0", "client1", payload, 8_ms},
    };
    for (const auto& m : samples) {
        CAPTURE(describe(m));
        CHECK(decode_frame(encode_frame(m)) == m);
        CHECK(decode_body(encode_body(m)) == m);
    }
}

TEST_CASE("frame errors")
{
    const auto frame = encode_frame(sync(SyncKind::waiting, 0_us));
    CHECK_THROWS_AS(decode_frame(std::span(frame).first(3)), FrameTooShort);
    CHECK_THROWS_AS(decode_frame(std::span(frame).first(frame.size() - 1)), FrameTooShort);
    auto trailing = frame;
    trailing.push_back('x');
    CHECK_THROWS_AS(decode_frame(trailing), FrameError);
    CHECK_THROWS_AS(decode_body(R"({"type":"HELLO"})"), UnknownType);
    CHECK_THROWS_AS(decode_body(R"({"type":"SYNC","kind":"WAITING"})"), MalformedBody);
    CHECK_THROWS_AS(decode_body(R"({"type":"SYNC","kind":"NAP","sim_time_us":0})"), MalformedBody);
    CHECK_THROWS_AS(decode_body("not json"), MalformedBody);
    CHECK_THROWS_AS(decode_body("[1,2]"), MalformedBody);
    CHECK_THROWS_AS(base64_decode("abc"), MalformedBody);
}

TEST_CASE("base64 helpers")
{
    CHECK(base64_encode("") == "");
    CHECK(base64_encode("foobar") == "Zm9vYmFy");
    CHECK(base64_decode("Zm9vYg==") == "foob");
}

TEST_CASE("frame reader splits a byte stream")
{
    auto a = encode_frame(sync(SyncKind::waiting, 1_us));
    const auto b = encode_frame(sync(SyncKind::max_advance, 2_us));
    a.insert(a.end(), b.begin(), b.end());
    FrameReader r;
    r.feed(std::span(a).first(5));
    CHECK_FALSE(r.next_body().has_value());
    r.feed(std::span(a).subspan(5));
    CHECK(decode_body(*r.next_body()) == ProtocolMessage(sync(SyncKind::waiting, 1_us)));
    CHECK(decode_body(*r.next_body()) == ProtocolMessage(sync(SyncKind::max_advance, 2_us)));
    CHECK_FALSE(r.next_body().has_value());
    CHECK(r.buffered() == 0);
}

TEST_CASE("server answers the handshake and stops at max_advance")
{
    auto server = fig2_server();
    CHECK(server.handle(InitialMessage{1000_ms, 50_ms, kProtocolVersion}) ==
          ProtocolMessage(sync(SyncKind::waiting, 0_us)));
    // Send at 1 with bound 5: the message needs until 8, so the netsim stops at 5.
    CHECK(server.handle(info("a", "client0", "client1", 1_ms, 5_ms)) ==
          ProtocolMessage(sync(SyncKind::max_advance, 5_ms)));
    CHECK(server.engine().now() == 5_ms);
    // A new INFO at 5 moves the bound to 14; the first delivery comes out at 8.
    const auto first = server.handle(info("b", "client1", "client0", 5_ms, 14_ms));
    REQUIRE(std::holds_alternative<DeliveryMessage>(first));
    CHECK(std::get<DeliveryMessage>(first).delivered_at == 8_ms);
    const auto second = server.handle(sync(SyncKind::waiting, 14_ms));
    REQUIRE(std::holds_alternative<DeliveryMessage>(second));
    CHECK(std::get<DeliveryMessage>(second).delivered_at == 12_ms);
    CHECK(server.handle(sync(SyncKind::waiting, 14_ms)) == ProtocolMessage(sync(SyncKind::max_advance, 14_ms)));
}

TEST_CASE("server reports losses as TRANSMISSION_ERROR")
{
    auto server = fig2_server();
    server.handle(InitialMessage{1000_ms, 50_ms, kProtocolVersion});
    server.handle(InfrastructureMessage{{netsim::InfraAction::disconnect, "client1", 0_us}});
    CHECK(server.handle(info("a", "client0", "client1", 1_ms, 20_ms)) ==
          ProtocolMessage(sync(SyncKind::transmission_error, 1_ms, "a")));
    CHECK_THROWS_AS(server.handle(InfrastructureMessage{{netsim::InfraAction::disconnect, "ghost", 2_ms}}),
                    netsim::UnknownNode);
}

TEST_CASE("server protocol errors")
{
    auto server = fig2_server();
    CHECK_THROWS_AS(server.handle(sync(SyncKind::waiting, 0_us)), ProtocolViolation);
    CHECK_THROWS_AS(server.handle(InitialMessage{1_ms, 1_ms, kProtocolVersion + 1}), HandshakeFailure);
    server.handle(InitialMessage{1000_ms, 50_ms, kProtocolVersion});
    CHECK_THROWS_AS(server.handle(InitialMessage{1000_ms, 50_ms, kProtocolVersion}), HandshakeFailure);
    CHECK_THROWS_AS(server.handle(DeliveryMessage{"a", "x", "y", "", 0_us}), ProtocolViolation);
    server.handle(sync(SyncKind::waiting, 10_ms));
    CHECK_THROWS_AS(server.handle(info("late", "client0", "client1", 5_ms, 20_ms)), ProtocolViolation);
}

TEST_CASE("session enforces the token")
{
    auto server = fig2_server();
    InProcessLink link(server);
    BridgeSession session(link);
    CHECK_THROWS_AS(session.forward_info(info("a", "client0", "client1", 1_ms, 5_ms)), ProtocolViolation);
    session.open(InitialMessage{1000_ms, 50_ms, kProtocolVersion});
    CHECK(session.is_open());
    CHECK(session.state().token_holder == TokenHolder::orchestrator);
    CHECK(session.state().current_bound == 0_us);
    CHECK_THROWS_AS(session.open(InitialMessage{1000_ms, 50_ms, kProtocolVersion}), HandshakeFailure);

    session.forward_info(info("a", "client0", "client1", 1_ms, 5_ms));
    CHECK(session.state().token_holder == TokenHolder::netsim);
    CHECK(session.state().in_flight == std::set<std::string>{"a"});
    CHECK_THROWS_AS(session.forward_info(info("b", "client1", "client0", 1_ms, 5_ms)), ProtocolViolation);
    CHECK_THROWS_AS(session.grant(10_ms), ProtocolViolation);

    const auto r = session.exchange_reply();
    CHECK(r.kind == Integration::Kind::bound_reached);
    CHECK(r.time == 5_ms);
    CHECK_THROWS_AS(session.await_yield(), ProtocolViolation);
    CHECK_THROWS_AS(session.close(), ProtocolViolation);  // "a" still in flight

    session.grant(14_ms);
    const auto d = session.exchange_reply();
    CHECK(d.kind == Integration::Kind::deliver);
    CHECK(d.time == 8_ms);
    CHECK(session.state().in_flight.empty());
    CHECK_THROWS_AS(session.forward_info(info("bad", "client0", "client1", 9_ms, 8_ms)), ProtocolViolation);
    CHECK_NOTHROW(session.close());
}

TEST_CASE("session rejects yields that break the contract")
{
    struct FakeLink final : NetsimLink {
        std::vector<ProtocolMessage> replies;
        void send(const ProtocolMessage&) override {}
        ProtocolMessage receive() override
        {
            auto m = replies.front();
            replies.erase(replies.begin());
            return m;
        }
    };
    auto opened = [](FakeLink& link) {
        link.replies.push_back(sync(SyncKind::waiting, 0_us));
        auto s = std::make_unique<BridgeSession>(link);
        s->open(InitialMessage{1000_ms, 50_ms, kProtocolVersion});
        return s;
    };

    SUBCASE("yield beyond the bound")
    {
        FakeLink link;
        auto s = opened(link);
        link.replies.push_back(DeliveryMessage{"a", "client0", "client1", "x", 9_ms});
        s->forward_info(info("a", "client0", "client1", 1_ms, 5_ms));
        CHECK_THROWS_AS(s->exchange_reply(), ProtocolViolation);
    }
    SUBCASE("unknown message id")
    {
        FakeLink link;
        auto s = opened(link);
        link.replies.push_back(sync(SyncKind::transmission_error, 2_ms, "nope"));
        s->forward_info(info("a", "client0", "client1", 1_ms, 5_ms));
        CHECK_THROWS_AS(s->exchange_reply(), UnknownMsgId);
    }
    SUBCASE("netsim sending an orchestrator message")
    {
        FakeLink link;
        auto s = opened(link);
        link.replies.push_back(InitialMessage{1_ms, 1_ms, kProtocolVersion});
        s->grant(5_ms);
        CHECK_THROWS_AS(s->await_yield(), ProtocolViolation);
    }
    SUBCASE("handshake answered with something else")
    {
        FakeLink link;
        link.replies.push_back(sync(SyncKind::max_advance, 0_us));
        BridgeSession s(link);
        CHECK_THROWS_AS(s.open(InitialMessage{1000_ms, 50_ms, kProtocolVersion}), HandshakeFailure);
    }
}

TEST_CASE("two-client ping produces the expected exchange")
{
    auto server = fig2_server();
    InProcessLink link(server);
    const auto run = testsupport::run_fig2(link);
    const std::vector<std::string> expected = {
        "INFO(client0.1,t=1,max_advance=5)", "MAX_ADVANCE(5)", "INFO(client1.1,t=5,max_advance=14)",
        "DELIVERY(client0.1,t=8)",           "DELIVERY(client1.1,t=12)", "MAX_ADVANCE(14)"};
    CHECK(run.protocol == expected);
}

TEST_CASE("socket transport gives the same trace as direct calls")
{
    auto server = fig2_server();
    InProcessLink direct(server);
    const auto inproc = testsupport::run_fig2(direct);

    NetsimThread thread(std::make_unique<NetsimServer>(fig2_server()));
    const auto wire = testsupport::run_fig2(thread.link());
    thread.join();
    CHECK(wire.full_protocol == inproc.full_protocol);
    CHECK(wire.report.protocol == inproc.report.protocol);
}

TEST_CASE("property: codec round trip")
{
    const auto r = testsupport::check_codec_roundtrip(1000, 21);
    INFO(r.first_failure);
    CHECK(r.ok());
}
