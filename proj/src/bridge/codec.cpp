#include "cosim/bridge/codec.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <limits>

namespace cosim::bridge {

using nlohmann::json;

std::string base64_encode(std::string_view raw)
{
    if (raw.empty()) {
        return {};
    }
    std::string out(4 * ((raw.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(raw.data()),
                                  static_cast<int>(raw.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::string base64_decode(std::string_view text)
{
    if (text.empty()) {
        return {};
    }
    if (text.size() % 4 != 0) {
        throw MalformedBody("base64 payload length is not a multiple of 4");
    }
    std::string out(3 * text.size() / 4, '\0');
    const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
    if (n < 0) {
        throw MalformedBody("invalid base64 payload");
    }
    std::size_t padding = 0;
    if (text.back() == '=') ++padding;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++padding;
    out.resize(static_cast<std::size_t>(n) - padding);
    return out;
}

namespace {

std::uint64_t time_field(SimTime t) { return t.micros(); }

json to_json(const ProtocolMessage& message)
{
    struct Visitor {
        json operator()(const InitialMessage& m) const
        {
            return {{"type", "INITIAL"},
                    {"until_us", time_field(m.until)},
                    {"waiting_period_us", time_field(m.waiting_period)},
                    {"protocol_version", m.protocol_version}};
        }
        json operator()(const InfoMessage& m) const
        {
            return {{"type", "INFO"},
                    {"msg_id", m.msg_id},
                    {"sender", m.sender},
                    {"receiver", m.receiver},
                    {"sim_time_us", time_field(m.sim_time)},
                    {"max_advance_us", time_field(m.max_advance)},
                    {"size_bytes", m.size_bytes},
                    {"payload_b64", base64_encode(m.payload)}};
        }
        json operator()(const SynchronizationMessage& m) const
        {
            json j = {{"type", "SYNC"},
                      {"kind", std::string(to_string(m.kind))},
                      {"sim_time_us", time_field(m.sim_time)}};
            if (m.msg_id) {
                j["msg_id"] = *m.msg_id;
            }
            return j;
        }
        json operator()(const InfrastructureMessage& m) const
        {
            return {{"type", "INFRA"},
                    {"action", std::string(netsim::to_string(m.change.action))},
                    {"node", m.change.node},
                    {"at_us", time_field(m.change.at)}};
        }
        json operator()(const DeliveryMessage& m) const
        {
            return {{"type", "DELIVERY"},
                    {"msg_id", m.msg_id},
                    {"sender", m.sender},
                    {"receiver", m.receiver},
                    {"delivered_at_us", time_field(m.delivered_at)},
                    {"payload_b64", base64_encode(m.payload)}};
        }
    };
    return std::visit(Visitor{}, message);
}

const json& field(const json& body, const char* name)
{
    auto it = body.find(name);
    if (it == body.end()) {
        throw MalformedBody(std::string("missing field '") + name + "'");
    }
    return *it;
}

std::string str(const json& body, const char* name)
{
    const auto& v = field(body, name);
    if (!v.is_string()) {
        throw MalformedBody(std::string("field '") + name + "' must be a string");
    }
    return v.get<std::string>();
}

std::uint64_t uint(const json& body, const char* name)
{
    const auto& v = field(body, name);
    if (!v.is_number_unsigned()) {
        throw MalformedBody(std::string("field '") + name + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

SimTime time(const json& body, const char* name) { return SimTime(uint(body, name)); }

SyncKind sync_kind(const std::string& name)
{
    if (name == "MAX_ADVANCE") return SyncKind::max_advance;
    if (name == "WAITING") return SyncKind::waiting;
    if (name == "TRANSMISSION_ERROR") return SyncKind::transmission_error;
    throw MalformedBody("unknown SYNC kind '" + name + "'");
}

ProtocolMessage from_json(const json& body)
{
    if (!body.is_object()) {
        throw MalformedBody("frame body is not a JSON object");
    }
    const std::string type = str(body, "type");
    if (type == "INITIAL") {
        const auto version = uint(body, "protocol_version");
        if (version > std::numeric_limits<std::uint32_t>::max()) {
            throw MalformedBody("protocol_version out of range");
        }
        return InitialMessage{time(body, "until_us"), time(body, "waiting_period_us"),
                              static_cast<std::uint32_t>(version)};
    }
    if (type == "INFO") {
        return InfoMessage{str(body, "msg_id"),
                           str(body, "sender"),
                           str(body, "receiver"),
                           time(body, "sim_time_us"),
                           time(body, "max_advance_us"),
                           base64_decode(str(body, "payload_b64")),
                           uint(body, "size_bytes")};
    }
    if (type == "SYNC") {
        SynchronizationMessage m{sync_kind(str(body, "kind")), time(body, "sim_time_us"), {}};
        if (body.contains("msg_id")) {
            m.msg_id = str(body, "msg_id");
        }
        return m;
    }
    if (type == "INFRA") {
        netsim::InfraAction action;
        try {
            action = netsim::infra_action_from_string(str(body, "action"));
        } catch (const MalformedBody&) {
            throw;
        } catch (const Error& e) {
            throw MalformedBody(e.what());
        }
        return InfrastructureMessage{{action, str(body, "node"), time(body, "at_us")}};
    }
    if (type == "DELIVERY") {
        return DeliveryMessage{str(body, "msg_id"), str(body, "sender"), str(body, "receiver"),
                               base64_decode(str(body, "payload_b64")),
                               time(body, "delivered_at_us")};
    }
    throw UnknownType("unknown message type '" + type + "'");
}

std::uint32_t read_length(std::span<const std::uint8_t> bytes)
{
    return (std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
           (std::uint32_t{bytes[2]} << 8) | std::uint32_t{bytes[3]};
}

}  // namespace

std::string encode_body(const ProtocolMessage& message) { return to_json(message).dump(); }

ProtocolMessage decode_body(std::string_view body)
{
    json parsed = json::parse(body.begin(), body.end(), nullptr, false);
    if (parsed.is_discarded()) {
        throw MalformedBody("frame body is not valid JSON");
    }
    return from_json(parsed);
}

Bytes encode_frame(const ProtocolMessage& message)
{
    const std::string body = encode_body(message);
    if (body.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw FrameError("frame body exceeds 4 GiB");
    }
    const auto n = static_cast<std::uint32_t>(body.size());
    Bytes frame{static_cast<std::uint8_t>(n >> 24), static_cast<std::uint8_t>(n >> 16),
                static_cast<std::uint8_t>(n >> 8), static_cast<std::uint8_t>(n)};
    frame.insert(frame.end(), body.begin(), body.end());
    return frame;
}

ProtocolMessage decode_frame(std::span<const std::uint8_t> frame)
{
    if (frame.size() < 4) {
        throw FrameTooShort("frame shorter than its 4-byte length prefix");
    }
    const std::uint32_t n = read_length(frame);
    if (frame.size() - 4 < n) {
        throw FrameTooShort("frame declares " + std::to_string(n) + " body bytes, has " +
                            std::to_string(frame.size() - 4));
    }
    if (frame.size() - 4 > n) {
        throw MalformedBody("trailing bytes after frame body");
    }
    const auto body = frame.subspan(4);
    return decode_body(std::string_view(reinterpret_cast<const char*>(body.data()), body.size()));
}

void FrameReader::feed(std::span<const std::uint8_t> bytes)
{
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<std::string> FrameReader::next_body()
{
    if (buffer_.size() < 4) {
        return std::nullopt;
    }
    const std::uint32_t n = read_length(buffer_);
    if (buffer_.size() - 4 < n) {
        return std::nullopt;
    }
    std::string body(buffer_.begin() + 4, buffer_.begin() + 4 + n);
    buffer_.erase(buffer_.begin(), buffer_.begin() + 4 + n);
    return body;
}

}  // namespace cosim::bridge
