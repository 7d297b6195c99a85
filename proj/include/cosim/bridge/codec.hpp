#pragma once

#include "cosim/bridge/messages.hpp"
#include "cosim/error.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cosim::bridge {

COSIM_DEFINE_ERROR(FrameError, Error);
COSIM_DEFINE_ERROR(FrameTooShort, FrameError);
COSIM_DEFINE_ERROR(UnknownType, FrameError);
COSIM_DEFINE_ERROR(MalformedBody, FrameError);

using Bytes = std::vector<std::uint8_t>;

/// Frame layout: 4-byte big-endian body length, then a UTF-8 JSON object
/// whose "type" field selects the message kind. Times are integer micros.
Bytes encode_frame(const ProtocolMessage& message);

/// Decodes exactly one frame. Trailing bytes after the body are rejected.
ProtocolMessage decode_frame(std::span<const std::uint8_t> frame);

/// The JSON body alone (no length prefix).
std::string encode_body(const ProtocolMessage& message);
ProtocolMessage decode_body(std::string_view body);

std::string base64_encode(std::string_view raw);
std::string base64_decode(std::string_view text);

/// Incremental splitter for a byte stream of frames.
class FrameReader {
public:
    void feed(std::span<const std::uint8_t> bytes);
    /// Next complete frame body, if buffered.
    std::optional<std::string> next_body();
    [[nodiscard]] std::size_t buffered() const noexcept { return buffer_.size(); }

private:
    Bytes buffer_;
};

}  // namespace cosim::bridge
