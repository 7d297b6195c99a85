#pragma once

#include "cosim/bridge/codec.hpp"
#include "cosim/bridge/netsim_server.hpp"
#include "cosim/bridge/session.hpp"

#include <sys/types.h>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <thread>
#include <vector>

namespace cosim::bridge {

/// Owned POSIX file descriptor.
class UniqueFd {
public:
    UniqueFd() = default;
    explicit UniqueFd(int fd) : fd_(fd) {}
    ~UniqueFd() { reset(); }
    UniqueFd(UniqueFd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    UniqueFd& operator=(UniqueFd&& other) noexcept
    {
        if (this != &other) {
            reset(std::exchange(other.fd_, -1));
        }
        return *this;
    }
    UniqueFd(const UniqueFd&) = delete;
    UniqueFd& operator=(const UniqueFd&) = delete;

    [[nodiscard]] int get() const noexcept { return fd_; }
    [[nodiscard]] explicit operator bool() const noexcept { return fd_ >= 0; }
    void reset(int fd = -1);

private:
    int fd_ = -1;
};

/// Blocking frame I/O over a pair of descriptors (may be the same socket).
class FrameStream {
public:
    FrameStream(UniqueFd in, UniqueFd out);
    /// Single bidirectional descriptor, e.g. one end of a socketpair.
    explicit FrameStream(UniqueFd both);

    void write_message(const ProtocolMessage& message);
    /// Empty on clean end-of-stream between frames.
    std::optional<ProtocolMessage> read_message();
    void close_output();

private:
    UniqueFd in_;
    UniqueFd out_;
    bool shared_ = false;
    FrameReader reader_;
};

/// NetsimLink over a byte stream.
class StreamLink final : public NetsimLink {
public:
    explicit StreamLink(FrameStream stream) : stream_(std::move(stream)) {}

    void send(const ProtocolMessage& message) override { stream_.write_message(message); }
    ProtocolMessage receive() override;
    void close() override { stream_.close_output(); }

private:
    FrameStream stream_;
};

/// Netsim side of a byte-stream session: answers frames until end-of-stream.
/// Errors end the session; the stream is closed so the peer sees EOF.
void serve(NetsimServer& server, FrameStream& stream);

/// Runs a NetsimServer on a background thread behind a socketpair.
class NetsimThread {
public:
    explicit NetsimThread(std::unique_ptr<NetsimServer> server);
    ~NetsimThread();
    NetsimThread(const NetsimThread&) = delete;
    NetsimThread& operator=(const NetsimThread&) = delete;

    NetsimLink& link() { return *link_; }
    /// Waits for the server thread; rethrows its error, if any.
    void join();

private:
    std::unique_ptr<NetsimServer> server_;
    std::unique_ptr<StreamLink> link_;
    std::thread thread_;
    std::exception_ptr error_;
};

/// Spawns `argv` as a child process wired to stdin/stdout pipes. The child
/// is reaped on destruction (killed first if it has not exited).
class NetsimProcess {
public:
    explicit NetsimProcess(const std::vector<std::string>& argv);
    ~NetsimProcess();
    NetsimProcess(const NetsimProcess&) = delete;
    NetsimProcess& operator=(const NetsimProcess&) = delete;

    NetsimLink& link() { return *link_; }
    /// Closes our end and waits; returns the child's exit status.
    int wait();

private:
    pid_t pid_ = -1;
    std::unique_ptr<StreamLink> link_;
    std::optional<int> status_;
};

}  // namespace cosim::bridge
