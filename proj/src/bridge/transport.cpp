#include "cosim/bridge/transport.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <iostream>
#include <utility>

#include <fcntl.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

namespace cosim::bridge {

namespace {

[[noreturn]] void fail(const std::string& what)
{
    throw TransportError(what + ": " + std::strerror(errno));
}

}  // namespace

void UniqueFd::reset(int fd)
{
    if (fd_ >= 0) {
        ::close(fd_);
    }
    fd_ = fd;
}

FrameStream::FrameStream(UniqueFd in, UniqueFd out) : in_(std::move(in)), out_(std::move(out)) {}

FrameStream::FrameStream(UniqueFd both) : in_(std::move(both)), shared_(true) {}

void FrameStream::write_message(const ProtocolMessage& message)
{
    const int fd = shared_ ? in_.get() : out_.get();
    if (fd < 0) {
        throw TransportError("write on a closed stream");
    }
    const Bytes frame = encode_frame(message);
    std::size_t done = 0;
    while (done < frame.size()) {
        const ssize_t n = shared_ ? ::send(fd, frame.data() + done, frame.size() - done,
                                           MSG_NOSIGNAL)
                                  : ::write(fd, frame.data() + done, frame.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail("frame write failed");
        }
        done += static_cast<std::size_t>(n);
    }
}

std::optional<ProtocolMessage> FrameStream::read_message()
{
    std::uint8_t chunk[4096];
    while (true) {
        if (auto body = reader_.next_body()) {
            return decode_body(*body);
        }
        if (!in_) {
            return std::nullopt;
        }
        const ssize_t n = ::read(in_.get(), chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail("frame read failed");
        }
        if (n == 0) {
            if (reader_.buffered() != 0) {
                throw FrameTooShort("stream ended inside a frame");
            }
            return std::nullopt;
        }
        reader_.feed(std::span<const std::uint8_t>(chunk, static_cast<std::size_t>(n)));
    }
}

void FrameStream::close_output()
{
    if (shared_) {
        if (in_) {
            ::shutdown(in_.get(), SHUT_WR);
        }
    } else {
        out_.reset();
    }
}

ProtocolMessage StreamLink::receive()
{
    auto message = stream_.read_message();
    if (!message) {
        throw TransportError("netsim closed the connection");
    }
    return std::move(*message);
}

void serve(NetsimServer& server, FrameStream& stream)
{
    try {
        while (auto message = stream.read_message()) {
            stream.write_message(server.handle(*message));
        }
    } catch (...) {
        stream.close_output();
        throw;
    }
    stream.close_output();
}

NetsimThread::NetsimThread(std::unique_ptr<NetsimServer> server) : server_(std::move(server))
{
    int sv[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) {
        fail("socketpair");
    }
    link_ = std::make_unique<StreamLink>(FrameStream(UniqueFd(sv[0])));
    thread_ = std::thread([this, fd = sv[1]]() {
        FrameStream stream{UniqueFd(fd)};
        try {
            serve(*server_, stream);
        } catch (...) {
            error_ = std::current_exception();
        }
    });
}

NetsimThread::~NetsimThread()
{
    if (thread_.joinable()) {
        link_->close();
        thread_.join();
    }
}

void NetsimThread::join()
{
    if (thread_.joinable()) {
        link_->close();
        thread_.join();
    }
    if (error_) {
        std::rethrow_exception(std::exchange(error_, nullptr));
    }
}

NetsimProcess::NetsimProcess(const std::vector<std::string>& argv)
{
    if (argv.empty()) {
        throw TransportError("no netsim command given");
    }
    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) {
        fail("pipe");
    }
    if (::pipe2(from_child, O_CLOEXEC) != 0) {
        ::close(to_child[0]);
        ::close(to_child[1]);
        fail("pipe");
    }

    std::vector<char*> args;
    for (const auto& a : argv) {
        args.push_back(const_cast<char*>(a.c_str()));
    }
    args.push_back(nullptr);

    pid_ = ::fork();
    if (pid_ < 0) {
        fail("fork");
    }
    if (pid_ == 0) {
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        ::execv(args[0], args.data());
        std::perror("execv");
        ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    link_ = std::make_unique<StreamLink>(
        FrameStream(UniqueFd(from_child[0]), UniqueFd(to_child[1])));
}

int NetsimProcess::wait()
{
    if (status_) {
        return *status_;
    }
    link_->close();
    int status = 0;
    while (::waitpid(pid_, &status, 0) < 0) {
        if (errno != EINTR) {
            fail("waitpid");
        }
    }
    status_ = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    return *status_;
}

NetsimProcess::~NetsimProcess()
{
    if (pid_ <= 0 || status_) {
        return;
    }
    link_->close();
    int status = 0;
    for (int attempt = 0; attempt < 50; ++attempt) {
        if (::waitpid(pid_, &status, WNOHANG) == pid_) {
            return;
        }
        ::usleep(10'000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
}

}  // namespace cosim::bridge
