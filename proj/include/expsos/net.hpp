/* TCP transport for the wire protocol: a thread-per-connection server and a
   CloudWorker that marshals over a socket. One connection carries any number
   of newline-delimited requests; per-connection strategy state lives in the
   connection's own WorkerLogic, so no cross-connection locking is needed. */

#pragma once

#include "expsos/cloud.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cstring>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace expsos::net {

namespace detail {

inline void close_fd(int& fd) {
    if (fd >= 0) {
        ::close(fd);
        fd = -1;
    }
}

inline bool send_all(int fd, const std::string& data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n <= 0) return false;
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

struct LineReader {
    int fd;
    std::string buf;

    // Reads one '\n'-terminated line (without the terminator); empty optional
    // on EOF or error.
    bool next(std::string& line) {
        for (;;) {
            auto pos = buf.find('\n');
            if (pos != std::string::npos) {
                line = buf.substr(0, pos);
                buf.erase(0, pos + 1);
                return true;
            }
            char chunk[4096];
            ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
            if (n <= 0) return false;
            buf.append(chunk, static_cast<std::size_t>(n));
        }
    }
};

inline sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        throw TransportError("bad address: " + host);
    return addr;
}

// "host:port" -> pair
inline std::pair<std::string, std::uint16_t> split_endpoint(const std::string& ep) {
    auto pos = ep.rfind(':');
    if (pos == std::string::npos) throw DomainError("endpoint must be host:port: " + ep);
    return {ep.substr(0, pos), static_cast<std::uint16_t>(std::stoi(ep.substr(pos + 1)))};
}

} // namespace detail

class WireServer {
  public:
    // Binds immediately; port 0 picks an ephemeral port (see port()).
    WireServer(const std::string& host, std::uint16_t port, cloud::WorkerBehavior behavior,
               std::uint64_t seed)
        : behavior_(std::move(behavior)), seed_(seed) {
        listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (listen_fd_ < 0) throw TransportError("socket() failed");
        int one = 1;
        ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr = detail::make_addr(host, port);
        if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
            detail::close_fd(listen_fd_);
            throw TransportError("bind failed on " + host + ":" + std::to_string(port));
        }
        socklen_t len = sizeof addr;
        ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
        port_ = ntohs(addr.sin_port);
        if (::listen(listen_fd_, 128) != 0) {
            detail::close_fd(listen_fd_);
            throw TransportError("listen failed");
        }
        accept_thread_ = std::thread([this] { accept_loop(); });
    }

    ~WireServer() { stop(); }

    std::uint16_t port() const { return port_; }

    void stop() {
        bool expected = false;
        if (!stopping_.compare_exchange_strong(expected, true)) return;
        ::shutdown(listen_fd_, SHUT_RDWR);
        detail::close_fd(listen_fd_);
        {
            std::lock_guard<std::mutex> lock(mu_);
            for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
        }
        if (accept_thread_.joinable()) accept_thread_.join();
        for (auto& t : conn_threads_)
            if (t.joinable()) t.join();
    }

    // Blocks until stop() (for the CLI serve command).
    void wait() {
        if (accept_thread_.joinable()) accept_thread_.join();
    }

  private:
    void accept_loop() {
        for (;;) {
            int fd = ::accept(listen_fd_, nullptr, nullptr);
            if (fd < 0) break; // listener closed
            std::uint64_t conn_index;
            {
                std::lock_guard<std::mutex> lock(mu_);
                if (stopping_.load()) {
                    ::close(fd);
                    break;
                }
                conn_fds_.insert(fd);
                conn_index = conn_counter_++;
                conn_threads_.emplace_back([this, fd, conn_index] { serve_conn(fd, conn_index); });
            }
        }
    }

    void serve_conn(int fd, std::uint64_t conn_index) {
        // The first connection replays the seed stream of an in-process
        // worker with the same seed (transport transparency).
        cloud::WorkerLogic logic(behavior_, seed_ + conn_index * 0x9e3779b97f4a7c15ULL);
        detail::LineReader reader{fd, {}};
        std::string line;
        while (reader.next(line)) {
            if (line.empty()) continue;
            std::string reply = cloud::wire::serve_line(logic, line);
            reply.push_back('\n');
            if (!detail::send_all(fd, reply)) break;
        }
        std::lock_guard<std::mutex> lock(mu_);
        ::close(fd);
        conn_fds_.erase(fd);
    }

    cloud::WorkerBehavior behavior_;
    std::uint64_t seed_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::thread accept_thread_;
    std::mutex mu_;
    std::set<int> conn_fds_;
    std::vector<std::thread> conn_threads_;
    std::uint64_t conn_counter_ = 0;
};

// CloudWorker over one persistent connection. Request/response exchanges are
// serialized by a mutex, so a handle may be shared across sessions.
class RemoteWorker : public cloud::CloudWorker {
  public:
    explicit RemoteWorker(const std::string& endpoint) {
        auto [host, port] = detail::split_endpoint(endpoint);
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd_ < 0) throw TransportError("socket() failed");
        timeval tv{30, 0};
        ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
        int one = 1;
        ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        sockaddr_in addr = detail::make_addr(host, port);
        if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
            detail::close_fd(fd_);
            throw TransportError("connect failed to " + endpoint);
        }
        reader_ = detail::LineReader{fd_, {}};
    }

    ~RemoteWorker() override { detail::close_fd(fd_); }

    Int serve_modexp(const cloud::ModExpQuery& q) override {
        nlohmann::json j = exchange(cloud::wire::encode_modexp(next_id(), q));
        return from_hex(j.at("r").get<std::string>());
    }

    curve::ProjectivePoint serve_scalar_mul(const cloud::TransformedCurve& E, const Int& s,
                                            const curve::ProjectivePoint& P) override {
        nlohmann::json j = exchange(cloud::wire::encode_ecmul(next_id(), E, s, P));
        return point_of(j);
    }

    curve::ProjectivePoint serve_point_add(const Int& n, const curve::ProjectivePoint& P,
                                           const curve::ProjectivePoint& Q) override {
        nlohmann::json j = exchange(cloud::wire::encode_ecadd(next_id(), n, P, Q));
        return point_of(j);
    }

  private:
    std::string next_id() { return "q" + std::to_string(id_counter_++); }

    static curve::ProjectivePoint point_of(const nlohmann::json& j) {
        return {from_hex(j.at("rx").get<std::string>()), from_hex(j.at("ry").get<std::string>()),
                from_hex(j.at("rz").get<std::string>())};
    }

    nlohmann::json exchange(std::string request) {
        std::lock_guard<std::mutex> lock(mu_);
        request.push_back('\n');
        if (!detail::send_all(fd_, request)) throw TransportError("send failed");
        std::string line;
        if (!reader_.next(line)) throw TransportError("connection closed by worker");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception&) {
            throw ProtocolError("unparseable reply");
        }
        if (!j.value("ok", false))
            throw ProtocolError("worker error: " + j.value("err", std::string("unknown")));
        return j;
    }

    int fd_ = -1;
    std::mutex mu_;
    detail::LineReader reader_{-1, {}};
    std::atomic<std::uint64_t> id_counter_{0};
};

inline std::unique_ptr<cloud::CloudWorker> remote_worker(const std::string& endpoint) {
    return std::make_unique<RemoteWorker>(endpoint);
}

} // namespace expsos::net
