#include "tactsim/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>
#include <string>

namespace tactsim {
namespace {

constexpr size_t kMaxLineBytes = 64 * 1024;

void send_all(int fd, std::string_view data) {
  size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent,
                             MSG_NOSIGNAL);
    if (n <= 0) {
      if (n < 0 && (errno == EINTR)) continue;
      throw std::runtime_error("send failed");
    }
    sent += static_cast<size_t>(n);
  }
}

}  // namespace

TcpServer::TcpServer(DeviceSim& device, ServeOptions options)
    : device_(device), options_(std::move(options)) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error("socket() failed");

  int reuse = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &reuse, sizeof reuse);

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(options_.port);
  if (::inet_pton(AF_INET, options_.host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::runtime_error("bad listen host: " + options_.host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 ||
      ::listen(listen_fd_, 4) < 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::runtime_error("cannot bind " + options_.host + ":" +
                             std::to_string(options_.port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpServer::~TcpServer() {
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpServer::run(const std::atomic<bool>& stop) {
  using Clock = std::chrono::steady_clock;

  int conn_fd = -1;
  std::string in_buffer;
  proto::Session session(
      proto::Session::DeviceHooks{
          [this](int unit, ContactPoint p) { return device_.set_target(unit, p); },
          [this] { return device_.calibrate(); },
          [this] { return device_.read_forces(); },
      },
      options_.tick_s);

  auto close_session = [&] {
    if (conn_fd >= 0) {
      ::close(conn_fd);
      conn_fd = -1;
    }
    in_buffer.clear();
    session = proto::Session(
        proto::Session::DeviceHooks{
            [this](int unit, ContactPoint p) { return device_.set_target(unit, p); },
            [this] { return device_.calibrate(); },
            [this] { return device_.read_forces(); },
        },
        options_.tick_s);
  };

  const auto tick_period = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(options_.tick_s));
  auto next_tick = Clock::now() + tick_period;

  while (!stop.load(std::memory_order_relaxed)) {
    pollfd fds[2];
    fds[0] = {listen_fd_, POLLIN, 0};
    fds[1] = {conn_fd, POLLIN, 0};  // fd -1 is ignored by poll

    const auto now = Clock::now();
    int timeout_ms = 0;
    if (next_tick > now)
      timeout_ms = static_cast<int>(
          std::chrono::duration_cast<std::chrono::milliseconds>(next_tick - now)
              .count()) +
          1;
    ::poll(fds, 2, std::min(timeout_ms, 50));

    // Device tick on schedule; telemetry after each tick.
    while (Clock::now() >= next_tick) {
      device_.tick(options_.tick_s);
      if (options_.trace_sink &&
          options_.trace_sink->size() + kUnitCount <= options_.trace_cap)
        device_.append_trace(*options_.trace_sink);
      if (conn_fd >= 0) {
        try {
          for (const auto& line : session.on_tick()) send_all(conn_fd, line);
        } catch (const std::runtime_error&) {
          close_session();
        }
      }
      next_tick += tick_period;
    }

    if (fds[0].revents & POLLIN) {
      const int incoming = ::accept(listen_fd_, nullptr, nullptr);
      if (incoming >= 0) {
        if (conn_fd >= 0) {
          // Single session: refuse the newcomer.
          try {
            send_all(incoming,
                     proto::encode(proto::ErrorMsg{proto::kErrMalformed,
                                                   "session already active"}));
          } catch (const std::runtime_error&) {
          }
          ::close(incoming);
        } else {
          conn_fd = incoming;
        }
      }
    }

    if (conn_fd >= 0 && (fds[1].revents & (POLLIN | POLLHUP | POLLERR))) {
      char chunk[4096];
      const ssize_t n = ::recv(conn_fd, chunk, sizeof chunk, 0);
      if (n <= 0) {
        if (!(n < 0 && errno == EINTR)) close_session();
      } else {
        in_buffer.append(chunk, static_cast<size_t>(n));
        size_t start = 0;
        for (auto eol = in_buffer.find('\n', start);
             eol != std::string::npos; eol = in_buffer.find('\n', start)) {
          std::string_view line(in_buffer.data() + start, eol - start);
          if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
          try {
            for (const auto& reply : session.feed_line(line))
              send_all(conn_fd, reply);
          } catch (const std::runtime_error&) {
            close_session();
            break;
          }
          start = eol + 1;
        }
        if (conn_fd >= 0) {
          in_buffer.erase(0, start);
          if (in_buffer.size() > kMaxLineBytes) {
            // A line this long is hostile; drop the buffer, answer once.
            in_buffer.clear();
            try {
              send_all(conn_fd,
                       proto::encode(proto::ErrorMsg{proto::kErrMalformed,
                                                     "line too long"}));
            } catch (const std::runtime_error&) {
              close_session();
            }
          }
        }
      }
    }
  }
  close_session();
}

}  // namespace tactsim
