#pragma once

#include <atomic>
#include <cstdint>
#include <string>

#include "tactsim/device.hpp"
#include "tactsim/protocol.hpp"

namespace tactsim {

struct ServeOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 4555;  // 0 picks an ephemeral port
  double tick_s = 0.01;
  // When set, one trace row per unit is appended after every tick, up
  // to trace_cap rows.
  std::vector<DeviceTraceRow>* trace_sink = nullptr;
  std::size_t trace_cap = 1000000;
};

// TCP front-end for the line protocol. A single-threaded poll loop owns
// the device: socket lines feed the session state machine, the device
// ticks on a wall-clock schedule, and telemetry is pushed after each
// tick. One session at a time; extra connections are refused with ERR 1.
class TcpServer {
 public:
  // Binds and listens; throws std::runtime_error on failure.
  TcpServer(DeviceSim& device, ServeOptions options);
  ~TcpServer();

  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  std::uint16_t port() const { return port_; }

  // Serves until `stop` becomes true. Transport errors close the
  // session and the loop keeps accepting new ones.
  void run(const std::atomic<bool>& stop);

 private:
  DeviceSim& device_;
  ServeOptions options_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
};

}  // namespace tactsim
