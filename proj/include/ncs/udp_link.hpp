#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <optional>
#include <queue>
#include <string>
#include <thread>
#include <vector>

#include "ncs/network.hpp"
#include "ncs/packets.hpp"

namespace ncs {

// Software link impairment applied on the send path: a seeded dropout
// draw, then a timer holding the datagram for the leg's share of the
// round-trip delay drawn per sequence number. Both ends derive the same
// round trip from (seed, seq), so the two legs compose to the modeled
// delay without any coordination.
struct LinkInjection {
  bool enabled = false;
  DelayModel delay;
  double drop_p = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t drop_stream = 0;
  bool remote_leg = false;  // remote-to-local leg: (1 - lr_fraction) + tau_c
};

// One UDP endpoint of the two-process loop. Receives are polled by the
// owning loop; delayed sends run on an internal timer thread. Stale or
// duplicate datagrams (sequence not newer than the last delivered of the
// same kind) are discarded on receive.
class UdpEndpoint {
 public:
  UdpEndpoint(const std::string& bind_host, int bind_port,
              const std::string& peer_host, int peer_port);
  ~UdpEndpoint();

  UdpEndpoint(const UdpEndpoint&) = delete;
  UdpEndpoint& operator=(const UdpEndpoint&) = delete;

  void set_injection(const LinkInjection& injection);

  int bound_port() const { return bound_port_; }

  // Returns false when the injection dropped the datagram.
  bool send_control(const ControlPacket& pkt);
  bool send_measurement(const MeasurementPacket& pkt);

  std::optional<ControlPacket> receive_control(
      std::chrono::steady_clock::time_point deadline);
  std::optional<MeasurementPacket> receive_measurement(
      std::chrono::steady_clock::time_point deadline);

 private:
  bool send_datagram(std::vector<std::uint8_t> data, std::int64_t seq);
  std::optional<std::vector<std::uint8_t>> receive_raw(
      std::chrono::steady_clock::time_point deadline);
  void sender_loop();

  int fd_ = -1;
  int bound_port_ = 0;
  LinkInjection injection_;

  std::int64_t last_control_seq_ = -1;
  std::int64_t last_measurement_seq_ = -1;

  struct Pending {
    std::chrono::steady_clock::time_point due;
    std::uint64_t order;
    std::vector<std::uint8_t> data;
    bool operator>(const Pending& other) const {
      return due != other.due ? due > other.due : order > other.order;
    }
  };
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::thread sender_;
  std::uint64_t send_order_ = 0;
  bool stopping_ = false;
};

}  // namespace ncs
