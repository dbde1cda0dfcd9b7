#include "ncs/udp_link.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <stdexcept>

#include "ncs/errors.hpp"

namespace ncs {

namespace {

sockaddr_in make_addr(const std::string& host, int port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
    throw std::runtime_error("udp: bad address " + host);
  return addr;
}

}  // namespace

UdpEndpoint::UdpEndpoint(const std::string& bind_host, int bind_port,
                         const std::string& peer_host, int peer_port) {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) throw std::runtime_error("udp: socket() failed");

  sockaddr_in bind_addr = make_addr(bind_host, bind_port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&bind_addr),
             sizeof bind_addr) != 0) {
    ::close(fd_);
    throw std::runtime_error("udp: bind failed on " + bind_host + ":" +
                             std::to_string(bind_port));
  }
  sockaddr_in actual{};
  socklen_t len = sizeof actual;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&actual), &len);
  bound_port_ = ntohs(actual.sin_port);

  sockaddr_in peer = make_addr(peer_host, peer_port);
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&peer), sizeof peer) != 0) {
    ::close(fd_);
    throw std::runtime_error("udp: connect failed");
  }

  sender_ = std::thread(&UdpEndpoint::sender_loop, this);
}

UdpEndpoint::~UdpEndpoint() {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (sender_.joinable()) sender_.join();
  if (fd_ >= 0) ::close(fd_);
}

void UdpEndpoint::set_injection(const LinkInjection& injection) {
  std::lock_guard<std::mutex> lock(mutex_);
  injection_ = injection;
}

bool UdpEndpoint::send_datagram(std::vector<std::uint8_t> data,
                                std::int64_t seq) {
  LinkInjection inj;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    inj = injection_;
  }
  auto due = std::chrono::steady_clock::now();
  if (inj.enabled) {
    Rng drop_rng = Rng::for_stream(inj.seed, inj.drop_stream,
                                   static_cast<std::uint64_t>(seq));
    if (sample_dropout(inj.drop_p, drop_rng)) return false;

    Rng delay_rng = Rng::for_stream(inj.seed, rng_stream::delay,
                                    static_cast<std::uint64_t>(seq));
    const double round_trip = sample_delay(inj.delay, delay_rng);
    const double leg = inj.remote_leg
                           ? (1.0 - inj.delay.lr_fraction) *
                                     (round_trip - inj.delay.tau_c) +
                                 inj.delay.tau_c
                           : inj.delay.lr_fraction *
                                 (round_trip - inj.delay.tau_c);
    due += std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(leg));
  }
  {
    std::lock_guard<std::mutex> lock(mutex_);
    queue_.push(Pending{due, send_order_++, std::move(data)});
  }
  cv_.notify_all();
  return true;
}

void UdpEndpoint::sender_loop() {
  std::unique_lock<std::mutex> lock(mutex_);
  while (true) {
    if (stopping_ && queue_.empty()) return;
    if (queue_.empty()) {
      cv_.wait(lock);
      continue;
    }
    const auto due = queue_.top().due;
    const auto now = std::chrono::steady_clock::now();
    if (now < due) {
      cv_.wait_until(lock, due);
      continue;
    }
    std::vector<std::uint8_t> data = queue_.top().data;
    queue_.pop();
    lock.unlock();
    // Best effort; UDP send errors surface as dropped datagrams.
    (void)::send(fd_, data.data(), data.size(), 0);
    lock.lock();
  }
}

bool UdpEndpoint::send_control(const ControlPacket& pkt) {
  return send_datagram(encode_control(pkt), pkt.seq);
}

bool UdpEndpoint::send_measurement(const MeasurementPacket& pkt) {
  return send_datagram(encode_measurement(pkt), pkt.seq);
}

std::optional<std::vector<std::uint8_t>> UdpEndpoint::receive_raw(
    std::chrono::steady_clock::time_point deadline) {
  for (;;) {
    const auto now = std::chrono::steady_clock::now();
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
    pollfd pfd{fd_, POLLIN, 0};
    const int timeout_ms =
        remaining.count() <= 0 ? 0 : static_cast<int>(remaining.count());
    const int rc = ::poll(&pfd, 1, timeout_ms);
    if (rc < 0) throw std::runtime_error("udp: poll failed");
    if (rc == 0) {
      if (std::chrono::steady_clock::now() >= deadline) return std::nullopt;
      continue;
    }
    std::vector<std::uint8_t> buf(2048);
    const ssize_t got = ::recv(fd_, buf.data(), buf.size(), 0);
    if (got < 0) return std::nullopt;
    buf.resize(static_cast<std::size_t>(got));
    return buf;
  }
}

std::optional<ControlPacket> UdpEndpoint::receive_control(
    std::chrono::steady_clock::time_point deadline) {
  for (;;) {
    auto raw = receive_raw(deadline);
    if (!raw) return std::nullopt;
    try {
      if (peek_kind(*raw) != PacketKind::control) continue;
      ControlPacket pkt = decode_control(*raw);
      if (pkt.seq <= last_control_seq_) continue;  // stale or duplicate
      last_control_seq_ = pkt.seq;
      return pkt;
    } catch (const MalformedPacket&) {
      continue;
    }
  }
}

std::optional<MeasurementPacket> UdpEndpoint::receive_measurement(
    std::chrono::steady_clock::time_point deadline) {
  for (;;) {
    auto raw = receive_raw(deadline);
    if (!raw) return std::nullopt;
    try {
      if (peek_kind(*raw) != PacketKind::measurement) continue;
      MeasurementPacket pkt = decode_measurement(*raw);
      if (pkt.seq <= last_measurement_seq_) continue;
      last_measurement_seq_ = pkt.seq;
      return pkt;
    } catch (const MalformedPacket&) {
      continue;
    }
  }
}

}  // namespace ncs
