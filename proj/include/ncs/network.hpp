#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ncs/packets.hpp"
#include "ncs/plant.hpp"
#include "ncs/rng.hpp"

namespace ncs {

// Round-trip delay model: shifted exponential with offset eta and scale
// phi, truncated at tau_max by resampling, plus a constant computation
// delay tau_c.
struct DelayModel {
  double eta = 0.0;
  double phi = 1e-3;
  double tau_c = 0.0;
  double tau_max = 0.0;
  // Fraction of the round trip spent on the local-to-remote leg; only the
  // live transport consumes the split.
  double lr_fraction = 0.5;

  double mean() const { return eta + phi; }
  void validate() const;
};

// Bernoulli dropout per link, plus the horizon M sized from off-line runs.
struct DropoutModel {
  double p_lr = 0.0;
  double p_rl = 0.0;
  int m_bound = 0;

  void validate() const;
};

struct NetworkTraceEntry {
  std::int64_t seq = 0;
  double tau = 0.0;
  bool dropped_lr = false;
  bool dropped_rl = false;
};

// tau = eta - phi ln(1 - u); the deterministic core of sample_delay.
double delay_from_uniform(const DelayModel& dm, double u);

// One truncated draw (resampled while above tau_max), tau_c included.
double sample_delay(const DelayModel& dm, Rng& rng);

// True means dropped.
bool sample_dropout(double p, Rng& rng);

// tau_max < NT is required to exclude packet disorder.
bool disorder_guard_ok(const DelayModel& dm, const TimingConfig& timing);
void require_disorder_guard(const DelayModel& dm, const TimingConfig& timing);

// Longest run of consecutive drops in a trace (true = dropped).
int estimate_m(const std::vector<bool>& dropout_trace);

// Wire format, little-endian:
//   magic 0x4E435331 (u32) | version (u16) | kind (u16) | seq (u64)
//   control:     count = M+1 (u16), count x f64 actions
//   measurement: n (u16), y (f64), n x f64 state
enum class PacketKind : std::uint16_t { measurement = 1, control = 2 };

inline constexpr std::uint32_t kWireMagic = 0x4E435331u;
inline constexpr std::uint16_t kWireVersion = 1;
inline constexpr std::size_t kWireHeaderSize = 16;

std::vector<std::uint8_t> encode_control(const ControlPacket& pkt);
std::vector<std::uint8_t> encode_measurement(const MeasurementPacket& pkt);

// Header inspection; throws MalformedPacket on anything foreign.
PacketKind peek_kind(std::span<const std::uint8_t> buf);

ControlPacket decode_control(std::span<const std::uint8_t> buf);
MeasurementPacket decode_measurement(std::span<const std::uint8_t> buf);

}  // namespace ncs
