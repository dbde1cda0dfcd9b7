#include "ncs/network.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "ncs/errors.hpp"

namespace ncs {

void DelayModel::validate() const {
  if (eta < 0.0) throw std::invalid_argument("delay: eta must be >= 0");
  if (!(phi > 0.0)) throw std::invalid_argument("delay: phi must be > 0");
  if (tau_max < eta)
    throw std::invalid_argument("delay: tau_max must be >= eta");
  if (tau_c < 0.0) throw std::invalid_argument("delay: tau_c must be >= 0");
  if (lr_fraction < 0.0 || lr_fraction > 1.0)
    throw std::invalid_argument("delay: lr_fraction must be in [0,1]");
}

void DropoutModel::validate() const {
  if (p_lr < 0.0 || p_lr >= 1.0 || p_rl < 0.0 || p_rl >= 1.0)
    throw std::invalid_argument("dropout: probabilities must be in [0,1)");
  if (m_bound < 0) throw std::invalid_argument("dropout: M must be >= 0");
}

double delay_from_uniform(const DelayModel& dm, double u) {
  return dm.eta - dm.phi * std::log1p(-u);
}

double sample_delay(const DelayModel& dm, Rng& rng) {
  // Truncation by resampling keeps the density shape on [eta, tau_max].
  double tau = delay_from_uniform(dm, rng.uniform01());
  while (tau > dm.tau_max) tau = delay_from_uniform(dm, rng.uniform01());
  return tau + dm.tau_c;
}

bool sample_dropout(double p, Rng& rng) {
  if (p < 0.0 || p >= 1.0)
    throw std::invalid_argument("sample_dropout: p must be in [0,1)");
  return rng.uniform01() < p;
}

bool disorder_guard_ok(const DelayModel& dm, const TimingConfig& timing) {
  return dm.tau_max + dm.tau_c < timing.sensor_period();
}

void require_disorder_guard(const DelayModel& dm, const TimingConfig& timing) {
  if (!disorder_guard_ok(dm, timing))
    throw DisorderGuardViolation(
        "disorder guard: tau_max must be strictly below the sensor period");
}

int estimate_m(const std::vector<bool>& dropout_trace) {
  if (dropout_trace.empty())
    throw std::invalid_argument("estimate_m: empty trace");
  int longest = 0;
  int run = 0;
  for (bool dropped : dropout_trace) {
    run = dropped ? run + 1 : 0;
    if (run > longest) longest = run;
  }
  return longest;
}

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  put_u64(out, bits);
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> buf) : buf_(buf) {}

  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(buf_[pos_]) |
                      static_cast<std::uint16_t>(buf_[pos_ + 1]) << 8;
    pos_ += 2;
    return v;
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
      v = (v << 8) | buf_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
      v = (v << 8) | buf_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 8;
    return v;
  }

  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }

  bool exhausted() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) {
    if (buf_.size() - pos_ < n)
      throw MalformedPacket("decode: truncated datagram");
  }

  std::span<const std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

void write_header(std::vector<std::uint8_t>& out, PacketKind kind,
                  std::int64_t seq) {
  put_u32(out, kWireMagic);
  put_u16(out, kWireVersion);
  put_u16(out, static_cast<std::uint16_t>(kind));
  put_u64(out, static_cast<std::uint64_t>(seq));
}

PacketKind read_header(Reader& r, std::int64_t& seq) {
  if (r.u32() != kWireMagic) throw MalformedPacket("decode: bad magic");
  if (r.u16() != kWireVersion) throw MalformedPacket("decode: bad version");
  const std::uint16_t kind = r.u16();
  if (kind != static_cast<std::uint16_t>(PacketKind::measurement) &&
      kind != static_cast<std::uint16_t>(PacketKind::control))
    throw MalformedPacket("decode: unknown packet kind");
  seq = static_cast<std::int64_t>(r.u64());
  return static_cast<PacketKind>(kind);
}

}  // namespace

std::vector<std::uint8_t> encode_control(const ControlPacket& pkt) {
  std::vector<std::uint8_t> out;
  out.reserve(kWireHeaderSize + 2 + pkt.actions.size() * 8);
  write_header(out, PacketKind::control, pkt.seq);
  put_u16(out, static_cast<std::uint16_t>(pkt.actions.size()));
  for (double a : pkt.actions) put_f64(out, a);
  return out;
}

std::vector<std::uint8_t> encode_measurement(const MeasurementPacket& pkt) {
  std::vector<std::uint8_t> out;
  out.reserve(kWireHeaderSize + 2 + 8 + static_cast<std::size_t>(pkt.x.size()) * 8);
  write_header(out, PacketKind::measurement, pkt.seq);
  put_u16(out, static_cast<std::uint16_t>(pkt.x.size()));
  put_f64(out, pkt.y);
  for (Eigen::Index i = 0; i < pkt.x.size(); ++i) put_f64(out, pkt.x(i));
  return out;
}

PacketKind peek_kind(std::span<const std::uint8_t> buf) {
  Reader r(buf);
  std::int64_t seq;
  return read_header(r, seq);
}

ControlPacket decode_control(std::span<const std::uint8_t> buf) {
  Reader r(buf);
  ControlPacket pkt;
  if (read_header(r, pkt.seq) != PacketKind::control)
    throw MalformedPacket("decode: not a control packet");
  const std::uint16_t count = r.u16();
  pkt.actions.resize(count);
  for (auto& a : pkt.actions) a = r.f64();
  if (!r.exhausted()) throw MalformedPacket("decode: trailing bytes");
  return pkt;
}

MeasurementPacket decode_measurement(std::span<const std::uint8_t> buf) {
  Reader r(buf);
  MeasurementPacket pkt;
  if (read_header(r, pkt.seq) != PacketKind::measurement)
    throw MalformedPacket("decode: not a measurement packet");
  const std::uint16_t n = r.u16();
  pkt.y = r.f64();
  pkt.x = Vector(n);
  for (std::uint16_t i = 0; i < n; ++i) pkt.x(i) = r.f64();
  if (!r.exhausted()) throw MalformedPacket("decode: trailing bytes");
  return pkt;
}

}  // namespace ncs
