#include "ncs/controller.hpp"

#include <cmath>
#include <stdexcept>

#include "ncs/errors.hpp"

namespace ncs {

void DualRateGains::validate() const {
  if (!(ti > 0.0)) throw std::invalid_argument("gains: T_i must be positive");
  if (!std::isfinite(kp) || !std::isfinite(td))
    throw std::invalid_argument("gains: non-finite");
}

double ActuationPlan::value_at(int step) const {
  return entry_at(step).value;
}

const PlanEntry& ActuationPlan::entry_at(int step) const {
  const PlanEntry* current = nullptr;
  for (const auto& e : entries) {
    if (e.offset_steps <= step) current = &e;
  }
  if (current == nullptr)
    throw std::logic_error("plan: no entry at or before requested step");
  return *current;
}

void ActuationPlan::validate(const TimingConfig& timing) const {
  if (entries.empty() || entries.front().offset_steps != 0)
    throw std::invalid_argument("plan: must start at offset 0");
  int prev = -1;
  for (const auto& e : entries) {
    if (e.offset_steps <= prev)
      throw std::invalid_argument("plan: offsets must strictly increase");
    if (e.offset_steps >= timing.steps_per_sensor())
      throw std::invalid_argument("plan: offset beyond the sensor period");
    prev = e.offset_steps;
  }
}

std::pair<double, PiState> pi_step(const DualRateGains& gains,
                                   const PiState& state, double r, double y,
                                   double nt) {
  if (!(nt > 0.0)) throw std::invalid_argument("pi_step: nt must be positive");
  const double e = r - y;
  const double v =
      state.v_prev + gains.k_pi * (e - (1.0 - nt / gains.ti) * state.e_prev);
  return {v, PiState{v, e}};
}

std::vector<double> rate_convert(double v_slow, int n) {
  if (n < 1) throw std::invalid_argument("rate_convert: n must be >= 1");
  return std::vector<double>(static_cast<std::size_t>(n), v_slow);
}

std::pair<double, PdState> pd_step(const DualRateGains& gains,
                                   const PdState& state, double v_fast,
                                   double t_fast) {
  if (!(t_fast > 0.0))
    throw std::invalid_argument("pd_step: period must be positive");
  const double kd = gains.k_pd() * (gains.td / t_fast);
  const double u = gains.k_pd() * (1.0 + gains.td / t_fast) * v_fast -
                   kd * state.v_prev_fast;
  return {u, PdState{v_fast}};
}

namespace {

// The N PD actions of one sensor period driven by the held PI sample.
std::vector<double> pd_sequence(const DualRateGains& gains, PdState pd,
                                double v_held, const TimingConfig& timing) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(timing.multiplicity));
  for (double v : rate_convert(v_held, timing.multiplicity)) {
    auto [u, next] = pd_step(gains, pd, v, timing.actuation_period);
    out.push_back(u);
    pd = next;
  }
  return out;
}

double estimate_for_slot(const ControlPacket& packet, int slot) {
  if (slot < 0) throw std::invalid_argument("plan: negative packet slot");
  if (slot >= static_cast<int>(packet.actions.size()))
    throw PredictionExhausted("plan: dropout run exceeds packet horizon");
  return packet.actions[static_cast<std::size_t>(slot)];
}

}  // namespace

ActuationPlan build_plan_dropout(const DualRateGains& gains,
                                 const PdState& pd_state,
                                 const ControlPacket& packet, int slot,
                                 const TimingConfig& timing) {
  gains.validate();
  timing.validate();
  const double v_hat = estimate_for_slot(packet, slot);
  const auto u = pd_sequence(gains, pd_state, v_hat, timing);

  ActuationPlan plan;
  for (int j = 0; j < timing.multiplicity; ++j)
    plan.entries.push_back(
        {j * timing.steps_per_actuation(), u[static_cast<std::size_t>(j)],
         Provenance::estimated});
  plan.validate(timing);
  return plan;
}

ActuationPlan build_plan_arrival(const DualRateGains& gains,
                                 const PdState& pd_state,
                                 const ControlPacket& old_packet,
                                 const ControlPacket& new_packet, double tau,
                                 const TimingConfig& timing) {
  gains.validate();
  timing.validate();
  const double nt = timing.sensor_period();
  if (tau < 0.0 || tau >= nt)
    throw DisorderGuardViolation(
        "plan: arrival delay outside the sensor period");

  // Ceil onto the t grid; actuation cannot precede the packet.
  const double t = timing.base_period();
  int arrival = static_cast<int>(std::ceil(tau / t - 1e-9));
  if (arrival < 0) arrival = 0;

  // Head estimate: the slot the old packet carries for this period. A
  // packet older than its horizon degenerates to holding its last
  // estimate, which matches the local exhaustion fallback.
  int slot = static_cast<int>(new_packet.seq - old_packet.seq);
  if (slot > old_packet.horizon()) slot = old_packet.horizon();
  const double v_hat = estimate_for_slot(old_packet, slot);
  const double v_bar = new_packet.actions.at(0);

  const auto u_hat = pd_sequence(gains, pd_state, v_hat, timing);
  const auto u_bar = pd_sequence(gains, pd_state, v_bar, timing);

  const int per_slot = timing.steps_per_actuation();
  const int d = arrival / per_slot;
  const bool on_slot = arrival % per_slot == 0;

  ActuationPlan plan;
  for (int j = 0; j < timing.multiplicity; ++j) {
    const int offset = j * per_slot;
    if (offset < arrival)
      plan.entries.push_back(
          {offset, u_hat[static_cast<std::size_t>(j)], Provenance::estimated});
    else
      plan.entries.push_back(
          {offset, u_bar[static_cast<std::size_t>(j)], Provenance::actual});
    // Off-grid arrival inserts the current interval's action recomputed.
    // An arrival inside the final basic cell (d == N after ceiling) has no
    // slot left to replace and the plan stays fully estimated.
    if (!on_slot && j == d)
      plan.entries.push_back(
          {arrival, u_bar[static_cast<std::size_t>(j)], Provenance::actual});
  }
  plan.validate(timing);
  return plan;
}

}  // namespace ncs
