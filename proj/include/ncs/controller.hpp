#pragma once

#include <utility>
#include <vector>

#include "ncs/packets.hpp"
#include "ncs/plant.hpp"

namespace ncs {

// Gains of the dual-rate PID split: the slow-rate PI runs with unit gain,
// the fast-rate PD reuses the proportional gain.
struct DualRateGains {
  double kp = 1.0;  // K_p
  double td = 0.0;  // T_d, seconds
  double ti = 1.0;  // T_i, seconds
  double k_pi = 1.0;

  double k_pd() const { return kp; }
  void validate() const;
};

// Slow-rate PI memory: previous action and previous error.
struct PiState {
  double v_prev = 0.0;
  double e_prev = 0.0;
};

// Fast-rate PD memory: previous rate-converted input sample.
struct PdState {
  double v_prev_fast = 0.0;
};

enum class Provenance { estimated, actual, held };

// One sensor period worth of actuation. Offsets are counted in basic
// periods t from the period start; values are pre-nonlinearity commands.
struct PlanEntry {
  int offset_steps = 0;
  double value = 0.0;
  Provenance prov = Provenance::estimated;
};

struct ActuationPlan {
  std::vector<PlanEntry> entries;

  // Command active at a given basic step (last entry at or before it).
  double value_at(int step) const;
  const PlanEntry& entry_at(int step) const;
  void validate(const TimingConfig& timing) const;
};

// v_k = v_{k-1} + e_k - (1 - NT/T_i) e_{k-1}, e_k = r_k - y_k.
std::pair<double, PiState> pi_step(const DualRateGains& gains,
                                   const PiState& state, double r, double y,
                                   double nt);

// Slow-to-fast conversion. With step references the expand-and-hold chain
// collapses to plain replication of the slow sample.
std::vector<double> rate_convert(double v_slow, int n);

// u_k = K_pd (1 + T_d/T) v_k - K_pd (T_d/T) v_{k-1}.
std::pair<double, PdState> pd_step(const DualRateGains& gains,
                                   const PdState& state, double v_fast,
                                   double t_fast);

// Uniform pattern used when the control packet for this period was lost:
// N entries at {0, T, ..., (N-1)T}, all from the estimate the last
// received packet carries for this period (actions[slot]).
//
// Throws PredictionExhausted when slot exceeds the packet horizon.
ActuationPlan build_plan_dropout(const DualRateGains& gains,
                                 const PdState& pd_state,
                                 const ControlPacket& packet, int slot,
                                 const TimingConfig& timing);

// Non-uniform pattern for a packet arriving tau seconds into the period.
// The arrival instant is ceiled onto the t grid; entries before it carry
// the running estimates from old_packet, entries from it on carry the
// values recomputed from new_packet. When the quantized arrival lands
// exactly on an actuation instant the plan keeps N entries, otherwise one
// extra instant is inserted.
//
// Values never depend on tau; only offsets and provenance do.
ActuationPlan build_plan_arrival(const DualRateGains& gains,
                                 const PdState& pd_state,
                                 const ControlPacket& old_packet,
                                 const ControlPacket& new_packet, double tau,
                                 const TimingConfig& timing);

}  // namespace ncs
