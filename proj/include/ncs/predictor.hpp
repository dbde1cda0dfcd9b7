#pragma once

#include <optional>
#include <span>
#include <utility>

#include "ncs/controller.hpp"
#include "ncs/packets.hpp"
#include "ncs/plant.hpp"

namespace ncs {

// Remote-side prediction memory. The replicas mirror the local PD and the
// slow-rate PI so estimated actions stay consistent with what the local
// side will actually compute; x_hat/y_hat/v_hat carry the one-period-ahead
// estimates used as fallbacks when the next measurement is dropped.
struct PredictorState {
  Vector x_hat;       // state estimate at the sensor-period boundary
  Vector x_hat_base;  // basic-period copy kept for diagnostic traces
  PdState pd_replica;
  PiState pi_replica;
  double v_hat_prev = 0.0;
  double y_hat_prev = 0.0;
};

PredictorState make_predictor_state(int state_dim);

// Initial-state resetting: a fresh measurement overwrites the rollout
// estimate; without one the estimate stands.
PredictorState reset_state(PredictorState ps,
                           const std::optional<MeasurementPacket>& meas);

// N estimated PD actions from the held PI samples; advances the replica.
std::vector<double> rollout_pd(const DualRateGains& gains, PdState& replica,
                               std::span<const double> v_fast, double t_fast);

// N steps of the actuation-period model under a uniform pattern; returns
// the state and output at the next sensor-period boundary.
std::pair<Vector, double> rollout_plant(const DiscretePlant& dp_T,
                                        const Vector& x,
                                        std::span<const double> u_hats);

// PI resetting: one slow-rate PI update seeded from the latest actual (or
// estimated) action/output pair.
double reset_pi_and_predict(const DualRateGains& gains, double v_bar_prev,
                            double y_bar_prev, double r_prev, double r_next,
                            double y_next, double nt);

struct PredictResult {
  ControlPacket packet;
  PredictorState state;
};

// Runs the prediction algorithm m times and assembles the control packet
// [v_k, v_{k+1}, ..., v_{k+m}]. `meas` and `v_actual` are present when the
// measurement survived the local-to-remote link; otherwise every first
// iteration branch falls back to the stored estimates. `refs` holds the
// references r_k..r_{k+m}.
PredictResult predict_packet(const DualRateGains& gains,
                             const DiscretePlant& dp_T,
                             const PredictorState& ps,
                             const std::optional<MeasurementPacket>& meas,
                             std::optional<double> v_actual,
                             std::span<const double> refs,
                             const TimingConfig& timing, int m);

}  // namespace ncs
