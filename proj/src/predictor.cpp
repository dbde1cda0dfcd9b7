#include "ncs/predictor.hpp"

#include <stdexcept>

namespace ncs {

PredictorState make_predictor_state(int state_dim) {
  PredictorState ps;
  ps.x_hat = Vector::Zero(state_dim);
  ps.x_hat_base = Vector::Zero(state_dim);
  return ps;
}

PredictorState reset_state(PredictorState ps,
                           const std::optional<MeasurementPacket>& meas) {
  if (meas.has_value()) {
    if (meas->x.size() != ps.x_hat.size())
      throw std::invalid_argument("reset_state: state dimension mismatch");
    ps.x_hat = meas->x;
    ps.x_hat_base = meas->x;
  }
  return ps;
}

std::vector<double> rollout_pd(const DualRateGains& gains, PdState& replica,
                               std::span<const double> v_fast, double t_fast) {
  std::vector<double> out;
  out.reserve(v_fast.size());
  for (double v : v_fast) {
    auto [u, next] = pd_step(gains, replica, v, t_fast);
    out.push_back(u);
    replica = next;
  }
  return out;
}

std::pair<Vector, double> rollout_plant(const DiscretePlant& dp_T,
                                        const Vector& x,
                                        std::span<const double> u_hats) {
  Vector xi = x;
  Vector u(1);
  for (double uh : u_hats) {
    u(0) = uh;
    xi = dp_T.a * xi + dp_T.b * u;
  }
  return {xi, (dp_T.c * xi)(0)};
}

double reset_pi_and_predict(const DualRateGains& gains, double v_bar_prev,
                            double y_bar_prev, double r_prev, double r_next,
                            double y_next, double nt) {
  // Same difference equation as the slow-rate PI, seeded from the latest
  // actual-or-estimated pair.
  return pi_step(gains, PiState{v_bar_prev, r_prev - y_bar_prev}, r_next,
                 y_next, nt)
      .first;
}

PredictResult predict_packet(const DualRateGains& gains,
                             const DiscretePlant& dp_T,
                             const PredictorState& ps,
                             const std::optional<MeasurementPacket>& meas,
                             std::optional<double> v_actual,
                             std::span<const double> refs,
                             const TimingConfig& timing, int m) {
  gains.validate();
  timing.validate();
  if (m < 0) throw std::invalid_argument("predict_packet: negative horizon");
  if (static_cast<int>(refs.size()) < m + 1)
    throw std::invalid_argument("predict_packet: need m+1 references");
  if (meas.has_value() != v_actual.has_value())
    throw std::invalid_argument(
        "predict_packet: measurement and actual action must come together");

  const double nt = timing.sensor_period();

  // Generic actual-or-estimated quantities for the current period.
  const double v_bar = v_actual.value_or(ps.v_hat_prev);
  const double y_bar = meas ? meas->y : ps.y_hat_prev;

  PredictorState next = reset_state(ps, meas);

  ControlPacket packet;
  packet.actions.reserve(static_cast<std::size_t>(m) + 1);
  packet.actions.push_back(v_bar);

  Vector x_roll = next.x_hat;
  PdState pd = next.pd_replica;
  double v_held = v_bar;
  double v_pi = v_bar;
  double y_pi = y_bar;
  double r_pi = refs[0];

  Vector x_next_boundary = next.x_hat;
  double y_next_boundary = next.y_hat_prev;
  double v_next_boundary = next.v_hat_prev;

  for (int i = 1; i <= m; ++i) {
    const auto u_hats = rollout_pd(
        gains, pd, rate_convert(v_held, timing.multiplicity),
        timing.actuation_period);
    auto [x_ahead, y_ahead] = rollout_plant(dp_T, x_roll, u_hats);
    const double v_ahead = reset_pi_and_predict(
        gains, v_pi, y_pi, r_pi, refs[static_cast<std::size_t>(i)], y_ahead,
        nt);
    packet.actions.push_back(v_ahead);

    if (i == 1) {
      x_next_boundary = x_ahead;
      y_next_boundary = y_ahead;
      v_next_boundary = v_ahead;
    }
    x_roll = x_ahead;
    v_held = v_ahead;
    v_pi = v_ahead;
    y_pi = y_ahead;
    r_pi = refs[static_cast<std::size_t>(i)];
  }

  // Only the first iteration tracks the real timeline; the deeper ones are
  // speculative and are recomputed every period.
  next.x_hat = x_next_boundary;
  next.x_hat_base = x_next_boundary;
  next.y_hat_prev = y_next_boundary;
  next.v_hat_prev = v_next_boundary;
  next.pd_replica = PdState{v_bar};
  next.pi_replica = PiState{v_bar, refs[0] - y_bar};

  return {std::move(packet), std::move(next)};
}

}  // namespace ncs
