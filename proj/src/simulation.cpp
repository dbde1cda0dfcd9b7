#include "ncs/simulation.hpp"

#include <cmath>
#include <stdexcept>

#include "ncs/errors.hpp"
#include "ncs/predictor.hpp"
#include "ncs/rng.hpp"

namespace ncs {

ContinuousPlant apply_mismatch(const ContinuousPlant& plant, double q_percent,
                               double r_percent) {
  if (q_percent == 0.0 && r_percent == 0.0) return plant;

  // Recognize the k/(s(s+a)) realization produced by make_gain_pole_plant.
  const bool family =
      plant.states() == 2 && plant.inputs() == 1 && plant.outputs() == 1 &&
      std::abs(plant.a(0, 0)) < 1e-12 && std::abs(plant.a(0, 1) - 1.0) < 1e-12 &&
      std::abs(plant.a(1, 0)) < 1e-12 && plant.a(1, 1) < 0.0 &&
      std::abs(plant.b(0, 0)) < 1e-12 && plant.b(1, 0) != 0.0 &&
      std::abs(plant.c(0, 0) - 1.0) < 1e-12 && std::abs(plant.c(0, 1)) < 1e-12;
  if (!family)
    throw std::invalid_argument(
        "apply_mismatch: plant is not in the gain/time-constant family");

  const double pole = -plant.a(1, 1);
  const double gain = plant.b(1, 0);
  // q% raises the input gain, r% stretches the lag. The two knobs worsen
  // the loop independently, so the (q_max, r_max) corner is the largest
  // mismatch; stretching tau must not eat into the gain increase.
  const double gain_scaled = gain * (1.0 + q_percent / 100.0);
  const double pole_scaled = pole / (1.0 + r_percent / 100.0);
  ContinuousPlant out = make_gain_pole_plant(gain_scaled, pole_scaled,
                                             plant.sat_limit, plant.dead_zone);
  out.dead_zone_subtractive = plant.dead_zone_subtractive;
  return out;
}

ContinuousPlant simulated_plant(const Scenario& sc) {
  return apply_mismatch(sc.plant, sc.mismatch_q, sc.mismatch_r);
}

namespace {

struct PlanWithInputs {
  ActuationPlan plan;
  double v_estimated = 0.0;  // PI sample behind estimated entries
  double v_actual = 0.0;     // PI sample behind recomputed entries
  double v_held = 0.0;       // stale sample behind held entries
};

double entry_input(const PlanWithInputs& p, Provenance prov) {
  switch (prov) {
    case Provenance::estimated: return p.v_estimated;
    case Provenance::actual: return p.v_actual;
    case Provenance::held: return p.v_held;
  }
  return 0.0;
}

// No-prediction baseline: on dropout hold the last applied command for the
// whole period; on arrival start the uniform sequence at the quantized
// arrival instant, holding the previous command before it.
ActuationPlan build_plan_no_prediction(const DualRateGains& gains,
                                       const PdState& pd, double v_bar,
                                       double held_u, double tau,
                                       const TimingConfig& timing) {
  const double t = timing.base_period();
  const int arrival =
      std::max(0, static_cast<int>(std::ceil(tau / t - 1e-9)));

  ActuationPlan plan;
  if (arrival > 0) plan.entries.push_back({0, held_u, Provenance::held});

  PdState state = pd;
  int next_u = 0;
  const int per_slot = timing.steps_per_actuation();
  int offset = arrival;
  while (offset < timing.steps_per_sensor() && next_u < timing.multiplicity) {
    auto [u, st] = pd_step(gains, state, v_bar, timing.actuation_period);
    state = st;
    plan.entries.push_back({offset, u, Provenance::actual});
    ++next_u;
    // Remaining actions go on the uniform grid after the arrival.
    const int d = offset / per_slot;
    offset = (d + 1) * per_slot;
  }
  if (plan.entries.empty())
    plan.entries.push_back({0, held_u, Provenance::held});
  plan.validate(timing);
  return plan;
}

}  // namespace

SimulationTrace run_simulation(const Scenario& sc) {
  sc.validate();
  const TimingConfig& tm = sc.timing;
  const int n_per = tm.steps_per_sensor();
  const double t_base = tm.base_period();
  const double nt = tm.sensor_period();
  const bool ideal = sc.mode == Mode::nominal;
  const bool predictive = sc.mode != Mode::no_prediction;
  const int horizon = predictive ? sc.dropout.m_bound : 0;

  const ContinuousPlant sim_plant = simulated_plant(sc);
  const DiscretePlant dp_base = discretize(sim_plant, t_base);
  const DiscretePlant dp_model = discretize(sc.plant, tm.actuation_period);
  const int n_states = sim_plant.states();

  const int periods = static_cast<int>(std::llround(sc.duration / nt));
  if (periods < 1) throw std::invalid_argument("run too short");
  const std::vector<double> ref_base = sample_reference(
      sc.reference, t_base, periods * n_per + horizon * n_per + 1);

  SimulationTrace trace;
  trace.base_period = t_base;
  trace.rows.reserve(static_cast<std::size_t>(periods) * n_per);
  trace.periods.reserve(static_cast<std::size_t>(periods));

  Vector x = Vector::Zero(n_states);
  Vector u_vec(1);
  PdState pd_local;
  PredictorState pred = make_predictor_state(n_states);
  PiState np_pi;     // no_prediction remote PI memory
  double np_v = 0.0; // last PI action it produced

  ControlPacket last_rx;  // zero preamble packet, one period in the past
  last_rx.seq = -1;
  last_rx.actions.assign(static_cast<std::size_t>(horizon) + 1, 0.0);

  double held_u = 0.0;  // command active at the end of the previous period
  double held_v = 0.0;  // PI sample that produced it

  for (int k = 0; k < periods; ++k) {
    std::vector<double> refs(static_cast<std::size_t>(horizon) + 1);
    for (int i = 0; i <= horizon; ++i)
      refs[static_cast<std::size_t>(i)] =
          ref_base[static_cast<std::size_t>((k + i) * n_per)];

    const double y_k = (dp_base.c * x)(0);

    bool drop_lr = false, drop_rl = false;
    double tau = 0.0;
    if (!ideal) {
      Rng r_lr = Rng::for_stream(sc.seed, rng_stream::drop_lr,
                                 static_cast<std::uint64_t>(k));
      Rng r_rl = Rng::for_stream(sc.seed, rng_stream::drop_rl,
                                 static_cast<std::uint64_t>(k));
      Rng r_tau = Rng::for_stream(sc.seed, rng_stream::delay,
                                  static_cast<std::uint64_t>(k));
      drop_lr = sample_dropout(sc.dropout.p_lr, r_lr);
      drop_rl = sample_dropout(sc.dropout.p_rl, r_rl);
      tau = sample_delay(sc.delay, r_tau);
    }

    // Remote side: slow-rate PI plus the prediction stage (or the bare PI
    // for the no-prediction baseline).
    ControlPacket pkt;
    if (predictive) {
      std::optional<MeasurementPacket> meas;
      std::optional<double> v_actual;
      if (!drop_lr) {
        meas = MeasurementPacket{k, y_k, x};
        v_actual =
            pi_step(sc.gains, pred.pi_replica, refs[0], y_k, nt).first;
      }
      auto result = predict_packet(sc.gains, dp_model, pred, meas, v_actual,
                                   refs, tm, horizon);
      pkt = std::move(result.packet);
      pkt.seq = k;
      pred = std::move(result.state);
    } else {
      if (!drop_lr) {
        auto [v, st] = pi_step(sc.gains, np_pi, refs[0], y_k, nt);
        np_pi = st;
        np_v = v;
      }
      pkt.seq = k;
      pkt.actions = {np_v};
    }

    // Local side: schedule the period's actuation.
    PlanWithInputs sched;
    sched.v_held = held_v;
    bool exhausted = false;
    std::int64_t head_seq = last_rx.seq;

    if (predictive) {
      const int slot = static_cast<int>(k - last_rx.seq);
      const int used_slot = std::min(slot, last_rx.horizon());
      exhausted = slot > last_rx.horizon();
      sched.v_estimated =
          last_rx.actions[static_cast<std::size_t>(used_slot)];
      sched.v_actual = pkt.actions[0];
      if (!drop_rl) {
        sched.plan =
            build_plan_arrival(sc.gains, pd_local, last_rx, pkt, tau, tm);
      } else if (!exhausted) {
        sched.plan = build_plan_dropout(sc.gains, pd_local, last_rx, slot, tm);
      } else {
        // Documented fallback: repeat the last command, flag the period.
        sched.plan.entries.push_back({0, held_u, Provenance::held});
      }
    } else {
      sched.v_estimated = np_v;
      sched.v_actual = pkt.actions[0];
      if (!drop_rl) {
        sched.plan = build_plan_no_prediction(sc.gains, pd_local,
                                              pkt.actions[0], held_u, tau, tm);
      } else {
        sched.plan.entries.push_back({0, held_u, Provenance::held});
      }
    }

    // Integrate the plant through the scheduled pattern.
    std::size_t cursor = 0;
    const PlanEntry* active = &sched.plan.entries[0];
    for (int l = 0; l < n_per; ++l) {
      while (cursor + 1 < sched.plan.entries.size() &&
             sched.plan.entries[cursor + 1].offset_steps <= l) {
        ++cursor;
      }
      active = &sched.plan.entries[cursor];
      const double u_applied = apply_nonlinearities(sim_plant, active->value);

      TraceRow row;
      row.time = (static_cast<double>(k) * n_per + l) * t_base;
      row.ref = ref_base[static_cast<std::size_t>(k * n_per + l)];
      row.y = (dp_base.c * x)(0);
      row.u = u_applied;
      row.v = entry_input(sched, active->prov);
      row.prov = active->prov;
      row.tau = tau;
      row.drop_lr = drop_lr;
      row.drop_rl = drop_rl;
      trace.rows.push_back(row);

      u_vec(0) = u_applied;
      x = dp_base.a * x + dp_base.b * u_vec;
      if (!x.allFinite()) {
        trace.diverged = true;
        break;
      }
      if (std::abs((dp_base.c * x)(0)) > sc.divergence_limit)
        trace.diverged = true;
    }

    PeriodRecord rec;
    rec.seq = k;
    rec.tau = tau;
    rec.drop_lr = drop_lr;
    rec.drop_rl = drop_rl;
    rec.packet = pkt;
    rec.head_seq = head_seq;
    rec.exhausted = exhausted;
    rec.plan = sched.plan;
    trace.periods.push_back(std::move(rec));

    if (!x.allFinite()) break;

    // End-of-period bookkeeping. The PD memory follows the last sample that
    // actually drove it; a plan with no recomputed entry never saw the new
    // packet's value.
    bool any_actual = false;
    for (const auto& e : sched.plan.entries)
      if (e.prov == Provenance::actual) any_actual = true;
    const PlanEntry& last_entry = sched.plan.entries.back();
    if (any_actual) {
      pd_local = PdState{sched.v_actual};
      held_v = sched.v_actual;
    } else if (last_entry.prov == Provenance::estimated) {
      pd_local = PdState{sched.v_estimated};
      held_v = sched.v_estimated;
    }
    held_u = last_entry.value;
    if (!drop_rl) last_rx = pkt;
  }

  return trace;
}

}  // namespace ncs
