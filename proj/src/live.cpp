#include "ncs/live.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "ncs/predictor.hpp"
#include "ncs/rng.hpp"
#include "ncs/simulation.hpp"
#include "ncs/udp_link.hpp"

namespace ncs {

namespace {

using Clock = std::chrono::steady_clock;

Clock::duration seconds_to_duration(double s) {
  return std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(s));
}

double lr_timeout(const Scenario& sc, const LiveConfig& lc) {
  if (lc.lr_max_timeout > 0.0) return lc.lr_max_timeout;
  return sc.delay.lr_fraction * sc.delay.tau_max + sc.delay.tau_c;
}

}  // namespace

SimulationTrace run_live_local(const Scenario& sc, const LiveConfig& lc) {
  sc.validate();
  const TimingConfig& tm = sc.timing;
  const int n_per = tm.steps_per_sensor();
  const double t_base = tm.base_period();
  const double nt = tm.sensor_period();
  const int horizon = sc.dropout.m_bound;

  const ContinuousPlant sim_plant = simulated_plant(sc);
  const DiscretePlant dp_base = discretize(sim_plant, t_base);
  const int n_states = sim_plant.states();

  UdpEndpoint ep(lc.bind_host, lc.bind_port, lc.peer_host, lc.peer_port);
  LinkInjection inj;
  inj.enabled = lc.inject;
  inj.delay = sc.delay;
  inj.drop_p = sc.dropout.p_lr;
  inj.seed = sc.seed;
  inj.drop_stream = rng_stream::drop_lr;
  inj.remote_leg = false;
  ep.set_injection(inj);

  const int periods = static_cast<int>(std::llround(sc.duration / nt));
  const std::vector<double> ref_base =
      sample_reference(sc.reference, t_base, periods * n_per + 1);

  SimulationTrace trace;
  trace.base_period = t_base;

  Vector x = Vector::Zero(n_states);
  Vector u_vec(1);
  PdState pd_local;
  ControlPacket last_rx;
  last_rx.seq = -1;
  last_rx.actions.assign(static_cast<std::size_t>(horizon) + 1, 0.0);
  double held_u = 0.0;
  double held_v = 0.0;

  const auto t0 = Clock::now() + seconds_to_duration(lc.startup_grace);
  std::this_thread::sleep_until(t0);

  for (int k = 0; k < periods; ++k) {
    const auto period_start = t0 + seconds_to_duration(k * nt);

    const double y_k = (dp_base.c * x)(0);
    MeasurementPacket meas;
    meas.seq = k;
    meas.y = y_k;
    meas.x = x;
    const bool sent = ep.send_measurement(meas);

    // Pre-arrival schedule from the newest packet on hand.
    const int slot = static_cast<int>(k - last_rx.seq);
    const bool exhausted = slot > last_rx.horizon();
    const double v_est =
        last_rx.actions[static_cast<std::size_t>(
            std::min(slot, last_rx.horizon()))];
    ActuationPlan plan;
    if (!exhausted) {
      plan = build_plan_dropout(sc.gains, pd_local, last_rx, slot, tm);
    } else {
      plan.entries.push_back({0, held_u, Provenance::held});
    }

    bool arrived = false;
    double v_act = 0.0;
    double tau_measured = 0.0;
    ControlPacket fresh;

    for (int l = 0; l < n_per; ++l) {
      std::this_thread::sleep_until(period_start +
                                    seconds_to_duration(l * t_base));
      if (!arrived) {
        // Drain anything deliverable right now; keep only this period's.
        while (auto pkt = ep.receive_control(Clock::now())) {
          if (pkt->seq != k) continue;  // late packets are already stale
          fresh = *pkt;
          arrived = true;
          tau_measured = std::chrono::duration<double>(
                             Clock::now() - period_start).count();
          v_act = fresh.actions[0];
          plan = build_plan_arrival(sc.gains, pd_local, last_rx, fresh,
                                    l * t_base, tm);
          break;
        }
      }

      const PlanEntry& active = plan.entry_at(l);
      const double u_applied = apply_nonlinearities(sim_plant, active.value);

      TraceRow row;
      row.time = (static_cast<double>(k) * n_per + l) * t_base;
      row.ref = ref_base[static_cast<std::size_t>(k * n_per + l)];
      row.y = (dp_base.c * x)(0);
      row.u = u_applied;
      row.v = active.prov == Provenance::actual
                  ? v_act
                  : (active.prov == Provenance::estimated ? v_est : held_v);
      row.prov = active.prov;
      row.tau = arrived ? tau_measured : 0.0;
      row.drop_lr = !sent;
      row.drop_rl = !arrived;
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
    if (!x.allFinite()) break;

    PeriodRecord rec;
    rec.seq = k;
    rec.tau = tau_measured;
    rec.drop_lr = !sent;
    rec.drop_rl = !arrived;
    rec.packet = arrived ? fresh : ControlPacket{};
    rec.head_seq = last_rx.seq;
    rec.exhausted = exhausted;
    rec.plan = plan;
    trace.periods.push_back(std::move(rec));

    bool any_actual = false;
    for (const auto& e : plan.entries)
      if (e.prov == Provenance::actual) any_actual = true;
    if (any_actual) {
      pd_local = PdState{v_act};
      held_v = v_act;
    } else if (plan.entries.back().prov == Provenance::estimated) {
      pd_local = PdState{v_est};
      held_v = v_est;
    }
    held_u = plan.entries.back().value;
    if (arrived) last_rx = fresh;
  }
  return trace;
}

SimulationTrace run_live_remote(const Scenario& sc, const LiveConfig& lc) {
  sc.validate();
  const TimingConfig& tm = sc.timing;
  const double nt = tm.sensor_period();
  const int horizon = sc.dropout.m_bound;
  const int n_per = tm.steps_per_sensor();
  const int n_states = sc.plant.states();

  const DiscretePlant dp_model = discretize(sc.plant, tm.actuation_period);

  UdpEndpoint ep(lc.bind_host, lc.bind_port, lc.peer_host, lc.peer_port);
  LinkInjection inj;
  inj.enabled = lc.inject;
  inj.delay = sc.delay;
  inj.drop_p = sc.dropout.p_rl;
  inj.seed = sc.seed;
  inj.drop_stream = rng_stream::drop_rl;
  inj.remote_leg = true;
  ep.set_injection(inj);

  const int periods = static_cast<int>(std::llround(sc.duration / nt));
  const std::vector<double> ref_base = sample_reference(
      sc.reference, tm.base_period(), periods * n_per + horizon * n_per + 1);
  auto boundary_ref = [&](int k) {
    const int idx = std::min(k * n_per,
                             static_cast<int>(ref_base.size()) - 1);
    return ref_base[static_cast<std::size_t>(idx)];
  };

  SimulationTrace trace;
  trace.base_period = tm.base_period();

  PredictorState pred = make_predictor_state(n_states);
  const double timeout = lr_timeout(sc, lc);

  // Phase-lock to the first measurement; generous startup window.
  std::optional<MeasurementPacket> first;
  const auto startup_deadline =
      Clock::now() + seconds_to_duration(lc.startup_grace + 10.0);
  first = ep.receive_measurement(startup_deadline);
  if (!first) return trace;  // peer never showed up; end gracefully

  const auto phase0 = Clock::now() -
                      seconds_to_duration(first->seq * nt);
  std::optional<MeasurementPacket> pending = first;

  for (int k = 0; k < periods; ++k) {
    std::optional<MeasurementPacket> meas;
    if (pending && pending->seq == k) {
      meas = pending;
      pending.reset();
    } else if (!pending) {
      // Wait for this period's measurement until its dropout deadline.
      const auto deadline =
          phase0 + seconds_to_duration(k * nt + timeout);
      while (auto got = ep.receive_measurement(deadline)) {
        if (got->seq == k) {
          meas = got;
          break;
        }
        if (got->seq > k) {
          pending = got;  // we fell behind; run the catch-up branches
          break;
        }
      }
    }

    std::vector<double> refs(static_cast<std::size_t>(horizon) + 1);
    for (int i = 0; i <= horizon; ++i)
      refs[static_cast<std::size_t>(i)] = boundary_ref(k + i);

    std::optional<double> v_actual;
    if (meas)
      v_actual =
          pi_step(sc.gains, pred.pi_replica, refs[0], meas->y, nt).first;

    auto result = predict_packet(sc.gains, dp_model, pred, meas, v_actual,
                                 refs, tm, horizon);
    result.packet.seq = k;
    pred = std::move(result.state);

    bool sent = false;
    if (!pending || pending->seq <= k) {
      // Current-period packet; catch-up periods are already history.
      sent = ep.send_control(result.packet);
    }

    PeriodRecord rec;
    rec.seq = k;
    rec.drop_lr = !meas.has_value();
    rec.drop_rl = !sent;
    rec.packet = result.packet;
    trace.periods.push_back(std::move(rec));
  }
  return trace;
}

}  // namespace ncs
