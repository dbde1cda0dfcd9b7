#pragma once

#include <string>

#include "ncs/scenario.hpp"
#include "ncs/trace.hpp"

namespace ncs {

struct LiveConfig {
  std::string bind_host = "127.0.0.1";
  int bind_port = 0;
  std::string peer_host = "127.0.0.1";
  int peer_port = 0;
  bool inject = true;       // software delay/dropout on the send paths
  double lr_max_timeout = 0.0;  // 0 picks lr_fraction * tau_max + tau_c
  double startup_grace = 0.5;   // seconds before period 0 starts
};

// Local role: owns the simulated plant, samples and transmits at NT,
// applies PD plans at T (plus arrival instants) in real time. Returns the
// same trace layout as run_simulation.
SimulationTrace run_live_local(const Scenario& scenario,
                               const LiveConfig& config);

// Remote role: slow-rate PI plus the prediction stage, phase-locked to the
// measurement stream, with the dropout timeout fallback. The returned
// trace holds per-period records only.
SimulationTrace run_live_remote(const Scenario& scenario,
                                const LiveConfig& config);

}  // namespace ncs
