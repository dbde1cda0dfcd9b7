#pragma once

#include "ncs/scenario.hpp"
#include "ncs/trace.hpp"

namespace ncs {

// Deterministic closed-loop run at the basic period. One iteration per
// sensor period: sample, cross the simulated links, run the remote PI and
// prediction stage, schedule the local actuation pattern and integrate the
// plant through it.
SimulationTrace run_simulation(const Scenario& scenario);

// The plant actually integrated: scenario plant with the (q, r) mismatch.
ContinuousPlant simulated_plant(const Scenario& scenario);

// K and the time constant stretched by q% and r%; identity at (0, 0).
// Requires the k/(s(tau s + 1)) structure otherwise.
ContinuousPlant apply_mismatch(const ContinuousPlant& plant, double q_percent,
                               double r_percent);

}  // namespace ncs
