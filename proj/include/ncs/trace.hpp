#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ncs/controller.hpp"
#include "ncs/network.hpp"
#include "ncs/packets.hpp"

namespace ncs {

// One basic-period sample of the closed loop.
struct TraceRow {
  double time = 0.0;
  double ref = 0.0;
  double y = 0.0;
  double u = 0.0;  // applied command, after the static nonlinearities
  double v = 0.0;  // fast-rate PI sample feeding the PD at this step
  Provenance prov = Provenance::estimated;
  double tau = 0.0;
  bool drop_lr = false;
  bool drop_rl = false;
};

// Per sensor period bookkeeping kept for diagnostics and for re-checking
// that applied actions always match a reconstructible actuation plan.
struct PeriodRecord {
  std::int64_t seq = 0;
  double tau = 0.0;
  bool drop_lr = false;
  bool drop_rl = false;
  ControlPacket packet;        // what the remote side produced
  std::int64_t head_seq = -1;  // packet backing the estimated head
  bool exhausted = false;      // dropout run exceeded the packet horizon
  ActuationPlan plan;
};

struct SimulationTrace {
  double base_period = 0.0;
  std::vector<TraceRow> rows;
  std::vector<PeriodRecord> periods;
  bool diverged = false;
};

// Per-period link log, e.g. for sizing the horizon with estimate_m.
std::vector<NetworkTraceEntry> network_trace(const SimulationTrace& trace);

std::string provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);

void write_trace_csv(std::ostream& os, const SimulationTrace& trace);
void write_trace_csv(const std::string& path, const SimulationTrace& trace);

// Column view of a trace CSV; enough for the cost tooling.
struct LoadedTrace {
  std::vector<double> time, ref, y, u, v;
  std::vector<std::string> prov;
};

LoadedTrace read_trace_csv(const std::string& path);

}  // namespace ncs
