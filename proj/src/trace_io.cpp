#include "ncs/trace.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ncs {

std::vector<NetworkTraceEntry> network_trace(const SimulationTrace& trace) {
  std::vector<NetworkTraceEntry> out;
  out.reserve(trace.periods.size());
  for (const auto& rec : trace.periods)
    out.push_back({rec.seq, rec.tau, rec.drop_lr, rec.drop_rl});
  return out;
}

std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::estimated: return "est";
    case Provenance::actual: return "act";
    case Provenance::held: return "held";
  }
  return "?";
}

Provenance provenance_from_name(const std::string& name) {
  if (name == "est") return Provenance::estimated;
  if (name == "act") return Provenance::actual;
  if (name == "held") return Provenance::held;
  throw std::invalid_argument("unknown provenance: " + name);
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_trace_csv(std::ostream& os, const SimulationTrace& trace) {
  os << "time,ref,y,u,v,provenance,tau,drop_lr,drop_rl\n";
  for (const auto& r : trace.rows) {
    os << fmt(r.time) << ',' << fmt(r.ref) << ',' << fmt(r.y) << ','
       << fmt(r.u) << ',' << fmt(r.v) << ',' << provenance_name(r.prov) << ','
       << fmt(r.tau) << ',' << (r.drop_lr ? 1 : 0) << ','
       << (r.drop_rl ? 1 : 0) << '\n';
  }
}

void write_trace_csv(const std::string& path, const SimulationTrace& trace) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_trace_csv(os, trace);
}

LoadedTrace read_trace_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("empty trace file " + path);

  LoadedTrace out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 6)
      throw std::runtime_error("malformed trace row in " + path);
    out.time.push_back(std::stod(cells[0]));
    out.ref.push_back(std::stod(cells[1]));
    out.y.push_back(std::stod(cells[2]));
    out.u.push_back(std::stod(cells[3]));
    out.v.push_back(std::stod(cells[4]));
    out.prov.push_back(cells[5]);
  }
  return out;
}

}  // namespace ncs
