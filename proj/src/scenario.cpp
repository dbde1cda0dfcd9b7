#include "ncs/scenario.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ncs {

Mode mode_from_name(const std::string& name) {
  if (name == "nominal") return Mode::nominal;
  if (name == "no_prediction") return Mode::no_prediction;
  if (name == "delay_independent") return Mode::delay_independent;
  throw std::invalid_argument("unknown mode: " + name);
}

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::nominal: return "nominal";
    case Mode::no_prediction: return "no_prediction";
    case Mode::delay_independent: return "delay_independent";
  }
  return "?";
}

void Scenario::validate() const {
  plant.validate();
  timing.validate();
  gains.validate();
  delay.validate();
  dropout.validate();
  reference.validate();
  require_disorder_guard(delay, timing);
  if (!(duration > 0.0))
    throw std::invalid_argument("scenario: duration must be positive");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

Matrix parse_matrix(const std::string& text) {
  const auto rows = split(text, ';');
  if (rows.empty()) throw std::invalid_argument("empty matrix literal");
  std::vector<std::vector<double>> vals;
  for (const auto& r : rows) {
    std::vector<double> row;
    for (const auto& c : split(r, ',')) row.push_back(std::stod(c));
    vals.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(vals.size()),
           static_cast<Eigen::Index>(vals[0].size()));
  for (std::size_t r = 0; r < vals.size(); ++r) {
    if (vals[r].size() != vals[0].size())
      throw std::invalid_argument("ragged matrix literal");
    for (std::size_t c = 0; c < vals[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          vals[r][c];
  }
  return m;
}

std::vector<StepSpec> parse_steps(const std::string& text) {
  std::vector<StepSpec> out;
  for (const auto& item : split(text, ',')) {
    const auto pos = item.find(':');
    if (pos == std::string::npos)
      throw std::invalid_argument("step spec must be time:level");
    out.push_back(
        {std::stod(item.substr(0, pos)), std::stod(item.substr(pos + 1))});
  }
  return out;
}

class MapReader {
 public:
  explicit MapReader(const KeyValues& kv) : kv_(kv) {}

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  double num(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : std::stod(it->second);
  }

  int integer(const std::string& key, int fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : std::stoi(it->second);
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  bool flag(const std::string& key, bool fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    return it->second == "1" || it->second == "true" || it->second == "yes";
  }

 private:
  const KeyValues& kv_;
};

}  // namespace

KeyValues parse_config_text(const std::string& text) {
  KeyValues kv;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line without '=': " + line);
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str());
}

Scenario scenario_from_map(const KeyValues& kv) {
  MapReader r(kv);
  Scenario sc;

  if (r.has("plant.a")) {
    sc.plant.a = parse_matrix(r.text("plant.a", ""));
    sc.plant.b = parse_matrix(r.text("plant.b", ""));
    sc.plant.c = parse_matrix(r.text("plant.c", ""));
    sc.plant.d = Matrix::Zero(sc.plant.c.rows(), sc.plant.b.cols());
    sc.plant.sat_limit = r.num("plant.sat", 1.0);
    sc.plant.dead_zone = r.num("plant.dead_zone", 0.0);
    sc.plant.dead_zone_subtractive =
        r.flag("plant.dead_zone_subtractive", false);
  } else {
    sc.plant = make_gain_pole_plant(
        r.num("plant.gain", 6.3), r.num("plant.pole", 17.7),
        r.num("plant.sat", 1.0), r.num("plant.dead_zone", 0.0));
    sc.plant.dead_zone_subtractive =
        r.flag("plant.dead_zone_subtractive", false);
  }

  sc.mismatch_q = r.num("mismatch.q", 0.0);
  sc.mismatch_r = r.num("mismatch.r", 0.0);

  sc.timing.actuation_period = r.num("timing.T", 0.1);
  sc.timing.multiplicity = r.integer("timing.N", 2);
  sc.timing.base_divisor = r.integer("timing.L", 10);

  sc.gains.kp = r.num("gains.kp", 12.0);
  sc.gains.td = r.num("gains.td", 0.01);
  sc.gains.ti = r.num("gains.ti", 3.5);

  sc.delay.eta = r.num("delay.eta", 0.04);
  sc.delay.phi = r.num("delay.phi", 0.01);
  sc.delay.tau_c = r.num("delay.tau_c", 0.0);
  sc.delay.tau_max = r.num("delay.tau_max", 0.08);
  sc.delay.lr_fraction = r.num("delay.lr_fraction", 0.5);

  sc.dropout.p_lr = r.num("dropout.p_lr", 0.3);
  sc.dropout.p_rl = r.num("dropout.p_rl", 0.3);
  sc.dropout.m_bound = r.integer("dropout.m", 3);

  const std::string rtype = r.text("reference.type", "steps");
  if (rtype == "steps") {
    sc.reference.type = ReferenceSpec::Type::steps;
  } else if (rtype == "lissajous") {
    sc.reference.type = ReferenceSpec::Type::lissajous;
  } else {
    throw std::invalid_argument("unknown reference.type: " + rtype);
  }
  if (r.has("reference.steps"))
    sc.reference.steps = parse_steps(r.text("reference.steps", ""));
  else if (sc.reference.type == ReferenceSpec::Type::steps)
    sc.reference.steps = {{1.0, 0.04}, {10.0, 0.0}, {20.0, 0.04}, {30.0, 0.0}};
  sc.reference.filter_tc = r.num("reference.filter_tc", 0.5);
  sc.reference.amp_x = r.num("reference.amp_x", 0.02);
  sc.reference.amp_y = r.num("reference.amp_y", 0.015);
  sc.reference.ratio_a = r.integer("reference.ratio_a", 3);
  sc.reference.ratio_b = r.integer("reference.ratio_b", 2);
  sc.reference.omega = r.num("reference.omega", 0.15707963267948966);
  sc.reference.phase = r.num("reference.phase", 1.5707963267948966);
  sc.reference.axis = r.text("reference.axis", "x") == "y"
                          ? ReferenceSpec::Axis::y
                          : ReferenceSpec::Axis::x;

  sc.duration = r.num("duration", 40.0);
  sc.seed = static_cast<std::uint64_t>(
      std::stoull(r.text("seed", "12345")));
  sc.mode = mode_from_name(r.text("mode", "delay_independent"));
  sc.divergence_limit = r.num("divergence_limit", 1e3);

  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& path, const KeyValues& overrides) {
  KeyValues kv = parse_config_file(path);
  for (const auto& [k, v] : overrides) kv[k] = v;
  return scenario_from_map(kv);
}

}  // namespace ncs
