#include "ncs/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace ncs {

void ContinuousPlant::validate() const {
  const int n = states();
  if (a.cols() != n) throw std::invalid_argument("plant: a must be square");
  if (b.rows() != n) throw std::invalid_argument("plant: b row mismatch");
  if (c.cols() != n) throw std::invalid_argument("plant: c column mismatch");
  if (d.size() != 0 && !d.isZero(0.0))
    throw std::invalid_argument("plant: feedthrough must be zero");
  if (!(sat_limit > 0.0))
    throw std::invalid_argument("plant: sat_limit must be positive");
  if (dead_zone < 0.0)
    throw std::invalid_argument("plant: dead_zone must be non-negative");
  if (!all_finite(a) || !all_finite(b) || !all_finite(c))
    throw std::invalid_argument("plant: non-finite matrix entries");
}

ContinuousPlant make_gain_pole_plant(double gain, double pole,
                                     double sat_limit, double dead_zone) {
  ContinuousPlant p;
  p.a = Matrix::Zero(2, 2);
  p.a(0, 1) = 1.0;
  p.a(1, 1) = -pole;
  p.b = Matrix::Zero(2, 1);
  p.b(1, 0) = gain;
  p.c = Matrix::Zero(1, 2);
  p.c(0, 0) = 1.0;
  p.d = Matrix::Zero(1, 1);
  p.sat_limit = sat_limit;
  p.dead_zone = dead_zone;
  p.validate();
  return p;
}

void TimingConfig::validate() const {
  if (!(actuation_period > 0.0))
    throw std::invalid_argument("timing: actuation period must be positive");
  if (multiplicity < 1)
    throw std::invalid_argument("timing: multiplicity must be >= 1");
  if (base_divisor < 1)
    throw std::invalid_argument("timing: base divisor must be >= 1");
}

Matrix LiftedPlant::block(int i) const {
  const int m = static_cast<int>(b_p.cols()) / block_count();
  return b_p.middleCols(static_cast<Eigen::Index>(i) * m, m);
}

namespace {

// exp([[A, B], [0, 0]] * s) = [[e^{As}, B(s)], [0, I]]
std::pair<Matrix, Matrix> zoh_pair(const Matrix& a, const Matrix& b,
                                   double s) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(b.cols());
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = a;
  aug.topRightCorner(n, m) = b;
  Matrix e = (aug * s).exp();
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

}  // namespace

DiscretePlant discretize(const ContinuousPlant& plant, double period) {
  plant.validate();
  if (!(period > 0.0))
    throw std::invalid_argument("discretize: period must be positive");
  auto [ad, bd] = zoh_pair(plant.a, plant.b, period);
  if (!all_finite(ad) || !all_finite(bd))
    throw std::runtime_error("discretize: matrix exponential not finite");
  return DiscretePlant{period, std::move(ad), std::move(bd), plant.c};
}

Matrix input_response(const ContinuousPlant& plant, double xi) {
  if (xi <= 0.0) return Matrix::Zero(plant.states(), plant.inputs());
  return zoh_pair(plant.a, plant.b, xi).second;
}

LiftedPlant lift(const ContinuousPlant& plant, const TimingConfig& timing,
                 const std::vector<double>& instants) {
  plant.validate();
  timing.validate();
  const double nt = timing.sensor_period();
  if (instants.empty() || instants.front() != 0.0)
    throw std::invalid_argument("lift: first actuation instant must be 0");
  for (std::size_t i = 0; i < instants.size(); ++i) {
    if (instants[i] >= nt)
      throw std::invalid_argument("lift: instant beyond the sensor period");
    if (i > 0 && instants[i] <= instants[i - 1])
      throw std::invalid_argument("lift: instants must strictly increase");
  }

  const int n = plant.states();
  const int m = plant.inputs();
  const int blocks = static_cast<int>(instants.size());

  LiftedPlant lp;
  lp.a_p = (plant.a * nt).exp();
  lp.c_p = plant.c;
  lp.instants = instants;
  lp.b_p = Matrix::Zero(n, static_cast<Eigen::Index>(blocks) * m);
  for (int i = 0; i < blocks; ++i) {
    const double next = (i + 1 < blocks) ? instants[i + 1] : nt;
    const Matrix tail = (plant.a * (nt - next)).exp();
    lp.b_p.middleCols(static_cast<Eigen::Index>(i) * m, m) =
        tail * input_response(plant, next - instants[i]);
  }
  if (!all_finite(lp.a_p) || !all_finite(lp.b_p))
    throw std::runtime_error("lift: non-finite lifted matrices");
  return lp;
}

double apply_nonlinearities(const ContinuousPlant& plant, double u) {
  double v = std::clamp(u, -plant.sat_limit, plant.sat_limit);
  if (std::abs(v) < plant.dead_zone) return 0.0;
  if (plant.dead_zone_subtractive)
    return v - (v > 0 ? plant.dead_zone : -plant.dead_zone);
  return v;
}

std::pair<Vector, Vector> step(const DiscretePlant& dp, const Vector& x,
                               const Vector& u) {
  if (x.size() != dp.a.rows() || u.size() != dp.b.cols())
    throw std::invalid_argument("step: dimension mismatch");
  return {dp.a * x + dp.b * u, dp.c * x};
}

std::pair<Vector, Vector> step(const LiftedPlant& lp, const Vector& x,
                               const Vector& u_stacked) {
  if (x.size() != lp.a_p.rows() || u_stacked.size() != lp.b_p.cols())
    throw std::invalid_argument("lifted step: dimension mismatch");
  return {lp.a_p * x + lp.b_p * u_stacked, lp.c_p * x};
}

}  // namespace ncs
