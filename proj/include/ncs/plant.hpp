#pragma once

#include <utility>
#include <vector>

#include "ncs/linalg.hpp"

namespace ncs {

// Continuous LTI plant dx/dt = A x + B u, y = C x, with the static input
// nonlinearities measured on the actuator (saturation and dead zone).
struct ContinuousPlant {
  Matrix a;  // n x n
  Matrix b;  // n x m
  Matrix c;  // p x n
  Matrix d;  // p x m, zero here
  double sat_limit = 1.0;
  double dead_zone = 0.0;
  // Dead-zone branch shape: zero inside the band, identity outside by
  // default; subtractive shifts the outside branch by the band width.
  bool dead_zone_subtractive = false;

  int states() const { return static_cast<int>(a.rows()); }
  int inputs() const { return static_cast<int>(b.cols()); }
  int outputs() const { return static_cast<int>(c.rows()); }

  void validate() const;
};

// k/(s(s+a)) realized with states (position, velocity).
ContinuousPlant make_gain_pole_plant(double gain, double pole,
                                     double sat_limit = 1.0,
                                     double dead_zone = 0.0);

// Exact ZOH model at a fixed period: x_{k+1} = a x_k + b u_k, y_k = c x_k.
struct DiscretePlant {
  double period = 0.0;
  Matrix a;
  Matrix b;
  Matrix c;
};

// Periods of the dual-rate scheme: actuation period T, sensor period NT
// and basic period t = T/L used to place non-uniform actuation instants.
struct TimingConfig {
  double actuation_period = 0.1;  // T
  int multiplicity = 2;           // N >= 1
  int base_divisor = 10;          // L >= 1, t = T/L

  double base_period() const { return actuation_period / base_divisor; }
  double sensor_period() const { return actuation_period * multiplicity; }
  int steps_per_actuation() const { return base_divisor; }
  int steps_per_sensor() const { return base_divisor * multiplicity; }

  void validate() const;
};

// Lifted model at the sensor period: one step consumes the stacked input
// vector applied over the actuation instants of the period.
//
//   x_{k+1} = a_p x_k + [b_0* ... b_Nbar*] U_k,   y_k = c_p x_k
//
// with b_i* = e^{A (NT - l_{i+1})} B(l_{i+1} - l_i) and l_{Nbar+1} = NT.
struct LiftedPlant {
  Matrix a_p;
  Matrix b_p;  // n x (Nbar+1)*m, column blocks per instant
  Matrix c_p;
  std::vector<double> instants;  // strictly increasing, first 0, all < NT

  int block_count() const { return static_cast<int>(instants.size()); }
  Matrix block(int i) const;  // b_i*
};

// Exact discretization via the augmented-matrix exponential
// exp([[A, B], [0, 0]] * period).
DiscretePlant discretize(const ContinuousPlant& plant, double period);

// B(xi) = integral_0^xi e^{A g} B dg for xi > 0, zero matrix otherwise.
Matrix input_response(const ContinuousPlant& plant, double xi);

LiftedPlant lift(const ContinuousPlant& plant, const TimingConfig& timing,
                 const std::vector<double>& instants);

// Saturation then dead zone.
double apply_nonlinearities(const ContinuousPlant& plant, double u);

// One discrete step; output is the pre-update output c x.
std::pair<Vector, Vector> step(const DiscretePlant& dp, const Vector& x,
                               const Vector& u);

// One lifted step with the stacked input vector (block_count entries per
// input channel).
std::pair<Vector, Vector> step(const LiftedPlant& lp, const Vector& x,
                               const Vector& u_stacked);

}  // namespace ncs
