#include "ncs/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ncs/errors.hpp"
#include "ncs/rng.hpp"

namespace ncs {

double spectral_radius(const Matrix& m) {
  return m.eigenvalues().cwiseAbs().maxCoeff();
}

Vector symmetric_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  return es.eigenvalues();
}

Matrix clip_eigenvalues_min(const Matrix& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Vector d = es.eigenvalues().cwiseMax(floor);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

namespace {

Matrix pd_row_first(const DualRateGains& g, double t_act) {
  Matrix row(1, 2);
  row << g.k_pd() * (1.0 + g.td / t_act), -g.k_pd() * (g.td / t_act);
  return row;
}

Matrix pd_row_held(const DualRateGains& g) {
  Matrix row(1, 2);
  row << g.k_pd(), 0.0;
  return row;
}

std::vector<double> uniform_instants(const TimingConfig& timing) {
  std::vector<double> out;
  for (int j = 0; j < timing.multiplicity; ++j)
    out.push_back(j * timing.actuation_period);
  return out;
}

}  // namespace

LiftedController build_lifted_controller(const DualRateGains& gains,
                                         const TimingConfig& timing,
                                         std::optional<double> tau) {
  gains.validate();
  timing.validate();
  const int n = timing.multiplicity;
  const double t_act = timing.actuation_period;
  const double nt = timing.sensor_period();

  LiftedController lc;
  lc.a_c = Matrix::Zero(2, 2);
  lc.a_c(0, 0) = 1.0;
  lc.a_c(1, 0) = 1.0;
  lc.b_c = Matrix::Zero(2, 1);
  lc.b_c(0, 0) = 1.0;
  lc.b_bar_c = Matrix::Zero(2, 1);
  lc.b_bar_c(0, 0) = 1.0 - nt / gains.ti;

  // Uniform PD rows: the first carries the memory tap, the rest see the
  // held sample on both taps.
  Matrix c_uniform(n, 2);
  c_uniform.row(0) = pd_row_first(gains, t_act);
  for (int j = 1; j < n; ++j) c_uniform.row(j) = pd_row_held(gains);

  if (!tau.has_value()) {
    lc.c_c = c_uniform;
    lc.chi = Matrix::Zero(n, n);
    lc.chi_i = Matrix::Identity(n, n);
    lc.instants = uniform_instants(timing);
    return lc;
  }

  if (*tau < 0.0 || *tau >= nt)
    throw DisorderGuardViolation(
        "lifted controller: delay outside the sensor period");

  const double t_base = timing.base_period();
  const int arrival = std::max(
      0, static_cast<int>(std::ceil(*tau / t_base - 1e-9)));
  const int per_slot = timing.steps_per_actuation();
  const int d = arrival / per_slot;
  const bool on_slot = arrival % per_slot == 0;

  if (on_slot) {
    // Arrival on an actuation instant (d may be 0): the slots before d keep
    // estimates, the rest are recomputed; no instant is inserted.
    lc.c_c = c_uniform;
    lc.chi = Matrix::Zero(n, n);
    lc.chi_i = Matrix::Zero(n, n);
    for (int j = 0; j < std::min(d, n); ++j) lc.chi_i(j, j) = 1.0;
    for (int j = std::min(d, n); j < n; ++j) {
      lc.chi(j, j) = 1.0;
      lc.chi_i(j, j) = 1.0;
    }
    lc.instants = uniform_instants(timing);
    return lc;
  }

  // Off-grid arrival: one inserted instant carrying the current interval's
  // recomputed action. Rows 0..d are the estimated head, row d+1 the
  // recomputed duplicate of interval d, then the tail.
  lc.c_c = Matrix(n + 1, 2);
  for (int r = 0; r <= d; ++r)
    lc.c_c.row(r) = (r == 0) ? pd_row_first(gains, t_act) : pd_row_held(gains);
  lc.c_c.row(d + 1) =
      (d == 0) ? pd_row_first(gains, t_act) : pd_row_held(gains);
  for (int r = d + 2; r <= n; ++r) lc.c_c.row(r) = pd_row_held(gains);

  lc.chi = Matrix::Zero(n + 1, n);
  lc.chi_i = Matrix::Zero(n + 1, n);
  for (int j = 0; j <= d; ++j) lc.chi_i(j, j) = 1.0;
  for (int j = d; j < n; ++j) {
    lc.chi(j + 1, j) = 1.0;
    lc.chi_i(j + 1, j) = 1.0;
  }

  lc.instants = uniform_instants(timing);
  lc.instants.insert(
      lc.instants.begin() + d + 1,
      static_cast<double>(arrival) * t_base);
  return lc;
}

ClosedLoopModel::ClosedLoopModel(const ContinuousPlant& plant,
                                 const DualRateGains& gains,
                                 const TimingConfig& timing, bool reduced)
    : plant_(plant), gains_(gains), timing_(timing), reduced_(reduced) {
  plant_.validate();
  gains_.validate();
  timing_.validate();
  if (plant_.inputs() != 1 || plant_.outputs() != 1)
    throw std::invalid_argument("closed loop: SISO plant expected");
}

int ClosedLoopModel::dim() const {
  const int n = plant_.states();
  return reduced_ ? n + 2 : 2 * n + 2;
}

Matrix ClosedLoopModel::assemble(const LiftedPlant& lp, const Matrix& c_rows,
                                 bool delivery) const {
  const int n = plant_.states();
  const Matrix& a_p = lp.a_p;
  const Matrix& b_p = lp.b_p;
  const Matrix c_p = lp.c_p;

  LiftedController lc = build_lifted_controller(gains_, timing_, std::nullopt);
  const Matrix& a_c = lc.a_c;
  const Matrix& b_c = lc.b_c;
  const Matrix& b_bar_c = lc.b_bar_c;

  const Matrix top_left = a_p;
  const Matrix top_mid = b_p * c_rows;
  const Matrix mid_left = b_bar_c * c_p - b_c * c_p * a_p;
  const Matrix mid_mid = a_c - b_c * c_p * b_p * c_rows;

  Matrix out = Matrix::Zero(dim(), dim());
  out.topLeftCorner(n, n) = top_left;
  out.block(0, n, n, 2) = top_mid;
  out.block(n, 0, 2, n) = mid_left;
  out.block(n, n, 2, 2) = mid_mid;
  if (!reduced_) {
    // Prediction-error block: open-loop drift between deliveries, reset to
    // zero when a measurement closes the loop.
    if (!delivery) {
      out.block(n, n + 2, 2, n) = b_c * c_p * a_p - b_bar_c * c_p;
      out.block(n + 2, n + 2, n, n) = a_p;
    }
  }
  return out;
}

Matrix ClosedLoopModel::dropout_matrix() const {
  LiftedController lc = build_lifted_controller(gains_, timing_, std::nullopt);
  LiftedPlant lp = lift(plant_, timing_, lc.instants);
  return assemble(lp, lc.c_c, false);
}

Matrix ClosedLoopModel::delivery_matrix(double tau) const {
  LiftedController lc = build_lifted_controller(gains_, timing_, tau);
  LiftedPlant lp = lift(plant_, timing_, lc.instants);
  return assemble(lp, lc.c_c, true);
}

DelayGrid grid_delays(const DelayModel& dm, int l) {
  dm.validate();
  if (l < 2) throw std::invalid_argument("grid_delays: need at least 2 points");
  DelayGrid grid;
  const double span = dm.tau_max - dm.eta;
  double total = 0.0;
  for (int j = 0; j < l; ++j) {
    const double p = dm.eta + span * j / l;
    const double w = std::exp(-(p - dm.eta) / dm.phi);
    grid.points.push_back(p);
    grid.weights.push_back(w);
    total += w;
  }
  for (auto& w : grid.weights) w /= total;
  return grid;
}

namespace {

Matrix weighted_image(const std::vector<Matrix>& a1, const Vector& w,
                      const Matrix& q) {
  Matrix out = Matrix::Zero(q.rows(), q.cols());
  for (std::size_t j = 0; j < a1.size(); ++j)
    out += w(static_cast<Eigen::Index>(j)) *
           (a1[j].transpose() * q * a1[j]);
  return out;
}

// Solve Q - op(Q) = S where op(Q) = sum_j w_j A_j' Q A_j, by vectorizing:
// (I - sum_j w_j A_j' (x) A_j') vec(Q) = vec(S).
Matrix stein_solve(const std::vector<Matrix>& a1, const Vector& w,
                   const Matrix& s) {
  const int n = static_cast<int>(s.rows());
  Matrix big = Matrix::Identity(n * n, n * n);
  for (std::size_t j = 0; j < a1.size(); ++j) {
    const Matrix at = a1[j].transpose();
    for (int c1 = 0; c1 < n; ++c1)
      for (int r1 = 0; r1 < n; ++r1)
        for (int c2 = 0; c2 < n; ++c2)
          for (int r2 = 0; r2 < n; ++r2)
            big(r1 + n * r2, c1 + n * c2) -=
                w(static_cast<Eigen::Index>(j)) * at(r1, c1) * at(r2, c2);
  }
  Vector rhs(n * n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) rhs(r + n * c) = s(r, c);
  Vector sol = big.colPivHouseholderQr().solve(rhs);
  Matrix q(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) q(r, c) = sol(r + n * c);
  return 0.5 * (q + q.transpose());
}

LyapunovCertificate evaluate(const Matrix& a0, const std::vector<Matrix>& a1,
                             const Vector& w, const Matrix& q) {
  LyapunovCertificate cert;
  cert.q = q;
  cert.min_eig_q = symmetric_eigenvalues(q).minCoeff();
  cert.residual_0 =
      symmetric_eigenvalues(a0.transpose() * q * a0 - q).maxCoeff();
  cert.residual_1 =
      symmetric_eigenvalues(weighted_image(a1, w, q) - q).maxCoeff();
  return cert;
}

}  // namespace

FeasibilityResult check_feasibility(const ClosedLoopModel& cl,
                                    const DelayGrid& grid,
                                    const FeasibilityOptions& opts) {
  const int n = cl.dim();
  const Matrix a0 = cl.dropout_matrix();
  std::vector<Matrix> a1;
  a1.reserve(grid.points.size());
  for (double p : grid.points) a1.push_back(cl.delivery_matrix(p));
  Vector w = Eigen::Map<const Vector>(grid.weights.data(),
                                      static_cast<Eigen::Index>(
                                          grid.weights.size()));
  if (!all_finite(a0)) throw std::runtime_error("check_feasibility: A_cl,0");

  const std::vector<Matrix> a0_only{a0};
  const Vector w0 = Vector::Ones(1);

  Rng rng(opts.seed);
  FeasibilityResult result;
  double best_worst = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart < opts.restarts; ++restart) {
    Matrix q = Matrix::Identity(n, n);
    if (restart > 0) {
      Matrix jitter(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) jitter(r, c) = rng.uniform01() - 0.5;
      q += 0.5 * restart * (jitter + jitter.transpose());
      q = clip_eigenvalues_min(q, 0.1);
    }

    // Successive restarts aim at shallower interior depths so tightly
    // feasible problems are still reachable.
    const double margin = 1e-3 * std::pow(0.2, restart);

    for (int it = 0; it < opts.max_iterations; ++it) {
      ++result.iterations;
      q = clip_eigenvalues_min(0.5 * (q + q.transpose()), opts.eps_pd);
      q *= static_cast<double>(n) / q.trace();
      Matrix s0 = q - a0.transpose() * q * a0;
      if (symmetric_eigenvalues(s0).minCoeff() < margin)
        q = stein_solve(a0_only, w0, clip_eigenvalues_min(s0, margin));

      Matrix s1 = q - weighted_image(a1, w, q);
      if (symmetric_eigenvalues(s1).minCoeff() < margin)
        q = stein_solve(a1, w, clip_eigenvalues_min(s1, margin));

      Matrix qn = clip_eigenvalues_min(0.5 * (q + q.transpose()), 0.0);
      qn *= static_cast<double>(n) / qn.trace();
      LyapunovCertificate cert = evaluate(a0, a1, w, qn);
      const double scale = std::max(1.0, qn.norm());
      const double worst =
          std::max({cert.residual_0 + opts.eps_neg * scale,
                    cert.residual_1 + opts.eps_neg * scale,
                    opts.eps_pd * scale - cert.min_eig_q});
      if (worst < best_worst) {
        best_worst = worst;
        result.certificate = cert;
      }
      if (worst <= 0.0) {
        result.feasible = true;
        result.certificate = cert;
        return result;
      }
    }
  }
  result.feasible = result.certificate.feasible();
  return result;
}

LyapunovCertificate verify_certificate(const ClosedLoopModel& cl,
                                       const DelayGrid& grid,
                                       const Matrix& q) {
  if (q.rows() != q.cols() || q.rows() != cl.dim())
    throw std::invalid_argument("verify_certificate: dimension mismatch");
  if ((q - q.transpose()).norm() > 1e-9 * std::max(1.0, q.norm()))
    throw std::invalid_argument("verify_certificate: Q must be symmetric");
  const Matrix a0 = cl.dropout_matrix();
  std::vector<Matrix> a1;
  for (double p : grid.points) a1.push_back(cl.delivery_matrix(p));
  Vector w = Eigen::Map<const Vector>(grid.weights.data(),
                                      static_cast<Eigen::Index>(
                                          grid.weights.size()));
  return evaluate(a0, a1, w, q);
}

}  // namespace ncs
