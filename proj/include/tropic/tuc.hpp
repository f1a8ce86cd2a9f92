#pragma once

// Centralized LQ regulator of road vehicle counts around a nominal state:
//   x(t+1) - xbar = (x(t) - xbar) + Bmat (u(t) - ubar)
// with u_i the outflow of road i at its downstream junction.

#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "tropic/network.hpp"

namespace tropic {

struct LqrProblem {
  Eigen::VectorXd x_bar;
  Eigen::VectorXd u_bar;
  Eigen::MatrixXd Wq;  // state weight
  Eigen::MatrixXd Wr;  // control weight
  Eigen::MatrixXd Bmat;
};

struct LqrGain {
  Eigen::MatrixXd K;
  Eigen::MatrixXd P;
  double riccati_residual = 0.0;
  std::size_t iterations = 0;
  /// Spectral radius of I - Bmat K on range(Bmat), the controllable part.
  double spectral_radius = 0.0;
  /// Same over the whole space; 1 for a closed network (the total is conserved).
  double full_spectral_radius = 0.0;
};

/// Control-to-state matrix from the wiring and turning rates: column i has
/// -1 at road i and alpha at the roads leaving road i's downstream junction.
Eigen::MatrixXd control_matrix(const Network& net);

/// Throws DimensionError when sizes disagree with the road count.
LqrProblem build_lqr(const Network& net, Eigen::VectorXd x_bar, Eigen::VectorXd u_bar,
                     Eigen::MatrixXd Wq, Eigen::MatrixXd Wr);

/// Plain problem from explicit matrices (A = I).
LqrProblem make_lqr(Eigen::MatrixXd Bmat, Eigen::MatrixXd Wq, Eigen::MatrixXd Wr);

/// Riccati iteration from P = 0 until the sup-norm update falls below tol.
/// Throws ConvergenceError or std::runtime_error on a singular inner matrix.
LqrGain solve_lqr(const LqrProblem& p, double tol = 1e-12, std::size_t max_iter = 200000);

/// u = ubar - K (x - xbar), clamped to [0, 1/2].
Eigen::VectorXd apply_feedback(const LqrGain& gain, const LqrProblem& p, const Eigen::VectorXd& x);

/// Road vehicle counts: sections plus half of the downstream node, so the
/// counts sum to the network total.
Eigen::VectorXd road_counts(const Network& net, const NetworkState& state);

/// Largest flow per road an intersection sustains: its unit cell passes at
/// most 1/2 per step, shared by two entering roads.
inline constexpr double kNodeShare = 0.25;

/// Defaults for a seeded network: uniform xbar, ubar = min(d, 1-d, 1/4)
/// (unless nominal_flow is given), Wq = I - 11'/n on a closed network
/// (I otherwise), Wr = I.
LqrProblem default_lqr(const Network& net, const NetworkState& state, double state_weight = 1.0,
                       double control_weight = 1.0, double nominal_flow = -1.0);

double spectral_radius(const Eigen::MatrixXd& m);

/// Gain and diagnostics as JSON text.
std::string gain_text(const LqrGain& gain);

}  // namespace tropic
