#include "tropic/tuc.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace tropic {

namespace {

double inf_norm(const Eigen::MatrixXd& m) {
  return m.size() ? m.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
}

// One Riccati update; returns the next P and, through k, the matching gain.
Eigen::MatrixXd riccati_update(const LqrProblem& p, const Eigen::MatrixXd& P, Eigen::MatrixXd& k) {
  const Eigen::MatrixXd& B = p.Bmat;
  const Eigen::MatrixXd S = p.Wr + B.transpose() * P * B;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
  if (!lu.isInvertible()) throw std::runtime_error("solve_lqr: Wr + B'PB is singular");
  k = lu.solve(B.transpose() * P);
  Eigen::MatrixXd next = p.Wq + P - P * B * k;
  return 0.5 * (next + next.transpose());
}

}  // namespace

Eigen::MatrixXd control_matrix(const Network& net) {
  const auto n = static_cast<Eigen::Index>(net.roads.size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  if (net.is_ring()) return b;  // the outflow re-enters the same road
  const JunctionSpec rates;
  for (const Road& r : net.roads) {
    const auto i = static_cast<Eigen::Index>(r.id);
    b(i, i) -= 1.0;
    const Node& nd = net.nodes[*r.to];
    const bool first = nd.in1 == r.id;
    if (nd.out3) b(static_cast<Eigen::Index>(*nd.out3), i) += first ? rates.alpha13 : rates.alpha23;
    if (nd.out4) b(static_cast<Eigen::Index>(*nd.out4), i) += first ? rates.alpha14 : rates.alpha24;
  }
  return b;
}

LqrProblem make_lqr(Eigen::MatrixXd Bmat, Eigen::MatrixXd Wq, Eigen::MatrixXd Wr) {
  const auto n = Bmat.rows(), k = Bmat.cols();
  if (Wq.rows() != n || Wq.cols() != n) throw DimensionError("lqr: Wq must be n x n");
  if (Wr.rows() != k || Wr.cols() != k) throw DimensionError("lqr: Wr must be k x k");
  if (!Wq.isApprox(Wq.transpose()) || !Wr.isApprox(Wr.transpose()))
    throw std::invalid_argument("lqr: weights must be symmetric");
  LqrProblem p;
  p.x_bar = Eigen::VectorXd::Zero(n);
  p.u_bar = Eigen::VectorXd::Zero(k);
  p.Wq = std::move(Wq);
  p.Wr = std::move(Wr);
  p.Bmat = std::move(Bmat);
  return p;
}

LqrProblem build_lqr(const Network& net, Eigen::VectorXd x_bar, Eigen::VectorXd u_bar,
                     Eigen::MatrixXd Wq, Eigen::MatrixXd Wr) {
  const auto n = static_cast<Eigen::Index>(net.roads.size());
  if (x_bar.size() != n || u_bar.size() != n) throw DimensionError("lqr: nominal vectors need one entry per road");
  LqrProblem p = make_lqr(control_matrix(net), std::move(Wq), std::move(Wr));
  p.x_bar = std::move(x_bar);
  p.u_bar = std::move(u_bar);
  return p;
}

LqrGain solve_lqr(const LqrProblem& p, double tol, std::size_t max_iter) {
  const auto n = p.Bmat.rows();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd k;
  LqrGain g;
  for (std::size_t it = 1;; ++it) {
    Eigen::MatrixXd next = riccati_update(p, P, k);
    const double change = inf_norm(next - P);
    P = std::move(next);
    if (!P.allFinite()) throw ConvergenceError("solve_lqr: Riccati iteration diverged");
    if (change < tol) {
      g.iterations = it;
      break;
    }
    if (it >= max_iter) throw ConvergenceError("solve_lqr: no convergence within the iteration budget");
  }
  g.riccati_residual = inf_norm(P - riccati_update(p, P, k));
  g.K = k;
  g.P = P;

  const Eigen::MatrixXd closed = Eigen::MatrixXd::Identity(n, n) - p.Bmat * g.K;
  g.full_spectral_radius = spectral_radius(closed);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(p.Bmat, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  const double cut = sv.size() ? 1e-10 * std::max(1.0, sv(0)) : 0.0;
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > cut) ++rank;
  if (rank == 0) {
    g.spectral_radius = 0.0;
  } else {
    const Eigen::MatrixXd basis = svd.matrixU().leftCols(rank);
    g.spectral_radius = spectral_radius(basis.transpose() * closed * basis);
  }
  return g;
}

Eigen::VectorXd apply_feedback(const LqrGain& gain, const LqrProblem& p, const Eigen::VectorXd& x) {
  if (x.size() != p.x_bar.size()) throw DimensionError("apply_feedback: state size mismatch");
  Eigen::VectorXd u = p.u_bar - gain.K * (x - p.x_bar);
  return u.cwiseMax(0.0).cwiseMin(kCapacity);
}

Eigen::VectorXd road_counts(const Network& net, const NetworkState& state) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(net.roads.size()));
  for (const Road& r : net.roads) {
    const auto& n = state.roads[r.id].n;
    double sum = std::accumulate(n.begin(), n.end(), 0.0);
    if (r.to) sum += 0.5 * state.junctions[*r.to].n0;
    x(static_cast<Eigen::Index>(r.id)) = sum;
  }
  return x;
}

LqrProblem default_lqr(const Network& net, const NetworkState& state, double state_weight,
                       double control_weight, double nominal_flow) {
  const auto n = static_cast<Eigen::Index>(net.roads.size());
  const double total = total_vehicles(net, state);
  const double d = state.init->density;
  const double u = nominal_flow >= 0 ? nominal_flow : std::min({d, 1.0 - d, kNodeShare});
  Eigen::MatrixXd wq = Eigen::MatrixXd::Identity(n, n);
  if (net.closed()) wq -= Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  return build_lqr(net, Eigen::VectorXd::Constant(n, total / static_cast<double>(n)),
                   Eigen::VectorXd::Constant(n, u), state_weight * wq,
                   control_weight * Eigen::MatrixXd::Identity(n, n));
}

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  const Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::string gain_text(const LqrGain& gain) {
  nlohmann::ordered_json doc;
  doc["iterations"] = gain.iterations;
  doc["riccati_residual"] = gain.riccati_residual;
  doc["spectral_radius"] = gain.spectral_radius;
  doc["full_spectral_radius"] = gain.full_spectral_radius;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < gain.K.rows(); ++i) {
    nlohmann::ordered_json r = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < gain.K.cols(); ++j) r.push_back(gain.K(i, j));
    rows.push_back(std::move(r));
  }
  doc["K"] = std::move(rows);
  return doc.dump(2) + "\n";
}

}  // namespace tropic
