#include <cmath>

#include "doctest.h"
#include "tropic/tuc.hpp"

using namespace tropic;

namespace {

CityConfig torus(int rows, int cols, std::size_t m) {
  CityConfig c;
  c.rows = rows;
  c.cols = cols;
  c.sections_per_road = m;
  c.policy = PolicyKind::Tuc;
  return c;
}

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace

TEST_SUITE("tuc") {

TEST_CASE("scalar Riccati") {
  const auto g = solve_lqr(make_lqr(mat({{1}}), mat({{1}}), mat({{1}})));
  const double phi = (1 + std::sqrt(5.0)) / 2;
  CHECK(std::fabs(g.P(0, 0) - phi) < 1e-9);
  CHECK(std::fabs(g.K(0, 0) - phi / (1 + phi)) < 1e-9);
  CHECK(g.riccati_residual < 1e-9);
  CHECK(g.spectral_radius == doctest::Approx(1 - phi / (1 + phi)));
}

TEST_CASE("no state penalty means no feedback") {
  const auto g = solve_lqr(make_lqr(mat({{-1, 0.5}, {0.5, -1}}), Eigen::MatrixXd::Zero(2, 2),
                                    Eigen::MatrixXd::Identity(2, 2)));
  CHECK(g.K.isZero(0));
}

TEST_CASE("permutation symmetry") {
  const Eigen::MatrixXd b = mat({{-1, 0.5}, {0.5, -1}});
  const auto g = solve_lqr(make_lqr(b, Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)));
  CHECK(std::fabs(g.K(0, 0) - g.K(1, 1)) < 1e-12);
  CHECK(std::fabs(g.K(0, 1) - g.K(1, 0)) < 1e-12);
  CHECK(g.spectral_radius < 1);
}

TEST_CASE("dimension checks") {
  CHECK_THROWS_AS(make_lqr(mat({{1}}), Eigen::MatrixXd::Identity(2, 2), mat({{1}})), DimensionError);
  CHECK_THROWS(make_lqr(mat({{1, 0}, {0, 1}}), mat({{1, 2}, {0, 1}}), Eigen::MatrixXd::Identity(2, 2)));
}

TEST_CASE("control matrix of a junction") {
  CityConfig cfg = torus(2, 2, 3);
  cfg.torus = false;
  const Network net = build_city(cfg);
  const Eigen::MatrixXd b = control_matrix(net);
  const JunctionSpec rates;
  for (const Node& nd : net.nodes) {
    if (!nd.out4) continue;
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(b.cols());
    expected(static_cast<Eigen::Index>(nd.in1)) = rates.alpha14;
    expected(static_cast<Eigen::Index>(nd.in2)) = rates.alpha24;
    expected(static_cast<Eigen::Index>(*nd.out4)) = -1;
    CHECK(b.row(static_cast<Eigen::Index>(*nd.out4)).transpose() == expected);
  }
}

TEST_CASE("control matrix of a torus") {
  const Network net = build_city(torus(3, 4, 2));
  const Eigen::MatrixXd b = control_matrix(net);
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    int neg = 0, half = 0, zero = 0;
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
      neg += b(i, j) == -1;
      half += b(i, j) == 0.5;
      zero += b(i, j) == 0;
    }
    CHECK(neg == 1);
    CHECK(half == 2);
    CHECK(zero == b.rows() - 3);
  }
  CityConfig ring;
  ring.topology = Topology::Ring;
  ring.sections_per_road = 4;
  CHECK(control_matrix(build_city(ring)) == Eigen::MatrixXd::Zero(1, 1));
}

TEST_CASE("city gains") {
  for (auto [r, c] : {std::pair{2, 2}, std::pair{4, 4}, std::pair{2, 4}}) {
    const Network net = build_city(torus(r, c, 3));
    const auto s = seed_density(net, 0.4, Placement::Clustered, 1);
    const auto p = default_lqr(net, s);
    const auto g = solve_lqr(p);
    CHECK(g.riccati_residual < 1e-9);
    CHECK(g.spectral_radius < 1);
    CHECK(g.full_spectral_radius == doctest::Approx(1));
    CHECK(p.u_bar(0) == 0.25);
    CHECK(p.x_bar.sum() == doctest::Approx(total_vehicles(net, s)));
  }
}

TEST_CASE("feedback") {
  const Network net = build_city(torus(2, 2, 3));
  const auto s = seed_density(net, 0.2, Placement::Clustered, 1);
  const auto p = default_lqr(net, s);
  CHECK(p.u_bar(0) == s.init->density);
  const auto g = solve_lqr(p);
  CHECK(apply_feedback(g, p, p.x_bar).isApprox(p.u_bar));
  const Eigen::VectorXd overload = p.x_bar + Eigen::VectorXd::Constant(p.x_bar.size(), 0.3);
  const Eigen::VectorXd u = apply_feedback(g, p, overload);
  CHECK((u.array() - u(0)).abs().maxCoeff() < 1e-12);

  Eigen::VectorXd skew = p.x_bar;
  skew(0) -= 1e6;
  const Eigen::VectorXd clamped = apply_feedback(g, p, skew);
  CHECK(clamped.minCoeff() >= 0);
  CHECK(clamped.maxCoeff() <= 0.5);
  CHECK(clamped(0) == 0);

  Eigen::VectorXd x = road_counts(net, s);
  CHECK(x.sum() == doctest::Approx(total_vehicles(net, s)));
  CHECK_THROWS_AS(apply_feedback(g, p, Eigen::VectorXd::Zero(3)), DimensionError);
}

TEST_CASE("gain text") {
  const auto txt = gain_text(solve_lqr(make_lqr(mat({{1}}), mat({{1}}), mat({{1}}))));
  CHECK(txt.find("\"K\"") != std::string::npos);
  CHECK(txt.find("riccati_residual") != std::string::npos);
}

}
