#include <random>

#include "doctest.h"
#include "tropic/minplus.hpp"

using namespace tropic;

namespace {

const double eps = kEpsilon;

MinPlusMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::uniform_int_distribution<int> val(-20, 20), coin(0, 4);
  MinPlusMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = coin(rng) == 0 ? eps : val(rng);
  return m;
}

// Straight definition, used as an oracle for mat_otimes.
MinPlusMatrix naive_product(const MinPlusMatrix& a, const MinPlusMatrix& b) {
  MinPlusMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double best = eps;
      for (std::size_t k = 0; k < a.cols(); ++k)
        if (a(i, k) != eps && b(k, j) != eps) best = std::min(best, a(i, k) + b(k, j));
      out(i, j) = best;
    }
  return out;
}

}  // namespace

TEST_SUITE("minplus") {

TEST_CASE("scalar operations") {
  CHECK(oplus(3.0, 5.0) == 3.0);
  CHECK(oplus(eps, 7.0) == 7.0);
  CHECK(oplus(-2.0, 4.0) == -2.0);
  CHECK(otimes(3.0, 5.0) == 8.0);
  CHECK(otimes(eps, 7.0) == eps);
  CHECK(otimes(7.0, eps) == eps);
  CHECK(otimes(0.0, 4.5) == 4.5);
  CHECK(oplus(MinPlusValue(3), MinPlusValue::epsilon()) == MinPlusValue(3));
  CHECK(otimes(MinPlusValue::unity(), MinPlusValue(2)) == MinPlusValue(2));
  CHECK(MinPlusValue{}.is_epsilon());
}

TEST_CASE("magnitude cap") {
  CHECK_THROWS_AS(otimes(9e14, 9e14), DivergenceError);
  CHECK_NOTHROW(otimes(9e14, 9e14, 1e16));
  CHECK_THROWS_AS(MinPlusValue(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
}

TEST_CASE("matrix product") {
  const MinPlusMatrix a{{0, 1}, {eps, 0}};
  const MinPlusMatrix b{{0, eps}, {2, 0}};
  CHECK(mat_otimes(a, b) == MinPlusMatrix{{0, 1}, {2, 0}});

  std::mt19937_64 rng(7);
  const auto m = random_matrix(rng, 5, 5);
  CHECK(mat_otimes(MinPlusMatrix::identity(5), m) == m);
  CHECK(mat_otimes(m, MinPlusMatrix::identity(5)) == m);
  CHECK(mat_otimes(MinPlusMatrix(5, 5), m) == MinPlusMatrix(5, 5));
  for (int k = 0; k < 20; ++k) {
    const auto x = random_matrix(rng, 3, 6), y = random_matrix(rng, 6, 4);
    CHECK(mat_otimes(x, y) == naive_product(x, y));
  }
  CHECK_THROWS_AS(mat_otimes(MinPlusMatrix(2, 3), MinPlusMatrix(2, 3)), DimensionError);
  CHECK_THROWS_AS(mat_oplus(MinPlusMatrix(2, 3), MinPlusMatrix(3, 2)), DimensionError);
}

TEST_CASE("affine step") {
  const Vector q{4, 7};
  CHECK(affine_step(MinPlusMatrix(2, 2), q, Vector{1, 2}) == Vector{1, 2});
  CHECK(affine_step(MinPlusMatrix::identity(2), q, Vector{eps, eps}) == q);
  CHECK(mat_vec_otimes(MinPlusMatrix{{1, eps}, {0, 2}}, Vector{3, 1}) == Vector{4, 3});
}

TEST_CASE("standard product skips zero coefficients") {
  const StandardMatrix m{{1, 0}, {0, -1}};
  const Vector r = mat_vec_standard(m, Vector{2, eps});
  CHECK(r[0] == 2.0);
  CHECK(r[1] == -eps);
}

TEST_CASE("mixed implicit step") {
  SUBCASE("no implicit term") {
    const MinPlusMatrix d{{0, 1}, {eps, 0}};
    const StandardMatrix h{{1, 1}, {0, 2}};
    const StandardMatrix g(2, 2);
    const Vector q{1, 2}, b{eps, 10};
    // D (x) (Hq) (+) b with Hq = (3, 4)
    CHECK(mixed_implicit_step(d, h, g, q, b) == Vector{3, 4});
  }
  SUBCASE("identity") {
    const Vector q{3, -1, 5};
    CHECK(mixed_implicit_step(MinPlusMatrix::identity(3), StandardMatrix::identity(3), StandardMatrix(3, 3), q,
                              Vector(3, eps)) == q);
  }
  SUBCASE("substitution order") {
    // x0 = min(q0, 5); x1 = min(q1 + x0, 9): x1 needs the fresh x0
    MinPlusMatrix d(2, 2);
    d(0, 0) = 0;
    d(1, 1) = 0;
    StandardMatrix h(2, 2), g(2, 2);
    h(0, 0) = 1;
    h(1, 1) = 1;
    g(1, 0) = 1;
    const Vector q{7, 2}, b{5, 9};
    CHECK(implicit_evaluation_order(d, g) == std::vector<std::size_t>{0, 1});
    CHECK(mixed_implicit_step(d, h, g, q, b) == Vector{5, 7});
    CHECK(mixed_implicit_step(d, h, g, q, b, ImplicitMode::FixedPoint) == Vector{5, 7});
  }
  SUBCASE("cycle rejected in acyclic mode") {
    MinPlusMatrix d = MinPlusMatrix::identity(2);
    StandardMatrix g(2, 2);
    g(0, 1) = 1;
    g(1, 0) = 1;
    CHECK_THROWS_AS(mixed_implicit_step(d, StandardMatrix(2, 2), g, Vector{0, 0}, Vector{1, 1}),
                    DimensionError);
  }
}

TEST_CASE("eigenvalue") {
  CHECK(minplus_eigenvalue(MinPlusMatrix{{3}}) == doctest::Approx(3));
  CHECK(minplus_eigenvalue(MinPlusMatrix{{eps, 1}, {0, eps}}) == doctest::Approx(0.5));
  // minimum mean cycle: self loop 2, 2-cycle mean (1 + 4) / 2
  CHECK(minplus_eigenvalue(MinPlusMatrix{{2, 1}, {4, eps}}) == doctest::Approx(2));
  CHECK(minplus_eigenvalue(MinPlusMatrix{{5, 1}, {2, eps}}) == doctest::Approx(1.5));
  CHECK_FALSE(is_irreducible(MinPlusMatrix{{0, 1}, {eps, 0}}));
  CHECK_THROWS(minplus_eigenvalue(MinPlusMatrix{{0, 1}, {eps, 0}}));
}

TEST_CASE("text") {
  CHECK(format_value(eps) == "inf");
  CHECK(format_value(1.5) == "1.5");
}

}
