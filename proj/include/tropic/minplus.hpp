#pragma once

// Min-plus dioid (R u {+inf}, min, +), dense matrices over it, and the
// mixed standard/min-plus step evaluators used by the traffic models.

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tropic {

inline constexpr double kEpsilon = std::numeric_limits<double>::infinity();
inline constexpr double kUnity = 0.0;
inline constexpr double kDefaultMagnitudeCap = 1e15;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a finite value leaves the configured magnitude cap.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An element of R_min. Epsilon (the zero of the dioid) is +inf.
class MinPlusValue {
 public:
  constexpr MinPlusValue() = default;  // epsilon
  explicit MinPlusValue(double v);

  static constexpr MinPlusValue epsilon() { return MinPlusValue{}; }
  static MinPlusValue unity() { return MinPlusValue{kUnity}; }

  constexpr double value() const { return value_; }
  constexpr bool is_epsilon() const { return value_ == kEpsilon; }

  friend constexpr bool operator==(MinPlusValue, MinPlusValue) = default;
  friend constexpr auto operator<=>(MinPlusValue a, MinPlusValue b) {
    return a.value_ <=> b.value_;
  }

 private:
  double value_ = kEpsilon;
};

MinPlusValue oplus(MinPlusValue a, MinPlusValue b);
MinPlusValue otimes(MinPlusValue a, MinPlusValue b, double cap = kDefaultMagnitudeCap);

// Raw-double forms used by the hot loops. +inf is epsilon.
inline double oplus(double a, double b) { return a < b ? a : b; }
double otimes(double a, double b, double cap = kDefaultMagnitudeCap);

using Vector = std::vector<double>;

class MinPlusMatrix {
 public:
  MinPlusMatrix() = default;
  /// All-epsilon matrix.
  MinPlusMatrix(std::size_t rows, std::size_t cols);
  MinPlusMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  MinPlusMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static MinPlusMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  MinPlusValue at(std::size_t i, std::size_t j) const;

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  friend bool operator==(const MinPlusMatrix&, const MinPlusMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Dense matrix in conventional algebra. Entries are finite.
class StandardMatrix {
 public:
  StandardMatrix() = default;
  /// Zero matrix.
  StandardMatrix(std::size_t rows, std::size_t cols);
  StandardMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  StandardMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static StandardMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  friend bool operator==(const StandardMatrix&, const StandardMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

MinPlusMatrix mat_oplus(const MinPlusMatrix& a, const MinPlusMatrix& b);
MinPlusMatrix mat_otimes(const MinPlusMatrix& a, const MinPlusMatrix& b,
                         double cap = kDefaultMagnitudeCap);

/// A (x) x, with x a min-plus column vector.
Vector mat_vec_otimes(const MinPlusMatrix& a, std::span<const double> x,
                      double cap = kDefaultMagnitudeCap);

/// Conventional product M x. Zero coefficients never touch their operand,
/// so an infinite operand behind a zero coefficient is harmless.
Vector mat_vec_standard(const StandardMatrix& m, std::span<const double> x);

/// q(t+1) = A (x) q(t) (+) b(t)
Vector affine_step(const MinPlusMatrix& a, std::span<const double> q,
                   std::span<const double> b, double cap = kDefaultMagnitudeCap);

enum class ImplicitMode { Acyclic, FixedPoint };

/// Solves x = D (x) (H q + G x) (+) b.
///
/// Acyclic mode evaluates components in topological order of the implicit
/// dependency graph (x_i needs x_l when some D_ij is finite and G_jl != 0)
/// and throws DimensionError on a cycle. FixedPoint mode iterates from
/// x0 = D (x) (H q) (+) b until the sup-norm change drops below 1e-12.
Vector mixed_implicit_step(const MinPlusMatrix& d, const StandardMatrix& h,
                           const StandardMatrix& g, std::span<const double> q,
                           std::span<const double> b,
                           ImplicitMode mode = ImplicitMode::Acyclic,
                           double cap = kDefaultMagnitudeCap);

/// Evaluation order used by the acyclic mode, exposed for inspection.
std::vector<std::size_t> implicit_evaluation_order(const MinPlusMatrix& d,
                                                   const StandardMatrix& g);

/// True when the precedence graph of the finite entries is strongly connected.
bool is_irreducible(const MinPlusMatrix& a);

/// Asymptotic growth rate lim min_i (A^t (x) 0)_i / t of an irreducible
/// square matrix, by value iteration with periodic-regime detection.
double minplus_eigenvalue(const MinPlusMatrix& a, double tol = 1e-9,
                          std::size_t max_iter = 100000);

/// ε printed as "inf", used by every text serializer.
std::string format_value(double v);

}  // namespace tropic
