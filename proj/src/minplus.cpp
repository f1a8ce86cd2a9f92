#include "tropic/minplus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>

namespace tropic {

namespace {

void check_cap(double v, double cap) {
  if (std::isnan(v)) throw DivergenceError("min-plus arithmetic produced NaN");
  if (v != kEpsilon && std::fabs(v) > cap) {
    std::ostringstream os;
    os << "value " << v << " exceeds magnitude cap " << cap;
    throw DivergenceError(os.str());
  }
}

std::vector<double> flatten(std::initializer_list<std::initializer_list<double>> rows,
                            std::size_t& nrows, std::size_t& ncols) {
  nrows = rows.size();
  ncols = nrows ? rows.begin()->size() : 0;
  std::vector<double> out;
  out.reserve(nrows * ncols);
  for (const auto& r : rows) {
    if (r.size() != ncols) throw DimensionError("ragged matrix initializer");
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

// Conventional dot product that skips zero coefficients.
double standard_dot(std::span<const double> coeffs, std::span<const double> x) {
  double acc = 0.0;
  for (std::size_t l = 0; l < coeffs.size(); ++l) {
    if (coeffs[l] != 0.0) acc += coeffs[l] * x[l];
  }
  if (std::isnan(acc)) throw DivergenceError("standard product of opposite infinities");
  return acc;
}

}  // namespace

MinPlusValue::MinPlusValue(double v) : value_(v) {
  if (std::isnan(v)) throw std::invalid_argument("MinPlusValue cannot be NaN");
  if (v == -kEpsilon) throw std::invalid_argument("-inf is not an element of R_min");
}

MinPlusValue oplus(MinPlusValue a, MinPlusValue b) { return a < b ? a : b; }

MinPlusValue otimes(MinPlusValue a, MinPlusValue b, double cap) {
  return MinPlusValue{otimes(a.value(), b.value(), cap)};
}

double otimes(double a, double b, double cap) {
  if (a == kEpsilon || b == kEpsilon) return kEpsilon;
  const double s = a + b;
  check_cap(s, cap);
  return s;
}

MinPlusMatrix::MinPlusMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, kEpsilon) {}

MinPlusMatrix::MinPlusMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) throw DimensionError("entry count does not match dimensions");
  for (double v : data_) MinPlusValue{v};  // validates
}

MinPlusMatrix::MinPlusMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  data_ = flatten(rows, rows_, cols_);
  for (double v : data_) MinPlusValue{v};
}

MinPlusMatrix MinPlusMatrix::identity(std::size_t n) {
  MinPlusMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = kUnity;
  return m;
}

MinPlusValue MinPlusMatrix::at(std::size_t i, std::size_t j) const {
  if (i >= rows_ || j >= cols_) throw std::out_of_range("MinPlusMatrix index");
  return MinPlusValue{(*this)(i, j)};
}

StandardMatrix::StandardMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

StandardMatrix::StandardMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) throw DimensionError("entry count does not match dimensions");
  for (double v : data_) {
    if (!std::isfinite(v)) throw std::invalid_argument("StandardMatrix entries must be finite");
  }
}

StandardMatrix::StandardMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  data_ = flatten(rows, rows_, cols_);
  for (double v : data_) {
    if (!std::isfinite(v)) throw std::invalid_argument("StandardMatrix entries must be finite");
  }
}

StandardMatrix StandardMatrix::identity(std::size_t n) {
  StandardMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

MinPlusMatrix mat_oplus(const MinPlusMatrix& a, const MinPlusMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("mat_oplus: shape mismatch");
  MinPlusMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = oplus(a(i, j), b(i, j));
  return out;
}

MinPlusMatrix mat_otimes(const MinPlusMatrix& a, const MinPlusMatrix& b, double cap) {
  if (a.cols() != b.rows()) throw DimensionError("mat_otimes: inner dimensions differ");
  MinPlusMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == kEpsilon) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        out(i, j) = oplus(out(i, j), otimes(aik, b(k, j), cap));
      }
    }
  }
  return out;
}

Vector mat_vec_otimes(const MinPlusMatrix& a, std::span<const double> x, double cap) {
  if (a.cols() != x.size()) throw DimensionError("mat_vec_otimes: dimension mismatch");
  Vector out(a.rows(), kEpsilon);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    double acc = kEpsilon;
    for (std::size_t k = 0; k < r.size(); ++k) acc = oplus(acc, otimes(r[k], x[k], cap));
    out[i] = acc;
  }
  return out;
}

Vector mat_vec_standard(const StandardMatrix& m, std::span<const double> x) {
  if (m.cols() != x.size()) throw DimensionError("mat_vec_standard: dimension mismatch");
  Vector out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = standard_dot(m.row(i), x);
  return out;
}

Vector affine_step(const MinPlusMatrix& a, std::span<const double> q, std::span<const double> b,
                   double cap) {
  if (a.rows() != b.size()) throw DimensionError("affine_step: b has wrong length");
  Vector out = mat_vec_otimes(a, q, cap);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = oplus(out[i], b[i]);
  return out;
}

std::vector<std::size_t> implicit_evaluation_order(const MinPlusMatrix& d, const StandardMatrix& g) {
  const std::size_t n = d.rows();
  if (g.rows() != d.cols() || g.cols() != n) throw DimensionError("G must be |w| x |x|");
  // deps[i] = components x_i waits on
  std::vector<std::vector<std::size_t>> dependents(n);
  std::vector<std::size_t> pending(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<bool> needs(n, false);
    for (std::size_t j = 0; j < d.cols(); ++j) {
      if (d(i, j) == kEpsilon) continue;
      for (std::size_t l = 0; l < n; ++l)
        if (g(j, l) != 0.0) needs[l] = true;
    }
    for (std::size_t l = 0; l < n; ++l) {
      if (!needs[l]) continue;
      if (l == i) throw DimensionError("implicit term: component depends on itself");
      dependents[l].push_back(i);
      ++pending[i];
    }
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (pending[i] == 0) ready.push(i);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const std::size_t i = ready.top();
    ready.pop();
    order.push_back(i);
    for (std::size_t k : dependents[i])
      if (--pending[k] == 0) ready.push(k);
  }
  if (order.size() != n) throw DimensionError("implicit term: cyclic dependency");
  return order;
}

Vector mixed_implicit_step(const MinPlusMatrix& d, const StandardMatrix& h, const StandardMatrix& g,
                           std::span<const double> q, std::span<const double> b, ImplicitMode mode,
                           double cap) {
  const std::size_t n = d.rows();
  const std::size_t k = d.cols();
  if (h.rows() != k || g.rows() != k) throw DimensionError("H and G need one row per D column");
  if (g.cols() != n || b.size() != n) throw DimensionError("G columns and b must match |x|");
  if (h.cols() != q.size()) throw DimensionError("H columns must match |q|");

  const Vector hq = mat_vec_standard(h, q);

  auto component = [&](std::size_t i, std::span<const double> x) {
    double acc = b[i];
    for (std::size_t j = 0; j < k; ++j) {
      if (d(i, j) == kEpsilon) continue;
      const double w = hq[j] + standard_dot(g.row(j), x);
      if (w == -kEpsilon) throw DivergenceError("implicit term unbounded below");
      acc = oplus(acc, otimes(d(i, j), w, cap));
    }
    return acc;
  };

  if (mode == ImplicitMode::Acyclic) {
    const auto order = implicit_evaluation_order(d, g);
    Vector x(n, 0.0);
    for (std::size_t i : order) x[i] = component(i, x);
    return x;
  }

  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = b[i];
    for (std::size_t j = 0; j < k; ++j) acc = oplus(acc, otimes(d(i, j), hq[j], cap));
    x[i] = acc;
  }
  for (int it = 0; it < 1000; ++it) {
    Vector next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = component(i, x);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (next[i] == x[i]) continue;
      change = std::max(change, std::fabs(next[i] - x[i]));
    }
    x = std::move(next);
    if (change < 1e-12) return x;
  }
  throw ConvergenceError("mixed_implicit_step: fixed point not reached in 1000 iterations");
}

bool is_irreducible(const MinPlusMatrix& a) {
  const std::size_t n = a.rows();
  if (n == 0 || a.cols() != n) return false;
  auto reach_all = [&](bool transpose) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < n; ++j) {
        const double w = transpose ? a(j, i) : a(i, j);
        if (w != kEpsilon && !seen[j]) {
          seen[j] = true;
          stack.push_back(j);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool s) { return s; });
  };
  return reach_all(false) && reach_all(true);
}

double minplus_eigenvalue(const MinPlusMatrix& a, double tol, std::size_t max_iter) {
  if (a.rows() != a.cols()) throw DimensionError("minplus_eigenvalue: matrix must be square");
  if (!is_irreducible(a)) throw std::invalid_argument("minplus_eigenvalue: matrix is not irreducible");
  const std::size_t n = a.rows();

  // x_k = A^k (x) 0 is kept as (shift, normalized profile). An irreducible
  // matrix is ultimately periodic: once a normalized profile recurs the
  // growth per step is exact.
  Vector profile(n, 0.0);
  double shift = 0.0;
  std::map<std::vector<long long>, std::pair<std::size_t, double>> seen;
  auto key_of = [&](const Vector& p) {
    std::vector<long long> key(n);
    for (std::size_t i = 0; i < n; ++i) key[i] = std::llround(p[i] / tol);
    return key;
  };
  seen.emplace(key_of(profile), std::make_pair(std::size_t{0}, shift));
  for (std::size_t k = 1; k <= max_iter; ++k) {
    Vector next = mat_vec_otimes(a, profile, std::numeric_limits<double>::max());
    const double lo = *std::min_element(next.begin(), next.end());
    for (double& v : next) v -= lo;
    shift += lo;
    profile = std::move(next);
    auto [it, inserted] = seen.emplace(key_of(profile), std::make_pair(k, shift));
    if (!inserted) {
      const auto [k0, s0] = it->second;
      return (shift - s0) / static_cast<double>(k - k0);
    }
  }
  throw ConvergenceError("minplus_eigenvalue: no periodic regime within iteration budget");
}

std::string format_value(double v) {
  if (v == kEpsilon) return "inf";
  if (v == -kEpsilon) return "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace tropic
