#pragma once

// Exact rational scalars, points and matrices, plus the two numeric
// primitives the rest of the library certifies against: an outward-rounded
// operator-norm bound and exact affine fixed points.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ifsmorph/error.hpp"

namespace ifsmorph {

// mpq_class keeps values canonical (lowest terms, positive denominator) after
// every arithmetic operation; only string construction needs canonicalize().
using ExactScalar = mpq_class;

inline ExactScalar parse_rational(std::string_view text) {
  static const std::regex kRational("^-?[0-9]+(/[0-9]+)?$");
  std::string s(text);
  if (!std::regex_match(s, kRational)) {
    throw ParseError("not a rational literal: '" + s + "'");
  }
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    const std::string den = s.substr(slash + 1);
    if (den.find_first_not_of('0') == std::string::npos) {
      throw ParseError("zero denominator: '" + s + "'");
    }
  }
  ExactScalar q(s, 10);
  q.canonicalize();
  return q;
}

// p/q in lowest terms.
inline ExactScalar rational(long p, long q = 1) {
  if (q == 0) throw SingularSystem("zero denominator");
  ExactScalar r(p, q);
  r.canonicalize();
  return r;
}

inline std::string to_string(const ExactScalar& q) { return q.get_str(10); }

// Nearest double, ties to even are irrelevant here: either neighbour is
// within half an ulp.
inline double to_double(const ExactScalar& q) {
  const double t = q.get_d();  // truncates toward zero
  if (ExactScalar(t) == q) return t;
  const double away = std::nextafter(t, q > 0 ? std::numeric_limits<double>::infinity()
                                              : -std::numeric_limits<double>::infinity());
  const ExactScalar dt = abs(q - ExactScalar(t));
  const ExactScalar da = abs(ExactScalar(away) - q);
  return da < dt ? away : t;
}

// Smallest double >= q.
inline double round_up(const ExactScalar& q) {
  double d = q.get_d();
  while (ExactScalar(d) < q) d = std::nextafter(d, std::numeric_limits<double>::infinity());
  return d;
}

// Largest double <= q.
inline double round_down(const ExactScalar& q) {
  double d = q.get_d();
  while (ExactScalar(d) > q) d = std::nextafter(d, -std::numeric_limits<double>::infinity());
  return d;
}

// A double that is >= sqrt(q), q >= 0.
inline double sqrt_up(const ExactScalar& q) {
  if (q <= 0) return 0.0;
  double r = std::sqrt(round_up(q));
  while (ExactScalar(r) * ExactScalar(r) < q) {
    r = std::nextafter(r, std::numeric_limits<double>::infinity());
  }
  // Smallest such double, so sqrt_up(a^2) == round_up(a).
  for (double down = std::nextafter(r, 0.0); down > 0 && ExactScalar(down) * ExactScalar(down) >= q;
       down = std::nextafter(r, 0.0)) {
    r = down;
  }
  return r;
}

class ExactPoint {
 public:
  ExactPoint() = default;
  explicit ExactPoint(std::size_t n) : coords_(n, ExactScalar(0)) {}
  explicit ExactPoint(std::vector<ExactScalar> coords) : coords_(std::move(coords)) {}
  ExactPoint(std::initializer_list<ExactScalar> coords) : coords_(coords) {}

  static ExactPoint from_doubles(std::span<const double> xs) {
    ExactPoint p(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) p[i] = ExactScalar(xs[i]);
    return p;
  }

  std::size_t size() const { return coords_.size(); }
  ExactScalar& operator[](std::size_t i) { return coords_[i]; }
  const ExactScalar& operator[](std::size_t i) const { return coords_[i]; }
  auto begin() const { return coords_.begin(); }
  auto end() const { return coords_.end(); }
  const std::vector<ExactScalar>& coords() const { return coords_; }

  std::vector<double> to_doubles() const {
    std::vector<double> out(coords_.size());
    for (std::size_t i = 0; i < coords_.size(); ++i) out[i] = to_double(coords_[i]);
    return out;
  }

  ExactPoint slice(std::size_t first, std::size_t count) const {
    return ExactPoint(std::vector<ExactScalar>(coords_.begin() + first,
                                               coords_.begin() + first + count));
  }

  friend bool operator==(const ExactPoint& a, const ExactPoint& b) {
    return a.coords_ == b.coords_;
  }
  // Lexicographic.
  friend bool operator<(const ExactPoint& a, const ExactPoint& b) {
    return std::lexicographical_compare(a.coords_.begin(), a.coords_.end(),
                                        b.coords_.begin(), b.coords_.end());
  }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < coords_.size(); ++i) {
      if (i) s += ", ";
      s += ifsmorph::to_string(coords_[i]);
    }
    return s + ")";
  }

 private:
  std::vector<ExactScalar> coords_;
};

inline ExactPoint concat(const ExactPoint& a, const ExactPoint& b) {
  std::vector<ExactScalar> c(a.coords());
  c.insert(c.end(), b.begin(), b.end());
  return ExactPoint(std::move(c));
}

struct ExactPointHash {
  std::size_t operator()(const ExactPoint& p) const noexcept {
    std::size_t h = 0x9e3779b97f4a7c15ull;
    for (const auto& q : p) {
      const auto num = q.get_num_mpz_t();
      const auto den = q.get_den_mpz_t();
      std::size_t v = mpz_size(num) ? mpz_getlimbn(num, 0) : 0;
      v ^= static_cast<std::size_t>(mpz_sgn(num)) * 0x632be59bd9b4e019ull;
      v = v * 31 + (mpz_size(den) ? mpz_getlimbn(den, 0) : 0);
      h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

inline ExactScalar squared_distance(const ExactPoint& a, const ExactPoint& b) {
  if (a.size() != b.size()) throw DimensionMismatch("point sizes differ");
  ExactScalar s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const ExactScalar d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Rational upper bound on sqrt(q): exact when q is the square of a rational,
// otherwise sqrt_up(q).
inline ExactScalar sqrt_upper(const ExactScalar& q) {
  if (q <= 0) return 0;
  if (mpz_perfect_square_p(q.get_num_mpz_t()) && mpz_perfect_square_p(q.get_den_mpz_t())) {
    mpz_class num, den;
    mpz_sqrt(num.get_mpz_t(), q.get_num_mpz_t());
    mpz_sqrt(den.get_mpz_t(), q.get_den_mpz_t());
    return ExactScalar(num, den);
  }
  return ExactScalar(sqrt_up(q));
}

inline ExactScalar distance_upper_exact(const ExactPoint& a, const ExactPoint& b) {
  return sqrt_upper(squared_distance(a, b));
}

// Upper bound (as a double) on the Euclidean distance between exact points.
inline double distance_upper(const ExactPoint& a, const ExactPoint& b) {
  return sqrt_up(squared_distance(a, b));
}

// Row-major rows x cols rational matrix. Contractions use square ones; affine
// morphism parts may be rectangular.
class ExactMatrix {
 public:
  ExactMatrix() = default;
  ExactMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols, ExactScalar(0)) {}
  ExactMatrix(std::initializer_list<std::initializer_list<ExactScalar>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    for (const auto& r : rows) {
      if (r.size() != cols_) throw ShapeMismatch("ragged matrix literal");
      entries_.insert(entries_.end(), r.begin(), r.end());
    }
  }

  static ExactMatrix identity(std::size_t n) {
    ExactMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  ExactScalar& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const ExactScalar& operator()(std::size_t r, std::size_t c) const {
    return entries_[r * cols_ + c];
  }

  ExactPoint operator*(const ExactPoint& x) const {
    if (x.size() != cols_) throw DimensionMismatch("matrix-vector size mismatch");
    ExactPoint y(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      ExactScalar s = 0;
      for (std::size_t c = 0; c < cols_; ++c) {
        if (sgn((*this)(r, c)) != 0) s += (*this)(r, c) * x[c];
      }
      y[r] = std::move(s);
    }
    return y;
  }

  ExactMatrix operator*(const ExactMatrix& b) const {
    if (cols_ != b.rows_) throw ShapeMismatch("matrix product shape mismatch");
    ExactMatrix out(rows_, b.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t k = 0; k < cols_; ++k) {
        const ExactScalar& a = (*this)(i, k);
        if (sgn(a) == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += a * b(k, j);
      }
    }
    return out;
  }

  friend bool operator==(const ExactMatrix& a, const ExactMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
  }

  std::vector<double> to_doubles() const {
    std::vector<double> out(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) out[i] = to_double(entries_[i]);
    return out;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<ExactScalar> entries_;
};

inline ExactPoint operator+(const ExactPoint& a, const ExactPoint& b) {
  if (a.size() != b.size()) throw DimensionMismatch("point sizes differ");
  ExactPoint c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

// Upper bound on the spectral norm: min of the Frobenius norm and
// sqrt(|Q|_1 |Q|_inf). Exact when that square root is rational.
inline ExactScalar operator_norm_upper_exact(const ExactMatrix& q) {
  if (!q.square()) throw ShapeMismatch("operator_norm_upper needs a square matrix");
  const std::size_t n = q.rows();
  if (n == 0) return 0.0;
  ExactScalar norm1 = 0, norm_inf = 0, frob_sq = 0;
  for (std::size_t c = 0; c < n; ++c) {
    ExactScalar col = 0;
    for (std::size_t r = 0; r < n; ++r) col += abs(q(r, c));
    norm1 = std::max(norm1, col);
  }
  for (std::size_t r = 0; r < n; ++r) {
    ExactScalar row = 0;
    for (std::size_t c = 0; c < n; ++c) {
      row += abs(q(r, c));
      frob_sq += q(r, c) * q(r, c);
    }
    norm_inf = std::max(norm_inf, row);
  }
  const ExactScalar geo_sq = norm1 * norm_inf;
  // The 1- and inf-norms alone can undercut the spectral norm, so they only
  // enter through their geometric mean.
  return sqrt_upper(std::min(frob_sq, geo_sq));
}

// The same bound rounded toward +inf.
inline double operator_norm_upper(const ExactMatrix& q) { return round_up(operator_norm_upper_exact(q)); }

// Solves a x = b exactly by Gaussian elimination with the first non-zero pivot.
inline ExactPoint solve(ExactMatrix a, ExactPoint b) {
  if (!a.square() || a.rows() != b.size()) throw ShapeMismatch("solve: shape mismatch");
  const std::size_t n = a.rows();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && sgn(a(piv, col)) == 0) ++piv;
    if (piv == n) throw SingularSystem("matrix is singular");
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(col, c), a(piv, c));
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      if (sgn(a(r, col)) == 0) continue;
      const ExactScalar f = a(r, col) / a(col, col);
      for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
      b[r] -= f * b[col];
    }
  }
  ExactPoint x(n);
  for (std::size_t i = n; i-- > 0;) {
    ExactScalar s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a(i, c) * x[c];
    x[i] = s / a(i, i);
  }
  return x;
}

// Exact solution of (I - Q) x = b.
inline ExactPoint affine_fixed_point(const ExactMatrix& q, const ExactPoint& b) {
  if (!q.square() || q.rows() != b.size()) {
    throw DimensionMismatch("affine_fixed_point: shape mismatch");
  }
  ExactMatrix m = ExactMatrix::identity(q.rows());
  for (std::size_t r = 0; r < q.rows(); ++r)
    for (std::size_t c = 0; c < q.cols(); ++c) m(r, c) -= q(r, c);
  try {
    return solve(std::move(m), b);
  } catch (const SingularSystem&) {
    throw SingularSystem("I - Q is not invertible; the map is not a contraction");
  }
}

}  // namespace ifsmorph
