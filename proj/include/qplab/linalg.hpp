#pragma once

// Dense real matrix kernel: row-major storage, singular values by one-sided
// Jacobi, Householder QR, LU determinants, pseudo-inverse, adjugate and
// exterior powers. Sizes are small (m <= 16), so everything is direct.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qplab/errors.hpp"

namespace qplab {

inline constexpr double kDefaultRankTolerance = 1e-10;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw InputError("Matrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) throw InputError("Matrix: entry count does not match shape");
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static Matrix diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }
  static Matrix diagonal(std::initializer_list<double> d) {
    return diagonal(std::span<const double>(d.begin(), d.size()));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  void resize(std::size_t rows, std::size_t cols) {
    rows_ = rows;
    cols_ = cols;
    data_.assign(rows * cols, 0.0);
  }

  Matrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }
  Matrix& operator+=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  void check_same_shape(const Matrix& o) const {
    if (o.rows_ != rows_ || o.cols_ != cols_) throw InputError("Matrix: shape mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// out = a * b; out must not alias a or b.
inline void multiply_into(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.rows()) throw InputError("multiply: inner dimensions differ");
  if (out.rows() != a.rows() || out.cols() != b.cols()) out.resize(a.rows(), b.cols());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = po + i * m;
    for (std::size_t j = 0; j < m; ++j) orow[j] = 0.0;
    for (std::size_t l = 0; l < k; ++l) {
      const double av = pa[i * k + l];
      const double* brow = pb + l * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
}

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  multiply_into(a, b, out);
  return out;
}
inline Matrix operator*(double s, Matrix a) { return a *= s; }
inline Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
inline Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

inline double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

inline bool all_finite(const Matrix& a) {
  return std::all_of(a.data().begin(), a.data().end(), [](double v) { return std::isfinite(v); });
}

inline void require_finite(const Matrix& a, std::string_view what) {
  if (a.rows() == 0 || a.cols() == 0) throw InputError(std::string(what) + ": empty matrix");
  if (!all_finite(a)) throw InputError(std::string(what) + ": non-finite entry");
}

inline void require_square(const Matrix& a, std::string_view what) {
  if (!a.is_square()) throw InputError(std::string(what) + ": matrix must be square");
}

// Matrix known only up to a positive scalar kept in log form:
// value = exp(log_scale) * factor. log_scale = -inf marks the zero matrix.
struct ScaledMatrix {
  Matrix factor;
  double log_scale = 0.0;

  bool is_zero() const { return log_scale == -std::numeric_limits<double>::infinity(); }
};

// Rescales by an exact power of two so that max|entry| lies in [0.5, 1).
// Returns the binary exponent that was removed (0 for the zero matrix).
inline int normalize_power_of_two(Matrix& a) {
  const double mx = max_abs(a);
  if (mx == 0.0 || !std::isfinite(mx)) return 0;
  int e = 0;
  std::frexp(mx, &e);
  if (e != 0) {
    for (double& v : a.data()) v = std::ldexp(v, -e);
  }
  return e;
}

inline ScaledMatrix make_scaled(Matrix a, double log_scale = 0.0) {
  if (max_abs(a) == 0.0) return {std::move(a), -std::numeric_limits<double>::infinity()};
  const int e = normalize_power_of_two(a);
  return {std::move(a), log_scale + e * std::numbers::ln2};
}

inline ScaledMatrix operator*(const ScaledMatrix& a, const ScaledMatrix& b) {
  if (a.is_zero() || b.is_zero())
    return {Matrix(a.factor.rows(), b.factor.cols()), -std::numeric_limits<double>::infinity()};
  return make_scaled(a.factor * b.factor, a.log_scale + b.log_scale);
}

// ---------------------------------------------------------------------------
// Singular value decomposition

// g = u * diag(s) * v^T with u: rows x r, v: cols x r, r = min(rows, cols),
// s non-increasing. Columns of u belonging to zero singular values are zero.
struct Svd {
  Matrix u;
  std::vector<double> s;
  Matrix v;
};

namespace detail {

// One-sided Jacobi on a tall matrix (rows >= cols).
inline Svd jacobi_svd_tall(const Matrix& a) {
  const std::size_t r = a.rows(), c = a.cols();
  Matrix u = a;
  Matrix v = Matrix::identity(c);
  constexpr double kEps = 1e-15;
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < c; ++p) {
      for (std::size_t q = p + 1; q < c; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < r; ++i) {
          const double up = u(i, p), uq = u(i, q);
          alpha += up * up;
          beta += uq * uq;
          gamma += up * uq;
        }
        if (gamma == 0.0 || std::abs(gamma) <= kEps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (std::size_t i = 0; i < r; ++i) {
          const double up = u(i, p), uq = u(i, q);
          u(i, p) = cs * up - sn * uq;
          u(i, q) = sn * up + cs * uq;
        }
        for (std::size_t i = 0; i < c; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = cs * vp - sn * vq;
          v(i, q) = sn * vp + cs * vq;
        }
      }
    }
    if (!rotated) break;
  }
  std::vector<double> s(c);
  for (std::size_t j = 0; j < c; ++j) {
    double n2 = 0.0;
    for (std::size_t i = 0; i < r; ++i) n2 += u(i, j) * u(i, j);
    s[j] = std::sqrt(n2);
    if (s[j] > 0.0)
      for (std::size_t i = 0; i < r; ++i) u(i, j) /= s[j];
  }
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return s[x] > s[y]; });
  Svd out{Matrix(r, c), std::vector<double>(c), Matrix(c, c)};
  for (std::size_t j = 0; j < c; ++j) {
    const std::size_t src = order[j];
    out.s[j] = s[src];
    for (std::size_t i = 0; i < r; ++i) out.u(i, j) = u(i, src);
    for (std::size_t i = 0; i < c; ++i) out.v(i, j) = v(i, src);
  }
  return out;
}

}  // namespace detail

inline Svd svd(const Matrix& g) {
  require_finite(g, "svd");
  // Work on a power-of-two rescaled copy to stay clear of over/underflow.
  Matrix a = g;
  const int e = normalize_power_of_two(a);
  Svd out;
  if (a.rows() >= a.cols()) {
    out = detail::jacobi_svd_tall(a);
  } else {
    Svd t = detail::jacobi_svd_tall(transpose(a));
    out = {std::move(t.v), std::move(t.s), std::move(t.u)};
  }
  for (double& s : out.s) s = std::ldexp(s, e);
  return out;
}

inline std::vector<double> singular_values(const Matrix& g) { return svd(g).s; }

inline double spectral_norm(const Matrix& g) {
  if (g.rows() == 1 || g.cols() == 1) return frobenius_norm(g);
  return singular_values(g).front();
}

struct SingularProfile {
  std::vector<double> values;
  std::size_t numerical_rank = 0;
  double tolerance = kDefaultRankTolerance;
};

inline SingularProfile singular_profile(const Matrix& g, double tol = kDefaultRankTolerance) {
  if (!(tol > 0.0 && tol < 1.0)) throw InputError("singular_profile: tolerance must lie in (0,1)");
  SingularProfile p{singular_values(g), 0, tol};
  const double s1 = p.values.front();
  if (s1 > 0.0)
    p.numerical_rank = static_cast<std::size_t>(
        std::count_if(p.values.begin(), p.values.end(), [&](double s) { return s > tol * s1; }));
  return p;
}

// Moore-Penrose inverse of a full-row-rank k x m matrix (k <= m).
inline Matrix pseudo_inverse(const Matrix& v, double tol = kDefaultRankTolerance) {
  require_finite(v, "pseudo_inverse");
  if (v.rows() > v.cols())
    throw SingularInputError("pseudo_inverse: more rows than columns, cannot have full row rank", 0.0,
                             v.cols());
  const Svd d = svd(v);  // v = u s w^T with u k x k, w m x k
  const std::size_t k = v.rows();
  for (std::size_t j = 0; j < k; ++j) {
    if (!(d.s[j] > tol * d.s[0])) {
      throw SingularInputError("pseudo_inverse: rank deficient, singular value s_" + std::to_string(j + 1) +
                                   " = " + std::to_string(d.s[j]),
                               d.s[j], j);
    }
  }
  Matrix out(v.cols(), k);
  for (std::size_t i = 0; i < v.cols(); ++i)
    for (std::size_t j = 0; j < k; ++j) {
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) acc += d.v(i, l) * d.u(j, l) / d.s[l];
      out(i, j) = acc;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Triangular factorizations

// LU with partial pivoting; returns det(g).
inline double determinant(const Matrix& g) {
  require_square(g, "determinant");
  const std::size_t n = g.rows();
  Matrix a = g;
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    if (a(piv, c) == 0.0) return 0.0;
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(c, j), a(piv, j));
      det = -det;
    }
    det *= a(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a(r, c) / a(c, c);
      for (std::size_t j = c + 1; j < n; ++j) a(r, j) -= f * a(c, j);
    }
  }
  return det;
}

// Gauss-Jordan with partial pivoting.
inline Matrix inverse(const Matrix& g) {
  require_square(g, "inverse");
  const std::size_t n = g.rows();
  Matrix a = g;
  Matrix inv = Matrix::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    if (a(piv, c) == 0.0) throw SingularInputError("inverse: singular matrix", 0.0, c);
    if (piv != c)
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(c, j), a(piv, j));
        std::swap(inv(c, j), inv(piv, j));
      }
    const double d = a(c, c);
    for (std::size_t j = 0; j < n; ++j) {
      a(c, j) /= d;
      inv(c, j) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a(r, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= f * a(c, j);
        inv(r, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

// Thin Householder QR of a (rows >= cols): a = q r, q has orthonormal columns,
// r upper triangular with non-negative diagonal.
struct Qr {
  Matrix q;
  Matrix r;
};

inline Qr householder_qr(const Matrix& a) {
  const std::size_t m = a.rows(), n = a.cols();
  if (m < n) throw InputError("householder_qr: needs rows >= cols");
  Matrix w = a;
  std::vector<std::vector<double>> reflectors(n);
  std::vector<double> diag(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double norm2 = 0.0;
    for (std::size_t i = j; i < m; ++i) norm2 += w(i, j) * w(i, j);
    const double norm = std::sqrt(norm2);
    if (norm == 0.0) continue;
    const double alpha = w(j, j) > 0.0 ? -norm : norm;
    std::vector<double> vv(m - j);
    for (std::size_t i = j; i < m; ++i) vv[i - j] = w(i, j);
    vv[0] -= alpha;
    double vnorm2 = 0.0;
    for (double x : vv) vnorm2 += x * x;
    if (vnorm2 == 0.0) continue;
    for (std::size_t c = j; c < n; ++c) {
      double dot = 0.0;
      for (std::size_t i = j; i < m; ++i) dot += vv[i - j] * w(i, c);
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = j; i < m; ++i) w(i, c) -= f * vv[i - j];
    }
    for (double& x : vv) x /= std::sqrt(vnorm2);
    reflectors[j] = std::move(vv);
  }
  Qr out{Matrix(m, n), Matrix(n, n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) out.r(i, j) = w(i, j);
  // q = H_0 H_1 ... H_{n-1} applied to the first n columns of the identity.
  for (std::size_t i = 0; i < n; ++i) out.q(i, i) = 1.0;
  for (std::size_t jj = n; jj-- > 0;) {
    const auto& vv = reflectors[jj];
    if (vv.empty()) continue;
    for (std::size_t c = 0; c < n; ++c) {
      double dot = 0.0;
      for (std::size_t i = jj; i < m; ++i) dot += vv[i - jj] * out.q(i, c);
      for (std::size_t i = jj; i < m; ++i) out.q(i, c) -= 2.0 * dot * vv[i - jj];
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (out.r(j, j) < 0.0) {
      for (std::size_t c = j; c < n; ++c) out.r(j, c) = -out.r(j, c);
      for (std::size_t i = 0; i < m; ++i) out.q(i, j) = -out.q(i, j);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Adjugate and exterior powers

namespace detail {

inline Matrix minor_matrix(const Matrix& g, std::size_t skip_row, std::size_t skip_col) {
  const std::size_t n = g.rows();
  Matrix m(n - 1, n - 1);
  for (std::size_t i = 0, mi = 0; i < n; ++i) {
    if (i == skip_row) continue;
    for (std::size_t j = 0, mj = 0; j < n; ++j) {
      if (j == skip_col) continue;
      m(mi, mj++) = g(i, j);
    }
    ++mi;
  }
  return m;
}

// Laplace expansion along the first row.
inline double laplace_det(const Matrix& g) {
  const std::size_t n = g.rows();
  if (n == 0) return 1.0;
  if (n == 1) return g(0, 0);
  if (n == 2) return g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
  double det = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (g(0, j) == 0.0) continue;
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    det += sign * g(0, j) * laplace_det(minor_matrix(g, 0, j));
  }
  return det;
}

}  // namespace detail

// adj(g)_{ji} = (-1)^{i+j} det(minor_ij). Exact cofactors for m <= 4; for
// 5 <= m <= 8 det(g) g^{-1} when g is well conditioned, LU cofactors otherwise.
inline Matrix adjugate(const Matrix& g) {
  require_finite(g, "adjugate");
  require_square(g, "adjugate");
  const std::size_t n = g.rows();
  if (n > 8) throw InputError("adjugate: dimension above 8");
  if (n == 1) return Matrix{{1.0}};
  if (n >= 5) {
    const std::vector<double> s = singular_values(g);
    if (s.back() > 1e-8 * s.front()) {
      Matrix inv = inverse(g);
      inv *= determinant(g);
      return inv;
    }
  }
  Matrix adj(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Matrix mn = detail::minor_matrix(g, i, j);
      const double d = n <= 4 ? detail::laplace_det(mn) : determinant(mn);
      adj(j, i) = ((i + j) % 2 == 0 ? 1.0 : -1.0) * d;
    }
  return adj;
}

inline std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::uint64_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Lexicographically ordered k-subsets of {0..n-1}.
inline std::vector<std::vector<std::size_t>> k_subsets(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  if (k > n) return out;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    out.push_back(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

// k-th exterior power on the lexicographic basis e_I, entries det g[I, J].
inline Matrix exterior_power(const Matrix& g, std::size_t k) {
  require_square(g, "exterior_power");
  const std::size_t m = g.rows();
  if (k < 1 || k > m) throw InputError("exterior_power: k out of range");
  const auto subsets = k_subsets(m, k);
  const std::size_t n = subsets.size();
  Matrix out(n, n);
  Matrix sub(k, k);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) sub(i, j) = g(subsets[a][i], subsets[b][j]);
      out(a, b) = k <= 3 ? detail::laplace_det(sub) : determinant(sub);
    }
  return out;
}

inline void exterior_square_into(const Matrix& g, Matrix& out) {
  const std::size_t m = g.rows();
  const std::size_t n = m * (m - 1) / 2;
  if (out.rows() != n || out.cols() != n) out.resize(n, n);
  std::size_t a = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j, ++a) {
      std::size_t b = 0;
      for (std::size_t k = 0; k < m; ++k)
        for (std::size_t l = k + 1; l < m; ++l, ++b) out(a, b) = g(i, k) * g(j, l) - g(i, l) * g(j, k);
    }
}

inline Matrix exterior_square(const Matrix& g) {
  require_finite(g, "exterior_square");
  require_square(g, "exterior_square");
  if (g.rows() < 2) throw InputError("exterior_square: dimension must be at least 2");
  Matrix out;
  exterior_square_into(g, out);
  return out;
}

}  // namespace qplab
