#pragma once

// Real trigonometric polynomials on the torus, scalar and matrix valued:
//   f(x) = sum_k  a_k cos(2 pi k.x) + b_k sin(2 pi k.x).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qplab/errors.hpp"
#include "qplab/linalg.hpp"
#include "qplab/torus.hpp"

namespace qplab {

namespace detail {

// 2 pi (k.x mod 1); reducing first keeps the argument small.
inline double trig_phase(std::span<const int> k, const TorusPoint& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i)
    if (k[i] != 0) s += frac_of_product(static_cast<double>(k[i]), x[i]);
  return 2.0 * std::numbers::pi * wrap_unit(s);
}

inline bool is_zero_mode(std::span<const int> k) {
  for (int v : k)
    if (v != 0) return false;
  return true;
}

}  // namespace detail

struct TrigTerm {
  std::vector<int> k;
  double cos_coef = 0.0;
  double sin_coef = 0.0;
};

class TrigPoly {
 public:
  TrigPoly() = default;
  TrigPoly(std::size_t dim, std::vector<TrigTerm> terms) : dim_(dim), terms_(std::move(terms)) {
    if (dim_ == 0 || dim_ > kMaxTorusDimension) throw InputError("TrigPoly: bad torus dimension");
    for (const auto& t : terms_) {
      if (t.k.size() != dim_) throw InputError("TrigPoly: mode length differs from torus dimension");
      if (!std::isfinite(t.cos_coef) || !std::isfinite(t.sin_coef))
        throw InputError("TrigPoly: non-finite coefficient");
    }
  }

  static TrigPoly constant(double c, std::size_t dim = 1) {
    return TrigPoly(dim, {TrigTerm{std::vector<int>(dim, 0), c, 0.0}});
  }
  // a + b cos(2 pi x_1) in one variable (or along the first coordinate).
  static TrigPoly cosine(double amplitude = 1.0, double offset = 0.0, std::size_t dim = 1) {
    std::vector<int> k1(dim, 0);
    k1[0] = 1;
    return TrigPoly(dim, {TrigTerm{std::vector<int>(dim, 0), offset, 0.0}, TrigTerm{k1, amplitude, 0.0}});
  }
  static TrigPoly sine(double amplitude = 1.0, double offset = 0.0, std::size_t dim = 1) {
    std::vector<int> k1(dim, 0);
    k1[0] = 1;
    return TrigPoly(dim, {TrigTerm{std::vector<int>(dim, 0), offset, 0.0}, TrigTerm{k1, 0.0, amplitude}});
  }

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<TrigTerm>& terms() const noexcept { return terms_; }

  double operator()(const TorusPoint& x) const {
    double v = 0.0;
    for (const auto& t : terms_) {
      if (detail::is_zero_mode(t.k)) {
        v += t.cos_coef;
        continue;
      }
      const double th = detail::trig_phase(t.k, x);
      if (t.cos_coef != 0.0) v += t.cos_coef * std::cos(th);
      if (t.sin_coef != 0.0) v += t.sin_coef * std::sin(th);
    }
    return v;
  }

  bool is_constant() const {
    for (const auto& t : terms_)
      if (!detail::is_zero_mode(t.k) && (t.cos_coef != 0.0 || t.sin_coef != 0.0)) return false;
    return true;
  }

  // Upper bound on sup |f| (sum of |coefficients|).
  double coefficient_bound() const {
    double s = 0.0;
    for (const auto& t : terms_) s += std::abs(t.cos_coef) + std::abs(t.sin_coef);
    return s;
  }

 private:
  std::size_t dim_ = 1;
  std::vector<TrigTerm> terms_;
};

struct MatrixTrigTerm {
  std::vector<int> k;
  Matrix cos_coef;
  Matrix sin_coef;  // may be empty (treated as zero)
};

class MatrixTrigPoly {
 public:
  MatrixTrigPoly() = default;
  MatrixTrigPoly(std::size_t rows, std::size_t cols, std::size_t dim, std::vector<MatrixTrigTerm> terms)
      : rows_(rows), cols_(cols), dim_(dim), terms_(std::move(terms)) {
    if (rows_ == 0 || cols_ == 0) throw InputError("MatrixTrigPoly: empty shape");
    if (dim_ == 0 || dim_ > kMaxTorusDimension) throw InputError("MatrixTrigPoly: bad torus dimension");
    for (auto& t : terms_) {
      if (t.k.size() != dim_) throw InputError("MatrixTrigPoly: mode length differs from torus dimension");
      if (t.cos_coef.empty()) t.cos_coef = Matrix(rows_, cols_);
      if (t.sin_coef.empty()) t.sin_coef = Matrix(rows_, cols_);
      for (const Matrix* c : {&t.cos_coef, &t.sin_coef}) {
        if (c->rows() != rows_ || c->cols() != cols_)
          throw InputError("MatrixTrigPoly: coefficient shape mismatch");
        if (!all_finite(*c)) throw InputError("MatrixTrigPoly: non-finite coefficient");
      }
    }
  }

  static MatrixTrigPoly constant(const Matrix& c, std::size_t dim = 1) {
    return MatrixTrigPoly(c.rows(), c.cols(), dim, {MatrixTrigTerm{std::vector<int>(dim, 0), c, {}}});
  }
  // Entrywise scalar polynomials.
  static MatrixTrigPoly from_entries(std::size_t rows, std::size_t cols,
                                     const std::vector<std::vector<TrigPoly>>& entries) {
    if (entries.size() != rows) throw InputError("MatrixTrigPoly: entry rows mismatch");
    std::size_t dim = 0;
    std::vector<MatrixTrigTerm> terms;
    for (std::size_t i = 0; i < rows; ++i) {
      if (entries[i].size() != cols) throw InputError("MatrixTrigPoly: entry cols mismatch");
      for (std::size_t j = 0; j < cols; ++j) {
        const TrigPoly& p = entries[i][j];
        if (dim == 0) dim = p.dim();
        if (p.dim() != dim) throw InputError("MatrixTrigPoly: entries on different tori");
        for (const auto& t : p.terms()) {
          MatrixTrigTerm mt{t.k, Matrix(rows, cols), Matrix(rows, cols)};
          mt.cos_coef(i, j) = t.cos_coef;
          mt.sin_coef(i, j) = t.sin_coef;
          terms.push_back(std::move(mt));
        }
      }
    }
    return MatrixTrigPoly(rows, cols, dim == 0 ? 1 : dim, std::move(terms));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<MatrixTrigTerm>& terms() const noexcept { return terms_; }

  void evaluate_into(const TorusPoint& x, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& t : terms_) {
      double c = 1.0, s = 0.0;
      if (!detail::is_zero_mode(t.k)) {
        const double th = detail::trig_phase(t.k, x);
        c = std::cos(th);
        s = std::sin(th);
      }
      const auto cc = t.cos_coef.data();
      const auto sc = t.sin_coef.data();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * cc[i] + s * sc[i];
    }
  }

  Matrix operator()(const TorusPoint& x) const {
    Matrix m(rows_, cols_);
    evaluate_into(x, m.data());
    return m;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0, dim_ = 1;
  std::vector<MatrixTrigTerm> terms_;
};

}  // namespace qplab
