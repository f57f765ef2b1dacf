#pragma once

// Cocycles over a torus translation, renormalized iteration and Lyapunov
// exponents.
//
// A cocycle evaluator writes a matrix B into a row-major buffer and returns a
// log scale s so that A(x) = exp(s) * B. Most evaluators return 0; reduced and
// regularized cocycles use s to carry scalar factors that would overflow.
// s = -inf means A(x) = 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qplab/errors.hpp"
#include "qplab/linalg.hpp"
#include "qplab/parallel.hpp"
#include "qplab/torus.hpp"
#include "qplab/trig.hpp"

namespace qplab {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using CocycleEvaluator = std::function<double(const TorusPoint&, std::span<double>)>;

class CocycleSpec {
 public:
  CocycleSpec() = default;
  CocycleSpec(std::size_t m, Frequency omega, CocycleEvaluator eval, std::string name = "custom")
      : m_(m), omega_(std::move(omega)), eval_(std::make_shared<const CocycleEvaluator>(std::move(eval))),
        name_(std::move(name)) {
    if (m_ == 0 || m_ > 16) throw InputError("CocycleSpec: dimension must be 1..16");
    if (!*eval_) throw InputError("CocycleSpec: empty evaluator");
  }

  static CocycleSpec from_trig(MatrixTrigPoly poly, Frequency omega, std::string name = "trig") {
    if (poly.rows() != poly.cols()) throw InputError("CocycleSpec: coefficients must be square");
    if (poly.dim() != omega.dim()) throw InputError("CocycleSpec: torus dimension differs from frequency");
    const std::size_t m = poly.rows();
    auto shared = std::make_shared<const MatrixTrigPoly>(std::move(poly));
    return CocycleSpec(
        m, std::move(omega),
        [shared](const TorusPoint& x, std::span<double> out) {
          shared->evaluate_into(x, out);
          return 0.0;
        },
        std::move(name));
  }

  static CocycleSpec constant(const Matrix& a, Frequency omega, std::string name = "constant") {
    require_square(a, "CocycleSpec::constant");
    require_finite(a, "CocycleSpec::constant");
    auto shared = std::make_shared<const Matrix>(a);
    return CocycleSpec(
        a.rows(), std::move(omega),
        [shared](const TorusPoint&, std::span<double> out) {
          std::copy(shared->data().begin(), shared->data().end(), out.begin());
          return 0.0;
        },
        std::move(name));
  }

  std::size_t dim() const noexcept { return m_; }
  std::size_t torus_dim() const noexcept { return omega_.dim(); }
  const Frequency& frequency() const noexcept { return omega_; }
  const std::string& name() const noexcept { return name_; }

  // Same map over another frequency.
  CocycleSpec with_frequency(Frequency omega) const {
    if (omega.dim() != omega_.dim()) throw InputError("with_frequency: torus dimension mismatch");
    CocycleSpec c = *this;
    c.omega_ = std::move(omega);
    return c;
  }

  double evaluate_into(const TorusPoint& x, std::span<double> out) const {
    if (out.size() != m_ * m_) throw InputError("evaluate_into: buffer size mismatch");
    return (*eval_)(x, out);
  }

  ScaledMatrix evaluate_scaled(const TorusPoint& x) const {
    Matrix b(m_, m_);
    const double s = evaluate_into(x, b.data());
    if (s == kNegInf) return {Matrix(m_, m_), kNegInf};
    return make_scaled(std::move(b), s);
  }

  Matrix evaluate(const TorusPoint& x) const {
    Matrix b(m_, m_);
    const double s = evaluate_into(x, b.data());
    if (s == kNegInf) return Matrix(m_, m_);
    if (s != 0.0) b *= std::exp(s);
    return b;
  }

 private:
  std::size_t m_ = 0;
  Frequency omega_;
  std::shared_ptr<const CocycleEvaluator> eval_;
  std::string name_;
};

// exp(log_scale) * factor == A^{(steps)}(x); max|factor| stays in [1e-2, 1e2/m]
// after every step, so ||factor|| lies in [1e-2, 1e2].
struct IterationLedger {
  Matrix factor;
  std::int64_t exponent2 = 0;
  double log_offset = 0.0;
  std::uint64_t steps = 0;
  bool zero = false;

  double log_scale() const {
    if (zero) return kNegInf;
    return static_cast<double>(exponent2) * std::numbers::ln2 + log_offset;
  }
  double log_norm() const {
    if (zero) return kNegInf;
    return log_scale() + std::log(spectral_norm(factor));
  }
  ScaledMatrix scaled() const {
    if (zero) return {Matrix(factor.rows(), factor.cols()), kNegInf};
    return {factor, log_scale()};
  }
};

inline constexpr double kLedgerLow = 1e-2;
inline constexpr double kLedgerHigh = 1e2;

namespace detail {

// out = a * b for m x m row-major buffers.
inline void small_multiply(std::size_t m, const double* a, const double* b, double* out) {
  if (m == 2) {
    out[0] = a[0] * b[0] + a[1] * b[2];
    out[1] = a[0] * b[1] + a[1] * b[3];
    out[2] = a[2] * b[0] + a[3] * b[2];
    out[3] = a[2] * b[1] + a[3] * b[3];
    return;
  }
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out + i * m;
    std::fill(row, row + m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      const double aik = a[i * m + k];
      if (aik == 0.0) continue;
      const double* brow = b + k * m;
      for (std::size_t j = 0; j < m; ++j) row[j] += aik * brow[j];
    }
  }
}

inline double buffer_max_abs(std::span<const double> v) {
  double mx = 0.0;
  for (double x : v) {
    const double a = std::abs(x);
    if (a > mx || std::isnan(a)) mx = a;
    if (std::isnan(mx)) return mx;
  }
  return mx;
}

}  // namespace detail

// Multiplies the ledger on the left by A(T^{start+j} x), j = 0..count-1.
inline void advance(const CocycleSpec& spec, const TorusPoint& x, std::uint64_t start, std::uint64_t count,
                    IterationLedger& led) {
  const std::size_t m = spec.dim();
  if (led.factor.rows() != m || led.factor.cols() != m) throw InputError("advance: ledger shape mismatch");
  const double high = kLedgerHigh / static_cast<double>(m);
  std::vector<double> a(m * m), tmp(m * m);
  auto cur = led.factor.data();
  for (std::uint64_t j = 0; j < count; ++j) {
    if (led.zero) break;
    const TorusPoint p = translate(x, spec.frequency(), start + j);
    const double s = spec.evaluate_into(p, a);
    if (s == kNegInf) {
      led.zero = true;
      break;
    }
    if (std::isnan(s)) throw DegenerateError("iterate: evaluator returned NaN scale");
    led.log_offset += s;
    detail::small_multiply(m, a.data(), cur.data(), tmp.data());
    std::copy(tmp.begin(), tmp.end(), cur.begin());
    const double mx = detail::buffer_max_abs(cur);
    if (std::isnan(mx) || std::isinf(mx)) throw DegenerateError("iterate: non-finite product at step " + std::to_string(start + j));
    if (mx == 0.0) {
      led.zero = true;
      break;
    }
    if (mx < kLedgerLow || mx > high) led.exponent2 += normalize_power_of_two(led.factor);
  }
  led.steps += count;
  if (led.zero) std::fill(cur.begin(), cur.end(), 0.0);
}

// Renormalized A^{(n)}(x).
inline IterationLedger iterate(const CocycleSpec& spec, const TorusPoint& x, std::uint64_t n) {
  if (n < 1) throw InputError("iterate: n must be at least 1");
  if (x.dim() != spec.torus_dim()) throw InputError("iterate: phase dimension mismatch");
  IterationLedger led;
  led.factor = Matrix::identity(spec.dim());
  advance(spec, x, 0, n, led);
  return led;
}

// (1/n) log ||A^{(n)}(x)||, -inf for a zero product.
inline double u_n(const CocycleSpec& spec, const TorusPoint& x, std::uint64_t n) {
  return iterate(spec, x, n).log_norm() / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Phase-space averages

struct QuadratureSettings {
  std::size_t grid = 0;                  // points per dimension; 0 picks the default
  std::optional<double> truncation;      // floor u >= -T; NaN-free
  bool truncate = false;                 // when set without a value, T = n^0.9
  std::size_t orbit_samples = 0;         // Birkhoff check along the orbit of the grid origin
  std::size_t workers = 0;               // 0 uses worker_count()

  std::size_t grid_for(std::size_t d) const {
    if (grid != 0) return grid;
    return d == 1 ? 2048 : (d == 2 ? 256 : 64);
  }
};

inline std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= b;
  return r;
}

// Midpoint grid point with multi-index decoded from a flat index.
inline TorusPoint grid_point(std::size_t flat, std::size_t g, std::size_t d) {
  std::array<double, kMaxTorusDimension> c{};
  for (std::size_t i = 0; i < d; ++i) {
    c[i] = (static_cast<double>(flat % g) + 0.5) / static_cast<double>(g);
    flat /= g;
  }
  return TorusPoint(std::span<const double>(c.data(), d));
}

// True when every coordinate index of the flat grid index is even.
inline bool on_coarse_subgrid(std::size_t flat, std::size_t g, std::size_t d) {
  for (std::size_t i = 0; i < d; ++i) {
    if ((flat % g) % 2 != 0) return false;
    flat /= g;
  }
  return true;
}

struct FiniteScaleEstimate {
  std::uint64_t n = 0;
  double estimate = 0.0;
  double error_estimate = 0.0;          // 2 |fine grid - coarse subgrid|
  std::size_t samples = 0;
  std::size_t excluded = 0;             // -inf samples left out of the mean
  bool degenerate = false;              // more than half the samples were -inf
  std::optional<double> orbit_estimate;
  std::vector<double> values;           // per-sample u_n, flat grid order
};

namespace detail {

inline double mean_of_finite(std::span<const double> v, std::size_t& excluded) {
  std::vector<double> keep;
  keep.reserve(v.size());
  excluded = 0;
  for (double x : v) {
    if (x == kNegInf) ++excluded;
    else keep.push_back(x);
  }
  if (keep.empty()) return kNegInf;
  return pairwise_mean(keep);
}

}  // namespace detail

// Evaluates fn on the quadrature grid; returns the per-point values.
template <class Fn>
std::vector<double> grid_values(std::size_t d, std::size_t g, Fn&& fn, std::size_t workers = 0) {
  const std::size_t total = ipow(g, d);
  return parallel_map(
      total, [&](std::size_t i) { return fn(grid_point(i, g, d)); }, workers == 0 ? worker_count() : workers);
}

inline FiniteScaleEstimate average_on_grid(std::vector<double> values, std::size_t g, std::size_t d) {
  FiniteScaleEstimate r;
  r.samples = values.size();
  r.estimate = detail::mean_of_finite(values, r.excluded);
  r.degenerate = 2 * r.excluded > r.samples;
  std::vector<double> coarse;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (on_coarse_subgrid(i, g, d)) coarse.push_back(values[i]);
  std::size_t ex = 0;
  const double c = detail::mean_of_finite(coarse, ex);
  // Safety factor 2 covers a pre-asymptotic doubling ratio up to 2.
  r.error_estimate = (std::isfinite(c) && std::isfinite(r.estimate)) ? 2.0 * std::abs(r.estimate - c) : 0.0;
  r.values = std::move(values);
  return r;
}

inline FiniteScaleEstimate finite_scale_top_le(const CocycleSpec& spec, std::uint64_t n,
                                               const QuadratureSettings& quad = {}) {
  if (n < 1) throw InputError("finite_scale_top_le: n must be at least 1");
  const std::size_t d = spec.torus_dim();
  const std::size_t g = quad.grid_for(d);
  if (g < 64) throw InputError("finite_scale_top_le: grid must have at least 64 points per dimension");
  std::optional<double> floor;
  if (quad.truncation) floor = -std::abs(*quad.truncation);
  else if (quad.truncate) floor = -std::pow(static_cast<double>(n), 0.9);
  auto sample = [&](const TorusPoint& x) {
    double u = u_n(spec, x, n);
    if (floor) u = std::max(u, *floor);
    return u;
  };
  FiniteScaleEstimate r = average_on_grid(grid_values(d, g, sample, quad.workers), g, d);
  r.n = n;
  if (quad.orbit_samples > 0) {
    const TorusPoint origin = grid_point(0, g, d);
    auto vals = parallel_map(
        quad.orbit_samples,
        [&](std::size_t j) { return sample(translate(origin, spec.frequency(), j)); },
        quad.workers == 0 ? worker_count() : quad.workers);
    std::size_t ex = 0;
    r.orbit_estimate = detail::mean_of_finite(vals, ex);
  }
  return r;
}

// Grid mean of log|det A(x)|.
inline double mean_log_abs_det(const CocycleSpec& spec, std::size_t grid = 0) {
  const std::size_t d = spec.torus_dim();
  QuadratureSettings q;
  q.grid = grid;
  const std::size_t g = q.grid_for(d);
  auto vals = grid_values(d, g, [&](const TorusPoint& x) {
    Matrix b(spec.dim(), spec.dim());
    const double s = spec.evaluate_into(x, b.data());
    const double det = determinant(b);
    if (s == kNegInf || det == 0.0) return kNegInf;
    return std::log(std::abs(det)) + static_cast<double>(spec.dim()) * s;
  });
  std::size_t ex = 0;
  const double mean = detail::mean_of_finite(vals, ex);
  return ex > 0 ? kNegInf : mean;
}

// ---------------------------------------------------------------------------
// Exterior powers as cocycles

inline CocycleSpec exterior_power_cocycle(const CocycleSpec& spec, std::size_t k) {
  const std::size_t m = spec.dim();
  if (k < 1 || k > m) throw InputError("exterior_power_cocycle: need 1 <= k <= m");
  const std::size_t mk = static_cast<std::size_t>(binomial(m, k));
  if (mk > 16) throw InputError("exterior_power_cocycle: exterior power exceeds dimension 16");
  return CocycleSpec(
      mk, spec.frequency(),
      [spec, k, m](const TorusPoint& x, std::span<double> out) {
        Matrix b(m, m);
        const double s = spec.evaluate_into(x, b.data());
        if (s == kNegInf) return kNegInf;
        const Matrix w = exterior_power(b, k);
        std::copy(w.data().begin(), w.data().end(), out.begin());
        return static_cast<double>(k) * s;
      },
      "wedge" + std::to_string(k) + "(" + spec.name() + ")");
}

inline CocycleSpec exterior_square_cocycle(const CocycleSpec& spec) { return exterior_power_cocycle(spec, 2); }

// ---------------------------------------------------------------------------
// Lyapunov spectrum by repeated QR

struct LyapunovSpectrum {
  std::vector<double> exponents;        // non-increasing; -inf only in a suffix
  std::uint64_t n = 0;
  std::size_t phases = 0;
  std::optional<double> wedge_top;      // L1 of the exterior square at scale n
  std::optional<double> wedge_residual; // |wedge_top - (L1 + L2)|
};

namespace detail {

// In-place QR of the m x m row-major buffer q (columns are vectors) by
// Gram-Schmidt with one reorthogonalization pass. Writes log R_ii into
// logdiag; columns whose residual falls to rel_tol * scale get -inf and are
// replaced by a unit vector orthogonal to the previous ones.
inline void gram_schmidt(std::size_t m, std::span<double> q, std::span<double> logdiag, double rel_tol) {
  double scale = 0.0;
  for (double v : q) scale += v * v;
  scale = std::sqrt(scale);
  auto col_dot = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += q[i * m + a] * q[i * m + b];
    return s;
  };
  auto project_out = [&](std::size_t c) {
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t p = 0; p < c; ++p) {
        const double d = col_dot(p, c);
        for (std::size_t i = 0; i < m; ++i) q[i * m + c] -= d * q[i * m + p];
      }
  };
  for (std::size_t c = 0; c < m; ++c) {
    project_out(c);
    double nrm = std::sqrt(col_dot(c, c));
    if (nrm <= rel_tol * scale || nrm == 0.0) {
      logdiag[c] = kNegInf;
      // Replacement direction: the basis vector with the largest residual.
      std::size_t best = 0;
      double best_norm = -1.0;
      for (std::size_t e = 0; e < m; ++e) {
        for (std::size_t i = 0; i < m; ++i) q[i * m + c] = (i == e) ? 1.0 : 0.0;
        project_out(c);
        const double r = col_dot(c, c);
        if (r > best_norm) {
          best_norm = r;
          best = e;
        }
      }
      for (std::size_t i = 0; i < m; ++i) q[i * m + c] = (i == best) ? 1.0 : 0.0;
      project_out(c);
      nrm = std::sqrt(col_dot(c, c));
    } else {
      logdiag[c] = std::log(nrm);
    }
    for (std::size_t i = 0; i < m; ++i) q[i * m + c] /= nrm;
  }
}

// Per-phase exponents, sorted non-increasing.
inline std::vector<double> phase_exponents(const CocycleSpec& spec, const TorusPoint& x, std::uint64_t n) {
  const std::size_t m = spec.dim();
  std::vector<double> a(m * m), q(m * m, 0.0), tmp(m * m), logdiag(m), sum(m, 0.0);
  std::vector<bool> dead(m, false);
  for (std::size_t i = 0; i < m; ++i) q[i * m + i] = 1.0;
  for (std::uint64_t j = 0; j < n; ++j) {
    const TorusPoint p = translate(x, spec.frequency(), j);
    const double s = spec.evaluate_into(p, a);
    if (s == kNegInf) {
      std::fill(sum.begin(), sum.end(), kNegInf);
      break;
    }
    small_multiply(m, a.data(), q.data(), tmp.data());
    gram_schmidt(m, tmp, logdiag, 1e-13);
    std::swap(q, tmp);
    for (std::size_t c = 0; c < m; ++c) {
      if (dead[c]) continue;
      if (logdiag[c] == kNegInf) {
        dead[c] = true;
        sum[c] = kNegInf;
      } else {
        sum[c] += logdiag[c] + s;
      }
    }
  }
  for (double& v : sum)
    if (v != kNegInf) v /= static_cast<double>(n);
  std::sort(sum.begin(), sum.end(), std::greater<>());
  return sum;
}

}  // namespace detail

// Phase sample i of count: midpoints along the first coordinate and a
// Kronecker sequence in the others.
inline TorusPoint spectrum_phase(std::size_t i, std::size_t count, std::size_t d) {
  static constexpr std::array<double, 2> kKronecker{0.7548776662466927, 0.5698402909980532};
  std::array<double, kMaxTorusDimension> c{};
  c[0] = (static_cast<double>(i) + 0.5) / static_cast<double>(count);
  for (std::size_t k = 1; k < d; ++k) c[k] = wrap_unit(0.5 + static_cast<double>(i) * kKronecker[k - 1]);
  return TorusPoint(std::span<const double>(c.data(), d));
}

inline LyapunovSpectrum lyapunov_spectrum(const CocycleSpec& spec, std::uint64_t n, std::size_t phases,
                                          bool wedge_check = true) {
  const std::size_t m = spec.dim();
  if (n < m) throw InputError("lyapunov_spectrum: n must be at least the dimension");
  if (phases < 1) throw InputError("lyapunov_spectrum: need at least one phase");
  const std::size_t d = spec.torus_dim();
  auto per_phase = parallel_map(phases, [&](std::size_t i) {
    return detail::phase_exponents(spec, spectrum_phase(i, phases, d), n);
  });
  LyapunovSpectrum out;
  out.n = n;
  out.phases = phases;
  out.exponents.assign(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<double> col(phases);
    for (std::size_t i = 0; i < phases; ++i) col[i] = per_phase[i][k];
    std::size_t ex = 0;
    const double mean = detail::mean_of_finite(col, ex);
    out.exponents[k] = (2 * ex > phases) ? kNegInf : mean;
  }
  // -inf only in a suffix.
  for (std::size_t k = 1; k < m; ++k)
    if (out.exponents[k - 1] == kNegInf) out.exponents[k] = kNegInf;
  if (wedge_check && m >= 2 && m <= 4) {
    const CocycleSpec w = exterior_square_cocycle(spec);
    auto vals = parallel_map(phases, [&](std::size_t i) { return u_n(w, spectrum_phase(i, phases, d), n); });
    std::size_t ex = 0;
    const double top = detail::mean_of_finite(vals, ex);
    out.wedge_top = top;
    const double sum12 = out.exponents[0] + out.exponents[1];
    if (std::isfinite(top) && std::isfinite(sum12)) out.wedge_residual = std::abs(top - sum12);
  }
  return out;
}

}  // namespace qplab
