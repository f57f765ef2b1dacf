#pragma once

// Reduction of an identically singular cocycle A (rank k >= 1) to a k x k
// cocycle R_A of maximal rank and a scalar cocycle h_A:
//
//   V(x)    k rows of A^{(m)}(x)
//   P(x)    = V^+(x) V(x), orthogonal projector onto Range V(x)^T
//   delta_j leading principal minors of V V^T;  g = prod_j delta_j
//   h(x)    = delta_k(x) g(Tx)^3
//   At(x)   = h(x) P(Tx) A(x)
//   R(x)    = V(Tx) At(x) V^+(x) = g(Tx)^3 V(Tx) A(x) V(x)^T adj(V V^T)(x)
//
// All scalars are carried as logarithms (every delta_j is a Gram determinant,
// hence >= 0); matrices as power-of-two-normalized factors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qplab/cocycle.hpp"
#include "qplab/errors.hpp"
#include "qplab/linalg.hpp"
#include "qplab/parallel.hpp"
#include "qplab/rng.hpp"
#include "qplab/torus.hpp"
#include "qplab/trig.hpp"

namespace qplab {

// ---------------------------------------------------------------------------
// Ranks

struct RankProfile {
  std::vector<std::size_t> ranks;     // r(A^{(1)}), ..., r(A^{(m)})
  std::size_t stabilized_rank = 0;    // r(A^{(m)})
  std::size_t stabilization_index = 0;
  double tolerance = kDefaultRankTolerance;
  std::size_t phases = 0;
};

// Numerical rank of A^{(n)}(x) with singular values measured against
// prod_i ||A(T^i x)||, so products that vanish only through cancellation
// count as rank deficient.
inline std::vector<std::size_t> pointwise_ranks(const CocycleSpec& spec, const TorusPoint& x, std::size_t n_max,
                                                double tol) {
  const std::size_t m = spec.dim();
  std::vector<std::size_t> out(n_max, 0);
  IterationLedger led;
  led.factor = Matrix::identity(m);
  double log_norm_product = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const TorusPoint p = translate(x, spec.frequency(), n - 1);
    const ScaledMatrix a = spec.evaluate_scaled(p);
    if (a.is_zero()) break;  // every later iterate is zero as well
    log_norm_product += a.log_scale + std::log(spectral_norm(a.factor));
    advance(spec, x, n - 1, 1, led);
    if (led.zero) break;
    const auto s = singular_values(led.factor);
    const double rel = led.log_scale() - log_norm_product;
    std::size_t r = 0;
    for (double v : s)
      if (v > 0.0 && std::log(v) + rel > std::log(tol)) ++r;
    out[n - 1] = r;
  }
  return out;
}

inline RankProfile rank_profile(const CocycleSpec& spec, std::size_t phases = 64,
                                double tol = kDefaultRankTolerance) {
  if (phases < 1) throw InputError("rank_profile: need at least one phase");
  const std::size_t m = spec.dim();
  const std::size_t d = spec.torus_dim();
  auto per_phase = parallel_map(phases, [&](std::size_t i) {
    return pointwise_ranks(spec, spectrum_phase(i, phases, d), m, tol);
  });
  RankProfile p;
  p.tolerance = tol;
  p.phases = phases;
  p.ranks.assign(m, 0);
  for (const auto& r : per_phase)
    for (std::size_t n = 0; n < m; ++n) p.ranks[n] = std::max(p.ranks[n], r[n]);
  for (std::size_t n = 1; n < m; ++n) p.ranks[n] = std::min(p.ranks[n], p.ranks[n - 1]);
  p.stabilized_rank = p.ranks.back();
  p.stabilization_index = m;
  for (std::size_t n = 0; n < m; ++n)
    if (p.ranks[n] == p.stabilized_rank) {
      p.stabilization_index = n + 1;
      break;
    }
  return p;
}

struct NilpotencyResult {
  bool nilpotent = false;
  std::optional<std::size_t> witness;  // least n with r(A^{(n)}) = 0
  RankProfile profile;
};

inline NilpotencyResult is_nilpotent(const CocycleSpec& spec, std::size_t phases = 64) {
  NilpotencyResult r;
  r.profile = rank_profile(spec, phases);
  r.nilpotent = r.profile.stabilized_rank == 0;
  for (std::size_t n = 0; n < r.profile.ranks.size(); ++n)
    if (r.profile.ranks[n] == 0) {
      r.witness = n + 1;
      break;
    }
  return r;
}

// ---------------------------------------------------------------------------
// Pointwise reduction data

struct ReductionSample {
  Matrix am;                      // normalized factor of A^{(m)}(x)
  double log_am = kNegInf;        // its log scale
  Matrix v;                       // normalized rows of V(x); V = exp(log_am) v
  Qr qr;                          // v^T = q r
  std::vector<double> log_delta;  // log delta_j, j = 1..k (scale included)
  double log_g = kNegInf;
  double gram_ratio = 0.0;        // det(v v^T) / prod ||v_i||^2 in [0, 1]
  bool full_rank = false;
};

namespace detail {

// Greedy volume-maximizing choice of k rows.
inline std::vector<std::size_t> pivoted_rows(const Matrix& a, std::size_t k) {
  const std::size_t m = a.rows(), c = a.cols();
  Matrix w = a;
  std::vector<std::size_t> chosen;
  std::vector<bool> used(m, false);
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t best = m;
    double best_norm = -1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (used[i]) continue;
      double s = 0.0;
      for (std::size_t j = 0; j < c; ++j) s += w(i, j) * w(i, j);
      if (s > best_norm) {
        best_norm = s;
        best = i;
      }
    }
    used[best] = true;
    chosen.push_back(best);
    const double nn = std::sqrt(best_norm);
    if (nn == 0.0) continue;
    std::vector<double> q(c);
    for (std::size_t j = 0; j < c; ++j) q[j] = w(best, j) / nn;
    for (std::size_t i = 0; i < m; ++i) {
      if (used[i]) continue;
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += w(i, j) * q[j];
      for (std::size_t j = 0; j < c; ++j) w(i, j) -= dot * q[j];
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

inline Matrix select_rows(const Matrix& a, const std::vector<std::size_t>& rows) {
  Matrix v(rows.size(), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) v(i, j) = a(rows[i], j);
  return v;
}

inline ReductionSample reduction_sample(const CocycleSpec& spec, const std::vector<std::size_t>& rows,
                                        const TorusPoint& x) {
  const std::size_t m = spec.dim(), k = rows.size();
  ReductionSample s;
  const IterationLedger led = iterate(spec, x, m);
  s.am = led.factor;
  s.log_am = led.log_scale();
  s.v = select_rows(s.am, rows);
  s.log_delta.assign(k, kNegInf);
  if (led.zero) {
    s.qr = Qr{Matrix(m, k), Matrix(k, k)};
    return s;
  }
  s.qr = householder_qr(transpose(s.v));
  double acc = 0.0, ratio = 1.0;
  bool ok = true;
  for (std::size_t j = 0; j < k; ++j) {
    const double rjj = s.qr.r(j, j);
    double rn = 0.0;
    for (std::size_t c = 0; c < m; ++c) rn += s.v(j, c) * s.v(j, c);
    ratio *= rn > 0.0 ? (rjj * rjj) / rn : 0.0;
    if (!(rjj > 0.0)) ok = false;
    acc += ok ? 2.0 * (std::log(rjj) + s.log_am) : 0.0;
    s.log_delta[j] = ok ? acc : kNegInf;
  }
  s.gram_ratio = ratio;
  s.full_rank = ok;
  if (ok) {
    double lg = 0.0;
    for (double ld : s.log_delta) lg += ld;
    s.log_g = lg;
  }
  return s;
}

}  // namespace detail

struct ReductionOptions {
  std::uint64_t seed = 1;
  std::size_t reference_phases = 32;
  std::size_t selection_grid = 512;
  std::size_t rank_phases = 64;
  double rank_tolerance = kDefaultRankTolerance;
};

class ReducedCocycle {
 public:
  ReducedCocycle(CocycleSpec spec, RankProfile profile, std::vector<std::size_t> rows, TorusPoint reference,
                 double selection_score)
      : spec_(std::move(spec)), profile_(std::move(profile)), rows_(std::move(rows)),
        reference_(reference), selection_score_(selection_score) {}

  std::size_t k() const noexcept { return rows_.size(); }
  std::size_t m() const noexcept { return spec_.dim(); }
  const std::vector<std::size_t>& row_indices() const noexcept { return rows_; }
  const TorusPoint& reference_phase() const noexcept { return reference_; }
  const RankProfile& profile() const noexcept { return profile_; }
  const CocycleSpec& original() const noexcept { return spec_; }
  // min over the selection grid of det(V V^T) / prod ||v_i||^2.
  double selection_score() const noexcept { return selection_score_; }

  ReductionSample sample(const TorusPoint& x) const { return detail::reduction_sample(spec_, rows_, x); }

  ScaledMatrix v(const TorusPoint& x) const {
    const ReductionSample s = sample(x);
    if (s.log_am == kNegInf) return {Matrix(k(), m()), kNegInf};
    return make_scaled(s.v, s.log_am);
  }

  // V^+(x) = q r^{-T} exp(-log_am); throws on a rank-deficient V(x).
  ScaledMatrix v_pinv(const TorusPoint& x) const {
    const ReductionSample s = sample(x);
    if (!s.full_rank) throw SingularInputError("v_pinv: V(x) is rank deficient", 0.0, 0);
    return make_scaled(pinv_factor(s), -s.log_am);
  }

  Matrix projector(const TorusPoint& x) const { return projector_of(sample(x)); }

  double log_g(const TorusPoint& x) const { return sample(x).log_g; }

  double log_h(const TorusPoint& x) const {
    const ReductionSample s0 = sample(x);
    const ReductionSample s1 = sample(translate(x, spec_.frequency(), 1));
    return log_h_of(s0, s1);
  }

  // Scalar cocycle h_A; the 1 x 1 factor is 1 and the log scale is log h.
  CocycleSpec h_spec() const {
    auto self = std::make_shared<const ReducedCocycle>(*this);
    return CocycleSpec(
        1, spec_.frequency(),
        [self](const TorusPoint& x, std::span<double> out) {
          out[0] = 1.0;
          return self->log_h(x);
        },
        "h(" + spec_.name() + ")");
  }

  // At(x) = h(x) P(Tx) A(x).
  CocycleSpec atilde_spec() const {
    auto self = std::make_shared<const ReducedCocycle>(*this);
    return CocycleSpec(
        m(), spec_.frequency(),
        [self](const TorusPoint& x, std::span<double> out) {
          const ReductionSample s0 = self->sample(x);
          const ReductionSample s1 = self->sample(translate(x, self->spec_.frequency(), 1));
          const double lh = log_h_of(s0, s1);
          const ScaledMatrix a = self->spec_.evaluate_scaled(x);
          if (lh == kNegInf || a.is_zero()) return kNegInf;
          Matrix b = projector_of(s1) * a.factor;
          const int e = normalize_power_of_two(b);
          std::copy(b.data().begin(), b.data().end(), out.begin());
          return lh + a.log_scale + e * std::numbers::ln2;
        },
        "Atilde(" + spec_.name() + ")");
  }

  // R(x) = g(Tx)^3 V(Tx) A(x) V(x)^T adj(V V^T)(x). For full-rank V the tail
  // equals det(V V^T) V^+, evaluated through the QR of V^T: the error then
  // grows like 1/sqrt(gram ratio) instead of 1/(gram ratio).
  CocycleSpec r_spec() const {
    auto self = std::make_shared<const ReducedCocycle>(*this);
    return CocycleSpec(
        k(), spec_.frequency(),
        [self](const TorusPoint& x, std::span<double> out) {
          const ReductionSample s0 = self->sample(x);
          const ReductionSample s1 = self->sample(translate(x, self->spec_.frequency(), 1));
          const ScaledMatrix a = self->spec_.evaluate_scaled(x);
          if (s1.log_g == kNegInf || a.is_zero() || s0.log_am == kNegInf) return kNegInf;
          const std::size_t kk = self->k();
          Matrix b;
          double log_tail = 0.0;
          if (s0.full_rank) {
            b = s1.v * a.factor * pinv_factor(s0);
            log_tail = s0.log_delta.back() - s0.log_am;
          } else {
            b = s1.v * a.factor * transpose(s0.v) * adjugate(s0.v * transpose(s0.v));
            log_tail = (2.0 * static_cast<double>(kk) - 1.0) * s0.log_am;
          }
          if (max_abs(b) == 0.0) return kNegInf;
          const int e = normalize_power_of_two(b);
          std::copy(b.data().begin(), b.data().end(), out.begin());
          return 3.0 * s1.log_g + s1.log_am + a.log_scale + log_tail + e * std::numbers::ln2;
        },
        "R(" + spec_.name() + ")");
  }

 private:
  static double log_h_of(const ReductionSample& s0, const ReductionSample& s1) {
    if (s0.log_delta.empty() || s0.log_delta.back() == kNegInf || s1.log_g == kNegInf) return kNegInf;
    return s0.log_delta.back() + 3.0 * s1.log_g;
  }

  static Matrix projector_of(const ReductionSample& s) {
    // q has orthonormal columns spanning Range v^T when v has full row rank.
    const Matrix& q = s.qr.q;
    if (!s.full_rank) {
      // Keep only columns with a nonzero pivot.
      Matrix p(q.rows(), q.rows());
      for (std::size_t c = 0; c < q.cols(); ++c) {
        if (!(s.qr.r(c, c) > 0.0)) continue;
        for (std::size_t i = 0; i < q.rows(); ++i)
          for (std::size_t j = 0; j < q.rows(); ++j) p(i, j) += q(i, c) * q(j, c);
      }
      return p;
    }
    return q * transpose(q);
  }

  static Matrix pinv_factor(const ReductionSample& s) {
    // v^T = q r  =>  v^+ = v^T (v v^T)^{-1} = q r^{-T}.
    const std::size_t k = s.qr.r.rows();
    Matrix rinv_t(k, k);  // (r^{-1})^T, lower triangular
    for (std::size_t col = 0; col < k; ++col) {
      // Solve r^T y = e_col by forward substitution.
      for (std::size_t i = 0; i < k; ++i) {
        double acc = i == col ? 1.0 : 0.0;
        for (std::size_t j = 0; j < i; ++j) acc -= s.qr.r(j, i) * rinv_t(j, col);
        rinv_t(i, col) = acc / s.qr.r(i, i);
      }
    }
    return s.qr.q * rinv_t;
  }

  CocycleSpec spec_;
  RankProfile profile_;
  std::vector<std::size_t> rows_;
  TorusPoint reference_;
  double selection_score_ = 0.0;
};

// Row selection: greedy pivoting on A^{(m)} at seeded reference phases; the
// candidate with the best worst-case normalized Gram determinant over a
// fixed grid wins.
inline ReducedCocycle build_reduction(const CocycleSpec& spec, const ReductionOptions& opt = {}) {
  RankProfile profile = rank_profile(spec, opt.rank_phases, opt.rank_tolerance);
  const std::size_t k = profile.stabilized_rank;
  if (k == 0)
    throw NilpotentError("build_reduction: rank 0, the cocycle is nilpotent (see is_nilpotent, witness order " +
                         std::to_string(profile.stabilization_index) + ")");
  const std::size_t m = spec.dim(), d = spec.torus_dim();
  RandomStream rng = RandomStream(opt.seed).derive("row-selection");
  std::vector<TorusPoint> refs;
  std::vector<std::vector<std::size_t>> candidates;
  for (std::size_t i = 0; i < opt.reference_phases; ++i) {
    std::array<double, kMaxTorusDimension> c{};
    for (std::size_t j = 0; j < d; ++j) c[j] = rng.uniform();
    const TorusPoint x(std::span<const double>(c.data(), d));
    const IterationLedger led = iterate(spec, x, m);
    if (led.zero) continue;
    auto rows = detail::pivoted_rows(led.factor, k);
    if (std::find(candidates.begin(), candidates.end(), rows) == candidates.end()) {
      candidates.push_back(std::move(rows));
      refs.push_back(x);
    }
  }
  if (candidates.empty()) throw DegenerateError("build_reduction: every reference phase gave a zero iterate");
  const std::size_t grid = std::max<std::size_t>(opt.selection_grid, 1);
  std::vector<double> score(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    auto vals = parallel_map(grid, [&](std::size_t i) {
      return detail::reduction_sample(spec, candidates[c], spectrum_phase(i, grid, d)).gram_ratio;
    });
    score[c] = *std::min_element(vals.begin(), vals.end());
  }
  const std::size_t best = static_cast<std::size_t>(std::max_element(score.begin(), score.end()) - score.begin());
  return ReducedCocycle(spec, std::move(profile), candidates[best], refs[best], score[best]);
}

// ---------------------------------------------------------------------------
// Semi-conjugation identities

struct IdentityResiduals {
  double rv_vatilde = 0.0;  // R^{(n)}(x) V(x) = V(T^n x) At^{(n)}(x)
  double bn = 0.0;          // At^{(n)} = h^{(n-m)} At^{(m)}(T^{n-m} x) A^{(n-m)}
  double an = 0.0;          // A^{(n)} = (h^{(n-m)})^{-1} A^{(m)}(T^{n-m} x) At^{(n-m)}
};

struct SemiconjugationReport {
  std::uint64_t n = 0;
  std::size_t phases = 0;
  std::size_t rejected = 0;
  IdentityResiduals max_residual;
  std::vector<IdentityResiduals> per_phase;
  std::vector<TorusPoint> points;
};

// max |lhs - rhs| / max|lhs|, with both sides in scaled form.
inline double scaled_residual(const ScaledMatrix& lhs, const ScaledMatrix& rhs) {
  if (lhs.factor.rows() != rhs.factor.rows() || lhs.factor.cols() != rhs.factor.cols())
    throw InputError("scaled_residual: shape mismatch");
  if (lhs.is_zero() && rhs.is_zero()) return 0.0;
  if (lhs.is_zero() || rhs.is_zero()) return std::numeric_limits<double>::infinity();
  const double top = max_abs(lhs.factor);
  const double ratio = std::exp(rhs.log_scale - lhs.log_scale);
  double worst = 0.0;
  for (std::size_t i = 0; i < lhs.factor.size(); ++i)
    worst = std::max(worst, std::abs(lhs.factor.data()[i] - ratio * rhs.factor.data()[i]));
  return worst / top;
}

namespace detail {

inline ScaledMatrix ledger_power(const CocycleSpec& spec, const TorusPoint& x, std::uint64_t n) {
  if (n == 0) return {Matrix::identity(spec.dim()), 0.0};
  return iterate(spec, x, n).scaled();
}

}  // namespace detail

inline IdentityResiduals semiconjugation_residuals(const ReducedCocycle& red, const TorusPoint& x, std::uint64_t n) {
  const CocycleSpec& a = red.original();
  const std::uint64_t m = red.m();
  if (n < m) throw InputError("semiconjugation_residuals: n must be at least m");
  const CocycleSpec r = red.r_spec(), at = red.atilde_spec(), h = red.h_spec();
  const Frequency& w = a.frequency();
  IdentityResiduals out;

  const ScaledMatrix at_n = detail::ledger_power(at, x, n);
  {
    const ScaledMatrix lhs = detail::ledger_power(r, x, n) * red.v(x);
    const ScaledMatrix rhs = red.v(translate(x, w, n)) * at_n;
    out.rv_vatilde = scaled_residual(lhs, rhs);
  }
  const ScaledMatrix h_nm = detail::ledger_power(h, x, n - m);
  const TorusPoint x_nm = translate(x, w, n - m);
  {
    ScaledMatrix rhs = detail::ledger_power(at, x_nm, m) * detail::ledger_power(a, x, n - m);
    rhs.log_scale += h_nm.log_scale + std::log(h_nm.factor(0, 0));
    out.bn = scaled_residual(at_n, rhs);
  }
  {
    const ScaledMatrix lhs = detail::ledger_power(a, x, n);
    ScaledMatrix rhs = detail::ledger_power(a, x_nm, m) * detail::ledger_power(at, x, n - m);
    rhs.log_scale -= h_nm.log_scale + std::log(h_nm.factor(0, 0));
    out.an = scaled_residual(lhs, rhs);
  }
  return out;
}

// Phases avoid a neighbourhood of {det(V V^T) = 0} along the orbit up to n.
inline bool admissible_phase(const ReducedCocycle& red, const TorusPoint& x, std::uint64_t n,
                             double gram_tol = 1e-12) {
  const Frequency& w = red.original().frequency();
  for (std::uint64_t j = 0; j <= n; ++j) {
    const ReductionSample s = red.sample(translate(x, w, j));
    if (!s.full_rank || s.gram_ratio < gram_tol) return false;
  }
  return true;
}

inline SemiconjugationReport verify_semiconjugation(const ReducedCocycle& red, std::uint64_t n, std::size_t phases,
                                                    std::uint64_t seed = 1, std::size_t max_resamples = 100) {
  if (n < red.m()) throw InputError("verify_semiconjugation: n must be at least m");
  const std::size_t d = red.original().torus_dim();
  SemiconjugationReport rep;
  rep.n = n;
  rep.phases = phases;
  RandomStream base = RandomStream(seed).derive("semiconjugation-phases");
  for (std::size_t i = 0; i < phases; ++i) {
    RandomStream rng = base.derive("phase", i);
    std::size_t tries = 0;
    for (;;) {
      std::array<double, kMaxTorusDimension> c{};
      for (std::size_t j = 0; j < d; ++j) c[j] = rng.uniform();
      const TorusPoint x(std::span<const double>(c.data(), d));
      if (admissible_phase(red, x, n)) {
        rep.points.push_back(x);
        break;
      }
      ++rep.rejected;
      if (++tries >= max_resamples)
        throw DegenerateError("verify_semiconjugation: no admissible phase after " + std::to_string(max_resamples) +
                              " resamples");
    }
  }
  rep.per_phase = parallel_map(phases, [&](std::size_t i) { return semiconjugation_residuals(red, rep.points[i], n); });
  for (const auto& r : rep.per_phase) {
    rep.max_residual.rv_vatilde = std::max(rep.max_residual.rv_vatilde, r.rv_vatilde);
    rep.max_residual.bn = std::max(rep.max_residual.bn, r.bn);
    rep.max_residual.an = std::max(rep.max_residual.an, r.an);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Lyapunov exponent decomposition u_n^A = u_n^R - u_n^h + r_n

struct LeDecompositionOptions {
  double a = 0.5;
  double c0 = 1.0;
  std::size_t grid = 0;  // 0 picks the quadrature default
};

struct LeDecomposition {
  std::uint64_t n = 0;
  double l1_a = 0.0;
  double l1_r = 0.0;
  double l1_h = 0.0;
  double remainder_mean = 0.0;
  double remainder_l2 = 0.0;
  double threshold = 0.0;          // c0 n^{-a/3}
  double fraction_above = 0.0;     // |{ |r_n| > threshold }|
  std::size_t samples = 0;
  std::size_t excluded = 0;        // grid points with a -inf term
};

inline std::uint64_t le_decomposition_min_n(std::size_t m) {
  return std::max<std::uint64_t>(static_cast<std::uint64_t>(m) * m * m, 64);
}

inline LeDecomposition le_decomposition(const ReducedCocycle& red, std::uint64_t n,
                                        const LeDecompositionOptions& opt = {}) {
  if (!(opt.a > 0.0 && opt.a < 1.0)) throw InputError("le_decomposition: a must lie in (0,1)");
  if (n < le_decomposition_min_n(red.m()))
    throw InputError("le_decomposition: n must be at least max(m^3, 64)");
  const CocycleSpec& a = red.original();
  const CocycleSpec r = red.r_spec(), h = red.h_spec();
  QuadratureSettings q;
  q.grid = opt.grid;
  const std::size_t d = a.torus_dim(), g = q.grid_for(d);
  struct Triple {
    double ua, ur, uh;
  };
  const std::size_t total = ipow(g, d);
  auto vals = parallel_map(total, [&](std::size_t i) {
    const TorusPoint x = grid_point(i, g, d);
    return Triple{u_n(a, x, n), u_n(r, x, n), u_n(h, x, n)};
  });
  LeDecomposition out;
  out.n = n;
  out.threshold = opt.c0 * std::pow(static_cast<double>(n), -opt.a / 3.0);
  std::vector<double> ua, ur, uh, rem, rem2;
  std::size_t above = 0;
  for (const auto& t : vals) {
    if (!std::isfinite(t.ua) || !std::isfinite(t.ur) || !std::isfinite(t.uh)) {
      ++out.excluded;
      continue;
    }
    ua.push_back(t.ua);
    ur.push_back(t.ur);
    uh.push_back(t.uh);
    const double rn = t.ua - t.ur + t.uh;
    rem.push_back(rn);
    rem2.push_back(rn * rn);
    if (std::abs(rn) > out.threshold) ++above;
  }
  out.samples = vals.size();
  if (ua.empty()) throw DegenerateError("le_decomposition: every grid point produced -inf");
  out.l1_a = pairwise_mean(ua);
  out.l1_r = pairwise_mean(ur);
  out.l1_h = pairwise_mean(uh);
  out.remainder_mean = pairwise_mean(rem);
  out.remainder_l2 = std::sqrt(pairwise_mean(rem2));
  out.fraction_above = static_cast<double>(above) / static_cast<double>(ua.size());
  return out;
}

// ---------------------------------------------------------------------------
// Test-bed cocycles

// A(x) = U(x) W(x)^T with m x k factors whose entries are random degree-1
// trigonometric polynomials; rank k for generic draws.
inline CocycleSpec random_rank_deficient_cocycle(std::uint64_t seed, std::size_t m, std::size_t k,
                                                 Frequency omega = Frequency::golden(), int degree = 1) {
  if (k < 1 || k > m) throw InputError("random_rank_deficient_cocycle: need 1 <= k <= m");
  RandomStream rng = RandomStream(seed).derive("rank-deficient", m * 16 + k);
  const std::size_t d = omega.dim();
  auto factor = [&]() {
    std::vector<std::vector<TrigPoly>> e(m, std::vector<TrigPoly>(k));
    for (auto& row : e)
      for (auto& p : row) {
        std::vector<TrigTerm> terms{{std::vector<int>(d, 0), rng.normal(), 0.0}};
        for (std::size_t axis = 0; axis < d; ++axis)
          for (int q = 1; q <= degree; ++q) {
            std::vector<int> kv(d, 0);
            kv[axis] = q;
            terms.push_back({kv, rng.normal(), rng.normal()});
          }
        p = TrigPoly(d, terms);
      }
    return MatrixTrigPoly::from_entries(m, k, e);
  };
  auto u = std::make_shared<const MatrixTrigPoly>(factor());
  auto w = std::make_shared<const MatrixTrigPoly>(factor());
  return CocycleSpec(
      m, std::move(omega),
      [u, w, m, k](const TorusPoint& x, std::span<double> out) {
        const Matrix ux = (*u)(x), wx = (*w)(x);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < k; ++l) s += ux(i, l) * wx(j, l);
            out[i * m + j] = s;
          }
        return 0.0;
      },
      "random-rank" + std::to_string(k) + "-m" + std::to_string(m) + "-seed" + std::to_string(seed));
}

}  // namespace qplab
