#pragma once

// Built-in model families: quasi-periodic Schrodinger cocycles, the block
// family S_delta = [[M, delta N], [delta P, delta Q]], block Jacobi cocycles and
// the finite-volume block Jacobi operator with its IDS and Thouless check.
//
// Operator convention (Dirichlet truncation to sites 0..n-1, W_j = W(x + j w)):
//   (H psi)_j = -W_{j+1} psi_{j+1} - W_j^T psi_{j-1} + (lambda F_j + R_j) psi_j
// so H psi = E psi is the recursion carried by the 2l x 2l cocycle
//   A(x) = [[W^{-1}(x+w)(lambda F(x) + R(x) - E), -W^{-1}(x+w) W^T(x)], [I, 0]].

#include <lapacke.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
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
// Schrodinger

struct SchrodingerParams {
  TrigPoly f = TrigPoly::cosine();
  double lambda = 1.0;
  double energy = 0.0;
};

// [[lambda f(x) - E, -1], [1, 0]]; det = 1. A constant f is rejected unless
// allow_constant is set (it yields a constant cocycle).
inline CocycleSpec schrodinger_cocycle(const SchrodingerParams& p, Frequency omega, bool allow_constant = false) {
  if (!(p.lambda != 0.0) || !std::isfinite(p.lambda)) throw InputError("schrodinger_cocycle: lambda must be finite and nonzero");
  if (!std::isfinite(p.energy)) throw InputError("schrodinger_cocycle: energy must be finite");
  if (p.f.dim() != omega.dim()) throw InputError("schrodinger_cocycle: potential and frequency on different tori");
  if (!allow_constant && p.f.is_constant()) throw InputError("schrodinger_cocycle: potential must be non-constant");
  auto f = std::make_shared<const TrigPoly>(p.f);
  const double lam = p.lambda, e = p.energy;
  return CocycleSpec(
      2, std::move(omega),
      [f, lam, e](const TorusPoint& x, std::span<double> out) {
        out[0] = lam * (*f)(x) - e;
        out[1] = -1.0;
        out[2] = 1.0;
        out[3] = 0.0;
        return 0.0;
      },
      "schrodinger");
}

// sup |f| on a midpoint grid (4096 points in d = 1, 256 per axis in d = 2, 32 otherwise).
inline double sup_norm(const TrigPoly& f) {
  const std::size_t d = f.dim();
  const std::size_t g = d == 1 ? 4096 : (d == 2 ? 256 : 32);
  const auto vals = grid_values(d, g, [&](const TorusPoint& x) { return std::abs(f(x)); });
  return *std::max_element(vals.begin(), vals.end());
}

// Midpoint quadrature of log|lambda f(x) - E| (2^16 points in d = 1).
inline double log_potential_integral(const TrigPoly& f, double lambda, double e, std::size_t grid = 0) {
  const std::size_t d = f.dim();
  const std::size_t g = grid != 0 ? grid : (d == 1 ? 65536 : (d == 2 ? 512 : 64));
  auto vals = grid_values(d, g, [&](const TorusPoint& x) {
    const double v = std::abs(lambda * f(x) - e);
    return v == 0.0 ? kNegInf : std::log(v);
  });
  std::size_t ex = 0;
  return detail::mean_of_finite(vals, ex);
}

struct SoretsSpencerOptions {
  std::uint64_t n = 1000;     // iteration scale for L1
  std::size_t grid = 512;     // phase grid for L1 (per dimension)
  std::size_t rhs_grid = 0;   // quadrature grid for the log-potential integral
};

struct SoretsSpencerRow {
  double lambda = 0.0;
  double energy = 0.0;
  char regime = 'a';          // 'a': |E| <= 2|lambda| ||f||, 'b' otherwise
  double l1 = 0.0;
  double rhs = 0.0;           // integral of log|lambda f - E|
  double residual = 0.0;      // |l1 - rhs|
  double margin = 0.0;        // l1 - log|lambda|
};

struct SoretsSpencerReport {
  std::vector<SoretsSpencerRow> rows;
  double max_residual = 0.0;
  double fitted_c = 0.0;      // smallest C >= 0 with l1 - log|lambda| >= -C on every row
};

inline SoretsSpencerReport verify_sorets_spencer(const TrigPoly& f, Frequency omega, const std::vector<double>& lambdas,
                                                 const std::vector<double>& energies,
                                                 const SoretsSpencerOptions& opt = {}) {
  const double fn = sup_norm(f);
  SoretsSpencerReport rep;
  QuadratureSettings quad;
  quad.grid = opt.grid;
  for (double lam : lambdas)
    for (double e : energies) {
      const CocycleSpec spec = schrodinger_cocycle({f, lam, e}, omega);
      SoretsSpencerRow r;
      r.lambda = lam;
      r.energy = e;
      r.regime = std::abs(e) <= 2.0 * std::abs(lam) * fn ? 'a' : 'b';
      r.l1 = finite_scale_top_le(spec, opt.n, quad).estimate;
      r.rhs = log_potential_integral(f, lam, e, opt.rhs_grid);
      r.residual = std::abs(r.l1 - r.rhs);
      r.margin = r.l1 - std::log(std::abs(lam));
      rep.max_residual = std::max(rep.max_residual, r.residual);
      rep.fitted_c = std::max(rep.fitted_c, -r.margin);
      rep.rows.push_back(r);
    }
  return rep;
}

// ---------------------------------------------------------------------------
// S_delta = [[M, delta N], [delta P, delta Q]]

// M is an l x l cocycle; N, P, Q are l x (m-l), (m-l) x l, (m-l) x (m-l) maps.
inline CocycleSpec block_cocycle_S(double delta, const CocycleSpec& m_block, const MatrixTrigPoly& n_block,
                                   const MatrixTrigPoly& p_block, const MatrixTrigPoly& q_block) {
  const std::size_t l = m_block.dim();
  const std::size_t r = q_block.rows();
  if (!std::isfinite(delta)) throw InputError("block_cocycle_S: delta must be finite");
  if (r == 0 || q_block.cols() != r) throw InputError("block_cocycle_S: Q must be square");
  if (n_block.rows() != l || n_block.cols() != r) throw InputError("block_cocycle_S: N has the wrong shape");
  if (p_block.rows() != r || p_block.cols() != l) throw InputError("block_cocycle_S: P has the wrong shape");
  const std::size_t d = m_block.torus_dim();
  if (n_block.dim() != d || p_block.dim() != d || q_block.dim() != d)
    throw InputError("block_cocycle_S: blocks on different tori");
  const std::size_t m = l + r;
  auto blocks = std::make_shared<const std::tuple<CocycleSpec, MatrixTrigPoly, MatrixTrigPoly, MatrixTrigPoly>>(
      m_block, n_block, p_block, q_block);
  return CocycleSpec(
      m, m_block.frequency(),
      [blocks, l, r, m, delta](const TorusPoint& x, std::span<double> out) {
        const auto& [mb, nb, pb, qb] = *blocks;
        Matrix a(l, l);
        const double s = mb.evaluate_into(x, a.data());
        const double sc = s == kNegInf ? 0.0 : std::exp(s);
        const Matrix nv = nb(x), pv = pb(x), qv = qb(x);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < m; ++j) {
            double v;
            if (i < l && j < l) v = sc * a(i, j);
            else if (i < l) v = delta * nv(i, j - l);
            else if (j < l) v = delta * pv(i - l, j);
            else v = delta * qv(i - l, j - l);
            out[i * m + j] = v;
          }
        return 0.0;
      },
      "block-S");
}

// ---------------------------------------------------------------------------
// Block Jacobi

struct JacobiParams {
  std::size_t l = 1;
  MatrixTrigPoly w;
  MatrixTrigPoly r;
  MatrixTrigPoly f;
  double lambda = 1.0;
};

inline constexpr double kSymmetryTolerance = 1e-12;

// l = 1, W = 1, R = F = 0 on the d-torus.
inline JacobiParams free_laplacian(std::size_t d = 1) {
  JacobiParams p;
  p.l = 1;
  p.w = MatrixTrigPoly::constant(Matrix::identity(1), d);
  p.r = MatrixTrigPoly::constant(Matrix(1, 1), d);
  p.f = MatrixTrigPoly::constant(Matrix(1, 1), d);
  p.lambda = 1.0;
  return p;
}

// Shapes, symmetry of R and F on a 64-point probe, det W not identically zero.
inline void validate_jacobi(const JacobiParams& p) {
  const std::size_t l = p.l;
  if (l == 0 || 2 * l > 16) throw InputError("jacobi: block size must be 1..8");
  for (const MatrixTrigPoly* q : {&p.w, &p.r, &p.f})
    if (q->rows() != l || q->cols() != l) throw InputError("jacobi: W, R, F must be l x l");
  const std::size_t d = p.w.dim();
  if (p.r.dim() != d || p.f.dim() != d) throw InputError("jacobi: W, R, F on different tori");
  if (!std::isfinite(p.lambda)) throw InputError("jacobi: lambda must be finite");
  double max_det = 0.0, w_scale = 0.0;
  for (std::size_t i = 0; i < 64; ++i) {
    const TorusPoint x = spectrum_phase(i, 64, d);
    for (const MatrixTrigPoly* q : {&p.r, &p.f}) {
      const Matrix v = (*q)(x);
      const double tol = kSymmetryTolerance * std::max(1.0, max_abs(v));
      for (std::size_t a = 0; a < l; ++a)
        for (std::size_t b = a + 1; b < l; ++b)
          if (std::abs(v(a, b) - v(b, a)) > tol) throw InputError("jacobi: R and F must be symmetric");
    }
    const Matrix wv = p.w(x);
    w_scale = std::max(w_scale, max_abs(wv));
    max_det = std::max(max_det, std::abs(determinant(wv)));
  }
  if (!(max_det > 1e-14 * std::pow(std::max(w_scale, 1e-300), static_cast<double>(l))))
    throw InputError("jacobi: W is identically singular");
}

enum class JacobiForm {
  raw,          // W^{-1}(x+w) form; phases with det W(x+w) ~ 0 give a zero step (-inf)
  regularized,  // det W(x+w) times the raw form, defined everywhere
};

inline CocycleSpec jacobi_cocycle(const JacobiParams& p, double e, Frequency omega, JacobiForm form = JacobiForm::raw) {
  validate_jacobi(p);
  if (p.w.dim() != omega.dim()) throw InputError("jacobi_cocycle: model and frequency on different tori");
  if (!std::isfinite(e)) throw InputError("jacobi_cocycle: energy must be finite");
  const std::size_t l = p.l, m = 2 * l;
  auto params = std::make_shared<const JacobiParams>(p);
  const Frequency w = omega;
  return CocycleSpec(
      m, std::move(omega),
      [params, l, m, e, w, form](const TorusPoint& x, std::span<double> out) {
        const Matrix wn = params->w(translate(x, w, 1));
        const Matrix wx = params->w(x);
        Matrix diag = params->f(x);
        diag *= params->lambda;
        diag += params->r(x);
        for (std::size_t i = 0; i < l; ++i) diag(i, i) -= e;
        const double g = determinant(wn);
        Matrix left;  // g W^{-1}(x+w) or W^{-1}(x+w)
        double corner = 1.0;
        if (form == JacobiForm::regularized) {
          left = adjugate(wn);
          corner = g;
        } else {
          if (std::abs(g) <= 1e-14 * std::pow(std::max(max_abs(wn), 1e-300), static_cast<double>(l))) {
            std::fill(out.begin(), out.end(), 0.0);
            return kNegInf;
          }
          left = inverse(wn);
        }
        const Matrix top_left = left * diag;
        Matrix top_right = left * transpose(wx);
        top_right *= -1.0;
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < l; ++i)
          for (std::size_t j = 0; j < l; ++j) {
            out[i * m + j] = top_left(i, j);
            out[i * m + l + j] = top_right(i, j);
          }
        for (std::size_t i = 0; i < l; ++i) out[(l + i) * m + i] = corner;
        return 0.0;
      },
      form == JacobiForm::raw ? "jacobi" : "jacobi-regularized");
}

// C(W) = grid mean of log|det W(x)|.
inline double weight_correction(const JacobiParams& p, std::size_t grid = 0) {
  const std::size_t d = p.w.dim();
  QuadratureSettings q;
  q.grid = grid;
  const std::size_t g = d == 1 && grid == 0 ? 65536 : q.grid_for(d);
  auto vals = grid_values(d, g, [&](const TorusPoint& x) {
    const double det = std::abs(determinant(p.w(x)));
    return det == 0.0 ? kNegInf : std::log(det);
  });
  std::size_t ex = 0;
  return detail::mean_of_finite(vals, ex);
}

// Lyapunov spectrum of the raw Jacobi cocycle, computed from the regularized
// form and shifted back by C(W) in every exponent.
inline std::vector<double> jacobi_exponents(const JacobiParams& p, double e, const Frequency& omega, std::uint64_t n,
                                            std::size_t phases, double c_w) {
  const CocycleSpec spec = jacobi_cocycle(p, e, omega, JacobiForm::regularized);
  auto ex = lyapunov_spectrum(spec, n, phases, false).exponents;
  for (double& v : ex) v -= c_w;
  return ex;
}

inline constexpr std::size_t kMaxOperatorSize = 4096;

// Finite-volume Dirichlet truncation H^{(n)}(x), stored in LAPACK upper band
// form with kd = 2l - 1.
class JacobiOperator {
 public:
  JacobiOperator(const JacobiParams& p, const Frequency& omega, const TorusPoint& x, std::size_t n)
      : l_(p.l), n_(n), size_(p.l * n), kd_(2 * p.l - 1) {
    validate_jacobi(p);
    if (n < 1) throw InputError("JacobiOperator: n must be at least 1");
    if (size_ > kMaxOperatorSize) throw InputError("JacobiOperator: n * l exceeds 4096");
    dense_.assign(size_ * size_, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const TorusPoint xj = translate(x, omega, j);
      Matrix diag = p.f(xj);
      diag *= p.lambda;
      diag += p.r(xj);
      for (std::size_t a = 0; a < l_; ++a)
        for (std::size_t b = 0; b < l_; ++b) at(j * l_ + a, j * l_ + b) = diag(a, b);
      if (j + 1 < n) {
        // Block (j, j+1) = -W_{j+1}, block (j+1, j) = -W_{j+1}^T.
        const Matrix wn = p.w(translate(x, omega, j + 1));
        for (std::size_t a = 0; a < l_; ++a)
          for (std::size_t b = 0; b < l_; ++b) {
            at(j * l_ + a, (j + 1) * l_ + b) = -wn(a, b);
            at((j + 1) * l_ + b, j * l_ + a) = -wn(a, b);
          }
      }
    }
  }

  std::size_t size() const noexcept { return size_; }
  std::size_t bandwidth() const noexcept { return kd_; }
  double operator()(std::size_t i, std::size_t j) const { return dense_[i * size_ + j]; }

  Matrix dense() const { return Matrix(size_, size_, dense_); }

  // Ascending eigenvalues via dsbev.
  std::vector<double> eigenvalues() const {
    const lapack_int n = static_cast<lapack_int>(size_);
    const lapack_int kd = static_cast<lapack_int>(std::min(kd_, size_ - 1));
    const lapack_int ldab = kd + 1;
    std::vector<double> ab(static_cast<std::size_t>(ldab) * size_, 0.0);
    for (std::size_t j = 0; j < size_; ++j)
      for (std::size_t i = j >= static_cast<std::size_t>(kd) ? j - kd : 0; i <= j; ++i)
        ab[static_cast<std::size_t>(kd) + i - j + j * ldab] = (*this)(i, j);
    std::vector<double> w(size_);
    const lapack_int info = LAPACKE_dsbev(LAPACK_COL_MAJOR, 'N', 'U', n, kd, ab.data(), ldab, w.data(), nullptr, 1);
    if (info != 0) throw DegenerateError("JacobiOperator: dsbev failed with info " + std::to_string(info));
    return w;
  }

 private:
  double& at(std::size_t i, std::size_t j) { return dense_[i * size_ + j]; }

  std::size_t l_, n_, size_, kd_;
  std::vector<double> dense_;
};

struct SpectralSample {
  std::size_t n = 0;
  TorusPoint phase;
  std::vector<double> eigenvalues;  // ascending, n l of them
};

// Spectra at `phases` seeded uniform phases; solves run in parallel.
inline std::vector<SpectralSample> spectral_samples(const JacobiParams& p, const Frequency& omega, std::size_t n,
                                                    std::size_t phases = 8, std::uint64_t seed = 1) {
  if (phases < 1) throw InputError("spectral_samples: need at least one phase");
  RandomStream rng = RandomStream(seed).derive("ids-phases");
  std::vector<TorusPoint> xs;
  for (std::size_t i = 0; i < phases; ++i) {
    std::array<double, kMaxTorusDimension> c{};
    for (std::size_t k = 0; k < omega.dim(); ++k) c[k] = rng.uniform();
    xs.emplace_back(std::span<const double>(c.data(), omega.dim()));
  }
  return parallel_map(phases, [&](std::size_t i) {
    SpectralSample s;
    s.n = n;
    s.phase = xs[i];
    s.eigenvalues = JacobiOperator(p, omega, xs[i], n).eigenvalues();
    return s;
  });
}

// Phase average of #{eigenvalues <= E} / (n l); N in [0, 1].
inline double ids_from_samples(const std::vector<SpectralSample>& samples, double e) {
  std::vector<double> per(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& ev = samples[i].eigenvalues;
    per[i] = static_cast<double>(std::upper_bound(ev.begin(), ev.end(), e) - ev.begin()) /
             static_cast<double>(ev.size());
  }
  return pairwise_mean(per);
}

inline double ids(const JacobiParams& p, const Frequency& omega, double e, std::size_t n, std::size_t phases = 8,
                  std::uint64_t seed = 1) {
  return ids_from_samples(spectral_samples(p, omega, n, phases, seed), e);
}

inline constexpr double kThoulessWindow = 1e-9;

struct ThoulessOptions {
  std::size_t n = 2000;           // operator size in blocks
  std::size_t phases = 8;         // IDS phases
  std::uint64_t seed = 1;
  std::uint64_t le_n = 20000;     // iteration scale for the exponents
  std::size_t le_phases = 16;
  std::size_t max_shifts = 8;
};

struct ThoulessReport {
  double energy = 0.0;
  double energy_used = 0.0;       // after the collision shift
  std::vector<double> exponents;  // L_1..L_l of the raw cocycle
  double lhs = 0.0;               // L_1 + ... + L_l
  double log_potential = 0.0;     // mean over eigenvalues of log|E - E_j|
  double c_w = 0.0;
  double rhs = 0.0;               // l * log_potential - C(W)
  double residual = std::numeric_limits<double>::infinity();
  bool indeterminate = false;
};

// l * mean log|E - E_j| with the collision window; nullopt on a collision.
inline std::optional<double> log_potential(const std::vector<SpectralSample>& samples, double e) {
  std::vector<double> per(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::vector<double> logs;
    logs.reserve(samples[i].eigenvalues.size());
    for (double ev : samples[i].eigenvalues) {
      const double gap = std::abs(e - ev);
      if (gap < kThoulessWindow) return std::nullopt;
      logs.push_back(std::log(gap));
    }
    per[i] = pairwise_mean(logs);
  }
  return pairwise_mean(per);
}

inline ThoulessReport thouless_check(const JacobiParams& p, const Frequency& omega, double e,
                                     const ThoulessOptions& opt = {}) {
  validate_jacobi(p);
  ThoulessReport rep;
  rep.energy = e;
  const auto samples = spectral_samples(p, omega, opt.n, opt.phases, opt.seed);
  double eu = e;
  std::optional<double> lp = log_potential(samples, eu);
  for (std::size_t k = 1; !lp && k <= opt.max_shifts; ++k) {
    eu = e + static_cast<double>(k) * 10.0 * kThoulessWindow;
    lp = log_potential(samples, eu);
  }
  rep.energy_used = eu;
  rep.c_w = weight_correction(p);
  if (!lp) {
    rep.indeterminate = true;
    return rep;
  }
  rep.log_potential = *lp;
  const auto all = jacobi_exponents(p, eu, omega, opt.le_n, opt.le_phases, rep.c_w);
  rep.exponents.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(p.l));
  rep.lhs = pairwise_sum(rep.exponents);
  rep.rhs = static_cast<double>(p.l) * rep.log_potential - rep.c_w;
  rep.residual = std::abs(rep.lhs - rep.rhs);
  return rep;
}

// ---------------------------------------------------------------------------
// Positivity and simplicity scan

struct PositivityOptions {
  std::uint64_t n = 4000;
  std::size_t phases = 16;
  std::vector<double> s_grid;     // probe values for det(F - sI); empty picks 9 points in [-||F||, ||F||]
};

struct PositivityRow {
  double lambda = 0.0;
  double energy = 0.0;
  std::vector<double> exponents;  // full 2l spectrum of the raw cocycle
  double margin = 0.0;            // L_l - log|lambda|
  double min_gap = 0.0;           // min_{k<l} (L_k - L_{k+1}); +inf when l = 1
  std::vector<double> gaps;       // L_k - L_{k+1} for k = 1..l
};

struct PositivityReport {
  std::vector<PositivityRow> rows;
  std::vector<std::string> violations;  // hypotheses that failed on the probes
  double min_margin = std::numeric_limits<double>::infinity();
  double min_gap = std::numeric_limits<double>::infinity();
};

inline PositivityReport verify_positivity_simplicity(const JacobiParams& p, const Frequency& omega,
                                                     const std::vector<double>& lambdas,
                                                     const std::vector<double>& energies,
                                                     const PositivityOptions& opt = {}) {
  PositivityReport rep;
  try {
    validate_jacobi(p);
  } catch (const InputError& e) {
    rep.violations.emplace_back(e.what());
    return rep;
  }
  const std::size_t l = p.l, d = omega.dim();
  // det(F(x) - sI) must not vanish identically for the probed s.
  double f_norm = 0.0;
  for (std::size_t i = 0; i < 64; ++i) f_norm = std::max(f_norm, spectral_norm(p.f(spectrum_phase(i, 64, d))));
  std::vector<double> s_grid = opt.s_grid;
  if (s_grid.empty())
    for (int k = -4; k <= 4; ++k) s_grid.push_back(f_norm * k / 4.0);
  for (double s : s_grid) {
    double best = 0.0;
    for (std::size_t i = 0; i < 64; ++i) {
      Matrix a = p.f(spectrum_phase(i, 64, d));
      for (std::size_t k = 0; k < l; ++k) a(k, k) -= s;
      best = std::max(best, std::abs(determinant(a)));
    }
    if (!(best > 1e-12 * std::pow(std::max(f_norm, 1.0), static_cast<double>(l))))
      rep.violations.push_back("det(F - sI) vanishes identically at s = " + std::to_string(s));
  }
  const double c_w = weight_correction(p);
  for (double lam : lambdas) {
    if (lam == 0.0) {
      rep.violations.emplace_back("lambda = 0 skipped");
      continue;
    }
    JacobiParams q = p;
    q.lambda = lam;
    for (double e : energies) {
      PositivityRow row;
      row.lambda = lam;
      row.energy = e;
      row.exponents = jacobi_exponents(q, e, omega, opt.n, opt.phases, c_w);
      row.margin = row.exponents[l - 1] - std::log(std::abs(lam));
      row.min_gap = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < l; ++k) {
        const double g = row.exponents[k] - row.exponents[k + 1];
        row.gaps.push_back(g);
        if (k + 1 < l) row.min_gap = std::min(row.min_gap, g);
      }
      rep.min_margin = std::min(rep.min_margin, row.margin);
      rep.min_gap = std::min(rep.min_gap, row.min_gap);
      rep.rows.push_back(std::move(row));
    }
  }
  return rep;
}

}  // namespace qplab
