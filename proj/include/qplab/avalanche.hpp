#pragma once

// Avalanche Principle on chains g_0, ..., g_{n-1}:
//   log||g^{(n)}|| ~ -sum_{i=1}^{n-2} log||g_i|| + sum_{i=1}^{n-1} log||g_i g_{i-1}||
// with error of order n * kappa / eps^2 under the gap and angle conditions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "qplab/cocycle.hpp"
#include "qplab/errors.hpp"
#include "qplab/linalg.hpp"
#include "qplab/parallel.hpp"
#include "qplab/rng.hpp"

namespace qplab {

inline constexpr double kDefaultApConstant = 1e-2;

// s1/s2; +inf when s2 = 0.
inline double gap_ratio(const Matrix& g) {
  require_finite(g, "gap_ratio");
  const auto s = singular_values(g);
  if (s.front() == 0.0) throw InputError("gap_ratio: zero matrix");
  if (s.size() < 2 || s[1] == 0.0) return std::numeric_limits<double>::infinity();
  return s[0] / s[1];
}

// Blocks stored as exp(log_scale) * factor, so long blocks never overflow.
class MatrixChain {
 public:
  MatrixChain() = default;
  explicit MatrixChain(std::vector<ScaledMatrix> blocks) : blocks_(std::move(blocks)) { validate(); }
  explicit MatrixChain(const std::vector<Matrix>& blocks) {
    blocks_.reserve(blocks.size());
    for (const auto& b : blocks) {
      require_finite(b, "MatrixChain");
      blocks_.push_back(make_scaled(b));
    }
    validate();
  }

  std::size_t size() const noexcept { return blocks_.size(); }
  std::size_t dim() const noexcept { return blocks_.front().factor.rows(); }
  const ScaledMatrix& operator[](std::size_t i) const { return blocks_[i]; }
  const std::vector<ScaledMatrix>& blocks() const noexcept { return blocks_; }
  const std::vector<std::uint64_t>& block_lengths() const noexcept { return lengths_; }
  void set_block_lengths(std::vector<std::uint64_t> lengths) {
    if (lengths.size() != blocks_.size()) throw InputError("MatrixChain: block length count mismatch");
    lengths_ = std::move(lengths);
  }

  // Every block multiplied by exp(shift_i).
  MatrixChain scaled(std::span<const double> log_shifts) const {
    if (log_shifts.size() != blocks_.size()) throw InputError("MatrixChain::scaled: size mismatch");
    MatrixChain c = *this;
    for (std::size_t i = 0; i < blocks_.size(); ++i) c.blocks_[i].log_scale += log_shifts[i];
    return c;
  }

 private:
  void validate() const {
    if (blocks_.size() < 3) throw InputError("MatrixChain: need at least 3 blocks");
    const std::size_t m = blocks_.front().factor.rows();
    for (const auto& b : blocks_) {
      if (b.factor.rows() != m || b.factor.cols() != m) throw InputError("MatrixChain: blocks differ in shape");
      if (b.is_zero() || max_abs(b.factor) == 0.0) throw InputError("MatrixChain: zero block");
      if (!std::isfinite(b.log_scale)) throw InputError("MatrixChain: non-finite block scale");
    }
  }

  std::vector<ScaledMatrix> blocks_;
  std::vector<std::uint64_t> lengths_;
};

struct ApReport {
  double kappa = 0.0;             // max_i s2(g_i)/s1(g_i)
  double epsilon = 0.0;           // min_i ||g_i g_{i-1}|| / (||g_i|| ||g_{i-1}||)
  double c = kDefaultApConstant;
  bool hypotheses_met = false;    // eps > 0 and kappa <= c eps^2
  double ap_estimate = 0.0;
  double exact_log_norm = 0.0;
  double residual = 0.0;          // |exact_log_norm - ap_estimate|
  double bound = 0.0;             // n kappa / eps^2
  std::size_t n = 0;
};

inline double scaled_log_norm(const ScaledMatrix& g) {
  if (g.is_zero()) return kNegInf;
  return g.log_scale + std::log(spectral_norm(g.factor));
}

// log||product of the chain||, accumulated with power-of-two renormalization.
inline double chain_log_norm(const MatrixChain& chain) {
  Matrix acc = chain[0].factor;
  std::int64_t e2 = normalize_power_of_two(acc);
  std::vector<double> scales{chain[0].log_scale};
  for (std::size_t i = 1; i < chain.size(); ++i) {
    acc = chain[i].factor * acc;
    if (max_abs(acc) == 0.0) return kNegInf;
    e2 += normalize_power_of_two(acc);
    scales.push_back(chain[i].log_scale);
  }
  return pairwise_sum(scales) + static_cast<double>(e2) * std::numbers::ln2 + std::log(spectral_norm(acc));
}

inline ApReport ap_apply(const MatrixChain& chain, double c = kDefaultApConstant) {
  if (!(c > 0.0)) throw InputError("ap_apply: c must be positive");
  const std::size_t n = chain.size();
  ApReport r;
  r.n = n;
  r.c = c;
  std::vector<double> log_norm(n), pair_log(n, 0.0);
  r.kappa = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = singular_values(chain[i].factor);
    log_norm[i] = chain[i].log_scale + std::log(s[0]);
    r.kappa = std::max(r.kappa, s.size() > 1 ? s[1] / s[0] : 0.0);
  }
  r.epsilon = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < n; ++i) {
    const Matrix p = chain[i].factor * chain[i - 1].factor;
    const double pn = spectral_norm(p);
    pair_log[i] = pn == 0.0 ? kNegInf : chain[i].log_scale + chain[i - 1].log_scale + std::log(pn);
    const double ratio = pn / (spectral_norm(chain[i].factor) * spectral_norm(chain[i - 1].factor));
    r.epsilon = std::min(r.epsilon, ratio);
  }
  std::vector<double> terms;
  terms.reserve(2 * n);
  for (std::size_t i = 1; i + 1 < n; ++i) terms.push_back(-log_norm[i]);
  for (std::size_t i = 1; i < n; ++i) terms.push_back(pair_log[i]);
  r.ap_estimate = pairwise_sum(terms);
  r.exact_log_norm = chain_log_norm(chain);
  r.residual = (std::isfinite(r.ap_estimate) && std::isfinite(r.exact_log_norm))
                   ? std::abs(r.exact_log_norm - r.ap_estimate)
                   : std::numeric_limits<double>::infinity();
  r.bound = r.epsilon > 0.0 ? static_cast<double>(n) * r.kappa / (r.epsilon * r.epsilon)
                            : std::numeric_limits<double>::infinity();
  r.hypotheses_met = r.epsilon > 0.0 && r.kappa <= c * r.epsilon * r.epsilon;
  return r;
}

// Blocks g_i = A^{(n0)}(T^{i n0} x) for i < blocks - 1; the last block has
// length last_len in [n0, 2 n0). The chain covers (blocks-1) n0 + last_len steps.
inline MatrixChain schrodinger_chain(const CocycleSpec& spec, const TorusPoint& x, std::uint64_t n0,
                                     std::size_t blocks, std::uint64_t last_len = 0) {
  if (blocks < 3) throw InputError("schrodinger_chain: need at least 3 blocks");
  if (n0 < 1) throw InputError("schrodinger_chain: block length must be positive");
  if (last_len == 0) last_len = n0;
  if (last_len < n0 || last_len >= 2 * n0) throw InputError("schrodinger_chain: last block length must lie in [n0, 2 n0)");
  std::vector<ScaledMatrix> out(blocks);
  std::vector<std::uint64_t> lengths(blocks, n0);
  lengths.back() = last_len;
  parallel_for(blocks, [&](std::size_t i) {
    IterationLedger led;
    led.factor = Matrix::identity(spec.dim());
    advance(spec, x, i * n0, lengths[i], led);
    if (led.zero) throw DegenerateError("schrodinger_chain: block " + std::to_string(i) + " vanishes");
    out[i] = led.scaled();
  });
  MatrixChain chain(std::move(out));
  chain.set_block_lengths(std::move(lengths));
  return chain;
}

// Random m x m orthogonal matrix (QR of a Gaussian matrix).
inline Matrix random_orthogonal(RandomStream& rng, std::size_t m) {
  Matrix g(m, m);
  for (double& v : g.data()) v = rng.normal();
  return householder_qr(g).q;
}

// Chain g_i = U_i diag(1, 1/gap, ...) V_i^T whose input direction v_i leans on
// the previous output direction u_{i-1} at an angle of at most max_angle, so
// angles stay bounded below by about cos(max_angle).
inline MatrixChain random_gapped_chain(RandomStream& rng, std::size_t m, std::size_t n, double gap,
                                       double max_angle = 1.0) {
  if (m < 2) throw InputError("random_gapped_chain: dimension must be at least 2");
  if (!(gap >= 1.0)) throw InputError("random_gapped_chain: gap must be at least 1");
  std::vector<Matrix> blocks;
  blocks.reserve(n);
  std::vector<double> prev_u(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix u = random_orthogonal(rng, m);
    Matrix v = random_orthogonal(rng, m);
    if (i > 0) {
      // Rotate so that v's first column is u_{i-1} tilted by a random angle.
      std::vector<double> w(m);
      for (std::size_t r = 0; r < m; ++r) w[r] = rng.normal();
      double dot = 0.0, nn = 0.0;
      for (std::size_t r = 0; r < m; ++r) dot += w[r] * prev_u[r];
      for (std::size_t r = 0; r < m; ++r) {
        w[r] -= dot * prev_u[r];
        nn += w[r] * w[r];
      }
      nn = std::sqrt(nn);
      const double th = rng.uniform(-max_angle, max_angle);
      Matrix basis(m, m);
      for (std::size_t r = 0; r < m; ++r) basis(r, 0) = std::cos(th) * prev_u[r] + std::sin(th) * w[r] / nn;
      for (std::size_t c = 1; c < m; ++c)
        for (std::size_t r = 0; r < m; ++r) basis(r, c) = v(r, c);
      v = householder_qr(basis).q;
      // Keep the first column's sign aligned with the tilted direction.
      double s = 0.0;
      for (std::size_t r = 0; r < m; ++r) s += v(r, 0) * basis(r, 0);
      if (s < 0.0)
        for (std::size_t r = 0; r < m; ++r) v(r, 0) = -v(r, 0);
    }
    std::vector<double> sig(m);
    for (std::size_t j = 0; j < m; ++j) sig[j] = j == 0 ? 1.0 : rng.uniform(0.1, 1.0) / gap;
    const double scale = std::exp(rng.uniform(-1.0, 1.0));
    Matrix g = u * Matrix::diagonal(sig) * transpose(v);
    g *= scale;
    blocks.push_back(std::move(g));
    for (std::size_t r = 0; r < m; ++r) prev_u[r] = u(r, 0);
  }
  return MatrixChain(blocks);
}

}  // namespace qplab
