#pragma once

// Empirical large-deviation, dip and Birkhoff-average measurements of
// u_n(x) = (1/n) log ||A^{(n)}(x)|| on the torus.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "qplab/cocycle.hpp"
#include "qplab/errors.hpp"
#include "qplab/parallel.hpp"
#include "qplab/rng.hpp"
#include "qplab/torus.hpp"

namespace qplab {

enum class SampleMode { grid, random };

struct SampleSettings {
  std::size_t samples = 4096;
  SampleMode mode = SampleMode::grid;
  std::uint64_t seed = 1;
};

// Grid mode: midpoint tensor grid with g = ceil(samples^{1/d}) points per
// axis, so at least `samples` phases. Random mode: seeded uniform points.
inline std::vector<TorusPoint> sample_phases(std::size_t d, const SampleSettings& s) {
  std::vector<TorusPoint> pts;
  pts.reserve(s.samples);
  if (s.mode == SampleMode::random) {
    RandomStream rng = RandomStream(s.seed).derive("sample-phases");
    for (std::size_t i = 0; i < s.samples; ++i) {
      std::array<double, kMaxTorusDimension> c{};
      for (std::size_t j = 0; j < d; ++j) c[j] = rng.uniform();
      pts.emplace_back(std::span<const double>(c.data(), d));
    }
  } else {
    std::size_t g = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(s.samples), 1.0 / static_cast<double>(d))));
    while (g > 1 && ipow(g - 1, d) >= s.samples) --g;
    while (ipow(g, d) < s.samples) ++g;
    const std::size_t total = ipow(g, d);
    for (std::size_t i = 0; i < total; ++i) pts.push_back(grid_point(i, g, d));
  }
  return pts;
}

inline std::vector<double> sample_u(const CocycleSpec& spec, std::uint64_t n, const SampleSettings& s) {
  const auto pts = sample_phases(spec.torus_dim(), s);
  return parallel_map(pts.size(), [&](std::size_t i) { return u_n(spec, pts[i], n); });
}

struct DeviationRow {
  std::uint64_t n = 0;
  double epsilon = 0.0;
  double measure = 0.0;         // in [0, 1]
  double std_error = 0.0;       // sqrt(p (1 - p) / N)
  std::size_t samples = 0;
  double mean_u = 0.0;          // over finite samples
};

using DeviationProfile = std::vector<DeviationRow>;

inline constexpr std::size_t kMinDeviationSamples = 1000;

// Fraction of phases with |u_n(x) - <u_n>| > epsilon; -inf counts as deviating.
inline DeviationRow deviation_from_values(std::span<const double> u, std::uint64_t n, double epsilon) {
  DeviationRow row;
  row.n = n;
  row.epsilon = epsilon;
  row.samples = u.size();
  std::size_t ex = 0;
  row.mean_u = detail::mean_of_finite(u, ex);
  std::size_t bad = 0;
  for (double v : u)
    if (!std::isfinite(v) || !std::isfinite(row.mean_u) || std::abs(v - row.mean_u) > epsilon) ++bad;
  const double nn = static_cast<double>(u.size());
  row.measure = static_cast<double>(bad) / nn;
  row.std_error = std::sqrt(row.measure * (1.0 - row.measure) / nn);
  return row;
}

inline DeviationRow deviation_measure(const CocycleSpec& spec, std::uint64_t n, double epsilon,
                                      const SampleSettings& s = {}) {
  if (s.samples < kMinDeviationSamples) throw InputError("deviation_measure: need at least 1000 samples");
  if (!(epsilon > 0.0)) throw InputError("deviation_measure: epsilon must be positive");
  const auto u = sample_u(spec, n, s);
  return deviation_from_values(u, n, epsilon);
}

// Rows for each n with epsilon_n = n^{-exponent}.
inline DeviationProfile deviation_profile(const CocycleSpec& spec, const std::vector<std::uint64_t>& ns,
                                          double exponent, const SampleSettings& s = {}) {
  DeviationProfile out;
  for (std::uint64_t n : ns) out.push_back(deviation_measure(spec, n, std::pow(static_cast<double>(n), -exponent), s));
  return out;
}

// Number of i with measure[i+1] > measure[i] + z (se[i] + se[i+1]).
inline std::size_t count_inversions(const DeviationProfile& p, double z = 2.0) {
  std::size_t c = 0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i)
    if (p[i + 1].measure > p[i].measure + z * (p[i].std_error + p[i + 1].std_error)) ++c;
  return c;
}

inline std::size_t count_raw_inversions(const DeviationProfile& p) {
  std::size_t c = 0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i)
    if (p[i + 1].measure > p[i].measure) ++c;
  return c;
}

struct DecayFit {
  double exponent = std::numeric_limits<double>::quiet_NaN();  // slope b in -log p ~ C n^b
  double intercept = std::numeric_limits<double>::quiet_NaN();
  std::size_t points = 0;
  bool valid = false;
};

// Least squares of log(-log p) against log n over rows with 0 < p < 1.
inline DecayFit fit_decay_exponent(const DeviationProfile& p) {
  std::vector<double> xs, ys;
  for (const auto& r : p)
    if (r.measure > 0.0 && r.measure < 1.0) {
      xs.push_back(std::log(static_cast<double>(r.n)));
      ys.push_back(std::log(-std::log(r.measure)));
    }
  DecayFit f;
  f.points = xs.size();
  if (xs.size() < 2) return f;
  const double mx = pairwise_mean(xs), my = pairwise_mean(ys);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) return f;
  f.exponent = sxy / sxx;
  f.intercept = my - f.exponent * mx;
  f.valid = true;
  return f;
}

// Fraction of phases with u_n(x) < -t; -inf counts as a dip.
inline double dip_measure(const CocycleSpec& spec, std::uint64_t n, double t, const SampleSettings& s = {}) {
  if (!(t > 0.0)) throw InputError("dip_measure: T must be positive");
  const auto u = sample_u(spec, n, s);
  const auto dips = std::count_if(u.begin(), u.end(), [&](double v) { return v < -t; });
  return static_cast<double>(dips) / static_cast<double>(u.size());
}

// x -> max(u_n(x), -T).
class TruncatedObservable {
 public:
  TruncatedObservable(CocycleSpec spec, std::uint64_t n, double t) : spec_(std::move(spec)), n_(n), t_(t) {
    if (!(t_ > 0.0)) throw InputError("truncate_u: T must be positive");
    if (n_ < 1) throw InputError("truncate_u: n must be at least 1");
  }

  double operator()(const TorusPoint& x) const { return std::max(u_n(spec_, x, n_), -t_); }
  double floor() const noexcept { return -t_; }
  std::uint64_t n() const noexcept { return n_; }
  const CocycleSpec& spec() const noexcept { return spec_; }

  struct MeanShift {
    double mean_u = 0.0;          // -inf samples excluded
    double mean_truncated = 0.0;
    double shift = 0.0;           // |mean_u - mean_truncated|
    std::size_t excluded = 0;
  };

  MeanShift mean_shift(const SampleSettings& s = {}) const {
    const auto u = sample_u(spec_, n_, s);
    MeanShift m;
    m.mean_u = detail::mean_of_finite(u, m.excluded);
    std::vector<double> t(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) t[i] = std::max(u[i], -t_);
    m.mean_truncated = pairwise_mean(t);
    m.shift = std::isfinite(m.mean_u) ? std::abs(m.mean_u - m.mean_truncated) : std::numeric_limits<double>::infinity();
    return m;
  }

 private:
  CocycleSpec spec_;
  std::uint64_t n_;
  double t_;
};

inline TruncatedObservable truncate_u(const CocycleSpec& spec, std::uint64_t n, double t) {
  return TruncatedObservable(spec, n, t);
}

struct BirkhoffResult {
  double average = 0.0;      // (1/N) sum_{j<N} u_{n0}(x + j n0 omega)
  double mean = 0.0;         // <u_{n0}> on the quadrature grid
  double deviation = 0.0;    // |average - mean|
  std::uint64_t terms = 0;
  std::uint64_t block_len = 0;
  std::size_t excluded = 0;  // -inf terms left out
};

inline BirkhoffResult birkhoff_average(const CocycleSpec& spec, std::uint64_t n0, std::uint64_t terms,
                                       const TorusPoint& x, std::optional<double> mean = std::nullopt,
                                       const QuadratureSettings& quad = {}) {
  if (terms < 1) throw InputError("birkhoff_average: N must be at least 1");
  if (n0 < 1) throw InputError("birkhoff_average: block length must be at least 1");
  BirkhoffResult r;
  r.terms = terms;
  r.block_len = n0;
  r.mean = mean ? *mean : finite_scale_top_le(spec, n0, quad).estimate;
  auto vals = parallel_map(static_cast<std::size_t>(terms), [&](std::size_t j) {
    return u_n(spec, translate(x, spec.frequency(), static_cast<std::uint64_t>(j) * n0), n0);
  });
  r.average = detail::mean_of_finite(vals, r.excluded);
  r.deviation = std::abs(r.average - r.mean);
  return r;
}

}  // namespace qplab
