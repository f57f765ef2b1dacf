#pragma once

// Torus phases, translations x -> x + n*omega (mod 1) and Diophantine checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qplab/errors.hpp"

namespace qplab {

inline constexpr std::size_t kMaxTorusDimension = 3;

// Fractional part in [0,1).
inline double wrap_unit(double y) {
  double f = y - std::floor(y);
  if (f >= 1.0) f = 0.0;
  return f;
}

// Distance from y to the nearest integer.
inline double dist_to_integer(double y) {
  const double f = wrap_unit(y);
  return std::min(f, 1.0 - f);
}

// Fractional part of n*w computed from the exact product n*w = p + e.
inline double frac_of_product(double n, double w) {
  const double p = n * w;
  const double e = std::fma(n, w, -p);
  return wrap_unit((p - std::floor(p)) + e);
}

class TorusPoint {
 public:
  TorusPoint() = default;
  explicit TorusPoint(std::span<const double> coords) : dim_(coords.size()) {
    if (dim_ == 0 || dim_ > kMaxTorusDimension)
      throw InputError("TorusPoint: dimension must be 1.." + std::to_string(kMaxTorusDimension));
    for (std::size_t i = 0; i < dim_; ++i) {
      if (!std::isfinite(coords[i])) throw InputError("TorusPoint: non-finite coordinate");
      coords_[i] = wrap_unit(coords[i]);
    }
  }
  TorusPoint(std::initializer_list<double> coords)
      : TorusPoint(std::span<const double>(coords.begin(), coords.size())) {}
  static TorusPoint of(double x) { return TorusPoint{x}; }
  static TorusPoint zero(std::size_t d) {
    const std::array<double, kMaxTorusDimension> z{};
    return TorusPoint(std::span<const double>(z.data(), d));
  }

  std::size_t dim() const noexcept { return dim_; }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const noexcept { return {coords_.data(), dim_}; }

  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;

 private:
  std::size_t dim_ = 0;
  std::array<double, kMaxTorusDimension> coords_{};
};

struct DcCertificate {
  double t = 0.0;
  int exponent = 2;  // d + 1
  std::int64_t k_max = 0;
};

class Frequency {
 public:
  Frequency() = default;
  explicit Frequency(std::vector<double> omega) : omega_(std::move(omega)) {
    if (omega_.empty() || omega_.size() > kMaxTorusDimension)
      throw InputError("Frequency: dimension must be 1.." + std::to_string(kMaxTorusDimension));
    for (double w : omega_)
      if (!std::isfinite(w)) throw InputError("Frequency: non-finite component");
  }
  static Frequency of(double w) { return Frequency(std::vector<double>{w}); }
  static Frequency golden() { return of((std::sqrt(5.0) - 1.0) / 2.0); }

  std::size_t dim() const noexcept { return omega_.size(); }
  double operator[](std::size_t i) const { return omega_[i]; }
  const std::vector<double>& omega() const noexcept { return omega_; }
  const std::optional<DcCertificate>& certificate() const noexcept { return certificate_; }

 private:
  friend class FrequencyCertifier;
  std::vector<double> omega_;
  std::optional<DcCertificate> certificate_;
};

// x + steps * omega (mod 1), coordinatewise. The product steps*omega is
// carried with its rounding error, so long orbits do not drift.
inline TorusPoint translate(const TorusPoint& x, const Frequency& omega, std::uint64_t steps) {
  if (x.dim() != omega.dim()) throw InputError("translate: dimension mismatch");
  std::array<double, kMaxTorusDimension> out{};
  const double n = static_cast<double>(steps);
  for (std::size_t i = 0; i < x.dim(); ++i) out[i] = wrap_unit(x[i] + frac_of_product(n, omega[i]));
  return TorusPoint(std::span<const double>(out.data(), x.dim()));
}

// Circle distance between two phases (max over coordinates).
inline double torus_distance(const TorusPoint& a, const TorusPoint& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) d = std::max(d, dist_to_integer(a[i] - b[i]));
  return d;
}

struct DcCheckResult {
  bool passed = false;
  bool resonance = false;              // some checked k has ||k.omega|| == 0
  double t = 0.0;
  std::int64_t k_max = 0;
  double t_star = 0.0;                 // min over checked k of |k|^{d+1} ||k.omega||
  std::vector<std::int64_t> k_at_t_star;
  std::optional<std::vector<std::int64_t>> first_violation;
};

namespace detail {

// ||k . omega|| with each term reduced mod 1 before summing.
inline double dist_k_dot_omega(const std::vector<std::int64_t>& k, const std::vector<double>& omega) {
  double s = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] == 0) continue;
    const double f = frac_of_product(static_cast<double>(std::llabs(k[i])), omega[i]);
    s += k[i] > 0 ? f : -f;
  }
  return dist_to_integer(s);
}

// Calls fn(k) for every nonzero k with |k|_inf <= k_max, one representative
// of each pair {k, -k} (the first nonzero coordinate is positive).
template <class Fn>
void for_each_half_lattice_vector(std::size_t d, std::int64_t k_max, Fn&& fn) {
  std::vector<std::int64_t> k(d, -k_max);
  while (true) {
    const auto nz = std::find_if(k.begin(), k.end(), [](std::int64_t v) { return v != 0; });
    if (nz != k.end() && *nz > 0) fn(k);
    std::size_t i = d;
    while (i > 0 && k[i - 1] == k_max) {
      k[i - 1] = -k_max;
      --i;
    }
    if (i == 0) return;
    ++k[i - 1];
  }
}

}  // namespace detail

// Exhaustive check of ||k.omega|| >= t / |k|_inf^{d+1} for 0 < |k|_inf <= k_max.
// The reported violation is one of smallest |k|_inf.
inline DcCheckResult diophantine_check(const Frequency& omega, double t, std::int64_t k_max) {
  if (!(t > 0.0)) throw InputError("diophantine_check: t must be positive");
  if (k_max < 1) throw InputError("diophantine_check: k_max must be at least 1");
  const std::size_t d = omega.dim();
  DcCheckResult res;
  res.t = t;
  res.k_max = k_max;
  res.t_star = std::numeric_limits<double>::infinity();
  const double exponent = static_cast<double>(d + 1);
  std::int64_t violation_norm = std::numeric_limits<std::int64_t>::max();
  detail::for_each_half_lattice_vector(d, k_max, [&](const std::vector<std::int64_t>& k) {
    std::int64_t norm = 0;
    for (std::int64_t v : k) norm = std::max<std::int64_t>(norm, std::llabs(v));
    const double dist = detail::dist_k_dot_omega(k, omega.omega());
    const double scaled = std::pow(static_cast<double>(norm), exponent) * dist;
    if (scaled < res.t_star) {
      res.t_star = scaled;
      res.k_at_t_star = k;
    }
    if (dist == 0.0) res.resonance = true;
    if ((dist == 0.0 || scaled < t) && norm < violation_norm) {
      violation_norm = norm;
      res.first_violation = k;
    }
  });
  res.passed = !res.first_violation.has_value();
  return res;
}

class FrequencyCertifier {
 public:
  // Attaches a certificate when the check passes; returns the check result.
  static DcCheckResult certify(Frequency& omega, double t, std::int64_t k_max) {
    DcCheckResult res = diophantine_check(omega, t, k_max);
    if (res.passed)
      omega.certificate_ = DcCertificate{t, static_cast<int>(omega.dim() + 1), k_max};
    else
      omega.certificate_.reset();
    return res;
  }
};

inline DcCheckResult certify(Frequency& omega, double t, std::int64_t k_max) {
  return FrequencyCertifier::certify(omega, t, k_max);
}

inline std::int64_t default_k_max(std::size_t d) { return d == 1 ? 10000 : 200; }

}  // namespace qplab
