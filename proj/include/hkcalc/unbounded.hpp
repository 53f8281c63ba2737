#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hkcalc/matrix.hpp"
#include "hkcalc/quadrature.hpp"

namespace hkcalc {

using ComplexFn = std::function<Complex(double)>;
/// k-th atom (lambda_k, w_k) or nullopt past the end; |lambda_k| nondecreasing.
using AtomEnumerator = std::function<std::optional<std::pair<double, double>>(std::size_t)>;

/// Scalar measure mu_{x,x} on the real line with unbounded support.
class UnboundedModel {
public:
  enum class Kind { atomic, density };

  static UnboundedModel atomic(AtomEnumerator atoms, std::string label = "atomic");
  static UnboundedModel atomic_list(std::vector<std::pair<double, double>> atoms, std::string label = "atomic");
  /// CSV rows "lambda,weight"; an optional header line is skipped.
  static UnboundedModel atomic_csv(std::istream& in);
  /// Density rho >= 0 with optional points where rho jumps.
  static UnboundedModel density(RealFn rho, std::vector<double> breaks = {}, std::string label = "density");

  Kind kind() const noexcept { return kind_; }
  const std::string& label() const noexcept { return label_; }
  /// Validated atom k: weight must be nonnegative and |lambda| nondecreasing.
  std::optional<std::pair<double, double>> atom(std::size_t k) const;
  const RealFn& rho() const noexcept { return rho_; }
  const std::vector<double>& breaks() const noexcept { return breaks_; }

private:
  Kind kind_ = Kind::atomic;
  std::string label_;
  AtomEnumerator atoms_;
  RealFn rho_;
  std::vector<double> breaks_;
};

/// I^n = integral of f over sigma(A) intersected with [-n, n].
Complex truncated_integral(const ComplexFn& f, const UnboundedModel& mu, double n);

struct LimitOptions {
  std::size_t n_max = 1'000'000;  ///< atoms enumerated (atomic models)
  double l_max = 1e8;             ///< largest truncation radius (density models)
  double y_norm = 1.0;            ///< ||y|| in the Cauchy bound
};

struct LimitResult {
  Complex value;                     ///< I^N at the certified N
  double n_certified;                ///< truncation radius N
  double tail_bound;                 ///< tail of |f|^2 beyond N times ||y||^2
  std::vector<double> radii;         ///< radii where partial sums were recorded
  std::vector<double> partial_sums;  ///< real parts of I^n at `radii`
};

/// lim I^n with the Cauchy certificate tail(|f|^2) * ||y||^2 < eps^2. Tails of
/// atomic models are summed up to the enumeration horizon H and only trusted
/// for N <= H/8 unless the enumerator is exhausted; density tails are
/// estimated as I^{8N} - I^N. Throws DivergenceSuspected otherwise.
LimitResult limit_integral(const ComplexFn& f, const UnboundedModel& mu, double eps, const LimitOptions& opts = {});

struct DomainVerdict {
  bool member;
  double value;                      ///< integral of |f|^2 up to bound_used
  double bound_used;                 ///< certified radius, or the largest radius tried
  std::vector<double> radii;
  std::vector<double> partial_sums;  ///< nondecreasing truncations of the integral of |f|^2
};

/// x in D(f(A)) iff the integral of |f|^2 d mu_{x,x} is finite; certified when
/// its (horizon-limited) tail drops below eps. Divergence is a verdict.
DomainVerdict domain_member(const ComplexFn& f, const UnboundedModel& mu_xx, double eps = 1e-9,
                            const LimitOptions& opts = {});

/// <Q>_psi: integral of x |psi(x)|^2 over [-L, L].
double position_expectation(const ComplexFn& psi, double l, const std::vector<double>& breaks = {});

/// Integral of g * rho over [-L, L], split at 0, at the breaks and into
/// dyadic shells beyond |x| = 1, each refined to rel_tol.
double density_integral(const RealFn& g, const RealFn& rho, double l, const std::vector<double>& breaks = {},
                        double rel_tol = 1e-8);

}  // namespace hkcalc
