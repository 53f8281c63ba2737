#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hkcalc/cell.hpp"
#include "hkcalc/matrix.hpp"

namespace hkcalc {

/// Compact interval K = [lo, hi] on which a regulated function lives.
struct Domain {
  double lo = 0.0;
  double hi = 1.0;

  static Domain make(double lo, double hi);
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
  Cell as_cell() const { return Cell::closed(lo, hi); }
  friend bool operator==(const Domain&, const Domain&) = default;
};

struct SideLimits {
  Complex left;
  Complex right;
};

/// Finite linear combination of indicators of disjoint cells covering K.
class StepFn {
public:
  /// Validates ordering, disjointness and exact cover of [cells.front().lo,
  /// cells.back().hi].
  static StepFn make(std::vector<Cell> cells, std::vector<Complex> values);
  static StepFn constant(Domain k, Complex value);

  const std::vector<Cell>& cells() const noexcept { return cells_; }
  const std::vector<Complex>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return cells_.size(); }
  Domain domain() const noexcept { return domain_; }

  /// Index of the cell containing x; throws DomainError outside K.
  std::size_t locate(double x) const;
  Complex eval(double x) const { return values_[locate(x)]; }
  SideLimits side_limits(double x) const;

  /// Cell endpoints strictly inside K plus singleton points, sorted.
  std::vector<double> boundaries() const;

  /// Common refinement with `other`, combining values with `op`.
  StepFn merge(const StepFn& other, const std::function<Complex(Complex, Complex)>& op) const;
  StepFn map(const std::function<Complex(Complex)>& op) const;

  /// Splits cells so each point becomes a singleton carrying the given value.
  StepFn with_singletons(const std::vector<std::pair<double, Complex>>& points) const;

private:
  std::vector<Cell> cells_;
  std::vector<Complex> values_;
  Domain domain_;
};

/// One point where an atomic perturbation overrides its base.
struct Atom {
  double point;
  Complex value;
};

/// Deterministic enumerator of perturbation atoms, ordered by level.
/// Atoms revealed at levels > n deviate from the base by at most envelope(n).
class AtomSource {
public:
  virtual ~AtomSource() = default;
  /// All atoms with level <= `level`, sorted by point.
  virtual std::vector<Atom> atoms(std::size_t level) const = 0;
  virtual std::optional<Complex> atom_at(double x, std::size_t level) const = 0;
  virtual double envelope(std::size_t level) const = 0;
  virtual std::string describe() const = 0;
};

/// Evaluator of one continuous piece.
using PieceEval = std::function<Complex(double)>;

/// Breakpoint data for the piecewise variant. Missing side values are
/// extracted numerically from the adjacent piece.
struct BreakSpec {
  double x;
  std::optional<Complex> left;
  std::optional<Complex> right;
  Complex value;
};

struct PiecewiseSpec {
  Domain k;
  std::vector<PieceEval> pieces;  ///< one per interval between consecutive nodes
  std::vector<BreakSpec> breaks;  ///< sorted, distinct, inside K
  std::string label = "piecewise";
};

struct Discontinuity {
  enum class Kind { jump, removable };
  double point;
  Kind kind;
  Complex left;
  Complex right;
  Complex value;
};

using DiscontinuityReport = std::vector<Discontinuity>;

/// Level used for "untruncated" atomic perturbations (e.g. the full Thomae
/// function). Listing all atoms at this level is not feasible; evaluation is.
inline constexpr std::size_t kUnboundedLevel = std::size_t{1} << 20;

/// A regulated function on a compact interval. Immutable; copies share state.
class RegulatedFn {
public:
  enum class Kind { piecewise, step, atomic, combined };

  class Impl;

  // Construction.
  static RegulatedFn piecewise(PiecewiseSpec spec);
  static RegulatedFn continuous(Domain k, PieceEval fn, std::string label = "continuous");
  static RegulatedFn step(StepFn s);
  static RegulatedFn constant(Domain k, Complex value);
  static RegulatedFn identity(Domain k);
  /// Right-continuous Heaviside step with jump at c.
  static RegulatedFn heaviside(double c, Domain k);
  static RegulatedFn indicator(const Cell& cell, Domain k);
  /// Thomae's function truncated at denominator `level`; K must lie in (0, 1).
  static RegulatedFn thomae(std::size_t level, Domain k = Domain{0.01, 0.99});
  /// Base function overridden at finitely many points.
  static RegulatedFn perturbed(RegulatedFn base, std::vector<Atom> atoms);
  static RegulatedFn atomic(RegulatedFn base, std::shared_ptr<const AtomSource> source,
                            std::size_t level);

  Kind kind() const;
  Domain domain() const;
  std::string describe() const;

  Complex eval(double x) const;
  Complex operator()(double x) const { return eval(x); }
  /// Value with atoms beyond `level` suppressed.
  Complex eval_at_level(double x, std::size_t level) const;
  SideLimits side_limits(double x) const;
  /// Value of the continuous piece adjacent to x on the given side (-1 / +1);
  /// equals the one-sided limit.
  Complex piece(double x, int side) const;

  /// Points where f may fail to be continuous, revealing atoms up to `level`.
  std::vector<double> breakpoints(std::size_t level) const;
  /// Configured truncation level (0 when no atoms are present).
  std::size_t truncation_level() const;
  /// Bound on |f - f_level| where f_level drops atoms beyond `level`.
  double envelope(std::size_t level) const;

  /// Non-null iff this is the step variant.
  const StepFn* as_step() const;

  explicit RegulatedFn(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  const Impl& impl() const noexcept { return *impl_; }

private:
  std::shared_ptr<const Impl> impl_;
};

enum class CombineOp { add, mul, scale, conj };

/// Pointwise algebra on regulated functions sharing the same K.
RegulatedFn combine(CombineOp op, const RegulatedFn& f, const RegulatedFn* g = nullptr,
                    Complex alpha = 1.0);
RegulatedFn operator+(const RegulatedFn& f, const RegulatedFn& g);
RegulatedFn operator-(const RegulatedFn& f, const RegulatedFn& g);
RegulatedFn operator*(const RegulatedFn& f, const RegulatedFn& g);
RegulatedFn operator*(Complex alpha, const RegulatedFn& f);
RegulatedFn conj(const RegulatedFn& f);

SideLimits side_limits(const RegulatedFn& f, double x);
DiscontinuityReport discontinuities(const RegulatedFn& f, std::size_t level);

/// Step function within eps of f in the sup norm. Breakpoints and revealed
/// atoms become singleton cells; continuity intervals are bisected until the
/// sampled oscillation of each piece is small enough.
StepFn approximate_by_steps(const RegulatedFn& f, double eps);

/// Sampled lower estimate of ||f - g||_inf: low-discrepancy sample of K plus
/// breakpoints with both one-sided limits. Exact for step inputs.
double sup_norm_gap(const RegulatedFn& f, const RegulatedFn& g, std::size_t samples = 10000);
/// ||f||_inf estimated the same way.
double sup_norm(const RegulatedFn& f, std::size_t samples = 10000);

/// One-sided limit of `fn` at x by geometric approach x + side * 2^-k * h.
/// Throws EssentialDiscontinuityError if the sequence is not Cauchy.
Complex numeric_side_limit(const PieceEval& fn, double x, int side, double h);

}  // namespace hkcalc
