#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "hkcalc/gauge.hpp"
#include "hkcalc/matrix.hpp"
#include "hkcalc/regulated.hpp"
#include "hkcalc/spectral.hpp"

namespace hkcalc {

/// Multiplication semigroup T(t) psi = exp(t g) psi on a midpoint grid of [a, b].
struct SemigroupModel {
  RegulatedFn g;
  RegulatedFn g_base;
  SpectralMeasure grid;
  double growth_bound;             ///< omega = max g over the nodes (M = 1)
  std::vector<double> perturbation;

  const std::vector<double>& nodes() const { return grid.grid_model().nodes; }
  RealVector rates() const;
  double weight() const { return grid.weight(); }
};

/// g = g_base overridden by g(d) = d at each point d of `perturbation`. Every
/// perturbation point must miss the grid nodes, so the perturbation carries
/// no spectral mass.
SemigroupModel make_semigroup(const RegulatedFn& g_base, std::size_t n, std::vector<double> perturbation = {});

RealVector semigroup_apply(const SemigroupModel& s, double t, const RealVector& psi);

/// T_n(t) = sum_k exp(t g(eta_k)) E(I_k) over the cells of a step approximation of g.
struct StepSemigroup {
  std::size_t level;
  double eps;                     ///< sup tolerance of the step approximation of g
  TaggedPartition partition;      ///< cells I_k with tags eta_k
  std::vector<double> tag_values; ///< g(eta_k)
  std::vector<std::size_t> node_cell;

  RealVector apply(double t, const RealVector& psi) const;
  /// Exponent per grid node: g(eta_k) for the cell holding the node.
  RealVector rates() const;
  /// s_{t,n} = sum_k exp(t g(eta_k)) 1_{I_k}.
  StepFn step(double t) const;
};

/// Level n uses eps_n = eps1 / 2^(n-1); tags are cell midpoints (singleton
/// cells tag themselves).
StepSemigroup step_semigroup(const SemigroupModel& s, std::size_t n, double eps1 = 0.5);

/// ||T_n(t) - T(t)||_op on the grid.
double step_semigroup_gap(const SemigroupModel& s, const StepSemigroup& tn, double t);

struct Datum {
  RealVector x0;
  std::function<RealVector(double)> forcing;
  double horizon;
};

/// u(t) = P(t) x0 + int_0^t P(t - s) f(s) ds for the diagonal semigroup
/// P(t) = diag(exp(t rates)). The forcing is replaced by its piecewise
/// quadratic interpolant on the Simpson nodes (quad_steps subintervals) and
/// the semigroup factor is integrated exactly against it; with rates = 0 the
/// weights are Simpson's 1/3, 4/3, 1/3.
RealVector mild_solution(const RealVector& rates, const Datum& d, double t, std::size_t quad_steps);
RealVector mild_solution(const SemigroupModel& s, const Datum& d, double t, std::size_t quad_steps);

/// ||f||_{L1(0, T)} by the same Simpson rule.
double forcing_l1(const SemigroupModel& s, const Datum& d, std::size_t quad_steps);

struct LevelReport {
  std::size_t level;
  std::size_t cells;
  double measured;  ///< max over sample times of ||w_n(t) - u(t)||
  double op_gap;    ///< sup over sampled t in [0, T] of ||T_n(t) - T(t)||_op
  double bound;     ///< op_gap * (||x0|| + ||f||_L1)
  bool ok;          ///< measured <= bound + 1e-8
};

struct ConvergenceReport {
  double x0_norm;
  double forcing_l1;
  std::vector<LevelReport> levels;
};

ConvergenceReport convergence_report(const SemigroupModel& s, const Datum& d, const std::vector<std::size_t>& levels,
                                     const std::vector<double>& sample_times, std::size_t quad_steps = 200,
                                     double eps1 = 0.5);

}  // namespace hkcalc
