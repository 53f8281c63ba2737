#pragma once

#include <cstddef>
#include <string>

#include "hkcalc/gauge.hpp"
#include "hkcalc/matrix.hpp"
#include "hkcalc/regulated.hpp"
#include "hkcalc/spectral.hpp"

namespace hkcalc {

struct HKIntegralResult {
  Complex value;
  std::string gauge_used;
  std::size_t partition_size = 0;
  /// Bound on |I(f) - I(s)| for the step function s actually integrated.
  double tail_estimate = 0.0;
  /// Sup-norm tolerance of the step approximation (0 for step inputs).
  double approx_eps = 0.0;
};

/// sum_i f(tag_i) mu(cell_i). Throws ArgumentError if an atom of mu is not
/// covered by the partition and DomainError if a tag lies outside K.
Complex hk_sum(const RegulatedFn& f, const ScalarMeasure& mu, const TaggedPartition& p);

/// Exact sum_i c_i mu(C_i).
HKIntegralResult integrate_step(const StepFn& s, const ScalarMeasure& mu);

/// Step function used to integrate f against measures supported on `atoms`:
/// within `eps` of f in the sup norm and equal to f at every atom.
StepFn integration_steps(const RegulatedFn& f, double eps, const std::vector<double>& atoms);

/// Integral of f against mu via one uniform step approximation. The
/// approximation also pins f's values at the atoms of mu, so the reported
/// tail is the exact discrepancy sum |f - s| d|mu|.
HKIntegralResult integrate_regulated(const RegulatedFn& f, const ScalarMeasure& mu, double eps = 1e-10);

/// f(A) assembled entrywise from <f(A) e_j, e_i> = I_{e_j, e_i}(f). Grid
/// models are diagonal and evaluated at the nodes.
ComplexMatrix apply_calculus(const RegulatedFn& f, const SpectralMeasure& e, double eps = 1e-10);

/// Oracle: sum over atoms of f(lambda) P_lambda (grid: diag f(x_j)).
ComplexMatrix direct_apply(const RegulatedFn& f, const SpectralMeasure& e);

/// Largest singular value. Diagonal inputs are read off exactly; otherwise
/// power iteration on a repeatedly squared M*M. The scalar inner-product
/// weight of grid models does not change the norm and is accepted for symmetry.
double operator_norm(const ComplexMatrix& m, double weight = 1.0);
double operator_norm(const RealMatrix& m, double weight = 1.0);

struct HomomorphismReport {
  double linearity;
  double multiplicativity;
  double adjoint;
  double unit;
};

HomomorphismReport homomorphism_report(const SpectralMeasure& e, const RegulatedFn& f, const RegulatedFn& g,
                                       Complex alpha, Complex beta, double eps = 1e-10);

struct LipschitzGap {
  double lhs;  ///< ||(f - g)(A)||_op
  double rhs;  ///< sampled ||f - g||_inf, including the spectrum of A
};

LipschitzGap lipschitz_gap(const RegulatedFn& f, const RegulatedFn& g, const SpectralMeasure& e,
                           double eps = 1e-10);

}  // namespace hkcalc
