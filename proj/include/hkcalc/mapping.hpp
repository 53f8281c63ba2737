#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hkcalc/regulated.hpp"
#include "hkcalc/spectral.hpp"

namespace hkcalc {

/// Finite stand-in for a compact subset of C.
struct SpectrumApprox {
  std::vector<Complex> points;  ///< sorted by (re, im), deduplicated within 1e-10
  double resolution = 0.0;      ///< sample spacing used for closures; 0 when exact
  std::string closure_note;

  static SpectrumApprox from(std::vector<Complex> pts, double resolution = 0.0, std::string note = "exact");
  bool contains(Complex z, double tol = 1e-10) const;
};

SpectrumApprox point_spectrum(const SpectralMeasure& e, double tol = 0.0);

struct KernelRangeCheck {
  std::size_t dim_ran;
  std::size_t dim_ker;
  double residual;
};

/// Compares rank E({lambda}) with the multiplicity of lambda as an eigenvalue
/// of A. Returns {0, 0, 0} if lambda is not an atom of E.
KernelRangeCheck kernel_range_check(const SymOperator& a, double lambda, const SpectralMeasure& e);

struct SpectrumModel {
  enum class Kind { finite, continuum };
  Kind kind = Kind::finite;
  Domain k{};
  std::size_t samples = 1000;

  static SpectrumModel finite() { return {}; }
  static SpectrumModel continuum(Domain k, std::size_t samples = 1000) { return {Kind::continuum, k, samples}; }
};

/// Spectrum of f(A) from the regulated mapping theorem: f on the point
/// spectrum, plus one-sided limits f(c-), f(c+) over the rest of the spectrum
/// (continuum model: a uniform sample of K and every breakpoint of f).
SpectrumApprox spectral_map(const RegulatedFn& f, const SpectralMeasure& e, const SpectrumModel& model);

/// The naive image f(K): values on a uniform sample of K and at f's breakpoints.
SpectrumApprox pointwise_image(const RegulatedFn& f, Domain k, std::size_t samples = 1000);

/// Values z of f on the support of E with E(f^-1(B(z, eps))) != 0 for all eps.
SpectrumApprox essential_range(const RegulatedFn& f, const SpectralMeasure& e,
                               const std::vector<double>& eps_grid = {1e-1, 1e-3, 1e-6, 1e-9});

double hausdorff_distance(const SpectrumApprox& s1, const SpectrumApprox& s2);

}  // namespace hkcalc
