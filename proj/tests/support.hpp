#pragma once

// Shared generators for the property tests.

#include <cmath>
#include <vector>

#include "hkcalc/generators.hpp"
#include "hkcalc/mapping.hpp"
#include "hkcalc/spectral.hpp"

namespace hkcalc::testing {

using gen::random_piecewise;
using gen::random_step;

/// Dense uniform grid check of |f - g|, independent of the library's sampler.
inline double dense_gap(const RegulatedFn& f, const RegulatedFn& g, std::size_t n = 100000) {
  const Domain k = f.domain();
  double gap = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = k.lo + (k.hi - k.lo) * static_cast<double>(i) / static_cast<double>(n);
    gap = std::max(gap, std::abs(f.eval(x) - g.eval(x)));
  }
  return gap;
}

// Eigenvalues of a normal matrix R + iI with commuting real symmetric R, I:
// diagonalise a generic combination, then read both Rayleigh quotients.
inline SpectrumApprox normal_eigenvalues(const ComplexMatrix& m) {
  const std::size_t n = m.rows();
  RealMatrix re(n, n), im(n, n), mix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      re(i, j) = m(i, j).real();
      im(i, j) = m(i, j).imag();
    }
  const double c = 0.7548776662466927;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      mix(i, j) = 0.5 * (re(i, j) + re(j, i)) + c * 0.5 * (im(i, j) + im(j, i));
      mix(j, i) = mix(i, j);
    }
  const auto es = jacobi_eigh(SymOperator::make(mix));
  std::vector<Complex> out;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = es.vectors(i, k);
    const auto rv = re.apply(v), iv = im.apply(v);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      a += v[i] * rv[i];
      b += v[i] * iv[i];
    }
    out.emplace_back(a, b);
  }
  return SpectrumApprox::from(out);
}

inline RealMatrix random_symmetric(Rng& rng, std::size_t n) {
  RealMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.uniform(-1.0, 1.0);
  return a;
}

}  // namespace hkcalc::testing
