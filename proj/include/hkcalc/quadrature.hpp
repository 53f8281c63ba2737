#pragma once

#include <cstddef>
#include <functional>

namespace hkcalc {

using RealFn = std::function<double(double)>;

/// Composite Simpson rule with an even number of panels. Endpoint values are
/// taken one ulp inside [a, b] so piece boundaries of a piecewise integrand
/// see the limit from inside.
double simpson(const RealFn& f, double a, double b, std::size_t panels);

struct QuadResult {
  double value;
  std::size_t panels;
};

/// Doubles the panel count until two successive refinements agree within
/// rel_tol, relative to the integral of |f|. Throws ConvergenceError past
/// max_panels.
QuadResult refine_simpson(const RealFn& f, double a, double b, double rel_tol = 1e-8, std::size_t min_panels = 16,
                          std::size_t max_panels = std::size_t{1} << 24);

}  // namespace hkcalc
