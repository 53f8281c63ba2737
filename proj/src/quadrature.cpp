#include "hkcalc/quadrature.hpp"

#include <cmath>
#include <string>

#include "hkcalc/errors.hpp"

namespace hkcalc {

namespace {

struct Pair {
  double value;
  double magnitude;
};

Pair simpson_pair(const RealFn& f, double a, double b, std::size_t panels) {
  const double h = (b - a) / static_cast<double>(panels);
  const double fa = f(std::nextafter(a, b)), fb = f(std::nextafter(b, a));
  double s = fa + fb, m = std::abs(fa) + std::abs(fb);
  for (std::size_t i = 1; i < panels; ++i) {
    const double v = f(a + h * static_cast<double>(i));
    const double w = i % 2 == 1 ? 4.0 : 2.0;
    s += w * v;
    m += w * std::abs(v);
  }
  return {s * h / 3.0, m * h / 3.0};
}

}  // namespace

double simpson(const RealFn& f, double a, double b, std::size_t panels) {
  if (panels < 2 || panels % 2 != 0) throw ArgumentError("simpson: panel count must be even and >= 2");
  if (a == b) return 0.0;
  return simpson_pair(f, a, b, panels).value;
}

QuadResult refine_simpson(const RealFn& f, double a, double b, double rel_tol, std::size_t min_panels,
                          std::size_t max_panels) {
  if (!(rel_tol > 0.0)) throw ArgumentError("refine_simpson: tolerance must be positive");
  if (a == b) return {0.0, 0};
  std::size_t n = std::max<std::size_t>(2, min_panels + min_panels % 2);
  Pair prev = simpson_pair(f, a, b, n);
  int agreed = 0;
  while (true) {
    if (2 * n > max_panels)
      throw ConvergenceError("refine_simpson: no agreement on [" + std::to_string(a) + ", " + std::to_string(b) +
                             "] with " + std::to_string(max_panels) + " panels");
    n *= 2;
    const Pair cur = simpson_pair(f, a, b, n);
    if (!std::isfinite(cur.value)) throw ConvergenceError("refine_simpson: non-finite integrand");
    agreed = std::abs(cur.value - prev.value) <= rel_tol * cur.magnitude ? agreed + 1 : 0;
    prev = cur;
    if (agreed >= 2) return {cur.value, n};
  }
}

}  // namespace hkcalc
