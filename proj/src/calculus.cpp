#include "hkcalc/calculus.hpp"

#include <algorithm>
#include <cmath>

#include "hkcalc/errors.hpp"

namespace hkcalc {

namespace {

// Sup-norm tolerance below which step approximation is never pushed: the
// integrals only see f at the atoms, which the approximation pins exactly.
constexpr double kCoarseStepEps = 0.05;

void check_support(const RegulatedFn& f, const std::vector<double>& points) {
  for (double x : points)
    if (!f.domain().contains(x))
      throw DomainError("spectral point " + std::to_string(x) + " outside the domain of f");
}

std::vector<double> atom_points(const ScalarMeasure& mu) {
  std::vector<double> pts;
  for (const auto& a : mu.atoms) pts.push_back(a.first);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

Complex hk_sum(const RegulatedFn& f, const ScalarMeasure& mu, const TaggedPartition& p) {
  Complex s{};
  for (const auto& it : p.items) {
    if (!f.domain().contains(it.cell.lo) || !f.domain().contains(it.cell.hi))
      throw DomainError("hk_sum: cell " + it.cell.to_string() + " outside K");
    const Complex m = mu.mass(it.cell);
    if (m != Complex{}) s += f.eval(it.tag) * m;
  }
  for (const auto& [x, w] : mu.atoms) {
    if (w == Complex{}) continue;
    bool covered = false;
    for (const auto& it : p.items)
      if (it.cell.contains(x)) {
        covered = true;
        break;
      }
    if (!covered) throw ArgumentError("hk_sum: partition does not cover the support of mu");
  }
  return s;
}

HKIntegralResult integrate_step(const StepFn& s, const ScalarMeasure& mu) {
  Complex v{};
  for (const auto& [x, w] : mu.atoms) v += s.values()[s.locate(x)] * w;
  return HKIntegralResult{v, "canonical-step(" + std::to_string(s.size()) + " cells)", s.size(), 0.0, 0.0};
}

StepFn integration_steps(const RegulatedFn& f, double eps, const std::vector<double>& atoms) {
  if (const StepFn* s = f.as_step()) return *s;
  check_support(f, atoms);
  const StepFn base = approximate_by_steps(f, eps);
  std::vector<std::pair<double, Complex>> pins;
  for (double x : atoms) pins.emplace_back(x, f.eval(x));
  return base.with_singletons(pins);
}

HKIntegralResult integrate_regulated(const RegulatedFn& f, const ScalarMeasure& mu, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("integrate_regulated: eps must be positive");
  if (const StepFn* s = f.as_step()) return integrate_step(*s, mu);
  const double tv = mu.total_variation();
  const double eps_a = tv > 0.0 ? std::max(0.5 * eps / tv, kCoarseStepEps) : kCoarseStepEps;
  const StepFn s = integration_steps(f, eps_a, atom_points(mu));
  HKIntegralResult r = integrate_step(s, mu);
  double tail = 0.0;
  for (const auto& [x, w] : mu.atoms) tail += std::abs(f.eval(x) - s.eval(x)) * std::abs(w);
  r.tail_estimate = tail;
  r.approx_eps = eps_a;
  return r;
}

ComplexMatrix apply_calculus(const RegulatedFn& f, const SpectralMeasure& e, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("apply_calculus: eps must be positive");
  const std::vector<double> support = e.support();
  check_support(f, support);
  const std::size_t n = e.dim();
  ComplexMatrix m(n, n);
  if (e.kind() == SpectralMeasure::Kind::grid) {
    for (std::size_t j = 0; j < n; ++j) m(j, j) = f.eval(support[j]);
    return m;
  }
  // |mu_{e_j, e_i}|(K) <= 1 for orthonormal basis vectors.
  const StepFn s = integration_steps(f, std::max(0.5 * eps, kCoarseStepEps), support);
  ScalarMeasure mu;
  mu.atoms.resize(e.atoms().size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < e.atoms().size(); ++k) mu.atoms[k] = {e.atoms()[k].lambda, e.atoms()[k].p(i, j)};
      m(i, j) = integrate_step(s, mu).value;
    }
  return m;
}

ComplexMatrix direct_apply(const RegulatedFn& f, const SpectralMeasure& e) {
  const std::size_t n = e.dim();
  ComplexMatrix m(n, n);
  if (e.kind() == SpectralMeasure::Kind::grid) {
    const auto& nodes = e.grid_model().nodes;
    for (std::size_t j = 0; j < n; ++j) m(j, j) = f.eval(nodes[j]);
    return m;
  }
  for (const auto& at : e.atoms()) {
    const Complex v = f.eval(at.lambda);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) += v * at.p(i, j);
  }
  return m;
}

double operator_norm(const ComplexMatrix& m, double weight) {
  if (!(weight > 0.0)) throw ArgumentError("operator_norm: weight must be positive");
  if (!m.square()) throw ArgumentError("operator_norm: square matrix expected");
  const std::size_t n = m.rows();
  if (n == 0) return 0.0;
  if (m.is_diagonal()) {
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) best = std::max(best, std::abs(m(i, i)));
    return best;
  }
  const double scale = m.max_abs();
  if (scale == 0.0) return 0.0;
  ComplexMatrix a = m * Complex{1.0 / scale, 0.0};
  const ComplexMatrix gram = a.adjoint() * a;
  // Repeated squaring raises the spectral gap to the 2^8 power per step.
  ComplexMatrix b = gram;
  for (int k = 0; k < 8; ++k) {
    b = b * b;
    const double fb = b.frobenius();
    if (fb == 0.0) break;
    b *= Complex{1.0 / fb, 0.0};
  }
  ComplexVector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = {1.0 + 0.1 * static_cast<double>(i) / static_cast<double>(n), 0.0};
  auto normalize = [](ComplexVector& x) {
    double s = 0.0;
    for (const auto& c : x) s += std::norm(c);
    s = std::sqrt(s);
    if (s == 0.0) return false;
    for (auto& c : x) c /= s;
    return true;
  };
  auto rayleigh = [&](const ComplexVector& x) {
    const ComplexVector gx = gram.apply(x);
    Complex s{};
    for (std::size_t i = 0; i < n; ++i) s += std::conj(x[i]) * gx[i];
    return s.real();
  };
  normalize(v);
  double rho = rayleigh(v);
  for (int it = 0; it < 10000; ++it) {
    ComplexVector w = b.apply(v);
    if (!normalize(w)) {
      // Start vector annihilated: restart from a basis vector.
      w.assign(n, Complex{});
      w[static_cast<std::size_t>(it) % n] = 1.0;
    }
    v = std::move(w);
    const double next = rayleigh(v);
    if (std::abs(next - rho) <= 1e-13 * std::abs(next)) return scale * std::sqrt(std::max(next, 0.0));
    rho = next;
  }
  throw NumericalError("operator_norm: power iteration did not converge");
}

double operator_norm(const RealMatrix& m, double weight) { return operator_norm(to_complex(m), weight); }

HomomorphismReport homomorphism_report(const SpectralMeasure& e, const RegulatedFn& f, const RegulatedFn& g,
                                       Complex alpha, Complex beta, double eps) {
  const ComplexMatrix fa = apply_calculus(f, e, eps);
  const ComplexMatrix ga = apply_calculus(g, e, eps);
  const ComplexMatrix lin = apply_calculus(alpha * f + beta * g, e, eps);
  const ComplexMatrix prod = apply_calculus(f * g, e, eps);
  const ComplexMatrix adj = apply_calculus(conj(f), e, eps);
  const ComplexMatrix one = apply_calculus(RegulatedFn::constant(f.domain(), 1.0), e, eps);
  const double w = e.weight();
  return HomomorphismReport{
      operator_norm(lin - fa * alpha - ga * beta, w),
      operator_norm(prod - fa * ga, w),
      operator_norm(adj - fa.adjoint(), w),
      operator_norm(one - to_complex(RealMatrix::identity(e.dim())), w),
  };
}

LipschitzGap lipschitz_gap(const RegulatedFn& f, const RegulatedFn& g, const SpectralMeasure& e, double eps) {
  const RegulatedFn d = f - g;
  const double lhs = operator_norm(apply_calculus(d, e, eps), e.weight());
  double rhs = sup_norm_gap(f, g);
  for (double x : e.support()) rhs = std::max(rhs, std::abs(d.eval(x)));
  return LipschitzGap{lhs, rhs};
}

}  // namespace hkcalc
