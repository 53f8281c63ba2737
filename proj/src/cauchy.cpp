#include "hkcalc/cauchy.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "hkcalc/calculus.hpp"
#include "hkcalc/errors.hpp"

namespace hkcalc {

namespace {

constexpr double kInequalitySlack = 1e-8;
constexpr std::size_t kGapSamples = 1000;

double weighted_norm(const RealVector& v, double w) { return vector_norm<double>(v, w); }

void check_dim(const SemigroupModel& s, const RealVector& v) {
  if (v.size() != s.nodes().size()) throw ArgumentError("grid vector has the wrong dimension");
}

}  // namespace

SemigroupModel make_semigroup(const RegulatedFn& g_base, std::size_t n, std::vector<double> perturbation) {
  const Domain k = g_base.domain();
  SpectralMeasure grid = SpectralMeasure::grid(k.lo, k.hi, n);
  std::sort(perturbation.begin(), perturbation.end());
  std::vector<Atom> atoms;
  for (double d : perturbation) {
    if (!k.contains(d)) throw DomainError("perturbation point outside [a, b]");
    for (double x : grid.grid_model().nodes)
      if (x == d) throw ArgumentError("perturbation point coincides with a grid node");
    atoms.push_back({d, Complex{d, 0.0}});
  }
  RegulatedFn g = atoms.empty() ? g_base : RegulatedFn::perturbed(g_base, atoms);
  double omega = -std::numeric_limits<double>::infinity();
  for (double x : grid.grid_model().nodes) {
    const Complex v = g.eval(x);
    if (v.imag() != 0.0) throw ArgumentError("semigroup generator must be real-valued");
    omega = std::max(omega, v.real());
  }
  return SemigroupModel{std::move(g), g_base, std::move(grid), omega, std::move(perturbation)};
}

RealVector SemigroupModel::rates() const {
  RealVector r;
  for (double x : nodes()) r.push_back(g.eval(x).real());
  return r;
}

RealVector semigroup_apply(const SemigroupModel& s, double t, const RealVector& psi) {
  if (!(t >= 0.0)) throw ArgumentError("semigroup_apply: t must be nonnegative");
  check_dim(s, psi);
  RealVector out(psi.size());
  const auto& nodes = s.nodes();
  for (std::size_t j = 0; j < psi.size(); ++j) out[j] = std::exp(t * s.g.eval(nodes[j]).real()) * psi[j];
  return out;
}

RealVector StepSemigroup::apply(double t, const RealVector& psi) const {
  if (!(t >= 0.0)) throw ArgumentError("step semigroup: t must be nonnegative");
  if (psi.size() != node_cell.size()) throw ArgumentError("grid vector has the wrong dimension");
  RealVector out(psi.size());
  for (std::size_t j = 0; j < psi.size(); ++j) out[j] = std::exp(t * tag_values[node_cell[j]]) * psi[j];
  return out;
}

RealVector StepSemigroup::rates() const {
  RealVector r(node_cell.size());
  for (std::size_t j = 0; j < r.size(); ++j) r[j] = tag_values[node_cell[j]];
  return r;
}

StepFn StepSemigroup::step(double t) const {
  std::vector<Cell> cells;
  std::vector<Complex> values;
  for (std::size_t k = 0; k < partition.size(); ++k) {
    cells.push_back(partition.items[k].cell);
    values.emplace_back(std::exp(t * tag_values[k]), 0.0);
  }
  return StepFn::make(std::move(cells), std::move(values));
}

StepSemigroup step_semigroup(const SemigroupModel& s, std::size_t n, double eps1) {
  if (n == 0) throw ArgumentError("step_semigroup: level must be >= 1");
  if (!(eps1 > 0.0)) throw ArgumentError("step_semigroup: eps1 must be positive");
  const double eps = std::ldexp(eps1, -static_cast<int>(n - 1));
  const StepFn approx = approximate_by_steps(s.g, eps);
  StepSemigroup out{n, eps, {}, {}, {}};
  for (const auto& c : approx.cells()) {
    const double tag = c.is_singleton() ? c.lo : 0.5 * (c.lo + c.hi);
    out.partition.items.push_back({tag, c});
    out.tag_values.push_back(s.g.eval(tag).real());
  }
  for (double x : s.nodes()) out.node_cell.push_back(approx.locate(x));
  return out;
}

double step_semigroup_gap(const SemigroupModel& s, const StepSemigroup& tn, double t) {
  const auto& nodes = s.nodes();
  RealMatrix diff(nodes.size(), nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j)
    diff(j, j) = std::exp(t * tn.tag_values[tn.node_cell[j]]) - std::exp(t * s.g.eval(nodes[j]).real());
  return operator_norm(diff, s.weight());
}

namespace {

// Weights int_0^2 L_k(sigma) exp(-z sigma) d sigma for the quadratic Lagrange
// basis on sigma = 0, 1, 2.
std::array<double, 3> panel_weights(double z) {
  double m0, m1, m2;
  if (std::abs(z) < 1.0) {
    m0 = m1 = m2 = 0.0;
    double term = 1.0;  // (-z)^n / n!
    double pow2 = 2.0;  // 2^(n+1)
    for (int n = 0; n < 40; ++n) {
      m0 += term * pow2 / (n + 1);
      m1 += term * pow2 * 2.0 / (n + 2);
      m2 += term * pow2 * 4.0 / (n + 3);
      term *= -z / (n + 1);
      pow2 *= 2.0;
    }
  } else {
    const double e = std::exp(-2.0 * z);
    m0 = (1.0 - e) / z;
    m1 = (1.0 - e * (1.0 + 2.0 * z)) / (z * z);
    m2 = (2.0 - e * (4.0 * z * z + 4.0 * z + 2.0)) / (z * z * z);
  }
  return {0.5 * (m2 - 3.0 * m1 + 2.0 * m0), 2.0 * m1 - m2, 0.5 * (m2 - m1)};
}

}  // namespace

RealVector mild_solution(const RealVector& rates, const Datum& d, double t, std::size_t quad_steps) {
  if (!(t >= 0.0) || t > d.horizon) throw ArgumentError("mild_solution: t outside [0, T]");
  if (quad_steps < 2 || quad_steps % 2 != 0) throw ArgumentError("mild_solution: quad_steps must be even and >= 2");
  const std::size_t n = rates.size();
  if (d.x0.size() != n) throw ArgumentError("initial value has the wrong dimension");
  RealVector u(n);
  for (std::size_t j = 0; j < n; ++j) u[j] = std::exp(t * rates[j]) * d.x0[j];
  if (t == 0.0) return u;
  const double h = t / static_cast<double>(quad_steps);
  std::vector<RealVector> f(quad_steps + 1);
  for (std::size_t i = 0; i <= quad_steps; ++i) {
    f[i] = d.forcing(h * static_cast<double>(i));
    if (f[i].size() != n) throw ArgumentError("forcing has the wrong dimension");
  }
  for (std::size_t j = 0; j < n; ++j) {
    const auto w = panel_weights(rates[j] * h);
    double acc = 0.0;
    for (std::size_t p = 0; p + 2 <= quad_steps; p += 2) {
      const double s0 = h * static_cast<double>(p);
      const double decay = std::exp((t - s0) * rates[j]);
      acc += decay * (w[0] * f[p][j] + w[1] * f[p + 1][j] + w[2] * f[p + 2][j]);
    }
    u[j] += h * acc;
  }
  return u;
}

RealVector mild_solution(const SemigroupModel& s, const Datum& d, double t, std::size_t quad_steps) {
  return mild_solution(s.rates(), d, t, quad_steps);
}

double forcing_l1(const SemigroupModel& s, const Datum& d, std::size_t quad_steps) {
  if (quad_steps < 2 || quad_steps % 2 != 0) throw ArgumentError("forcing_l1: quad_steps must be even and >= 2");
  if (d.horizon == 0.0) return 0.0;
  const double h = d.horizon / static_cast<double>(quad_steps);
  double acc = 0.0;
  for (std::size_t i = 0; i <= quad_steps; ++i) {
    const double w = (i == 0 || i == quad_steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * weighted_norm(d.forcing(h * static_cast<double>(i)), s.weight());
  }
  return acc * h / 3.0;
}

ConvergenceReport convergence_report(const SemigroupModel& s, const Datum& d, const std::vector<std::size_t>& levels,
                                     const std::vector<double>& sample_times, std::size_t quad_steps, double eps1) {
  if (levels.empty()) throw ArgumentError("convergence_report: no levels");
  check_dim(s, d.x0);
  ConvergenceReport rep{weighted_norm(d.x0, s.weight()), forcing_l1(s, d, quad_steps), {}};
  // Times at which T_n - T is probed: a uniform grid of [0, T] plus every
  // t - s_i the Simpson rule touches.
  std::vector<double> probe;
  for (std::size_t i = 0; i <= kGapSamples; ++i)
    probe.push_back(d.horizon * static_cast<double>(i) / static_cast<double>(kGapSamples));
  for (double t : sample_times) {
    const double h = t / static_cast<double>(quad_steps);
    for (std::size_t i = 0; i <= quad_steps; ++i) probe.push_back(t - h * static_cast<double>(i));
  }
  std::sort(probe.begin(), probe.end());
  probe.erase(std::unique(probe.begin(), probe.end()), probe.end());

  std::vector<RealVector> exact;
  for (double t : sample_times) exact.push_back(mild_solution(s, d, t, quad_steps));
  for (std::size_t n : levels) {
    const StepSemigroup tn = step_semigroup(s, n, eps1);
    const RealVector rates = tn.rates();
    double measured = 0.0;
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
      RealVector w = mild_solution(rates, d, sample_times[i], quad_steps);
      for (std::size_t j = 0; j < w.size(); ++j) w[j] -= exact[i][j];
      measured = std::max(measured, weighted_norm(w, s.weight()));
    }
    double gap = 0.0;
    for (double t : probe) gap = std::max(gap, step_semigroup_gap(s, tn, std::max(t, 0.0)));
    const double bound = gap * (rep.x0_norm + rep.forcing_l1);
    rep.levels.push_back({n, tn.partition.size(), measured, gap, bound, measured <= bound + kInequalitySlack});
  }
  return rep;
}

}  // namespace hkcalc
