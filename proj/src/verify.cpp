#include "hkcalc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "hkcalc/calculus.hpp"
#include "hkcalc/cauchy.hpp"
#include "hkcalc/generators.hpp"
#include "hkcalc/mapping.hpp"
#include "hkcalc/rng.hpp"
#include "hkcalc/spectral.hpp"
#include "hkcalc/unbounded.hpp"

namespace hkcalc {

namespace {

SymOperator random_operator(Rng& rng, std::size_t n) {
  RealMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.uniform(-1.0, 1.0);
  return SymOperator::make(a);
}

ComplexVector random_vector(Rng& rng, std::size_t n) {
  ComplexVector v(n);
  for (auto& x : v) x = {rng.normal(), rng.normal()};
  return v;
}

const Domain kWide{-10.0, 10.0};

CheckResult check(std::string name, double tol, const std::function<double()>& worst) {
  double w;
  try {
    w = worst();
  } catch (const std::exception&) {
    w = std::numeric_limits<double>::infinity();
  }
  return {std::move(name), w, tol, w <= tol};
}

}  // namespace

std::vector<CheckResult> run_battery(std::uint64_t seed) {
  const Rng root(seed);
  std::vector<CheckResult> out;

  out.push_back(check("oracle_equivalence", 1e-9, [&] {
    Rng rng = root.split("oracle");
    double w = 0.0;
    for (int i = 0; i < 20; ++i) {
      const auto e = pvm_of(random_operator(rng, rng.index(1, 8)));
      const auto f = RegulatedFn::step(gen::random_step(rng, kWide, 10, true));
      w = std::max(w, operator_norm(apply_calculus(f, e) - direct_apply(f, e)));
    }
    return w;
  }));

  double unit_residual = 0.0;
  out.push_back(check("homomorphism", 1e-9, [&] {
    Rng rng = root.split("homomorphism");
    double w = 0.0;
    for (int i = 0; i < 10; ++i) {
      const auto e = pvm_of(random_operator(rng, rng.index(2, 6)));
      const auto f = RegulatedFn::step(gen::random_step(rng, kWide, 8, true));
      const auto g = gen::random_piecewise(rng, kWide);
      const Complex a{rng.normal(), rng.normal()}, b{rng.normal(), rng.normal()};
      const auto r = homomorphism_report(e, f, g, a, b);
      w = std::max({w, r.linearity, r.multiplicativity, r.adjoint});
      unit_residual = std::max(unit_residual, r.unit);
    }
    return w;
  }));
  out.push_back(check("homomorphism_unit", 1e-12, [&] { return unit_residual; }));

  out.push_back(check("lipschitz", 1e-10, [&] {
    Rng rng = root.split("lipschitz");
    double w = 0.0;
    for (int i = 0; i < 20; ++i) {
      const auto e = pvm_of(random_operator(rng, rng.index(1, 6)));
      const auto f = RegulatedFn::step(gen::random_step(rng, kWide, 8, true));
      const auto g = RegulatedFn::step(gen::random_step(rng, kWide, 8, true));
      const auto gap = lipschitz_gap(f, g, e);
      w = std::max(w, gap.lhs - gap.rhs);
    }
    return w;
  }));

  out.push_back(check("partition_independence", 1e-12, [&] {
    Rng rng = root.split("partition");
    double w = 0.0;
    for (int i = 0; i < 5; ++i) {
      const StepFn s = gen::random_step(rng, kWide, 10, true);
      const auto e = pvm_of(random_operator(rng, 5));
      const auto mu = scalar_measure(e, random_vector(rng, 5), random_vector(rng, 5));
      const Complex exact = integrate_step(s, mu).value;
      const auto f = RegulatedFn::step(s);
      const double scale = std::max(1.0, mu.total_variation());
      for (int j = 0; j < 10; ++j) {
        const auto p = step_fine_partition(s, SweepOptions{1'000'000, [&] { return rng.uniform(0.1, 0.9); }});
        w = std::max(w, std::abs(hk_sum(f, mu, p) - exact) / scale);
      }
    }
    return w;
  }));

  out.push_back(check("spectral_mapping", 1e-8, [&] {
    Rng rng = root.split("mapping");
    double w = 0.0;
    for (int i = 0; i < 10; ++i) {
      const auto e = pvm_of(random_operator(rng, rng.index(1, 6)));
      const auto f = RegulatedFn::step(gen::random_step(rng, kWide, 8, false));
      const auto m = direct_apply(f, e);
      RealMatrix re(m.rows(), m.cols());
      for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) re(r, c) = m(r, c).real();
      const auto es = jacobi_eigh(SymOperator::make(re));
      const std::vector<Complex> diag(es.values.begin(), es.values.end());
      w = std::max(w, hausdorff_distance(spectral_map(f, e, SpectrumModel::finite()), SpectrumApprox::from(diag)));
    }
    return w;
  }));

  out.push_back(check("kernel_range", 1e-10, [&] {
    Rng rng = root.split("kernel");
    double w = 0.0;
    for (int i = 0; i < 10; ++i) {
      std::vector<double> values;
      for (std::size_t m = 1; m <= 3; ++m) {
        const double lambda = rng.uniform(-3.0, 3.0);
        for (std::size_t r = 0; r < m; ++r) values.push_back(lambda);
      }
      const auto a = conjugated_diagonal(random_orthogonal(rng, values.size()), values);
      const auto e = pvm_of(a);
      for (const auto& atom : e.atoms()) {
        const auto kr = kernel_range_check(a, atom.lambda, e);
        w = std::max(w, kr.residual);
        if (kr.dim_ran != kr.dim_ker) w = std::numeric_limits<double>::infinity();
      }
    }
    return w;
  }));

  out.push_back(check("thomae_bound", 1e-12, [&] {
    std::vector<double> values;
    for (int q = 2; q <= 9; ++q)
      for (int p = 1; p < q; ++p) values.push_back(static_cast<double>(p) / q);
    values.push_back(1.0 / std::sqrt(2.0));
    const auto e = diagonal_pvm(values);
    double w = 0.0;
    for (std::size_t n = 1; n <= 8; ++n)
      for (std::size_t m = n; m <= 8; ++m) {
        const double gap = operator_norm(apply_calculus(RegulatedFn::thomae(n), e) -
                                         apply_calculus(RegulatedFn::thomae(m), e));
        w = std::max(w, gap - 1.0 / static_cast<double>(n + 1));
      }
    return w;
  }));

  out.push_back(check("multiplication_norm", 1e-12, [&] {
    Rng rng = root.split("multiplication");
    const Domain unit{0.0, 1.0};
    const auto e = grid_model(0.0, 1.0, 128);
    double w = 0.0;
    for (int i = 0; i < 5; ++i) {
      const auto f = i % 2 == 0 ? RegulatedFn::step(gen::random_step(rng, unit, 10, true))
                                : gen::random_piecewise(rng, unit);
      double sup = 0.0;
      for (double x : e.grid_model().nodes) sup = std::max(sup, std::abs(f.eval(x)));
      w = std::max(w, std::abs(operator_norm(apply_calculus(f, e), e.weight()) - sup));
    }
    return w;
  }));

  out.push_back(check("total_variation", 1e-12, [&] {
    Rng rng = root.split("variation");
    double w = 0.0;
    for (int i = 0; i < 20; ++i) {
      const std::size_t n = rng.index(1, 6);
      const auto e = pvm_of(random_operator(rng, n));
      const auto x = random_vector(rng, n), y = random_vector(rng, n);
      w = std::max(w, scalar_measure(e, x, y).total_variation() -
                          vector_norm<Complex>(x) * vector_norm<Complex>(y));
    }
    return w;
  }));

  out.push_back(check("step_approximation", 0.0, [&] {
    Rng rng = root.split("steps");
    const Domain unit{0.0, 1.0};
    std::vector<RegulatedFn> battery{
        RegulatedFn::heaviside(0.5, unit),
        RegulatedFn::continuous(unit, [](double x) { return Complex{std::sin(6.0 * x), 0.0}; }),
        RegulatedFn::thomae(5), gen::random_piecewise(rng, unit)};
    double w = 0.0;
    for (const auto& f : battery)
      for (double eps : {0.1, 0.01}) {
        const auto s = RegulatedFn::step(approximate_by_steps(f, eps));
        w = std::max(w, sup_norm_gap(f, s, 4000) - eps);
      }
    return w;
  }));

  out.push_back(check("unbounded_truncation", 1e-9, [] {
    const auto mu = UnboundedModel::atomic([](std::size_t k) -> std::optional<std::pair<double, double>> {
      if (k >= 2000) return std::nullopt;
      return std::pair{static_cast<double>(k + 1), std::ldexp(1.0, -static_cast<int>(k + 1))};
    });
    const auto v = domain_member([](double x) { return Complex{x, 0.0}; }, mu, 1e-9);
    return v.member ? std::abs(v.value - 6.0) : std::numeric_limits<double>::infinity();
  }));

  out.push_back(check("cauchy_equilibrium", 1e-10, [] {
    const auto s = make_semigroup(RegulatedFn::constant(Domain{0.0, 1.0}, -1.0), 1);
    const Datum d{{1.0}, [](double) { return RealVector{1.0}; }, 5.0};
    double w = 0.0;
    for (double t : {0.1, 1.0, 5.0}) w = std::max(w, std::abs(mild_solution(s, d, t, 200)[0] - 1.0));
    return w;
  }));

  out.push_back(check("convergence_inequality", 1e-8, [] {
    const Domain unit{0.0, 1.0};
    const auto g = RegulatedFn::continuous(unit, [](double x) { return Complex{std::sin(2.0 * M_PI * x), 0.0}; });
    const auto s = make_semigroup(g, 32, {1.0 / std::sqrt(2.0)});
    const std::size_t n = s.nodes().size();
    RealVector x0(n);
    for (std::size_t j = 0; j < n; ++j) x0[j] = 1.0 + s.nodes()[j];
    const Datum d{x0, [n](double t) { return RealVector(n, std::cos(t)); }, 2.0};
    double w = 0.0, prev = std::numeric_limits<double>::infinity();
    for (const auto& lv : convergence_report(s, d, {2, 4, 8}, {0.5, 1.0, 2.0}, 100).levels) {
      w = std::max(w, lv.measured - lv.bound);
      if (lv.measured > prev) w = std::numeric_limits<double>::infinity();
      prev = lv.measured;
    }
    return std::max(w, 0.0);
  }));

  return out;
}

}  // namespace hkcalc
