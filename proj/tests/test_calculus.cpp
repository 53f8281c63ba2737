#include <cmath>

#include "doctest.h"
#include "hkcalc/calculus.hpp"
#include "hkcalc/errors.hpp"
#include "support.hpp"

using namespace hkcalc;
using hkcalc::testing::random_step;

namespace {

const Domain kWide{-10.0, 10.0};

RealMatrix random_symmetric(Rng& rng, std::size_t n) {
  RealMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.uniform(-1.0, 1.0);
  return a;
}

ScalarMeasure atoms(std::initializer_list<std::pair<double, Complex>> a) { return ScalarMeasure{{a}}; }

// Largest |eigenvalue| of a real symmetric matrix, from the eigensolver.
double spectral_radius(const RealMatrix& a) {
  const auto es = jacobi_eigh(SymOperator::make(a));
  return std::max(std::abs(es.values.front()), std::abs(es.values.back()));
}

double max_diff(const ComplexMatrix& a, const ComplexMatrix& b) { return (a - b).max_abs(); }

}  // namespace

TEST_CASE("hk_sum examples") {
  const Domain k{0.0, 1.0};
  const auto mu = atoms({{0.25, 1.0}, {0.75, 1.0}});
  const auto h = RegulatedFn::heaviside(0.5, k);
  const auto p = step_fine_partition(*h.as_step());
  CHECK(hk_sum(h, mu, p) == Complex{1.0, 0.0});

  const auto one = RegulatedFn::constant(k, 1.0);
  const auto mass = atoms({{0.1, {0.5, 0.25}}, {0.9, 0.75}, {1.0, -0.125}});
  CHECK(std::abs(hk_sum(one, mass, build_fine_partition(k.as_cell(), Gauge::constant(0.07))) - mass.total()) < 1e-15);

  TaggedPartition single{{{0.3, Cell::singleton(0.3)}}};
  const auto sq = RegulatedFn::continuous(k, [](double x) { return Complex{x * x, 0.0}; });
  CHECK(hk_sum(sq, atoms({{0.3, 2.0}}), single).real() == doctest::Approx(0.18));

  CHECK_THROWS_AS(hk_sum(one, atoms({{0.5, 1.0}}), single), ArgumentError);
  TaggedPartition outside{{{2.0, Cell::closed(1.5, 2.5)}}};
  CHECK_THROWS_AS(hk_sum(one, atoms({}), outside), DomainError);
}

TEST_CASE("integrate_step examples") {
  const Domain k{0.0, 1.0};
  const auto s1 = StepFn::make({Cell::half_open(0.0, 1.0), Cell::singleton(1.0)}, {1.0, 0.0});
  CHECK(integrate_step(s1, atoms({{0.4, 1.0}})).value == Complex{1.0, 0.0});
  const auto s2 = StepFn::make({Cell::half_open(0.0, 0.5), Cell::closed(0.5, 1.0)}, {2.0, 3.0});
  const auto r = integrate_step(s2, atoms({{0.25, 0.5}, {0.75, 0.5}}));
  CHECK(r.value == Complex{2.5, 0.0});
  CHECK(r.tail_estimate == 0.0);
  CHECK(r.partition_size == 2);
  CHECK(integrate_step(s2, atoms({})).value == Complex{});
  CHECK(integrate_step(s2, atoms({{0.25, 0.0}, {0.5, 0.0}})).value == Complex{});
  CHECK_THROWS_AS(integrate_step(s2, atoms({{1.5, 1.0}})), DomainError);
}

TEST_CASE("partition independence of step integrals") {
  Rng rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    const Domain k{-3.0, 3.0};
    const StepFn s = random_step(rng, k, 10, true);
    const auto e = pvm_of(SymOperator::make(random_symmetric(rng, 6)));
    ComplexVector x(6), y(6);
    for (auto& v : x) v = {rng.normal(), rng.normal()};
    for (auto& v : y) v = {rng.normal(), 0.0};
    auto mu = scalar_measure(e, x, y);
    // Plant atoms on step boundaries so open/closed ends matter.
    for (double b : s.boundaries()) mu.atoms.emplace_back(b, Complex{rng.normal(), rng.normal()});
    const Complex exact = integrate_step(s, mu).value;
    const auto f = RegulatedFn::step(s);
    std::vector<double> pts;
    for (const auto& a : mu.atoms) pts.push_back(a.first);
    for (int rep = 0; rep < 20; ++rep) {
      SweepOptions opts;
      opts.reach = [r = rng.split("reach")]() mutable { return r.uniform(0.05, 0.9); };
      const auto p = step_fine_partition(s, opts);
      REQUIRE(is_fine(p, canonical_step_gauge(s)));
      CHECK(std::abs(hk_sum(f, mu, p) - exact) <= 1e-12 * (1.0 + std::abs(exact)));
    }
  }
}

TEST_CASE("integrate_regulated") {
  const auto e = diagonal_pvm({1.0, 2.0, 3.0});
  const auto id = RegulatedFn::identity(Domain{0.0, 4.0});
  const auto r = integrate_regulated(id, scalar_measure(e, {1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}));
  CHECK(std::abs(r.value - 1.0) < 1e-15);
  CHECK(r.tail_estimate <= 1e-10);

  // Thomae against irrational atoms.
  const auto t = RegulatedFn::thomae(kUnboundedLevel);
  const auto irr = atoms({{1.0 / std::sqrt(2.0), 0.6}, {M_PI / 4.0, 0.4}});
  CHECK(integrate_regulated(t, irr).value == Complex{});
  const auto rat = atoms({{0.5, 0.6}, {1.0 / 3.0, 0.4}});
  CHECK(std::abs(integrate_regulated(t, rat).value - (0.3 + 0.4 / 3.0)) < 1e-15);

  // Any fine partition of the approximating step function lands within 2 eps.
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Domain k{0.0, 1.0};
    const auto f = hkcalc::testing::random_piecewise(rng, k);
    ScalarMeasure mu;
    for (int i = 0; i < 6; ++i) mu.atoms.emplace_back(rng.uniform(0.0, 1.0), Complex{rng.normal(), rng.normal()});
    const double eps = 1e-3;
    const auto res = integrate_regulated(f, mu, eps);
    const StepFn s = approximate_by_steps(f, eps / (2.0 * mu.total_variation()));
    const auto p = step_fine_partition(s);
    CHECK(std::abs(res.value - hk_sum(f, mu, p)) <= 2.0 * eps);
    Complex oracle{};
    for (const auto& [x, w] : mu.atoms) oracle += f.eval(x) * w;
    CHECK(std::abs(res.value - oracle) < 1e-12);
  }
  CHECK_THROWS_AS(integrate_regulated(id, irr, 0.0), ArgumentError);
}

TEST_CASE("apply_calculus examples") {
  const auto e = diagonal_pvm({1.0, 2.0, 3.0});
  const auto sq = RegulatedFn::continuous(Domain{0.0, 4.0}, [](double x) { return Complex{x * x, 0.0}; });
  const auto m = apply_calculus(sq, e);
  CHECK(max_diff(m, to_complex(RealMatrix::diagonal(std::vector<double>{1.0, 4.0, 9.0}))) < 1e-14);

  Rng rng(8);
  const RealMatrix q = random_orthogonal(rng, 4);
  const auto e4 = pvm_of(conjugated_diagonal(q, {0.2, 0.4, 0.6, 0.8}));
  const auto spike = RegulatedFn::indicator(Cell::singleton(0.5), Domain{0.0, 1.0});
  CHECK(apply_calculus(spike, e4).max_abs() == 0.0);

  const auto et = diagonal_pvm({0.5, 1.0 / std::sqrt(2.0)});
  const auto tm = apply_calculus(RegulatedFn::thomae(kUnboundedLevel), et);
  CHECK(max_diff(tm, to_complex(RealMatrix::diagonal(std::vector<double>{0.5, 0.0}))) < 1e-15);
  for (std::size_t level = 1; level <= 8; ++level) {
    const auto tl = apply_calculus(RegulatedFn::thomae(level), et);
    CHECK(tl(0, 0) == Complex{level >= 2 ? 0.5 : 0.0, 0.0});
    CHECK(tl(1, 1) == Complex{});
  }

  const auto g = grid_model(0.0, 1.0, 8);
  const auto mg = apply_calculus(RegulatedFn::heaviside(0.5, Domain{0.0, 1.0}), g);
  CHECK(mg == to_complex(RealMatrix::diagonal(std::vector<double>{0, 0, 0, 0, 1, 1, 1, 1})));

  CHECK_THROWS_AS(apply_calculus(spike, diagonal_pvm({2.0})), DomainError);
}

TEST_CASE("direct_apply oracle") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = rng.index(1, 8);
    const RealMatrix a = random_symmetric(rng, n);
    const auto e = pvm_of(SymOperator::make(a));
    CHECK(max_diff(direct_apply(RegulatedFn::identity(kWide), e), to_complex(a)) < 1e-12);
    CHECK(max_diff(direct_apply(RegulatedFn::constant(kWide, 1.0), e), to_complex(RealMatrix::identity(n))) < 1e-12);
    const auto f = RegulatedFn::step(random_step(rng, kWide, 10, trial % 2 == 0));
    CHECK(operator_norm(apply_calculus(f, e) - direct_apply(f, e)) <= 1e-10);
  }
}

TEST_CASE("operator_norm") {
  CHECK(operator_norm(RealMatrix::identity(5)) == 1.0);
  CHECK(operator_norm(RealMatrix::diagonal(std::vector<double>{0.2, -0.7})) == 0.7);
  CHECK(operator_norm(RealMatrix(3, 3)) == 0.0);
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = rng.index(2, 12);
    const RealMatrix a = random_symmetric(rng, n);
    CHECK(operator_norm(a) == doctest::Approx(spectral_radius(a)).epsilon(1e-8));
  }
  // Nearly tied |eigenvalues| of opposite sign.
  Rng r2(5);
  const RealMatrix q = random_orthogonal(r2, 6);
  const auto tied = conjugated_diagonal(q, {-1.0, -0.3, 0.1, 0.5, 0.9, 1.0 - 1e-7});
  CHECK(operator_norm(tied.matrix()) == doctest::Approx(1.0).epsilon(1e-8));
  // Non-normal complex matrix against the eigensolver on M*M.
  ComplexMatrix m(3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) m(i, j) = {rng.normal(), rng.normal()};
  const ComplexMatrix gram = m.adjoint() * m;
  // Real symmetric embedding [[Re, -Im], [Im, Re]] has the same eigenvalues, doubled.
  RealMatrix emb(6, 6);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      emb(i, j) = emb(i + 3, j + 3) = gram(i, j).real();
      emb(i + 3, j) = gram(i, j).imag();
      emb(i, j + 3) = -gram(i, j).imag();
    }
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < i; ++j) emb(i, j) = emb(j, i);
  CHECK(operator_norm(m) == doctest::Approx(std::sqrt(spectral_radius(emb))).epsilon(1e-9));
  CHECK_THROWS_AS(operator_norm(RealMatrix(2, 3)), ArgumentError);
}

TEST_CASE("homomorphism residuals") {
  const auto e = diagonal_pvm({1.0, 2.0});
  const auto id = RegulatedFn::identity(Domain{0.0, 3.0});
  const auto rep = homomorphism_report(e, id, id, 1.0, 1.0);
  CHECK(rep.multiplicativity <= 1e-12);

  Rng rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    const auto e6 = pvm_of(SymOperator::make(random_symmetric(rng, 6)));
    const auto f = RegulatedFn::step(random_step(rng, kWide, 8, true));
    const auto g = RegulatedFn::step(random_step(rng, kWide, 8, false));
    const auto r = homomorphism_report(e6, f, g, {rng.normal(), rng.normal()}, {rng.normal(), 0.0});
    CHECK(r.linearity <= 1e-9);
    CHECK(r.multiplicativity <= 1e-9);
    CHECK(r.adjoint <= 1e-9);
    CHECK(r.unit <= 1e-12);
  }
  const auto e5 = pvm_of(SymOperator::make(random_symmetric(rng, 5)));
  const auto ih = Complex{0.0, 1.0} * RegulatedFn::heaviside(0.5, kWide);
  const ComplexMatrix m = apply_calculus(ih, e5);
  CHECK(operator_norm(apply_calculus(conj(ih), e5) - m.adjoint()) <= 1e-10);
}

TEST_CASE("lipschitz and contraction") {
  const auto e = diagonal_pvm({0.25, 0.75});
  const Domain k{0.0, 1.0};
  const auto h = RegulatedFn::heaviside(0.5, k);
  const auto zero = RegulatedFn::constant(k, 0.0);
  const auto eq = lipschitz_gap(h, zero, e);
  CHECK(eq.lhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eq.rhs == doctest::Approx(1.0).epsilon(1e-12));
  const auto same = lipschitz_gap(h, h, e);
  CHECK(same.lhs == 0.0);
  CHECK(same.rhs == 0.0);

  Rng rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    const auto em = pvm_of(SymOperator::make(random_symmetric(rng, rng.index(1, 7))));
    const auto f = RegulatedFn::step(random_step(rng, kWide, 10, trial % 3 == 0));
    const auto g = RegulatedFn::step(random_step(rng, kWide, 10, false));
    const auto lg = lipschitz_gap(f, g, em);
    CHECK(lg.lhs <= lg.rhs + 1e-10);
    CHECK(operator_norm(apply_calculus(f, em)) <= sup_norm(f) + 1e-10);
  }
}

TEST_CASE("sesquilinear scaling and thomae convergence") {
  Rng rng(66);
  for (int trial = 0; trial < 20; ++trial) {
    const auto e = pvm_of(SymOperator::make(random_symmetric(rng, 5)));
    const auto f = RegulatedFn::step(random_step(rng, kWide, 6, true));
    ComplexVector x(5), y(5);
    for (auto& v : x) v = {rng.normal(), rng.normal()};
    for (auto& v : y) v = {rng.normal(), rng.normal()};
    const Complex a{rng.normal(), rng.normal()}, b{rng.normal(), rng.normal()};
    ComplexVector ax = x, by = y;
    for (auto& v : ax) v *= a;
    for (auto& v : by) v *= b;
    const Complex base = integrate_regulated(f, scalar_measure(e, x, y)).value;
    const Complex scaled = integrate_regulated(f, scalar_measure(e, ax, by)).value;
    CHECK(std::abs(scaled - a * std::conj(b) * base) <= 1e-12 * (1.0 + std::abs(scaled)));
  }

  // Eigenvalues at rationals with small denominators plus irrationals.
  const RealMatrix q = random_orthogonal(rng, 7);
  const auto e = pvm_from_eigensystem(
      EigenSystem{{0.2, 1.0 / 3.0, 0.375, 0.5, 1.0 / std::sqrt(2.0), 0.75, 5.0 / 7.0}, q});
  for (std::size_t n = 1; n <= 8; ++n)
    for (std::size_t m = 1; m <= 8; ++m) {
      const double d = operator_norm(apply_calculus(RegulatedFn::thomae(n), e) - apply_calculus(RegulatedFn::thomae(m), e));
      CHECK(d <= 1.0 / static_cast<double>(std::min(n, m) + 1) + 1e-12);
    }
}
