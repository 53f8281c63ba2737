#include <cmath>

#include "doctest.h"
#include "hkcalc/calculus.hpp"
#include "hkcalc/errors.hpp"
#include "hkcalc/mapping.hpp"
#include "support.hpp"

using namespace hkcalc;
using hkcalc::testing::normal_eigenvalues;
using hkcalc::testing::random_step;
using hkcalc::testing::random_symmetric;

namespace {

const Domain kWide{-10.0, 10.0};

SpectrumApprox set_of(std::vector<Complex> pts) { return SpectrumApprox::from(std::move(pts)); }

}  // namespace

TEST_CASE("point spectrum") {
  const auto p = point_spectrum(diagonal_pvm({1.0, 2.0, 2.0}));
  CHECK(p.points == std::vector<Complex>{1.0, 2.0});
  CHECK(point_spectrum(grid_model(0.0, 1.0, 64)).points.empty());
}

TEST_CASE("kernel and range") {
  const auto a = SymOperator::make(RealMatrix::diagonal(std::vector<double>{1.0, 1.0, 2.0}));
  const auto e = pvm_of(a);
  const auto r = kernel_range_check(a, 1.0, e);
  CHECK(r.dim_ran == 2);
  CHECK(r.dim_ker == 2);
  CHECK(r.residual <= 1e-12);
  const auto b = SymOperator::make(RealMatrix::diagonal(std::vector<double>{1.0, 2.0}));
  const auto none = kernel_range_check(b, 3.0, pvm_of(b));
  CHECK(none.dim_ran == 0);
  CHECK(none.dim_ker == 0);
  CHECK(none.residual == 0.0);

  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> vals;
    std::vector<std::size_t> mult;
    const std::size_t distinct = rng.index(1, 4);
    for (std::size_t d = 0; d < distinct; ++d) {
      const double l = static_cast<double>(d) + rng.uniform(-0.3, 0.3);
      const std::size_t m = rng.index(1, 3);
      for (std::size_t i = 0; i < m; ++i) vals.push_back(l);
      mult.push_back(m);
    }
    const auto op = conjugated_diagonal(random_orthogonal(rng, vals.size()), vals);
    const auto em = pvm_of(op);
    REQUIRE(em.atoms().size() == distinct);
    for (std::size_t d = 0; d < distinct; ++d) {
      const auto kr = kernel_range_check(op, em.atoms()[d].lambda, em);
      CHECK(kr.dim_ran == mult[d]);
      CHECK(kr.dim_ker == mult[d]);
      CHECK(kr.residual <= 1e-10);
    }
  }
}

TEST_CASE("spectral map examples") {
  const auto e = diagonal_pvm({0.5, 1.0 / std::sqrt(2.0)});
  const auto t = spectral_map(RegulatedFn::thomae(kUnboundedLevel), e, SpectrumModel::finite());
  CHECK(hausdorff_distance(t, set_of({0.0, 0.5})) <= 1e-12);

  const Domain k{0.0, 1.0};
  const auto spike = RegulatedFn::indicator(Cell::singleton(0.3), k);
  const auto sm = spectral_map(spike, grid_model(0.0, 1.0, 64), SpectrumModel::continuum(k));
  CHECK(sm.points == std::vector<Complex>{0.0});
  CHECK(pointwise_image(spike, k).points == std::vector<Complex>{0.0, 1.0});
  const auto finite = spectral_map(spike, diagonal_pvm({0.2, 0.6}), SpectrumModel::finite());
  CHECK(finite.points == std::vector<Complex>{0.0});

  const auto h = spectral_map(RegulatedFn::heaviside(0.5, k), grid_model(0.0, 1.0, 64), SpectrumModel::continuum(k));
  CHECK(h.points == std::vector<Complex>{0.0, 1.0});
  CHECK(h.resolution > 0.0);

  // Thomae over a continuum: every one-sided limit is 0.
  const auto tc = spectral_map(RegulatedFn::thomae(kUnboundedLevel), grid_model(0.01, 0.99, 16),
                               SpectrumModel::continuum(Domain{0.01, 0.99}));
  CHECK(tc.points == std::vector<Complex>{0.0});
  CHECK_THROWS_AS(spectral_map(spike, grid_model(0.0, 1.0, 4), SpectrumModel::finite()), ArgumentError);
}

TEST_CASE("finite model agrees with the spectrum of f(A)") {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = rng.index(1, 8);
    const auto e = pvm_of(SymOperator::make(random_symmetric(rng, n)));
    const auto f = RegulatedFn::step(random_step(rng, kWide, 10, trial % 2 == 0));
    const auto mapped = spectral_map(f, e, SpectrumModel::finite());
    CHECK(hausdorff_distance(mapped, normal_eigenvalues(direct_apply(f, e))) <= 1e-8);
    CHECK(hausdorff_distance(mapped, normal_eigenvalues(apply_calculus(f, e))) <= 1e-8);
    CHECK(hausdorff_distance(mapped, essential_range(f, e)) == 0.0);
  }
}

TEST_CASE("essential range") {
  CHECK(essential_range(RegulatedFn::identity(kWide), diagonal_pvm({1.0, 2.0})).points ==
        std::vector<Complex>{1.0, 2.0});
  const Domain k{0.0, 1.0};
  for (std::size_t n : {2u, 7u, 64u})
    CHECK(essential_range(RegulatedFn::heaviside(0.5, k), grid_model(0.0, 1.0, n)).points ==
          std::vector<Complex>{0.0, 1.0});
  CHECK(essential_range(RegulatedFn::constant(k, 7.0), grid_model(0.0, 1.0, 9)).points == std::vector<Complex>{7.0});
}

TEST_CASE("grid essential range approaches the continuum spectrum") {
  // Pieces with known Lipschitz constants: slopes 2, -3 and 1.
  const Domain k{0.0, 1.0};
  PiecewiseSpec spec;
  spec.k = k;
  spec.pieces = {[](double x) { return Complex{2.0 * x, 0.0}; }, [](double x) { return Complex{4.0 - 3.0 * x, 0.0}; },
                 [](double x) { return Complex{x - 1.0, 0.0}; }};
  spec.breaks = {{0.3, std::nullopt, std::nullopt, 5.0}, {0.65, std::nullopt, std::nullopt, -2.0}};
  const auto f = RegulatedFn::piecewise(spec);
  const auto cont = spectral_map(f, grid_model(0.0, 1.0, 8), SpectrumModel::continuum(k));
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t n = 16; n <= 1024; n *= 2) {
    const auto g = grid_model(0.0, 1.0, n);
    const double d = hausdorff_distance(essential_range(f, g), cont);
    CAPTURE(n);
    // A piece end can be a full node spacing from the nearest node in that piece.
    CHECK(d <= 3.0 * (g.weight() + 1e-3) + 1e-12);
    CHECK(d <= prev + 3.0 * 1e-3);
    prev = d;
  }
}

TEST_CASE("hausdorff distance") {
  const auto s = set_of({0.0, {1.0, 2.0}});
  CHECK(hausdorff_distance(s, s) == 0.0);
  CHECK(hausdorff_distance(set_of({0.0}), set_of({0.0, 1.0})) == 1.0);
  CHECK(hausdorff_distance(set_of({0.0, 0.5}), set_of({0.01, 0.5})) == doctest::Approx(0.01));
  CHECK_THROWS_AS(hausdorff_distance(set_of({}), s), ArgumentError);
  CHECK(set_of({1.0, 1.0 + 1e-12, 2.0}).points.size() == 2);
}
