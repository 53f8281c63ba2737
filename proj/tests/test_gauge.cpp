#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "hkcalc/errors.hpp"
#include "hkcalc/gauge.hpp"
#include "hkcalc/rng.hpp"
#include "support.hpp"

using namespace hkcalc;
using hkcalc::testing::random_step;

namespace {

StepFn two_halves() {
  return StepFn::make({Cell::half_open(0.0, 0.5), Cell::closed(0.5, 1.0)}, {1.0, 2.0});
}

Gauge random_piecewise_gauge(Rng& rng, Domain k) {
  const std::size_t n = rng.index(1, 8);
  std::vector<double> cuts;
  for (std::size_t i = 0; i + 1 < n; ++i) cuts.push_back(rng.uniform(k.lo, k.hi));
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> radii;
  for (std::size_t i = 0; i < n; ++i) radii.push_back(std::exp(rng.uniform(std::log(0.002), std::log(0.5))));
  return Gauge{[cuts, radii](double t) {
                 const auto i = static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), t) - cuts.begin());
                 return radii[i];
               },
               {}, "random-piecewise"};
}

std::size_t containing_cells(const StepFn& s, const Cell& c) {
  std::size_t n = 0;
  for (const auto& sc : s.cells())
    if (c.subset_of(sc)) ++n;
  return n;
}

}  // namespace

TEST_CASE("canonical step gauge values") {
  const Gauge g = canonical_step_gauge(two_halves());
  CHECK(g(0.25) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(g(0.1) == doctest::Approx(0.2));
  CHECK(g(0.45) == doctest::Approx(0.125));  // quarter-width floor
  CHECK(g(0.0) == doctest::Approx(0.25));    // closed cell endpoint
  CHECK(g(0.5) == doctest::Approx(0.25));
  CHECK(g(0.9) == doctest::Approx(0.2));     // 1 is part of K, so only 0.5 counts

  std::vector<Cell> cells{Cell::half_open(0.0, 0.5), Cell::singleton(0.5), Cell::make(0.5, 1.0, false, true)};
  const StepFn s = StepFn::make(cells, {0.0, 1.0, 0.0});
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  CHECK(canonical_step_gauge(s, grid)(0.5) == doctest::Approx(0.05));
  CHECK(canonical_step_gauge(s)(0.5) == doctest::Approx(0.25));

  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const StepFn r = random_step(rng, Domain{-1.0, 2.0}, 12);
    const Gauge rg = canonical_step_gauge(r);
    for (int i = 0; i < 50; ++i) CHECK(rg(rng.uniform(-1.0, 2.0)) > 0.0);
    for (double b : r.boundaries()) CHECK(rg(b) > 0.0);
  }
}

TEST_CASE("is_fine examples") {
  TaggedPartition p{{{0.5, Cell::closed(0.0, 1.0)}}};
  CHECK(is_fine(p, Gauge::constant(1.0)));
  CHECK_FALSE(is_fine(p, Gauge::constant(0.4)));
  // Boundary of the open window is admissible only if the cell excludes it.
  TaggedPartition q{{{0.5, Cell::open(0.0, 1.0)}}};
  CHECK(is_fine(q, Gauge::constant(0.5)));
  CHECK_FALSE(is_fine(p, Gauge::constant(0.5)));
  TaggedPartition bad{{{1.5, Cell::closed(0.0, 1.0)}}};
  CHECK_FALSE(is_fine(bad, Gauge::constant(10.0)));
  CHECK_THROWS_AS(Gauge::constant(0.0), ArgumentError);
}

TEST_CASE("build_fine_partition examples") {
  const Cell k = Cell::closed(0.0, 1.0);
  const auto p = build_fine_partition(k, Gauge::constant(0.3));
  REQUIRE(p.size() == 4);
  CHECK(is_fine(p, Gauge::constant(0.3)));
  p.validate(k);
  CHECK(p.items[0].tag == 0.0);
  CHECK(p.items[1].cell.lo == doctest::Approx(0.27));

  const auto single = build_fine_partition(Cell::singleton(0.7), Gauge::constant(1e-9));
  REQUIRE(single.size() == 1);
  CHECK(single.items[0].tag == 0.7);
  CHECK(single.items[0].cell == Cell::singleton(0.7));

  const StepFn s = two_halves();
  const auto sp = step_fine_partition(s);
  sp.validate(k);
  CHECK(is_fine(sp, canonical_step_gauge(s)));
  for (const auto& it : sp.items) CHECK(containing_cells(s, it.cell) == 1);

  const auto with_points = build_fine_partition(
      k, Gauge::constant(0.2), {{0.3, ExceptionalPoint::Kind::singleton}, {0.6, ExceptionalPoint::Kind::left_anchor}});
  with_points.validate(k);
  CHECK(is_fine(with_points, Gauge::constant(0.2)));
  bool saw_singleton = false, saw_anchor = false;
  for (const auto& it : with_points.items) {
    if (it.cell == Cell::singleton(0.3)) saw_singleton = true;
    if (it.cell.lo == 0.6 && it.cell.lo_closed && it.tag == 0.6) saw_anchor = true;
  }
  CHECK(saw_singleton);
  CHECK(saw_anchor);

  CHECK_THROWS_AS(build_fine_partition(k, Gauge::constant(1e-7)), GaugeTooSmallError);
  SweepOptions capped;
  capped.max_cells = 10;
  CHECK_THROWS_AS(build_fine_partition(k, Gauge::constant(0.01), {}, capped), GaugeTooSmallError);
  CHECK_THROWS_AS(build_fine_partition(k, Gauge::constant(0.1), {{2.0, ExceptionalPoint::Kind::singleton}}),
                  ArgumentError);
}

TEST_CASE("partition validation rejects malformed partitions") {
  const Cell k = Cell::closed(0.0, 1.0);
  TaggedPartition gap{{{0.0, Cell::half_open(0.0, 0.4)}, {0.6, Cell::closed(0.5, 1.0)}}};
  CHECK_THROWS_AS(gap.validate(k), ArgumentError);
  TaggedPartition overlap{{{0.0, Cell::closed(0.0, 0.5)}, {0.5, Cell::closed(0.5, 1.0)}}};
  CHECK_THROWS_AS(overlap.validate(k), ArgumentError);
  TaggedPartition stray{{{0.9, Cell::half_open(0.0, 0.5)}, {0.5, Cell::closed(0.5, 1.0)}}};
  CHECK_THROWS_AS(stray.validate(k), ArgumentError);
  CHECK_THROWS_AS(TaggedPartition{}.validate(k), ArgumentError);
}

TEST_CASE("round trip on random piecewise-constant gauges") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const double lo = rng.uniform(-3.0, 1.0);
    const Domain d{lo, lo + rng.uniform(0.1, 4.0)};
    const Cell k = d.as_cell();
    const Gauge g = random_piecewise_gauge(rng, d);
    std::vector<ExceptionalPoint> ex;
    const std::size_t n_ex = rng.index(0, 5);
    for (std::size_t i = 0; i < n_ex; ++i)
      ex.push_back({rng.uniform(d.lo, d.hi),
                    rng.coin() ? ExceptionalPoint::Kind::singleton : ExceptionalPoint::Kind::left_anchor});
    if (rng.index(0, 3) == 0) ex.push_back({d.lo, ExceptionalPoint::Kind::singleton});
    if (rng.index(0, 3) == 0) ex.push_back({d.hi, ExceptionalPoint::Kind::singleton});
    SweepOptions opts;
    if (rng.coin()) opts.reach = [r = rng.split("reach")]() mutable { return r.uniform(0.1, 0.9); };
    const auto p = build_fine_partition(k, g, ex, opts);
    CAPTURE(trial);
    p.validate(k);
    CHECK(is_fine(p, g));
    for (const auto& e : ex)
      if (e.kind == ExceptionalPoint::Kind::singleton) {
        bool found = false;
        for (const auto& it : p.items) found = found || it.cell == Cell::singleton(e.x);
        CHECK(found);
      }
  }
}

TEST_CASE("canonical gauge cells sit inside single step cells") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const StepFn s = random_step(rng, Domain{0.0, 1.0}, 15);
    SweepOptions opts;
    if (rng.coin()) opts.reach = [r = rng.split("reach")]() mutable { return r.uniform(0.2, 0.9); };
    const auto p = step_fine_partition(s, opts);
    CAPTURE(trial);
    p.validate(s.domain().as_cell());
    CHECK(is_fine(p, canonical_step_gauge(s)));
    for (const auto& it : p.items) CHECK(containing_cells(s, it.cell) == 1);
  }
}

TEST_CASE("splitting a fine cell keeps fineness") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const Cell k = Cell::closed(0.0, 1.0);
    Gauge g = random_piecewise_gauge(rng, Domain{0.0, 1.0});
    auto p = build_fine_partition(k, g);
    const std::size_t i = rng.index(0, p.size() - 1);
    const TaggedItem old = p.items[i];
    if (old.cell.is_singleton() || old.cell.width() < 1e-9) continue;
    const double m = rng.uniform(old.cell.lo, old.cell.hi);
    if (!(m > old.cell.lo && m < old.cell.hi)) continue;
    const Cell left = Cell::make(old.cell.lo, m, old.cell.lo_closed, false);
    const Cell right = Cell::make(m, old.cell.hi, true, old.cell.hi_closed);
    // The half holding the old tag keeps it; the other half is tagged at the
    // point nearest the old tag and inherits the old radius there.
    TaggedItem a{old.tag, left}, b{m, right};
    if (!left.contains(old.tag)) {
      a = {std::nextafter(m, old.cell.lo), left};
      b = {old.tag, right};
    }
    const double r = g(old.tag);
    for (const auto& it : {a, b})
      if (it.tag != old.tag) g.overrides.push_back({it.tag, r});
    p.items.erase(p.items.begin() + static_cast<std::ptrdiff_t>(i));
    p.items.insert(p.items.begin() + static_cast<std::ptrdiff_t>(i), {a, b});
    CAPTURE(trial);
    p.validate(k);
    CHECK(is_fine(p, g));
  }
}
