#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hkcalc/cell.hpp"
#include "hkcalc/regulated.hpp"

namespace hkcalc {

/// Strictly positive function on K controlling partition fineness.
struct Gauge {
  std::function<double(double)> radius;
  /// Exact per-point radii that take precedence over `radius`.
  std::vector<std::pair<double, double>> overrides;
  std::string descriptor;

  double operator()(double t) const;
  static Gauge constant(double r);
};

struct TaggedItem {
  double tag;
  Cell cell;
};

struct TaggedPartition {
  std::vector<TaggedItem> items;

  std::size_t size() const noexcept { return items.size(); }
  /// Throws ArgumentError unless tags sit in their cells and the cells are
  /// ordered, disjoint and cover `k` exactly.
  void validate(const Cell& k) const;
};

/// Points the sweep must respect: `singleton` points become their own tagged
/// cell, `left_anchor` points start a new cell tagged at that point.
struct ExceptionalPoint {
  enum class Kind { singleton, left_anchor };
  double x;
  Kind kind = Kind::singleton;
};

struct SweepOptions {
  std::size_t max_cells = 1'000'000;
  /// Fraction of the gauge radius each cell may extend to; must lie in (0, 0.9].
  /// Called once per cell; a constant 0.9 when empty.
  std::function<double()> reach;
};

/// Half the distance to the complement of the step cell, floored at a quarter
/// of the cell width in the interior and half the width at cell endpoints.
/// Singleton cells use half the distance to the nearest other point of K
/// (`k_points`, when K is a finite set) or to the neighbouring cell ends.
Gauge canonical_step_gauge(const StepFn& s, std::span<const double> k_points = {});

/// Cell boundaries of `s` as exceptional points for the sweep.
std::vector<ExceptionalPoint> step_exceptional_points(const StepFn& s);

/// True iff every cell lies inside (tag - g(tag), tag + g(tag)).
bool is_fine(const TaggedPartition& p, const Gauge& g);

/// Greedy left-to-right sweep producing a g-fine tagged partition of `k`.
/// Throws GaugeTooSmallError past `opts.max_cells`.
TaggedPartition build_fine_partition(const Cell& k, const Gauge& g,
                                     std::vector<ExceptionalPoint> exceptional = {},
                                     const SweepOptions& opts = {});

/// Fine partition of K under the canonical gauge of `s`.
TaggedPartition step_fine_partition(const StepFn& s, const SweepOptions& opts = {});

}  // namespace hkcalc
