#pragma once

#include <string>
#include <vector>

namespace hkcalc {

/// A K-cell: an interval with independent open/closed ends. lo == hi is a
/// singleton and then both ends must be closed.
struct Cell {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
  bool hi_closed = true;

  /// Validating constructor; throws ArgumentError on an empty/inverted cell.
  static Cell make(double lo, double hi, bool lo_closed, bool hi_closed);
  static Cell closed(double lo, double hi) { return make(lo, hi, true, true); }
  static Cell half_open(double lo, double hi) { return make(lo, hi, true, false); }
  static Cell open(double lo, double hi) { return make(lo, hi, false, false); }
  static Cell singleton(double x) { return make(x, x, true, true); }

  bool is_singleton() const noexcept { return lo == hi; }
  double width() const noexcept { return hi - lo; }

  bool contains(double x) const noexcept {
    if (x < lo || x > hi) return false;
    if (x == lo && !lo_closed) return false;
    if (x == hi && !hi_closed) return false;
    return true;
  }

  /// True iff this cell is a subset of `other`.
  bool subset_of(const Cell& other) const noexcept;

  std::string to_string() const;

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// A Borel set approximated as a finite union of cells (points are singleton
/// cells).
struct CellSet {
  std::vector<Cell> cells;

  static CellSet empty() { return {}; }
  static CellSet of(Cell c) { return CellSet{{c}}; }
  static CellSet point(double x) { return CellSet{{Cell::singleton(x)}}; }

  bool contains(double x) const noexcept {
    for (const auto& c : cells)
      if (c.contains(x)) return true;
    return false;
  }

  /// Pointwise intersection; result cells are pairwise intersections.
  CellSet intersect(const CellSet& other) const;
};

/// Intersection of two cells, empty optional-like flag via `ok`.
bool intersect(const Cell& a, const Cell& b, Cell& out) noexcept;

}  // namespace hkcalc
