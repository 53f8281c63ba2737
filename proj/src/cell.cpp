#include "hkcalc/cell.hpp"

#include <sstream>

#include "hkcalc/errors.hpp"

namespace hkcalc {

Cell Cell::make(double lo, double hi, bool lo_closed, bool hi_closed) {
  if (!(lo <= hi)) throw ArgumentError("cell: lo must not exceed hi");
  if (lo == hi && !(lo_closed && hi_closed))
    throw ArgumentError("cell: degenerate cell must be a closed singleton");
  return Cell{lo, hi, lo_closed, hi_closed};
}

bool Cell::subset_of(const Cell& o) const noexcept {
  const bool lo_ok = lo > o.lo || (lo == o.lo && (o.lo_closed || !lo_closed));
  const bool hi_ok = hi < o.hi || (hi == o.hi && (o.hi_closed || !hi_closed));
  return lo_ok && hi_ok;
}

std::string Cell::to_string() const {
  std::ostringstream os;
  os.precision(17);
  if (is_singleton()) {
    os << '{' << lo << '}';
  } else {
    os << (lo_closed ? '[' : '(') << lo << ", " << hi << (hi_closed ? ']' : ')');
  }
  return os.str();
}

bool intersect(const Cell& a, const Cell& b, Cell& out) noexcept {
  double lo = a.lo;
  bool lc = a.lo_closed;
  if (b.lo > lo) {
    lo = b.lo;
    lc = b.lo_closed;
  } else if (b.lo == lo) {
    lc = lc && b.lo_closed;
  }
  double hi = a.hi;
  bool hc = a.hi_closed;
  if (b.hi < hi) {
    hi = b.hi;
    hc = b.hi_closed;
  } else if (b.hi == hi) {
    hc = hc && b.hi_closed;
  }
  if (lo > hi) return false;
  if (lo == hi && !(lc && hc)) return false;
  out = Cell{lo, hi, lc, hc};
  return true;
}

CellSet CellSet::intersect(const CellSet& other) const {
  CellSet out;
  for (const auto& a : cells)
    for (const auto& b : other.cells) {
      Cell c;
      if (hkcalc::intersect(a, b, c)) out.cells.push_back(c);
    }
  return out;
}

}  // namespace hkcalc
