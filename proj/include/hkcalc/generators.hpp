#pragma once

// Seeded generators shared by the verify battery and the property tests.

#include <algorithm>
#include <cmath>
#include <vector>

#include "hkcalc/regulated.hpp"
#include "hkcalc/rng.hpp"

namespace hkcalc::gen {

inline StepFn random_step(Rng& rng, Domain k, std::size_t max_cells, bool complex_values = false) {
  const std::size_t n = rng.index(1, max_cells);
  std::vector<double> cuts;
  for (std::size_t i = 0; i + 1 < n; ++i) cuts.push_back(rng.uniform(k.lo, k.hi));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<Cell> cells;
  std::vector<Complex> values;
  auto value = [&] {
    return complex_values ? Complex{rng.uniform(-2, 2), rng.uniform(-2, 2)} : Complex{rng.uniform(-2, 2), 0.0};
  };
  double lo = k.lo;
  bool lo_closed = true;
  for (double c : cuts) {
    if (c <= lo || c >= k.hi) continue;
    cells.push_back(Cell::make(lo, c, lo_closed, false));
    values.push_back(value());
    lo = c;
    // Occasionally plant a singleton cell at a cut.
    if (rng.index(0, 4) == 0) {
      cells.push_back(Cell::singleton(c));
      values.push_back(value());
      lo_closed = false;
    } else {
      lo_closed = true;
    }
  }
  cells.push_back(Cell::make(lo, k.hi, lo_closed, true));
  values.push_back(value());
  return StepFn::make(std::move(cells), std::move(values));
}

/// Five smooth pieces with jumps between them; side values left to the
/// numeric limit extractor.
inline RegulatedFn random_piecewise(Rng& rng, Domain k, std::size_t pieces = 5) {
  std::vector<double> cuts;
  for (std::size_t i = 0; i + 1 < pieces; ++i) cuts.push_back(rng.uniform(k.lo, k.hi));
  std::sort(cuts.begin(), cuts.end());
  PiecewiseSpec spec;
  spec.k = k;
  spec.label = "random-piecewise";
  for (std::size_t i = 0; i < pieces; ++i) {
    const double a = rng.uniform(-1, 1), w = rng.uniform(0.5, 6), c = rng.uniform(-1, 1);
    spec.pieces.push_back([a, w, c](double x) { return Complex{a * std::sin(w * x) + c, 0.0}; });
  }
  for (double c : cuts) spec.breaks.push_back({c, std::nullopt, std::nullopt, Complex{rng.uniform(-1, 1), 0.0}});
  return RegulatedFn::piecewise(std::move(spec));
}

}  // namespace hkcalc::gen
