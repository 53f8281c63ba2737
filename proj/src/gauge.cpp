#include "hkcalc/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hkcalc/errors.hpp"

namespace hkcalc {

double Gauge::operator()(double t) const {
  for (const auto& [x, r] : overrides)
    if (x == t) return r;
  return radius(t);
}

Gauge Gauge::constant(double r) {
  if (!(r > 0.0)) throw ArgumentError("gauge: radius must be positive");
  return Gauge{[r](double) { return r; }, {}, "constant"};
}

void TaggedPartition::validate(const Cell& k) const {
  if (items.empty()) throw ArgumentError("partition: empty");
  for (const auto& it : items)
    if (!it.cell.contains(it.tag)) throw ArgumentError("partition: tag outside its cell");
  const Cell& first = items.front().cell;
  const Cell& last = items.back().cell;
  if (first.lo != k.lo || first.lo_closed != k.lo_closed || last.hi != k.hi || last.hi_closed != k.hi_closed)
    throw ArgumentError("partition: cells do not cover K");
  for (std::size_t i = 1; i < items.size(); ++i) {
    const Cell& p = items[i - 1].cell;
    const Cell& c = items[i].cell;
    if (p.hi != c.lo || p.hi_closed == c.lo_closed)
      throw ArgumentError("partition: cells not adjacent and disjoint");
  }
}

Gauge canonical_step_gauge(const StepFn& s, std::span<const double> k_points) {
  std::vector<double> pts(k_points.begin(), k_points.end());
  std::sort(pts.begin(), pts.end());
  const Domain k = s.domain();
  auto radius = [s, pts, k](double t) {
    const std::size_t i = s.locate(t);
    const auto& cells = s.cells();
    const Cell& c = cells[i];
    if (c.is_singleton()) {
      double d = std::numeric_limits<double>::infinity();
      if (!pts.empty()) {
        for (double p : pts)
          if (p != t) d = std::min(d, std::abs(p - t));
      } else {
        if (i > 0) d = std::min(d, t - cells[i - 1].lo);
        if (i + 1 < cells.size()) d = std::min(d, cells[i + 1].hi - t);
      }
      if (!std::isfinite(d)) d = k.hi - k.lo;
      return 0.5 * d;
    }
    const double w = c.width();
    if ((t == c.lo && c.lo_closed) || (t == c.hi && c.hi_closed)) return 0.5 * w;
    const double inf = std::numeric_limits<double>::infinity();
    const double dl = (c.lo > k.lo || !c.lo_closed) ? t - c.lo : inf;
    const double dr = (c.hi < k.hi || !c.hi_closed) ? c.hi - t : inf;
    const double d = std::min(dl, dr);
    return std::isfinite(d) ? std::max(0.5 * d, 0.25 * w) : 0.5 * w;
  };
  return Gauge{radius, {}, "canonical-step(" + std::to_string(s.size()) + " cells)"};
}

std::vector<ExceptionalPoint> step_exceptional_points(const StepFn& s) {
  std::vector<ExceptionalPoint> out;
  for (const auto& c : s.cells()) {
    if (c.is_singleton()) {
      out.push_back({c.lo, ExceptionalPoint::Kind::singleton});
    } else if (c.lo_closed && c.lo > s.domain().lo) {
      out.push_back({c.lo, ExceptionalPoint::Kind::left_anchor});
    }
  }
  return out;
}

bool is_fine(const TaggedPartition& p, const Gauge& g) {
  for (const auto& it : p.items) {
    if (!it.cell.contains(it.tag)) return false;
    const double r = g(it.tag);
    if (!(r > 0.0)) return false;
    const double lo = it.tag - r;
    const double hi = it.tag + r;
    const bool lo_ok = it.cell.lo > lo || (it.cell.lo == lo && !it.cell.lo_closed);
    const bool hi_ok = it.cell.hi < hi || (it.cell.hi == hi && !it.cell.hi_closed);
    if (!lo_ok || !hi_ok) return false;
  }
  return true;
}

namespace {

constexpr double kDefaultReach = 0.9;

void sweep_segment(const Cell& seg, const Gauge& g, const SweepOptions& opts, TaggedPartition& out) {
  if (seg.is_singleton()) {
    out.items.push_back({seg.lo, seg});
    return;
  }
  double cursor = seg.lo;
  bool cursor_closed = seg.lo_closed;
  while (true) {
    if (out.items.size() >= opts.max_cells)
      throw GaugeTooSmallError("build_fine_partition: more than " + std::to_string(opts.max_cells) + " cells");
    const double reach = opts.reach ? opts.reach() : kDefaultReach;
    if (!(reach > 0.0 && reach <= kDefaultReach)) throw ArgumentError("sweep reach must lie in (0, 0.9]");

    double tag = cursor;
    double r = 0.0;
    if (cursor_closed) {
      r = g(tag);
    } else {
      // Open left end: pick an interior tag whose window reaches back to the cursor.
      double h = 0.5 * (seg.hi - cursor);
      while (true) {
        tag = cursor + h;
        if (!(tag > cursor)) throw GaugeTooSmallError("build_fine_partition: gauge vanishes at an open end");
        r = g(tag);
        if (h < kDefaultReach * r && tag < seg.hi) break;
        h *= 0.5;
      }
    }
    if (!(r > 0.0)) throw ArgumentError("gauge must be positive");
    const double end = tag + reach * r;
    if (end >= seg.hi) {
      out.items.push_back({tag, Cell::make(cursor, seg.hi, cursor_closed, seg.hi_closed)});
      return;
    }
    if (!(end > cursor)) throw GaugeTooSmallError("build_fine_partition: sweep stalled");
    out.items.push_back({tag, Cell::make(cursor, end, cursor_closed, false)});
    cursor = end;
    cursor_closed = true;
  }
}

}  // namespace

TaggedPartition build_fine_partition(const Cell& k, const Gauge& g, std::vector<ExceptionalPoint> exceptional,
                                     const SweepOptions& opts) {
  std::sort(exceptional.begin(), exceptional.end(), [](const auto& a, const auto& b) {
    return a.x < b.x || (a.x == b.x && a.kind == ExceptionalPoint::Kind::singleton &&
                         b.kind != ExceptionalPoint::Kind::singleton);
  });
  std::vector<Cell> segments;
  double cursor = k.lo;
  bool cursor_closed = k.lo_closed;
  double last = std::numeric_limits<double>::quiet_NaN();
  for (const auto& e : exceptional) {
    if (!k.contains(e.x)) throw ArgumentError("exceptional point outside K");
    if (e.x == last) continue;
    last = e.x;
    if (e.kind == ExceptionalPoint::Kind::singleton) {
      if (e.x > cursor) segments.push_back(Cell::make(cursor, e.x, cursor_closed, false));
      segments.push_back(Cell::singleton(e.x));
      cursor = e.x;
      cursor_closed = false;
    } else if (e.x > cursor) {
      segments.push_back(Cell::make(cursor, e.x, cursor_closed, false));
      cursor = e.x;
      cursor_closed = true;
    }
  }
  if (cursor < k.hi) {
    segments.push_back(Cell::make(cursor, k.hi, cursor_closed, k.hi_closed));
  } else if (segments.empty()) {
    segments.push_back(k);
  }

  TaggedPartition out;
  for (const auto& seg : segments) sweep_segment(seg, g, opts, out);
  return out;
}

TaggedPartition step_fine_partition(const StepFn& s, const SweepOptions& opts) {
  return build_fine_partition(s.domain().as_cell(), canonical_step_gauge(s), step_exceptional_points(s), opts);
}

}  // namespace hkcalc
