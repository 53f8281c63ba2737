#include "hkcalc/regulated.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>

#include "hkcalc/errors.hpp"

namespace hkcalc {

// ---------------------------------------------------------------------------
// Domain / StepFn
// ---------------------------------------------------------------------------

Domain Domain::make(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw ArgumentError("domain: need finite lo < hi");
  return Domain{lo, hi};
}

StepFn StepFn::make(std::vector<Cell> cells, std::vector<Complex> values) {
  if (cells.empty()) throw ArgumentError("step function: no cells");
  if (cells.size() != values.size()) throw ArgumentError("step function: one value per cell");
  if (!cells.front().lo_closed || !cells.back().hi_closed)
    throw ArgumentError("step function: cells must cover the closed interval");
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const Cell& p = cells[i - 1];
    const Cell& c = cells[i];
    if (p.hi != c.lo || p.hi_closed == c.lo_closed)
      throw ArgumentError("step function: cells " + p.to_string() + " and " + c.to_string() +
                          " are not adjacent and disjoint");
  }
  StepFn s;
  s.domain_ = Domain{cells.front().lo, cells.back().hi};
  if (!(s.domain_.lo < s.domain_.hi)) throw ArgumentError("step function: degenerate domain");
  s.cells_ = std::move(cells);
  s.values_ = std::move(values);
  return s;
}

StepFn StepFn::constant(Domain k, Complex value) {
  return make({Cell::closed(k.lo, k.hi)}, {value});
}

std::size_t StepFn::locate(double x) const {
  if (!domain_.contains(x)) throw DomainError("step function: point outside K");
  // First cell whose upper end is not below x.
  auto it = std::lower_bound(cells_.begin(), cells_.end(), x,
                             [](const Cell& c, double v) { return c.hi < v; });
  std::size_t i = static_cast<std::size_t>(it - cells_.begin());
  while (i < cells_.size() && !cells_[i].contains(x)) ++i;
  if (i == cells_.size()) throw DomainError("step function: point not covered");
  return i;
}

SideLimits StepFn::side_limits(double x) const {
  const std::size_t i = locate(x);
  const Cell& c = cells_[i];
  SideLimits out;
  if (x == domain_.lo) {
    out.left = values_[i];
  } else if (!c.is_singleton() && c.lo < x) {
    out.left = values_[i];
  } else {
    out.left = values_[i - 1];
  }
  if (x == domain_.hi) {
    out.right = values_[i];
  } else if (!c.is_singleton() && x < c.hi) {
    out.right = values_[i];
  } else {
    out.right = values_[i + 1];
  }
  return out;
}

std::vector<double> StepFn::boundaries() const {
  std::vector<double> pts;
  for (const auto& c : cells_) {
    if (c.lo > domain_.lo) pts.push_back(c.lo);
    if (c.is_singleton()) pts.push_back(c.lo);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

StepFn StepFn::merge(const StepFn& other, const std::function<Complex(Complex, Complex)>& op) const {
  if (!(domain_ == other.domain_)) throw ArgumentError("step merge: mismatched K");
  std::vector<Cell> cells;
  std::vector<Complex> values;
  std::size_t i = 0, j = 0;
  while (i < cells_.size() && j < other.cells_.size()) {
    Cell c;
    if (intersect(cells_[i], other.cells_[j], c)) {
      cells.push_back(c);
      values.push_back(op(values_[i], other.values_[j]));
    }
    // Advance whichever cell ends first; ties broken by closedness.
    const Cell& a = cells_[i];
    const Cell& b = other.cells_[j];
    if (a.hi < b.hi || (a.hi == b.hi && !a.hi_closed && b.hi_closed)) {
      ++i;
    } else if (b.hi < a.hi || (a.hi == b.hi && a.hi_closed && !b.hi_closed)) {
      ++j;
    } else {
      ++i;
      ++j;
    }
  }
  return make(std::move(cells), std::move(values));
}

StepFn StepFn::map(const std::function<Complex(Complex)>& op) const {
  std::vector<Complex> v(values_.size());
  std::transform(values_.begin(), values_.end(), v.begin(), op);
  return make(cells_, std::move(v));
}

StepFn StepFn::with_singletons(const std::vector<std::pair<double, Complex>>& points) const {
  if (points.empty()) return *this;
  std::vector<std::pair<double, Complex>> pts = points;
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  // Mask step function: singletons carry their value, NaN elsewhere keeps the original.
  const Complex keep{std::numeric_limits<double>::quiet_NaN(), 0.0};
  std::vector<Cell> cells;
  std::vector<Complex> tags;
  double cursor = domain_.lo;
  bool cursor_closed = true;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double p = pts[k].first;
    if (!domain_.contains(p)) throw DomainError("step singleton outside K");
    if (k > 0 && p == pts[k - 1].first) throw ArgumentError("duplicate singleton point");
    if (p > cursor) {
      cells.push_back(Cell::make(cursor, p, cursor_closed, false));
      tags.push_back(keep);
    }
    cells.push_back(Cell::singleton(p));
    tags.push_back(pts[k].second);
    cursor = p;
    cursor_closed = false;
  }
  if (cursor < domain_.hi) {
    cells.push_back(Cell::make(cursor, domain_.hi, cursor_closed, true));
    tags.push_back(keep);
  }
  const StepFn mask = make(std::move(cells), std::move(tags));
  return merge(mask, [](Complex orig, Complex tag) { return std::isnan(tag.real()) ? orig : tag; });
}

// ---------------------------------------------------------------------------
// Implementation variants
// ---------------------------------------------------------------------------

class RegulatedFn::Impl {
public:
  explicit Impl(Domain k) : k_(k) {}
  virtual ~Impl() = default;

  Domain domain() const noexcept { return k_; }
  virtual Kind kind() const = 0;
  virtual Complex eval_at_level(double x, std::size_t level) const = 0;
  virtual Complex piece(double x, int side) const = 0;
  virtual std::vector<double> breakpoints(std::size_t level) const = 0;
  virtual std::size_t truncation_level() const { return 0; }
  virtual double envelope(std::size_t /*level*/) const { return 0.0; }
  virtual std::string describe() const = 0;
  virtual const StepFn* as_step() const { return nullptr; }

private:
  Domain k_;
};

namespace {

using Impl = RegulatedFn::Impl;
using Kind = RegulatedFn::Kind;

constexpr double kLimitTol = 1e-9;

double scale_of(std::initializer_list<Complex> zs) {
  double s = 1.0;
  for (const auto& z : zs) s = std::max(s, std::abs(z));
  return s;
}

class StepImpl final : public Impl {
public:
  explicit StepImpl(StepFn s) : Impl(s.domain()), s_(std::move(s)) {}
  Kind kind() const override { return Kind::step; }
  Complex eval_at_level(double x, std::size_t) const override { return s_.eval(x); }
  Complex piece(double x, int side) const override {
    const SideLimits l = s_.side_limits(x);
    return side < 0 ? l.left : l.right;
  }
  std::vector<double> breakpoints(std::size_t) const override { return s_.boundaries(); }
  std::string describe() const override {
    return "step(" + std::to_string(s_.size()) + " cells)";
  }
  const StepFn* as_step() const override { return &s_; }

private:
  StepFn s_;
};

struct BreakData {
  double x;
  Complex left;
  Complex right;
  Complex value;
};

class PiecewiseImpl final : public Impl {
public:
  explicit PiecewiseImpl(PiecewiseSpec spec) : Impl(spec.k), label_(std::move(spec.label)) {
    const Domain k = spec.k;
    nodes_.push_back(k.lo);
    for (std::size_t i = 0; i < spec.breaks.size(); ++i) {
      const double x = spec.breaks[i].x;
      if (!k.contains(x)) throw ArgumentError("piecewise: breakpoint outside K");
      if (i > 0 && !(spec.breaks[i - 1].x < x))
        throw ArgumentError("piecewise: breakpoints must be strictly increasing");
      if (x > nodes_.back()) nodes_.push_back(x);
    }
    if (k.hi > nodes_.back()) nodes_.push_back(k.hi);
    if (spec.pieces.size() != nodes_.size() - 1)
      throw ArgumentError("piecewise: expected " + std::to_string(nodes_.size() - 1) +
                          " pieces, got " + std::to_string(spec.pieces.size()));
    pieces_ = std::move(spec.pieces);
    for (const auto& p : pieces_)
      if (!p) throw ArgumentError("piecewise: empty piece evaluator");

    for (const auto& b : spec.breaks) {
      BreakData d{b.x, b.value, b.value, b.value};
      if (b.x > k.lo) d.left = resolve(b.left, b.x, -1);
      if (b.x < k.hi) d.right = resolve(b.right, b.x, +1);
      breaks_.push_back(d);
    }
  }

  Kind kind() const override { return Kind::piecewise; }

  Complex eval_at_level(double x, std::size_t) const override {
    if (const BreakData* b = find_break(x)) return b->value;
    return pieces_[piece_index(x, +1)](x);
  }

  Complex piece(double x, int side) const override {
    if (const BreakData* b = find_break(x)) return side < 0 ? b->left : b->right;
    return pieces_[piece_index(x, side)](x);
  }

  std::vector<double> breakpoints(std::size_t) const override {
    std::vector<double> out;
    for (const auto& b : breaks_) out.push_back(b.x);
    return out;
  }

  std::string describe() const override { return label_; }

private:
  std::size_t piece_index(double x, int side) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    std::size_t j = static_cast<std::size_t>(it - nodes_.begin());
    j = j == 0 ? 0 : j - 1;
    if (j >= pieces_.size()) j = pieces_.size() - 1;
    if (side < 0 && x == nodes_[j] && j > 0) --j;
    return j;
  }

  const BreakData* find_break(double x) const {
    auto it = std::lower_bound(breaks_.begin(), breaks_.end(), x,
                               [](const BreakData& b, double v) { return b.x < v; });
    if (it != breaks_.end() && it->x == x) return &*it;
    return nullptr;
  }

  Complex resolve(const std::optional<Complex>& stored, double x, int side) const {
    const std::size_t j = piece_index(x, side);
    const double h = std::min(0.5 * (side < 0 ? x - nodes_[j] : nodes_[j + 1] - x),
                              std::ldexp(std::max(1.0, std::abs(x)), -6));
    const Complex numeric = numeric_side_limit(pieces_[j], x, side, h);
    if (!stored) return numeric;
    if (std::abs(*stored - numeric) > kLimitTol * scale_of({*stored, numeric}))
      throw ArgumentError("piecewise: stored one-sided limit at " + std::to_string(x) +
                          " disagrees with the adjacent piece");
    return *stored;
  }

  std::string label_;
  std::vector<double> nodes_;
  std::vector<PieceEval> pieces_;
  std::vector<BreakData> breaks_;
};

class AtomicImpl final : public Impl {
public:
  AtomicImpl(RegulatedFn base, std::shared_ptr<const AtomSource> source, std::size_t level)
      : Impl(base.domain()), base_(std::move(base)), source_(std::move(source)), level_(level) {}

  Kind kind() const override { return Kind::atomic; }

  Complex eval_at_level(double x, std::size_t level) const override {
    if (auto v = source_->atom_at(x, std::min(level, level_))) return *v;
    return base_.eval_at_level(x, level);
  }
  Complex piece(double x, int side) const override { return base_.piece(x, side); }

  std::vector<double> breakpoints(std::size_t level) const override {
    std::vector<double> pts = base_.breakpoints(level);
    for (const auto& a : source_->atoms(std::min(level, level_))) pts.push_back(a.point);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
  }

  std::size_t truncation_level() const override {
    return std::max(level_, base_.truncation_level());
  }

  double envelope(std::size_t level) const override {
    const double own = level >= level_ ? 0.0 : source_->envelope(level);
    return own + base_.envelope(level);
  }

  std::string describe() const override {
    return source_->describe() + "[level " + std::to_string(level_) + "] over " + base_.describe();
  }

private:
  RegulatedFn base_;
  std::shared_ptr<const AtomSource> source_;
  std::size_t level_;
};

class CombinedImpl final : public Impl {
public:
  CombinedImpl(CombineOp op, RegulatedFn f, std::optional<RegulatedFn> g, Complex alpha)
      : Impl(f.domain()), op_(op), f_(std::move(f)), g_(std::move(g)), alpha_(alpha) {
    if (op_ == CombineOp::mul) {
      sup_f_ = sup_norm(f_, 2000);
      sup_g_ = sup_norm(*g_, 2000);
    }
  }

  Kind kind() const override { return Kind::combined; }

  Complex eval_at_level(double x, std::size_t level) const override {
    return apply(f_.eval_at_level(x, level), g_ ? g_->eval_at_level(x, level) : Complex{});
  }
  Complex piece(double x, int side) const override {
    return apply(f_.piece(x, side), g_ ? g_->piece(x, side) : Complex{});
  }

  std::vector<double> breakpoints(std::size_t level) const override {
    std::vector<double> pts = f_.breakpoints(level);
    if (g_) {
      auto more = g_->breakpoints(level);
      pts.insert(pts.end(), more.begin(), more.end());
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
  }

  std::size_t truncation_level() const override {
    return std::max(f_.truncation_level(), g_ ? g_->truncation_level() : 0);
  }

  double envelope(std::size_t level) const override {
    const double ef = f_.envelope(level);
    const double eg = g_ ? g_->envelope(level) : 0.0;
    switch (op_) {
      case CombineOp::add: return ef + eg;
      case CombineOp::scale: return std::abs(alpha_) * ef;
      case CombineOp::conj: return ef;
      case CombineOp::mul: return ef * sup_g_ + eg * sup_f_ + ef * eg;
    }
    return ef + eg;
  }

  std::string describe() const override {
    switch (op_) {
      case CombineOp::add: return "(" + f_.describe() + " + " + g_->describe() + ")";
      case CombineOp::mul: return "(" + f_.describe() + " * " + g_->describe() + ")";
      case CombineOp::scale: {
        std::ostringstream os;
        os << alpha_ << "*" << f_.describe();
        return os.str();
      }
      case CombineOp::conj: return "conj(" + f_.describe() + ")";
    }
    return "combined";
  }

private:
  Complex apply(Complex a, Complex b) const {
    switch (op_) {
      case CombineOp::add: return a + b;
      case CombineOp::mul: return a * b;
      case CombineOp::scale: return alpha_ * a;
      case CombineOp::conj: return std::conj(a);
    }
    return a;
  }

  CombineOp op_;
  RegulatedFn f_;
  std::optional<RegulatedFn> g_;
  Complex alpha_;
  double sup_f_ = 0.0;
  double sup_g_ = 0.0;
};

/// Smallest denominator q <= max_q with fl(p / q) == x, via the continued
/// fraction of the exact binary value of x. Any such p/q is within half an
/// ulp of x, far inside 1/(2 q^2), so it must be a convergent.
std::optional<std::uint64_t> exact_denominator(double x, std::uint64_t max_q) {
  if (!(x > 0.0) || !std::isfinite(x)) return std::nullopt;
  int e = 0;
  const double m = std::frexp(x, &e);
  const int shift = 53 - e;
  if (shift < 0 || shift > 120) return std::nullopt;
  __extension__ typedef __int128 i128;
  i128 a = static_cast<i128>(std::ldexp(m, 53));
  i128 b = static_cast<i128>(1) << shift;
  i128 p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  while (b != 0) {
    const i128 t = a / b;
    const i128 r = a % b;
    if (q1 != 0 && t > (static_cast<i128>(max_q) - q0) / q1) break;
    const i128 p2 = t * p1 + p0;
    const i128 q2 = t * q1 + q0;
    if (q2 > static_cast<i128>(max_q)) break;
    if (q2 > 0 && static_cast<double>(p2) / static_cast<double>(q2) == x)
      return static_cast<std::uint64_t>(q2);
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    a = b;
    b = r;
  }
  return std::nullopt;
}

class ThomaeSource final : public AtomSource {
public:
  explicit ThomaeSource(Domain k) : k_(k) {}

  std::vector<Atom> atoms(std::size_t level) const override {
    std::vector<Atom> out;
    for (std::uint64_t q = 1; q <= level; ++q) {
      const auto p_lo = static_cast<std::uint64_t>(std::ceil(k_.lo * static_cast<double>(q)));
      for (std::uint64_t p = std::max<std::uint64_t>(p_lo, 1); p < q; ++p) {
        if (std::gcd(p, q) != 1) continue;
        const double x = static_cast<double>(p) / static_cast<double>(q);
        if (x > k_.hi) break;
        if (!k_.contains(x)) continue;
        out.push_back({x, Complex{1.0 / static_cast<double>(q), 0.0}});
      }
    }
    std::sort(out.begin(), out.end(), [](const Atom& a, const Atom& b) { return a.point < b.point; });
    return out;
  }

  std::optional<Complex> atom_at(double x, std::size_t level) const override {
    if (!k_.contains(x)) return std::nullopt;
    if (auto q = exact_denominator(x, level)) {
      if (*q >= 2) return Complex{1.0 / static_cast<double>(*q), 0.0};
    }
    return std::nullopt;
  }

  double envelope(std::size_t level) const override {
    return 1.0 / (static_cast<double>(level) + 1.0);
  }

  std::string describe() const override { return "thomae"; }

private:
  Domain k_;
};

class FiniteAtomSource final : public AtomSource {
public:
  explicit FiniteAtomSource(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return a.point < b.point; });
    for (std::size_t i = 1; i < atoms_.size(); ++i)
      if (atoms_[i].point == atoms_[i - 1].point) throw ArgumentError("duplicate atom point");
  }

  std::vector<Atom> atoms(std::size_t) const override { return atoms_; }

  std::optional<Complex> atom_at(double x, std::size_t) const override {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                               [](const Atom& a, double v) { return a.point < v; });
    if (it != atoms_.end() && it->point == x) return it->value;
    return std::nullopt;
  }

  double envelope(std::size_t) const override { return 0.0; }
  std::string describe() const override { return "atoms(" + std::to_string(atoms_.size()) + ")"; }

private:
  std::vector<Atom> atoms_;
};

void check_domain(const RegulatedFn& f, double x) {
  if (!f.domain().contains(x)) {
    std::ostringstream os;
    os.precision(17);
    os << "point " << x << " outside K = [" << f.domain().lo << ", " << f.domain().hi << "]";
    throw DomainError(os.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// RegulatedFn
// ---------------------------------------------------------------------------

RegulatedFn RegulatedFn::piecewise(PiecewiseSpec spec) {
  return RegulatedFn(std::make_shared<PiecewiseImpl>(std::move(spec)));
}

RegulatedFn RegulatedFn::continuous(Domain k, PieceEval fn, std::string label) {
  PiecewiseSpec spec{k, {std::move(fn)}, {}, std::move(label)};
  return piecewise(std::move(spec));
}

RegulatedFn RegulatedFn::step(StepFn s) { return RegulatedFn(std::make_shared<StepImpl>(std::move(s))); }

RegulatedFn RegulatedFn::constant(Domain k, Complex value) { return step(StepFn::constant(k, value)); }

RegulatedFn RegulatedFn::identity(Domain k) {
  return continuous(k, [](double x) { return Complex{x, 0.0}; }, "identity");
}

RegulatedFn RegulatedFn::heaviside(double c, Domain k) {
  if (!k.contains(c)) throw ArgumentError("heaviside: jump point outside K");
  if (c == k.lo) return constant(k, 1.0);
  return step(StepFn::make({Cell::half_open(k.lo, c), Cell::closed(c, k.hi)}, {0.0, 1.0}));
}

RegulatedFn RegulatedFn::indicator(const Cell& cell, Domain k) {
  if (!k.contains(cell.lo) || !k.contains(cell.hi)) throw ArgumentError("indicator: cell outside K");
  std::vector<Cell> cells;
  std::vector<Complex> values;
  if (cell.lo > k.lo) {
    cells.push_back(Cell::make(k.lo, cell.lo, true, !cell.lo_closed));
    values.push_back(0.0);
  } else if (!cell.lo_closed) {
    cells.push_back(Cell::singleton(k.lo));
    values.push_back(0.0);
  }
  cells.push_back(cell);
  values.push_back(1.0);
  if (cell.hi < k.hi) {
    cells.push_back(Cell::make(cell.hi, k.hi, !cell.hi_closed, true));
    values.push_back(0.0);
  } else if (!cell.hi_closed) {
    cells.push_back(Cell::singleton(k.hi));
    values.push_back(0.0);
  }
  return step(StepFn::make(std::move(cells), std::move(values)));
}

RegulatedFn RegulatedFn::thomae(std::size_t level, Domain k) {
  if (!(k.lo > 0.0 && k.hi < 1.0 && k.lo < k.hi))
    throw ArgumentError("thomae: K must be a compact subset of (0, 1)");
  return atomic(constant(k, 0.0), std::make_shared<ThomaeSource>(k), level);
}

RegulatedFn RegulatedFn::perturbed(RegulatedFn base, std::vector<Atom> atoms) {
  for (const auto& a : atoms)
    if (!base.domain().contains(a.point)) throw ArgumentError("perturbation atom outside K");
  return atomic(std::move(base), std::make_shared<FiniteAtomSource>(std::move(atoms)), 1);
}

RegulatedFn RegulatedFn::atomic(RegulatedFn base, std::shared_ptr<const AtomSource> source,
                                std::size_t level) {
  return RegulatedFn(std::make_shared<AtomicImpl>(std::move(base), std::move(source), level));
}

RegulatedFn::Kind RegulatedFn::kind() const { return impl_->kind(); }
Domain RegulatedFn::domain() const { return impl_->domain(); }
std::string RegulatedFn::describe() const { return impl_->describe(); }

Complex RegulatedFn::eval(double x) const {
  check_domain(*this, x);
  return impl_->eval_at_level(x, impl_->truncation_level());
}

Complex RegulatedFn::eval_at_level(double x, std::size_t level) const {
  check_domain(*this, x);
  return impl_->eval_at_level(x, level);
}

Complex RegulatedFn::piece(double x, int side) const {
  check_domain(*this, x);
  return impl_->piece(x, side);
}

SideLimits RegulatedFn::side_limits(double x) const {
  check_domain(*this, x);
  const Domain k = domain();
  SideLimits out;
  out.left = x == k.lo ? eval(x) : impl_->piece(x, -1);
  out.right = x == k.hi ? eval(x) : impl_->piece(x, +1);
  return out;
}

std::vector<double> RegulatedFn::breakpoints(std::size_t level) const { return impl_->breakpoints(level); }
std::size_t RegulatedFn::truncation_level() const { return impl_->truncation_level(); }
double RegulatedFn::envelope(std::size_t level) const { return impl_->envelope(level); }
const StepFn* RegulatedFn::as_step() const { return impl_->as_step(); }

SideLimits side_limits(const RegulatedFn& f, double x) { return f.side_limits(x); }

// ---------------------------------------------------------------------------
// Algebra
// ---------------------------------------------------------------------------

RegulatedFn combine(CombineOp op, const RegulatedFn& f, const RegulatedFn* g, Complex alpha) {
  const bool binary = op == CombineOp::add || op == CombineOp::mul;
  if (binary && g == nullptr) throw ArgumentError("combine: binary op needs two operands");
  if (binary && !(f.domain() == g->domain())) throw ArgumentError("combine: mismatched K");

  const StepFn* sf = f.as_step();
  const StepFn* sg = binary ? g->as_step() : nullptr;
  if (sf && (!binary || sg)) {
    switch (op) {
      case CombineOp::add: return RegulatedFn::step(sf->merge(*sg, std::plus<Complex>{}));
      case CombineOp::mul: return RegulatedFn::step(sf->merge(*sg, std::multiplies<Complex>{}));
      case CombineOp::scale: return RegulatedFn::step(sf->map([alpha](Complex v) { return alpha * v; }));
      case CombineOp::conj: return RegulatedFn::step(sf->map([](Complex v) { return std::conj(v); }));
    }
  }
  std::optional<RegulatedFn> second;
  if (binary) second = *g;
  return RegulatedFn(std::make_shared<CombinedImpl>(op, f, std::move(second), alpha));
}

RegulatedFn operator+(const RegulatedFn& f, const RegulatedFn& g) { return combine(CombineOp::add, f, &g); }
RegulatedFn operator-(const RegulatedFn& f, const RegulatedFn& g) {
  const RegulatedFn neg = combine(CombineOp::scale, g, nullptr, -1.0);
  return combine(CombineOp::add, f, &neg);
}
RegulatedFn operator*(const RegulatedFn& f, const RegulatedFn& g) { return combine(CombineOp::mul, f, &g); }
RegulatedFn operator*(Complex alpha, const RegulatedFn& f) { return combine(CombineOp::scale, f, nullptr, alpha); }
RegulatedFn conj(const RegulatedFn& f) { return combine(CombineOp::conj, f); }

// ---------------------------------------------------------------------------
// Analysis
// ---------------------------------------------------------------------------

Complex numeric_side_limit(const PieceEval& fn, double x, int side, double h) {
  constexpr int kSteps = 40;
  constexpr int kTail = 8;
  if (!(h > 0.0)) throw ArgumentError("side limit: step must be positive");
  Complex prev = fn(x + side * 0.5 * h);
  int quiet = 0;
  for (int k = 2; k <= kSteps; ++k) {
    const Complex v = fn(x + side * std::ldexp(h, -k));
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw EssentialDiscontinuityError("side limit: non-finite values approaching " + std::to_string(x));
    if (std::abs(v - prev) < kLimitTol * scale_of({v})) {
      ++quiet;
    } else {
      quiet = 0;
    }
    prev = v;
  }
  if (quiet < kTail)
    throw EssentialDiscontinuityError("possibly essential discontinuity at " + std::to_string(x));
  return prev;
}

DiscontinuityReport discontinuities(const RegulatedFn& f, std::size_t level) {
  const std::size_t lv = std::min(level, f.truncation_level());
  DiscontinuityReport out;
  for (double x : f.breakpoints(lv)) {
    const SideLimits l = f.side_limits(x);
    const Complex v = f.eval_at_level(x, lv);
    const double tol = kLimitTol * scale_of({l.left, l.right, v});
    if (std::abs(l.left - l.right) > tol) {
      out.push_back({x, Discontinuity::Kind::jump, l.left, l.right, v});
    } else if (std::abs(v - l.left) > tol) {
      out.push_back({x, Discontinuity::Kind::removable, l.left, l.right, v});
    }
  }
  return out;
}

namespace {

constexpr std::size_t kBreakpointListingCap = 128;

std::vector<double> sample_points(const Domain& k, std::size_t samples) {
  // Kronecker sequence: nested in `samples`, so the sampled gap is monotone.
  constexpr double kInvPhi = 0.6180339887498948482;
  std::vector<double> pts;
  pts.reserve(samples + 2);
  pts.push_back(k.lo);
  pts.push_back(k.hi);
  for (std::size_t i = 1; i <= samples; ++i) {
    double frac = std::fmod(static_cast<double>(i) * kInvPhi, 1.0);
    pts.push_back(k.lo + (k.hi - k.lo) * frac);
  }
  return pts;
}

struct Leaf {
  double lo;
  double hi;
  Complex value;
};

void bisect(const RegulatedFn& f, double u, double v, double tol, int depth, std::vector<Leaf>& out) {
  constexpr int kMaxDepth = 52;
  constexpr std::size_t kMaxLeaves = 1u << 23;
  constexpr int kInterior = 7;
  const double mid = 0.5 * (u + v);
  const Complex center = f.piece(mid, +1);
  double osc = std::max(std::abs(f.piece(u, +1) - center), std::abs(f.piece(v, -1) - center));
  for (int i = 1; i <= kInterior && osc <= tol; ++i) {
    const double x = u + (v - u) * static_cast<double>(i) / (kInterior + 1);
    osc = std::max(osc, std::abs(f.piece(x, +1) - center));
  }
  if (osc <= tol) {
    out.push_back({u, v, center});
    return;
  }
  if (depth >= kMaxDepth || !(u < mid && mid < v))
    throw ConvergenceError("approximate_by_steps: piece oscillation does not shrink near " +
                           std::to_string(mid));
  if (out.size() > kMaxLeaves) throw ConvergenceError("approximate_by_steps: cell budget exhausted");
  bisect(f, u, mid, tol, depth + 1, out);
  bisect(f, mid, v, tol, depth + 1, out);
}

StepFn build_steps(const RegulatedFn& f, double eps, double piece_share) {
  const Domain k = f.domain();
  const std::size_t trunc = f.truncation_level();
  std::size_t level = 0;
  while (level < trunc && !(f.envelope(level) < 0.5 * eps)) {
    level = level == 0 ? 1 : std::min(trunc, level + std::max<std::size_t>(1, level / 8));
  }
  const double piece_tol = piece_share * (eps - f.envelope(level));

  std::vector<double> bps = f.breakpoints(level);
  std::vector<double> nodes{k.lo};
  for (double b : bps)
    if (b > nodes.back()) nodes.push_back(b);
  if (k.hi > nodes.back()) nodes.push_back(k.hi);
  auto is_break = [&](double x) { return std::binary_search(bps.begin(), bps.end(), x); };

  std::vector<Cell> cells;
  std::vector<Complex> values;
  std::vector<Leaf> leaves;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double u = nodes[i];
    const double v = nodes[i + 1];
    if (is_break(u)) {
      cells.push_back(Cell::singleton(u));
      values.push_back(f.eval_at_level(u, level));
    }
    leaves.clear();
    bisect(f, u, v, piece_tol, 0, leaves);
    for (std::size_t j = 0; j < leaves.size(); ++j) {
      const bool lo_closed = j == 0 ? (u == k.lo && !is_break(u)) : true;
      const bool hi_closed = j + 1 == leaves.size() ? (v == k.hi && !is_break(v)) : false;
      cells.push_back(Cell::make(leaves[j].lo, leaves[j].hi, lo_closed, hi_closed));
      values.push_back(leaves[j].value);
    }
  }
  if (is_break(k.hi)) {
    cells.push_back(Cell::singleton(k.hi));
    values.push_back(f.eval_at_level(k.hi, level));
  }
  return StepFn::make(std::move(cells), std::move(values));
}

}  // namespace

StepFn approximate_by_steps(const RegulatedFn& f, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("approximate_by_steps: eps must be positive");
  if (const StepFn* s = f.as_step()) return *s;
  double share = 0.9;
  for (int attempt = 0; attempt < 4; ++attempt, share *= 0.25) {
    StepFn s = build_steps(f, eps, share);
    if (sup_norm_gap(f, RegulatedFn::step(s), 4096) < eps) return s;
  }
  throw ConvergenceError("approximate_by_steps: sampled gap stays above eps");
}

double sup_norm_gap(const RegulatedFn& f, const RegulatedFn& g, std::size_t samples) {
  if (!(f.domain() == g.domain())) throw ArgumentError("sup_norm_gap: mismatched K");
  if (samples < 2) throw ArgumentError("sup_norm_gap: need at least 2 samples");
  double gap = 0.0;
  for (double x : sample_points(f.domain(), samples)) gap = std::max(gap, std::abs(f.eval(x) - g.eval(x)));
  auto add_breaks = [&](const RegulatedFn& h) {
    for (double x : h.breakpoints(std::min(h.truncation_level(), kBreakpointListingCap))) {
      const SideLimits a = f.side_limits(x);
      const SideLimits b = g.side_limits(x);
      gap = std::max({gap, std::abs(f.eval(x) - g.eval(x)), std::abs(a.left - b.left),
                      std::abs(a.right - b.right)});
    }
  };
  add_breaks(f);
  add_breaks(g);
  return gap;
}

double sup_norm(const RegulatedFn& f, std::size_t samples) {
  return sup_norm_gap(f, RegulatedFn::constant(f.domain(), 0.0), samples);
}

}  // namespace hkcalc
