#include "hkcalc/unbounded.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <memory>
#include <sstream>

#include "hkcalc/errors.hpp"

namespace hkcalc {

namespace {

// Certified radii stay this factor inside the explored horizon.
constexpr double kHorizonFactor = 8.0;

struct AtomTable {
  std::vector<double> radius;  // |lambda|
  std::vector<Complex> fw;     // prefix sums of f(lambda) w
  std::vector<double> sq;      // prefix sums of |f(lambda)|^2 w
  bool exhausted = false;
};

AtomTable enumerate(const ComplexFn& f, const UnboundedModel& mu, std::size_t n_max) {
  AtomTable t;
  t.fw.push_back(0.0);
  t.sq.push_back(0.0);
  for (std::size_t k = 0;; ++k) {
    if (k == n_max) return t;
    const auto a = mu.atom(k);
    if (!a) {
      t.exhausted = true;
      return t;
    }
    const double r = std::abs(a->first);
    if (!t.radius.empty() && r < t.radius.back()) throw ArgumentError("atomic model: |lambda| must be nondecreasing");
    const Complex v = f(a->first);
    t.radius.push_back(r);
    t.fw.push_back(t.fw.back() + v * a->second);
    t.sq.push_back(t.sq.back() + std::norm(v) * a->second);
  }
}

std::size_t count_within(const AtomTable& t, double n) {
  return static_cast<std::size_t>(std::upper_bound(t.radius.begin(), t.radius.end(), n) - t.radius.begin());
}

// Integral over [a, b] split at the breaks inside it.
double piece_integral(const RealFn& h, double a, double b, const std::vector<double>& breaks, double rel_tol) {
  double lo = a, s = 0.0;
  for (double c : breaks)
    if (c > a && c < b) {
      s += refine_simpson(h, lo, c, rel_tol).value;
      lo = c;
    }
  return s + refine_simpson(h, lo, b, rel_tol).value;
}

// Integral over the shell r_in <= |x| <= r_out.
double shell_integral(const RealFn& h, double r_in, double r_out, const std::vector<double>& breaks, double rel_tol) {
  if (r_in == 0.0) return piece_integral(h, -r_out, r_out, [&] {
    auto b = breaks;
    b.push_back(0.0);
    std::sort(b.begin(), b.end());
    return b;
  }(), rel_tol);
  return piece_integral(h, -r_out, -r_in, breaks, rel_tol) + piece_integral(h, r_in, r_out, breaks, rel_tol);
}

// Dyadic radii 1, 2, 4, ... up to l (l itself appended when not a power of two).
std::vector<double> dyadic_radii(double l) {
  std::vector<double> r;
  double x = 1.0;
  while (x < l) {
    r.push_back(x);
    x *= 2.0;
  }
  r.push_back(l);
  return r;
}

// Cumulative integrals of h over [-r, r] for each radius.
std::vector<double> cumulative(const RealFn& h, const std::vector<double>& radii, const std::vector<double>& breaks,
                               double rel_tol) {
  std::vector<double> out;
  double inner = 0.0, acc = 0.0;
  for (double r : radii) {
    acc += shell_integral(h, inner, r, breaks, rel_tol);
    out.push_back(acc);
    inner = r;
  }
  return out;
}

}  // namespace

UnboundedModel UnboundedModel::atomic(AtomEnumerator atoms, std::string label) {
  UnboundedModel m;
  m.kind_ = Kind::atomic;
  m.atoms_ = std::move(atoms);
  m.label_ = std::move(label);
  return m;
}

UnboundedModel UnboundedModel::atomic_list(std::vector<std::pair<double, double>> atoms, std::string label) {
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const auto& a, const auto& b) { return std::abs(a.first) < std::abs(b.first); });
  auto shared = std::make_shared<const std::vector<std::pair<double, double>>>(std::move(atoms));
  return atomic(
      [shared](std::size_t k) -> std::optional<std::pair<double, double>> {
        if (k >= shared->size()) return std::nullopt;
        return (*shared)[k];
      },
      std::move(label));
}

UnboundedModel UnboundedModel::atomic_csv(std::istream& in) {
  std::vector<std::pair<double, double>> atoms;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double l = 0.0, w = 0.0;
    if (!(row >> l >> w)) {
      if (first) {
        first = false;
        continue;
      }
      throw ArgumentError("atomic csv: expected 'lambda,weight' rows");
    }
    first = false;
    atoms.emplace_back(l, w);
  }
  return atomic_list(std::move(atoms), "atomic-csv");
}

UnboundedModel UnboundedModel::density(RealFn rho, std::vector<double> breaks, std::string label) {
  UnboundedModel m;
  m.kind_ = Kind::density;
  m.rho_ = std::move(rho);
  std::sort(breaks.begin(), breaks.end());
  m.breaks_ = std::move(breaks);
  m.label_ = std::move(label);
  return m;
}

std::optional<std::pair<double, double>> UnboundedModel::atom(std::size_t k) const {
  if (kind_ != Kind::atomic) throw ArgumentError("atom(): not an atomic model");
  auto a = atoms_(k);
  if (a && (!(a->second >= 0.0) || !std::isfinite(a->first) || !std::isfinite(a->second)))
    throw ArgumentError("atomic model: weights must be finite and nonnegative");
  return a;
}

double density_integral(const RealFn& g, const RealFn& rho, double l, const std::vector<double>& breaks,
                        double rel_tol) {
  if (!(l > 0.0)) throw ArgumentError("density_integral: radius must be positive");
  const RealFn h = [&](double x) { return g(x) * rho(x); };
  return cumulative(h, dyadic_radii(l), breaks, rel_tol).back();
}

Complex truncated_integral(const ComplexFn& f, const UnboundedModel& mu, double n) {
  if (!(n > 0.0)) throw ArgumentError("truncated_integral: n must be positive");
  if (mu.kind() == UnboundedModel::Kind::density) {
    const double re = density_integral([&](double x) { return f(x).real(); }, mu.rho(), n, mu.breaks());
    const double im = density_integral([&](double x) { return f(x).imag(); }, mu.rho(), n, mu.breaks());
    return {re, im};
  }
  Complex s{};
  double prev = 0.0;
  for (std::size_t k = 0;; ++k) {
    const auto a = mu.atom(k);
    if (!a || std::abs(a->first) > n) break;
    if (std::abs(a->first) < prev) throw ArgumentError("atomic model: |lambda| must be nondecreasing");
    prev = std::abs(a->first);
    s += f(a->first) * a->second;
  }
  return s;
}

LimitResult limit_integral(const ComplexFn& f, const UnboundedModel& mu, double eps, const LimitOptions& opts) {
  if (!(eps > 0.0)) throw ArgumentError("limit_integral: eps must be positive");
  const double y2 = opts.y_norm * opts.y_norm;
  LimitResult res{};
  if (mu.kind() == UnboundedModel::Kind::atomic) {
    const AtomTable t = enumerate(f, mu, opts.n_max);
    const double horizon = t.radius.empty() ? 0.0 : t.radius.back();
    double next_record = 1.0;
    double n = 1.0;
    while (true) {
      const std::size_t idx = count_within(t, n);
      const double tail = t.sq.back() - t.sq[idx];
      if (n >= next_record) {
        res.radii.push_back(n);
        res.partial_sums.push_back(t.fw[idx].real());
        next_record = 2.0 * n;
      }
      const bool trusted = t.exhausted || n * kHorizonFactor <= horizon;
      if (trusted && tail * y2 < eps * eps) {
        res.value = t.fw[idx];
        res.n_certified = n;
        res.tail_bound = tail * y2;
        return res;
      }
      if (idx >= t.radius.size() || !trusted) break;
      n = std::max(n + 1.0, std::ceil(t.radius[idx]));
    }
    throw DivergenceSuspected("limit_integral: no Cauchy certificate within " + std::to_string(t.radius.size()) +
                                  " atoms",
                              res.partial_sums);
  }
  const auto radii = dyadic_radii(opts.l_max);
  const auto& br = mu.breaks();
  const auto& rho = mu.rho();
  const auto re = cumulative([&](double x) { return f(x).real() * rho(x); }, radii, br, 1e-8);
  const auto im = cumulative([&](double x) { return f(x).imag() * rho(x); }, radii, br, 1e-8);
  const auto sq = cumulative([&](double x) { return std::norm(f(x)) * rho(x); }, radii, br, 1e-8);
  res.radii = radii;
  res.partial_sums = re;
  for (std::size_t j = 0; j + 3 < radii.size(); ++j) {
    const double tail = std::max(0.0, sq[j + 3] - sq[j]);
    if (tail * y2 < eps * eps) {
      res.value = {re[j], im[j]};
      res.n_certified = radii[j];
      res.tail_bound = tail * y2;
      return res;
    }
  }
  throw DivergenceSuspected("limit_integral: no Cauchy certificate up to L = " + std::to_string(opts.l_max),
                            res.partial_sums);
}

DomainVerdict domain_member(const ComplexFn& f, const UnboundedModel& mu, double eps, const LimitOptions& opts) {
  if (!(eps > 0.0)) throw ArgumentError("domain_member: eps must be positive");
  DomainVerdict v{};
  if (mu.kind() == UnboundedModel::Kind::atomic) {
    const AtomTable t = enumerate(f, mu, opts.n_max);
    const double horizon = t.radius.empty() ? 0.0 : t.radius.back();
    double next_record = 1.0;
    double n = 1.0;
    while (true) {
      const std::size_t idx = count_within(t, n);
      if (n >= next_record) {
        v.radii.push_back(n);
        v.partial_sums.push_back(t.sq[idx]);
        next_record = 2.0 * n;
      }
      const bool trusted = t.exhausted || n * kHorizonFactor <= horizon;
      if (trusted && t.sq.back() - t.sq[idx] < eps) {
        v.member = true;
        v.value = t.sq[idx];
        v.bound_used = n;
        return v;
      }
      if (idx >= t.radius.size() || !trusted) break;
      n = std::max(n + 1.0, std::ceil(t.radius[idx]));
    }
    v.member = false;
    v.value = t.sq.back();
    v.bound_used = horizon;
    v.radii.push_back(horizon);
    v.partial_sums.push_back(t.sq.back());
    return v;
  }
  const auto radii = dyadic_radii(opts.l_max);
  const auto& rho = mu.rho();
  const auto sq = cumulative([&](double x) { return std::norm(f(x)) * rho(x); }, radii, mu.breaks(), 1e-8);
  v.radii = radii;
  v.partial_sums = sq;
  for (std::size_t j = 0; j + 3 < radii.size(); ++j)
    if (sq[j + 3] - sq[j] < eps) {
      v.member = true;
      v.value = sq[j];
      v.bound_used = radii[j];
      return v;
    }
  v.member = false;
  v.value = sq.back();
  v.bound_used = radii.back();
  return v;
}

double position_expectation(const ComplexFn& psi, double l, const std::vector<double>& breaks) {
  std::vector<double> b = breaks;
  std::sort(b.begin(), b.end());
  return density_integral([](double x) { return x; }, [&](double x) { return std::norm(psi(x)); }, l, b);
}

}  // namespace hkcalc
