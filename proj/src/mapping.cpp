#include "hkcalc/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hkcalc/calculus.hpp"
#include "hkcalc/errors.hpp"

namespace hkcalc {

namespace {

constexpr double kDedupTol = 1e-10;
// Breakpoints revealed for continuum closures of atomic perturbations.
constexpr std::size_t kClosureLevel = 128;

}  // namespace

SpectrumApprox SpectrumApprox::from(std::vector<Complex> pts, double resolution, std::string note) {
  std::sort(pts.begin(), pts.end(), [](Complex a, Complex b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  SpectrumApprox s;
  s.resolution = resolution;
  s.closure_note = std::move(note);
  for (Complex z : pts)
    if (!s.contains(z, kDedupTol)) s.points.push_back(z);
  return s;
}

bool SpectrumApprox::contains(Complex z, double tol) const {
  for (Complex p : points)
    if (std::abs(p - z) <= tol) return true;
  return false;
}

SpectrumApprox point_spectrum(const SpectralMeasure& e, double tol) {
  if (e.kind() == SpectralMeasure::Kind::grid) return SpectrumApprox::from({}, 0.0, "grid model: no eigenvalues");
  std::vector<Complex> pts;
  for (const auto& at : e.atoms())
    if (at.p.frobenius() > tol) pts.emplace_back(at.lambda, 0.0);
  return SpectrumApprox::from(std::move(pts));
}

KernelRangeCheck kernel_range_check(const SymOperator& a, double lambda, const SpectralMeasure& e) {
  if (e.kind() != SpectralMeasure::Kind::discrete || e.dim() != a.n())
    throw ArgumentError("kernel_range_check: discrete measure of matching dimension required");
  const EigenSystem es = jacobi_eigh(a);
  double scale = 1.0;
  for (double l : es.values) scale = std::max(scale, std::abs(l));
  const double tol = default_cluster_tol(a.n()) * scale;
  const PvmAtom* atom = nullptr;
  for (const auto& at : e.atoms())
    if (std::abs(at.lambda - lambda) <= tol) atom = &at;
  if (atom == nullptr) return {0, 0, 0.0};
  double trace = 0.0;
  for (std::size_t i = 0; i < a.n(); ++i) trace += atom->p(i, i);
  std::size_t ker = 0;
  for (double l : es.values)
    if (std::abs(l - lambda) <= tol) ++ker;
  RealMatrix shifted = a.matrix();
  for (std::size_t i = 0; i < a.n(); ++i) shifted(i, i) -= lambda;
  return {static_cast<std::size_t>(std::lround(trace)), ker, operator_norm(shifted * atom->p)};
}

SpectrumApprox spectral_map(const RegulatedFn& f, const SpectralMeasure& e, const SpectrumModel& model) {
  std::vector<Complex> pts;
  const SpectrumApprox sp = point_spectrum(e);
  for (Complex l : sp.points) pts.push_back(f.eval(l.real()));
  if (model.kind == SpectrumModel::Kind::finite) {
    if (e.kind() == SpectralMeasure::Kind::grid)
      throw ArgumentError("spectral_map: grid models need the continuum model");
    return SpectrumApprox::from(std::move(pts), 0.0, "exact: spectrum is the point spectrum");
  }
  const Domain k = model.k;
  if (!(f.domain().lo <= k.lo && k.hi <= f.domain().hi)) throw DomainError("spectral_map: K outside the domain of f");
  if (model.samples < 2) throw ArgumentError("spectral_map: need at least 2 samples");
  std::vector<double> cs;
  for (std::size_t i = 0; i < model.samples; ++i)
    cs.push_back(k.lo + (k.hi - k.lo) * static_cast<double>(i) / static_cast<double>(model.samples - 1));
  const std::size_t level = std::min(f.truncation_level(), kClosureLevel);
  std::size_t nbreak = 0;
  for (double b : f.breakpoints(level))
    if (k.contains(b)) {
      cs.push_back(b);
      ++nbreak;
    }
  for (double c : cs) {
    if (sp.contains({c, 0.0}, 0.0)) continue;
    const SideLimits sl = f.side_limits(c);
    if (c > k.lo) pts.push_back(sl.left);
    if (c < k.hi) pts.push_back(sl.right);
  }
  const double res = (k.hi - k.lo) / static_cast<double>(model.samples - 1);
  return SpectrumApprox::from(std::move(pts), res,
                              "one-sided limits on " + std::to_string(model.samples) + " uniform points and " +
                                  std::to_string(nbreak) + " breakpoints");
}

SpectrumApprox pointwise_image(const RegulatedFn& f, Domain k, std::size_t samples) {
  if (samples < 2) throw ArgumentError("pointwise_image: need at least 2 samples");
  std::vector<Complex> pts;
  for (std::size_t i = 0; i < samples; ++i)
    pts.push_back(f.eval(k.lo + (k.hi - k.lo) * static_cast<double>(i) / static_cast<double>(samples - 1)));
  for (double b : f.breakpoints(std::min(f.truncation_level(), kClosureLevel)))
    if (k.contains(b)) pts.push_back(f.eval(b));
  return SpectrumApprox::from(std::move(pts), (k.hi - k.lo) / static_cast<double>(samples - 1), "sampled image");
}

SpectrumApprox essential_range(const RegulatedFn& f, const SpectralMeasure& e, const std::vector<double>& eps_grid) {
  std::vector<double> where;
  if (e.kind() == SpectralMeasure::Kind::grid) {
    where = e.grid_model().nodes;
  } else {
    for (const auto& at : e.atoms())
      if (at.rank > 0) where.push_back(at.lambda);
  }
  std::vector<Complex> values;
  for (double x : where) values.push_back(f.eval(x));
  std::vector<Complex> kept;
  for (Complex z : values) {
    bool keep = true;
    for (double eps : eps_grid) {
      // E of the preimage is nonzero iff it contains a charged atom or node.
      bool charged = false;
      for (Complex v : values)
        if (std::abs(v - z) < eps) {
          charged = true;
          break;
        }
      keep = keep && charged;
    }
    if (keep) kept.push_back(z);
  }
  return SpectrumApprox::from(std::move(kept), e.kind() == SpectralMeasure::Kind::grid ? e.grid_model().dx : 0.0,
                              e.kind() == SpectralMeasure::Kind::grid ? "node values" : "atom values");
}

double hausdorff_distance(const SpectrumApprox& s1, const SpectrumApprox& s2) {
  if (s1.points.empty() || s2.points.empty()) throw ArgumentError("hausdorff_distance: empty set");
  auto directed = [](const SpectrumApprox& a, const SpectrumApprox& b) {
    double worst = 0.0;
    for (Complex p : a.points) {
      double best = std::numeric_limits<double>::infinity();
      for (Complex q : b.points) best = std::min(best, std::abs(p - q));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(s1, s2), directed(s2, s1));
}

}  // namespace hkcalc
