#include "hkcalc/spectral.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>

#include "hkcalc/errors.hpp"

namespace hkcalc {

SymOperator SymOperator::make(RealMatrix a) {
  if (!a.square() || a.rows() == 0) throw ArgumentError("operator: matrix must be square and non-empty");
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (a(i, j) != a(j, i))
        throw ArgumentError("operator: matrix not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
  for (double v : a.data())
    if (!std::isfinite(v)) throw ArgumentError("operator: non-finite entry");
  return SymOperator(std::move(a));
}

namespace {

double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ArgumentError("csv: bad number '" + std::string(s) + "'");
  return v;
}

}  // namespace

SymOperator SymOperator::from_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::vector<double> row;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_double(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    rows.push_back(std::move(row));
  }
  const std::size_t n = rows.size();
  RealMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw ArgumentError("csv: matrix is not square");
    for (std::size_t j = 0; j < n; ++j) a(i, j) = rows[i][j];
  }
  return make(std::move(a));
}

SymOperator SymOperator::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open " + path);
  return from_csv(in);
}

EigenSystem jacobi_eigh(const SymOperator& op, double tol) {
  if (!(tol > 0.0)) throw ArgumentError("jacobi_eigh: tol must be positive");
  RealMatrix a = op.matrix();
  const std::size_t n = op.n();
  RealMatrix v = RealMatrix::identity(n);
  const double scale = a.frobenius();
  auto off = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };
  int sweep = 0;
  while (off() > tol * scale) {
    if (++sweep > 100) throw NumericalError("jacobi_eigh: no convergence after 100 sweeps");
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  EigenSystem es{std::vector<double>(n), RealMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    es.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) es.vectors(i, k) = v(i, order[k]);
  }
  return es;
}

SpectralMeasure SpectralMeasure::discrete(std::vector<PvmAtom> atoms) {
  if (atoms.empty()) throw ArgumentError("spectral measure: no atoms");
  std::sort(atoms.begin(), atoms.end(), [](const auto& x, const auto& y) { return x.lambda < y.lambda; });
  SpectralMeasure e;
  e.kind_ = Kind::discrete;
  e.dim_ = atoms.front().p.rows();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].p.rows() != e.dim_ || !atoms[i].p.square()) throw ArgumentError("spectral measure: projection shape");
    if (i > 0 && atoms[i].lambda == atoms[i - 1].lambda) throw ArgumentError("spectral measure: duplicate atom");
  }
  e.atoms_ = std::move(atoms);
  return e;
}

SpectralMeasure SpectralMeasure::grid(double a, double b, std::size_t n) {
  if (!(a < b) || n == 0) throw ArgumentError("grid model: need a < b and n >= 1");
  SpectralMeasure e;
  e.kind_ = Kind::grid;
  e.dim_ = n;
  e.grid_ = GridModel{a, b, n, (b - a) / static_cast<double>(n), {}};
  e.grid_.nodes.resize(n);
  for (std::size_t j = 0; j < n; ++j) e.grid_.nodes[j] = a + (static_cast<double>(j) + 0.5) * e.grid_.dx;
  return e;
}

std::vector<double> SpectralMeasure::support() const {
  if (kind_ == Kind::grid) return grid_.nodes;
  std::vector<double> out;
  for (const auto& at : atoms_) out.push_back(at.lambda);
  return out;
}

Domain SpectralMeasure::hull() const {
  if (kind_ == Kind::grid) return Domain{grid_.a, grid_.b};
  return Domain{atoms_.front().lambda, atoms_.back().lambda};
}

double default_cluster_tol(std::size_t n) {
  return 64.0 * static_cast<double>(std::max<std::size_t>(n, 1)) * std::numeric_limits<double>::epsilon();
}

SpectralMeasure pvm_from_eigensystem(const EigenSystem& es, double cluster_tol) {
  const std::size_t n = es.values.size();
  if (n == 0) throw ArgumentError("pvm: empty eigensystem");
  double scale = 1.0;
  for (double l : es.values) scale = std::max(scale, std::abs(l));
  std::vector<PvmAtom> atoms;
  std::size_t start = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    if (k < n && es.values[k] - es.values[k - 1] <= cluster_tol * scale) continue;
    RealMatrix p(n, n);
    double sum = 0.0;
    for (std::size_t c = start; c < k; ++c) {
      sum += es.values[c];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) p(i, j) += es.vectors(i, c) * es.vectors(j, c);
    }
    const double lambda = k - start == 1 ? es.values[start] : sum / static_cast<double>(k - start);
    atoms.push_back({lambda, std::move(p), k - start});
    start = k;
  }
  return SpectralMeasure::discrete(std::move(atoms));
}

SpectralMeasure pvm_from_eigensystem(const EigenSystem& es) {
  return pvm_from_eigensystem(es, default_cluster_tol(es.values.size()));
}

SpectralMeasure pvm_of(const SymOperator& a) { return pvm_from_eigensystem(jacobi_eigh(a)); }

SpectralMeasure diagonal_pvm(const std::vector<double>& values) {
  return pvm_of(SymOperator::make(RealMatrix::diagonal(values)));
}

SpectralMeasure grid_model(double a, double b, std::size_t n) { return SpectralMeasure::grid(a, b, n); }

RealMatrix project(const SpectralMeasure& e, const CellSet& b) {
  RealMatrix out(e.dim(), e.dim());
  if (e.kind() == SpectralMeasure::Kind::grid) {
    const auto& nodes = e.grid_model().nodes;
    for (std::size_t j = 0; j < nodes.size(); ++j)
      if (b.contains(nodes[j])) out(j, j) = 1.0;
    return out;
  }
  for (const auto& at : e.atoms())
    if (b.contains(at.lambda)) out += at.p;
  return out;
}

Complex ScalarMeasure::mass(const Cell& c) const {
  Complex m{};
  for (const auto& [x, w] : atoms)
    if (c.contains(x)) m += w;
  return m;
}

Complex ScalarMeasure::mass(const CellSet& b) const {
  Complex m{};
  for (const auto& [x, w] : atoms)
    if (b.contains(x)) m += w;
  return m;
}

Complex ScalarMeasure::total() const {
  Complex m{};
  for (const auto& a : atoms) m += a.second;
  return m;
}

double ScalarMeasure::total_variation() const {
  double v = 0.0;
  for (const auto& a : atoms) v += std::abs(a.second);
  return v;
}

Complex inner(const ComplexVector& x, const ComplexVector& y, double weight) {
  if (x.size() != y.size()) throw ArgumentError("inner product: dimension mismatch");
  Complex s{};
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * std::conj(y[i]);
  return s * weight;
}

ScalarMeasure scalar_measure(const SpectralMeasure& e, const ComplexVector& x, const ComplexVector& y) {
  if (x.size() != e.dim() || y.size() != e.dim()) throw ArgumentError("scalar_measure: dimension mismatch");
  ScalarMeasure mu;
  if (e.kind() == SpectralMeasure::Kind::grid) {
    const auto& g = e.grid_model();
    for (std::size_t j = 0; j < g.n; ++j) mu.atoms.emplace_back(g.nodes[j], x[j] * std::conj(y[j]) * g.dx);
    return mu;
  }
  for (const auto& at : e.atoms()) mu.atoms.emplace_back(at.lambda, inner(to_complex(at.p).apply(x), y));
  return mu;
}

RealMatrix random_orthogonal(Rng& rng, std::size_t n) {
  RealMatrix q(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> v(n);
    double norm = 0.0;
    do {
      for (auto& x : v) x = rng.normal();
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t k = 0; k < j; ++k) {
          double d = 0.0;
          for (std::size_t i = 0; i < n; ++i) d += v[i] * q(i, k);
          for (std::size_t i = 0; i < n; ++i) v[i] -= d * q(i, k);
        }
      norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
    } while (norm < 1e-6);
    for (std::size_t i = 0; i < n; ++i) q(i, j) = v[i] / norm;
  }
  return q;
}

SymOperator conjugated_diagonal(const RealMatrix& q, const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (q.rows() != n || !q.square()) throw ArgumentError("conjugated_diagonal: shape mismatch");
  RealMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += q(i, k) * values[k] * q(j, k);
      a(i, j) = a(j, i) = s;
    }
  return SymOperator::make(std::move(a));
}

}  // namespace hkcalc
