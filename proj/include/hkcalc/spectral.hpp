#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hkcalc/cell.hpp"
#include "hkcalc/matrix.hpp"
#include "hkcalc/regulated.hpp"
#include "hkcalc/rng.hpp"

namespace hkcalc {

/// Real symmetric matrix; symmetry is checked exactly.
class SymOperator {
public:
  static SymOperator make(RealMatrix a);
  /// Row-major CSV, one matrix row per line.
  static SymOperator from_csv(std::istream& in);
  static SymOperator load_csv(const std::string& path);

  std::size_t n() const noexcept { return a_.rows(); }
  const RealMatrix& matrix() const noexcept { return a_; }

private:
  explicit SymOperator(RealMatrix a) : a_(std::move(a)) {}
  RealMatrix a_;
};

struct EigenSystem {
  std::vector<double> values;  ///< ascending
  RealMatrix vectors;          ///< column k belongs to values[k]
};

/// Cyclic Jacobi; stops once the off-diagonal Frobenius norm drops below
/// tol * ||A||_F. Throws NumericalError after 100 sweeps.
EigenSystem jacobi_eigh(const SymOperator& a, double tol = 1e-15);

struct PvmAtom {
  double lambda;
  RealMatrix p;
  std::size_t rank;
};

/// Midpoint grid on [a, b] modelling a multiplication operator on L2(a, b).
struct GridModel {
  double a;
  double b;
  std::size_t n;
  double dx;
  std::vector<double> nodes;
};

class SpectralMeasure {
public:
  enum class Kind { discrete, grid };

  static SpectralMeasure discrete(std::vector<PvmAtom> atoms);
  static SpectralMeasure grid(double a, double b, std::size_t n);

  Kind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<PvmAtom>& atoms() const noexcept { return atoms_; }
  const GridModel& grid_model() const noexcept { return grid_; }
  /// Inner-product weight: 1 for discrete models, dx for grids.
  double weight() const noexcept { return kind_ == Kind::grid ? grid_.dx : 1.0; }
  /// Atom locations or grid nodes, ascending.
  std::vector<double> support() const;
  /// Smallest closed interval containing the support.
  Domain hull() const;

private:
  Kind kind_ = Kind::discrete;
  std::size_t dim_ = 0;
  std::vector<PvmAtom> atoms_;
  GridModel grid_{};
};

/// Default relative clustering tolerance: 64 n eps_machine.
double default_cluster_tol(std::size_t n);

/// Merges eigenvalues closer than cluster_tol * max(1, max|lambda|) into one
/// atom carrying the sum of their rank-one projections.
SpectralMeasure pvm_from_eigensystem(const EigenSystem& es, double cluster_tol);
SpectralMeasure pvm_from_eigensystem(const EigenSystem& es);
SpectralMeasure pvm_of(const SymOperator& a);
/// PVM of diag(values) with exact eigenvalues.
SpectralMeasure diagonal_pvm(const std::vector<double>& values);

/// Midpoint grid x_j = a + (j + 1/2)(b - a)/n.
SpectralMeasure grid_model(double a, double b, std::size_t n);

/// E(B) as a matrix.
RealMatrix project(const SpectralMeasure& e, const CellSet& b);

/// Weighted atoms of a complex measure on the real line.
struct ScalarMeasure {
  std::vector<std::pair<double, Complex>> atoms;

  Complex mass(const Cell& c) const;
  Complex mass(const CellSet& b) const;
  Complex total() const;
  double total_variation() const;
};

/// mu_{x,y}(B) = <E(B) x, y>; zero weights are kept so atoms line up with E.
ScalarMeasure scalar_measure(const SpectralMeasure& e, const ComplexVector& x, const ComplexVector& y);

/// Weighted inner product <x, y> = sum x_i conj(y_i) w.
Complex inner(const ComplexVector& x, const ComplexVector& y, double weight = 1.0);

/// Orthogonal matrix from Gram-Schmidt on a Gaussian matrix.
RealMatrix random_orthogonal(Rng& rng, std::size_t n);
/// Q diag(values) Q^T with exact symmetrisation.
SymOperator conjugated_diagonal(const RealMatrix& q, const std::vector<double>& values);

}  // namespace hkcalc
