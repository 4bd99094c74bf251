#pragma once

#include <vector>

#include "bernoulli/energy_density.hpp"
#include "bernoulli/grid.hpp"

namespace bernoulli {

/// Rectangle or disk subdomain of a grid.
struct Domain {
  enum class Shape { Rectangle, Disk };
  Shape shape = Shape::Rectangle;
  Point lo{};
  Point hi{};
  Point centre{};
  double radius = 0.0;

  static Domain rectangle(Point lo, Point hi);
  static Domain disk(Point centre, double radius);
  /// Whole grid extent.
  static Domain of(const GridSpec& g);

  bool contains(Point p) const;
  /// Distance to the boundary, positive inside.
  double depth(Point p) const;
};

/// Energy of one cell: the average of F(|g|^2) over the four corner gradients
/// (each built from the two cell edges meeting at the corner), times h^2.
/// Corner values in counter-clockwise order from the lower left.
double cell_dirichlet_energy(const EnergyDensity& d, const double (&c)[4], double h);

/// J_F over the cells whose four corners lie in the domain. The
/// characteristic term uses the sub-cell positivity polygon. In cut cells the
/// Dirichlet term is split by that polygon's area: the level_field extension
/// on the positive part, min(u, 0) on the rest.
double energy(const ScalarField& u, const BernoulliParams& p, const Domain& mask);

/// F'(|grad u|^2) I + 2 F''(|grad u|^2) grad u grad u^T, nodewise.
MatrixField coefficients_a(const ScalarField& u, const EnergyDensity& d);

/// b = -{[F'' lap u + 2 F''' grad u.D2u.grad u] grad u + 2 F'' D2u grad u}.
VectorField drift_b(const ScalarField& u, const EnergyDensity& d);

/// Factor relating drift_b to the drift that makes a_ij w_ij = k b.grad w hold
/// for solutions of a_ij u_ij = 0 (fixed by the refinement study in the tests).
inline constexpr double kDriftFactor = 2.0;

/// Nodes where the residual identities are tested: u > 0 at every node within
/// band_cells * h, and at least band_cells nodes away from the grid edge.
std::vector<char> interior_mask(const ScalarField& u, int band_cells = 3);

struct MaskedField {
  ScalarField values;
  std::vector<char> mask;

  double sup_abs() const;
  std::size_t count() const;
};

/// a_ij u_ij on the interior mask.
MaskedField pde_residual(const ScalarField& u, const EnergyDensity& d);

/// w = grad u.(x - centre) - u on every node.
ScalarField w_field(const ScalarField& u, Point centre);

/// a_ij w_ij - factor * b.grad w on the interior mask, derivatives of w by
/// finite differences of the assembled w field.
MaskedField w_residual(const ScalarField& u, const EnergyDensity& d, Point centre,
                       double drift_factor = kDriftFactor);

}  // namespace bernoulli
