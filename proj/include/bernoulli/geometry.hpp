#pragma once

#include <cstddef>
#include <vector>

#include "bernoulli/grid.hpp"

namespace bernoulli {

/// The field whose zero level set is treated as the free boundary.
///
/// Signed samples are kept. A zero sample adjacent to the positive set is
/// replaced by the linear extrapolation of u from the positive side (two
/// collinear positive nodes, along the axes, or along the diagonals when no
/// axis neighbour is positive), capped strictly below zero. This places the
/// boundary of a nonnegative field with sub-cell accuracy instead of at the
/// last zero node.
ScalarField level_field(const ScalarField& u);

/// Local polynomial fit of u through positive nodes only.
struct Jet {
  double value = 0.0;
  Vec2 grad{0.0, 0.0};
  Sym2 hess;
  int samples = 0;
  int degree = -1;  // -1: not enough samples
  bool ok() const { return degree >= 1; }
};

/// Least-squares fit (cubic when enough samples, else quadratic or linear)
/// to the positive nodes within radius_cells * h of p.
Jet fit_positive_jet(const ScalarField& u, Point p, double radius_cells = 3.5);

struct BoundaryVertex {
  Point position;
  Vec2 normal{0.0, 0.0};    // unit, pointing into {u > 0}
  Vec2 gradient{0.0, 0.0};  // positive-side sample of grad u
  double weight = 0.0;      // arc length attributed to the vertex
};

/// One marching-squares chain, oriented with {u > 0} on the left.
struct Polyline {
  std::vector<BoundaryVertex> vertices;
  bool closed = false;
};

struct FreeBoundary {
  std::vector<Polyline> segments;

  bool empty() const { return segments.empty(); }
  std::size_t vertex_count() const;
  double length() const;
  /// Vertex nearest to p; throws InvalidInput when the boundary is empty.
  const BoundaryVertex& nearest(Point p) const;
};

FreeBoundary extract_free_boundary(const ScalarField& u);

/// Area of {u > 0} within the disk B_r(center), from the marching-squares
/// positivity polygon of level_field(u) clipped exactly against the disk.
double positivity_measure(const ScalarField& u, Point center, double r);

/// Same, reusing a precomputed level field.
double positivity_measure_level(const ScalarField& level, Point center, double r);

/// Area of the positivity polygon of level_field inside cell (i, j).
double cell_positive_area(const ScalarField& level, int i, int j);

/// Signed area of the intersection of the disk of radius r at the origin with
/// the triangle (origin, a, b).
double disk_triangle_area(Point a, Point b, double r);

}  // namespace bernoulli
