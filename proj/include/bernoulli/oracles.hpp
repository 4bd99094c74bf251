#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bernoulli/grid.hpp"

namespace bernoulli {

/// Closed-form one-phase solution with lambda* = 1.
struct OracleSolution {
  std::string name;
  std::function<double(Point)> u;
  // positive-phase formulas, extended across the free boundary
  std::function<Vec2(Point)> grad;
  std::function<Sym2(Point)> hess;
  std::function<double(Point)> fb_distance;
  std::vector<Point> fb_samples;  // points on the free boundary
  std::string fb_description;
  bool homogeneous = false;  // degree-one homogeneous about fb_samples' apex
  Point apex{};              // centre for cones / radial solutions

  ScalarField sample(const GridSpec& grid) const { return ScalarField::sample(grid, u); }
};

/// u = max(x.e, 0); e is normalised.
OracleSolution halfplane(Vec2 e);

/// u = |x.e|: a homogeneous critical point whose free boundary has no area.
OracleSolution twoplane(Vec2 e);

enum class DeadcoreRoot { Outer, Inner };

/// Root of rho log(R / rho) = 1 on the requested branch. Throws when R < e.
double deadcore_radius(double R, DeadcoreRoot root = DeadcoreRoot::Outer);

/// u = rho log(|x - c| / rho) outside the dead core |x - c| < rho.
OracleSolution deadcore(double R, Point centre = {}, DeadcoreRoot root = DeadcoreRoot::Outer);

/// "halfplane:ex", "halfplane:ey", "halfplane:angle=<rad>", "twoplane:...",
/// "deadcore:R=<value>[,root=inner|outer]".
OracleSolution parse_oracle(const std::string& spec);

/// Count of nodes with u > 0 in the closed disk, times h^2.
double pixel_measure(const ScalarField& u, Point centre, double r);

/// Centred differences of K over an increasing radius list; one-sided at the ends.
std::vector<double> dK_fd(std::span<const double> radii, std::span<const double> K);

}  // namespace bernoulli
