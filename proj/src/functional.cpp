#include "bernoulli/functional.hpp"

#include <algorithm>
#include <cmath>

#include "bernoulli/calculus.hpp"
#include "bernoulli/geometry.hpp"

namespace bernoulli {

Domain Domain::rectangle(Point lo, Point hi) {
  if (!(hi.x > lo.x && hi.y > lo.y)) throw InvalidInput("empty rectangle domain");
  Domain d;
  d.shape = Shape::Rectangle;
  d.lo = lo;
  d.hi = hi;
  return d;
}

Domain Domain::disk(Point centre, double radius) {
  if (!(radius > 0.0)) throw InvalidInput("disk radius must be positive");
  Domain d;
  d.shape = Shape::Disk;
  d.centre = centre;
  d.radius = radius;
  d.lo = {centre.x - radius, centre.y - radius};
  d.hi = {centre.x + radius, centre.y + radius};
  return d;
}

Domain Domain::of(const GridSpec& g) { return rectangle(g.origin(), g.upper()); }

bool Domain::contains(Point p) const {
  const double tol = 1e-12 * (1.0 + std::max(std::abs(hi.x - lo.x), std::abs(hi.y - lo.y)));
  if (shape == Shape::Disk) return norm(p - centre) <= radius + tol;
  return p.x >= lo.x - tol && p.x <= hi.x + tol && p.y >= lo.y - tol && p.y <= hi.y + tol;
}

double Domain::depth(Point p) const {
  if (shape == Shape::Disk) return radius - norm(p - centre);
  const double inside = std::min({p.x - lo.x, hi.x - p.x, p.y - lo.y, hi.y - p.y});
  if (inside >= 0.0) return inside;
  const double dx = std::max({lo.x - p.x, p.x - hi.x, 0.0});
  const double dy = std::max({lo.y - p.y, p.y - hi.y, 0.0});
  return -std::hypot(dx, dy);
}

double cell_dirichlet_energy(const EnergyDensity& d, const double (&c)[4], double h) {
  const double e0 = c[1] - c[0];  // bottom
  const double e1 = c[2] - c[1];  // right
  const double e2 = c[2] - c[3];  // top
  const double e3 = c[3] - c[0];  // left
  const double s = 1.0 / (h * h);
  const double f = d.F(s * (e0 * e0 + e3 * e3)) + d.F(s * (e0 * e0 + e1 * e1)) +
                   d.F(s * (e2 * e2 + e1 * e1)) + d.F(s * (e2 * e2 + e3 * e3));
  return 0.25 * f * h * h;
}

double energy(const ScalarField& u, const BernoulliParams& p, const Domain& mask) {
  const auto& g = u.grid();
  const double h = g.spacing();
  const ScalarField level = level_field(u);
  double dirichlet = 0.0;
  double area = 0.0;
  for (int j = 0; j + 1 < g.ny(); ++j)
    for (int i = 0; i + 1 < g.nx(); ++i) {
      if (!mask.contains(g.node(i, j)) || !mask.contains(g.node(i + 1, j)) ||
          !mask.contains(g.node(i, j + 1)) || !mask.contains(g.node(i + 1, j + 1)))
        continue;
      const double c[4] = {u(i, j), u(i + 1, j), u(i + 1, j + 1), u(i, j + 1)};
      const double a = cell_positive_area(level, i, j);
      area += a;
      if (a >= h * h || (c[0] > 0.0 && c[1] > 0.0 && c[2] > 0.0 && c[3] > 0.0)) {
        dirichlet += cell_dirichlet_energy(p.density, c, h);
        continue;
      }
      // Cut cell: the extended field on the positive part, min(u, 0) elsewhere.
      const double e[4] = {level(i, j), level(i + 1, j), level(i + 1, j + 1), level(i, j + 1)};
      const double m[4] = {std::min(c[0], 0.0), std::min(c[1], 0.0), std::min(c[2], 0.0),
                           std::min(c[3], 0.0)};
      const double frac = std::clamp(a / (h * h), 0.0, 1.0);
      dirichlet += frac * cell_dirichlet_energy(p.density, e, h) +
                   (1.0 - frac) * cell_dirichlet_energy(p.density, m, h);
    }
  return dirichlet + p.lambda * area;
}

MatrixField coefficients_a(const ScalarField& u, const EnergyDensity& d) {
  const VectorField du = gradient(u);
  MatrixField a(u.grid());
  for (std::size_t n = 0; n < u.grid().size(); ++n) {
    const Vec2 q = du.values()[n];
    const double t = q[0] * q[0] + q[1] * q[1];
    const double f1 = d.dF(t), f2 = d.d2F(t);
    Sym2& m = a.values()[n];
    m.xx = f1 + 2.0 * f2 * q[0] * q[0];
    m.xy = 2.0 * f2 * q[0] * q[1];
    m.yy = f1 + 2.0 * f2 * q[1] * q[1];
  }
  return a;
}

VectorField drift_b(const ScalarField& u, const EnergyDensity& d) {
  VectorField b(u.grid());
  if (d.linear) return b;
  const VectorField du = gradient(u);
  const MatrixField d2u = hessian(u);
  for (std::size_t n = 0; n < u.grid().size(); ++n) {
    const Vec2 q = du.values()[n];
    const Sym2& H = d2u.values()[n];
    const double t = q[0] * q[0] + q[1] * q[1];
    const double f2 = d.d2F(t), f3 = d.d3F(t);
    const double scal = f2 * H.trace() + 2.0 * f3 * H.quad(q, q);
    const Vec2 Hq = H.apply(q);
    Vec2& out = b.values()[n];
    out = {-(scal * q[0] + 2.0 * f2 * Hq[0]), -(scal * q[1] + 2.0 * f2 * Hq[1])};
  }
  return b;
}

std::vector<char> interior_mask(const ScalarField& u, int band_cells) {
  const auto& g = u.grid();
  std::vector<char> mask(g.size(), 0);
  const int b = band_cells;
  for (int j = b; j < g.ny() - b; ++j)
    for (int i = b; i < g.nx() - b; ++i) {
      bool ok = true;
      for (int dj = -b; dj <= b && ok; ++dj)
        for (int di = -b; di <= b && ok; ++di)
          if (di * di + dj * dj <= b * b && !(u(i + di, j + dj) > 0.0)) ok = false;
      mask[g.index(i, j)] = ok;
    }
  return mask;
}

double MaskedField::sup_abs() const {
  double m = 0.0;
  for (std::size_t n = 0; n < mask.size(); ++n)
    if (mask[n]) m = std::max(m, std::abs(values.values()[n]));
  return m;
}

std::size_t MaskedField::count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
}

MaskedField pde_residual(const ScalarField& u, const EnergyDensity& d) {
  const MatrixField a = coefficients_a(u, d);
  const MatrixField H = hessian(u);
  MaskedField out{ScalarField(u.grid()), interior_mask(u)};
  for (std::size_t n = 0; n < u.grid().size(); ++n) {
    if (!out.mask[n]) continue;
    const Sym2& A = a.values()[n];
    const Sym2& D = H.values()[n];
    out.values.values()[n] = A.xx * D.xx + 2.0 * A.xy * D.xy + A.yy * D.yy;
  }
  return out;
}

ScalarField w_field(const ScalarField& u, Point centre) {
  const auto& g = u.grid();
  const VectorField du = gradient(u);
  ScalarField w(g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const Point y = g.node(i, j) - centre;
      w(i, j) = du(i, j)[0] * y.x + du(i, j)[1] * y.y - u(i, j);
    }
  return w;
}

MaskedField w_residual(const ScalarField& u, const EnergyDensity& d, Point centre,
                       double drift_factor) {
  if (!u.grid().contains(centre)) throw InvalidInput("centre outside grid");
  const ScalarField w = w_field(u, centre);
  const MatrixField a = coefficients_a(u, d);
  const VectorField b = drift_b(u, d);
  const MatrixField Hw = hessian(w);
  const VectorField dw = gradient(w);
  MaskedField out{ScalarField(u.grid()), interior_mask(u)};
  for (std::size_t n = 0; n < u.grid().size(); ++n) {
    if (!out.mask[n]) continue;
    const Sym2& A = a.values()[n];
    const Sym2& D = Hw.values()[n];
    const Vec2 bn = b.values()[n];
    const Vec2 gw = dw.values()[n];
    out.values.values()[n] = A.xx * D.xx + 2.0 * A.xy * D.xy + A.yy * D.yy -
                             drift_factor * (bn[0] * gw[0] + bn[1] * gw[1]);
  }
  return out;
}

}  // namespace bernoulli
