#include "bernoulli/monotonicity.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "bernoulli/calculus.hpp"
#include "bernoulli/oracles.hpp"

namespace bernoulli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_radii(std::span<const double> radii) {
  if (radii.empty()) throw InvalidInput("radius list is empty");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0) || !std::isfinite(radii[k]))
      throw InvalidInput("radii must be positive and finite");
    if (k > 0 && radii[k] <= radii[k - 1]) throw InvalidInput("radii must be strictly increasing");
  }
}

Point as_point(Vec2 v) { return {v[0], v[1]}; }
Vec2 as_vec(Point p) { return {p.x, p.y}; }

}  // namespace

void require_free_boundary_centre(const FreeBoundary& fb, Point centre, double h) {
  if (fb.empty() || norm(fb.nearest(centre).position - centre) > h)
    throw InvalidInput("no free boundary point near requested center");
}

DensityProfile density_K(const ScalarField& u, Point centre, std::span<const double> radii) {
  check_radii(radii);
  const double h = u.grid().spacing();
  require_free_boundary_centre(extract_free_boundary(u), centre, h);
  if (!u.grid().contains_disk(centre, radii.back()))
    throw InvalidInput("largest radius leaves the grid");

  DensityProfile p;
  p.centre = centre;
  p.h = h;
  p.radii.assign(radii.begin(), radii.end());
  const ScalarField level = level_field(u);
  for (double r : radii)
    p.K.push_back(positivity_measure_level(level, centre, r) / (std::numbers::pi * r * r));
  p.dK_fd = dK_fd(p.radii, p.K);
  p.dK_bi.assign(p.radii.size(), kNaN);
  return p;
}

double dK_boundary_integral(const FreeBoundary& fb, Point centre, double r) {
  double acc = 0.0;
  for (const auto& s : fb.segments)
    for (const auto& v : s.vertices) {
      const Point y = v.position - centre;
      if (norm(y) > r) continue;
      acc += (v.gradient[0] * y.x + v.gradient[1] * y.y) * v.weight;
    }
  return acc / (std::numbers::pi * r * r * r);
}

DensityProfile density_profile(const ScalarField& u, Point centre, std::span<const double> radii) {
  DensityProfile p = density_K(u, centre, radii);
  const FreeBoundary fb = extract_free_boundary(u);
  for (std::size_t k = 0; k < p.radii.size(); ++k) p.dK_bi[k] = dK_boundary_integral(fb, centre, p.radii[k]);
  return p;
}

void write_profile_csv(std::ostream& out, const DensityProfile& p) {
  std::ostringstream s;
  s << std::setprecision(17) << "r,K,dK_fd,dK_bi\n";
  for (std::size_t k = 0; k < p.radii.size(); ++k)
    s << p.radii[k] << ',' << p.K[k] << ',' << p.dK_fd[k] << ',' << p.dK_bi[k] << '\n';
  out << s.str();
}

std::vector<char> centred_mask(const ScalarField& u, Point centre) {
  std::vector<char> mask = interior_mask(u);
  const GridSpec& g = u.grid();
  const double cut = 3.0 * g.spacing();
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      if (norm(g.node(i, j) - centre) < cut) mask[g.index(i, j)] = 0;
  return mask;
}

MaskedField w_masked(const ScalarField& u, Point centre) {
  return {w_field(u, centre), centred_mask(u, centre)};
}

namespace {

// Difference along one axis that never reads a nonpositive node: central when
// both neighbours are positive, else second-order one-sided into the positive
// side. NaN when neither side has two positive nodes.
double positive_side_difference(const ScalarField& u, int i, int j, int di, int dj) {
  const GridSpec& g = u.grid();
  auto pos = [&](int k) {
    const int a = i + k * di, b = j + k * dj;
    return a >= 0 && b >= 0 && a < g.nx() && b < g.ny() && u(a, b) > 0.0;
  };
  auto at = [&](int k) { return u(i + k * di, j + k * dj); };
  const double h = g.spacing();
  if (pos(-1) && pos(1)) return (at(1) - at(-1)) / (2.0 * h);
  if (pos(1) && pos(2)) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
  if (pos(-1) && pos(-2)) return (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h);
  return kNaN;
}

}  // namespace

double w_positive_sup(const ScalarField& u, Point centre) {
  const GridSpec& g = u.grid();
  double sup = 0.0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      if (!(u(i, j) > 0.0)) continue;
      const double ux = positive_side_difference(u, i, j, 1, 0);
      const double uy = positive_side_difference(u, i, j, 0, 1);
      if (std::isnan(ux) || std::isnan(uy)) continue;
      const Point y = g.node(i, j) - centre;
      sup = std::max(sup, std::abs(ux * y.x + uy * y.y - u(i, j)));
    }
  return sup;
}

MaskedField v_field(const ScalarField& u, Point centre) {
  const GridSpec& g = u.grid();
  const VectorField grad = gradient(u);
  MaskedField out{ScalarField(g), centred_mask(u, centre)};
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t n = g.index(i, j);
      if (!out.mask[n]) continue;
      const Point y = g.node(i, j) - centre;
      const double r = norm(y);
      const Vec2 du = grad(i, j);
      out.values.values()[n] = (u(i, j) - (du[0] * y.x + du[1] * y.y)) / r;
    }
  return out;
}

MaskedField b_dot_y(const ScalarField& u, const EnergyDensity& d, Point centre) {
  const GridSpec& g = u.grid();
  MaskedField out{ScalarField(g), centred_mask(u, centre)};
  if (d.linear) return out;
  const VectorField b = drift_b(u, d);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t n = g.index(i, j);
      if (!out.mask[n]) continue;
      const Point y = g.node(i, j) - centre;
      out.values.values()[n] = kDriftFactor * (b(i, j)[0] * y.x + b(i, j)[1] * y.y);
    }
  return out;
}

MaskedField c_field(const ScalarField& u, const EnergyDensity& d, Point centre) {
  const GridSpec& g = u.grid();
  const MatrixField a = coefficients_a(u, d);
  const MaskedField by = b_dot_y(u, d, centre);
  MaskedField out{ScalarField(g), by.mask};
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t n = g.index(i, j);
      if (!out.mask[n]) continue;
      const Vec2 y = as_vec(g.node(i, j) - centre);
      const double r2 = y[0] * y[0] + y[1] * y[1];
      const double ayy = a(i, j).quad(y, y);
      out.values.values()[n] = by.values.values()[n] / (r2 * std::sqrt(r2)) - 2.0 * ayy / (r2 * r2) +
                               (3.0 * ayy / r2 - a(i, j).trace()) / r2;
    }
  return out;
}

double radial_deficit(const ScalarField& u, const FreeBoundary& fb, Point centre, double window) {
  const double inner = 2.0 * u.grid().spacing();
  double sup = 0.0;
  for (const auto& s : fb.segments)
    for (const auto& v : s.vertices) {
      const Point y = v.position - centre;
      const double r = norm(y);
      if (r < inner || r > window) continue;
      sup = std::max(sup, -(v.gradient[0] * y.x + v.gradient[1] * y.y) / r);
    }
  return sup;
}

BlowupSequence blowup(const ScalarField& u, Point centre, std::span<const double> scales,
                      int reference_cells) {
  if (scales.empty()) throw InvalidInput("scale list is empty");
  if (reference_cells < 2) throw InvalidInput("reference grid needs at least 2 cells");
  const double h = u.grid().spacing();
  for (std::size_t k = 0; k < scales.size(); ++k) {
    if (!(scales[k] >= 4.0 * h)) throw InvalidInput("scale below 4h");
    if (k > 0 && scales[k] >= scales[k - 1]) throw InvalidInput("scales must be strictly decreasing");
    const Point lo = centre - Point{scales[k], scales[k]}, hi = centre + Point{scales[k], scales[k]};
    if (!u.grid().contains(lo) || !u.grid().contains(hi)) throw InvalidInput("blow-up window leaves the grid");
  }

  BlowupSequence seq;
  seq.centre = centre;
  seq.scales.assign(scales.begin(), scales.end());
  seq.reference = GridSpec({-1.0, -1.0}, 2.0 / reference_cells, reference_cells + 1, reference_cells + 1);
  const ScalarField level = level_field(u);
  for (double r : scales)
    seq.fields.push_back(ScalarField::sample(
        seq.reference, [&](Point x) { return std::max(0.0, level.interpolate(centre + r * x)) / r; }));

  const std::size_t n = seq.fields.size();
  seq.pairwise.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = k + 1; l < n; ++l) {
      double sup = 0.0;
      const auto& a = seq.fields[k].values();
      const auto& b = seq.fields[l].values();
      for (std::size_t q = 0; q < a.size(); ++q) sup = std::max(sup, std::abs(a[q] - b[q]));
      seq.pairwise[k][l] = seq.pairwise[l][k] = sup;
    }
  seq.cauchy_diff.assign(n, kNaN);
  for (std::size_t k = 1; k < n; ++k) seq.cauchy_diff[k] = seq.pairwise[k][k - 1];
  return seq;
}

double homogeneity_defect(const ScalarField& u, Point centre, double r, std::span<const double> t_samples) {
  if (!(r > 0.0)) throw InvalidInput("radius must be positive");
  if (t_samples.empty()) throw InvalidInput("t sample list is empty");
  double tmax = 1.0;
  for (double t : t_samples) {
    if (!(t > 0.0)) throw InvalidInput("t samples must be positive");
    tmax = std::max(tmax, t);
  }
  const double reach = tmax * r;
  if (!u.grid().contains_disk(centre, reach)) throw InvalidInput("homogeneity ball leaves the grid");

  const GridSpec& g = u.grid();
  const VectorField grad = gradient(u);
  double gsup = 0.0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      if (norm(g.node(i, j) - centre) <= reach) gsup = std::max(gsup, norm(as_point(grad(i, j))));
  if (gsup == 0.0) return 0.0;

  const ScalarField level = level_field(u);
  auto value = [&](Point p) { return std::max(0.0, level.interpolate(p)); };
  double sup = 0.0;
  constexpr int kAngles = 64;
  for (double rho : {0.5 * r, r})
    for (int a = 0; a < kAngles; ++a) {
      const double th = 2.0 * std::numbers::pi * a / kAngles;
      const Point x{rho * std::cos(th), rho * std::sin(th)};
      const double ux = value(centre + x);
      for (double t : t_samples) sup = std::max(sup, std::abs(value(centre + t * x) - t * ux) / (rho * gsup));
    }
  return sup;
}

namespace {

// Indices of a polyline within arc length window of vertex k, at least two on
// each side when the chain allows.
std::vector<int> window_indices(const Polyline& pl, const std::vector<double>& arc, int k, double window) {
  const int n = static_cast<int>(pl.vertices.size());
  std::vector<int> out{k};
  const double total = arc.back();
  for (int dir : {-1, 1}) {
    double walked = 0.0;
    int prev = k;
    for (int step = 1; step < n; ++step) {
      int idx = k + dir * step;
      if (pl.closed)
        idx = ((idx % n) + n) % n;
      else if (idx < 0 || idx >= n)
        break;
      double ds = std::abs(arc[idx] - arc[prev]);
      if (pl.closed && ds > 0.5 * total) ds = total - ds;
      walked += ds;
      if (walked > window && step > 2) break;
      // a closed loop must not hand the same vertex out twice
      if (pl.closed && std::find(out.begin(), out.end(), idx) != out.end()) break;
      out.push_back(idx);
      prev = idx;
    }
  }
  return out;
}

std::vector<double> arc_lengths(const Polyline& pl) {
  std::vector<double> arc(pl.vertices.size() + (pl.closed ? 1 : 0), 0.0);
  const std::size_t n = pl.vertices.size();
  for (std::size_t k = 1; k < arc.size(); ++k)
    arc[k] = arc[k - 1] + norm(pl.vertices[k % n].position - pl.vertices[k - 1].position);
  return arc;
}

double fit_curvature(const Polyline& pl, const std::vector<int>& idx, int k) {
  if (idx.size() < 5) return kNaN;
  const Point p0 = pl.vertices[k].position;
  Point far_lo = p0, far_hi = p0;
  // chord between the two window ends fixes the tangent
  double lo_s = 0.0, hi_s = 0.0;
  const Vec2 n0 = pl.vertices[k].normal;
  const Point t0{n0[1], -n0[0]};
  for (int q : idx) {
    const double s = dot(pl.vertices[q].position - p0, t0);
    if (s < lo_s) lo_s = s, far_lo = pl.vertices[q].position;
    if (s > hi_s) hi_s = s, far_hi = pl.vertices[q].position;
  }
  Point T = far_hi - far_lo;
  const double tl = norm(T);
  if (tl == 0.0) return kNaN;
  T = (1.0 / tl) * T;
  Point N{-T.y, T.x};
  if (dot(N, as_point(n0)) < 0.0) N = -1.0 * N;

  double m[3][3] = {}, rhs[3] = {};
  for (int q : idx) {
    const Point d = pl.vertices[q].position - p0;
    const double s = dot(d, T), e = dot(d, N);
    const double phi[3] = {1.0, s, s * s};
    for (int a = 0; a < 3; ++a) {
      rhs[a] += phi[a] * e;
      for (int b = 0; b < 3; ++b) m[a][b] += phi[a] * phi[b];
    }
  }
  // Cramer on the 3x3 normal equations
  auto det3 = [](double (&a)[3][3]) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  const double det = det3(m);
  if (std::abs(det) < 1e-300) return kNaN;
  double mb[3][3], mc[3][3];
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) mb[a][b] = mc[a][b] = m[a][b];
  for (int a = 0; a < 3; ++a) mb[a][1] = rhs[a], mc[a][2] = rhs[a];
  const double b = det3(mb) / det, c = det3(mc) / det;
  return -2.0 * c / std::pow(1.0 + b * b, 1.5);
}

// Turning angle between the chords (k-2, k-1) and (k+1, k+2); NaN when the
// open chain is too short there.
double turning_angle(const Polyline& pl, int k) {
  const int n = static_cast<int>(pl.vertices.size());
  auto at = [&](int idx) -> const Point* {
    if (pl.closed) return &pl.vertices[((idx % n) + n) % n].position;
    if (idx < 0 || idx >= n) return nullptr;
    return &pl.vertices[idx].position;
  };
  if (n < 5) return kNaN;
  const Point *a = at(k - 2), *b = at(k - 1), *c = at(k + 1), *d = at(k + 2);
  if (!a || !b || !c || !d) return kNaN;
  const Point d1 = *b - *a, d2 = *d - *c;
  return std::abs(std::atan2(cross(d1, d2), dot(d1, d2)));
}

}  // namespace

double curvature_window(double h) { return std::max(6.0 * h, std::sqrt(h)); }

std::vector<std::vector<double>> curvature_profile(const FreeBoundary& fb, double window) {
  if (!(window > 0.0)) throw InvalidInput("curvature window must be positive");
  std::vector<std::vector<double>> out;
  for (const auto& pl : fb.segments) {
    const std::vector<double> arc = arc_lengths(pl);
    std::vector<double> k(pl.vertices.size(), kNaN);
    for (int q = 0; q < static_cast<int>(pl.vertices.size()); ++q)
      k[q] = fit_curvature(pl, window_indices(pl, arc, q, window), q);
    out.push_back(std::move(k));
  }
  return out;
}

CurvatureReport curvature_identity_check(const ScalarField& u, const FreeBoundary& fb, const BernoulliParams& p) {
  const double h = u.grid().spacing();
  const double ls = p.lambda_star();
  const double t = ls * ls;
  const double factor = 1.0 + 2.0 * p.density.d2F(t) / p.density.dF(t);
  const auto kappa = curvature_profile(fb, curvature_window(h));
  constexpr double kMaxTurn = std::numbers::pi / 6.0;

  CurvatureReport rep;
  rep.min_minus_u_NN = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < fb.segments.size(); ++s) {
    const Polyline& pl = fb.segments[s];
    for (int q = 0; q < static_cast<int>(pl.vertices.size()); ++q) {
      const BoundaryVertex& v = pl.vertices[q];
      CurvatureSample cs;
      cs.position = v.position;
      cs.k = kappa[s][q];
      cs.grad_norm = norm(as_point(v.gradient));
      const Jet jet = fit_positive_jet(u, v.position);
      if (jet.degree >= 2) {
        const Vec2 N = v.normal, T{-N[1], N[0]};
        cs.u_NN = jet.hess.quad(N, N);
        cs.u_NT = jet.hess.quad(N, T);
      }
      const double turn = turning_angle(pl, q);
      cs.regular = jet.degree >= 2 && std::isfinite(cs.k) && std::isfinite(turn) && turn < kMaxTurn &&
                   cs.grad_norm >= 0.8 * ls && cs.grad_norm <= 1.2 * ls;
      if (cs.regular) {
        ++rep.regular;
        rep.sup_u_NT = std::max(rep.sup_u_NT, std::abs(cs.u_NT));
        const double err = std::abs(factor * (-cs.u_NN) - cs.k);
        rep.sup_identity_error = std::max(rep.sup_identity_error, err);
        if (std::abs(cs.k) > 1e-12) rep.sup_relative_error = std::max(rep.sup_relative_error, err / std::abs(cs.k));
        rep.min_minus_u_NN = std::min(rep.min_minus_u_NN, -cs.u_NN);
      }
      rep.samples.push_back(cs);
    }
  }
  if (rep.regular == 0) rep.min_minus_u_NN = kNaN;
  return rep;
}

}  // namespace bernoulli
