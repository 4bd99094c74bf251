#include "bernoulli/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

namespace bernoulli {

ScalarField level_field(const ScalarField& u) {
  const auto& g = u.grid();
  ScalarField phi = u;
  using Dirs = std::array<std::array<int, 2>, 4>;
  constexpr Dirs axes{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  constexpr Dirs diagonals{{{1, 1}, {-1, -1}, {-1, 1}, {1, -1}}};
  auto positive = [&](int i, int j) { return i >= 0 && j >= 0 && i < g.nx() && j < g.ny() && u(i, j) > 0.0; };
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      if (u(i, j) != 0.0) continue;
      // diagonal neighbours only when no axis neighbour is positive
      for (const Dirs* dirs : {&axes, &diagonals}) {
        double sum = 0.0;
        int count = 0;
        double scale = 0.0;
        for (auto [di, dj] : *dirs) {
          const int pi = i + di, pj = j + dj;
          if (!positive(pi, pj)) continue;
          scale = std::max(scale, u(pi, pj));
          if (!positive(pi + di, pj + dj)) continue;
          sum += 2.0 * u(pi, pj) - u(pi + di, pj + dj);
          ++count;
        }
        if (scale == 0.0) continue;
        const double cap = -1e-8 * scale;
        phi(i, j) = count > 0 ? std::min(sum / count, cap) : cap;
        break;
      }
    }
  return phi;
}

Jet fit_positive_jet(const ScalarField& u, Point p, double radius_cells) {
  const auto& g = u.grid();
  const double h = g.spacing();
  const double fx = (p.x - g.origin().x) / h;
  const double fy = (p.y - g.origin().y) / h;
  const int i0 = std::max(0, static_cast<int>(std::floor(fx - radius_cells)));
  const int i1 = std::min(g.nx() - 1, static_cast<int>(std::ceil(fx + radius_cells)));
  const int j0 = std::max(0, static_cast<int>(std::floor(fy - radius_cells)));
  const int j1 = std::min(g.ny() - 1, static_cast<int>(std::ceil(fy + radius_cells)));

  std::vector<std::array<double, 3>> pts;
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) {
      if (!(u(i, j) > 0.0)) continue;
      const double X = i - fx, Y = j - fy;
      if (X * X + Y * Y > radius_cells * radius_cells) continue;
      pts.push_back({X, Y, u(i, j)});
    }

  Jet jet;
  jet.samples = static_cast<int>(pts.size());
  for (int degree : {3, 2, 1}) {
    const int terms = (degree + 1) * (degree + 2) / 2;
    if (jet.samples < terms + degree * 2) continue;
    Eigen::MatrixXd A(jet.samples, terms);
    Eigen::VectorXd b(jet.samples);
    for (int r = 0; r < jet.samples; ++r) {
      const double X = pts[r][0], Y = pts[r][1];
      int c = 0;
      for (int d = 0; d <= degree; ++d)
        for (int k = 0; k <= d; ++k) A(r, c++) = std::pow(X, d - k) * std::pow(Y, k);
      b(r) = pts[r][2];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < terms) continue;
    const Eigen::VectorXd c = qr.solve(b);
    jet.degree = degree;
    jet.value = c(0);
    jet.grad = {c(1) / h, c(2) / h};
    if (degree >= 2) jet.hess = {2.0 * c(3) / (h * h), c(4) / (h * h), 2.0 * c(5) / (h * h)};
    return jet;
  }
  return jet;
}

std::size_t FreeBoundary::vertex_count() const {
  std::size_t n = 0;
  for (const auto& s : segments) n += s.vertices.size();
  return n;
}

double FreeBoundary::length() const {
  double l = 0.0;
  for (const auto& s : segments)
    for (const auto& v : s.vertices) l += v.weight;
  return l;
}

const BoundaryVertex& FreeBoundary::nearest(Point p) const {
  const BoundaryVertex* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& s : segments)
    for (const auto& v : s.vertices) {
      const double d = norm(v.position - p);
      if (d < best_d) {
        best_d = d;
        best = &v;
      }
    }
  if (!best) throw InvalidInput("free boundary is empty");
  return *best;
}

namespace {

// Corner k of cell (i, j), counter-clockwise from the lower left.
constexpr std::array<std::array<int, 2>, 4> kCorner{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
// Edge k joins corners k and k + 1 (mod 4).

struct CellView {
  std::array<Point, 4> corner;
  std::array<double, 4> phi;
  std::array<bool, 4> in;
  int mask = 0;

  CellView(const ScalarField& level, int i, int j) {
    for (int k = 0; k < 4; ++k) {
      const int ci = i + kCorner[k][0], cj = j + kCorner[k][1];
      corner[k] = level.grid().node(ci, cj);
      phi[k] = level(ci, cj);
      in[k] = phi[k] > 0.0;
      if (in[k]) mask |= 1 << k;
    }
  }
  bool crosses(int e) const { return in[e] != in[(e + 1) % 4]; }
  Point edge_point(int e) const {
    const int a = e, b = (e + 1) % 4;
    const double t = phi[a] / (phi[a] - phi[b]);
    return corner[a] + t * (corner[b] - corner[a]);
  }
  bool saddle() const { return mask == 0b0101 || mask == 0b1010; }
  double centre() const { return 0.25 * (phi[0] + phi[1] + phi[2] + phi[3]); }
};

struct CellSegment {
  int edge_a;
  int edge_b;
  int isolated_corner;  // -1 when the cut is not a saddle piece
};

// Crossing-edge pairs for one cell. Saddles resolved by the centre value.
int cell_segments(const CellView& c, std::array<CellSegment, 2>& out) {
  if (c.saddle()) {
    const bool centre_in = c.centre() > 0.0;
    // Corners isolated by the two cuts: the ones whose sign differs from the centre.
    int n = 0;
    for (int k = 0; k < 4; ++k)
      if (c.in[k] != centre_in) out[n++] = {(k + 3) % 4, k, k};
    return n;
  }
  int first = -1;
  for (int e = 0; e < 4; ++e)
    if (c.crosses(e)) {
      if (first < 0) {
        first = e;
      } else {
        out[0] = {first, e, -1};
        return 1;
      }
    }
  return 0;
}

// Orients a -> b so that the positive set lies on the left.
bool positive_on_left(const CellView& c, const CellSegment& s, Point a, Point b) {
  const Point ab = b - a;
  if (s.isolated_corner >= 0) {
    const double sign = c.in[s.isolated_corner] ? 1.0 : -1.0;
    return sign * cross(ab, c.corner[s.isolated_corner] - a) > 0.0;
  }
  double acc = 0.0;
  for (int k = 0; k < 4; ++k) acc += (c.in[k] ? 1.0 : -1.0) * cross(ab, c.corner[k] - a);
  return acc > 0.0;
}

// Global id of edge e of cell (i, j).
long edge_id(const GridSpec& g, int i, int j, int e) {
  // Horizontal edge from node (i, j): 2 * index; vertical: 2 * index + 1.
  switch (e) {
    case 0: return 2L * static_cast<long>(g.index(i, j));
    case 1: return 2L * static_cast<long>(g.index(i + 1, j)) + 1;
    case 2: return 2L * static_cast<long>(g.index(i, j + 1));
    default: return 2L * static_cast<long>(g.index(i, j)) + 1;
  }
}

Vec2 left_normal(Point t) {
  const double n = norm(t);
  if (n == 0.0) return {0.0, 0.0};
  return {-t.y / n, t.x / n};
}

}  // namespace

FreeBoundary extract_free_boundary(const ScalarField& u) {
  const auto& g = u.grid();
  const ScalarField level = level_field(u);

  std::unordered_map<long, Point> position;
  std::unordered_map<long, long> next;
  std::unordered_map<long, long> prev;

  for (int j = 0; j + 1 < g.ny(); ++j)
    for (int i = 0; i + 1 < g.nx(); ++i) {
      const CellView c(level, i, j);
      if (c.mask == 0 || c.mask == 0b1111) continue;
      std::array<CellSegment, 2> segs;
      const int n = cell_segments(c, segs);
      for (int s = 0; s < n; ++s) {
        long ida = edge_id(g, i, j, segs[s].edge_a);
        long idb = edge_id(g, i, j, segs[s].edge_b);
        Point a = c.edge_point(segs[s].edge_a);
        Point b = c.edge_point(segs[s].edge_b);
        if (!positive_on_left(c, segs[s], a, b)) {
          std::swap(ida, idb);
          std::swap(a, b);
        }
        position[ida] = a;
        position[idb] = b;
        next[ida] = idb;
        prev[idb] = ida;
      }
    }

  // Deterministic traversal order: sort vertex ids.
  std::vector<long> ids;
  ids.reserve(position.size());
  for (const auto& kv : position) ids.push_back(kv.first);
  std::sort(ids.begin(), ids.end());

  std::unordered_map<long, bool> used;
  std::vector<std::pair<std::vector<long>, bool>> chains;
  auto walk = [&](long start, bool closed) {
    std::vector<long> chain;
    long cur = start;
    while (true) {
      chain.push_back(cur);
      used[cur] = true;
      auto it = next.find(cur);
      if (it == next.end() || it->second == start || used[it->second]) break;
      cur = it->second;
    }
    chains.emplace_back(std::move(chain), closed);
  };
  for (long id : ids)
    if (!prev.count(id) && !used[id]) walk(id, false);
  for (long id : ids)
    if (!used[id]) walk(id, true);

  FreeBoundary fb;
  for (auto& [chain, closed] : chains) {
    Polyline line;
    line.closed = closed;
    const std::size_t n = chain.size();
    std::vector<Point> pts(n);
    for (std::size_t k = 0; k < n; ++k) pts[k] = position[chain[k]];
    for (std::size_t k = 0; k < n; ++k) {
      BoundaryVertex v;
      v.position = pts[k];
      const bool has_prev = closed || k > 0;
      const bool has_next = closed || k + 1 < n;
      const Point p_prev = has_prev ? pts[(k + n - 1) % n] : pts[k];
      const Point p_next = has_next ? pts[(k + 1) % n] : pts[k];
      v.weight = 0.5 * (norm(pts[k] - p_prev) + norm(p_next - pts[k]));
      const Jet jet = fit_positive_jet(u, v.position);
      v.gradient = jet.ok() ? jet.grad : Vec2{0.0, 0.0};
      const double gn = std::hypot(v.gradient[0], v.gradient[1]);
      if (gn > 1e-12) {
        v.normal = {v.gradient[0] / gn, v.gradient[1] / gn};
      } else {
        v.normal = left_normal(p_next - p_prev);
      }
      line.vertices.push_back(v);
    }
    if (n == 1) line.vertices[0].weight = std::numeric_limits<double>::min();
    fb.segments.push_back(std::move(line));
  }
  return fb;
}

double disk_triangle_area(Point a, Point b, double r) {
  const Point d = b - a;
  const double A = dot(d, d);
  if (A == 0.0) return 0.0;
  const double B = 2.0 * dot(a, d);
  const double C = dot(a, a) - r * r;
  std::array<double, 4> ts{0.0, 0.0, 0.0, 1.0};
  int nt = 1;
  const double disc = B * B - 4.0 * A * C;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    for (double t : {(-B - sq) / (2.0 * A), (-B + sq) / (2.0 * A)})
      if (t > 0.0 && t < 1.0) ts[nt++] = t;
  }
  ts[nt++] = 1.0;
  double area = 0.0;
  for (int k = 0; k + 1 < nt; ++k) {
    const Point p = a + ts[k] * d;
    const Point q = a + ts[k + 1] * d;
    const Point m = 0.5 * (p + q);
    if (dot(m, m) <= r * r) {
      area += 0.5 * cross(p, q);
    } else {
      area += 0.5 * r * r * std::atan2(cross(p, q), dot(p, q));
    }
  }
  return area;
}

namespace {

double polygon_area(const std::vector<Point>& poly) {
  double a = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) a += cross(poly[k], poly[(k + 1) % poly.size()]);
  return 0.5 * a;
}

double polygon_disk_area(const std::vector<Point>& poly, Point centre, double r) {
  double a = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k)
    a += disk_triangle_area(poly[k] - centre, poly[(k + 1) % poly.size()] - centre, r);
  return a;
}

// Positive polygons of one cell, counter-clockwise.
int cell_polygons(const CellView& c, std::array<std::vector<Point>, 2>& out) {
  out[0].clear();
  out[1].clear();
  if (c.saddle() && !(c.centre() > 0.0)) {
    int n = 0;
    for (int k = 0; k < 4; ++k)
      if (c.in[k]) out[n++] = {c.corner[k], c.edge_point(k), c.edge_point((k + 3) % 4)};
    return n;
  }
  for (int k = 0; k < 4; ++k) {
    if (c.in[k]) out[0].push_back(c.corner[k]);
    if (c.crosses(k)) out[0].push_back(c.edge_point(k));
  }
  return 1;
}

}  // namespace

double cell_positive_area(const ScalarField& level, int i, int j) {
  const CellView c(level, i, j);
  if (c.mask == 0) return 0.0;
  const double h = level.grid().spacing();
  if (c.mask == 0b1111) return h * h;
  std::array<std::vector<Point>, 2> polys;
  const int n = cell_polygons(c, polys);
  double a = 0.0;
  for (int k = 0; k < n; ++k) a += polygon_area(polys[k]);
  return a;
}

double positivity_measure_level(const ScalarField& level, Point centre, double r) {
  const auto& g = level.grid();
  if (!(r > 0.0)) throw InvalidInput("radius must be positive");
  if (!g.contains_disk(centre, r)) throw InvalidInput("ball exceeds grid extent");
  const double h = g.spacing();
  const int i0 = std::max(0, static_cast<int>(std::floor((centre.x - r - g.origin().x) / h)));
  const int i1 = std::min(g.nx() - 2, static_cast<int>(std::floor((centre.x + r - g.origin().x) / h)));
  const int j0 = std::max(0, static_cast<int>(std::floor((centre.y - r - g.origin().y) / h)));
  const int j1 = std::min(g.ny() - 2, static_cast<int>(std::floor((centre.y + r - g.origin().y) / h)));
  const double r2 = r * r;
  double area = 0.0;
  std::array<std::vector<Point>, 2> polys;
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) {
      const Point lo = g.node(i, j);
      const Point hi = g.node(i + 1, j + 1);
      const double dx = std::max({lo.x - centre.x, 0.0, centre.x - hi.x});
      const double dy = std::max({lo.y - centre.y, 0.0, centre.y - hi.y});
      if (dx * dx + dy * dy >= r2) continue;
      const CellView c(level, i, j);
      if (c.mask == 0) continue;
      bool inside = true;
      for (const Point& p : c.corner) {
        const Point d = p - centre;
        if (dot(d, d) > r2) inside = false;
      }
      if (c.mask == 0b1111 && inside) {
        area += h * h;
        continue;
      }
      const int n = cell_polygons(c, polys);
      for (int k = 0; k < n; ++k)
        area += inside ? polygon_area(polys[k]) : polygon_disk_area(polys[k], centre, r);
    }
  return area;
}

double positivity_measure(const ScalarField& u, Point centre, double r) {
  return positivity_measure_level(level_field(u), centre, r);
}

}  // namespace bernoulli
