#include "bernoulli/minimizer.hpp"

#include <Eigen/CholmodSupport>
#include <Eigen/SparseCore>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace bernoulli {

void Problem::validate() const {
  if (!boundary_data) throw InvalidInput("problem has no boundary data");
  if (!(params.lambda >= 0.0) || !std::isfinite(params.lambda))
    throw InvalidInput("lambda must be a nonnegative number");
  const auto kinds = classify_nodes(*this);
  bool any_free = false;
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      const NodeKind k = kinds[grid.index(i, j)];
      any_free |= k == NodeKind::Free;
      if (k != NodeKind::Boundary) continue;
      const double g = boundary_data(grid.node(i, j));
      if (!std::isfinite(g) || g < 0.0) throw InvalidInput("boundary data must be finite and >= 0");
    }
  if (!any_free) throw InvalidInput("domain has no interior nodes");
}

std::vector<NodeKind> classify_nodes(const Problem& p) {
  const auto& g = p.grid;
  std::vector<NodeKind> kind(g.size(), NodeKind::Outside);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      if (!p.domain.contains(g.node(i, j))) continue;
      bool edge = i == 0 || j == 0 || i == g.nx() - 1 || j == g.ny() - 1;
      if (!edge) {
        edge = !p.domain.contains(g.node(i + 1, j)) || !p.domain.contains(g.node(i - 1, j)) ||
               !p.domain.contains(g.node(i, j + 1)) || !p.domain.contains(g.node(i, j - 1));
      }
      kind[g.index(i, j)] = edge ? NodeKind::Boundary : NodeKind::Free;
    }
  return kind;
}

FreeBoundary restrict_free_boundary(const FreeBoundary& fb, const Domain& domain, double margin) {
  FreeBoundary out;
  for (const auto& line : fb.segments) {
    const auto& v = line.vertices;
    const std::size_t n = v.size();
    std::vector<char> keep(n);
    bool all = true;
    for (std::size_t k = 0; k < n; ++k) {
      keep[k] = domain.depth(v[k].position) > margin;
      all &= keep[k] != 0;
    }
    if (all) {
      out.segments.push_back(line);
      continue;
    }
    // Start a closed loop just after a dropped vertex so runs do not wrap.
    std::size_t start = 0;
    if (line.closed)
      while (keep[start]) ++start;
    Polyline piece;
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t k = (start + s) % n;
      if (keep[k]) {
        piece.vertices.push_back(v[k]);
        continue;
      }
      if (piece.vertices.size() >= 2) out.segments.push_back(piece);
      piece.vertices.clear();
    }
    if (piece.vertices.size() >= 2) out.segments.push_back(piece);
  }
  return out;
}

double smoothed_heaviside(double x, double eps) {
  if (x <= 0.0) return 0.0;
  if (x >= eps) return 1.0;
  const double s = x / eps;
  return s * s * (3.0 - 2.0 * s);
}

double smoothed_heaviside_d1(double x, double eps) {
  if (x <= 0.0 || x >= eps) return 0.0;
  const double s = x / eps;
  return 6.0 * s * (1.0 - s) / eps;
}

double smoothed_heaviside_d2(double x, double eps) {
  if (x <= 0.0 || x >= eps) return 0.0;
  const double s = x / eps;
  return 6.0 * (1.0 - 2.0 * s) / (eps * eps);
}

double sharp_threshold_fraction(const EnergyDensity& d, double lambda) {
  if (!(lambda > 0.0)) return 0.0;
  const double target = 1.0 / lambda_star(d, lambda);
  // Integral over [s0, 1] of ds / u'(s), with u'(s) = lambda*(lambda H(s)),
  // in the variable z = log s where the integrand is bounded.
  auto integral = [&](double s0) {
    const int n = 400;
    const double z0 = std::log(s0);
    const double dz = -z0 / n;
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double s = std::exp(z0 + k * dz);
      const double slope = lambda_star(d, lambda * s * s * (3.0 - 2.0 * s));
      const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      acc += w * s / slope;
    }
    return acc * dz / 3.0;
  };
  double lo = 1e-9, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (integral(mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Corner-gradient stencils of a cell (corners counter-clockwise from lower left).
constexpr std::array<std::array<std::array<double, 4>, 2>, 4> kCornerStencil{{
    {{{-1, 1, 0, 0}, {-1, 0, 0, 1}}},
    {{{-1, 1, 0, 0}, {0, -1, 1, 0}}},
    {{{0, 0, 1, -1}, {0, -1, 1, 0}}},
    {{{0, 0, 1, -1}, {-1, 0, 0, 1}}},
}};

// Smoothed functional sum_cells F(|grad u|^2) h^2 + lambda sum_nodes w_n H_eps(u_n).
class PenalizedFunctional {
 public:
  PenalizedFunctional(const Problem& p, const std::vector<NodeKind>& kind)
      : p_(p), h_(p.grid.spacing()), unknown_(p.grid.size(), -1), weight_(p.grid.size(), 0.0) {
    const auto& g = p.grid;
    for (std::size_t n = 0; n < g.size(); ++n)
      if (kind[n] == NodeKind::Free) unknown_[n] = n_unknowns_++;
    for (int j = 0; j + 1 < g.ny(); ++j)
      for (int i = 0; i + 1 < g.nx(); ++i) {
        const std::array<int, 4> c{static_cast<int>(g.index(i, j)), static_cast<int>(g.index(i + 1, j)),
                                   static_cast<int>(g.index(i + 1, j + 1)),
                                   static_cast<int>(g.index(i, j + 1))};
        bool inside = true;
        for (int n : c) inside &= kind[n] != NodeKind::Outside;
        if (!inside) continue;
        cells_.push_back(c);
        for (int n : c) weight_[n] += 0.25 * h_ * h_;
      }
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(cells_.size() * 16);
    for (const auto& c : cells_)
      for (int a : c)
        for (int b : c)
          if (unknown_[a] >= 0 && unknown_[b] >= 0) trip.emplace_back(unknown_[a], unknown_[b], 0.0);
    for (int k = 0; k < n_unknowns_; ++k) trip.emplace_back(k, k, 0.0);
    hess_.resize(n_unknowns_, n_unknowns_);
    hess_.setFromTriplets(trip.begin(), trip.end());
    hess_.makeCompressed();
    slots_.resize(cells_.size());
    for (std::size_t ci = 0; ci < cells_.size(); ++ci)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          const int ua = unknown_[cells_[ci][a]], ub = unknown_[cells_[ci][b]];
          slots_[ci][4 * a + b] =
              (ua >= 0 && ub >= 0) ? static_cast<int>(&hess_.coeffRef(ua, ub) - hess_.valuePtr()) : -1;
        }
    diag_slot_.resize(n_unknowns_);
    for (int k = 0; k < n_unknowns_; ++k)
      diag_slot_[k] = static_cast<int>(&hess_.coeffRef(k, k) - hess_.valuePtr());
  }

  int unknowns() const { return n_unknowns_; }
  int unknown(std::size_t n) const { return unknown_[n]; }
  double weight(std::size_t n) const { return weight_[n]; }

  double value(const std::vector<double>& u, double eps) const {
    double e = 0.0;
    const EnergyDensity& d = p_.params.density;
    for (const auto& c : cells_) {
      const double v[4] = {u[c[0]], u[c[1]], u[c[2]], u[c[3]]};
      e += cell_dirichlet_energy(d, v, h_);
    }
    double pen = 0.0;
    for (std::size_t n = 0; n < u.size(); ++n)
      if (weight_[n] > 0.0) pen += weight_[n] * smoothed_heaviside(u[n], eps);
    return e + p_.params.lambda * pen;
  }

  // Gradient over unknowns and the convex energy Hessian plus the penalty
  // curvature, assembled into hess_.
  void linearize(const std::vector<double>& u, double eps, Eigen::VectorXd& grad) {
    penalty_curvature_.assign(n_unknowns_, 0.0);
    const EnergyDensity& d = p_.params.density;
    grad.setZero(n_unknowns_);
    std::fill(hess_.valuePtr(), hess_.valuePtr() + hess_.nonZeros(), 0.0);
    double* H = hess_.valuePtr();
    for (std::size_t ci = 0; ci < cells_.size(); ++ci) {
      const auto& c = cells_[ci];
      const double v[4] = {u[c[0]], u[c[1]], u[c[2]], u[c[3]]};
      for (const auto& st : kCornerStencil) {
        double gx = 0.0, gy = 0.0;
        for (int a = 0; a < 4; ++a) {
          gx += st[0][a] * v[a];
          gy += st[1][a] * v[a];
        }
        gx /= h_;
        gy /= h_;
        const double t = gx * gx + gy * gy;
        const double f1 = d.dF(t), f2 = d.d2F(t);
        double q[4];
        for (int a = 0; a < 4; ++a) q[a] = gx * st[0][a] + gy * st[1][a];
        for (int a = 0; a < 4; ++a) {
          const int ua = unknown_[c[a]];
          if (ua < 0) continue;
          grad[ua] += 0.5 * h_ * f1 * q[a];
          for (int b = 0; b < 4; ++b) {
            const int slot = slots_[ci][4 * a + b];
            if (slot < 0) continue;
            H[slot] += 0.25 * (2.0 * f1 * (st[0][a] * st[0][b] + st[1][a] * st[1][b]) +
                               4.0 * f2 * q[a] * q[b]);
          }
        }
      }
    }
    const double lam = p_.params.lambda;
    for (std::size_t n = 0; n < u.size(); ++n) {
      const int k = unknown_[n];
      if (k < 0) continue;
      grad[k] += lam * weight_[n] * smoothed_heaviside_d1(u[n], eps);
      penalty_curvature_[k] = lam * weight_[n] * smoothed_heaviside_d2(u[n], eps);
      H[diag_slot_[k]] += penalty_curvature_[k];
    }
  }

  // Drops the negative penalty curvature from the assembled Hessian.
  void convexify() {
    double* H = hess_.valuePtr();
    for (int k = 0; k < n_unknowns_; ++k)
      if (penalty_curvature_[k] < 0.0) H[diag_slot_[k]] -= penalty_curvature_[k];
  }

  SpMat& hessian() { return hess_; }

 private:
  const Problem& p_;
  double h_;
  std::vector<int> unknown_;
  std::vector<double> weight_;
  int n_unknowns_ = 0;
  std::vector<std::array<int, 4>> cells_;
  std::vector<std::array<int, 16>> slots_;
  std::vector<int> diag_slot_;
  std::vector<double> penalty_curvature_;
  SpMat hess_;
};

}  // namespace

SolveResult minimize_penalized(const Problem& p, const SolverConfig& cfg) {
  p.validate();
  const auto& g = p.grid;
  const double h = g.spacing();
  const double eps_min = std::max(cfg.eps_min, 2.0 * h);
  if (!std::isfinite(cfg.eps0) || !(cfg.eps_factor > 0.0 && cfg.eps_factor < 1.0) ||
      !(cfg.tau_grad > 0.0) || !(cfg.tau_polish > 0.0) || cfg.max_iterations <= 0)
    throw InvalidInput("invalid solver configuration");

  const auto kind = classify_nodes(p);
  PenalizedFunctional J(p, kind);

  // Initial state: data on the boundary, zero inside.
  std::vector<double> u(g.size(), 0.0);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      if (kind[g.index(i, j)] == NodeKind::Boundary) u[g.index(i, j)] = p.boundary_data(g.node(i, j));

  SolveResult result{ScalarField(g), {}, {}, true, 0.0, 0.0, {}, {}};
  result.converged = true;
  Eigen::CholmodSupernodalLLT<SpMat> solver;
  solver.cholmod().print = 0;
  solver.analyzePattern(J.hessian());
  Eigen::VectorXd grad, step;
  std::vector<double> trial(u.size());

  std::vector<double> schedule;
  double eps_start = cfg.eps0;
  if (!(eps_start > 0.0)) {
    // Twice sup g keeps the first stage convex on 0 <= u <= sup g.
    for (std::size_t n = 0; n < g.size(); ++n) eps_start = std::max(eps_start, 2.0 * u[n]);
  }
  for (double eps = std::max(eps_start, eps_min); ; eps *= cfg.eps_factor) {
    if (eps <= eps_min * (1.0 + 1e-12)) {
      schedule.push_back(eps_min);
      break;
    }
    schedule.push_back(eps);
  }

  for (double eps : schedule) {
    std::vector<double> history{J.value(u, eps)};
    bool stage_ok = false;
    double stationarity = 0.0;
    for (int it = 0; it < cfg.max_iterations; ++it) {
      J.linearize(u, eps, grad);
      stationarity = 0.0;
      for (std::size_t n = 0; n < u.size(); ++n) {
        const int k = J.unknown(n);
        if (k >= 0) stationarity = std::max(stationarity, std::abs(grad[k]) / J.weight(n));
      }
      if (stationarity <= cfg.tau_grad) {
        stage_ok = true;
        break;
      }
      // Exact Newton step when the Hessian is positive definite and the step
      // descends, else the convexified one.
      bool descent = false;
      solver.factorize(J.hessian());
      if (solver.info() == Eigen::Success) {
        step = -solver.solve(grad);
        descent = step.allFinite() && grad.dot(step) < 0.0;
      }
      if (!descent) {
        J.convexify();
        solver.factorize(J.hessian());
        if (solver.info() != Eigen::Success) break;
        step = -solver.solve(grad);
      }
      const double slope = grad.dot(step);
      const double e0 = history.back();
      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
        trial = u;
        for (std::size_t n = 0; n < u.size(); ++n) {
          const int k = J.unknown(n);
          if (k >= 0) trial[n] += alpha * step[k];
        }
        const double e1 = J.value(trial, eps);
        // Below rounding of the energy the sufficient-decrease test is noise;
        // the full preconditioned step is then taken on the gradient alone.
        const bool tiny = -slope <= 1e-13 * std::max(1.0, std::abs(e0)) && ls == 0;
        if (tiny || e1 <= e0 + 1e-4 * alpha * slope) {
          u.swap(trial);
          history.push_back(e1);
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        // No decrease representable in floating point: stationary to rounding.
        stage_ok = stationarity <= 1e3 * cfg.tau_grad;
        break;
      }
    }
    for (double& v : u) v = std::max(v, 0.0);
    result.stage_eps.push_back(eps);
    result.energy_history.push_back(std::move(history));
    result.grad_norm = stationarity;
    if (!stage_ok && eps == schedule.back()) result.converged = false;
  }

  ScalarField smooth(g, u);
  if (!cfg.polish) {
    result.u = smooth;
    result.free_boundary = restrict_free_boundary(extract_free_boundary(result.u), p.domain, h);
    return result;
  }

  result.threshold = sharp_threshold_fraction(p.params.density, p.params.lambda) * schedule.back();
  ScalarField level(g);
  for (std::size_t n = 0; n < g.size(); ++n)
    level.values()[n] = kind[n] == NodeKind::Outside ? -result.threshold : u[n] - result.threshold;
  result.u = polish_on_level(smooth, level, p, cfg, &result.polish);
  result.converged = result.converged && result.polish.converged;
  result.free_boundary = restrict_free_boundary(extract_free_boundary(result.u), p.domain, h);
  return result;
}

namespace {

// Per-unknown stencil data for the polishing sweeps.
struct PolishNode {
  int n;
  std::array<int, 4> axis;  // E, W, N, S node indices
  // Ghost value across the interface: ghost * u_n + sum of far_coef * u[far].
  // Linear: ghost = 1 - 1/theta. Cubic: Lagrange weights at +1 through the
  // interface point theta and the nodes 0, -1, -2 along the axis.
  std::array<double, 4> ghost;
  std::array<std::array<int, 2>, 4> far;
  std::array<std::array<double, 2>, 4> far_coef;
  std::array<bool, 4> real;
  std::array<int, 4> diag;      // NE, NW, SE, SW
  std::uint8_t quadrants = 0;   // bit q set when quadrant q's stencil is all real
};

// Quadrant q: (s, t) signs, its axis neighbours and diagonal.
constexpr std::array<std::array<int, 2>, 4> kQuadSign{{{1, 1}, {-1, 1}, {1, -1}, {-1, -1}}};
constexpr std::array<std::array<int, 2>, 4> kQuadAxis{{{0, 2}, {1, 2}, {0, 3}, {1, 3}}};

}  // namespace

// Root in (0, 1] of the cubic through level samples at 0, -1, -2, -3 along an
// axis, started from the linear crossing; NaN when Newton does not settle.
// A root slightly beyond the nonpositive node at +1 is clamped to it, and a
// tangential (double) root is reached by the slower linear convergence.
double cubic_crossing(const double (&f)[4], double start) {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  // Newton form on nodes 0, -1, -2, -3
  const double d1 = f[0] - f[1], d2 = (f[0] - 2 * f[1] + f[2]) / 2.0,
               d3 = (f[0] - 3 * f[1] + 3 * f[2] - f[3]) / 6.0;
  auto P = [&](double t) { return f[0] + t * (d1 + (t + 1) * (d2 + (t + 2) * d3)); };
  auto dP = [&](double t) { return d1 + (2 * t + 1) * d2 + (3 * t * t + 6 * t + 2) * d3; };
  double t = start;
  for (int it = 0; it < 100; ++it) {
    const double slope = dP(t);
    if (!(slope < 0.0)) return t >= 1.0 - 1e-6 && P(t) >= 0.0 ? 1.0 : kNaN;
    const double next = t - P(t) / slope;
    if (!(next > 0.0 && next <= 1.5)) return kNaN;
    if (std::abs(next - t) <= 1e-13) return std::min(next, 1.0);
    t = next;
  }
  return std::abs(P(t)) <= 1e-12 * std::abs(f[0]) ? std::min(t, 1.0) : kNaN;
}

ScalarField polish_on_level(const ScalarField& u0, const ScalarField& level, const Problem& p,
                            const SolverConfig& cfg, PolishReport* report, int interface_order) {
  if (interface_order != 1 && interface_order != 3) throw InvalidInput("interface order must be 1 or 3");
  const auto& g = p.grid;
  if (!(u0.grid() == g) || !(level.grid() == g)) throw InvalidInput("grid mismatch in polish");
  const double h = g.spacing();
  const auto kind = classify_nodes(p);

  std::vector<double> v(g.size(), 0.0);
  std::vector<char> real(g.size(), 0);  // carries its own value in the stencil
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t n = g.index(i, j);
      if (kind[n] == NodeKind::Boundary) {
        v[n] = p.boundary_data(g.node(i, j));
        real[n] = level.values()[n] > 0.0;
      } else if (kind[n] == NodeKind::Free && level.values()[n] > 0.0) {
        v[n] = u0.values()[n];
        real[n] = 1;
      }
    }

  std::vector<PolishNode> nodes;
  const double theta_min = 1e-6;
  for (int j = 1; j + 1 < g.ny(); ++j)
    for (int i = 1; i + 1 < g.nx(); ++i) {
      const std::size_t n = g.index(i, j);
      if (kind[n] != NodeKind::Free || !(level.values()[n] > 0.0)) continue;
      PolishNode pn;
      pn.n = static_cast<int>(n);
      pn.axis = {static_cast<int>(g.index(i + 1, j)), static_cast<int>(g.index(i - 1, j)),
                 static_cast<int>(g.index(i, j + 1)), static_cast<int>(g.index(i, j - 1))};
      pn.diag = {static_cast<int>(g.index(i + 1, j + 1)), static_cast<int>(g.index(i - 1, j + 1)),
                 static_cast<int>(g.index(i + 1, j - 1)), static_cast<int>(g.index(i - 1, j - 1))};
      const double phi_n = level.values()[n];
      constexpr int kStep[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      for (int k = 0; k < 4; ++k) {
        const int q = pn.axis[k];
        pn.real[k] = real[q];
        pn.far[k] = {-1, -1};
        pn.far_coef[k] = {0.0, 0.0};
        if (real[q]) {
          pn.ghost[k] = 0.0;
          continue;
        }
        double theta = std::max(phi_n / (phi_n - level.values()[q]), theta_min);
        pn.ghost[k] = 1.0 - 1.0 / theta;
        if (interface_order == 1) continue;
        // nodes behind n, away from the interface
        int back[3];
        bool ok = true;
        double f[4] = {phi_n, 0, 0, 0};
        for (int s = 1; s <= 3 && ok; ++s) {
          const int bi = i - s * kStep[k][0], bj = j - s * kStep[k][1];
          ok = bi >= 0 && bj >= 0 && bi < g.nx() && bj < g.ny() && real[g.index(bi, bj)];
          if (ok) {
            back[s - 1] = static_cast<int>(g.index(bi, bj));
            f[s] = level.values()[back[s - 1]];
          }
        }
        if (!ok) continue;
        const double t = cubic_crossing(f, theta);
        if (std::isnan(t)) continue;
        theta = std::max(t, theta_min);
        pn.ghost[k] = -3.0 * (1.0 - theta) / theta;
        pn.far[k] = {back[0], back[1]};
        pn.far_coef[k] = {3.0 * (1.0 - theta) / (1.0 + theta), -(1.0 - theta) / (2.0 + theta)};
      }
      for (int q = 0; q < 4; ++q)
        if (pn.real[kQuadAxis[q][0]] && pn.real[kQuadAxis[q][1]] && real[pn.diag[q]])
          pn.quadrants |= 1 << q;
      nodes.push_back(pn);
    }

  const EnergyDensity& d = p.params.density;
  const bool linear = d.linear;
  // Returns (D, R): the discrete operator at pn is D v_n + R, scaled by h^2.
  auto stencil = [&](const PolishNode& pn) -> std::pair<double, double> {
    const double un = v[pn.n];
    double val[4];
    double far[4];
    for (int k = 0; k < 4; ++k) {
      far[k] = 0.0;
      for (int s = 0; s < 2; ++s)
        if (pn.far[k][s] >= 0) far[k] += pn.far_coef[k][s] * v[pn.far[k][s]];
      val[k] = pn.real[k] ? v[pn.axis[k]] : pn.ghost[k] * un + far[k];
    }
    double axx = 1.0, ayy = 1.0, axy = 0.0;
    if (!linear) {
      const double ux = (val[0] - val[1]) / (2.0 * h), uy = (val[2] - val[3]) / (2.0 * h);
      const double t = ux * ux + uy * uy;
      const double f1 = d.dF(t), f2 = d.d2F(t);
      axx = f1 + 2.0 * f2 * ux * ux;
      ayy = f1 + 2.0 * f2 * uy * uy;
      axy = 2.0 * f2 * ux * uy;
    }
    double D = -2.0 * axx - 2.0 * ayy;
    double R = 0.0;
    for (int k = 0; k < 4; ++k) {
      const double a = k < 2 ? axx : ayy;
      if (pn.real[k]) {
        R += a * v[pn.axis[k]];
      } else {
        D += a * pn.ghost[k];
        R += a * far[k];
      }
    }
    if (axy != 0.0 && pn.quadrants) {
      // Mean of the one-sided quadrant stencils for u_xy.
      int used = 0;
      double cd = 0.0, cr = 0.0;
      for (int q = 0; q < 4; ++q) {
        if (!(pn.quadrants >> q & 1)) continue;
        const double st = kQuadSign[q][0] * kQuadSign[q][1];
        cr += st * (v[pn.diag[q]] - v[pn.axis[kQuadAxis[q][0]]] - v[pn.axis[kQuadAxis[q][1]]]);
        cd += st;
        ++used;
      }
      D += 2.0 * axy * cd / used;
      R += 2.0 * axy * cr / used;
    }
    return {D, R};
  };

  auto residual = [&]() {
    double r = 0.0;
    for (const auto& pn : nodes) {
      const auto [D, R] = stencil(pn);
      r = std::max(r, std::abs(D * v[pn.n] + R) / (h * h));
    }
    return r;
  };

  const int nmax = std::max(g.nx(), g.ny());
  double omega = 2.0 / (1.0 + std::sin(std::numbers::pi / nmax));
  PolishReport rep;
  rep.residual = residual();
  double last = rep.residual;
  while (rep.residual > cfg.tau_polish && rep.sweeps < cfg.max_polish_sweeps) {
    for (int s = 0; s < 10; ++s, ++rep.sweeps)
      for (const auto& pn : nodes) {
        const auto [D, R] = stencil(pn);
        v[pn.n] += omega * (-R / D - v[pn.n]);
      }
    rep.residual = residual();
    if (!std::isfinite(rep.residual)) break;
    if (rep.residual > 10.0 * last && omega > 1.0) omega = 1.0 + 0.5 * (omega - 1.0);
    last = rep.residual;
  }
  rep.converged = rep.residual <= cfg.tau_polish;
  if (report) *report = rep;
  return ScalarField(g, std::move(v));
}

ScalarField harmonic_polish(const ScalarField& u, const Problem& p, const SolverConfig& cfg,
                            PolishReport* report) {
  return polish_on_level(u, level_field(u), p, cfg, report, 3);
}

CertificateReport energy_certificate(const ScalarField& u, const Problem& p,
                                     const CertificateOptions& opts) {
  const auto& g = p.grid;
  const double h = g.spacing();
  CertificateReport rep;
  rep.energy = energy(u, p.params, p.domain);
  rep.min_increase = std::numeric_limits<double>::infinity();
  const double tol = 1e-12 * std::max(1.0, std::abs(rep.energy));
  auto test = [&](const ScalarField& phi) {
    ScalarField w = u;
    for (std::size_t n = 0; n < g.size(); ++n) w.values()[n] += phi.values()[n];
    const double inc = energy(w, p.params, p.domain) - rep.energy;
    rep.min_increase = std::min(rep.min_increase, inc);
    ++rep.tested;
    if (inc < -tol) ++rep.failures;
  };

  const auto kind = classify_nodes(p);
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double amp = opts.amplitude_cells * h;
  for (int t = 0; t < opts.trials; ++t) {
    // Bump of radius in [3h, 10h] whose support avoids the boundary nodes.
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const double radius = (3.0 + 7.0 * U(rng)) * h;
      const Point c{p.domain.lo.x + U(rng) * (p.domain.hi.x - p.domain.lo.x),
                    p.domain.lo.y + U(rng) * (p.domain.hi.y - p.domain.lo.y)};
      const double A = amp * (2.0 * U(rng) - 1.0);
      bool ok = true;
      ScalarField phi(g);
      for (int j = 0; j < g.ny() && ok; ++j)
        for (int i = 0; i < g.nx(); ++i) {
          const double r = norm(g.node(i, j) - c);
          if (r >= radius) continue;
          if (kind[g.index(i, j)] != NodeKind::Free) {
            ok = false;
            break;
          }
          const double s = 1.0 - (r * r) / (radius * radius);
          phi(i, j) = A * s * s;
        }
      if (!ok) continue;
      test(phi);
      break;
    }
  }
  for (const auto& phi : opts.extra) test(phi);
  return rep;
}

}  // namespace bernoulli
