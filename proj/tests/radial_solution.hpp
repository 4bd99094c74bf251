#pragma once

// Radial solutions of div(F'(|grad u|^2) grad u) = 0, i.e. r F'(p^2) p = C with
// p = u_r, built directly from the density's closed forms. Test-only oracle.

#include <cmath>

#include "bernoulli/energy_density.hpp"
#include "bernoulli/grid.hpp"

namespace testing_support {

struct RadialSolution {
  bernoulli::EnergyDensity d;
  double C = 1.0;       // flux constant
  double r0 = 0.3;      // u(r0) = offset
  double offset = 0.0;
  bernoulli::Point centre{};

  // p with F'(p^2) p = C / r; the left side is increasing in p.
  double p(double r) const {
    const double target = C / r;
    double q = target;
    for (int it = 0; it < 60; ++it) {
      const double t = q * q;
      const double f = d.dF(t) * q - target;
      const double df = d.dF(t) + 2.0 * d.d2F(t) * t;
      const double next = q - f / df;
      if (std::abs(next - q) <= 1e-16 * std::abs(q)) return next;
      q = next;
    }
    return q;
  }

  // Differentiating r F'(p^2) p = C: p' = -F' p / (r (F' + 2 F'' p^2)).
  double dp(double r) const {
    const double q = p(r), t = q * q;
    return -d.dF(t) * q / (r * (d.dF(t) + 2.0 * d.d2F(t) * t));
  }

  // Composite Simpson; p is smooth on r >= r0 > 0.
  double u_of_r(double r) const {
    const int n = 400;
    const double step = (r - r0) / n;
    double acc = p(r0) + p(r);
    for (int k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * p(r0 + k * step);
    return offset + acc * step / 3.0;
  }

  double u(bernoulli::Point x) const { return u_of_r(bernoulli::norm(x - centre)); }

  bernoulli::Vec2 grad(bernoulli::Point x) const {
    const bernoulli::Point y = x - centre;
    const double r = bernoulli::norm(y), q = p(r);
    return {q * y.x / r, q * y.y / r};
  }

  bernoulli::Sym2 hess(bernoulli::Point x) const {
    const bernoulli::Point y = x - centre;
    const double r = bernoulli::norm(y), q = p(r), q1 = dp(r);
    const double ex = y.x / r, ey = y.y / r;
    // p' e_r e_r^T + (p / r) e_theta e_theta^T
    return {q1 * ex * ex + q / r * ey * ey, (q1 - q / r) * ex * ey, q1 * ey * ey + q / r * ex * ex};
  }
};

}  // namespace testing_support
