#include "bernoulli/calculus.hpp"

#include <cmath>

namespace bernoulli {
namespace {

void require_finite(const ScalarField& u) {
  for (double v : u.values())
    if (!std::isfinite(v)) throw InvalidInput("non-finite field value");
}

// d/dk along one axis of a line of n samples, spacing h.
template <class At>
double diff1(At at, int k, int n, double h) {
  if (k == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
  if (k == n - 1) return (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h);
  return (at(k + 1) - at(k - 1)) / (2.0 * h);
}

template <class At>
double diff2(At at, int k, int n, double h) {
  const int c = k == 0 ? 1 : (k == n - 1 ? n - 2 : k);
  return (at(c + 1) - 2.0 * at(c) + at(c - 1)) / (h * h);
}

}  // namespace

VectorField gradient(const ScalarField& u) {
  require_finite(u);
  const auto& g = u.grid();
  const double h = g.spacing();
  VectorField out(g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      out(i, j) = {diff1([&](int k) { return u(k, j); }, i, g.nx(), h),
                   diff1([&](int k) { return u(i, k); }, j, g.ny(), h)};
    }
  return out;
}

MatrixField hessian(const ScalarField& u) {
  require_finite(u);
  const auto& g = u.grid();
  const double h = g.spacing();
  const VectorField du = gradient(u);
  MatrixField out(g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      Sym2& m = out(i, j);
      m.xx = diff2([&](int k) { return u(k, j); }, i, g.nx(), h);
      m.yy = diff2([&](int k) { return u(i, k); }, j, g.ny(), h);
      // Average both orders so the result is symmetric at edge nodes too.
      const double uxy = diff1([&](int k) { return du(i, k)[0]; }, j, g.ny(), h);
      const double uyx = diff1([&](int k) { return du(k, j)[1]; }, i, g.nx(), h);
      m.xy = 0.5 * (uxy + uyx);
    }
  return out;
}

ScalarField laplacian(const ScalarField& u) {
  require_finite(u);
  const auto& g = u.grid();
  const double h2 = g.spacing() * g.spacing();
  ScalarField out(g);
  for (int j = 1; j + 1 < g.ny(); ++j)
    for (int i = 1; i + 1 < g.nx(); ++i)
      out(i, j) = (u(i + 1, j) + u(i - 1, j) + u(i, j + 1) + u(i, j - 1) - 4.0 * u(i, j)) / h2;
  return out;
}

}  // namespace bernoulli
