#include <cmath>
#include <numbers>
#include <random>

#include "bernoulli/calculus.hpp"
#include "bernoulli/functional.hpp"
#include "bernoulli/oracles.hpp"
#include "doctest.h"
#include "radial_solution.hpp"

using namespace bernoulli;
using testing_support::RadialSolution;

namespace {

GridSpec square(double half, double h) { return GridSpec::covering({-half, -half}, {half, half}, h); }

EnergyDensity quadratic_density() {
  EnergyDensity d;
  d.label = "t^2";
  d.F = [](double t) { return t * t; };
  d.dF = [](double t) { return 2 * t; };
  d.d2F = [](double) { return 2.0; };
  d.d3F = [](double) { return 0.0; };
  d.c0 = 1.0;
  d.C0 = 10.0;
  return d;
}

bool mentions(const DensityReport& r, const std::string& what) {
  for (const auto& f : r.failures)
    if (f.find(what) != std::string::npos) return true;
  return false;
}

// A grid box on which a radial solution is smooth and positive.
GridSpec annulus_box(double h) { return GridSpec::covering({0.5, -0.5}, {1.5, 0.5}, h); }

// Sup over a fixed inner box, so refinement compares the same region.
double inner_sup(const MaskedField& f) {
  const auto& g = f.values.grid();
  double m = 0.0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const Point x = g.node(i, j);
      if (f.mask[g.index(i, j)] && x.x >= 0.625 && x.x <= 1.375 && std::abs(x.y) <= 0.375)
        m = std::max(m, std::abs(f.values(i, j)));
    }
  return m;
}

}  // namespace

TEST_CASE("energy densities") {
  const auto samples = default_t_samples();
  CHECK(validate_F(builtin_linear(), samples).ok);
  const DensityReport q = validate_F(quadratic_density(), samples);
  CHECK_FALSE(q.ok);
  CHECK(mentions(q, "F1 upper bound"));
  for (double a : {0.25, 0.5, 1.0}) CHECK(validate_F(builtin_perturbed(a), samples).ok);

  const EnergyDensity d = builtin_perturbed(0.5);
  CHECK(d.d2F(0.0) == doctest::Approx(0.5));
  CHECK(d.d2F(0.0) <= d.C0 / (1.0 + 0.0));
  CHECK(d.C0 == doctest::Approx(1.5));
  CHECK(d.F(1.0) == doctest::Approx(1.0 + 0.5 * (1.0 - std::log(2.0))).epsilon(1e-14));

  CHECK_THROWS_AS(builtin_perturbed(0.0), InvalidInput);
  CHECK_THROWS_AS(builtin_perturbed(1.5), InvalidInput);
  CHECK_THROWS_AS(validate_F(d, std::vector<double>{1.0, 2.0}), InvalidInput);
  CHECK(parse_density("linear").linear);
  CHECK(parse_density("perturbed:a=0").linear);
  CHECK(parse_density("perturbed:a=0.5").C0 == doctest::Approx(1.5));
  CHECK_THROWS_AS(parse_density("perturbed:a=x"), InvalidInput);
  CHECK_THROWS_AS(parse_density("cubic"), InvalidInput);
}

TEST_CASE("lambda_star") {
  CHECK(lambda_star(builtin_linear(), 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lambda_star(builtin_linear(), 0.0) == 0.0);
  CHECK(lambda_star(builtin_perturbed(0.3), 0.0) == 0.0);
  CHECK_THROWS_AS(lambda_star(builtin_linear(), -1.0), InvalidInput);

  // G(1) = 2 F'(1) - F(1) = 2 (1 + a/2) - (1 + a (1 - log 2)) = 1 + a log 2.
  for (double a : {0.1, 0.5, 1.0}) {
    const double G1 = 1.0 + a * std::log(2.0);
    CHECK(free_boundary_function(builtin_perturbed(a), 1.0) == doctest::Approx(G1).epsilon(1e-14));
    CHECK(std::abs(lambda_star(builtin_perturbed(a), G1) - 1.0) <= 1e-12);
  }

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 10.0);
  for (const EnergyDensity& d : {builtin_linear(), builtin_perturbed(0.25), builtin_perturbed(1.0)})
    for (int k = 0; k < 20; ++k) {
      const double t = 10.0 - U(rng);  // in (0, 10]
      const double lam = free_boundary_function(d, t);
      const double s = lambda_star(d, lam);
      CHECK(std::abs(s - std::sqrt(t)) <= 1e-10);
      CHECK(std::abs(free_boundary_function(d, s * s) - lam) <= 1e-12 * std::max(1.0, lam));
    }
}

TEST_CASE("energy") {
  const BernoulliParams lin{};
  SUBCASE("zero field") {
    const GridSpec g = square(1.0, 1.0 / 16);
    CHECK(energy(ScalarField(g), lin, Domain::of(g)) == 0.0);
  }
  SUBCASE("half-plane solution on the square has J = 4") {
    for (double h : {1.0 / 16, 1.0 / 32}) {
      const GridSpec g = square(1.0, h);
      CHECK(std::abs(energy(halfplane({1, 0}).sample(g), lin, Domain::of(g)) - 4.0) <= 1e-10);
      // Tilted: the half-plane through the centre still halves the square.
      const ScalarField u = halfplane({std::cos(0.3), std::sin(0.3)}).sample(g);
      CHECK(std::abs(energy(u, lin, Domain::of(g)) - 4.0) <= 2 * h);
    }
  }
  SUBCASE("invariant under a 90 degree rotation of the data") {
    const GridSpec g = square(1.0, 1.0 / 16);
    const ScalarField u = ScalarField::sample(g, [](Point p) {
      return std::max(0.0, std::sin(2 * p.x + 0.3) + 0.5 * p.y * p.y - 0.2 * p.x * p.y);
    });
    ScalarField v(g);
    const int n = g.nx();
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) v(i, j) = u(j, n - 1 - i);
    for (const BernoulliParams& p : {lin, BernoulliParams{0.7, builtin_perturbed(0.5)}})
      CHECK(energy(u, p, Domain::of(g)) == doctest::Approx(energy(v, p, Domain::of(g))).epsilon(1e-12));
  }
  SUBCASE("continuous in the perturbation parameter") {
    const GridSpec g = square(1.0, 1.0 / 16);
    const ScalarField u = halfplane({1, 0}).sample(g);
    const double J0 = energy(u, lin, Domain::of(g));
    for (double a : {0.5, 0.1, 0.01}) {
      const double Ja = energy(u, {1.0, builtin_perturbed(a)}, Domain::of(g));
      // F_a - F = a (t - log(1 + t)) at t = 1 on an area 2.
      CHECK(Ja - J0 >= 0.0);
      CHECK(Ja - J0 <= a * 2 * (1 - std::log(2.0)) * (1 + 1e-6));
    }
  }
  SUBCASE("cells outside the mask are ignored") {
    const GridSpec g = square(1.0, 1.0 / 16);
    const ScalarField u(g, 1.0);
    CHECK(energy(u, lin, Domain::rectangle({0, 0}, {1, 1})) == doctest::Approx(1.0));
    CHECK(energy(u, lin, Domain::disk({0, 0}, 1.0)) < std::numbers::pi);
  }
}

TEST_CASE("coefficients_a") {
  const GridSpec g = square(1.0, 1.0 / 16);
  const ScalarField u = ScalarField::sample(g, [](Point p) { return std::sin(p.x) * std::exp(p.y); });
  for (const Sym2& m : coefficients_a(u, builtin_linear()).values()) {
    CHECK(m.xx == 1.0);
    CHECK(m.xy == 0.0);
    CHECK(m.yy == 1.0);
  }
  const EnergyDensity d = builtin_perturbed(0.5);
  for (const Sym2& m : coefficients_a(ScalarField(g, 2.0), d).values()) {
    CHECK(m.xx == d.dF(0.0));
    CHECK(m.yy == d.dF(0.0));
    CHECK(m.xy == 0.0);
  }
  const auto ax = coefficients_a(ScalarField::sample(g, [](Point p) { return p.x; }), d);
  for (const Sym2& m : ax.values()) {
    CHECK(m.xx == doctest::Approx(d.dF(1.0) + 2 * d.d2F(1.0)));
    CHECK(m.yy == doctest::Approx(d.dF(1.0)));
    CHECK(std::abs(m.xy) <= 1e-12);
  }
  // Uniform ellipticity on a field with large gradients.
  const ScalarField big = ScalarField::sample(g, [](Point p) { return 5 * std::sin(3 * p.x) * std::cos(2 * p.y); });
  const VectorField du = gradient(big);
  const auto a = coefficients_a(big, d);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double t = du.values()[n][0] * du.values()[n][0] + du.values()[n][1] * du.values()[n][1];
    CHECK(a.values()[n].min_eigenvalue() >= d.c0 - 1e-12);
    CHECK(a.values()[n].max_eigenvalue() <= d.C0 + 2 * d.C0 * t / (1 + t) + 1e-12);
  }
}

TEST_CASE("drift_b") {
  const GridSpec g = GridSpec::covering({0.5, -0.5}, {1.5, 0.5}, 1.0 / 64);
  const ScalarField u = ScalarField::sample(g, [](Point p) { return std::log(norm(p)); });
  for (const Vec2& b : drift_b(u, builtin_linear()).values()) CHECK((b[0] == 0.0 && b[1] == 0.0));
  for (const Vec2& b : drift_b(ScalarField(g, 3.0), builtin_perturbed(0.5)).values())
    CHECK((b[0] == 0.0 && b[1] == 0.0));

  // u = rho log(r / rho): p = rho / r, p' = -rho / r^2, Laplacian 0, so
  // b = -(2 F'''(p^2) p^3 p' + 2 F''(p^2) p p') e_r.
  const double rho = 0.4;
  const EnergyDensity d = builtin_perturbed(0.7);
  auto exact = [&](Point x) {
    const double r = norm(x), p = rho / r, dp = -rho / (r * r), t = p * p;
    const double br = -(2 * d.d3F(t) * p * p * p * dp + 2 * d.d2F(t) * p * dp);
    return Vec2{br * x.x / r, br * x.y / r};
  };
  auto sup_error = [&](double h) {
    const GridSpec gg = GridSpec::covering({0.5, -0.5}, {1.5, 0.5}, h);
    const ScalarField v = ScalarField::sample(gg, [&](Point x) { return rho * std::log(norm(x) / rho); });
    const VectorField b = drift_b(v, d);
    double err = 0.0;
    for (int j = 1; j + 1 < gg.ny(); ++j)
      for (int i = 1; i + 1 < gg.nx(); ++i) {
        const Vec2 e = exact(gg.node(i, j));
        err = std::max({err, std::abs(b(i, j)[0] - e[0]), std::abs(b(i, j)[1] - e[1])});
      }
    return err;
  };
  const double e1 = sup_error(1.0 / 32), e2 = sup_error(1.0 / 64);
  CHECK(e2 <= 1e-3);
  CHECK(e1 / e2 > 3.0);
}

TEST_CASE("pde and w residuals") {
  SUBCASE("harmonic polynomial") {
    const GridSpec g = square(1.0, 1.0 / 32);
    const MaskedField r = pde_residual(ScalarField::sample(g, [](Point p) { return 3 + p.x * p.x - p.y * p.y; }), builtin_linear());
    CHECK(r.count() > 0);
    CHECK(r.sup_abs() <= 1e-10);
  }
  SUBCASE("logarithm, linear F, centre at its pole") {
    auto sups = [](double h) {
      const GridSpec g = annulus_box(h);
      const ScalarField u = ScalarField::sample(g, [](Point p) { return std::log(norm(p) / 0.3); });
      return std::pair{inner_sup(pde_residual(u, builtin_linear())),
                       inner_sup(w_residual(u, builtin_linear(), {0.5, 0.0}))};
    };
    const auto [p1, w1] = sups(1.0 / 32);
    const auto [p2, w2] = sups(1.0 / 64);
    CHECK(p1 / p2 > 3.5);
    CHECK(w1 / w2 > 3.5);
    CHECK(p2 <= 5e-3);
    CHECK(w2 <= 1e-2);
  }
  SUBCASE("half-plane: w vanishes for a centre on the line") {
    const GridSpec g = square(1.0, 1.0 / 16);
    const ScalarField u = halfplane({1, 0}).sample(g);
    const MaskedField w = w_residual(u, builtin_linear(), {0.0, 0.25});
    CHECK(w.count() > 0);
    CHECK(w.sup_abs() <= 1e-10);
    const ScalarField wf = w_field(u, {0.0, 0.25});
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 3; i < g.nx(); ++i)
        if (g.node(i, j).x > 0.2) CHECK(std::abs(wf(i, j)) <= 1e-12);
  }
  SUBCASE("centre must lie on the grid") {
    const GridSpec g = square(1.0, 1.0 / 8);
    CHECK_THROWS_AS(w_residual(ScalarField(g, 1.0), builtin_linear(), {2.0, 0.0}), InvalidInput);
  }
}

TEST_CASE("drift factor fixed by refinement on an exact nonlinear solution") {
  const RadialSolution sol{builtin_perturbed(1.0), 0.8, 0.3, 0.1, {}};
  const Point centre{0.9, 0.1};
  auto sups = [&](double h, double factor) {
    const ScalarField u = ScalarField::sample(annulus_box(h), [&](Point p) { return sol.u(p); });
    return std::pair{inner_sup(pde_residual(u, sol.d)), inner_sup(w_residual(u, sol.d, centre, factor))};
  };
  const double hs[3] = {1.0 / 32, 1.0 / 64, 1.0 / 128};
  double pde[3], w2[3], w1[3];
  for (int k = 0; k < 3; ++k) {
    std::tie(pde[k], w2[k]) = sups(hs[k], 2.0);
    w1[k] = sups(hs[k], 1.0).second;
  }
  for (int k = 0; k < 2; ++k) {
    CHECK(pde[k] / pde[k + 1] > 3.5);
    CHECK(w2[k] / w2[k + 1] >= 2.0);  // order >= h with the factor 2 drift
  }
  // With factor 1 the residual levels off instead of vanishing.
  CHECK(w1[1] / w1[2] < 2.0);
  CHECK(w1[2] > 5 * w2[2]);
  CHECK(kDriftFactor == 2.0);
}

TEST_CASE("radial oracle solves the equation") {
  const RadialSolution sol{builtin_perturbed(0.5), 0.8, 0.3, 0.1, {}};
  for (double r : {0.6, 0.9, 1.3}) {
    const Point x{r * std::cos(0.4), r * std::sin(0.4)};
    const Sym2 H = sol.hess(x);
    const Vec2 q = sol.grad(x);
    const double t = q[0] * q[0] + q[1] * q[1];
    const double f1 = sol.d.dF(t), f2 = sol.d.d2F(t);
    const double aij_uij = (f1 + 2 * f2 * q[0] * q[0]) * H.xx + 4 * f2 * q[0] * q[1] * H.xy + (f1 + 2 * f2 * q[1] * q[1]) * H.yy;
    CHECK(std::abs(aij_uij) <= 1e-12);
    const double d = 1e-4;
    CHECK((sol.u_of_r(r + d) - sol.u_of_r(r - d)) / (2 * d) == doctest::Approx(sol.p(r)).epsilon(1e-7));
  }
}
