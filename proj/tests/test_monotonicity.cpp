#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "bernoulli/monotonicity.hpp"
#include "bernoulli/oracles.hpp"
#include "doctest.h"

using namespace bernoulli;

namespace {

GridSpec box(double half, double h) { return GridSpec::covering({-half, -half}, {half, half}, h); }

double sup_masked(const MaskedField& f) { return f.sup_abs(); }

double min_masked(const MaskedField& f) {
  double m = INFINITY;
  for (std::size_t n = 0; n < f.mask.size(); ++n)
    if (f.mask[n]) m = std::min(m, f.values.values()[n]);
  return m;
}

double max_masked(const MaskedField& f) {
  double m = -INFINITY;
  for (std::size_t n = 0; n < f.mask.size(); ++n)
    if (f.mask[n]) m = std::max(m, f.values.values()[n]);
  return m;
}

}  // namespace

TEST_CASE("density of a half-plane is one half") {
  const double h = 1.0 / 64;
  const ScalarField u = halfplane({std::cos(0.3), std::sin(0.3)}).sample(box(1.0, h));
  const std::vector<double> radii{0.1, 0.2, 0.4, 0.8};
  const DensityProfile p = density_profile(u, {0, 0}, radii);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    CHECK(std::abs(p.K[k] - 0.5) <= h / radii[k]);
    CHECK(std::abs(p.dK_fd[k]) <= 1e-3);
    CHECK(std::abs(p.dK_bi[k]) <= 1e-6);
  }
}

TEST_CASE("density of a two-plane solution is one") {
  const double h = 1.0 / 64;
  const ScalarField u = twoplane({0, 1}).sample(box(1.0, h));
  const std::vector<double> radii{0.1, 0.5};
  const DensityProfile p = density_K(u, {0, 0}, radii);
  for (double K : p.K) CHECK(K == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("density requires a free boundary centre") {
  const double h = 1.0 / 32;
  const ScalarField u = halfplane({1, 0}).sample(box(1.0, h));
  const std::vector<double> radii{0.2};
  CHECK_THROWS_AS(density_K(u, {0.5, 0}, radii), InvalidInput);
  CHECK_NOTHROW(density_K(u, {0.9 * h, 0}, radii));
  const std::vector<double> bad{0.2, 0.1};
  CHECK_THROWS_AS(density_K(u, {0, 0}, bad), InvalidInput);
  const std::vector<double> big{2.0};
  CHECK_THROWS_AS(density_K(u, {0, 0}, big), InvalidInput);
  try {
    density_K(u, {0.5, 0}, radii);
  } catch (const InvalidInput& e) {
    CHECK(std::string(e.what()) == "no free boundary point near requested center");
  }
}

TEST_CASE("dead-core density derivative: boundary integral against differences") {
  const double h = 1.0 / 128;
  const OracleSolution s = deadcore(4.0);
  const double rho = deadcore_radius(4.0);
  const ScalarField u = s.sample(GridSpec::covering({rho - 1.0, -1.0}, {rho + 1.0, 1.0}, h));
  const Point c{rho, 0.0};
  std::vector<double> radii;
  for (int k = 0; k < 16; ++k) radii.push_back(0.1 + 0.05 * k);
  const DensityProfile p = density_profile(u, c, radii);
  for (std::size_t k = 1; k + 1 < radii.size(); ++k) {
    // the zero phase is convex, so K increases
    CHECK(p.dK_bi[k] > 0.0);
    CHECK(p.dK_fd[k] > 0.0);
    CHECK(std::abs(p.dK_bi[k] - p.dK_fd[k]) <= 0.05 * p.dK_fd[k] + 2e-3);
  }
}

TEST_CASE("profile csv") {
  DensityProfile p;
  p.radii = {0.5};
  p.K = {0.1};
  p.dK_fd = {1.0 / 3.0};
  p.dK_bi = {-2.0};
  std::ostringstream out;
  write_profile_csv(out, p);
  CHECK(out.str() == "r,K,dK_fd,dK_bi\n0.5,0.10000000000000001,0.33333333333333331,-2\n");
}

TEST_CASE("w and v for exact solutions") {
  const double h = 1.0 / 64;
  SUBCASE("cones give w = 0 and v = 0") {
    const ScalarField u = halfplane({std::cos(1.0), std::sin(1.0)}).sample(box(1.0, h));
    CHECK(sup_masked(w_masked(u, {0, 0})) <= 1e-12);
    CHECK(sup_masked(v_field(u, {0, 0})) <= 1e-12);
  }
  SUBCASE("dead core: w = rho - rho log(r / rho) about the core centre") {
    const double rho = deadcore_radius(4.0);
    const ScalarField u = deadcore(4.0).sample(box(4.0, h * 4));
    const MaskedField w = w_masked(u, {0, 0});
    REQUIRE(w.count() > 100);
    double err = 0.0;
    for (int j = 0; j < u.grid().ny(); ++j)
      for (int i = 0; i < u.grid().nx(); ++i)
        if (w.mask[u.grid().index(i, j)]) {
          const double r = norm(u.grid().node(i, j));
          err = std::max(err, std::abs(w.values(i, j) - (rho - rho * std::log(r / rho))));
        }
    CHECK(err <= 1e-3);
  }
}

TEST_CASE("c field") {
  const double h = 1.0 / 32;
  SUBCASE("linear F gives c = -1 / |y|^2") {
    const double rho = deadcore_radius(4.0);
    const ScalarField u = deadcore(4.0).sample(box(4.0, h * 4));
    const Point c{rho, 0};
    const MaskedField cf = c_field(u, builtin_linear(), c);
    REQUIRE(cf.count() > 100);
    CHECK(max_masked(cf) < 0.0);
    double err = 0.0;
    for (int j = 0; j < u.grid().ny(); ++j)
      for (int i = 0; i < u.grid().nx(); ++i)
        if (cf.mask[u.grid().index(i, j)]) {
          const Point y = u.grid().node(i, j) - c;
          err = std::max(err, std::abs(cf.values(i, j) * dot(y, y) + 1.0));
        }
    CHECK(err <= 1e-12);
    CHECK(sup_masked(b_dot_y(u, builtin_linear(), c)) == 0.0);
  }
  SUBCASE("perturbed F on a half-plane: c is finite and negative") {
    const ScalarField u = halfplane({1, 0}).sample(box(1.0, h));
    const MaskedField cf = c_field(u, builtin_perturbed(1.0), {0, 0});
    REQUIRE(cf.count() > 100);
    CHECK(max_masked(cf) < 0.0);
    CHECK(std::isfinite(min_masked(cf)));
  }
}

TEST_CASE("radial deficit") {
  const double h = 1.0 / 64;
  const ScalarField u = halfplane({0, 1}).sample(box(1.0, h));
  const FreeBoundary hp = extract_free_boundary(u);
  CHECK(radial_deficit(u, hp, {0, 0}, 0.5) <= 1e-12);
  // about a point off the free boundary the radial derivative changes sign
  CHECK(radial_deficit(u, hp, {0, 0.3}, 0.8) > 0.5);
  const FreeBoundary empty;
  CHECK(radial_deficit(u, empty, {0, 0}, 1.0) == 0.0);
}

TEST_CASE("w over the positive set") {
  const double h = 1.0 / 64;
  CHECK(w_positive_sup(halfplane({std::cos(1.0), std::sin(1.0)}).sample(box(1.0, h)), {0, 0}) <= 1e-12);
  CHECK(w_positive_sup(twoplane({1, 0}).sample(box(1.0, h)), {0, 0}) <= 1e-12);
  CHECK(w_positive_sup(twoplane({0.6, 0.8}).sample(box(1.0, h)), {0, 0}) > 0.1);  // kink between nodes
  // dead core about a free boundary point, against the closed-form w
  const double rho = deadcore_radius(4.0);
  const ScalarField dc = deadcore(4.0).sample(GridSpec::covering({rho - 1, -1}, {rho + 1, 1}, h));
  double expected = 0.0;
  for (int j = 0; j < dc.grid().ny(); ++j)
    for (int i = 0; i < dc.grid().nx(); ++i) {
      const Point x = dc.grid().node(i, j);
      if (norm(x) <= rho) continue;
      const double r = norm(x);
      const Point y = x - Point{rho, 0};
      expected = std::max(expected, std::abs(rho / r * (x.x * y.x + x.y * y.y) / r - rho * std::log(r / rho)));
    }
  const double got = w_positive_sup(dc, {rho, 0});
  CHECK(got > 0.05);
  CHECK(std::abs(got - expected) <= 0.02 * expected);
}

TEST_CASE("blow-up sequence") {
  const double h = 1.0 / 128;
  SUBCASE("cones are fixed points") {
    const ScalarField u = halfplane({std::cos(0.4), std::sin(0.4)}).sample(box(1.0, h));
    const std::vector<double> scales{0.8, 0.4, 0.2, 0.1};
    const BlowupSequence b = blowup(u, {0, 0}, scales);
    CHECK(std::isnan(b.cauchy_diff[0]));
    // the level field is exactly linear across the free boundary of a cone
    for (std::size_t k = 1; k < scales.size(); ++k) CHECK(b.cauchy_diff[k] <= 1e-6);
    CHECK(b.pairwise[0][3] == b.pairwise[3][0]);
  }
  SUBCASE("dead core: differences shrink with the scale") {
    const double rho = deadcore_radius(4.0);
    const ScalarField u = deadcore(4.0).sample(GridSpec::covering({rho - 1, -1}, {rho + 1, 1}, h));
    const std::vector<double> scales{0.8, 0.4, 0.2, 0.1};
    const BlowupSequence b = blowup(u, {rho, 0}, scales);
    for (std::size_t k = 2; k < scales.size(); ++k) CHECK(b.cauchy_diff[k] < b.cauchy_diff[k - 1]);
    // the limit is the half-plane max(x, 0)
    const ScalarField& last = b.fields.back();
    double err = 0.0;
    for (int j = 0; j < last.grid().ny(); ++j)
      for (int i = 0; i < last.grid().nx(); ++i)
        err = std::max(err, std::abs(last(i, j) - std::max(last.grid().node(i, j).x, 0.0)));
    CHECK(err <= 0.1);
  }
  SUBCASE("bad scales") {
    const ScalarField u = halfplane({1, 0}).sample(box(1.0, h));
    const std::vector<double> up{0.1, 0.2}, tiny{0.5, 2 * h}, wide{1.5};
    CHECK_THROWS_AS(blowup(u, {0, 0}, up), InvalidInput);
    CHECK_THROWS_AS(blowup(u, {0, 0}, tiny), InvalidInput);
    CHECK_THROWS_AS(blowup(u, {0, 0}, wide), InvalidInput);
  }
}

TEST_CASE("homogeneity defect") {
  const std::vector<double> ts{0.5, 1.5};
  for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    const ScalarField u = halfplane({std::cos(0.7), std::sin(0.7)}).sample(box(1.0, h));
    CHECK(homogeneity_defect(u, {0, 0}, 0.5, ts) <= 1e-6);
    CHECK(homogeneity_defect(twoplane({1, 0}).sample(box(1.0, h)), {0, 0}, 0.5, ts) <= 1e-6);
  }
  const double rho = deadcore_radius(4.0);
  const ScalarField dc = deadcore(4.0).sample(GridSpec::covering({rho - 1, -1}, {rho + 1, 1}, 1.0 / 128));
  CHECK(homogeneity_defect(dc, {rho, 0}, 0.5, ts) >= 0.02);
}

TEST_CASE("curvature") {
  SUBCASE("half-plane is flat") {
    const double h = 1.0 / 32;
    const FreeBoundary fb = extract_free_boundary(halfplane({std::cos(0.3), std::sin(0.3)}).sample(box(1.0, h)));
    const auto k = curvature_profile(fb, 6 * h);
    int finite = 0;
    for (const auto& seg : k)
      for (double v : seg)
        if (std::isfinite(v)) {
          ++finite;
          CHECK(std::abs(v) <= 1e-6);
        }
    CHECK(finite > 40);
  }
  SUBCASE("dead core gives 1 / rho") {
    const double rho = deadcore_radius(4.0);
    double prev = INFINITY;
    for (double h : {1.0 / 32, 1.0 / 64}) {
      const ScalarField u = deadcore(4.0).sample(box(rho + 0.5, h));
      const FreeBoundary fb = extract_free_boundary(u);
      const auto k = curvature_profile(fb, curvature_window(h));
      double err = 0.0;
      for (const auto& seg : k)
        for (double v : seg)
          if (std::isfinite(v)) err = std::max(err, std::abs(v * rho - 1.0));
      CHECK(err <= 0.1);

      const CurvatureReport rep = curvature_identity_check(u, fb, {});
      CHECK(rep.regular > rep.samples.size() / 2);
      CHECK(rep.sup_relative_error <= 0.1);
      CHECK(rep.sup_relative_error < prev);
      prev = rep.sup_relative_error;
      CHECK(rep.sup_u_NT <= 0.01);
      CHECK(rep.min_minus_u_NN > 0.0);
    }
  }
  SUBCASE("too few vertices") {
    FreeBoundary fb;
    Polyline pl;
    for (int q = 0; q < 4; ++q) pl.vertices.push_back({{0.1 * q, 0}, {0, 1}, {0, 1}, 0.1});
    fb.segments.push_back(pl);
    const auto k = curvature_profile(fb, 1.0);
    for (double v : k[0]) CHECK(std::isnan(v));
    const CurvatureReport rep = curvature_identity_check(halfplane({0, 1}).sample(box(1.0, 0.1)), fb, {});
    CHECK(rep.regular == 0);
  }
}
