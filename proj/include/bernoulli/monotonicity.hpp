#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "bernoulli/energy_density.hpp"
#include "bernoulli/functional.hpp"
#include "bernoulli/geometry.hpp"
#include "bernoulli/grid.hpp"

namespace bernoulli {

struct DensityProfile {
  Point centre{};
  double h = 0.0;
  std::vector<double> radii;
  std::vector<double> K;
  std::vector<double> dK_fd;
  std::vector<double> dK_bi;
};

/// Throws unless some free boundary vertex lies within h of centre.
void require_free_boundary_centre(const FreeBoundary& fb, Point centre, double h);

/// K(r) = |{u > 0} n B_r| / (pi r^2) at increasing radii, with dK_fd filled
/// from the K column. centre must be within h of the free boundary.
DensityProfile density_K(const ScalarField& u, Point centre, std::span<const double> radii);

/// (1 / (pi r^3)) sum over free boundary vertices y in B_r(centre) of
/// grad u(y).(y - centre) times the vertex arc weight. 0 when none lie in B_r.
double dK_boundary_integral(const FreeBoundary& fb, Point centre, double r);

/// density_K plus the boundary-integral column.
DensityProfile density_profile(const ScalarField& u, Point centre, std::span<const double> radii);

/// Header "r,K,dK_fd,dK_bi", one row per radius, 17 significant digits.
void write_profile_csv(std::ostream& out, const DensityProfile& p);

/// interior_mask(u) with nodes closer than 3h to centre removed.
std::vector<char> centred_mask(const ScalarField& u, Point centre);

/// grad u.y - u, y = x - centre.
MaskedField w_masked(const ScalarField& u, Point centre);

/// sup |grad u.y - u| over positive nodes. Difference stencils read only
/// positive nodes (one-sided next to the zero set), so no stencil straddles a
/// kink; exact for cones whose zero set runs through grid nodes.
double w_positive_sup(const ScalarField& u, Point centre);

/// u / |y| - grad u.y / |y| (the negation is the radial-deficit quotient).
MaskedField v_field(const ScalarField& u, Point centre);

/// k b.y / |y|^3 - 2 a(y, y) / |y|^4 + (3 a(y, y) / |y|^2 - tr a) / |y|^2,
/// with k = kDriftFactor.
MaskedField c_field(const ScalarField& u, const EnergyDensity& d, Point centre);

/// k b.y, with k = kDriftFactor.
MaskedField b_dot_y(const ScalarField& u, const EnergyDensity& d, Point centre);

/// l^2 = max(0, sup of -grad u(y).(y - centre) / |y - centre|) over free
/// boundary vertices with 2h <= |y - centre| <= window. Closer vertices are
/// skipped: their direction from the centre is placement noise.
double radial_deficit(const ScalarField& u, const FreeBoundary& fb, Point centre, double window);

struct BlowupSequence {
  Point centre{};
  std::vector<double> scales;        // decreasing
  GridSpec reference{{-1.0, -1.0}, 1.0 / 32, 65, 65};  // [-1, 1]^2
  std::vector<ScalarField> fields;   // u(centre + r_k x) / r_k
  std::vector<double> cauchy_diff;   // sup |u_k - u_{k-1}|; NaN for k = 0
  std::vector<std::vector<double>> pairwise;
};

/// Rescalings by bilinear interpolation of level_field(u), clipped at 0, so
/// that cells cut by the free boundary do not smear the kink. Throws when scales are not strictly
/// decreasing, any r_k < 4h, or centre + r_k [-1, 1]^2 leaves the grid.
BlowupSequence blowup(const ScalarField& u, Point centre, std::span<const double> scales,
                      int reference_cells = 64);

/// sup over sample points x (|x| in {r/2, r}, 64 angles) and t in t_samples of
/// |u(c + t x) - t u(c + x)| / (|x| sup |grad u|), sup over nodes in the ball
/// of radius max(1, max t) r. Values interpolated as in blowup.
double homogeneity_defect(const ScalarField& u, Point centre, double r, std::span<const double> t_samples);

/// Signed curvature per vertex, positive when the zero phase is locally convex
/// (a dead core of radius rho gives 1 / rho). Least-squares quadratic fit of
/// the normal offset against the tangential coordinate over arc length
/// +-window. NaN where fewer than 5 vertices are available.
std::vector<std::vector<double>> curvature_profile(const FreeBoundary& fb, double window);

/// max(6h, sqrt(h)). Vertex placement noise is O(h^2), so a window shrinking
/// like h leaves an O(1) curvature error; sqrt(h) balances it against the fit bias.
double curvature_window(double h);

struct CurvatureSample {
  Point position{};
  double k = 0.0;
  double u_NN = 0.0;
  double u_NT = 0.0;
  double grad_norm = 0.0;
  bool regular = false;
};

struct CurvatureReport {
  std::vector<CurvatureSample> samples;
  std::size_t regular = 0;
  double sup_u_NT = 0.0;             // over regular vertices
  double sup_identity_error = 0.0;   // |(1 + 2F''/F')(-u_NN) - k|
  double sup_relative_error = 0.0;   // the same divided by |k|
  double min_minus_u_NN = 0.0;       // min of -u_NN
};

/// Second derivatives from a positive-side polynomial fit at each vertex,
/// curvature from curvature_profile(fb, curvature_window(h)).
/// Regular: turning angle over 5 vertices below 30 degrees and
/// |grad u| in [0.8, 1.2] lambda*.
CurvatureReport curvature_identity_check(const ScalarField& u, const FreeBoundary& fb,
                                         const BernoulliParams& p);

}  // namespace bernoulli
