#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bernoulli/energy_density.hpp"
#include "bernoulli/functional.hpp"
#include "bernoulli/geometry.hpp"
#include "bernoulli/grid.hpp"

namespace bernoulli {

/// Dirichlet problem for J_F on a rectangle or disk.
///
/// Boundary nodes are domain nodes with a 4-neighbour outside the domain (or
/// on the grid edge); they carry the data g. Interior domain nodes are free.
struct Problem {
  GridSpec grid;
  Domain domain;
  std::function<double(Point)> boundary_data;
  BernoulliParams params;

  /// Throws InvalidInput when g is negative or non-finite on a boundary node.
  void validate() const;
};

enum class NodeKind : std::uint8_t { Outside, Boundary, Free };

std::vector<NodeKind> classify_nodes(const Problem& p);

struct SolverConfig {
  double eps0 = 0.0;        // initial smoothing width; <= 0 picks 2 sup g
  double eps_factor = 0.5;  // eps <- factor * eps per stage
  double eps_min = 0.0;     // floor; raised to 2h when smaller
  double tau_grad = 1e-8;   // stationarity: sup |dJ/du_n| / (node area)
  int max_iterations = 200;  // per smoothing stage
  double tau_polish = 1e-8;  // sup |a_ij u_ij| after polishing
  int max_polish_sweeps = 20000;
  bool polish = true;
};

struct PolishReport {
  bool converged = false;
  int sweeps = 0;
  double residual = 0.0;  // sup |discrete a_ij u_ij| on the positive free nodes
};

struct SolveResult {
  ScalarField u;
  std::vector<double> stage_eps;
  std::vector<std::vector<double>> energy_history;  // per stage, per accepted step
  bool converged = false;
  double grad_norm = 0.0;  // stationarity measure at exit of the last stage
  double threshold = 0.0;  // level separating the sharp positivity set
  PolishReport polish;
  FreeBoundary free_boundary;
};

/// Pieces of fb deeper than margin inside the domain; a polyline leaving that
/// region is split into open pieces.
FreeBoundary restrict_free_boundary(const FreeBoundary& fb, const Domain& domain, double margin);

/// Cubic smoothed Heaviside: 0 below 0, 3s^2 - 2s^3 in between (s = x/eps), 1 above eps.
double smoothed_heaviside(double x, double eps);
double smoothed_heaviside_d1(double x, double eps);
double smoothed_heaviside_d2(double x, double eps);

/// Level of the smoothed one-dimensional profile at which the outer linear
/// solution extrapolates to zero, as a fraction of eps. 0.2589... for linear F.
double sharp_threshold_fraction(const EnergyDensity& d, double lambda);

/// Penalised annealed descent followed (when cfg.polish) by harmonic_polish
/// on the sharpened positivity set.
SolveResult minimize_penalized(const Problem& p, const SolverConfig& cfg);

/// Relaxes a_ij u_ij = 0 on {level > 0} with u = 0 on the interface (located
/// at sub-cell accuracy by linear interpolation of level) and u = g on the
/// boundary. Nonlinear SOR sweeps; coefficients refreshed at every visit.
/// interface_order 3 locates the interface by a cubic through the level
/// samples behind each node and extrapolates the ghost value cubically,
/// falling back to linear where fewer than three nodes lie behind.
ScalarField polish_on_level(const ScalarField& u0, const ScalarField& level, const Problem& p,
                            const SolverConfig& cfg, PolishReport* report = nullptr, int interface_order = 1);

/// Holds {u > 0} (with its sub-cell boundary from level_field) fixed, with
/// the cubic interface treatment.
ScalarField harmonic_polish(const ScalarField& u, const Problem& p, const SolverConfig& cfg,
                            PolishReport* report = nullptr);

struct CertificateOptions {
  int trials = 50;
  double amplitude_cells = 5.0;  // sup-norm bound of perturbations, in units of h
  std::uint64_t seed = 1;
  std::vector<ScalarField> extra;  // additional perturbations to test
};

struct CertificateReport {
  double energy = 0.0;
  int tested = 0;
  int failures = 0;
  double min_increase = 0.0;  // min over perturbations of J(u + phi) - J(u)
  bool passed() const { return failures == 0; }
};

/// Spot check of local minimality of the unsmoothed J_F against random
/// compactly supported bumps with sup-norm <= amplitude_cells * h.
CertificateReport energy_certificate(const ScalarField& u, const Problem& p,
                                     const CertificateOptions& opts = {});

}  // namespace bernoulli
