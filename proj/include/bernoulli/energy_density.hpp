#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace bernoulli {

/// An integrand F(t), t = |grad u|^2, with three derivatives and the constants
/// c0 <= F'(t) <= C0, 0 <= F''(t) <= C0 / (1 + t).
struct EnergyDensity {
  std::string label;
  std::function<double(double)> F;
  std::function<double(double)> dF;
  std::function<double(double)> d2F;
  std::function<double(double)> d3F;
  double c0 = 1.0;
  double C0 = 1.0;
  bool linear = false;  // F'' and F''' vanish identically
};

/// F(t) = t.
EnergyDensity builtin_linear();

/// F(t) = t + a (t - log(1 + t)), a in (0, 1].
EnergyDensity builtin_perturbed(double a);

/// "linear" or "perturbed:a=<value>". a = 0 maps to the linear density.
EnergyDensity parse_density(const std::string& spec);

struct DensityReport {
  bool ok = true;
  std::vector<std::string> failures;  // "<condition> at t=<value>"
};

/// Checks F(0) = 0, both bound chains, and each derivative against centred
/// finite differences of the one below it (relative error <= 1e-6).
DensityReport validate_F(const EnergyDensity& d, std::span<const double> t_samples);

/// Default validation sample: 0 and a geometric ladder up to 100.
std::vector<double> default_t_samples();

/// G(t) = 2 t F'(t) - F(t), the free boundary function of t = |grad u|^2.
double free_boundary_function(const EnergyDensity& d, double t);

/// sqrt(t*) with G(t*) = lambda, by bisection on [0, lambda / c0 + 1].
double lambda_star(const EnergyDensity& d, double lambda);

struct BernoulliParams {
  double lambda = 1.0;
  EnergyDensity density = builtin_linear();

  double lambda_star() const { return bernoulli::lambda_star(density, lambda); }
};

}  // namespace bernoulli
