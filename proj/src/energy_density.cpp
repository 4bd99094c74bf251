#include "bernoulli/energy_density.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bernoulli/grid.hpp"

namespace bernoulli {

EnergyDensity builtin_linear() {
  EnergyDensity d;
  d.label = "linear";
  d.F = [](double t) { return t; };
  d.dF = [](double) { return 1.0; };
  d.d2F = [](double) { return 0.0; };
  d.d3F = [](double) { return 0.0; };
  d.c0 = 1.0;
  d.C0 = 1.0;
  d.linear = true;
  return d;
}

EnergyDensity builtin_perturbed(double a) {
  if (!(a > 0.0 && a <= 1.0)) throw InvalidInput("perturbed density needs a in (0, 1]");
  EnergyDensity d;
  std::ostringstream label;
  label << "perturbed:a=" << a;
  d.label = label.str();
  d.F = [a](double t) { return t + a * (t - std::log1p(t)); };
  d.dF = [a](double t) { return 1.0 + a * t / (1.0 + t); };
  d.d2F = [a](double t) { return a / ((1.0 + t) * (1.0 + t)); };
  d.d3F = [a](double t) { return -2.0 * a / ((1.0 + t) * (1.0 + t) * (1.0 + t)); };
  d.c0 = 1.0;
  d.C0 = 1.0 + a;
  return d;
}

EnergyDensity parse_density(const std::string& spec) {
  if (spec == "linear") return builtin_linear();
  const std::string prefix = "perturbed:a=";
  if (spec.rfind(prefix, 0) == 0) {
    std::size_t used = 0;
    double a = 0.0;
    try {
      a = std::stod(spec.substr(prefix.size()), &used);
    } catch (const std::exception&) {
      throw InvalidInput("malformed density parameter in '" + spec + "'");
    }
    if (used != spec.size() - prefix.size())
      throw InvalidInput("malformed density parameter in '" + spec + "'");
    if (a == 0.0) return builtin_linear();
    return builtin_perturbed(a);
  }
  throw InvalidInput("unknown energy density '" + spec + "'");
}

std::vector<double> default_t_samples() {
  std::vector<double> t{0.0};
  for (double s = 1e-3; s <= 100.0; s *= 1.25) t.push_back(s);
  t.push_back(100.0);
  return t;
}

namespace {

void fail(DensityReport& r, const std::string& what, double t) {
  std::ostringstream os;
  os << what << " at t=" << t;
  r.failures.push_back(os.str());
  r.ok = false;
}

bool close(double fd, double exact) {
  return std::abs(fd - exact) <= 1e-6 * std::max(std::abs(exact), 1e-3);
}

}  // namespace

DensityReport validate_F(const EnergyDensity& d, std::span<const double> t_samples) {
  DensityReport r;
  if (std::find(t_samples.begin(), t_samples.end(), 0.0) == t_samples.end())
    throw InvalidInput("t samples must include 0");
  if (std::abs(d.F(0.0)) > 1e-14) fail(r, "F(0)=0", 0.0);
  const double slack = 1e-12;
  for (double t : t_samples) {
    if (t < 0.0) throw InvalidInput("t samples must be nonnegative");
    const double f1 = d.dF(t), f2 = d.d2F(t);
    if (f1 < d.c0 - slack) fail(r, "F1 lower bound c0<=F'", t);
    if (f1 > d.C0 + slack) fail(r, "F1 upper bound F'<=C0", t);
    if (f2 < -slack) fail(r, "F2 lower bound 0<=F''", t);
    if (f2 > d.C0 / (1.0 + t) + slack) fail(r, "F2 upper bound F''<=C0/(1+t)", t);
    const double delta = 1e-4 * (1.0 + t);
    auto centred = [&](const std::function<double(double)>& f) {
      return (f(t + delta) - f(t - delta)) / (2.0 * delta);
    };
    if (!close(centred(d.F), f1)) fail(r, "F' consistent with F", t);
    if (!close(centred(d.dF), f2)) fail(r, "F'' consistent with F'", t);
    if (!close(centred(d.d2F), d.d3F(t))) fail(r, "F''' consistent with F''", t);
  }
  return r;
}

double free_boundary_function(const EnergyDensity& d, double t) {
  return 2.0 * t * d.dF(t) - d.F(t);
}

double lambda_star(const EnergyDensity& d, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be >= 0");
  if (lambda == 0.0) return 0.0;
  double lo = 0.0, hi = lambda / d.c0 + 1.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (free_boundary_function(d, mid) < lambda)
      lo = mid;
    else
      hi = mid;
  }
  const double t = std::abs(free_boundary_function(d, lo) - lambda) <=
                           std::abs(free_boundary_function(d, hi) - lambda)
                       ? lo
                       : hi;
  return std::sqrt(t);
}

}  // namespace bernoulli
