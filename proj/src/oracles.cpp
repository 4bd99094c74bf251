#include "bernoulli/oracles.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace bernoulli {
namespace {

Vec2 unit(Vec2 e) {
  const double n = std::hypot(e[0], e[1]);
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidInput("direction must be a nonzero vector");
  return {e[0] / n, e[1] / n};
}

std::vector<Point> line_samples(Vec2 e) {
  std::vector<Point> pts;
  for (int k = -8; k <= 8; ++k) pts.push_back({-e[1] * 0.125 * k, e[0] * 0.125 * k});
  return pts;
}

}  // namespace

OracleSolution halfplane(Vec2 e) {
  e = unit(e);
  OracleSolution o;
  std::ostringstream name;
  name << "halfplane(" << e[0] << "," << e[1] << ")";
  o.name = name.str();
  o.u = [e](Point p) { return std::max(e[0] * p.x + e[1] * p.y, 0.0); };
  o.grad = [e](Point) { return e; };
  o.hess = [](Point) { return Sym2{}; };
  o.fb_distance = [e](Point p) { return std::abs(e[0] * p.x + e[1] * p.y); };
  o.fb_samples = line_samples(e);
  o.fb_description = "line x.e = 0";
  o.homogeneous = true;
  return o;
}

OracleSolution twoplane(Vec2 e) {
  e = unit(e);
  OracleSolution o;
  std::ostringstream name;
  name << "twoplane(" << e[0] << "," << e[1] << ")";
  o.name = name.str();
  o.u = [e](Point p) { return std::abs(e[0] * p.x + e[1] * p.y); };
  o.grad = [e](Point p) {
    const double s = e[0] * p.x + e[1] * p.y >= 0.0 ? 1.0 : -1.0;
    return Vec2{s * e[0], s * e[1]};
  };
  o.hess = [](Point) { return Sym2{}; };
  o.fb_distance = [e](Point p) { return std::abs(e[0] * p.x + e[1] * p.y); };
  o.fb_samples = line_samples(e);
  o.fb_description = "line x.e = 0 (both sides positive)";
  o.homogeneous = true;
  return o;
}

double deadcore_radius(double R, DeadcoreRoot root) {
  if (!(R > 0.0) || !std::isfinite(R)) throw InvalidInput("outer radius must be positive");
  // f(rho) = rho log(R / rho) peaks at rho = R / e with value R / e.
  const double peak = R / std::numbers::e;
  auto f = [R](double rho) { return rho * std::log(R / rho) - 1.0; };
  if (std::abs(f(peak)) <= 1e-12) return peak;
  if (f(peak) < 0.0)
    throw InvalidInput("no dead core: outer radius below e cannot sustain |grad u| = 1");
  // f is increasing on (0, peak] and decreasing on [peak, R).
  double lo = root == DeadcoreRoot::Outer ? peak : 0.0;
  double hi = root == DeadcoreRoot::Outer ? R : peak;
  const bool increasing = root == DeadcoreRoot::Inner;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if ((f(mid) < 0.0) == increasing)
      lo = mid;
    else
      hi = mid;
  }
  return std::abs(f(lo)) < std::abs(f(hi)) ? lo : hi;
}

OracleSolution deadcore(double R, Point c, DeadcoreRoot root) {
  const double rho = deadcore_radius(R, root);
  OracleSolution o;
  std::ostringstream name;
  name << "deadcore(R=" << R << ",rho=" << rho << ")";
  o.name = name.str();
  o.u = [rho, c](Point p) {
    const double r = norm(p - c);
    return r > rho ? rho * std::log(r / rho) : 0.0;
  };
  o.grad = [rho, c](Point p) {
    const Point d = p - c;
    const double r2 = dot(d, d);
    return Vec2{rho * d.x / r2, rho * d.y / r2};
  };
  o.hess = [rho, c](Point p) {
    const Point d = p - c;
    const double r2 = dot(d, d);
    const double r4 = r2 * r2;
    return Sym2{rho * (d.y * d.y - d.x * d.x) / r4, -2.0 * rho * d.x * d.y / r4,
                rho * (d.x * d.x - d.y * d.y) / r4};
  };
  o.fb_distance = [rho, c](Point p) { return std::abs(norm(p - c) - rho); };
  for (int k = 0; k < 64; ++k) {
    const double t = 2.0 * std::numbers::pi * k / 64.0;
    o.fb_samples.push_back({c.x + rho * std::cos(t), c.y + rho * std::sin(t)});
  }
  std::ostringstream fb;
  fb << "circle radius " << rho;
  o.fb_description = fb.str();
  o.apex = c;
  return o;
}

namespace {

double parse_number(const std::string& s, const std::string& spec) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidInput("malformed number in oracle '" + spec + "'");
  }
  if (used != s.size()) throw InvalidInput("malformed number in oracle '" + spec + "'");
  return v;
}

Vec2 parse_direction(const std::string& arg, const std::string& spec) {
  if (arg == "ex") return {1.0, 0.0};
  if (arg == "ey") return {0.0, 1.0};
  if (arg.rfind("angle=", 0) == 0) {
    const double t = parse_number(arg.substr(6), spec);
    return {std::cos(t), std::sin(t)};
  }
  throw InvalidInput("unknown direction in oracle '" + spec + "'");
}

}  // namespace

OracleSolution parse_oracle(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "halfplane") return halfplane(parse_direction(arg.empty() ? "ex" : arg, spec));
  if (kind == "twoplane") return twoplane(parse_direction(arg.empty() ? "ex" : arg, spec));
  if (kind == "deadcore") {
    double R = std::numbers::e;
    DeadcoreRoot root = DeadcoreRoot::Outer;
    std::istringstream parts(arg);
    std::string item;
    while (std::getline(parts, item, ',')) {
      if (item.rfind("R=", 0) == 0) {
        R = parse_number(item.substr(2), spec);
      } else if (item == "root=inner") {
        root = DeadcoreRoot::Inner;
      } else if (item == "root=outer") {
        root = DeadcoreRoot::Outer;
      } else if (!item.empty()) {
        throw InvalidInput("unknown deadcore parameter '" + item + "'");
      }
    }
    return deadcore(R, {}, root);
  }
  throw InvalidInput("unknown oracle '" + spec + "'");
}

double pixel_measure(const ScalarField& u, Point c, double r) {
  const auto& g = u.grid();
  if (!g.contains_disk(c, r)) throw InvalidInput("ball exceeds grid extent");
  std::size_t count = 0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const Point d = g.node(i, j) - c;
      if (dot(d, d) <= r * r && u(i, j) > 0.0) ++count;
    }
  return static_cast<double>(count) * g.spacing() * g.spacing();
}

std::vector<double> dK_fd(std::span<const double> radii, std::span<const double> K) {
  const std::size_t n = radii.size();
  if (K.size() != n) throw InvalidInput("radius and K columns differ in length");
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t a = k == 0 ? 0 : k - 1;
    const std::size_t b = k + 1 == n ? n - 1 : k + 1;
    out[k] = (K[b] - K[a]) / (radii[b] - radii[a]);
  }
  return out;
}

}  // namespace bernoulli
