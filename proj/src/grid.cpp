#include "bernoulli/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace bernoulli {

double norm(Point a) { return std::hypot(a.x, a.y); }

GridSpec::GridSpec(Point origin, double spacing, int nx, int ny)
    : origin_(origin), h_(spacing), nx_(nx), ny_(ny) {
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw InvalidInput("grid spacing must be positive and finite");
  if (nx < 3 || ny < 3) throw InvalidInput("grid needs at least 3 nodes per axis");
  if (!std::isfinite(origin.x) || !std::isfinite(origin.y))
    throw InvalidInput("grid origin must be finite");
}

bool GridSpec::contains(Point p, double margin) const {
  const Point hi = upper();
  return p.x >= origin_.x + margin && p.x <= hi.x - margin && p.y >= origin_.y + margin &&
         p.y <= hi.y - margin;
}

bool GridSpec::contains_disk(Point c, double r) const {
  // Small tolerance so that disks touching the grid edge up to rounding are accepted.
  const double tol = 1e-12 * (1.0 + std::abs(r));
  const Point hi = upper();
  return c.x - r >= origin_.x - tol && c.x + r <= hi.x + tol && c.y - r >= origin_.y - tol &&
         c.y + r <= hi.y + tol;
}

GridSpec GridSpec::covering(Point lo, Point hi, double h) {
  const int nx = static_cast<int>(std::lround((hi.x - lo.x) / h)) + 1;
  const int ny = static_cast<int>(std::lround((hi.y - lo.y) / h)) + 1;
  return GridSpec(lo, h, nx, ny);
}

ScalarField::ScalarField(GridSpec grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

ScalarField::ScalarField(GridSpec grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw InvalidInput("value count does not match grid dimensions");
  for (double v : values_)
    if (!std::isfinite(v)) throw InvalidInput("non-finite field value");
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::interpolate(Point p) const {
  const double h = grid_.spacing();
  const double fx = (p.x - grid_.origin().x) / h;
  const double fy = (p.y - grid_.origin().y) / h;
  const double tol = 1e-9;
  if (fx < -tol || fy < -tol || fx > grid_.nx() - 1 + tol || fy > grid_.ny() - 1 + tol)
    throw InvalidInput("interpolation point outside grid");
  const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, grid_.nx() - 2);
  const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, grid_.ny() - 2);
  const double s = fx - i;
  const double t = fy - j;
  const auto& u = *this;
  return (1 - s) * (1 - t) * u(i, j) + s * (1 - t) * u(i + 1, j) + (1 - s) * t * u(i, j + 1) +
         s * t * u(i + 1, j + 1);
}

double Sym2::min_eigenvalue() const {
  const double m = 0.5 * (xx + yy);
  const double d = std::hypot(0.5 * (xx - yy), xy);
  return m - d;
}

double Sym2::max_eigenvalue() const {
  const double m = 0.5 * (xx + yy);
  const double d = std::hypot(0.5 * (xx - yy), xy);
  return m + d;
}

void write_field(std::ostream& out, const ScalarField& u) {
  const auto& g = u.grid();
  out << std::setprecision(17);
  out << g.nx() << ' ' << g.ny() << ' ' << g.spacing() << ' ' << g.origin().x << ' '
      << g.origin().y << '\n';
  for (double v : u.values()) out << v << '\n';
}

namespace {

double parse_double(const std::string& tok) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) throw InvalidInput("malformed number in field dump: " + tok);
  return v;
}

}  // namespace

ScalarField read_field(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw InvalidInput("empty field dump");
  std::istringstream hs(header);
  int nx = 0, ny = 0;
  std::string h, x0, y0;
  if (!(hs >> nx >> ny >> h >> x0 >> y0)) throw InvalidInput("malformed field dump header");
  GridSpec grid({parse_double(x0), parse_double(y0)}, parse_double(h), nx, ny);
  std::vector<double> values;
  values.reserve(grid.size());
  std::string line;
  while (values.size() < grid.size() && std::getline(in, line)) {
    if (line.empty()) continue;
    values.push_back(parse_double(line));
  }
  if (values.size() != grid.size()) throw InvalidInput("field dump truncated");
  return ScalarField(grid, std::move(values));
}

void save_field(const std::string& path, const ScalarField& u) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_field(out, u);
}

ScalarField load_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open field dump " + path);
  return read_field(in);
}

}  // namespace bernoulli
