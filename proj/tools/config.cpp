#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "bernoulli/oracles.hpp"

namespace bernoulli::cli {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

double plain_number(const std::string& key, const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ConfigError(key, "expected a number, got '" + s + "'");
  return v;
}

// "0.25" or "1/64"
double number(const std::string& key, const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) return plain_number(key, s);
  const double den = plain_number(key, trim(s.substr(slash + 1)));
  if (den == 0.0) throw ConfigError(key, "division by zero");
  return plain_number(key, trim(s.substr(0, slash))) / den;
}

int integer(const std::string& key, const std::string& s) {
  int v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) throw ConfigError(key, "expected an integer, got '" + s + "'");
  return v;
}

bool boolean(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + s + "'");
}

Point point(const std::string& key, const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw ConfigError(key, "expected x,y, got '" + s + "'");
  return {number(key, parts[0]), number(key, parts[1])};
}

std::vector<double> list(const std::string& key, const std::string& s) {
  std::vector<double> out;
  if (s.rfind("linspace:", 0) == 0) {
    const auto parts = split(s.substr(9), ',');
    if (parts.size() != 3) throw ConfigError(key, "expected linspace:a,b,n");
    const double a = number(key, parts[0]), b = number(key, parts[1]);
    const int n = integer(key, parts[2]);
    if (n < 2) throw ConfigError(key, "linspace needs n >= 2");
    for (int k = 0; k < n; ++k) out.push_back(a + (b - a) * k / (n - 1));
    return out;
  }
  for (const auto& p : split(s, ',')) out.push_back(number(key, p));
  return out;
}

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

// g = max(0, base + amplitude * mean of seeded Fourier modes)
std::function<double(Point)> perturbed(std::function<double(Point)> base, const RunConfig& c) {
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  struct Mode {
    double ax, bx, ay, by;
  };
  std::vector<Mode> modes;
  for (int m = 0; m < c.perturb_modes; ++m) modes.push_back({U(rng), U(rng), U(rng), U(rng)});
  const double Lx = c.hi.x - c.lo.x, Ly = c.hi.y - c.lo.y;
  const Point lo = c.lo;
  const double amp = c.perturb;
  return [=](Point p) {
    double s = 0.0;
    for (std::size_t m = 0; m < modes.size(); ++m) {
      const double k = std::numbers::pi * static_cast<double>(m + 1);
      const double x = (p.x - lo.x) / Lx, y = (p.y - lo.y) / Ly;
      s += modes[m].ax * std::cos(k * x) + modes[m].bx * std::sin(k * x) + modes[m].ay * std::cos(k * y) +
           modes[m].by * std::sin(k * y);
    }
    return std::max(0.0, base(p) + amp * s / (4.0 * static_cast<double>(modes.size())));
  };
}

}  // namespace

const std::map<std::string, std::string>& config_defaults() {
  static const std::map<std::string, std::string> d{
      {"problem.lo", "-1,-1"},
      {"problem.hi", "1,1"},
      {"problem.h", "1/32"},
      {"problem.domain", "grid"},
      {"problem.rect_lo", "-1,-1"},
      {"problem.rect_hi", "1,1"},
      {"problem.disk_center", "0,0"},
      {"problem.disk_radius", "1"},
      {"problem.boundary", "zero"},
      {"problem.perturb", "0"},
      {"problem.perturb_modes", "3"},
      {"problem.lambda", "1"},
      {"problem.density", "linear"},
      {"solver.eps0", "0"},
      {"solver.eps_factor", "0.5"},
      {"solver.eps_min", "0"},
      {"solver.tau_grad", "1e-8"},
      {"solver.max_iterations", "200"},
      {"solver.tau_polish", "1e-8"},
      {"solver.max_polish_sweeps", "20000"},
      {"solver.polish", "true"},
      {"solver.certificate", "true"},
      {"solver.certificate_trials", "50"},
      {"diag.center", "nearest-fb:0,0"},
      {"diag.radii", "auto"},
      {"diag.scales", "0.4,0.2,0.1"},
      {"diag.t", "0.5,1.5"},
      {"run.output", "out"},
      {"run.seed", "1"},
  };
  return d;
}

RunConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> given;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (!config_defaults().contains(key)) throw ConfigError(key, "unknown key");
    if (given.contains(key)) throw ConfigError(key, "repeated key");
    given[key] = value;
  }

  RunConfig c;
  c.echo = config_defaults();
  for (const auto& [k, v] : given) c.echo[k] = v;
  const auto& e = c.echo;

  c.lo = point("problem.lo", e.at("problem.lo"));
  c.hi = point("problem.hi", e.at("problem.hi"));
  require(c.hi.x > c.lo.x && c.hi.y > c.lo.y, "problem.hi", "must exceed problem.lo in both coordinates");
  c.h = number("problem.h", e.at("problem.h"));
  require(c.h > 0.0, "problem.h", "must be positive");
  require((c.hi.x - c.lo.x) / c.h >= 4 && (c.hi.y - c.lo.y) / c.h >= 4, "problem.h", "grid needs at least 4 cells per side");

  c.domain = e.at("problem.domain");
  require(c.domain == "grid" || c.domain == "rectangle" || c.domain == "disk", "problem.domain",
          "expected grid, rectangle or disk");
  c.rect_lo = point("problem.rect_lo", e.at("problem.rect_lo"));
  c.rect_hi = point("problem.rect_hi", e.at("problem.rect_hi"));
  if (c.domain == "rectangle")
    require(c.rect_hi.x > c.rect_lo.x && c.rect_hi.y > c.rect_lo.y, "problem.rect_hi", "must exceed problem.rect_lo");
  c.disk_centre = point("problem.disk_center", e.at("problem.disk_center"));
  c.disk_radius = number("problem.disk_radius", e.at("problem.disk_radius"));
  require(c.disk_radius > 0.0, "problem.disk_radius", "must be positive");

  c.boundary = e.at("problem.boundary");
  if (c.boundary.rfind("const:", 0) == 0) {
    require(number("problem.boundary", c.boundary.substr(6)) >= 0.0, "problem.boundary", "constant must be >= 0");
  } else if (c.boundary != "zero") {
    try {
      parse_oracle(c.boundary);
    } catch (const InvalidInput& ex) {
      throw ConfigError("problem.boundary", ex.what());
    }
  }
  c.perturb = number("problem.perturb", e.at("problem.perturb"));
  require(c.perturb >= 0.0, "problem.perturb", "must be >= 0");
  c.perturb_modes = integer("problem.perturb_modes", e.at("problem.perturb_modes"));
  require(c.perturb_modes >= 1, "problem.perturb_modes", "must be >= 1");
  c.lambda = number("problem.lambda", e.at("problem.lambda"));
  require(c.lambda >= 0.0, "problem.lambda", "must be >= 0");
  c.density = e.at("problem.density");
  try {
    parse_density(c.density);
  } catch (const InvalidInput& ex) {
    throw ConfigError("problem.density", ex.what());
  }

  auto& s = c.solver;
  s.eps0 = number("solver.eps0", e.at("solver.eps0"));
  s.eps_factor = number("solver.eps_factor", e.at("solver.eps_factor"));
  require(s.eps_factor > 0.0 && s.eps_factor < 1.0, "solver.eps_factor", "must lie in (0, 1)");
  s.eps_min = number("solver.eps_min", e.at("solver.eps_min"));
  require(s.eps_min >= 0.0, "solver.eps_min", "must be >= 0");
  s.tau_grad = number("solver.tau_grad", e.at("solver.tau_grad"));
  require(s.tau_grad > 0.0, "solver.tau_grad", "must be positive");
  s.max_iterations = integer("solver.max_iterations", e.at("solver.max_iterations"));
  require(s.max_iterations > 0, "solver.max_iterations", "must be positive");
  s.tau_polish = number("solver.tau_polish", e.at("solver.tau_polish"));
  require(s.tau_polish > 0.0, "solver.tau_polish", "must be positive");
  s.max_polish_sweeps = integer("solver.max_polish_sweeps", e.at("solver.max_polish_sweeps"));
  require(s.max_polish_sweeps > 0, "solver.max_polish_sweeps", "must be positive");
  s.polish = boolean("solver.polish", e.at("solver.polish"));
  c.certificate = boolean("solver.certificate", e.at("solver.certificate"));
  c.certificate_trials = integer("solver.certificate_trials", e.at("solver.certificate_trials"));
  require(c.certificate_trials >= 0, "solver.certificate_trials", "must be >= 0");

  const std::string centre = e.at("diag.center");
  if (centre.rfind("nearest-fb:", 0) == 0) {
    c.centre = {true, point("diag.center", centre.substr(11))};
  } else {
    c.centre = {false, point("diag.center", centre)};
  }
  if (e.at("diag.radii") != "auto") {
    c.radii = list("diag.radii", e.at("diag.radii"));
    require(!c.radii.empty(), "diag.radii", "empty list");
    for (std::size_t k = 0; k < c.radii.size(); ++k) {
      require(c.radii[k] > 0.0, "diag.radii", "radii must be positive");
      require(k == 0 || c.radii[k] > c.radii[k - 1], "diag.radii", "radii must increase");
    }
  }
  c.scales = list("diag.scales", e.at("diag.scales"));
  require(!c.scales.empty(), "diag.scales", "empty list");
  for (std::size_t k = 0; k < c.scales.size(); ++k) {
    require(c.scales[k] > 0.0, "diag.scales", "scales must be positive");
    require(k == 0 || c.scales[k] < c.scales[k - 1], "diag.scales", "scales must decrease");
  }
  c.t_samples = list("diag.t", e.at("diag.t"));
  require(!c.t_samples.empty(), "diag.t", "empty list");
  for (double t : c.t_samples) require(t > 0.0, "diag.t", "samples must be positive");

  c.output = e.at("run.output");
  require(!c.output.empty(), "run.output", "must not be empty");
  const int seed = integer("run.seed", e.at("run.seed"));
  require(seed >= 0, "run.seed", "must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

Problem make_problem(const RunConfig& c) {
  const GridSpec grid = GridSpec::covering(c.lo, c.hi, c.h);
  Domain domain = Domain::of(grid);
  if (c.domain == "rectangle") domain = Domain::rectangle(c.rect_lo, c.rect_hi);
  if (c.domain == "disk") domain = Domain::disk(c.disk_centre, c.disk_radius);

  std::function<double(Point)> g;
  if (c.boundary == "zero") {
    g = [](Point) { return 0.0; };
  } else if (c.boundary.rfind("const:", 0) == 0) {
    const double v = number("problem.boundary", c.boundary.substr(6));
    g = [v](Point) { return v; };
  } else {
    g = parse_oracle(c.boundary).u;
  }
  if (c.perturb > 0.0) g = perturbed(std::move(g), c);

  BernoulliParams params;
  params.lambda = c.lambda;
  params.density = parse_density(c.density);
  return {grid, domain, std::move(g), std::move(params)};
}

}  // namespace bernoulli::cli
