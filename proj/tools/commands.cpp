#include "commands.hpp"

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "bernoulli/monotonicity.hpp"
#include "json.hpp"

namespace bernoulli::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Written next to the target and renamed over it.
void atomic_write(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string field_text(const ScalarField& u) {
  std::ostringstream s;
  write_field(s, u);
  return s.str();
}

std::string free_boundary_csv(const FreeBoundary& fb) {
  std::ostringstream s;
  s << std::setprecision(17) << "segment,vertex,x,y,nx,ny,gx,gy,weight,closed\n";
  for (std::size_t k = 0; k < fb.segments.size(); ++k) {
    const Polyline& pl = fb.segments[k];
    for (std::size_t q = 0; q < pl.vertices.size(); ++q) {
      const BoundaryVertex& v = pl.vertices[q];
      s << k << ',' << q << ',' << v.position.x << ',' << v.position.y << ',' << v.normal[0] << ',' << v.normal[1]
        << ',' << v.gradient[0] << ',' << v.gradient[1] << ',' << v.weight << ',' << (pl.closed ? 1 : 0) << '\n';
    }
  }
  return s.str();
}

// NaN and infinities become null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct NoCentre : std::runtime_error {
  NoCentre() : std::runtime_error("no free boundary point near requested center") {}
};

Domain dump_domain(const RunConfig& c, const GridSpec& g) {
  if (c.domain == "rectangle") return Domain::rectangle(c.rect_lo, c.rect_hi);
  if (c.domain == "disk") return Domain::disk(c.disk_centre, c.disk_radius);
  return Domain::of(g);
}

Point select_centre(const FreeBoundary& fb, const RunConfig& c, double h) {
  if (fb.empty()) throw NoCentre();
  if (c.centre.nearest) return fb.nearest(c.centre.point).position;
  if (norm(fb.nearest(c.centre.point).position - c.centre.point) > h) throw NoCentre();
  return c.centre.point;
}

double edge_distance(const GridSpec& g, Point p) {
  const Point hi = g.upper();
  return std::min({p.x - g.origin().x, hi.x - p.x, p.y - g.origin().y, hi.y - p.y});
}

std::vector<double> diagnostic_radii(const RunConfig& c, const GridSpec& g, Point centre) {
  if (!c.radii.empty()) return c.radii;
  const double h = g.spacing(), rmax = 0.9 * edge_distance(g, centre);
  if (!(rmax > 8.0 * h)) throw ConfigError("diag.radii", "centre too close to the grid edge for automatic radii");
  std::vector<double> r;
  constexpr int n = 20;
  const double r0 = std::max(4.0 * h, rmax / n);
  for (int k = 0; k < n; ++k) r.push_back(r0 + (rmax - r0) * k / (n - 1));
  return r;
}

struct SolveSummary {
  int exit = kOk;
  bool converged = false;
  bool polish_converged = false;
  bool certificate_passed = true;
  double energy = 0.0;
  std::size_t fb_vertices = 0;
};

SolveSummary solve_and_write(const RunConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const Problem p = make_problem(c);
  try {
    p.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError("problem.boundary", e.what());
  }
  const SolveResult r = minimize_penalized(p, c.solver);

  SolveSummary s;
  s.converged = r.converged;
  s.polish_converged = !c.solver.polish || r.polish.converged;
  s.energy = energy(r.u, p.params, p.domain);
  s.fb_vertices = r.free_boundary.vertex_count();

  json cert = nullptr;
  if (c.certificate) {
    CertificateOptions opts;
    opts.trials = c.certificate_trials;
    opts.seed = c.seed;
    const CertificateReport rep = energy_certificate(r.u, p, opts);
    s.certificate_passed = rep.passed();
    cert = {{"tested", rep.tested}, {"failures", rep.failures}, {"min_increase", number(rep.min_increase)}};
  }
  s.exit = s.converged && s.polish_converged ? kOk : kNotConverged;

  const fs::path out(c.output);
  atomic_write(out / "u.field", field_text(r.u));
  atomic_write(out / "free_boundary.csv", free_boundary_csv(r.free_boundary));

  json stages = json::array();
  for (std::size_t k = 0; k < r.stage_eps.size(); ++k) {
    json e = json::array();
    for (double v : r.energy_history[k]) e.push_back(number(v));
    stages.push_back({{"eps", r.stage_eps[k]}, {"energies", e}});
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json m = {
      {"tool", "bernoulli_cli"},
      {"version", kToolVersion},
      {"command", "solve"},
      {"config", c.echo},
      {"wall_time_s", wall},
      {"stages", stages},
      {"grad_norm", number(r.grad_norm)},
      {"threshold", r.threshold},
      {"polish", {{"converged", r.polish.converged}, {"sweeps", r.polish.sweeps}, {"residual", number(r.polish.residual)}}},
      {"energy", s.energy},
      {"free_boundary", {{"segments", r.free_boundary.segments.size()}, {"vertices", s.fb_vertices},
                         {"length", r.free_boundary.length()}}},
      {"certificate", cert},
      {"checks",
       {{"converged", s.converged}, {"polish_converged", s.polish_converged},
        {"certificate_passed", s.certificate_passed}}},
      {"exit_code", s.exit},
  };
  atomic_write(out / "manifest.json", m.dump(2) + "\n");
  return s;
}

}  // namespace

int cmd_solve(const RunConfig& c) { return solve_and_write(c).exit; }

int cmd_diagnose(const std::string& dump, const RunConfig& c) {
  const ScalarField u = load_field(dump);
  const GridSpec& g = u.grid();
  const double h = g.spacing();
  BernoulliParams params;
  params.lambda = c.lambda;
  params.density = parse_density(c.density);

  const FreeBoundary fb = restrict_free_boundary(extract_free_boundary(u), dump_domain(c, g), h);
  Point centre;
  try {
    centre = select_centre(fb, c, h);
  } catch (const NoCentre& e) {
    std::cerr << e.what() << '\n';
    return kNotConverged;
  }
  const std::vector<double> radii = diagnostic_radii(c, g, centre);
  if (!g.contains_disk(centre, radii.back())) throw ConfigError("diag.radii", "largest radius leaves the grid");
  DensityProfile prof;
  try {
    prof = density_profile(u, centre, radii);
  } catch (const InvalidInput& e) {
    // the unrestricted boundary decides; a centre chosen on the restricted one always passes
    std::cerr << e.what() << '\n';
    return kNotConverged;
  }

  const fs::path out(c.output);
  std::ostringstream csv;
  write_profile_csv(csv, prof);
  atomic_write(out / "density.csv", csv.str());

  int violations = 0;
  for (std::size_t k = 1; k < prof.K.size(); ++k)
    if (prof.K[k] < prof.K[k - 1] - 3.0 * h / prof.radii[k]) ++violations;

  const double sup_w = w_positive_sup(u, centre);

  const MaskedField cf = c_field(u, params.density, centre);
  std::size_t masked = 0, pos = 0, neg = 0;
  double cmax = -std::numeric_limits<double>::infinity(), cmin = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < cf.mask.size(); ++n) {
    if (!cf.mask[n]) continue;
    const double v = cf.values.values()[n];
    ++masked;
    pos += v > 0.0;
    neg += v < 0.0;
    cmax = std::max(cmax, v);
    cmin = std::min(cmin, v);
  }
  const MaskedField by = b_dot_y(u, params.density, centre);
  double bmax = -std::numeric_limits<double>::infinity(), bmin = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < by.mask.size(); ++n)
    if (by.mask[n]) {
      bmax = std::max(bmax, by.values.values()[n]);
      bmin = std::min(bmin, by.values.values()[n]);
    }
  const CurvatureReport cr = curvature_identity_check(u, fb, params);

  json summary = {
      {"tool", "bernoulli_cli"},
      {"version", kToolVersion},
      {"command", "diagnose"},
      {"dump", dump},
      {"config", c.echo},
      {"centre", {centre.x, centre.y}},
      {"h", h},
      {"density", {{"radii", prof.radii.size()}, {"K_min", *std::min_element(prof.K.begin(), prof.K.end())},
                   {"K_max", *std::max_element(prof.K.begin(), prof.K.end())}, {"monotonicity_violations", violations}}},
      {"radial_deficit_l2", radial_deficit(u, fb, centre, radii.back())},
      {"sup_w_positive", sup_w},
      {"c_field", {{"masked", masked}, {"positive", pos}, {"negative", neg}, {"max", number(cmax)}, {"min", number(cmin)}}},
      {"b_dot_y", {{"min", number(bmin)}, {"max", number(bmax)}}},
      {"curvature",
       {{"vertices", cr.samples.size()}, {"regular", cr.regular}, {"sup_u_NT", cr.sup_u_NT},
        {"sup_identity_error", cr.sup_identity_error}, {"sup_relative_error", cr.sup_relative_error},
        {"min_minus_u_NN", number(cr.min_minus_u_NN)}}},
  };
  atomic_write(out / "diagnostics.json", summary.dump(2) + "\n");
  return kOk;
}

int cmd_blowup(const std::string& dump, const RunConfig& c) {
  const ScalarField u = load_field(dump);
  const GridSpec& g = u.grid();
  const double h = g.spacing();
  const FreeBoundary fb = restrict_free_boundary(extract_free_boundary(u), dump_domain(c, g), h);
  Point centre;
  try {
    centre = select_centre(fb, c, h);
  } catch (const NoCentre& e) {
    std::cerr << e.what() << '\n';
    return kNotConverged;
  }
  const double tmax = *std::max_element(c.t_samples.begin(), c.t_samples.end());
  if (tmax > 2.0) throw ConfigError("diag.t", "samples above 2 leave the rescaled window");
  BlowupSequence seq;
  try {
    seq = blowup(u, centre, c.scales);
  } catch (const InvalidInput& e) {
    throw ConfigError("diag.scales", e.what());
  }

  const fs::path out(c.output);
  std::ostringstream csv;
  csv << std::setprecision(17) << "k,r_k,cauchy_diff,homog_defect\n";
  for (std::size_t k = 0; k < seq.fields.size(); ++k) {
    atomic_write(out / ("blowup_" + std::to_string(k) + ".field"), field_text(seq.fields[k]));
    // same quantity as on the rescaled field, without the resampling floor
    const double d = homogeneity_defect(u, centre, 0.5 * seq.scales[k], c.t_samples);
    csv << k << ',' << seq.scales[k] << ',' << seq.cauchy_diff[k] << ',' << d << '\n';
  }
  atomic_write(out / "blowup.csv", csv.str());
  return kOk;
}

int cmd_sweep(const std::vector<std::string>& configs, const std::string& output, int jobs) {
  struct Entry {
    std::string name;
    RunConfig config;
    std::string error;
    SolveSummary summary;
  };
  std::vector<Entry> runs;
  for (const auto& path : configs) {
    Entry e;
    e.name = fs::path(path).stem().string();
    for (const auto& other : runs)
      if (other.name == e.name) throw ConfigError("sweep", "two configs share the name " + e.name);
    try {
      e.config = load_config(path);
      e.config.output = (fs::path(output) / e.name).string();
    } catch (const ConfigError& ex) {
      e.error = ex.what();
      e.summary.exit = kConfigError;
    }
    runs.push_back(std::move(e));
  }

  std::atomic<std::size_t> next{0};
  std::mutex log;
  auto worker = [&] {
    for (std::size_t k = next++; k < runs.size(); k = next++) {
      Entry& e = runs[k];
      if (!e.error.empty()) continue;
      try {
        e.summary = solve_and_write(e.config);
      } catch (const std::exception& ex) {
        e.error = ex.what();
        e.summary.exit = kConfigError;
      }
      std::lock_guard lock(log);
      std::cerr << e.name << ": exit " << e.summary.exit << '\n';
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(runs.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << std::setprecision(17) << "run,exit_code,converged,polish_converged,certificate_passed,energy,fb_vertices\n";
  int worst = kOk;
  for (const auto& e : runs) {
    if (!e.error.empty()) std::cerr << e.name << ": " << e.error << '\n';
    const SolveSummary& s = e.summary;
    csv << e.name << ',' << s.exit << ',' << s.converged << ',' << s.polish_converged << ',' << s.certificate_passed
        << ',' << (e.error.empty() ? s.energy : std::numeric_limits<double>::quiet_NaN()) << ',' << s.fb_vertices
        << '\n';
    worst = std::max(worst, s.exit);
  }
  atomic_write(fs::path(output) / "sweep.csv", csv.str());
  return worst;
}

namespace {

std::vector<std::string> expand(const std::vector<std::string>& patterns) {
  std::vector<std::string> out;
  for (const auto& p : patterns) {
    glob_t g{};
    if (::glob(p.c_str(), 0, nullptr, &g) == 0) {
      for (std::size_t k = 0; k < g.gl_pathc; ++k) out.emplace_back(g.gl_pathv[k]);
    } else {
      out.push_back(p);  // reported as unreadable by load_config
    }
    globfree(&g);
  }
  return out;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"One-phase free boundary lab: solve, diagnose, blow up, sweep"};
  app.require_subcommand(1);

  std::string config, dump, output, sweep_out = "sweep";
  std::vector<std::string> patterns;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  auto* solve = app.add_subcommand("solve", "Minimize J_F for a config");
  solve->add_option("config", config, "config file")->required();
  solve->add_option("-o,--output", output, "overrides run.output");

  auto* diagnose = app.add_subcommand("diagnose", "Density profile and diagnostics of a field dump");
  diagnose->add_option("dump", dump, "field dump")->required();
  diagnose->add_option("config", config, "config file")->required();
  diagnose->add_option("-o,--output", output, "overrides run.output");

  auto* blow = app.add_subcommand("blowup", "Blow-up sequence of a field dump");
  blow->add_option("dump", dump, "field dump")->required();
  blow->add_option("config", config, "config file")->required();
  blow->add_option("-o,--output", output, "overrides run.output");

  auto* sweep = app.add_subcommand("sweep", "Solve several configs concurrently");
  sweep->add_option("configs", patterns, "config files or glob patterns")->required();
  sweep->add_option("-o,--output", sweep_out, "directory for runs and sweep.csv");
  sweep->add_option("-j,--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber);

  auto* keys = app.add_subcommand("keys", "List config keys and defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (keys->parsed()) {
      for (const auto& [k, v] : config_defaults()) std::cout << k << " = " << v << '\n';
      return kOk;
    }
    if (sweep->parsed()) return cmd_sweep(expand(patterns), sweep_out, jobs);
    RunConfig c = load_config(config);
    if (!output.empty()) c.output = output;
    if (solve->parsed()) return cmd_solve(c);
    if (diagnose->parsed()) return cmd_diagnose(dump, c);
    return cmd_blowup(dump, c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace bernoulli::cli
