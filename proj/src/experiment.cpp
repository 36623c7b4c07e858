#include "wave_apost/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <ostream>
#include <random>
#include <sstream>

#include "wave_apost/errors.hpp"

namespace wave_apost {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad number for '" + key + "': " + v);
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x)) throw ConfigError("'" + key + "' must be an integer");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("bad boolean for '" + key + "': " + v);
}

}  // namespace

AppConfig parse_config(const std::string& text, AppConfig cfg) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    RunConfig& r = cfg.run;
    if (key == "a") r.a = to_double(key, val);
    else if (key == "b") r.b = to_double(key, val);
    else if (key == "H") r.H = to_double(key, val);
    else if (key == "cfl") r.cfl = to_double(key, val);
    else if (key == "T") r.T = to_double(key, val);
    else if (key == "window_lo") r.window0.lo = to_double(key, val);
    else if (key == "window_hi") r.window0.hi = to_double(key, val);
    else if (key == "theta") r.theta = to_double(key, val);
    else if (key == "degree") r.degree = to_int(key, val);
    else if (key == "wave_speed") r.wave_speed = to_double(key, val);
    else if (key == "steps") r.steps = to_int(key, val);
    else if (key == "check_stability") r.check_stability = to_bool(key, val);
    else if (key == "mass") {
      if (val == "lumped") r.mass = MassMode::lumped;
      else if (val == "consistent") r.mass = MassMode::consistent;
      else throw ConfigError("mass must be lumped or consistent");
    } else if (key == "mesh") {
      if (val == "moving_window") r.mesh_mode = MeshMode::moving_window;
      else if (val == "fixed_window") r.mesh_mode = MeshMode::fixed_window;
      else if (val == "uniform_coarse") r.mesh_mode = MeshMode::uniform_coarse;
      else if (val == "uniform_fine") r.mesh_mode = MeshMode::uniform_fine;
      else throw ConfigError("unknown mesh mode: " + val);
    } else if (key == "time_indicator") {
      if (val == "derived") cfg.estimator.time_form = TimeIndicatorForm::derived;
      else if (val == "printed") cfg.estimator.time_form = TimeIndicatorForm::printed;
      else throw ConfigError("time_indicator must be derived or printed");
    } else if (key == "mu0_space") {
      if (val == "printed") cfg.estimator.mu0_space = Mu0Space::printed;
      else if (val == "shifted") cfg.estimator.mu0_space = Mu0Space::shifted;
      else throw ConfigError("mu0_space must be printed or shifted");
    } else if (key == "problem") {
      if (val != "gaussian_pulse" && val != "zero") throw ConfigError("unknown problem: " + val);
      cfg.problem = val;
    } else if (key == "h_list") {
      cfg.h_list.clear();
      std::istringstream items(val);
      std::string item;
      while (std::getline(items, item, ',')) cfg.h_list.push_back(to_double(key, trim(item)));
    } else if (key == "out") {
      cfg.out_dir = val;
    } else {
      throw ConfigError("unknown config key: " + key);
    }
  }
  return cfg;
}

AppConfig load_config(const std::filesystem::path& file, AppConfig base) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

Problem make_problem(const std::string& name, double c) {
  Problem p;
  if (name == "zero") {
    auto z1 = [](double) { return 0.0; };
    auto z2 = [](double, double) { return 0.0; };
    p.u0 = z1;
    p.v0 = z1;
    p.u = z2;
    p.v = z2;
    p.u_x = z2;
    return p;
  }
  if (name != "gaussian_pulse") throw ConfigError("unknown problem: " + name);
  p.u = [c](double x, double t) {
    const double s = x - 1.0 - c * t;
    return std::exp(-4.0 * s * s);
  };
  p.v = [c](double x, double t) {
    const double s = x - 1.0 - c * t;
    return 8.0 * c * s * std::exp(-4.0 * s * s);
  };
  p.u_x = [c](double x, double t) {
    const double s = x - 1.0 - c * t;
    return -8.0 * s * std::exp(-4.0 * s * s);
  };
  p.u0 = [u = p.u](double x) { return u(x, 0.0); };
  p.v0 = [v = p.v](double x) { return v(x, 0.0); };
  return p;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

RunOutcome execute(const AppConfig& cfg) {
  const Problem p = make_problem(cfg.problem, cfg.run.wave_speed);
  RunConfig rc = cfg.run;
  rc.ghost_steps = true;
  RunOutcome out;
  out.trajectory = run(rc, p);
  out.report = total_bounds(out.trajectory, p, cfg.estimator);
  return out;
}

namespace {

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream f(file);
  if (!f) throw ConfigError("cannot write " + file.string());
  return f;
}

}  // namespace

void write_indicators_csv(const std::filesystem::path& file, const RunOutcome& out) {
  auto f = open_out(file);
  f << "# n,t,eps0,eps1,theta0_mean,theta1_mean,alpha,mu0,mu1,mu2,delta_mean,eta\n";
  for (const auto& s : out.report.samples) {
    f << s.n << ',' << fmt(s.t) << ',' << fmt(s.eps0) << ',' << fmt(s.eps1) << ','
      << fmt(s.theta0_mean()) << ',' << fmt(s.theta1_mean()) << ',' << fmt(s.alpha) << ','
      << fmt(s.mu0) << ',' << fmt(s.mu1) << ',' << fmt(s.mu2) << ',' << fmt(s.delta_mean()) << ','
      << fmt(s.eta) << '\n';
  }
}

void write_mesh_csv(const std::filesystem::path& file, const Trajectory& traj) {
  auto f = open_out(file);
  f << "# n,t,x\n";
  for (int n = 0; n <= traj.steps(); ++n) {
    const double t = traj.grid.node(n);
    for (double x : traj.space(n)->mesh().nodes()) f << n << ',' << fmt(t) << ',' << fmt(x) << '\n';
  }
}

void write_solution_csv(const std::filesystem::path& file, const Trajectory& traj) {
  auto f = open_out(file);
  f << "# t,x,U\n";
  std::vector<int> snaps{0};
  if (traj.steps() > 0) snaps.push_back(traj.steps());
  for (int n : snaps) {
    const WaveState& s = traj.state(n);
    const double t = traj.grid.node(n);
    const Mesh1D& m = s.space()->mesh();
    for (std::size_t i = 0; i < m.num_nodes(); ++i) {
      f << fmt(t) << ',' << fmt(m.node(i)) << ',' << fmt(s.space()->node_value(s.U.coeffs, i)) << '\n';
    }
  }
}

void write_summary_csv(const std::filesystem::path& file, const RunOutcome& out) {
  auto f = open_out(file);
  const EstimateReport& r = out.report;
  f << "# quantity,value\n";
  f << "H," << fmt(out.trajectory.space(0)->mesh().macro_h()) << '\n';
  f << "tau," << fmt(out.trajectory.grid.tau()) << '\n';
  f << "steps," << out.trajectory.steps() << '\n';
  f << "bound_U," << fmt(r.bound_U) << '\n';
  f << "bound_V," << fmt(r.bound_V) << '\n';
  f << "initial_energy_error," << fmt(r.initial_energy_error) << '\n';
  f << "max_eps0," << fmt(r.max_eps0) << '\n';
  f << "max_eps1," << fmt(r.max_eps1) << '\n';
  f << "eta_total," << fmt(r.eta_total) << '\n';
  f << "true_error_U," << fmt(r.true_error_U) << '\n';
  f << "true_error_V," << fmt(r.true_error_V) << '\n';
  f << "l2_error_U," << fmt(r.l2_error_U) << '\n';
  f << "relative_energy_error," << fmt(r.relative_energy_error) << '\n';
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("slope fit needs two or more points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceResult convergence_study(const AppConfig& cfg, const std::vector<double>& h_list) {
  if (h_list.size() < 2) throw ConfigError("convergence study needs at least two values of H");
  std::vector<std::future<ConvergenceRow>> jobs;
  for (double H : h_list) {
    AppConfig c = cfg;
    c.run.H = H;
    jobs.push_back(std::async(std::launch::async, [c]() {
      const RunOutcome out = execute(c);
      ConvergenceRow row;
      row.H = out.trajectory.space(0)->mesh().macro_h();
      row.tau = out.trajectory.grid.tau();
      row.steps = out.trajectory.steps();
      const EstimateReport& r = out.report;
      row.rel_energy_error = r.relative_energy_error;
      row.l2_error = r.l2_error_U;
      row.bound_U = r.bound_U;
      row.bound_V = r.bound_V;
      row.true_error_U = r.true_error_U;
      row.true_error_V = r.true_error_V;
      row.eta_total = r.eta_total;
      row.initial_error = r.initial_energy_error;
      return row;
    }));
  }
  ConvergenceResult res;
  for (auto& j : jobs) res.rows.push_back(j.get());
  std::vector<double> h, e, l, bu, bv;
  for (const auto& r : res.rows) {
    h.push_back(r.H);
    e.push_back(r.rel_energy_error);
    l.push_back(r.l2_error);
    bu.push_back(r.bound_U);
    bv.push_back(r.bound_V);
  }
  const bool positive = std::all_of(res.rows.begin(), res.rows.end(), [](const ConvergenceRow& r) {
    return r.rel_energy_error > 0 && r.l2_error > 0 && r.bound_U > 0 && r.bound_V > 0;
  });
  if (positive) {
    res.slope_energy = fit_slope(h, e);
    res.slope_l2 = fit_slope(h, l);
    res.slope_bound_U = fit_slope(h, bu);
    res.slope_bound_V = fit_slope(h, bv);
  }
  return res;
}

void write_convergence_csv(const std::filesystem::path& dir, const ConvergenceResult& res) {
  {
    auto f = open_out(dir / "convergence.csv");
    f << "# H,tau,steps,rel_energy_error,l2_error,bound_U,bound_V,true_error_U,true_error_V,"
         "eta_total,initial_error\n";
    for (const auto& r : res.rows) {
      f << fmt(r.H) << ',' << fmt(r.tau) << ',' << r.steps << ',' << fmt(r.rel_energy_error) << ','
        << fmt(r.l2_error) << ',' << fmt(r.bound_U) << ',' << fmt(r.bound_V) << ','
        << fmt(r.true_error_U) << ',' << fmt(r.true_error_V) << ',' << fmt(r.eta_total) << ','
        << fmt(r.initial_error) << '\n';
    }
  }
  auto f = open_out(dir / "slopes.csv");
  f << "# quantity,slope\n";
  f << "rel_energy_error," << fmt(res.slope_energy) << '\n';
  f << "l2_error," << fmt(res.slope_l2) << '\n';
  f << "bound_U," << fmt(res.slope_bound_U) << '\n';
  f << "bound_V," << fmt(res.slope_bound_V) << '\n';
}

double scheme_form_difference(int steps) {
  RunConfig rc;
  rc.mesh_mode = MeshMode::fixed_window;
  rc.ghost_steps = false;
  rc.steps = steps;
  rc.T = steps * rc.cfl * 0.3;
  Problem p = make_problem("gaussian_pulse");
  p.f = [](double x, double t) { return std::sin(x) * std::cos(3.0 * t); };
  const Trajectory traj = run(rc, p);
  const SpacePtr sp = traj.space(0);
  const double tau = traj.grid.tau();
  const Vec Pv0 = l2_project(sp, p.v0).coeffs;
  const auto U = two_step_run(
      sp, traj.state(0).U.coeffs, Pv0, [&](int n) { return traj.source(n).coeffs; }, tau, steps);
  double diff = 0.0;
  for (int n = 0; n <= steps; ++n) {
    diff = std::max(diff, (U[static_cast<std::size_t>(n)] - traj.state(n).U.coeffs).cwiseAbs().maxCoeff());
  }
  return diff;
}

double lts_substep_difference() {
  const double H = 0.3;
  const int count = static_cast<int>(std::lround(20.0 / H));
  const double h = 20.0 / count;
  // every macro cell but the outer two refined: all elements, hence all dofs, fine
  const Mesh1D mesh = build_window_mesh(-10.0, 10.0, count, Interval{-10.0 + 1.5 * h, 10.0 - 1.5 * h});
  const SpacePtr sp = FeSpace::create(mesh);
  const double tau = 0.52 * H;
  const Problem p = make_problem("gaussian_pulse");
  const DiscreteField U = l2_project(sp, p.u0);
  const DiscreteField Uprev = l2_project(sp, [&](double x) { return p.u(x, -tau); });
  const DiscreteField zero = DiscreteField::zero(sp);
  const DiscreteField sub = lts_substep_update(U, Uprev, zero, tau);
  const Vec closed = 2.0 * U.coeffs - Uprev.coeffs - tau * tau * lts_operator_apply(U, tau).coeffs;
  return (sub.coeffs - closed).cwiseAbs().maxCoeff() / closed.cwiseAbs().maxCoeff();
}

double energy_drift(int steps, std::optional<MassMode> energy_mass) {
  RunConfig rc;
  rc.mesh_mode = MeshMode::uniform_coarse;
  rc.ghost_steps = false;
  rc.steps = steps + 1;
  rc.T = (steps + 1) * rc.cfl * 0.3;
  const Trajectory traj = run(rc, make_problem("gaussian_pulse"));
  const double tau = traj.grid.tau();
  const double e0 = shadow_energy(traj.state(0).U, traj.state(1).U, tau, energy_mass);
  double drift = 0.0;
  for (int n = 1; n < steps; ++n) {
    const double e = shadow_energy(traj.state(n).U, traj.state(n + 1).U, tau, energy_mass);
    drift = std::max(drift, std::abs(e - e0) / std::abs(e0));
  }
  return drift;
}

std::vector<BrSpotCheck> br_reliability(int count, int ref_refine, unsigned seed) {
  const Mesh1D mesh = build_window_mesh(-10.0, 10.0, 0.3, Interval{-1.9, 3.9});
  const SpacePtr sp = FeSpace::create(mesh);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  std::vector<BrSpotCheck> out;
  for (int k = 0; k < count; ++k) {
    Vec c(sp->dim());
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = ud(rng);
    const DiscreteField w(sp, c);
    out.push_back({reconstruction_error(w, ref_refine), br_estimator(w, sp, BrNorm::energy)});
  }
  return out;
}

StabilityDemo stability_demo(double H, double cfl, int blowup_steps) {
  StabilityDemo demo;
  const Problem p = make_problem("gaussian_pulse");
  {
    RunConfig rc;
    rc.H = H;
    rc.cfl = cfl;
    rc.mesh_mode = MeshMode::uniform_fine;
    rc.check_stability = false;
    rc.ghost_steps = false;
    rc.steps = blowup_steps;
    const int count = static_cast<int>(std::lround((rc.b - rc.a) / H));
    rc.T = blowup_steps * cfl * (rc.b - rc.a) / count;
    const Trajectory traj = run(rc, p);
    const double e0 = discrete_energy(traj.state(0));
    for (int n = 1; n <= traj.steps(); ++n) {
      demo.fine_growth = std::max(demo.fine_growth, discrete_energy(traj.state(n)) / e0);
      demo.fine_steps = n;
      if (demo.fine_growth > 1e3) break;
    }
    demo.fine_flagged_unstable = !lts_stability(*traj.space(0), traj.grid.tau()).stable;
  }
  {
    RunConfig rc;
    rc.H = H;
    rc.cfl = cfl;
    rc.ghost_steps = false;
    const Trajectory traj = run(rc, p);
    const double e0 = discrete_energy(traj.state(0));
    for (int n = 0; n <= traj.steps(); ++n) {
      demo.lts_growth = std::max(demo.lts_growth, discrete_energy(traj.state(n)) / e0);
    }
  }
  return demo;
}

namespace {

CheckResult make_check(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok, std::move(detail)};
}

std::string sci(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyMutations& mutations) {
  std::vector<CheckResult> out;

  {
    const TimeGrid g(1.0, 10);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    double pu = 0.0;
    bool bubble_ok = true;
    for (int k = 0; k < 1000; ++k) {
      const double t = ut(rng);
      double s = 0.0;
      for (int n = 0; n <= g.steps(); ++n) s += hat_basis(g, HalfIndex::integer(n), t);
      pu = std::max(pu, std::abs(s - 1.0));
      for (int tw = -1; tw <= 2 * g.steps() + 1; ++tw) {
        const double q = bubble(g, HalfIndex{tw}, t);
        bubble_ok = bubble_ok && q >= 0.0 && q <= 0.125;
      }
    }
    out.push_back(make_check("time basis partition of unity", pu < 1e-14, "max deviation " + sci(pu)));
    out.push_back(make_check("bubble bounds", bubble_ok, "0 <= q <= 1/8"));
  }

  {
    const double h = 0.25;
    const SpacePtr sp = FeSpace::create(build_uniform(0.0, 2.0, h));
    const auto& K = sp->ops().stiffness;
    const double dk = std::max({std::abs(K.lower[3] + 1.0 / h), std::abs(K.diag[3] - 2.0 / h),
                                std::abs(K.upper[3] + 1.0 / h)});
    const double dm = std::abs(sp->ops().mass_lumped[3] - h);
    out.push_back(make_check("assembly oracles", dk < 1e-12 && dm < 1e-14,
                             "stiffness row error " + sci(dk) + ", lumped mass error " + sci(dm)));
  }

  {
    const double d = scheme_form_difference(100);
    out.push_back(make_check("scheme-form equivalence", d < 1e-11, "max difference " + sci(d)));
  }
  {
    const double d = lts_substep_difference();
    out.push_back(make_check("LTS-substep equivalence", d < 1e-12, "relative difference " + sci(d)));
  }

  {
    IdentityOptions io;
    if (mutations.flip_bubble_sign) {
      io.bubble = [](double tau, HalfIndex nu, double t) { return -bubble_raw(tau, nu, t); };
    }
    for (const auto& c : verify_reconstruction_identities(io)) {
      out.push_back(make_check(c.name, c.passed,
                               "max relative residual " + sci(c.max_residual) +
                                   (c.detail.empty() ? "" : "; " + c.detail)));
    }
  }

  {
    const auto spots = br_reliability(5, 4);
    bool ok = true;
    std::string detail;
    for (const auto& s : spots) {
      ok = ok && s.reconstruction_error <= s.estimator;
      detail += sci(s.reconstruction_error) + "<=" + sci(s.estimator) + " ";
    }
    out.push_back(make_check("BR reliability spot checks", ok, detail));
  }

  {
    const auto mass = mutations.wrong_lumping ? std::optional<MassMode>(MassMode::consistent)
                                              : std::nullopt;
    const double d = energy_drift(1000, mass);
    out.push_back(make_check("energy drift", d < 1e-10, "relative drift " + sci(d)));
  }
  return out;
}

int cmd_run(const AppConfig& cfg, std::ostream& log) {
  std::filesystem::create_directories(cfg.out_dir);
  const RunOutcome out = execute(cfg);
  for (const auto& w : out.trajectory.warnings) log << "warning: " << w << '\n';
  write_indicators_csv(cfg.out_dir / "indicators.csv", out);
  write_mesh_csv(cfg.out_dir / "mesh.csv", out.trajectory);
  write_solution_csv(cfg.out_dir / "solution.csv", out.trajectory);
  write_summary_csv(cfg.out_dir / "summary.csv", out);
  log << "steps " << out.trajectory.steps() << ", tau " << fmt(out.trajectory.grid.tau())
      << ", mesh changes " << out.trajectory.mesh_change_steps.size() << '\n';
  log << "bound_U " << fmt(out.report.bound_U) << "  true_error_U " << fmt(out.report.true_error_U)
      << '\n';
  log << "bound_V " << fmt(out.report.bound_V) << "  true_error_V " << fmt(out.report.true_error_V)
      << '\n';
  log << "outputs written to " << cfg.out_dir.string() << '\n';
  return 0;
}

int cmd_convergence(const AppConfig& cfg, std::ostream& log) {
  std::filesystem::create_directories(cfg.out_dir);
  const ConvergenceResult res = convergence_study(cfg, cfg.h_list);
  write_convergence_csv(cfg.out_dir, res);
  log << "# H,rel_energy_error,l2_error,bound_U,bound_V\n";
  for (const auto& r : res.rows) {
    log << fmt(r.H) << ',' << fmt(r.rel_energy_error) << ',' << fmt(r.l2_error) << ','
        << fmt(r.bound_U) << ',' << fmt(r.bound_V) << '\n';
  }
  log << "slopes: energy " << fmt(res.slope_energy) << ", l2 " << fmt(res.slope_l2) << ", bound_U "
      << fmt(res.slope_bound_U) << ", bound_V " << fmt(res.slope_bound_V) << '\n';
  return 0;
}

int cmd_verify(const VerifyMutations& mutations, std::ostream& log) {
  const auto checks = run_verification(mutations);
  bool ok = true;
  for (const auto& c : checks) {
    log << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    ok = ok && c.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace wave_apost
