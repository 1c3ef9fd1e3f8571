#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "wgqst/analytic.hpp"
#include "wgqst/dispersion.hpp"
#include "wgqst/dynamics.hpp"
#include "wgqst/experiments.hpp"
#include "wgqst/optimize.hpp"
#include "wgqst/ramp.hpp"

#ifndef WGQST_VERSION
#define WGQST_VERSION "unknown"
#endif

namespace wgqst {

namespace fs = std::filesystem;
using nlohmann::json;

const char* version() { return WGQST_VERSION; }

namespace {

// Runs fn(i) for i < n on up to `threads` workers; rethrows the first failure by index.
template <class F>
void parallel_for(int n, int threads, F&& fn) {
  std::vector<std::exception_ptr> err(static_cast<std::size_t>(n));
  const int workers = std::clamp(threads, 1, std::max(1, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          err[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
}

class Output {
 public:
  explicit Output(const ExperimentSpec& s) : spec_(s) {
    std::error_code ec;
    fs::create_directories(s.output, ec);
    if (ec) throw DomainError("cannot create output directory '" + s.output.string() + "': " + ec.message());
  }

  std::vector<std::string> header() const {
    const auto& p = spec_.params;
    std::ostringstream u;
    u << std::setprecision(17) << "units: hbar=1 gamma=" << p.gamma() << " v_g=" << p.v_g()
      << " omega_q=" << p.omega_q() << "; time 1/gamma, length v_g/gamma, frame rotating at omega_q";
    return {std::string("wgqst ") + version(), "experiment=" + spec_.name, u.str(), "config=" + spec_to_json(spec_)};
  }

  std::ofstream open(const std::string& name) {
    const fs::path path = spec_.output / name;
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write '" + path.string() + "'");
    files_.push_back(path);
    return out;
  }

  void write_json(const std::string& name, json payload) {
    json meta;
    meta["version"] = version();
    meta["experiment"] = spec_.name;
    meta["units"] = header()[2].substr(7);
    meta["config"] = json::parse(spec_to_json(spec_));
    payload["metadata"] = meta;
    auto out = open(name);
    out << payload.dump(2) << "\n";
  }

  const std::vector<fs::path>& files() const { return files_; }

 private:
  const ExperimentSpec& spec_;
  std::vector<fs::path> files_;
};

double max_group_velocity(const DispersionRelation& disp, const PhysicalParams& p, double window) {
  double v = 0.0;
  for (int i = 0; i <= 2000; ++i) v = std::max(v, disp.group_velocity(p.omega_q() - window + window * i / 1000.0));
  return v;
}

struct DesignRun {
  SimulationGrid grid;
  TransferResult transfer;
  double norm_error = 0.0;
};

// Largest |<psi(t)|psi(t)> - 1| over evenly spaced times of the window.
double norm_drift(const EigenSystem& eig, const StateVector& psi0, TimeWindow w) {
  double worst = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double t = w.lo + (w.hi - w.lo) * i / 20.0;
    const double n = evolve(eig, psi0, t).norm();
    worst = std::max(worst, std::abs(n * n - 1.0));
  }
  return worst;
}

DesignRun run_design(const PhysicalParams& p, const DispersionRelation& disp, const GridSettings& g, double guess,
                     std::optional<double> x2 = std::nullopt) {
  SimulationGrid grid = build_grid(p, disp, g.modes, g.window);
  if (x2) grid = grid.with_positions(grid.x1(), *x2);
  const EigenSystem eig = diagonalize(assemble_bordered(grid, disp, p, 2));
  const StateVector psi0 = StateVector::excited(0, 2, grid.size());
  const TimeWindow w = default_time_window(grid, p, guess, max_group_velocity(disp, p, g.window));
  DesignRun r{grid, max_transfer(eig, psi0, w, g.resolution), 0.0};
  r.norm_error = norm_drift(eig, psi0, w);
  return r;
}

double transit_guess(const PhysicalParams& p) { return p.d() / p.v_g() + 2.0 / p.gamma(); }

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(6) << x;
  return s.str();
}

DispersionRelation make_dispersion(const ExperimentSpec& s) {
  const auto& p = s.params;
  const auto& c = s.dispersion;
  if (c.kind == "far") return DispersionRelation::analytic_far(p);
  if (c.kind == "near") return DispersionRelation::analytic_near(p, c.delta_t);
  if (c.kind == "linear") return DispersionRelation::linear(p.v_g());
  if (c.kind == "corrected") {
    auto r = corrected_dispersion(p, s.grid.window);
    if (auto* f = std::get_if<NonInvertible>(&r))
      throw NonInvertibleError("corrected dispersion is not invertible near omega = " + fmt(f->omega) + ": " +
                               f->reason);
    return std::get<DispersionRelation>(r);
  }
  std::ifstream in(c.table);
  if (!in) throw DomainError("cannot read dispersion table '" + c.table + "'");
  const DispersionTable t = read_dispersion_csv(in);
  return DispersionRelation::tabulated(t.k, t.omega);
}

void write_trajectory(Output& out, const std::string& name, const TransferResult& tr, std::vector<std::string> extra) {
  auto h = out.header();
  h.insert(h.end(), extra.begin(), extra.end());
  auto f = out.open(name);
  write_trajectory_csv(f, tr.trajectory, h);
}

json transfer_json(const DesignRun& r) {
  return {{"p_star", r.transfer.p_star}, {"t_star", r.transfer.t_star}, {"modes", r.grid.size()},
          {"delta_k", r.grid.delta_k()}, {"norm_error", r.norm_error}};
}

// --- experiments -----------------------------------------------------------

void fig1c(const ExperimentSpec& s, Output& out) {
  const auto& p = s.params;
  std::vector<DispersionRelation> far;
  for (double d : s.sweep) far.push_back(DispersionRelation::analytic_far(p.with_d(d)));
  auto f = out.open("fig1c_dispersion.csv");
  for (const auto& h : out.header()) f << "# " << h << "\n";
  f << "omega,delta,k_linear";
  for (double d : s.sweep) f << ",k_far_d" << fmt(d);
  f << "\n" << std::setprecision(15);
  const int n = 1000;
  const double span = 10.0 * p.gamma();
  for (int i = 0; i <= n; ++i) {
    const double w = p.omega_q() - span + 2.0 * span * i / n;
    f << w << "," << w - p.omega_q() << "," << w / p.v_g();
    for (const auto& disp : far) f << "," << disp.wavenumber(w);
    f << "\n";
  }
}

void fig1d(const ExperimentSpec& s, Output& out) {
  const auto& p = s.params;
  const DispersionRelation far = DispersionRelation::analytic_far(p);
  const DispersionRelation lin = DispersionRelation::linear(p.v_g());
  const DesignRun a = run_design(p, far, s.grid, far.design_delta_t());
  const DesignRun b = run_design(p, lin, s.grid, transit_guess(p));
  write_trajectory(out, "fig1d_trajectory.csv", a.transfer, {"dispersion=far"});
  write_trajectory(out, "fig1d_linear.csv", b.transfer, {"dispersion=linear"});
  out.write_json("fig1d_summary.json", {{"far", transfer_json(a)},
                                        {"linear", transfer_json(b)},
                                        {"design_delta_t", far.design_delta_t()},
                                        {"markov_limit", markov_limit_max()}});
}

struct Fig2aRow {
  double d, p_far, p_near, p_opt, t_far, t_near, t_opt, norm_error;
  int iterations;
  std::string start;
};

void fig2a(const ExperimentSpec& s, Output& out, int threads) {
  std::vector<Fig2aRow> rows(s.sweep.size());
  parallel_for(static_cast<int>(s.sweep.size()), threads, [&](int i) {
    const PhysicalParams p = s.params.with_d(s.sweep[static_cast<std::size_t>(i)]);
    const DispersionRelation far = DispersionRelation::analytic_far(p);
    const DispersionRelation near = DispersionRelation::analytic_near(p, s.dispersion.delta_t);
    const DesignRun a = run_design(p, far, s.grid, far.design_delta_t());
    const DesignRun b = run_design(p, near, s.grid, near.design_delta_t());
    // Start from the better analytic design.
    const bool use_far = a.transfer.p_star >= b.transfer.p_star;
    const DesignRun& st = use_far ? a : b;
    const DispersionRelation& disp = use_far ? far : near;
    OptimizationProblem pb{st.grid, p, {}, st.transfer.t_star};
    for (int k = 0; k < st.grid.size(); ++k) pb.init_omega.push_back(disp.frequency(st.grid.k(k)));
    pb.max_iters = s.optimizer.max_iters;
    pb.tolerance = s.optimizer.tolerance;
    pb.smoothing = s.optimizer.smoothing;
    pb.initial_step = s.optimizer.initial_step;
    const OptimizationResult r = optimize_dispersion(pb);
    rows[static_cast<std::size_t>(i)] = {p.d(),
                                         a.transfer.p_star,
                                         b.transfer.p_star,
                                         r.final_cost,
                                         a.transfer.t_star,
                                         b.transfer.t_star,
                                         r.delta_t,
                                         std::max(a.norm_error, b.norm_error),
                                         r.iterations,
                                         use_far ? "far" : "near"};
  });
  auto f = out.open("fig2a_transfer.csv");
  for (const auto& h : out.header()) f << "# " << h << "\n";
  f << "d,p_far,p_near,p_optimized,t_far,t_near,t_optimized,iterations,start\n" << std::setprecision(12);
  json j = json::array();
  double drift = 0.0;
  for (const auto& r : rows) {
    f << r.d << "," << r.p_far << "," << r.p_near << "," << r.p_opt << "," << r.t_far << "," << r.t_near << ","
      << r.t_opt << "," << r.iterations << "," << r.start << "\n";
    drift = std::max(drift, r.norm_error);
  }
  out.write_json("fig2a_summary.json", {{"points", rows.size()}, {"norm_error", drift}});
}

void fig2b(const ExperimentSpec& s, Output& out) {
  auto f = out.open("fig2b_rates.csv");
  for (const auto& h : out.header()) f << "# " << h << "\n";
  f << "d,gamma1,gamma2,w1,w2,xi\n" << std::setprecision(15);
  for (double d : s.sweep) {
    const BiexpSolution b = biexp_rates(d, s.params.gamma(), s.params.v_g());
    f << d << "," << b.gamma1 << "," << b.gamma2 << "," << b.w1 << "," << b.w2 << "," << b.xi << "\n";
  }
}

void fig2cd(const ExperimentSpec& s, Output& out) {
  const auto& p = s.params;
  const DispersionRelation far = DispersionRelation::analytic_far(p);
  const DesignRun a = run_design(p, far, s.grid, far.design_delta_t());
  OptimizationProblem pb{a.grid, p, {}, a.transfer.t_star};
  for (int k = 0; k < a.grid.size(); ++k) pb.init_omega.push_back(far.frequency(a.grid.k(k)));
  pb.max_iters = s.optimizer.max_iters;
  pb.tolerance = s.optimizer.tolerance;
  pb.smoothing = s.optimizer.smoothing;
  pb.initial_step = s.optimizer.initial_step;
  const OptimizationResult r = optimize_dispersion(pb);

  DispersionTable t;
  t.k = a.grid.k_values();
  t.omega = r.omega;
  t.gamma = p.gamma();
  t.v_g = p.v_g();
  t.omega_q = p.omega_q();
  t.d = p.d();
  {
    auto f = out.open("fig2cd_dispersion.csv");
    write_dispersion_csv(f, t, out.header());
  }
  {
    auto f = out.open("fig2cd_history.csv");
    write_history_csv(f, r.history, out.header());
  }
  std::vector<double> det(r.omega.size());
  for (std::size_t i = 0; i < det.size(); ++i) det[i] = r.omega[i] - p.omega_q();
  const EigenSystem eig = diagonalize(assemble_bordered(a.grid, det, p, 2));
  const StateVector psi0 = StateVector::excited(0, 2, a.grid.size());
  const TimeWindow w = default_time_window(a.grid, p, r.delta_t, max_group_velocity(far, p, s.grid.window));
  const TransferResult tr = max_transfer(eig, psi0, w, s.grid.resolution);
  write_trajectory(out, "fig2cd_trajectory.csv", tr, {"dispersion=optimized"});
  write_trajectory(out, "fig2cd_initial_trajectory.csv", a.transfer, {"dispersion=far"});
  out.write_json("fig2cd_summary.json", {{"init_cost", r.init_cost},
                                         {"final_cost", r.final_cost},
                                         {"iterations", r.iterations},
                                         {"delta_t", r.delta_t},
                                         {"status", r.status},
                                         {"p_star_optimized", tr.p_star},
                                         {"t_star_optimized", tr.t_star},
                                         {"norm_error", std::max(a.norm_error, norm_drift(eig, psi0, w))}});
}

void fig3a(const ExperimentSpec& s, Output& out) {
  const auto& p = s.params;
  const RampProfile ramp(s.ramp.half_length, p);
  std::vector<double> dd;
  for (double f : s.sweep) dd.push_back(f * p.d());
  RobustScanSettings st;
  st.modes = s.grid.modes;
  st.window = s.grid.window;
  st.homogeneous_window = s.ramp.homogeneous_window;
  st.gap = s.ramp.gap;
  const auto rows = robust_transfer_scan(dd, ramp, p.d(), st);
  {
    auto f = out.open("fig3a_robustness.csv");
    write_robust_csv(f, rows, out.header());
  }
  double worst = 1.0;
  for (const auto& r : rows) worst = std::min(worst, r.p_inhomogeneous);
  out.write_json("fig3a_summary.json", {{"min_p_inhomogeneous", worst}, {"points", rows.size()}});
}

void fig3c(const ExperimentSpec& s, Output& out, int threads) {
  const auto& p = s.params;
  const double lambda = 2.0 * std::numbers::pi * p.v_g() / p.omega_q();
  const double w[3] = {p.omega_q() - p.gamma(), p.omega_q(), p.omega_q() + p.gamma()};
  struct Row {
    double l, r[3], b[3];
  };
  std::vector<Row> rows(s.sweep.size());
  parallel_for(static_cast<int>(s.sweep.size()), threads, [&](int i) {
    const double l = s.sweep[static_cast<std::size_t>(i)] * lambda;
    const RampProfile ramp(l, p);
    Row& row = rows[static_cast<std::size_t>(i)];
    row.l = s.sweep[static_cast<std::size_t>(i)];
    for (int k = 0; k < 3; ++k) {
      row.r[k] = std::norm(ramp_scatter(w[k], ramp).r);
      row.b[k] = reflection_bound(w[k], ramp);
    }
  });
  {
    auto f = out.open("fig3c_reflection.csv");
    for (const auto& h : out.header()) f << "# " << h << "\n";
    f << "# lambda_q=" << std::setprecision(17) << lambda << "\n";
    f << "L_over_lambda,L,R_minus,R_resonant,R_plus,bound_minus,bound_plus\n" << std::setprecision(12);
    for (const auto& r : rows)
      f << r.l << "," << r.l * lambda << "," << r.r[0] << "," << r.r[1] << "," << r.r[2] << "," << r.b[0] << ","
        << r.b[2] << "\n";
  }
  const RampProfile ramp(s.ramp.half_length, p);
  std::vector<ScatterSolution> sc;
  for (int i = 0; i <= 1000; ++i) sc.push_back(ramp_scatter(p.omega_q() + p.gamma() * (-5.0 + 0.01 * i), ramp));
  auto f = out.open("fig3c_scatter.csv");
  auto h = out.header();
  h.push_back("L=" + fmt(s.ramp.half_length));
  write_scatter_csv(f, sc, ramp, h);
}

void custom(const ExperimentSpec& s, Output& out) {
  const auto& p = s.params;
  const DispersionRelation disp = make_dispersion(s);
  const double guess = disp.design_delta_t() > 0.0 ? disp.design_delta_t() : transit_guess(p);
  const DesignRun r = run_design(p, disp, s.grid, guess);
  write_trajectory(out, "custom_trajectory.csv", r.transfer, {"dispersion=" + s.dispersion.kind});
  out.write_json("custom_summary.json", {{"dispersion", s.dispersion.kind}, {"transfer", transfer_json(r)}});
}

}  // namespace

std::vector<fs::path> run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  Output out(spec);
  const int threads = std::max(1, options.threads);
  if (spec.name == "fig1c")
    fig1c(spec, out);
  else if (spec.name == "fig1d")
    fig1d(spec, out);
  else if (spec.name == "fig2a")
    fig2a(spec, out, threads);
  else if (spec.name == "fig2b")
    fig2b(spec, out);
  else if (spec.name == "fig2cd")
    fig2cd(spec, out);
  else if (spec.name == "fig3a")
    fig3a(spec, out);
  else if (spec.name == "fig3c")
    fig3c(spec, out, threads);
  else if (spec.name == "custom")
    custom(spec, out);
  else
    throw UsageError("unknown experiment '" + spec.name + "'");
  return out.files();
}

}  // namespace wgqst
