#include "wgqst/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include <Eigen/Dense>

#include "wgqst/errors.hpp"

namespace wgqst {

namespace {

constexpr cplx kI{0.0, 1.0};

double sinc(double x) { return std::abs(x) < 1e-6 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

struct Evaluation {
  double cost;
  BorderedHamiltonian h;
  EigenSystem eig;
  Eigen::VectorXcd b, r;  // U^H e1, U^H e2

  double at(double t) const {
    cplx c2 = 0.0;
    for (Eigen::Index l = 0; l < b.size(); ++l) c2 += std::conj(r[l]) * b[l] * std::polar(1.0, -eig.energies()[l] * t);
    return std::norm(c2);
  }
};

Evaluation evaluate(const SimulationGrid& grid, const PhysicalParams& params, std::span<const double> detunings,
                    double t) {
  BorderedHamiltonian h = assemble_bordered(grid, detunings, params, 2);
  EigenSystem eig = diagonalize(h);
  const Eigen::Index n = eig.dimension();
  Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(n), e2 = Eigen::VectorXcd::Zero(n);
  e1[0] = 1.0;
  e2[1] = 1.0;
  Evaluation ev{0.0, std::move(h), std::move(eig), {}, {}};
  ev.b = ev.eig.apply_adjoint(e1);
  ev.r = ev.eig.apply_adjoint(e2);
  ev.cost = ev.at(t);
  return ev;
}

// Second-difference penalty and its gradient (added into grad, scaled by -weight).
double smoothing_penalty(const std::vector<double>& w, double weight, std::vector<double>* grad) {
  if (weight <= 0.0) return 0.0;
  double p = 0.0;
  for (std::size_t i = 1; i + 1 < w.size(); ++i) {
    const double s = w[i + 1] - 2.0 * w[i] + w[i - 1];
    p += s * s;
    if (grad) {
      (*grad)[i - 1] -= weight * 2.0 * s;
      (*grad)[i] += weight * 4.0 * s;
      (*grad)[i + 1] -= weight * 2.0 * s;
    }
  }
  return weight * p;
}

// Golden-section maximum of f on [a, b]; returns (argmax, value).
template <class F>
std::pair<double, double> golden_max(F&& f, double a, double b) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > 1e-9) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 > f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

}  // namespace

double cost(const StateVector& psi) { return std::norm(psi.c2()); }

double grad_time(const StateVector& psi, const HermitianMatrix& h) {
  if (h.rows() != psi.amplitudes().size()) throw StructuralError("state and Hamiltonian sizes differ");
  const cplx h_psi = (h.row(1) * psi.amplitudes())(0);
  return 2.0 * std::imag(std::conj(psi.c2()) * h_psi);
}

double grad_time(const StateVector& psi, const BorderedHamiltonian& h) {
  if (h.dimension() != psi.amplitudes().size()) throw StructuralError("state and Hamiltonian sizes differ");
  const int r = h.qubit_count();
  if (r < 2) throw StructuralError("transfer needs a second qubit");
  const Eigen::VectorXcd& a = psi.amplitudes();
  cplx h_psi = 0.0;
  for (int q = 0; q < r; ++q) h_psi += h.qubits(1, q) * a[q];
  h_psi += (h.couplings.row(1) * a.tail(h.modes.size()))(0);
  return 2.0 * std::imag(std::conj(psi.c2()) * h_psi);
}

std::vector<double> grad_omega(const EigenSystem& eig, const StateVector& psi0, double t) {
  const Eigen::Index n = eig.dimension();
  if (psi0.amplitudes().size() != n) throw StructuralError("state does not match the eigensystem");
  if (psi0.qubits() < 2) throw StructuralError("transfer needs a second qubit");
  const int r = psi0.qubits();
  const Eigen::Index modes = n - r;
  const Eigen::VectorXd& e = eig.energies();
  const Eigen::MatrixXcd u = eig.vectors();
  const Eigen::VectorXcd b = u.adjoint() * psi0.amplitudes();
  const Eigen::VectorXcd phase = (-kI * e.cast<cplx>() * t).array().exp();

  cplx c2 = 0.0;
  for (Eigen::Index l = 0; l < n; ++l) c2 += u(1, l) * phase[l] * b[l];

  // Symmetric kernel K_lm.
  Eigen::MatrixXcd k(n, n);
  for (Eigen::Index m = 0; m < n; ++m)
    for (Eigen::Index l = m; l < n; ++l) {
      const cplx v = t * std::polar(1.0, -0.5 * (e[l] + e[m]) * t) * sinc(0.5 * (e[l] - e[m]) * t);
      k(l, m) = v;
      k(m, l) = v;
    }
  // Y_im = U_im b_m restricted to modes; T = Y K.
  const Eigen::MatrixXcd y = u.bottomRows(modes) * b.asDiagonal();
  const Eigen::MatrixXcd tm = y * k;
  std::vector<double> out(static_cast<std::size_t>(modes));
  for (Eigen::Index i = 0; i < modes; ++i) {
    cplx s = 0.0;
    for (Eigen::Index l = 0; l < n; ++l) s += u(1, l) * std::conj(u(r + i, l)) * tm(i, l);
    out[static_cast<std::size_t>(i)] = 2.0 * std::real(std::conj(c2) * (-kI * s));
  }
  return out;
}

GradientReport gradient(const BorderedHamiltonian& h, const EigenSystem& eig, const StateVector& psi0, double t) {
  GradientReport rep;
  const StateVector psi = evolve(eig, psi0, t);
  rep.cost = cost(psi);
  rep.d_cost_d_time = grad_time(psi, h);
  rep.d_cost_d_omega = grad_omega(eig, psi0, t);
  return rep;
}

double transfer_cost(const SimulationGrid& grid, const PhysicalParams& params, std::span<const double> detunings,
                     double t) {
  return evaluate(grid, params, detunings, t).cost;
}

std::vector<double> isotonic_projection(std::vector<double> y, double min_gap) {
  const std::size_t n = y.size();
  // Shift out the required gap, project onto non-decreasing sequences, shift back.
  for (std::size_t i = 0; i < n; ++i) y[i] -= min_gap * static_cast<double>(i);
  std::vector<double> mean;
  std::vector<std::size_t> count;
  for (std::size_t i = 0; i < n; ++i) {
    mean.push_back(y[i]);
    count.push_back(1);
    while (mean.size() > 1 && mean[mean.size() - 2] > mean.back()) {
      const std::size_t c = count.back() + count[count.size() - 2];
      const double m = (mean.back() * count.back() + mean[mean.size() - 2] * count[count.size() - 2]) / c;
      mean.pop_back();
      count.pop_back();
      mean.back() = m;
      count.back() = c;
    }
  }
  std::size_t i = 0;
  for (std::size_t b = 0; b < mean.size(); ++b)
    for (std::size_t c = 0; c < count[b]; ++c, ++i) y[i] = mean[b] + min_gap * static_cast<double>(i);
  return y;
}

OptimizationResult optimize_dispersion(const OptimizationProblem& pb, const ProgressCallback& progress) {
  const auto& grid = pb.grid;
  const auto& params = pb.params;
  const std::size_t n = static_cast<std::size_t>(grid.size());
  if (pb.init_omega.size() != n) throw StructuralError("initial dispersion does not match the grid");
  for (std::size_t i = 1; i < n; ++i)
    if (!(pb.init_omega[i] > pb.init_omega[i - 1])) throw NonInvertibleError("initial dispersion is not increasing");
  if (!(pb.init_time > 0.0)) throw DomainError("initial evaluation time must be positive");
  if (pb.max_iters < 0) throw DomainError("max_iters must be non-negative");

  const double dk = grid.delta_k();
  const double gap = pb.min_gap * dk * params.v_g();
  const double t_max = 0.8 * grid.recurrence_time(params.v_g());

  auto detunings = [&](const std::vector<double>& w) {
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = w[i] - params.omega_q();
    return d;
  };
  auto objective = [&](const std::vector<double>& w, double t) {
    const auto d = detunings(w);
    return evaluate(grid, params, d, t).cost - smoothing_penalty(w, pb.smoothing, nullptr);
  };

  OptimizationResult res;
  std::vector<double> w = isotonic_projection(pb.init_omega, gap);
  double t = pb.init_time;
  double j = objective(w, t);
  res.init_cost = j;
  res.history.push_back({0, j, t, 0.0, 0.0});
  if (progress) progress(res.history.back());

  const StateVector psi0 = StateVector::excited(0, 2, static_cast<int>(n));
  double alpha = -1.0;
  std::vector<double> prev_x, prev_dir;  // previous iterate and scaled gradient, for the BB step
  res.status = "max_iters";
  for (int it = 1; it <= pb.max_iters; ++it) {
    Evaluation ev = evaluate(grid, params, detunings(w), t);
    // Exact line maximum in t on the current spectrum (monotone: never below the current t).
    const double pen = j - ev.cost;
    const auto [tb, cb] = golden_max([&](double x) { return ev.at(x); }, std::max(1e-6, t - 0.25),
                                     std::min(t_max, t + 0.25));
    if (cb - pen > j) {
      t = tb;
      j = cb - pen;
    }
    GradientReport g = gradient(ev.h, ev.eig, psi0, t);
    smoothing_penalty(w, pb.smoothing, &g.d_cost_d_omega);

    // Function-space scaling: a mode weight scales with dk.
    std::vector<double> dir(n + 1), x(n + 1);
    dir[n] = g.d_cost_d_time;
    x[n] = t;
    double dmax = std::abs(dir[n]), gnorm2 = dir[n] * dir[n];
    for (std::size_t i = 0; i < n; ++i) {
      dir[i] = g.d_cost_d_omega[i] / dk;
      x[i] = w[i];
      dmax = std::max(dmax, std::abs(dir[i]));
      gnorm2 += g.d_cost_d_omega[i] * dir[i];
    }
    if (!(dmax > 0.0) || !std::isfinite(dmax)) {
      res.status = "stationary";
      res.converged = true;
      res.iterations = it;
      break;
    }
    const double cap = 0.5 * pb.initial_step / dmax;
    double a = alpha < 0.0 ? 0.05 * pb.initial_step / dmax : 2.0 * alpha;
    if (!prev_x.empty()) {
      // Barzilai-Borwein trial step in the scaled metric: s.s / -(s.y)
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i <= n; ++i) {
        const double si = x[i] - prev_x[i], yi = dir[i] - prev_dir[i];
        const double wgt = i < n ? dk : 1.0;
        ss += wgt * si * si;
        sy += wgt * si * yi;
      }
      if (sy < 0.0) a = ss / -sy;
    }
    a = std::min(a, cap);

    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, a *= 0.5) {
      std::vector<double> wn(n);
      for (std::size_t i = 0; i < n; ++i) wn[i] = w[i] + a * dir[i];
      wn = isotonic_projection(std::move(wn), gap);
      const double tn = std::clamp(t + a * dir[n], 1e-6, t_max);
      double pred = g.d_cost_d_time * (tn - t);
      for (std::size_t i = 0; i < n; ++i) pred += g.d_cost_d_omega[i] * (wn[i] - w[i]);
      const double jn = objective(wn, tn);
      if (jn >= j + 1e-4 * std::max(pred, 0.0) && jn >= j) {
        const double gain = jn - j;
        prev_x = std::move(x);
        prev_dir = std::move(dir);
        w = std::move(wn);
        t = tn;
        j = jn;
        alpha = a;
        accepted = true;
        res.history.push_back({it, j, t, a, std::sqrt(gnorm2)});
        if (progress) progress(res.history.back());
        if (gain < pb.tolerance) {
          res.status = "converged";
          res.converged = true;
        }
        break;
      }
    }
    res.iterations = it;
    if (!accepted) {
      res.status = "stagnated";
      res.converged = true;
    }
    if (res.converged) break;
  }
  res.omega = std::move(w);
  res.delta_t = t;
  res.final_cost = j;
  return res;
}

void write_history_csv(std::ostream& out, const std::vector<HistoryEntry>& history,
                       const std::vector<std::string>& header) {
  for (const auto& h : header) out << "# " << h << "\n";
  out << "iteration,cost,delta_t,step,grad_norm\n" << std::setprecision(12);
  for (const auto& e : history)
    out << e.iteration << "," << e.cost << "," << e.delta_t << "," << e.step << "," << e.grad_norm << "\n";
}

}  // namespace wgqst
