#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "wgqst/dynamics.hpp"
#include "wgqst/model.hpp"

namespace wgqst {

/// Ascent over p = (t, omega_1..omega_N) of |c2(t)|^2 with qubit 1 initially excited.
struct OptimizationProblem {
  SimulationGrid grid;
  PhysicalParams params;
  std::vector<double> init_omega;  // absolute mode frequencies on the grid
  double init_time = 0.0;
  int max_iters = 200;
  double tolerance = 1e-9;   // stop when an accepted step gains less than this
  double smoothing = 0.0;    // weight of the second-difference penalty
  double initial_step = 1.0;
  double min_gap = 1e-9;     // strict increase enforced after projection, in units of grid spacing * v_g
};

struct GradientReport {
  double cost = 0.0;
  double d_cost_d_time = 0.0;
  std::vector<double> d_cost_d_omega;
};

struct HistoryEntry {
  int iteration;
  double cost;
  double delta_t;
  double step;
  double grad_norm;
};

struct OptimizationResult {
  std::vector<double> omega;
  double delta_t = 0.0;
  double init_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string status;
  std::vector<HistoryEntry> history;
};

/// |c2|^2
double cost(const StateVector& psi);
/// d|c2|^2/dt = 2 Im(conj(c2) (H psi)_2)
double grad_time(const StateVector& psi, const HermitianMatrix& h);
double grad_time(const StateVector& psi, const BorderedHamiltonian& h);

/// d|c2(t)|^2 / d omega_i for every mode i, from the eigenbasis double sum
///   dc2/domega_i = -i sum_lm U_2l conj(U_il) K_lm U_im b_m,
///   K_lm = int_0^t e^{-i E_l (t-s)} e^{-i E_m s} ds = t e^{-i(E_l+E_m)t/2} sinc((E_l-E_m)t/2),
/// with b = U^H psi0. One dense n^3 product; n^2 memory.
std::vector<double> grad_omega(const EigenSystem& eig, const StateVector& psi0, double t);

GradientReport gradient(const BorderedHamiltonian& h, const EigenSystem& eig, const StateVector& psi0, double t);

/// |c2(t)|^2 for mode detunings on the grid, qubit 1 initially excited.
double transfer_cost(const SimulationGrid& grid, const PhysicalParams& params, std::span<const double> detunings,
                     double t);

/// Pool-adjacent-violators projection onto sequences with y[i+1] - y[i] >= min_gap.
std::vector<double> isotonic_projection(std::vector<double> y, double min_gap = 0.0);

using ProgressCallback = std::function<void(const HistoryEntry&)>;

/// Projected gradient ascent with Armijo backtracking. The cost history never
/// decreases; every iterate is strictly increasing in k.
OptimizationResult optimize_dispersion(const OptimizationProblem& problem, const ProgressCallback& progress = {});

void write_history_csv(std::ostream& out, const std::vector<HistoryEntry>& history,
                       const std::vector<std::string>& header);

}  // namespace wgqst
