#include "wgqst/model.hpp"

#include <cmath>
#include <numbers>

#include "wgqst/dispersion.hpp"
#include "wgqst/errors.hpp"

namespace wgqst {

double coupling_from_gamma(double gamma, double v_g) {
  if (!(gamma > 0.0) || !(v_g > 0.0)) throw DomainError("gamma and v_g must be positive");
  return std::sqrt(gamma * v_g / std::numbers::pi);
}

PhysicalParams::PhysicalParams(double omega_q, double gamma, double v_g, double d)
    : omega_q_(omega_q), gamma_(gamma), v_g_(v_g), d_(d) {
  if (!(omega_q > 0.0)) throw DomainError("omega_q must be positive");
  if (!(d > 0.0)) throw DomainError("qubit separation d must be positive");
  g_ = coupling_from_gamma(gamma, v_g);
}

PhysicalParams PhysicalParams::standard(double d) { return {kDefaultOmegaQ, 1.0, 1.0, d}; }

SimulationGrid::SimulationGrid(double k_lo, double k_hi, int n, double x1, double x2)
    : x1_(x1), x2_(x2) {
  if (n < 2) throw DomainError("grid needs at least two points");
  if (!(k_hi > k_lo)) throw DomainError("grid bounds must increase");
  if (!(k_lo > 0.0)) throw DomainError("grid must lie in the right-moving band (k > 0)");
  dk_ = (k_hi - k_lo) / (n - 1);
  k_.resize(n);
  for (int i = 0; i < n; ++i) k_[i] = k_lo + i * dk_;
  k_.back() = k_hi;
}

SimulationGrid SimulationGrid::with_positions(double x1, double x2) const {
  SimulationGrid g = *this;
  g.x1_ = x1;
  g.x2_ = x2;
  return g;
}

double SimulationGrid::recurrence_time(double v_max) const {
  return 2.0 * std::numbers::pi / (dk_ * v_max);
}

SimulationGrid build_grid(const PhysicalParams& params, const DispersionRelation& dispersion, int n,
                          double window) {
  return build_grid(params, dispersion, n, window, window);
}

SimulationGrid build_grid(const PhysicalParams& params, const DispersionRelation& dispersion, int n,
                          double below, double above) {
  if (!(below > 0.0) || !(above > 0.0)) throw DomainError("frequency window must be positive");
  if (n < 2) throw DomainError("grid needs at least two points");
  const double lo = params.omega_q() - below;
  const double hi = params.omega_q() + above;
  // Probe the window for monotonicity before trusting the end points.
  const int probes = std::max(10 * n, 1000);
  double prev = dispersion.wavenumber(lo);
  const double k_lo = prev;
  for (int i = 1; i <= probes; ++i) {
    const double k = dispersion.wavenumber(lo + (hi - lo) * i / probes);
    if (!(k > prev)) throw NonInvertibleError("dispersion is not monotone on the frequency window");
    prev = k;
  }
  return SimulationGrid(k_lo, prev, n, 0.0, params.d());
}

std::vector<double> mode_detunings(const SimulationGrid& grid, const DispersionRelation& dispersion,
                                   double omega_q) {
  std::vector<double> out(grid.size());
  for (int i = 0; i < grid.size(); ++i) out[i] = dispersion.frequency(grid.k(i)) - omega_q;
  return out;
}

StateVector::StateVector(int qubits, Eigen::VectorXcd amplitudes)
    : qubits_(qubits), a_(std::move(amplitudes)) {
  if (qubits < 1 || qubits > 2) throw StructuralError("state must carry one or two qubits");
  if (a_.size() < qubits) throw StructuralError("state shorter than its qubit block");
}

StateVector StateVector::excited(int q, int qubits, int modes) {
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(qubits + modes);
  if (q < 0 || q >= qubits) throw StructuralError("no such qubit");
  a[q] = 1.0;
  return {qubits, std::move(a)};
}

cplx StateVector::c2() const {
  if (qubits_ < 2) throw StructuralError("state has a single qubit");
  return a_[1];
}

}  // namespace wgqst
