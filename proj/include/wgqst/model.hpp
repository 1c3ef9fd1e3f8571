#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

namespace wgqst {

using cplx = std::complex<double>;

/// Qubit-waveguide coupling g = sqrt(gamma * v_g / pi).
double coupling_from_gamma(double gamma, double v_g);

/// Frequency default: gamma = pi * 1e-4 * omega_q with gamma = 1.
inline constexpr double kDefaultOmegaQ = 1.0e4 / 3.14159265358979323846;

/// Physical constants of the two-emitter chiral waveguide.
class PhysicalParams {
 public:
  PhysicalParams(double omega_q, double gamma, double v_g, double d);

  /// gamma = v_g = 1, omega_q = 1e4/pi.
  static PhysicalParams standard(double d);

  double omega_q() const { return omega_q_; }
  double gamma() const { return gamma_; }
  double v_g() const { return v_g_; }
  double d() const { return d_; }
  double g() const { return g_; }

  PhysicalParams with_d(double d) const { return {omega_q_, gamma_, v_g_, d}; }

 private:
  double omega_q_;
  double gamma_;
  double v_g_;
  double d_;
  double g_;
};

/// Uniform discretization of the right-moving band.
class SimulationGrid {
 public:
  SimulationGrid(double k_lo, double k_hi, int n, double x1, double x2);

  const std::vector<double>& k_values() const { return k_; }
  double k(int i) const { return k_[i]; }
  double delta_k() const { return dk_; }
  int size() const { return static_cast<int>(k_.size()); }
  double x1() const { return x1_; }
  double x2() const { return x2_; }

  SimulationGrid with_positions(double x1, double x2) const;

  /// Time after which the discrete band sends a photon back around the ring.
  double recurrence_time(double v_max) const;

 private:
  std::vector<double> k_;
  double dk_;
  double x1_;
  double x2_;
};

class DispersionRelation;

/// Grid whose image under the dispersion spans omega_q +- window; x1 = 0, x2 = d.
SimulationGrid build_grid(const PhysicalParams& params, const DispersionRelation& dispersion, int n,
                          double window);
/// Asymmetric window [omega_q - below, omega_q + above].
SimulationGrid build_grid(const PhysicalParams& params, const DispersionRelation& dispersion, int n,
                          double below, double above);

/// Mode detunings omega(k_i) - omega_q on the grid.
std::vector<double> mode_detunings(const SimulationGrid& grid, const DispersionRelation& dispersion,
                                   double omega_q);

/// Single-excitation state: qubit amplitudes first, then photon modes.
class StateVector {
 public:
  StateVector(int qubits, Eigen::VectorXcd amplitudes);

  /// All amplitude in qubit q (0-based).
  static StateVector excited(int q, int qubits, int modes);

  int qubits() const { return qubits_; }
  int modes() const { return static_cast<int>(a_.size()) - qubits_; }
  cplx c1() const { return a_[0]; }
  cplx c2() const;
  auto photon() const { return a_.tail(modes()); }
  const Eigen::VectorXcd& amplitudes() const { return a_; }
  double norm() const { return a_.norm(); }

 private:
  int qubits_;
  Eigen::VectorXcd a_;
};

}  // namespace wgqst
