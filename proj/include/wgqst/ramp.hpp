#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "wgqst/dynamics.hpp"
#include "wgqst/model.hpp"

namespace wgqst {

/// Order-1/4 Bessel functions and their derivatives.
struct BesselQuarter {
  double j, y, dj, dy;
};
BesselQuarter bessel_quarter(double x);

/// Hankel function H1_{1/4} and its derivative with the oscillation e^{iz}
/// divided out: h = e^{-iz} H1(z), dh = e^{-iz} H1'(z). H2 is the conjugate.
struct ScaledHankel {
  cplx h, dh;
};
ScaledHankel scaled_hankel_quarter(double z);

/// Triangular ramp on |x| <= L centred at 0:
///   k(x, omega) = k_l + k_d (1 - |x|/L),  k_l = omega/v_g,  k_d = dphi/L,
///   dphi(omega) = -2 arctan((omega - omega_q)/gamma).
class RampProfile {
 public:
  RampProfile(double half_length, const PhysicalParams& params);

  double half_length() const { return L_; }
  const PhysicalParams& params() const { return p_; }
  double k_l(double omega) const { return omega / p_.v_g(); }
  double delta_phi(double omega) const;
  double k_d(double omega) const { return delta_phi(omega) / L_; }
  double alpha(double omega) const { return k_d(omega) / L_; }
  double k(double x, double omega) const;

 private:
  double L_;
  PhysicalParams p_;
};

/// r and t referenced to the ramp edges; b[0..6] hold b1..b7 with b5 = 1.
/// b1..b4 multiply the phase-factored Hankel pair in each half-ramp.
struct ScatterSolution {
  double omega = 0.0;
  cplx r, t;
  std::array<cplx, 7> b{};
};

ScatterSolution ramp_scatter(double omega, const RampProfile& ramp);

struct ScatterAsymptote {
  cplx r, t;
};
/// Large-L asymptotes with k_s = k_l + k_d.
ScatterAsymptote ramp_asymptotic(double omega, const RampProfile& ramp);

/// dphi^2 / (L k_l)^4
double reflection_bound(double omega, const RampProfile& ramp);

/// Columns omega, Re r, Im r, Re t, Im t, R, bound.
void write_scatter_csv(std::ostream& out, const std::vector<ScatterSolution>& rows, const RampProfile& ramp,
                       const std::vector<std::string>& header);

/// Two qubits outside the ramp coupled to right- and left-mode copies of the
/// linear band on grid (positions in ramp-centred coordinates). Mode order:
/// right modes then left modes. scatter[i] belongs to omega = v_g k_i.
BorderedHamiltonian assemble_inhomogeneous(const SimulationGrid& grid, const PhysicalParams& params,
                                           const std::vector<ScatterSolution>& scatter);
HermitianMatrix assemble_inhomogeneous_hamiltonian(const SimulationGrid& grid, const PhysicalParams& params,
                                                   const std::vector<ScatterSolution>& scatter);

struct RobustPoint {
  double delta_d;
  double p_inhomogeneous, t_inhomogeneous;
  double p_homogeneous, t_homogeneous;
};

struct RobustScanSettings {
  int modes = 2000;
  double window = 40.0;
  /// The homogeneous comparison converges slowly in the window (band
  /// truncation biases p upward by ~1/W); it keeps the ramp grid spacing.
  double homogeneous_window = 320.0;
  double gap = 0.5;  // distance of qubit 1 from the ramp edge
};

/// Transfer versus separation error. Qubit 1 sits at -L - gap, qubit 2 at
/// x1 + d + delta_d. The homogeneous comparison uses the far-field analytic
/// dispersion designed for d.
std::vector<RobustPoint> robust_transfer_scan(const std::vector<double>& delta_d, const RampProfile& ramp,
                                              double d, const RobustScanSettings& settings = {});

void write_robust_csv(std::ostream& out, const std::vector<RobustPoint>& rows,
                      const std::vector<std::string>& header);

}  // namespace wgqst
