#include "wgqst/ramp.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include <Eigen/Dense>

#include "wgqst/dispersion.hpp"
#include "wgqst/errors.hpp"

namespace wgqst {

namespace {

constexpr double kNu = 0.25;
constexpr double kAsymptoticFrom = 25.0;
constexpr cplx kI{0.0, 1.0};

// e^{-iz} H1_nu(z) from the Hankel expansion; valid for z >= kAsymptoticFrom.
cplx hankel_asymptotic(double nu, double z) {
  const double mu = 4.0 * nu * nu;
  cplx sum = 1.0, ik = 1.0;
  double a = 1.0;
  double last = 1.0;
  for (int k = 1; k < 60; ++k) {
    a *= (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k * z);
    ik *= kI;
    const double mag = std::abs(a);
    if (mag > last) break;  // asymptotic series started to diverge
    sum += ik * a;
    last = mag;
    if (mag < 1e-17) break;
  }
  const double ph = -(0.5 * nu + 0.25) * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * z)) * std::polar(1.0, ph) * sum;
}

}  // namespace

ScaledHankel scaled_hankel_quarter(double z) {
  if (!(z > 0.0)) throw DomainError("Bessel argument must be positive");
  if (z >= kAsymptoticFrom) {
    const cplx h = hankel_asymptotic(kNu, z);
    // H'_nu = H_{nu-1} - (nu/z) H_nu
    return {h, hankel_asymptotic(kNu - 1.0, z) - (kNu / z) * h};
  }
  const BesselQuarter b = bessel_quarter(z);
  const cplx ph = std::polar(1.0, -z);
  return {ph * cplx(b.j, b.y), ph * cplx(b.dj, b.dy)};
}

BesselQuarter bessel_quarter(double x) {
  if (!(x > 0.0)) throw DomainError("Bessel argument must be positive");
  if (x >= kAsymptoticFrom) {
    const ScaledHankel s = scaled_hankel_quarter(x);
    const cplx ph = std::polar(1.0, x);
    const cplx h = ph * s.h, dh = ph * s.dh;
    return {h.real(), h.imag(), dh.real(), dh.imag()};
  }
  const double j = std::cyl_bessel_j(kNu, x), y = std::cyl_neumann(kNu, x);
  const double j1 = std::cyl_bessel_j(kNu + 1.0, x), y1 = std::cyl_neumann(kNu + 1.0, x);
  return {j, y, kNu / x * j - j1, kNu / x * y - y1};
}

RampProfile::RampProfile(double half_length, const PhysicalParams& params) : L_(half_length), p_(params) {
  if (!(half_length > 0.0) || !std::isfinite(half_length)) throw DomainError("ramp half-length must be positive");
}

double RampProfile::delta_phi(double omega) const {
  return -2.0 * std::atan((omega - p_.omega_q()) / p_.gamma());
}

double RampProfile::k(double x, double omega) const {
  const double base = k_l(omega);
  if (std::abs(x) >= L_) return base;
  return base + k_d(omega) * (1.0 - std::abs(x) / L_);
}

ScatterSolution ramp_scatter(double omega, const RampProfile& ramp) {
  const double L = ramp.half_length();
  const double kl = ramp.k_l(omega), kd = ramp.k_d(omega);
  if (!(kl > 0.0) || !(kl + kd > 0.0)) throw DomainError("ramp crosses the band cutoff (k <= 0)");
  ScatterSolution s;
  s.omega = omega;
  const cplx edge = std::polar(1.0, -2.0 * kl * L);
  if (kd == 0.0) {
    // No inhomogeneity: free propagation, Hankel coefficients unused.
    s.r = 0.0;
    s.t = std::polar(1.0, 2.0 * kl * L);
    s.b = {0.0, 0.0, 0.0, 0.0, 1.0, 0.0, s.t * edge};
    return s;
  }
  const double a = std::abs(kd) / L;  // |dk/dx|
  const double sg = kd > 0.0 ? 1.0 : -1.0;
  const double k0 = kl + kd;
  const ScaledHankel h0 = scaled_hankel_quarter(k0 * k0 / (2.0 * a));
  const ScaledHankel he = scaled_hankel_quarter(kl * kl / (2.0 * a));
  // z(+-L) - z(0), exact without forming the large arguments
  const double dz = -sg * L * (kl + 0.5 * kd);

  // Value and x-derivative of sqrt(k) H(z(x)) e^{-+i z(0)} at a point with
  // wavenumber kk, slope dkdx and phase offset ph = z - z(0).
  struct Basis {
    cplx plus, dplus, minus, dminus;
  };
  auto basis = [&](const ScaledHankel& h, double kk, double dkdx, double ph) {
    const double rk = std::sqrt(kk);
    const double dzdx = kk * dkdx / a;
    const cplx e = std::polar(1.0, ph);
    const cplx f = rk * h.h * e;
    const cplx df = (0.5 * dkdx / rk * h.h + rk * dzdx * h.dh) * e;
    // H2 branch: conjugate of the H1 branch for real arguments
    return Basis{f, df, std::conj(f), std::conj(df)};
  };
  const double slope = sg * a;  // dk/dx on the left half; right half has the opposite sign
  const Basis lm = basis(he, kl, slope, dz), l0 = basis(h0, k0, slope, 0.0);
  const Basis r0 = basis(h0, k0, -slope, 0.0), rp = basis(he, kl, -slope, dz);

  // Unknowns (b1, b2, b3, b4, r, t); incoming e^{i kl (x + L)}.
  Eigen::Matrix<cplx, 6, 6> m = Eigen::Matrix<cplx, 6, 6>::Zero();
  Eigen::Matrix<cplx, 6, 1> rhs = Eigen::Matrix<cplx, 6, 1>::Zero();
  m.row(0) << lm.plus, lm.minus, 0.0, 0.0, -1.0, 0.0;
  m.row(1) << lm.dplus / kl, lm.dminus / kl, 0.0, 0.0, kI, 0.0;
  m.row(2) << l0.plus, l0.minus, -r0.plus, -r0.minus, 0.0, 0.0;
  m.row(3) << l0.dplus / kl, l0.dminus / kl, -r0.dplus / kl, -r0.dminus / kl, 0.0, 0.0;
  m.row(4) << 0.0, 0.0, rp.plus, rp.minus, 0.0, -1.0;
  m.row(5) << 0.0, 0.0, rp.dplus / kl, rp.dminus / kl, 0.0, -kI;
  rhs << 1.0, kI, 0.0, 0.0, 0.0, 0.0;
  Eigen::Matrix<double, 6, 1> scale;
  for (int c = 0; c < 6; ++c) {
    scale[c] = m.col(c).cwiseAbs().maxCoeff();
    m.col(c) /= scale[c];
  }
  const Eigen::PartialPivLU<Eigen::Matrix<cplx, 6, 6>> lu(m);
  if (!(lu.rcond() > 1e-13))
    throw NumericalError("ramp matching matrix is singular at omega = " + std::to_string(omega) +
                         ", L = " + std::to_string(L));
  Eigen::Matrix<cplx, 6, 1> u = lu.solve(rhs);
  for (int c = 0; c < 6; ++c) u[c] /= scale[c];
  s.r = u[4];
  s.t = u[5];
  // Rescale to b5 = 1 for the incoming wave written as b5 e^{i kl x}.
  const cplx norm = std::polar(1.0, -kl * L);
  for (int c = 0; c < 4; ++c) s.b[c] = u[c] * norm;
  s.b[4] = 1.0;
  s.b[5] = s.r * edge;
  s.b[6] = s.t * edge;
  return s;
}

ScatterAsymptote ramp_asymptotic(double omega, const RampProfile& ramp) {
  const double L = ramp.half_length();
  const double kl = ramp.k_l(omega), kd = ramp.k_d(omega), ks = kl + kd;
  const cplx ph = std::polar(1.0, (kl + ks) * L);
  const cplx r = kI * ph * kd * (kl * kl - ks * ks * std::cos(L * (kl + ks))) / (2.0 * L * kl * kl * ks * ks);
  return {r, ph};
}

double reflection_bound(double omega, const RampProfile& ramp) {
  const double x = ramp.half_length() * ramp.k_l(omega);
  const double dphi = ramp.delta_phi(omega);
  return dphi * dphi / (x * x * x * x);
}

void write_scatter_csv(std::ostream& out, const std::vector<ScatterSolution>& rows, const RampProfile& ramp,
                       const std::vector<std::string>& header) {
  for (const auto& h : header) out << "# " << h << "\n";
  out << "omega,re_r,im_r,re_t,im_t,R,bound\n" << std::setprecision(15);
  for (const auto& s : rows)
    out << s.omega << "," << s.r.real() << "," << s.r.imag() << "," << s.t.real() << "," << s.t.imag() << ","
        << std::norm(s.r) << "," << reflection_bound(s.omega, ramp) << "\n";
}

BorderedHamiltonian assemble_inhomogeneous(const SimulationGrid& grid, const PhysicalParams& params,
                                           const std::vector<ScatterSolution>& scatter) {
  const int n = grid.size();
  if (static_cast<int>(scatter.size()) != n) throw StructuralError("one scatter solution per grid mode required");
  BorderedHamiltonian h;
  h.qubits = Eigen::MatrixXcd::Zero(2, 2);
  h.couplings = Eigen::MatrixXcd::Zero(2, 2 * n);
  h.modes.resize(2 * n);
  const double c = params.g() * std::sqrt(grid.delta_k());
  for (int i = 0; i < n; ++i) {
    const double k = grid.k(i);
    const double det = params.v_g() * k - params.omega_q();
    h.modes[i] = det;
    h.modes[n + i] = det;
    h.couplings(0, i) = c * std::polar(1.0, k * grid.x1());
    const cplx p2 = c * std::polar(1.0, k * grid.x2());
    h.couplings(1, i) = p2 * scatter[i].b[6];
    h.couplings(1, n + i) = p2 * scatter[i].b[5];
  }
  return h;
}

HermitianMatrix assemble_inhomogeneous_hamiltonian(const SimulationGrid& grid, const PhysicalParams& params,
                                                   const std::vector<ScatterSolution>& scatter) {
  return assemble_inhomogeneous(grid, params, scatter).dense();
}

std::vector<RobustPoint> robust_transfer_scan(const std::vector<double>& delta_d, const RampProfile& ramp,
                                              double d, const RobustScanSettings& st) {
  const PhysicalParams& rp = ramp.params();
  const double L = ramp.half_length();
  const PhysicalParams hom = rp.with_d(d);
  const double x1 = -L - st.gap;

  const DispersionRelation lin = DispersionRelation::linear(rp.v_g());
  const SimulationGrid base = build_grid(hom, lin, st.modes, st.window);
  std::vector<ScatterSolution> scatter;
  scatter.reserve(static_cast<std::size_t>(base.size()));
  for (int i = 0; i < base.size(); ++i) scatter.push_back(ramp_scatter(rp.v_g() * base.k(i), ramp));

  const DispersionRelation far = DispersionRelation::analytic_far(hom);
  const double span = far.wavenumber(hom.omega_q() + st.homogeneous_window) -
                      far.wavenumber(hom.omega_q() - st.homogeneous_window);
  const int far_modes = std::max(2, static_cast<int>(std::lround(span / base.delta_k())) + 1);
  const SimulationGrid far_grid = build_grid(hom, far, far_modes, st.homogeneous_window);

  std::vector<RobustPoint> out;
  for (double dd : delta_d) {
    const double x2 = x1 + d + dd;
    if (!(x2 > L)) throw DomainError("second qubit lies inside the ramp");
    RobustPoint pt{dd, 0.0, 0.0, 0.0, 0.0};
    {
      const SimulationGrid g = base.with_positions(x1, x2);
      const EigenSystem eig = diagonalize(assemble_inhomogeneous(g, rp, scatter));
      const TimeWindow w = default_time_window(g, rp, (x2 - x1) / rp.v_g() + 2.0 / rp.gamma(), rp.v_g());
      const TransferResult tr = max_transfer(eig, StateVector::excited(0, 2, 2 * g.size()), w);
      pt.p_inhomogeneous = tr.p_star;
      pt.t_inhomogeneous = tr.t_star;
    }
    {
      const SimulationGrid g = far_grid.with_positions(0.0, d + dd);
      const EigenSystem eig = diagonalize(assemble_bordered(g, far, hom, 2));
      const TimeWindow w = default_time_window(g, hom, far.design_delta_t() + dd / rp.v_g(), rp.v_g());
      const TransferResult tr = max_transfer(eig, StateVector::excited(0, 2, g.size()), w);
      pt.p_homogeneous = tr.p_star;
      pt.t_homogeneous = tr.t_star;
    }
    out.push_back(pt);
  }
  return out;
}

void write_robust_csv(std::ostream& out, const std::vector<RobustPoint>& rows, const std::vector<std::string>& header) {
  for (const auto& h : header) out << "# " << h << "\n";
  out << "delta_d,p_inhomogeneous,p_homogeneous,t_inhomogeneous,t_homogeneous\n" << std::setprecision(12);
  for (const auto& p : rows)
    out << p.delta_d << "," << p.p_inhomogeneous << "," << p.p_homogeneous << "," << p.t_inhomogeneous << ","
        << p.t_homogeneous << "\n";
}

}  // namespace wgqst
