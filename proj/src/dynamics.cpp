#include "wgqst/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "wgqst/arrowhead.hpp"
#include "wgqst/dispersion.hpp"
#include "wgqst/errors.hpp"

namespace wgqst {

namespace {

class SingleStageBasis final : public EigenSystem::Basis {
 public:
  explicit SingleStageBasis(ArrowheadEigen a) : a_(std::move(a)) {}
  Eigen::Index dimension() const override { return a_.size(); }
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const override { return a_.apply(x); }
  Eigen::VectorXcd apply_adjoint(const Eigen::VectorXcd& y) const override { return a_.apply_adjoint(y); }
  Eigen::MatrixXcd dense() const override { return a_.dense(); }

 private:
  ArrowheadEigen a_;
};

// U = blkdiag(1, V_inner) * V_outer; the inner stage diagonalizes the second
// qubit with the modes, the outer stage adds the first qubit.
class TwoStageBasis final : public EigenSystem::Basis {
 public:
  TwoStageBasis(ArrowheadEigen inner, ArrowheadEigen outer) : inner_(std::move(inner)), outer_(std::move(outer)) {}
  Eigen::Index dimension() const override { return outer_.size(); }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const override {
    Eigen::VectorXcd y = outer_.apply(x);
    const Eigen::Index n = inner_.size();
    y.tail(n) = inner_.apply(y.tail(n));
    return y;
  }

  Eigen::VectorXcd apply_adjoint(const Eigen::VectorXcd& v) const override {
    Eigen::VectorXcd w = v;
    const Eigen::Index n = inner_.size();
    w.tail(n) = inner_.apply_adjoint(v.tail(n));
    return outer_.apply_adjoint(w);
  }

  Eigen::MatrixXcd dense() const override {
    const Eigen::MatrixXcd vo = outer_.dense();
    const Eigen::MatrixXcd vi = inner_.dense();
    const Eigen::Index n = inner_.size();
    Eigen::MatrixXcd u(n + 1, n + 1);
    u.row(0) = vo.row(0);
    u.bottomRows(n).noalias() = vi * vo.bottomRows(n);
    return u;
  }

 private:
  ArrowheadEigen inner_;
  ArrowheadEigen outer_;
};

}  // namespace

HermitianMatrix BorderedHamiltonian::dense() const {
  const int r = qubit_count();
  const Eigen::Index n = modes.size();
  HermitianMatrix h = HermitianMatrix::Zero(r + n, r + n);
  h.topLeftCorner(r, r) = qubits;
  h.topRightCorner(r, n) = couplings;
  h.bottomLeftCorner(n, r) = couplings.adjoint();
  h.bottomRightCorner(n, n).diagonal() = modes.cast<cplx>();
  return h;
}

EigenSystem::EigenSystem(Eigen::VectorXd energies, Eigen::MatrixXcd vectors)
    : energies_(std::move(energies)), dense_(std::make_shared<const Eigen::MatrixXcd>(std::move(vectors))) {
  if (dense_->rows() != energies_.size() || dense_->cols() != energies_.size())
    throw StructuralError("eigenvector matrix does not match the spectrum");
}

EigenSystem::EigenSystem(Eigen::VectorXd energies, std::shared_ptr<const Basis> basis)
    : energies_(std::move(energies)), basis_(std::move(basis)) {
  if (!basis_ || basis_->dimension() != energies_.size())
    throw StructuralError("eigenbasis does not match the spectrum");
}

Eigen::VectorXcd EigenSystem::apply(const Eigen::VectorXcd& x) const {
  if (x.size() != dimension()) throw StructuralError("vector does not match the eigensystem");
  if (dense_) return *dense_ * x;
  return basis_->apply(x);
}

Eigen::VectorXcd EigenSystem::apply_adjoint(const Eigen::VectorXcd& y) const {
  if (y.size() != dimension()) throw StructuralError("vector does not match the eigensystem");
  if (dense_) return dense_->adjoint() * y;
  return basis_->apply_adjoint(y);
}

Eigen::VectorXcd EigenSystem::row(Eigen::Index i) const {
  if (dense_) return dense_->row(i).transpose();
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dimension());
  e[i] = 1.0;
  return basis_->apply_adjoint(e).conjugate();
}

Eigen::MatrixXcd EigenSystem::vectors() const { return dense_ ? *dense_ : basis_->dense(); }

Eigen::MatrixXcd qubit_couplings(const SimulationGrid& grid, const PhysicalParams& params, int qubits) {
  if (qubits < 1 || qubits > 2) throw StructuralError("one or two qubits supported");
  const int n = grid.size();
  const double amp = params.g() * std::sqrt(grid.delta_k());
  const double x[2] = {grid.x1(), grid.x2()};
  Eigen::MatrixXcd c(qubits, n);
  for (int q = 0; q < qubits; ++q)
    for (int i = 0; i < n; ++i) c(q, i) = std::polar(amp, grid.k(i) * x[q]);
  return c;
}

BorderedHamiltonian assemble_bordered(const SimulationGrid& grid, std::span<const double> detunings,
                                      const PhysicalParams& params, int qubits) {
  if (static_cast<int>(detunings.size()) != grid.size())
    throw StructuralError("detuning count does not match the grid");
  BorderedHamiltonian h;
  h.qubits = Eigen::MatrixXcd::Zero(qubits, qubits);
  h.couplings = qubit_couplings(grid, params, qubits);
  h.modes = Eigen::Map<const Eigen::VectorXd>(detunings.data(), grid.size());
  if (!h.modes.allFinite()) throw DomainError("mode frequencies must be finite");
  return h;
}

BorderedHamiltonian assemble_bordered(const SimulationGrid& grid, const DispersionRelation& dispersion,
                                      const PhysicalParams& params, int qubits) {
  const std::vector<double> det = mode_detunings(grid, dispersion, params.omega_q());
  return assemble_bordered(grid, det, params, qubits);
}

HermitianMatrix assemble_hamiltonian(const SimulationGrid& grid, const DispersionRelation& dispersion,
                                     const PhysicalParams& params, int qubits) {
  return assemble_bordered(grid, dispersion, params, qubits).dense();
}

HermitianMatrix assemble_hamiltonian(const SimulationGrid& grid, std::span<const double> detunings,
                                     const PhysicalParams& params, int qubits) {
  return assemble_bordered(grid, detunings, params, qubits).dense();
}

EigenSystem diagonalize(const HermitianMatrix& h) {
  const Eigen::Index n = h.rows();
  if (h.cols() != n || n == 0) throw StructuralError("Hamiltonian must be square and non-empty");
  if (!h.allFinite()) throw NumericalError("Hamiltonian has non-finite entries");
  Eigen::MatrixXcd a = h;
  Eigen::VectorXd w(n);
  const lapack_int info =
      LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', static_cast<lapack_int>(n), a.data(), static_cast<lapack_int>(n), w.data());
  if (info != 0) throw NumericalError("zheevd failed with info = " + std::to_string(info));
  return EigenSystem(std::move(w), std::move(a));
}

EigenSystem diagonalize(const BorderedHamiltonian& h) {
  const int r = h.qubit_count();
  if (h.qubits.cols() != r || h.couplings.rows() != r || h.couplings.cols() != h.modes.size())
    throw StructuralError("bordered Hamiltonian blocks do not match");
  if (r == 1) {
    ArrowheadEigen a(h.qubits(0, 0).real(), h.couplings.row(0).adjoint(), h.modes);
    Eigen::VectorXd e = a.energies();
    return EigenSystem(std::move(e), std::make_shared<const SingleStageBasis>(std::move(a)));
  }
  if (r != 2) throw StructuralError("structured solver handles one or two qubits");
  ArrowheadEigen inner(h.qubits(1, 1).real(), h.couplings.row(1).adjoint(), h.modes);
  Eigen::VectorXcd c(h.modes.size() + 1);
  c[0] = h.qubits(1, 0);
  c.tail(h.modes.size()) = h.couplings.row(0).adjoint();
  const Eigen::VectorXcd u = inner.apply_adjoint(c);
  ArrowheadEigen outer(h.qubits(0, 0).real(), u, inner.energies());
  Eigen::VectorXd e = outer.energies();
  return EigenSystem(std::move(e), std::make_shared<const TwoStageBasis>(std::move(inner), std::move(outer)));
}

StateVector evolve(const EigenSystem& eig, const StateVector& psi0, double t) {
  if (psi0.amplitudes().size() != eig.dimension()) throw StructuralError("state does not match the eigensystem");
  Eigen::VectorXcd b = eig.apply_adjoint(psi0.amplitudes());
  for (Eigen::Index l = 0; l < b.size(); ++l) b[l] *= std::polar(1.0, -eig.energies()[l] * t);
  return StateVector(psi0.qubits(), eig.apply(b));
}

Evolution::Evolution(const EigenSystem& eig, const StateVector& psi0)
    : eig_(eig), qubits_(psi0.qubits()), norm2_(psi0.amplitudes().squaredNorm()) {
  if (psi0.amplitudes().size() != eig.dimension()) throw StructuralError("state does not match the eigensystem");
  b_ = eig.apply_adjoint(psi0.amplitudes());
  for (int q = 0; q < qubits_; ++q) weights_.push_back(eig.row(q).cwiseProduct(b_));
}

cplx Evolution::qubit_amplitude(int q, double t) const {
  if (q < 0 || q >= qubits_) throw StructuralError("no such qubit");
  const Eigen::VectorXcd& w = weights_[q];
  const Eigen::VectorXd& e = eig_.energies();
  double re = 0.0, im = 0.0;
  for (Eigen::Index l = 0; l < w.size(); ++l) {
    const double ph = -e[l] * t;
    const double c = std::cos(ph), s = std::sin(ph);
    re += w[l].real() * c - w[l].imag() * s;
    im += w[l].real() * s + w[l].imag() * c;
  }
  return {re, im};
}

Eigen::MatrixXcd Evolution::amplitude_series(double t0, double dt, int count) const {
  if (count < 0) throw DomainError("negative sample count");
  const Eigen::VectorXd& e = eig_.energies();
  const Eigen::Index n = e.size();
  // Phases advance by complex multiplication; an exact resync every block
  // keeps the accumulated rounding at a few ulps.
  constexpr int kResync = 128;
  std::vector<double> cr(n), ci(n), sr(n), si(n);
  for (Eigen::Index l = 0; l < n; ++l) {
    sr[l] = std::cos(e[l] * dt);
    si[l] = -std::sin(e[l] * dt);
  }
  Eigen::MatrixXcd out(count, qubits_);
  for (int q = 0; q < qubits_; ++q) {
    const Eigen::VectorXcd& w = weights_[q];
    for (int k = 0; k < count; ++k) {
      if (k % kResync == 0) {
        const double t = t0 + k * dt;
        for (Eigen::Index l = 0; l < n; ++l) {
          const cplx z = w[l] * std::polar(1.0, -e[l] * t);
          cr[l] = z.real();
          ci[l] = z.imag();
        }
      }
      double re = 0.0, im = 0.0;
      double *a = cr.data(), *b = ci.data();
      const double *c = sr.data(), *s = si.data();
#pragma omp simd reduction(+ : re, im)
      for (Eigen::Index l = 0; l < n; ++l) {
        re += a[l];
        im += b[l];
        const double x = a[l] * c[l] - b[l] * s[l];
        b[l] = a[l] * s[l] + b[l] * c[l];
        a[l] = x;
      }
      out(k, q) = {re, im};
    }
  }
  return out;
}

StateVector Evolution::state(double t) const {
  Eigen::VectorXcd b = b_;
  for (Eigen::Index l = 0; l < b.size(); ++l) b[l] *= std::polar(1.0, -eig_.energies()[l] * t);
  return StateVector(qubits_, eig_.apply(b));
}

TransferResult max_transfer(const EigenSystem& eig, const StateVector& psi0, TimeWindow window, double resolution) {
  return max_transfer(Evolution(eig, psi0), window, resolution);
}

TransferResult max_transfer(const Evolution& evo, TimeWindow window, double resolution) {
  if (!(window.hi > window.lo)) throw DomainError("empty time window");
  if (!(resolution > 0.0)) throw DomainError("scan resolution must be positive");
  if (evo.qubits() < 2) throw StructuralError("transfer needs a second qubit");
  const int steps = std::max(1, static_cast<int>(std::ceil((window.hi - window.lo) / resolution)));
  TransferResult res;
  res.trajectory.reserve(steps + 1);
  int best = 0;
  const Eigen::MatrixXcd amp = evo.amplitude_series(window.lo, resolution, steps + 1);
  for (int i = 0; i <= steps; ++i) {
    double t = window.lo + i * resolution;
    double p1 = std::norm(amp(i, 0)), p2 = std::norm(amp(i, 1));
    if (t > window.hi) {
      t = window.hi;
      p1 = evo.qubit_population(0, t);
      p2 = evo.qubit_population(1, t);
    }
    res.trajectory.push_back({t, p1, p2, evo.initial_norm2() - p1 - p2});
    if (p2 > res.trajectory[best].p2) best = i;
  }
  res.t_star = res.trajectory[best].t;
  res.p_star = res.trajectory[best].p2;

  // Golden-section refinement inside the neighbouring samples.
  double a = res.trajectory[std::max(0, best - 1)].t;
  double b = res.trajectory[std::min(steps, best + 1)].t;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = evo.qubit_population(1, x1), f2 = evo.qubit_population(1, x2);
  for (int it = 0; it < 80 && b - a > 1e-10; ++it) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = evo.qubit_population(1, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = evo.qubit_population(1, x2);
    }
  }
  const double tr = f1 > f2 ? x1 : x2;
  const double pr = std::max(f1, f2);
  if (pr > res.p_star) {
    res.p_star = pr;
    res.t_star = tr;
  }
  return res;
}

TimeWindow default_time_window(const SimulationGrid& grid, const PhysicalParams& params, double delta_t_guess,
                               double v_max) {
  const double hi = std::min(delta_t_guess + 10.0 / params.gamma(), 0.8 * grid.recurrence_time(v_max));
  if (!(hi > 0.0)) throw DomainError("time window collapsed; refine the grid spacing");
  return {0.0, hi};
}

std::vector<cplx> field_snapshot(const StateVector& psi, std::span<const double> x, const SimulationGrid& grid) {
  if (psi.modes() != grid.size()) throw StructuralError("state and grid mode counts differ");
  const auto ph = psi.photon();
  const double s = std::sqrt(grid.delta_k());
  std::vector<cplx> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    cplx acc = 0.0;
    for (int i = 0; i < grid.size(); ++i) acc += ph[i] * std::polar(1.0, grid.k(i) * x[j]);
    out[j] = s * acc;
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectorySample>& samples,
                          const std::vector<std::string>& header) {
  for (const auto& h : header) out << "# " << h << "\n";
  out << "t,p1,p2,field_norm\n" << std::setprecision(12);
  for (const auto& s : samples) out << s.t << "," << s.p1 << "," << s.p2 << "," << s.field_norm << "\n";
}

}  // namespace wgqst
