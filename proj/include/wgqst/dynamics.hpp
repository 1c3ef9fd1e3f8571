#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wgqst/model.hpp"

namespace wgqst {

class DispersionRelation;

using HermitianMatrix = Eigen::MatrixXcd;

/// Hamiltonian with a small qubit block bordering a diagonal block of modes:
///
///     H = [ Q   C    ]     Q: r x r Hermitian, C: r x n couplings,
///         [ C^H diag ]     diag: mode detunings.
struct BorderedHamiltonian {
  Eigen::MatrixXcd qubits;
  Eigen::MatrixXcd couplings;
  Eigen::VectorXd modes;

  int qubit_count() const { return static_cast<int>(qubits.rows()); }
  Eigen::Index dimension() const { return qubits.rows() + modes.size(); }
  HermitianMatrix dense() const;
};

/// Eigenpairs of a Hamiltonian. The eigenvector matrix is either stored
/// densely or held implicitly by the structured bordered solver; both expose
/// the same products.
class EigenSystem {
 public:
  class Basis {
   public:
    virtual ~Basis() = default;
    virtual Eigen::Index dimension() const = 0;
    virtual Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const = 0;
    virtual Eigen::VectorXcd apply_adjoint(const Eigen::VectorXcd& y) const = 0;
    virtual Eigen::MatrixXcd dense() const = 0;
  };

  EigenSystem(Eigen::VectorXd energies, Eigen::MatrixXcd vectors);
  EigenSystem(Eigen::VectorXd energies, std::shared_ptr<const Basis> basis);

  const Eigen::VectorXd& energies() const { return energies_; }
  Eigen::Index dimension() const { return energies_.size(); }
  bool structured() const { return !dense_; }

  /// U x
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
  /// U^H y
  Eigen::VectorXcd apply_adjoint(const Eigen::VectorXcd& y) const;
  /// Row i of U.
  Eigen::VectorXcd row(Eigen::Index i) const;
  /// Dense U; materialized on demand for the structured form.
  Eigen::MatrixXcd vectors() const;

 private:
  Eigen::VectorXd energies_;
  std::shared_ptr<const Eigen::MatrixXcd> dense_;
  std::shared_ptr<const Basis> basis_;
};

/// Couplings g sqrt(dk) e^{i k x_q} of each qubit to each mode (qubits x modes).
Eigen::MatrixXcd qubit_couplings(const SimulationGrid& grid, const PhysicalParams& params, int qubits);

BorderedHamiltonian assemble_bordered(const SimulationGrid& grid, std::span<const double> detunings,
                                      const PhysicalParams& params, int qubits = 2);
BorderedHamiltonian assemble_bordered(const SimulationGrid& grid, const DispersionRelation& dispersion,
                                      const PhysicalParams& params, int qubits = 2);

/// Dense (N+qubits)^2 Hamiltonian in the rotating frame.
HermitianMatrix assemble_hamiltonian(const SimulationGrid& grid, const DispersionRelation& dispersion,
                                     const PhysicalParams& params, int qubits = 2);
HermitianMatrix assemble_hamiltonian(const SimulationGrid& grid, std::span<const double> detunings,
                                     const PhysicalParams& params, int qubits = 2);

/// Dense Hermitian eigensolver (LAPACK zheevd).
EigenSystem diagonalize(const HermitianMatrix& h);
/// Structured solver; O(n^2) work, O(n) storage.
EigenSystem diagonalize(const BorderedHamiltonian& h);

StateVector evolve(const EigenSystem& eig, const StateVector& psi0, double t);

/// Precomputed spectral data for repeated evaluation of one initial state.
/// Qubit amplitudes cost O(dim) per time after construction.
class Evolution {
 public:
  Evolution(const EigenSystem& eig, const StateVector& psi0);

  cplx qubit_amplitude(int q, double t) const;
  double qubit_population(int q, double t) const { return std::norm(qubit_amplitude(q, t)); }
  StateVector state(double t) const;
  /// Amplitudes of every qubit at t0 + k dt, k < count (rows: times, cols: qubits).
  Eigen::MatrixXcd amplitude_series(double t0, double dt, int count) const;
  int qubits() const { return qubits_; }
  double initial_norm2() const { return norm2_; }

  const Eigen::VectorXcd& coefficients() const { return b_; }
  const EigenSystem& eigensystem() const { return eig_; }

 private:
  EigenSystem eig_;
  int qubits_;
  double norm2_;
  Eigen::VectorXcd b_;
  std::vector<Eigen::VectorXcd> weights_;  // U(q, l) b_l per qubit
};

struct TrajectorySample {
  double t, p1, p2, field_norm;
};

struct TransferResult {
  double t_star = 0.0;
  double p_star = 0.0;
  std::vector<TrajectorySample> trajectory;
};

struct TimeWindow {
  double lo, hi;
};

/// Dense scan of |c2|^2 then golden-section refinement around the best sample.
TransferResult max_transfer(const EigenSystem& eig, const StateVector& psi0, TimeWindow window,
                            double resolution = 0.01);
TransferResult max_transfer(const Evolution& evo, TimeWindow window, double resolution = 0.01);

/// Scan window [0, guess + 10/gamma] clamped below 0.8 of the discrete
/// recurrence time of the band.
TimeWindow default_time_window(const SimulationGrid& grid, const PhysicalParams& params,
                               double delta_t_guess, double v_max);

/// E(x) = sum_k psi_k sqrt(dk) e^{i k x}, approximating the continuum k-integral.
std::vector<cplx> field_snapshot(const StateVector& psi, std::span<const double> x, const SimulationGrid& grid);

/// CSV with columns t,p1,p2,field_norm after '#' metadata lines.
void write_trajectory_csv(std::ostream& out, const std::vector<TrajectorySample>& samples,
                          const std::vector<std::string>& header);

}  // namespace wgqst
