#pragma once

#include <vector>

#include <Eigen/Core>

namespace wgqst {

/// Eigendecomposition of the Hermitian arrowhead matrix
///
///     A = [ alpha  z^H     ]
///         [ z      diag(d) ]
///
/// Eigenvalues come from the secular equation; couplings are recomputed from
/// the computed eigenvalues (Loewner formula) so the implicit eigenvectors are
/// numerically orthonormal. Tiny couplings and (near-)equal poles are deflated.
/// Eigenvectors are never stored densely: apply() and apply_adjoint() cost
/// O(n * m) with m the number of non-deflated poles.
class ArrowheadEigen {
 public:
  ArrowheadEigen(double alpha, const Eigen::VectorXcd& z, const Eigen::VectorXd& d);

  Eigen::Index size() const { return n_ + 1; }
  /// Ascending.
  const Eigen::VectorXd& energies() const { return energies_; }

  /// V x (x in eigenbasis coordinates).
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
  /// V^H y.
  Eigen::VectorXcd apply_adjoint(const Eigen::VectorXcd& y) const;
  /// Row 0 of V (corner overlaps).
  Eigen::VectorXcd corner_row() const;
  Eigen::MatrixXcd dense() const;

  Eigen::Index secular_count() const { return static_cast<Eigen::Index>(pole_.size()); }
  Eigen::Index deflated_count() const { return static_cast<Eigen::Index>(defl_.size()); }

 private:
  struct Rotation {
    int i, j;  // working indices; i survives, j deflated
    std::complex<double> a, b;
  };

  void solve_roots(double alpha);
  void recompute_couplings(const Eigen::VectorXcd& zs);
  void to_original(Eigen::VectorXcd& modes) const;
  void to_working(Eigen::VectorXcd& modes) const;

  int n_ = 0;
  std::vector<int> perm_;  // working (sorted) index -> original mode index
  std::vector<Rotation> rot_;
  std::vector<int> sec_;  // working index of each secular pole
  Eigen::VectorXd pole_;
  Eigen::VectorXd w_;  // |z|^2 before recomputation
  Eigen::VectorXcd zhat_;
  std::vector<int> origin_;
  Eigen::VectorXd tau_;
  Eigen::VectorXd lam_base_;  // pole_[origin_[j]]
  Eigen::VectorXd inv_norm_;
  std::vector<int> defl_;  // working index of each deflated vector
  Eigen::VectorXd defl_val_;
  std::vector<int> col_;  // output column -> j (< m+1) or m+1+q for deflated q
  Eigen::VectorXd energies_;
};

}  // namespace wgqst
