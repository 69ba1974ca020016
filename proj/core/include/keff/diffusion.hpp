#ifndef KEFF_DIFFUSION_HPP
#define KEFF_DIFFUSION_HPP

#include "keff/operators.hpp"

namespace keff {

/// Principal Dirichlet eigenpair of the spatial operator -d/dx(D0 d/dx).
struct PrincipalEigenpair {
  double lambda0 = 0.0;
  Eigen::ArrayXd rho0;   // strictly positive, unit Euclidean norm
  double residual = 0.0;
  int iterations = 0;
};

/// Cell-centered three-point stencil for T = div(D grad .) - sigma per
/// energy group, homogeneous Dirichlet at the slab faces (ghost values
/// mirror so the face value vanishes), face coefficients by arithmetic
/// mean.  (0 - T_h) is a symmetric tridiagonal M-matrix per group.
class DiffusionOperator : public PhaseOperators {
 public:
  explicit DiffusionOperator(const ProblemModel& model);

  const ProblemModel& model() const override { return *model_; }

  Field apply_T(const Field& rho) const override;
  Field apply_resolvent(const Field& q) const override;
  Field apply_scattering(const Field& rho) const override;
  Field apply_fission(const Field& rho) const override;

  /// Smallest eigenvalue and positive eigenvector of -d/dx(D0 d/dx),
  /// cached at construction.  Requires degenerate coefficients
  /// D = D0(x) d1(xi).
  const PrincipalEigenpair& principal_eigenpair() const;

 private:
  struct Tridiag {
    Eigen::ArrayXd sub;   // -face/dx^2, length nx-1
    Eigen::ArrayXd diag;  // length nx
    // Cached LU factors (Thomas); the matrix is diagonally dominant.
    Eigen::ArrayXd lower;
    Eigen::ArrayXd pivot;
    void factorize();
    Eigen::ArrayXd solve(const Eigen::ArrayXd& rhs) const;
  };

  static Tridiag spatial_matrix(const ProblemModel& model, int group,
                                bool include_sigma);

  const ProblemModel* model_;
  std::vector<Tridiag> groups_;          // (0 - T_h) per group, factorized
  std::optional<PrincipalEigenpair> principal_;
};

}  // namespace keff

#endif
