#ifndef KEFF_BOUNDS_HPP
#define KEFF_BOUNDS_HPP

#include <string>
#include <vector>

#include "keff/diffusion.hpp"
#include "keff/operators.hpp"
#include "keff/transport.hpp"

namespace keff {

enum class BoundRelation { Lower, Upper };

/// One evaluated bound.  `certified` is set only when the hypothesis of the
/// underlying estimate held, in which case the relation to k_eff is claimed;
/// otherwise the value is descriptive.
struct BoundCertificate {
  std::string name;
  std::string psi;  // test-function strategy label
  BoundRelation relation = BoundRelation::Lower;
  double value = 0.0;
  bool certified = false;
  std::string note;
};

struct BoundsConstants {
  double diameter = 0.0;    // slab width
  double v0 = 0.0;          // smallest speed (transport)
  double sigma_bar = 0.0;   // max sigma
  double lambda0 = 0.0;     // principal diffusion eigenvalue (diffusion)
};

struct BoundsReport {
  BoundsConstants constants;
  std::vector<BoundCertificate> entries;
};

enum class PsiStrategy { Ones, MinMatrixPerron, MaxMatrixPerron, MeanMatrixPerron };

const char* to_string(PsiStrategy s);

/// Stay-time collision matrix at one cell:
/// A(j,k) = w_k Sigma(x_i, v_j, v_k) tau(x_i, v_k) / (1 + sigma(x_i, v_j) tau(x_i, v_j))
/// with tau the outflow-face stay time (see TransportOperator::sweep_stay_time);
/// Sigma is the full kernel or the fission kernel alone.
Eigen::MatrixXd k_tau_matrix(const TransportOperator& op, int cell, bool fission_only);

/// Action of the stay-time collision matrix on a strictly positive node
/// function.
Eigen::ArrayXd k_tau_apply(const TransportOperator& op, int cell,
                           const Eigen::ArrayXd& psi, bool fission_only);

/// Collision matrix damped by the principal diffusion eigenvalue:
/// B(g,k) = u_k Sigma(x_i, xi_g, xi_k) / (lambda0 d1(xi_g) + sigma(x_i, xi_g)).
/// Requires degenerate diffusion coefficients.
Eigen::MatrixXd k_lambda_matrix(const DiffusionOperator& op, int cell, bool fission_only);

/// Largest pointwise ratio of the full stay-time collision operator; when it
/// is below one, k_eff <= value is certified.
BoundCertificate theta_upper(const TransportOperator& op, const Eigen::ArrayXd& psi,
                             const std::string& psi_label);

/// Smallest pointwise ratio; when above one, k_eff >= value is certified.
BoundCertificate theta_lower(const TransportOperator& op, const Eigen::ArrayXd& psi,
                             const std::string& psi_label);

/// Fission-only floor: k_eff >= min ratio of the fission stay-time operator,
/// unconditionally.
BoundCertificate beta_f_lower(const TransportOperator& op, const Eigen::ArrayXd& psi,
                              const std::string& psi_label);

/// Undamped fission bound k_eff >= Lambda_f(psi) / (1 + sigma_bar d / v0);
/// at psi = 1 this is the constant-test-function estimate.
BoundCertificate lambda_f_bound(const TransportOperator& op, const Eigen::ArrayXd& psi,
                                const std::string& psi_label);

/// Diffusion fission floor k_eff >= min ratio of the lambda0-damped fission
/// operator, unconditionally.
BoundCertificate diffusion_beta0(const DiffusionOperator& op, const Eigen::ArrayXd& psi,
                                 const std::string& psi_label);

/// Full-kernel lambda0-damped ratios: the min certifies k_eff >= value when
/// above one; the max certifies k_eff <= value only when below one (under
/// the opposite hypothesis an upper bound would be inconsistent, which the
/// note records).
std::vector<BoundCertificate> diffusion_theta(const DiffusionOperator& op,
                                              const Eigen::ArrayXd& psi,
                                              const std::string& psi_label);

struct PaoResult {
  bool holds = false;        // strict inequality at every (cell, group)
  double quantitative = 0.0; // min over (cell, group) of the collision/damping ratio
  int fail_cell = -1;
  int fail_group = -1;
};

/// Pointwise comparison lambda0 d1 + sigma < sum_k u_k (Sigma_s + Sigma_f):
/// when it holds everywhere, k_eff >= quantitative >= 1 is certified.
PaoResult pao_criterion(const DiffusionOperator& op);

/// Entrywise min/max/mean over cells of the per-cell bound matrix family.
Eigen::MatrixXd psi_strategy_matrix(const PhaseOperators& ops, bool fission_only,
                                    PsiStrategy strategy);

/// Dominant eigenvalue of a small nonnegative matrix (power iteration with a
/// tiny diagonal shift to break periodicity).
double dense_spectral_radius(const Eigen::MatrixXd& m);

/// Test-function candidates for the bound evaluators; all bound values are
/// invariant under scaling of psi.
Eigen::ArrayXd optimize_psi(const PhaseOperators& ops, bool fission_only,
                            PsiStrategy strategy);

/// Evaluates every bound applicable to the model kind for each strategy.
BoundsReport evaluate_all_bounds(const PhaseOperators& ops,
                                 const std::vector<PsiStrategy>& strategies);

/// Number of certified entries inconsistent with k_eff at the given relative
/// slack.
int count_certificate_violations(const BoundsReport& report, double k_eff,
                                 double rel_slack = 1e-10);

}  // namespace keff

#endif
