#ifndef KEFF_SOLVER_HPP
#define KEFF_SOLVER_HPP

#include <functional>
#include <vector>

#include "keff/operators.hpp"
#include "keff/types.hpp"

namespace keff {

struct PowerIterationOptions {
  double tol = 1e-12;          // Collatz-Wielandt gap, relative to max(1, r)
  int max_iterations = 100000;
  double vector_tol = 1e-13;   // sup-norm change of the normalized iterate
  double ratio_floor = 1e-12;  // entries below floor * max are left out of the ratios
};

struct PowerIterationResult {
  double radius = 0.0;
  double ratio_min = 0.0;  // best Collatz-Wielandt bracket seen at the last step
  double ratio_max = 0.0;
  Field vec;               // normalized to unit sup-norm, nonnegative
  int iterations = 0;
  bool converged = false;
};

/// Power iteration on a positivity-preserving map, with convergence measured
/// by the Collatz-Wielandt gap of (A phi) / phi over entries of phi above the
/// floor.  A vanishing image short-circuits to radius zero.
PowerIterationResult spectral_radius(const std::function<Field(const Field&)>& apply,
                                     const Field& start,
                                     const PowerIterationOptions& opts = {});

struct SolverOptions {
  double tolerance = 1e-10;       // |R(k)-1| at the root
  PowerIterationOptions power;
  double gamma_min_probe = 1e-6;  // where the gamma -> 0 existence limit is sampled
  double bracket_lo = 1e-8;
  double bracket_hi = 1e8;
};

struct ExistenceCheck {
  double scattering_radius = 0.0;  // r_sigma[(0-T)^{-1} K_s]
  double probe_gamma = 0.0;
  double radius_at_probe = 0.0;    // R(probe_gamma)
  bool scattering_ok = false;      // scattering_radius < 1
  bool fission_ok = false;         // R(probe) > 1
  bool exists = false;
  std::string violated;            // empty, "scattering_radius", "fission_probe", or both
};

/// Verifies the two conditions under which a unique k_eff > 0 exists:
/// the scattering loop is strictly subcritical and R(gamma) exceeds 1
/// near gamma = 0.
ExistenceCheck check_existence(const PhaseOperators& ops, const SolverOptions& opts = {});

/// Spectral radius of the loop operator at a fixed gamma.
PowerIterationResult loop_radius(const PhaseOperators& ops, double gamma,
                                 const PowerIterationOptions& opts = {},
                                 const Field* warm_start = nullptr);

enum class SolveMethod { RootFind, Direct };

struct CriticalitySolution {
  double k_eff = 0.0;
  GridFunction phi_eff;            // strictly positive, unit p-norm
  double residual = 0.0;           // ||loop(phi)/1 - phi||_p at gamma = k_eff
  double radius_gap = 0.0;         // |R(k_eff) - 1|
  Criticality classification = Criticality::SubCritical;
  SolveMethod method = SolveMethod::RootFind;
  int outer_iterations = 0;        // bracket/refine steps (rootfind) or power steps (direct)
  long operator_applications = 0;
  ExistenceCheck existence;
};

/// Finds k_eff as the unique root of R(gamma) = 1, R strictly decreasing.
CriticalitySolution solve_keff_rootfind(const PhaseOperators& ops,
                                        const SolverOptions& opts = {});

/// Finds k_eff as the spectral radius of (I - L_s)^{-1} L_f with
/// L_s = (0-T)^{-1} K_s, L_f = (0-T)^{-1} K_f; the inner inverse is a
/// Neumann fixed-point iteration, valid because r(L_s) < 1.
CriticalitySolution solve_keff_direct(const PhaseOperators& ops,
                                      const SolverOptions& opts = {});

struct EigenfunctionTrace {
  std::vector<double> gamma;   // tau_plus of each iterate
  std::vector<double> error;   // ||phi_k - phi_eff||_p
  Field phi_final;
  bool converged = false;
  int iterations = 0;
};

/// Constructive approximation of phi_eff: gamma_k = tau_plus(phi_k),
/// phi_{k+1} = normalized loop image of phi_k at gamma_k, starting from the
/// normalized resolvent of the constant function 1.
EigenfunctionTrace approximate_eigenfunction(const PhaseOperators& ops,
                                             const CriticalitySolution& reference,
                                             int max_iterations, double tol);

}  // namespace keff

#endif
