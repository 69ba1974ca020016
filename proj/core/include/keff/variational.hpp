#ifndef KEFF_VARIATIONAL_HPP
#define KEFF_VARIATIONAL_HPP

#include <cstdint>
#include <vector>

#include "keff/operators.hpp"
#include "keff/types.hpp"

namespace keff {

/// Pointwise ratio -(T + K_s)phi / K_f phi for a strictly positive test
/// function; the extremes of this field sandwich 1/k_eff.  Errors when the
/// fission image vanishes anywhere (structural zero of the kernel).
Field ratio_field(const PhaseOperators& ops, const Field& phi);

enum class TauDegeneracy {
  None,
  AllGammaAdmissible,   // sup of the ratio <= 0: every gamma > 0 admissible
  EmptyAdmissibleSet,   // no gamma admissible
};

/// Extended-real threshold value; value may be +infinity with the
/// degeneracy flag naming the branch taken.
struct ExtendedTau {
  double value = 0.0;
  TauDegeneracy degeneracy = TauDegeneracy::None;
};

/// tau_plus(phi) = sup{gamma > 0 : (T + K_s + K_f/gamma) phi >= 0}
/// = 1 / max(ratio_field); a lower bound for k_eff.
ExtendedTau tau_plus(const PhaseOperators& ops, const Field& phi);

/// tau_minus(phi) = inf{gamma > 0 : -(T + K_s + K_f/gamma) phi > 0}
/// = 1 / min(ratio_field); an upper bound for k_eff (+infinity when the
/// minimum is nonpositive).
ExtendedTau tau_minus(const PhaseOperators& ops, const Field& phi);

struct SandwichSample {
  std::uint64_t seed = 0;      // per-sample seed actually fed to the RNG
  double tau_plus = 0.0;       // +inf encoded as infinity()
  double tau_minus = 0.0;
  bool violation = false;
};

struct SandwichSummary {
  int samples = 0;
  int violations = 0;
  std::vector<std::uint64_t> violating_seeds;
  double best_lower = 0.0;                 // largest finite tau_plus seen
  double best_upper = 0.0;                 // smallest finite tau_minus seen (inf if none)
  double ratio_spread_at_phi_eff = 0.0;    // max - min of the ratio field at phi_eff
  std::vector<SandwichSample> detail;
};

/// Draws n random strictly positive test functions (resolvent images of
/// uniform noise), checks tau_plus <= k_eff <= tau_minus for each within
/// 1e-10 relative slack, and measures the ratio-field collapse at phi_eff.
SandwichSummary sandwich_verify(const PhaseOperators& ops, double k_eff,
                                const Field& phi_eff, int n, std::uint64_t seed);

}  // namespace keff

#endif
