#ifndef KEFF_OPERATORS_HPP
#define KEFF_OPERATORS_HPP

#include <memory>

#include "keff/problem.hpp"
#include "keff/types.hpp"

namespace keff {

/// Common view of the discrete phase-space operators: the (dissipative)
/// transport part T, its resolvent (0 - T)^{-1}, and the scattering and
/// fission collision operators.  Implementations are immutable after
/// construction; all applications are pure.
class PhaseOperators {
 public:
  virtual ~PhaseOperators() = default;

  virtual const ProblemModel& model() const = 0;

  virtual Field apply_T(const Field& phi) const = 0;
  virtual Field apply_resolvent(const Field& q) const = 0;
  virtual Field apply_scattering(const Field& phi) const = 0;
  virtual Field apply_fission(const Field& phi) const = 0;

  /// (0 - T)^{-1} (K_s + K_f / gamma) phi, the loop operator whose spectral
  /// radius as a function of gamma locates k_eff.
  Field apply_loop(const Field& phi, double gamma) const {
    Field q = apply_scattering(phi) + apply_fission(phi) / gamma;
    return apply_resolvent(q);
  }
};

/// Builds the operator set matching the model kind.  The model must outlive
/// the returned object.
std::unique_ptr<PhaseOperators> make_operators(const ProblemModel& model);

}  // namespace keff

#endif
