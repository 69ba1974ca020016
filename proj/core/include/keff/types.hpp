#ifndef KEFF_TYPES_HPP
#define KEFF_TYPES_HPP

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace keff {

inline constexpr const char* kVersion = "0.1.0";

/// Phase-space grid data: rows are spatial cells, columns are velocity or
/// energy nodes.
using Field = Eigen::ArrayXXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the existence conditions for the effective multiplication
/// factor fail; carries which condition was violated.
class ExistenceError : public Error {
 public:
  using Error::Error;
};

enum class ModelKind { Transport, Diffusion };

enum class Criticality { SubCritical, Critical, SuperCritical };

inline const char* to_string(Criticality c) {
  switch (c) {
    case Criticality::SubCritical: return "sub-critical";
    case Criticality::Critical: return "critical";
    case Criticality::SuperCritical: return "super-critical";
  }
  return "?";
}

/// Half-width of the band around 1 inside which k_eff is reported critical.
inline constexpr double kCriticalBand = 1e-6;

inline Criticality classify(double k_eff) {
  if (std::abs(k_eff - 1.0) <= kCriticalBand) return Criticality::Critical;
  return k_eff < 1.0 ? Criticality::SubCritical : Criticality::SuperCritical;
}

/// A nonnegative grid function tagged with the L^p exponent its norms use.
struct GridFunction {
  Field values;
  double p = 2.0;
};

}  // namespace keff

#endif
