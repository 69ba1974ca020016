#include "keff/variational.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace keff {

Field ratio_field(const PhaseOperators& ops, const Field& phi) {
  if (!(phi.minCoeff() > 0.0))
    throw Error("ratio_field: test function must be strictly positive");
  Field numerator = -(ops.apply_T(phi) + ops.apply_scattering(phi));
  Field fission = ops.apply_fission(phi);
  for (int i = 0; i < fission.rows(); ++i)
    for (int j = 0; j < fission.cols(); ++j)
      if (fission(i, j) <= 1e-300)
        throw Error("ratio_field: fission image vanishes at cell " + std::to_string(i) +
                    ", node " + std::to_string(j));
  return numerator / fission;
}

ExtendedTau tau_plus(const PhaseOperators& ops, const Field& phi) {
  const Field r = ratio_field(ops, phi);
  const double sup = r.maxCoeff();
  ExtendedTau out;
  if (std::isinf(sup)) {
    // Unbounded ratio: no admissible gamma at all.
    out.value = 0.0;
    out.degeneracy = TauDegeneracy::EmptyAdmissibleSet;
  } else if (sup <= 0.0) {
    out.value = std::numeric_limits<double>::infinity();
    out.degeneracy = TauDegeneracy::AllGammaAdmissible;
  } else {
    out.value = 1.0 / sup;
  }
  return out;
}

ExtendedTau tau_minus(const PhaseOperators& ops, const Field& phi) {
  const Field r = ratio_field(ops, phi);
  const double inf = r.minCoeff();
  ExtendedTau out;
  if (inf <= 0.0) {
    // The strict positivity -(T + K(gamma))phi > 0 fails for every gamma.
    out.value = std::numeric_limits<double>::infinity();
    out.degeneracy = TauDegeneracy::EmptyAdmissibleSet;
  } else {
    out.value = 1.0 / inf;
  }
  return out;
}

SandwichSummary sandwich_verify(const PhaseOperators& ops, double k_eff,
                                const Field& phi_eff, int n, std::uint64_t seed) {
  const ProblemModel& m = ops.model();
  SandwichSummary summary;
  summary.samples = n;
  summary.best_lower = 0.0;
  summary.best_upper = std::numeric_limits<double>::infinity();

  const double slack = 1e-10 * k_eff;
  for (int s = 0; s < n; ++s) {
    const std::uint64_t sample_seed = seed + static_cast<std::uint64_t>(s);
    std::mt19937_64 rng(sample_seed);
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    Field q(m.num_cells(), m.num_nodes());
    for (int i = 0; i < q.rows(); ++i)
      for (int j = 0; j < q.cols(); ++j) q(i, j) = unif(rng);
    Field phi = ops.apply_resolvent(q);

    SandwichSample sample;
    sample.seed = sample_seed;
    sample.tau_plus = tau_plus(ops, phi).value;
    sample.tau_minus = tau_minus(ops, phi).value;
    const bool lower_ok = !(sample.tau_plus > k_eff + slack);
    const bool upper_ok =
        std::isinf(sample.tau_minus) || !(sample.tau_minus < k_eff - slack);
    sample.violation = !(lower_ok && upper_ok);
    if (sample.violation) {
      ++summary.violations;
      summary.violating_seeds.push_back(sample_seed);
    }
    if (std::isfinite(sample.tau_plus))
      summary.best_lower = std::max(summary.best_lower, sample.tau_plus);
    if (std::isfinite(sample.tau_minus))
      summary.best_upper = std::min(summary.best_upper, sample.tau_minus);
    summary.detail.push_back(sample);
  }

  if (phi_eff.size() > 0) {
    const Field r = ratio_field(ops, phi_eff);
    summary.ratio_spread_at_phi_eff = r.maxCoeff() - r.minCoeff();
  }
  return summary;
}

}  // namespace keff
