#include "keff/bounds.hpp"

#include <cmath>
#include <limits>

#include "keff/solver.hpp"

namespace keff {

const char* to_string(PsiStrategy s) {
  switch (s) {
    case PsiStrategy::Ones: return "ones";
    case PsiStrategy::MinMatrixPerron: return "min-matrix-perron";
    case PsiStrategy::MaxMatrixPerron: return "max-matrix-perron";
    case PsiStrategy::MeanMatrixPerron: return "mean-matrix-perron";
  }
  return "?";
}

namespace {

void require_positive(const Eigen::ArrayXd& psi) {
  if (psi.size() == 0 || !(psi.minCoeff() > 0.0))
    throw Error("bounds: psi must be strictly positive at every node");
}

// Extremes of (A_i psi)_j / psi_j over all cells and nodes.
struct RatioExtremes {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
};

template <typename MatrixAt>
RatioExtremes ratio_extremes(int cells, const Eigen::ArrayXd& psi, MatrixAt&& matrix_at) {
  RatioExtremes ext;
  for (int i = 0; i < cells; ++i) {
    Eigen::ArrayXd image = (matrix_at(i) * psi.matrix()).array();
    for (int j = 0; j < psi.size(); ++j) {
      const double r = image[j] / psi[j];
      ext.min = std::min(ext.min, r);
      ext.max = std::max(ext.max, r);
    }
  }
  return ext;
}

}  // namespace

Eigen::MatrixXd k_tau_matrix(const TransportOperator& op, int cell, bool fission_only) {
  const ProblemModel& m = op.model();
  const int nn = m.num_nodes();
  const Eigen::ArrayXd& w = m.node_weights();
  const auto& kf = m.xs.sigma_f[cell];
  const auto& ks = m.xs.sigma_s[cell];
  Eigen::MatrixXd out(nn, nn);
  for (int j = 0; j < nn; ++j) {
    const double damp = 1.0 + m.xs.sigma(cell, j) * op.sweep_stay_time(cell, j);
    for (int k = 0; k < nn; ++k) {
      double sig = kf(j, k);
      if (!fission_only) sig += ks(j, k);
      out(j, k) = w[k] * sig * op.sweep_stay_time(cell, k) / damp;
    }
  }
  return out;
}

Eigen::ArrayXd k_tau_apply(const TransportOperator& op, int cell,
                           const Eigen::ArrayXd& psi, bool fission_only) {
  require_positive(psi);
  return (k_tau_matrix(op, cell, fission_only) * psi.matrix()).array();
}

Eigen::MatrixXd k_lambda_matrix(const DiffusionOperator& op, int cell, bool fission_only) {
  const ProblemModel& m = op.model();
  const DiffusionData& data = *m.diffusion;
  if (!data.degenerate)
    throw Error("bounds: diffusion estimates need degenerate coefficients D = D0(x) d1(xi)");
  const double lambda0 = op.principal_eigenpair().lambda0;
  const int ng = m.num_nodes();
  const Eigen::ArrayXd& u = m.node_weights();
  const auto& kf = m.xs.sigma_f[cell];
  const auto& ks = m.xs.sigma_s[cell];
  Eigen::MatrixXd out(ng, ng);
  for (int g = 0; g < ng; ++g) {
    const double damp = lambda0 * data.d1[g] + m.xs.sigma(cell, g);
    for (int k = 0; k < ng; ++k) {
      double sig = kf(g, k);
      if (!fission_only) sig += ks(g, k);
      out(g, k) = u[k] * sig / damp;
    }
  }
  return out;
}

BoundCertificate theta_upper(const TransportOperator& op, const Eigen::ArrayXd& psi,
                             const std::string& psi_label) {
  require_positive(psi);
  RatioExtremes ext = ratio_extremes(op.model().num_cells(), psi, [&](int i) {
    return k_tau_matrix(op, i, false);
  });
  BoundCertificate cert;
  cert.name = "theta_upper";
  cert.psi = psi_label;
  cert.relation = BoundRelation::Upper;
  cert.value = ext.max;
  cert.certified = ext.max < 1.0;
  if (!cert.certified) cert.note = "hypothesis max ratio < 1 not met; value descriptive";
  return cert;
}

BoundCertificate theta_lower(const TransportOperator& op, const Eigen::ArrayXd& psi,
                             const std::string& psi_label) {
  require_positive(psi);
  RatioExtremes ext = ratio_extremes(op.model().num_cells(), psi, [&](int i) {
    return k_tau_matrix(op, i, false);
  });
  BoundCertificate cert;
  cert.name = "theta_lower";
  cert.psi = psi_label;
  cert.relation = BoundRelation::Lower;
  cert.value = ext.min;
  cert.certified = ext.min > 1.0;
  if (!cert.certified) cert.note = "hypothesis min ratio > 1 not met; value descriptive";
  return cert;
}

BoundCertificate beta_f_lower(const TransportOperator& op, const Eigen::ArrayXd& psi,
                              const std::string& psi_label) {
  require_positive(psi);
  RatioExtremes ext = ratio_extremes(op.model().num_cells(), psi, [&](int i) {
    return k_tau_matrix(op, i, true);
  });
  BoundCertificate cert;
  cert.name = "beta_f";
  cert.psi = psi_label;
  cert.relation = BoundRelation::Lower;
  cert.value = ext.min;
  cert.certified = true;  // k_eff >= beta(psi) holds for every positive psi
  if (!(ext.min > 0.0)) cert.note = "vacuous (fission vanishes against psi somewhere)";
  return cert;
}

BoundCertificate lambda_f_bound(const TransportOperator& op, const Eigen::ArrayXd& psi,
                                const std::string& psi_label) {
  require_positive(psi);
  const ProblemModel& m = op.model();
  const int nx = m.num_cells();
  const int nn = m.num_nodes();
  const Eigen::ArrayXd& w = m.node_weights();

  double lambda = std::numeric_limits<double>::infinity();
  for (int i = 0; i < nx; ++i) {
    const auto& kf = m.xs.sigma_f[i];
    for (int j = 0; j < nn; ++j) {
      double acc = 0.0;
      for (int k = 0; k < nn; ++k)
        acc += w[k] * kf(j, k) * op.sweep_stay_time(i, k) * psi[k];
      lambda = std::min(lambda, acc / psi[j]);
    }
  }

  const double d = m.geometry.width;
  const double v0 = m.velocity.v_min;
  const double sigma_bar = m.xs.sigma.maxCoeff();
  BoundCertificate cert;
  cert.name = "lambda_f";
  cert.psi = psi_label;
  cert.relation = BoundRelation::Lower;
  cert.value = lambda / (1.0 + sigma_bar * d / v0);
  cert.certified = true;
  if (psi_label == "ones") cert.note = "constant-test-function form";
  return cert;
}

BoundCertificate diffusion_beta0(const DiffusionOperator& op, const Eigen::ArrayXd& psi,
                                 const std::string& psi_label) {
  require_positive(psi);
  RatioExtremes ext = ratio_extremes(op.model().num_cells(), psi, [&](int i) {
    return k_lambda_matrix(op, i, true);
  });
  BoundCertificate cert;
  cert.name = "beta0";
  cert.psi = psi_label;
  cert.relation = BoundRelation::Lower;
  cert.value = ext.min;
  cert.certified = true;
  if (!(ext.min > 0.0)) cert.note = "vacuous (fission vanishes against psi somewhere)";
  return cert;
}

std::vector<BoundCertificate> diffusion_theta(const DiffusionOperator& op,
                                              const Eigen::ArrayXd& psi,
                                              const std::string& psi_label) {
  require_positive(psi);
  RatioExtremes ext = ratio_extremes(op.model().num_cells(), psi, [&](int i) {
    return k_lambda_matrix(op, i, false);
  });
  BoundCertificate lower;
  lower.name = "theta_diff_lower";
  lower.psi = psi_label;
  lower.relation = BoundRelation::Lower;
  lower.value = ext.min;
  lower.certified = ext.min > 1.0;
  if (!lower.certified) lower.note = "hypothesis min ratio > 1 not met; value descriptive";

  BoundCertificate upper;
  upper.name = "theta_diff_upper";
  upper.psi = psi_label;
  upper.relation = BoundRelation::Upper;
  upper.value = ext.max;
  upper.certified = ext.max < 1.0;
  upper.note = upper.certified
                   ? "certified under max ratio < 1; a max ratio > 1 hypothesis "
                     "would be inconsistent for an upper bound and is not used"
                   : "hypothesis max ratio < 1 not met; value descriptive";
  return {lower, upper};
}

PaoResult pao_criterion(const DiffusionOperator& op) {
  const ProblemModel& m = op.model();
  const DiffusionData& data = *m.diffusion;
  if (!data.degenerate)
    throw Error("bounds: diffusion estimates need degenerate coefficients D = D0(x) d1(xi)");
  const double lambda0 = op.principal_eigenpair().lambda0;
  const int nx = m.num_cells();
  const int ng = m.num_nodes();
  const Eigen::ArrayXd& u = m.node_weights();

  PaoResult res;
  res.holds = true;
  res.quantitative = std::numeric_limits<double>::infinity();
  for (int i = 0; i < nx; ++i) {
    const auto& ks = m.xs.sigma_s[i];
    const auto& kf = m.xs.sigma_f[i];
    for (int g = 0; g < ng; ++g) {
      const double damping = lambda0 * data.d1[g] + m.xs.sigma(i, g);
      double collision = 0.0;
      for (int k = 0; k < ng; ++k) collision += u[k] * (ks(g, k) + kf(g, k));
      res.quantitative = std::min(res.quantitative, collision / damping);
      if (!(damping < collision) && res.holds) {
        res.holds = false;
        res.fail_cell = i;
        res.fail_group = g;
      }
    }
  }
  return res;
}

double dense_spectral_radius(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw Error("dense_spectral_radius: square matrix required");
  const double top = m.maxCoeff();
  if (!(top > 0.0)) return 0.0;
  const double shift = 1e-12 * top;
  Eigen::MatrixXd shifted = m + shift * Eigen::MatrixXd::Identity(m.rows(), m.cols());
  PowerIterationOptions opts;
  opts.tol = 1e-13;
  opts.max_iterations = 200000;
  PowerIterationResult r = spectral_radius(
      [&](const Field& f) { return Field((shifted * f.matrix()).array()); },
      Field::Ones(m.rows(), 1), opts);
  return r.radius - shift;
}

Eigen::MatrixXd psi_strategy_matrix(const PhaseOperators& ops, bool fission_only,
                                    PsiStrategy strategy) {
  const ProblemModel& m = ops.model();
  const int nx = m.num_cells();
  auto matrix_at = [&](int i) -> Eigen::MatrixXd {
    if (m.kind == ModelKind::Transport)
      return k_tau_matrix(static_cast<const TransportOperator&>(ops), i, fission_only);
    return k_lambda_matrix(static_cast<const DiffusionOperator&>(ops), i, fission_only);
  };
  Eigen::MatrixXd acc = matrix_at(0);
  for (int i = 1; i < nx; ++i) {
    Eigen::MatrixXd next = matrix_at(i);
    switch (strategy) {
      case PsiStrategy::MinMatrixPerron: acc = acc.cwiseMin(next); break;
      case PsiStrategy::MaxMatrixPerron: acc = acc.cwiseMax(next); break;
      default: acc += next; break;
    }
  }
  if (strategy == PsiStrategy::MeanMatrixPerron) acc /= nx;
  return acc;
}

Eigen::ArrayXd optimize_psi(const PhaseOperators& ops, bool fission_only,
                            PsiStrategy strategy) {
  const int nn = ops.model().num_nodes();
  if (strategy == PsiStrategy::Ones) return Eigen::ArrayXd::Ones(nn);

  Eigen::MatrixXd combined = psi_strategy_matrix(ops, fission_only, strategy);
  const double top = combined.maxCoeff();
  if (!(top > 0.0)) return Eigen::ArrayXd::Ones(nn);

  const double shift = 1e-12 * top;
  Eigen::MatrixXd shifted =
      combined + shift * Eigen::MatrixXd::Identity(nn, nn);
  PowerIterationOptions opts;
  opts.tol = 1e-13;
  opts.max_iterations = 200000;
  PowerIterationResult r = spectral_radius(
      [&](const Field& f) { return Field((shifted * f.matrix()).array()); },
      Field::Ones(nn, 1), opts);
  Eigen::ArrayXd psi = r.vec.col(0);
  psi /= psi.maxCoeff();
  // Keep psi strictly positive even when the combined matrix is reducible.
  return psi.cwiseMax(1e-12);
}

BoundsReport evaluate_all_bounds(const PhaseOperators& ops,
                                 const std::vector<PsiStrategy>& strategies) {
  const ProblemModel& m = ops.model();
  BoundsReport report;
  report.constants.diameter = m.geometry.width;
  report.constants.sigma_bar = m.xs.sigma.maxCoeff();

  if (m.kind == ModelKind::Transport) {
    const auto& top = static_cast<const TransportOperator&>(ops);
    report.constants.v0 = m.velocity.v_min;
    for (PsiStrategy s : strategies) {
      const std::string label = to_string(s);
      Eigen::ArrayXd psi_full = optimize_psi(ops, false, s);
      Eigen::ArrayXd psi_fission = optimize_psi(ops, true, s);
      report.entries.push_back(theta_upper(top, psi_full, label));
      report.entries.push_back(theta_lower(top, psi_full, label));
      report.entries.push_back(beta_f_lower(top, psi_fission, label));
      report.entries.push_back(lambda_f_bound(top, psi_fission, label));
    }
  } else {
    const auto& dop = static_cast<const DiffusionOperator&>(ops);
    report.constants.lambda0 = dop.principal_eigenpair().lambda0;
    for (PsiStrategy s : strategies) {
      const std::string label = to_string(s);
      Eigen::ArrayXd psi_full = optimize_psi(ops, false, s);
      Eigen::ArrayXd psi_fission = optimize_psi(ops, true, s);
      for (auto& cert : diffusion_theta(dop, psi_full, label))
        report.entries.push_back(std::move(cert));
      report.entries.push_back(diffusion_beta0(dop, psi_fission, label));
    }
    PaoResult pao = pao_criterion(dop);
    BoundCertificate cert;
    cert.name = "pao";
    cert.psi = "none";
    cert.relation = BoundRelation::Lower;
    cert.value = pao.quantitative;
    cert.certified = pao.holds;
    cert.note = pao.holds
                    ? "strict inequality everywhere; certifies k_eff >= value >= 1 "
                      "(the source prose says non-super-critical, its displayed "
                      "conclusion is the one used)"
                    : "inequality fails at cell " + std::to_string(pao.fail_cell) +
                          ", group " + std::to_string(pao.fail_group);
    report.entries.push_back(std::move(cert));
  }
  return report;
}

int count_certificate_violations(const BoundsReport& report, double k_eff,
                                 double rel_slack) {
  int violations = 0;
  const double slack = rel_slack * k_eff;
  for (const auto& e : report.entries) {
    if (!e.certified) continue;
    if (e.relation == BoundRelation::Lower && e.value > k_eff + slack) ++violations;
    if (e.relation == BoundRelation::Upper && e.value < k_eff - slack) ++violations;
  }
  return violations;
}

}  // namespace keff
