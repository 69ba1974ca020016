#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "keff/bounds.hpp"
#include "keff/solver.hpp"
#include "support.hpp"

using testsupport::build;
using testsupport::json;

namespace {

// One cell of width 2 with the symmetric speed pair {-1, +1}: both outflow
// stay times are exactly 2, so the stay-time collision matrix is the kernel
// scaled by 2 / (1 + 2 sigma).
json one_cell_transport() {
  return json{
      {"kind", "transport"},
      {"geometry", {{"width", 2.0}, {"cells", 1}}},
      {"velocity", {{"speeds", {1.0}}}},
      {"sigma", 1.0},
      {"sigma_s", {{{0.10, 0.05}, {0.07, 0.12}}}},
      {"sigma_f", {{{0.20, 0.30}, {0.40, 0.50}}}},
      {"p_norm", 2.0},
  };
}

}  // namespace

TEST_CASE("stay-time collision matrix on a one-cell slab") {
  const keff::ProblemModel m = build(one_cell_transport());
  const keff::TransportOperator op(m);

  CHECK(op.sweep_stay_time(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(op.sweep_stay_time(0, 1) == doctest::Approx(2.0).epsilon(1e-14));

  const Eigen::MatrixXd fission = keff::k_tau_matrix(op, 0, true);
  const double scale = 2.0 / 3.0;
  CHECK(fission(0, 0) == doctest::Approx(scale * 0.20).epsilon(1e-14));
  CHECK(fission(0, 1) == doctest::Approx(scale * 0.30).epsilon(1e-14));
  CHECK(fission(1, 0) == doctest::Approx(scale * 0.40).epsilon(1e-14));
  CHECK(fission(1, 1) == doctest::Approx(scale * 0.50).epsilon(1e-14));

  const Eigen::MatrixXd full = keff::k_tau_matrix(op, 0, false);
  CHECK(full(0, 0) == doctest::Approx(scale * 0.30).epsilon(1e-14));
  CHECK(full(1, 1) == doctest::Approx(scale * 0.62).epsilon(1e-14));

  Eigen::ArrayXd psi(2);
  psi << 1.0, 2.0;
  const Eigen::ArrayXd image = keff::k_tau_apply(op, 0, psi, true);
  CHECK(image[0] == doctest::Approx(scale * (0.20 + 2.0 * 0.30)).epsilon(1e-14));
  CHECK(image[1] == doctest::Approx(scale * (0.40 + 2.0 * 0.50)).epsilon(1e-14));
}

TEST_CASE("theta bounds certify exactly when their hypotheses hold") {
  const Eigen::ArrayXd ones = Eigen::ArrayXd::Ones(2);
  const double scale = 2.0 / 3.0;

  SUBCASE("small kernels: only the upper bound certifies") {
    const keff::ProblemModel m = build(one_cell_transport());
    const keff::TransportOperator op(m);
    const keff::BoundCertificate up = keff::theta_upper(op, ones, "ones");
    CHECK(up.certified);
    CHECK(up.relation == keff::BoundRelation::Upper);
    CHECK(up.value == doctest::Approx(scale * (0.47 + 0.62)).epsilon(1e-13));
    CHECK(up.note.empty());

    const keff::BoundCertificate lo = keff::theta_lower(op, ones, "ones");
    CHECK_FALSE(lo.certified);
    CHECK(lo.value == doctest::Approx(scale * (0.30 + 0.35)).epsilon(1e-13));
    CHECK(lo.note.find("not met") != std::string::npos);
  }

  SUBCASE("tripled kernels: only the lower bound certifies") {
    json cfg = one_cell_transport();
    testsupport::scale_numbers(cfg["sigma_s"], 3.0);
    testsupport::scale_numbers(cfg["sigma_f"], 3.0);
    const keff::ProblemModel m = build(cfg);
    const keff::TransportOperator op(m);

    const keff::BoundCertificate lo = keff::theta_lower(op, ones, "ones");
    CHECK(lo.certified);
    CHECK(lo.value == doctest::Approx(3.0 * scale * (0.30 + 0.35)).epsilon(1e-13));

    const keff::BoundCertificate up = keff::theta_upper(op, ones, "ones");
    CHECK_FALSE(up.certified);
    CHECK(up.note.find("not met") != std::string::npos);
  }
}

TEST_CASE("fission floor and undamped bound on the one-cell slab") {
  const keff::ProblemModel m = build(one_cell_transport());
  const keff::TransportOperator op(m);
  const Eigen::ArrayXd ones = Eigen::ArrayXd::Ones(2);

  const keff::BoundCertificate beta = keff::beta_f_lower(op, ones, "ones");
  CHECK(beta.certified);
  CHECK(beta.value == doctest::Approx((2.0 / 3.0) * 0.5).epsilon(1e-13));

  // Uniform sigma and stay time make the undamped form coincide with beta.
  const keff::BoundCertificate lam = keff::lambda_f_bound(op, ones, "ones");
  CHECK(lam.certified);
  CHECK(lam.value == doctest::Approx(2.0 * 0.5 / (1.0 + 1.0 * 2.0 / 1.0)).epsilon(1e-13));
  CHECK(lam.note == "constant-test-function form");

  const auto ops = keff::make_operators(m);
  const double k = keff::solve_keff_rootfind(*ops).k_eff;
  CHECK(beta.value <= k * (1.0 + 1e-10));
  CHECK(lam.value <= k * (1.0 + 1e-10));
}

TEST_CASE("bound evaluators reject non-positive test functions") {
  const keff::ProblemModel m = build(one_cell_transport());
  const keff::TransportOperator op(m);
  Eigen::ArrayXd psi(2);
  psi << 1.0, 0.0;
  CHECK_THROWS_WITH_AS(keff::theta_upper(op, psi, "x"),
                       doctest::Contains("strictly positive"), keff::Error);
  CHECK_THROWS_WITH_AS(keff::k_tau_apply(op, 0, psi, true),
                       doctest::Contains("strictly positive"), keff::Error);
}

TEST_CASE("bound values are invariant under scaling of psi") {
  const keff::ProblemModel m = build(testsupport::random_transport_config(91, 8, 2));
  const keff::TransportOperator op(m);
  Eigen::ArrayXd psi(m.num_nodes());
  for (int j = 0; j < psi.size(); ++j) psi[j] = 1.0 + 0.1 * j;

  const double theta = keff::theta_upper(op, psi, "x").value;
  const double beta = keff::beta_f_lower(op, psi, "x").value;
  const double lam = keff::lambda_f_bound(op, psi, "x").value;
  const Eigen::ArrayXd scaled = 7.0 * psi;
  CHECK(keff::theta_upper(op, scaled, "x").value == doctest::Approx(theta).epsilon(1e-12));
  CHECK(keff::beta_f_lower(op, scaled, "x").value == doctest::Approx(beta).epsilon(1e-12));
  CHECK(keff::lambda_f_bound(op, scaled, "x").value == doctest::Approx(lam).epsilon(1e-12));
}

TEST_CASE("outflow stay times are bounded by the traversal time") {
  for (std::uint64_t seed : {93, 94}) {
    const keff::ProblemModel m =
        build(testsupport::random_transport_config(seed, 10, 3));
    const keff::TransportOperator op(m);
    const double cap = m.geometry.width / m.velocity.v_min;
    for (int i = 0; i < m.num_cells(); ++i)
      for (int j = 0; j < m.num_nodes(); ++j) {
        CHECK(op.sweep_stay_time(i, j) <= cap * (1.0 + 1e-12));
        CHECK(op.stay_time_at(i, j) < op.sweep_stay_time(i, j));
      }
  }
}

TEST_CASE("strategy matrices are ordered entrywise") {
  const keff::ProblemModel m = build(testsupport::random_transport_config(95, 10, 2));
  const auto ops = keff::make_operators(m);
  const Eigen::MatrixXd lo =
      keff::psi_strategy_matrix(*ops, false, keff::PsiStrategy::MinMatrixPerron);
  const Eigen::MatrixXd mid =
      keff::psi_strategy_matrix(*ops, false, keff::PsiStrategy::MeanMatrixPerron);
  const Eigen::MatrixXd hi =
      keff::psi_strategy_matrix(*ops, false, keff::PsiStrategy::MaxMatrixPerron);
  CHECK(((mid - lo).minCoeff() >= -1e-15));
  CHECK(((hi - mid).minCoeff() >= -1e-15));
}

TEST_CASE("the min-matrix Perron vector pushes the fission floor to its radius") {
  const keff::ProblemModel m = build(testsupport::random_transport_config(97, 10, 2));
  const auto ops = keff::make_operators(m);
  const Eigen::MatrixXd combined =
      keff::psi_strategy_matrix(*ops, true, keff::PsiStrategy::MinMatrixPerron);
  const double radius = keff::dense_spectral_radius(combined);
  const Eigen::ArrayXd psi =
      keff::optimize_psi(*ops, true, keff::PsiStrategy::MinMatrixPerron);
  const keff::TransportOperator op(m);
  const double beta = keff::beta_f_lower(op, psi, "min-matrix-perron").value;
  CHECK(beta >= radius - 1e-9 * std::max(1.0, radius));
}

TEST_CASE("dense spectral radius handles periodic and degenerate inputs") {
  Eigen::MatrixXd swap(2, 2);
  swap << 0.0, 1.0, 1.0, 0.0;
  CHECK(keff::dense_spectral_radius(swap) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(keff::dense_spectral_radius(Eigen::MatrixXd::Zero(3, 3)) == 0.0);
  CHECK_THROWS_WITH_AS(keff::dense_spectral_radius(Eigen::MatrixXd::Zero(2, 3)),
                       doctest::Contains("square"), keff::Error);
}

TEST_CASE("strategy labels") {
  CHECK(std::string(keff::to_string(keff::PsiStrategy::Ones)) == "ones");
  CHECK(std::string(keff::to_string(keff::PsiStrategy::MinMatrixPerron)) ==
        "min-matrix-perron");
  CHECK(std::string(keff::to_string(keff::PsiStrategy::MaxMatrixPerron)) ==
        "max-matrix-perron");
  CHECK(std::string(keff::to_string(keff::PsiStrategy::MeanMatrixPerron)) ==
        "mean-matrix-perron");
}

TEST_CASE("damped diffusion matrix and floor on the closed-form slab") {
  const keff::ProblemModel m =
      build(testsupport::closed_form_diffusion(400, 0.3, 2.5));
  const keff::DiffusionOperator op(m);
  const double lambda = op.principal_eigenpair().lambda0;

  const Eigen::MatrixXd fission = keff::k_lambda_matrix(op, 0, true);
  CHECK(fission(0, 0) == doctest::Approx(2.5 / (lambda + 1.0)).epsilon(1e-12));

  const Eigen::ArrayXd ones = Eigen::ArrayXd::Ones(1);
  const keff::BoundCertificate beta = keff::diffusion_beta0(op, ones, "ones");
  CHECK(beta.certified);
  CHECK(beta.value == doctest::Approx(2.5 / (lambda + 1.0)).epsilon(1e-12));
  CHECK(std::abs(beta.value - 1.25) <= 1e-3);
}

TEST_CASE("damped diffusion theta pair certification") {
  const Eigen::ArrayXd ones = Eigen::ArrayXd::Ones(1);

  SUBCASE("supercritical: lower certifies") {
    const keff::ProblemModel m =
        build(testsupport::closed_form_diffusion(100, 0.3, 2.5));
    const keff::DiffusionOperator op(m);
    const auto pair = keff::diffusion_theta(op, ones, "ones");
    REQUIRE(pair.size() == 2);
    const double lambda = op.principal_eigenpair().lambda0;
    CHECK(pair[0].name == "theta_diff_lower");
    CHECK(pair[0].certified);
    CHECK(pair[0].value == doctest::Approx(2.8 / (lambda + 1.0)).epsilon(1e-12));
    CHECK(pair[1].name == "theta_diff_upper");
    CHECK_FALSE(pair[1].certified);
    CHECK(pair[1].note.find("not met") != std::string::npos);
  }

  SUBCASE("subcritical: upper certifies with the inconsistency note") {
    const keff::ProblemModel m =
        build(testsupport::closed_form_diffusion(100, 0.3, 1.4));
    const keff::DiffusionOperator op(m);
    const auto pair = keff::diffusion_theta(op, ones, "ones");
    CHECK_FALSE(pair[0].certified);
    CHECK(pair[1].certified);
    CHECK(pair[1].note.find("inconsistent") != std::string::npos);
    const auto ops = keff::make_operators(m);
    const double k = keff::solve_keff_rootfind(*ops).k_eff;
    CHECK(pair[1].value >= k * (1.0 - 1e-10));
  }
}

TEST_CASE("pao criterion") {
  SUBCASE("holds on the supercritical closed form") {
    const keff::ProblemModel m =
        build(testsupport::closed_form_diffusion(100, 0.3, 2.5));
    const keff::DiffusionOperator op(m);
    const keff::PaoResult pao = keff::pao_criterion(op);
    const double lambda = op.principal_eigenpair().lambda0;
    CHECK(pao.holds);
    CHECK(pao.quantitative == doctest::Approx(2.8 / (lambda + 1.0)).epsilon(1e-12));
    CHECK(pao.quantitative >= 1.0);
    const auto ops = keff::make_operators(m);
    CHECK(keff::solve_keff_rootfind(*ops).k_eff >= pao.quantitative - 1e-10);
  }

  SUBCASE("fails on the subcritical closed form") {
    const keff::ProblemModel m =
        build(testsupport::closed_form_diffusion(100, 0.3, 1.4));
    const keff::DiffusionOperator op(m);
    const keff::PaoResult pao = keff::pao_criterion(op);
    CHECK_FALSE(pao.holds);
    CHECK(pao.fail_cell == 0);
    CHECK(pao.fail_group == 0);
  }

  SUBCASE("names the first cell where the inequality breaks") {
    json cfg = testsupport::closed_form_diffusion(4, 0.3, 2.5);
    cfg["sigma"] = {1.0, 1.0, 5.0, 1.0};
    const keff::ProblemModel m = build(cfg);
    const keff::DiffusionOperator op(m);
    const keff::PaoResult pao = keff::pao_criterion(op);
    CHECK_FALSE(pao.holds);
    CHECK(pao.fail_cell == 2);
    CHECK(pao.fail_group == 0);
  }
}

TEST_CASE("diffusion bounds require degenerate coefficients") {
  json cfg = testsupport::closed_form_diffusion(4, 0.3, 1.4);
  cfg["diffusion"] = {{"table", {{1.0}, {1.1}, {1.2}, {1.3}}}};
  const keff::ProblemModel m = build(cfg);
  const keff::DiffusionOperator op(m);
  CHECK_THROWS_WITH_AS(keff::k_lambda_matrix(op, 0, true),
                       doctest::Contains("degenerate"), keff::Error);
  CHECK_THROWS_WITH_AS(keff::pao_criterion(op), doctest::Contains("degenerate"),
                       keff::Error);
}

TEST_CASE("report constants describe the model") {
  SUBCASE("transport") {
    const keff::ProblemModel m = build(testsupport::random_transport_config(99, 8, 2));
    const auto ops = keff::make_operators(m);
    const keff::BoundsReport rep =
        keff::evaluate_all_bounds(*ops, {keff::PsiStrategy::Ones});
    CHECK(rep.constants.diameter == m.geometry.width);
    CHECK(rep.constants.v0 == m.velocity.v_min);
    CHECK(rep.constants.sigma_bar == m.xs.sigma.maxCoeff());
    CHECK(rep.entries.size() == 4);
  }
  SUBCASE("diffusion") {
    const keff::ProblemModel m = build(testsupport::closed_form_diffusion(50, 0.3, 1.4));
    const auto ops = keff::make_operators(m);
    const keff::BoundsReport rep =
        keff::evaluate_all_bounds(*ops, {keff::PsiStrategy::Ones});
    const keff::DiffusionOperator op(m);
    CHECK(rep.constants.lambda0 ==
          doctest::Approx(op.principal_eigenpair().lambda0).epsilon(1e-14));
    CHECK(rep.entries.size() == 4);
    CHECK(rep.entries.back().name == "pao");
  }
}

TEST_CASE("violation counting respects certification and slack") {
  keff::BoundsReport rep;
  keff::BoundCertificate lower;
  lower.relation = keff::BoundRelation::Lower;
  lower.value = 1.5;
  lower.certified = true;
  rep.entries.push_back(lower);

  keff::BoundCertificate ignored = lower;
  ignored.certified = false;
  rep.entries.push_back(ignored);

  keff::BoundCertificate upper;
  upper.relation = keff::BoundRelation::Upper;
  upper.value = 0.5;
  upper.certified = true;
  rep.entries.push_back(upper);

  CHECK(keff::count_certificate_violations(rep, 1.0) == 2);
  CHECK(keff::count_certificate_violations(rep, 1.5) == 1);
  CHECK(keff::count_certificate_violations(rep, 1.5 - 1e-11 * 1.5) == 1);
  CHECK(keff::count_certificate_violations(rep, 0.5) == 1);
}

TEST_CASE("certified bounds never contradict the solver on seeded problems") {
  const std::vector<keff::PsiStrategy> all = {
      keff::PsiStrategy::Ones, keff::PsiStrategy::MinMatrixPerron,
      keff::PsiStrategy::MaxMatrixPerron, keff::PsiStrategy::MeanMatrixPerron};
  for (std::uint64_t seed : {301, 302, 303}) {
    const auto sys =
        testsupport::make_system(testsupport::random_transport_config(seed, 8, 2));
    const double k = keff::solve_keff_rootfind(*sys.ops).k_eff;
    const keff::BoundsReport rep = keff::evaluate_all_bounds(*sys.ops, all);
    CHECK(keff::count_certificate_violations(rep, k) == 0);
  }
  for (std::uint64_t seed : {401, 402}) {
    const auto sys =
        testsupport::make_system(testsupport::random_diffusion_config(seed, 16, 2));
    const double k = keff::solve_keff_rootfind(*sys.ops).k_eff;
    const keff::BoundsReport rep = keff::evaluate_all_bounds(*sys.ops, all);
    CHECK(keff::count_certificate_violations(rep, k) == 0);
  }
}
