#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitExistenceFailure = 2;
constexpr int kExitBoundContradiction = 3;
constexpr int kExitInvariantViolation = 4;

struct Arguments {
  std::string problem;
  std::string out;
  std::string csv;
  std::string method = "rootfind";
  std::string psi = "all";
  double tol = 1e-10;
  int samples = 100;
  std::uint64_t seed = 42;
  bool inject_keff_error = false;
};

using Clock = std::chrono::steady_clock;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw keff::Error("cannot read problem file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

keff::tools::json base_report(const std::string& command, const std::string& digest,
                              std::uint64_t seed) {
  keff::tools::json report;
  report["meta"] = keff::tools::meta_section(command, digest, seed);
  report["existence"] = nullptr;
  report["solution"] = nullptr;
  report["variational"] = nullptr;
  report["bounds"] = nullptr;
  report["oracle"] = nullptr;
  return report;
}

int emit(keff::tools::json& report, Clock::time_point t0, const std::string& out,
         int code) {
  report["meta"]["timing_seconds"] =
      std::chrono::duration<double>(Clock::now() - t0).count();
  if (out.empty())
    std::cout << report.dump(2) << '\n';
  else
    keff::tools::write_report(report, out);
  return code;
}

Eigen::VectorXd flatten_cell_major(const keff::Field& phi) {
  Eigen::VectorXd v(phi.size());
  for (Eigen::Index i = 0; i < phi.rows(); ++i)
    for (Eigen::Index j = 0; j < phi.cols(); ++j)
      v[i * phi.cols() + j] = phi(i, j);
  return v;
}

std::vector<keff::PsiStrategy> parse_strategies(const std::string& psi) {
  using keff::PsiStrategy;
  if (psi == "ones") return {PsiStrategy::Ones};
  if (psi == "min-perron") return {PsiStrategy::MinMatrixPerron};
  if (psi == "max-perron") return {PsiStrategy::MaxMatrixPerron};
  if (psi == "mean-perron") return {PsiStrategy::MeanMatrixPerron};
  return {PsiStrategy::Ones, PsiStrategy::MinMatrixPerron,
          PsiStrategy::MaxMatrixPerron, PsiStrategy::MeanMatrixPerron};
}

int cmd_solve(const Arguments& args) {
  const auto t0 = Clock::now();
  const std::string text = read_text_file(args.problem);
  const keff::ProblemModel model = keff::build_problem(text);
  const auto ops = keff::make_operators(model);
  keff::tools::json report =
      base_report("solve", keff::tools::problem_digest(text), 0);

  keff::SolverOptions opts;
  opts.tolerance = args.tol;

  const keff::ExistenceCheck existence = keff::check_existence(*ops, opts);
  report["existence"] = keff::tools::existence_section(existence);
  report["existence"]["fission_pattern"] =
      keff::tools::irreducibility_section(keff::validate_irreducibility(model));
  if (!existence.exists) {
    std::cerr << "existence conditions failed: " << existence.violated << '\n';
    return emit(report, t0, args.out, kExitExistenceFailure);
  }

  std::optional<keff::CriticalitySolution> root;
  std::optional<keff::CriticalitySolution> direct;
  if (args.method == "rootfind" || args.method == "both")
    root = keff::solve_keff_rootfind(*ops, opts);
  if (args.method == "direct" || args.method == "both")
    direct = keff::solve_keff_direct(*ops, opts);
  const keff::CriticalitySolution& primary = root ? *root : *direct;

  keff::tools::json sol = keff::tools::solution_section(primary);
  if (root && direct) {
    sol["direct"] = keff::tools::solution_section(*direct);
    sol["method_agreement_rel"] =
        std::abs(root->k_eff - direct->k_eff) / root->k_eff;
  }
  report["solution"] = sol;

  const keff::ExtendedTau lo = keff::tau_plus(*ops, primary.phi_eff.values);
  const keff::ExtendedTau hi = keff::tau_minus(*ops, primary.phi_eff.values);
  const keff::Field ratios = keff::ratio_field(*ops, primary.phi_eff.values);
  report["variational"] = {
      {"tau_plus_at_phi_eff", keff::tools::extended_real(lo.value)},
      {"tau_minus_at_phi_eff", keff::tools::extended_real(hi.value)},
      {"ratio_spread_at_phi_eff", ratios.maxCoeff() - ratios.minCoeff()},
  };

  if (!args.csv.empty())
    keff::tools::write_csv(model, primary.phi_eff.values, args.csv);
  if (!args.out.empty())
    std::cout << "k_eff = " << primary.k_eff << " ("
              << keff::to_string(primary.classification) << ")\n";
  return emit(report, t0, args.out, kExitOk);
}

int cmd_bounds(const Arguments& args) {
  const auto t0 = Clock::now();
  const std::string text = read_text_file(args.problem);
  const keff::ProblemModel model = keff::build_problem(text);
  const auto ops = keff::make_operators(model);
  keff::tools::json report =
      base_report("bounds", keff::tools::problem_digest(text), 0);

  const keff::ExistenceCheck existence = keff::check_existence(*ops);
  report["existence"] = keff::tools::existence_section(existence);
  if (!existence.exists) {
    std::cerr << "existence conditions failed: " << existence.violated << '\n';
    return emit(report, t0, args.out, kExitExistenceFailure);
  }

  const keff::CriticalitySolution solution = keff::solve_keff_rootfind(*ops);
  report["solution"] = keff::tools::solution_section(solution);

  const keff::BoundsReport bounds =
      keff::evaluate_all_bounds(*ops, parse_strategies(args.psi));
  const int violations =
      keff::count_certificate_violations(bounds, solution.k_eff);
  report["bounds"] = keff::tools::bounds_section(bounds, violations);

  if (violations > 0) {
    std::cerr << violations
              << " certified bound(s) contradict the solver k_eff\n";
    return emit(report, t0, args.out, kExitBoundContradiction);
  }
  if (!args.out.empty())
    std::cout << bounds.entries.size() << " bound(s) evaluated, all certificates consistent with k_eff = "
              << solution.k_eff << '\n';
  return emit(report, t0, args.out, kExitOk);
}

int cmd_verify(const Arguments& args) {
  const auto t0 = Clock::now();
  const std::string text = read_text_file(args.problem);
  const keff::ProblemModel model = keff::build_problem(text);
  const auto ops = keff::make_operators(model);
  keff::tools::json report =
      base_report("verify", keff::tools::problem_digest(text), args.seed);

  const keff::ExistenceCheck existence = keff::check_existence(*ops);
  report["existence"] = keff::tools::existence_section(existence);
  if (!existence.exists) {
    std::cerr << "existence conditions failed: " << existence.violated << '\n';
    return emit(report, t0, args.out, kExitExistenceFailure);
  }

  const keff::CriticalitySolution solution = keff::solve_keff_rootfind(*ops);
  report["solution"] = keff::tools::solution_section(solution);

  double k_checked = solution.k_eff;
  if (args.inject_keff_error) k_checked *= 1.01;

  const keff::SandwichSummary sandwich = keff::sandwich_verify(
      *ops, k_checked, solution.phi_eff.values, args.samples, args.seed);
  const keff::EigenfunctionTrace trace =
      keff::approximate_eigenfunction(*ops, solution, 200, 1e-10);

  const keff::ExtendedTau lo = keff::tau_plus(*ops, solution.phi_eff.values);
  const keff::ExtendedTau hi = keff::tau_minus(*ops, solution.phi_eff.values);
  const double fp_tol = 1e-8 * k_checked;
  const bool fixed_point_ok = std::isfinite(lo.value) &&
                              std::isfinite(hi.value) &&
                              std::abs(lo.value - k_checked) <= fp_tol &&
                              std::abs(hi.value - k_checked) <= fp_tol;

  report["variational"] = {
      {"sandwich", keff::tools::sandwich_section(sandwich)},
      {"eigenfunction", keff::tools::eigenfunction_section(trace)},
      {"fixed_point",
       {
           {"k_checked", k_checked},
           {"tau_plus_at_phi_eff", keff::tools::extended_real(lo.value)},
           {"tau_minus_at_phi_eff", keff::tools::extended_real(hi.value)},
           {"within_tolerance", fixed_point_ok},
       }},
  };

  const bool ok = sandwich.violations == 0 && trace.converged && fixed_point_ok;
  if (!ok)
    std::cerr << "verification failed: " << sandwich.violations
              << " sandwich violation(s), eigenfunction "
              << (trace.converged ? "converged" : "did not converge")
              << ", fixed point "
              << (fixed_point_ok ? "holds" : "violated") << '\n';
  else if (!args.out.empty())
    std::cout << "verified: " << sandwich.samples << " samples, "
              << trace.iterations << " eigenfunction iterations\n";
  return emit(report, t0, args.out, ok ? kExitOk : kExitInvariantViolation);
}

int cmd_oracle_check(const Arguments& args) {
  const auto t0 = Clock::now();
  const std::string text = read_text_file(args.problem);
  const keff::ProblemModel model = keff::build_problem(text);
  const keff::DenseSystem system = keff::assemble_dense(model);
  const auto ops = keff::make_operators(model);
  keff::tools::json report =
      base_report("oracle-check", keff::tools::problem_digest(text), 0);

  const keff::ExistenceCheck existence = keff::check_existence(*ops);
  report["existence"] = keff::tools::existence_section(existence);
  if (!existence.exists) {
    std::cerr << "existence conditions failed: " << existence.violated << '\n';
    return emit(report, t0, args.out, kExitExistenceFailure);
  }

  const keff::CriticalitySolution solution = keff::solve_keff_rootfind(*ops);
  report["solution"] = keff::tools::solution_section(solution);

  const keff::OracleResult oracle = keff::oracle_keff(system);
  Eigen::VectorXd v = flatten_cell_major(solution.phi_eff.values);
  v /= v.norm();
  const double cosine = std::abs(oracle.perron.dot(v));
  const double sine = (v - oracle.perron.dot(v) * oracle.perron).norm();
  const double angle = std::atan2(sine, std::min(1.0, cosine));
  report["oracle"] = keff::tools::oracle_section(oracle, solution.k_eff, angle);

  const double rel = std::abs(oracle.k_eff - solution.k_eff) / solution.k_eff;
  const bool ok = rel <= 1e-10;
  if (!ok)
    std::cerr << "oracle disagreement: relative delta " << rel << '\n';
  else if (!args.out.empty())
    std::cout << "oracle agrees: relative delta " << rel << ", angle " << angle
              << " rad\n";
  return emit(report, t0, args.out, ok ? kExitOk : kExitInvariantViolation);
}

}  // namespace

int main(int argc, char** argv) {
  std::cout.precision(15);
  CLI::App app{
      "k-effective criticality solver for slab transport and diffusion models"};
  app.require_subcommand(1);
  Arguments args;

  CLI::App* solve =
      app.add_subcommand("solve", "Solve for k_eff and the flux phi_eff");
  solve->add_option("--problem", args.problem, "Problem config (JSON)")
      ->required();
  solve->add_option("--method", args.method, "rootfind|direct|both")
      ->check(CLI::IsMember({"rootfind", "direct", "both"}));
  solve->add_option("--tol", args.tol, "Target |R(k)-1| at the root")
      ->check(CLI::PositiveNumber);
  solve->add_option("--out", args.out, "Report path (stdout when omitted)");
  solve->add_option("--csv", args.csv, "Write phi_eff as CSV (x,node,value)");

  CLI::App* bounds =
      app.add_subcommand("bounds", "Evaluate the explicit spectral bounds");
  bounds->add_option("--problem", args.problem, "Problem config (JSON)")
      ->required();
  bounds
      ->add_option("--psi", args.psi,
                   "ones|min-perron|max-perron|mean-perron|all")
      ->check(CLI::IsMember(
          {"ones", "min-perron", "max-perron", "mean-perron", "all"}));
  bounds->add_option("--out", args.out, "Report path (stdout when omitted)");

  CLI::App* verify = app.add_subcommand(
      "verify", "Sandwich sampling and eigenfunction approximation checks");
  verify->add_option("--problem", args.problem, "Problem config (JSON)")
      ->required();
  verify->add_option("--samples", args.samples, "Number of random test functions")
      ->check(CLI::NonNegativeNumber);
  verify->add_option("--seed", args.seed, "Base RNG seed");
  verify->add_option("--out", args.out, "Report path (stdout when omitted)");
  verify->add_flag("--inject-keff-error", args.inject_keff_error)->group("");

  CLI::App* oracle = app.add_subcommand(
      "oracle-check", "Cross-check the solver against the dense oracle");
  oracle->add_option("--problem", args.problem, "Problem config (JSON)")
      ->required();
  oracle->add_option("--out", args.out, "Report path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (solve->parsed()) return cmd_solve(args);
    if (bounds->parsed()) return cmd_bounds(args);
    if (verify->parsed()) return cmd_verify(args);
    if (oracle->parsed()) return cmd_oracle_check(args);
  } catch (const keff::ExistenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitExistenceFailure;
  } catch (const keff::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}
