#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

namespace keff::tools {

json extended_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::string problem_digest(const std::string& config_text) {
  const std::string canonical = json::parse(config_text).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json meta_section(const std::string& command, const std::string& digest,
                  std::uint64_t seed) {
  return {
      {"tool", "keff"},
      {"version", kVersion},
      {"command", command},
      {"problem_digest", digest},
      {"seed", seed},
      {"timing_seconds", 0.0},
      {"conventions",
       {
           {"gamma_min_probe", 1e-6},
           {"critical_band", kCriticalBand},
           {"face_diffusion_average", "arithmetic"},
           {"multigroup_measure", "unit weight per direction node"},
           {"diffusion_p_norm", 2.0},
           {"bounds_stay_time", "outflow-face"},
           {"power_gap", "relative"},
       }},
  };
}

json existence_section(const ExistenceCheck& check) {
  return {
      {"exists", check.exists},
      {"scattering_radius", check.scattering_radius},
      {"scattering_ok", check.scattering_ok},
      {"probe_gamma", check.probe_gamma},
      {"radius_at_probe", check.radius_at_probe},
      {"fission_ok", check.fission_ok},
      {"violated", check.violated},
  };
}

json solution_section(const CriticalitySolution& sol) {
  return {
      {"k_eff", sol.k_eff},
      {"classification", to_string(sol.classification)},
      {"method", sol.method == SolveMethod::RootFind ? "rootfind" : "direct"},
      {"residual", sol.residual},
      {"radius_gap", sol.radius_gap},
      {"outer_iterations", sol.outer_iterations},
      {"operator_applications", sol.operator_applications},
  };
}

json bounds_section(const BoundsReport& report, int violations) {
  json entries = json::array();
  for (const BoundCertificate& b : report.entries)
    entries.push_back({
        {"name", b.name},
        {"psi", b.psi},
        {"relation", b.relation == BoundRelation::Lower ? "lower" : "upper"},
        {"value", extended_real(b.value)},
        {"certified", b.certified},
        {"note", b.note},
    });
  json constants = {
      {"diameter", report.constants.diameter},
      {"sigma_bar", report.constants.sigma_bar},
  };
  if (report.constants.v0 > 0.0) constants["v0"] = report.constants.v0;
  if (report.constants.lambda0 > 0.0) constants["lambda0"] = report.constants.lambda0;
  return {{"constants", constants},
          {"entries", entries},
          {"certificate_violations", violations}};
}

json sandwich_section(const SandwichSummary& summary) {
  json samples = json::array();
  for (const SandwichSample& s : summary.detail)
    samples.push_back({
        {"seed", s.seed},
        {"tau_plus", extended_real(s.tau_plus)},
        {"tau_minus", extended_real(s.tau_minus)},
        {"violation", s.violation},
    });
  return {
      {"samples", summary.samples},
      {"violations", summary.violations},
      {"violating_seeds", summary.violating_seeds},
      {"best_lower", extended_real(summary.best_lower)},
      {"best_upper", extended_real(summary.best_upper)},
      {"ratio_spread_at_phi_eff", summary.ratio_spread_at_phi_eff},
      {"detail", samples},
  };
}

json eigenfunction_section(const EigenfunctionTrace& trace) {
  return {
      {"converged", trace.converged},
      {"iterations", trace.iterations},
      {"gamma_trace", trace.gamma},
      {"error_trace", trace.error},
  };
}

json oracle_section(const OracleResult& oracle, double solver_k, double angle) {
  return {
      {"k_eff_dense", oracle.k_eff},
      {"k_eff_solver", solver_k},
      {"abs_delta", std::abs(oracle.k_eff - solver_k)},
      {"rel_delta", std::abs(oracle.k_eff - solver_k) / solver_k},
      {"eigenvector_angle", angle},
      {"scattering_radius", oracle.scattering_radius},
      {"iterations", oracle.iterations},
  };
}

json irreducibility_section(const IrreducibilityReport& report) {
  json j = {
      {"pass", report.pass},
      {"mode", report.mode},
      {"detail", report.detail},
  };
  if (!report.band.empty()) {
    j["band"] = report.band;
    j["band_lo"] = report.band_lo;
    j["band_hi"] = report.band_hi;
  }
  if (report.witness)
    j["witness"] = {{"cell", report.witness->cell},
                    {"node_out", report.witness->node_out},
                    {"node_in", report.witness->node_in}};
  return j;
}

void write_report(const json& report, const std::string& path) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot open output file: " + tmp.string());
    out << report.dump(2) << '\n';
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

void write_csv(const ProblemModel& model, const Field& phi, const std::string& path) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot open output file: " + tmp.string());
    out << "x,node,value\n";
    out.precision(std::numeric_limits<double>::max_digits10);
    const Eigen::ArrayXd& nodes = model.node_values();
    for (int i = 0; i < model.num_cells(); ++i)
      for (int j = 0; j < model.num_nodes(); ++j)
        out << model.geometry.center(i) << ',' << nodes[j] << ',' << phi(i, j)
            << '\n';
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace keff::tools
