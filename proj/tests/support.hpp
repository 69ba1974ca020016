#ifndef KEFF_TESTS_SUPPORT_HPP
#define KEFF_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <random>
#include <string>

#include <json.hpp>

#include "keff/operators.hpp"
#include "keff/problem.hpp"
#include "keff/solver.hpp"

namespace testsupport {

using nlohmann::json;

inline keff::ProblemModel build(const json& cfg) {
  return keff::build_problem(cfg.dump());
}

/// Owns a model together with the operators viewing it, so the pair can be
/// returned from helpers and moved without the operators dangling.
struct System {
  std::unique_ptr<keff::ProblemModel> model;
  std::unique_ptr<keff::PhaseOperators> ops;
};

inline System make_system(const json& cfg) {
  System s;
  s.model = std::make_unique<keff::ProblemModel>(build(cfg));
  s.ops = keff::make_operators(*s.model);
  return s;
}

/// One-group slab on (0, pi) with unit diffusion and collision frequency;
/// the k_eff of the continuum problem is sigma_f / (1 + sigma - sigma_s).
inline json closed_form_diffusion(int cells, double sigma_s, double sigma_f) {
  return json{
      {"kind", "diffusion"},
      {"geometry", {{"width", std::numbers::pi}, {"cells", cells}}},
      {"energy", {{"xi_min", 0.5}, {"xi_max", 1.5}, {"groups", 1}}},
      {"sigma", 1.0},
      {"sigma_s", sigma_s},
      {"sigma_f", sigma_f},
      {"diffusion", {{"d0", 1.0}, {"d1", 1.0}}},
      {"p_norm", 2.0},
  };
}

/// Smallest eigenvalue of the 3-point Dirichlet Laplacian on (0, L),
/// (2/dx^2)(1 - cos(pi dx / L)) in the cancellation-free half-angle form.
inline double discrete_lambda0(double L, int cells) {
  const double dx = L / cells;
  const double s = std::sin(0.5 * std::numbers::pi / cells);
  return 4.0 / (dx * dx) * s * s;
}

/// k_eff of the constant one-group diffusion problem on the given grid.
inline double discrete_closed_form_k(double L, int cells, double sigma,
                                     double sigma_s, double sigma_f) {
  return sigma_f / (discrete_lambda0(L, cells) + sigma - sigma_s);
}

/// Heterogeneous transport slab with full tabulated kernels.  Scattering row
/// sums stay below 0.3 so the scattering loop is far from critical.
inline json random_transport_config(std::uint64_t seed, int cells = 12,
                                    int per_sign = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int nn = 2 * per_sign;
  json cfg;
  cfg["kind"] = "transport";
  cfg["geometry"] = {{"width", 1.5 + u(rng)}, {"cells", cells}};
  const double v_min = 0.3 + 0.2 * u(rng);
  const double v_max = v_min + 0.8 + 0.4 * u(rng);
  cfg["velocity"] = {
      {"v_min", v_min}, {"v_max", v_max}, {"nodes_per_sign", per_sign}};
  json sigma = json::array();
  for (int i = 0; i < cells; ++i) sigma.push_back(0.9 + 0.6 * u(rng));
  cfg["sigma"] = sigma;
  const double w_total = 2.0 * (v_max - v_min);
  json ks = json::array();
  json kf = json::array();
  for (int i = 0; i < cells; ++i) {
    json ks_cell = json::array();
    json kf_cell = json::array();
    for (int a = 0; a < nn; ++a) {
      json ks_row = json::array();
      json kf_row = json::array();
      for (int b = 0; b < nn; ++b) {
        ks_row.push_back((0.05 + 0.25 * u(rng)) / w_total);
        kf_row.push_back((0.2 + 0.6 * u(rng)) / w_total);
      }
      ks_cell.push_back(ks_row);
      kf_cell.push_back(kf_row);
    }
    ks.push_back(ks_cell);
    kf.push_back(kf_cell);
  }
  cfg["sigma_s"] = ks;
  cfg["sigma_f"] = kf;
  cfg["p_norm"] = 2.0;
  return cfg;
}

/// Heterogeneous multigroup diffusion slab with degenerate coefficients.
inline json random_diffusion_config(std::uint64_t seed, int cells = 24,
                                    int groups = 2) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  json cfg;
  cfg["kind"] = "diffusion";
  cfg["geometry"] = {{"width", 2.0 + u(rng)}, {"cells", cells}};
  const double xi_min = 0.4 + 0.2 * u(rng);
  const double xi_span = 1.0 + u(rng);
  cfg["energy"] = {
      {"xi_min", xi_min}, {"xi_max", xi_min + xi_span}, {"groups", groups}};
  json sigma = json::array();
  json d0 = json::array();
  for (int i = 0; i < cells; ++i) {
    json row = json::array();
    for (int g = 0; g < groups; ++g) row.push_back(0.9 + 0.6 * u(rng));
    sigma.push_back(row);
    d0.push_back(0.6 + 0.8 * u(rng));
  }
  json d1 = json::array();
  for (int g = 0; g < groups; ++g) d1.push_back(0.6 + 0.8 * u(rng));
  cfg["sigma"] = sigma;
  cfg["diffusion"] = {{"d0", d0}, {"d1", d1}};
  json ks = json::array();
  json kf = json::array();
  for (int i = 0; i < cells; ++i) {
    json ks_cell = json::array();
    json kf_cell = json::array();
    for (int a = 0; a < groups; ++a) {
      json ks_row = json::array();
      json kf_row = json::array();
      for (int b = 0; b < groups; ++b) {
        ks_row.push_back((0.05 + 0.25 * u(rng)) / xi_span);
        kf_row.push_back((0.2 + 0.6 * u(rng)) / xi_span);
      }
      ks_cell.push_back(ks_row);
      kf_cell.push_back(kf_row);
    }
    ks.push_back(ks_cell);
    kf.push_back(kf_cell);
  }
  cfg["sigma_s"] = ks;
  cfg["sigma_f"] = kf;
  cfg["p_norm"] = 2.0;
  return cfg;
}

inline void scale_numbers(json& j, double s) {
  if (j.is_number()) {
    j = j.get<double>() * s;
  } else if (j.is_array()) {
    for (auto& e : j) scale_numbers(e, s);
  } else if (j.is_object()) {
    for (auto& [key, value] : j.items()) scale_numbers(value, s);
  }
}

inline double solve_k(const json& cfg) {
  const keff::ProblemModel model = build(cfg);
  const auto ops = keff::make_operators(model);
  return keff::solve_keff_rootfind(*ops).k_eff;
}

/// Rescales sigma_f so the problem's k_eff lands on the target (exact by
/// positive homogeneity of the fission kernel).
inline json tuned_config(json cfg, double target_k) {
  scale_numbers(cfg["sigma_f"], target_k / solve_k(cfg));
  return cfg;
}

/// Angle between two fields viewed as Euclidean vectors, robust near zero.
inline double angle_between(const keff::Field& a, const keff::Field& b) {
  const double na = std::sqrt((a * a).sum());
  const double nb = std::sqrt((b * b).sum());
  const double cosine = (a * b).sum() / (na * nb);
  const keff::Field resid = a / na - cosine * (b / nb);
  const double sine = std::sqrt((resid * resid).sum());
  return std::atan2(sine, std::min(1.0, std::abs(cosine)));
}

}  // namespace testsupport

#endif
