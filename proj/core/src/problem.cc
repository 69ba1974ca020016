#include "keff/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

namespace keff {

using nlohmann::json;

double ProblemModel::norm_p(const Field& phi) const {
  const double p = effective_p();
  const double dx = geometry.dx();
  const Eigen::ArrayXd& w = node_weights();
  double acc = 0.0;
  for (int i = 0; i < phi.rows(); ++i)
    for (int j = 0; j < phi.cols(); ++j)
      acc += dx * w[j] * std::pow(std::abs(phi(i, j)), p);
  return std::pow(acc, 1.0 / p);
}

void gauss_legendre(int n, double a, double b, Eigen::ArrayXd& nodes,
                    Eigen::ArrayXd& weights) {
  nodes.resize(n);
  weights.resize(n);
  // Newton iteration on P_n over [-1,1], then affine map to [a,b].
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      if (n == 1) p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double pn = (n == 1) ? x : p1;
      double pn1 = (n == 1) ? 1.0 : p0;
      dp = n * (x * pn - pn1) / (x * x - 1.0);
      double step = pn / dp;
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    nodes[n - 1 - i] = 0.5 * (b - a) * x + 0.5 * (a + b);
    weights[n - 1 - i] = (b - a) / ((1.0 - x * x) * dp * dp);
  }
}

void ProblemModel::validate() const {
  const int nx = geometry.cells;
  const int nn = num_nodes();
  if (!(geometry.width > 0.0)) throw Error("geometry: non-positive width");
  if (nx < 1) throw Error("geometry: cell count must be at least 1");

  if (kind == ModelKind::Transport) {
    const int m = static_cast<int>(velocity.nodes.size());
    if (m < 2 || m % 2 != 0)
      throw Error("velocity grid: node count must be even and at least 2");
    if (!(velocity.v_min > 0.0))
      throw Error("velocity grid: velocities must be bounded away from zero (v_min > 0)");
    for (int j = 0; j < m; ++j) {
      const double s = std::abs(velocity.nodes[j]);
      if (s < velocity.v_min - 1e-12 || s > velocity.v_max + 1e-12)
        throw Error("velocity grid: node speed outside [v_min, v_max]");
      if (!(velocity.weights[j] > 0.0))
        throw Error("velocity grid: non-positive quadrature weight");
      // Mirror symmetry: -nodes reversed must reproduce nodes.
      const double mirror = -velocity.nodes[m - 1 - j];
      if (std::abs(mirror - velocity.nodes[j]) > 1e-12 * std::max(1.0, velocity.v_max))
        throw Error("velocity grid: node set is not symmetric under v -> -v");
    }
  } else {
    if (energy.nodes.size() < 1) throw Error("energy grid: no groups");
    if (!(energy.xi_max > energy.xi_min)) throw Error("energy grid: empty interval");
    double wsum = 0.0;
    for (int g = 0; g < energy.nodes.size(); ++g) {
      if (energy.nodes[g] <= energy.xi_min || energy.nodes[g] >= energy.xi_max)
        throw Error("energy grid: node not strictly inside [xi_min, xi_max]");
      if (!(energy.weights[g] > 0.0)) throw Error("energy grid: non-positive weight");
      wsum += energy.weights[g];
    }
    const double width = energy.xi_max - energy.xi_min;
    if (std::abs(wsum - width) > 1e-12 * width)
      throw Error("energy grid: weights do not sum to the interval length");
    if (!diffusion) throw Error("diffusion model: missing diffusion coefficients");
  }

  if (xs.sigma.rows() != nx || xs.sigma.cols() != nn)
    throw Error("sigma: shape mismatch");
  const double smin = xs.sigma.minCoeff();
  if (!(smin > 0.0)) throw Error("sigma lower bound violated: sigma must be >= c > 0");
  if (std::abs(smin - xs.sigma_floor) > 1e-12 * std::max(1.0, smin))
    throw Error("sigma: recorded lower bound does not match data");

  auto check_kernel = [&](const std::vector<Eigen::MatrixXd>& k, const char* name) {
    if (static_cast<int>(k.size()) != nx)
      throw Error(std::string(name) + ": kernel cell count mismatch");
    for (int i = 0; i < nx; ++i) {
      if (k[i].rows() != nn || k[i].cols() != nn)
        throw Error(std::string(name) + ": kernel shape mismatch");
      if (k[i].minCoeff() < 0.0)
        throw Error(std::string(name) + ": negative kernel entry");
    }
  };
  check_kernel(xs.sigma_s, "sigma_s");
  check_kernel(xs.sigma_f, "sigma_f");

  if (diffusion) {
    const DiffusionData& d = *diffusion;
    if (d.degenerate) {
      if (d.d0.size() != nx) throw Error("diffusion d0: shape mismatch");
      if (d.d1.size() != nn) throw Error("diffusion d1: shape mismatch");
      if (!(d.d0.minCoeff() > 0.0) || !(d.d1.minCoeff() > 0.0))
        throw Error("diffusion coefficients must be strictly positive");
    } else {
      if (d.table.rows() != nx || d.table.cols() != nn)
        throw Error("diffusion table: shape mismatch");
      if (!(d.table.minCoeff() > 0.0))
        throw Error("diffusion coefficients must be strictly positive");
    }
  }

  if (!(p_norm >= 1.0) || !std::isfinite(p_norm))
    throw Error("p_norm must be a finite exponent >= 1");
}

namespace {

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("config parse error: ") + e.what());
  }
}

double require_number(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number())
    throw Error(std::string("config: missing or non-numeric field '") + key + "'");
  return j[key].get<double>();
}

int require_int(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw Error(std::string("config: missing or non-integer field '") + key + "'");
  return j[key].get<int>();
}

Eigen::ArrayXd factor_values(const json& j, int n, const char* what) {
  Eigen::ArrayXd out(n);
  if (j.is_number()) {
    out.setConstant(j.get<double>());
  } else if (j.is_array()) {
    if (static_cast<int>(j.size()) != n)
      throw Error(std::string("config: ") + what + " has wrong length");
    for (int i = 0; i < n; ++i) out[i] = j[i].get<double>();
  } else {
    throw Error(std::string("config: ") + what + " must be a number or an array");
  }
  return out;
}

// sigma accepts: number | per-cell array | nested (cells x nodes) table |
// {"separable": [x_factor, node_factor]}.
Eigen::ArrayXXd read_sigma(const json& j, int nx, int nn) {
  Eigen::ArrayXXd out(nx, nn);
  if (j.is_number()) {
    out.setConstant(j.get<double>());
    return out;
  }
  if (j.is_object() && j.contains("separable")) {
    const json& f = j["separable"];
    if (!f.is_array() || f.size() != 2)
      throw Error("config: sigma separable form needs exactly 2 factors");
    Eigen::ArrayXd fx = factor_values(f[0], nx, "sigma x-factor");
    Eigen::ArrayXd fv = factor_values(f[1], nn, "sigma node-factor");
    for (int i = 0; i < nx; ++i)
      for (int k = 0; k < nn; ++k) out(i, k) = fx[i] * fv[k];
    return out;
  }
  if (j.is_array()) {
    if (static_cast<int>(j.size()) != nx) throw Error("config: sigma table has wrong cell count");
    if (j[0].is_number()) {
      for (int i = 0; i < nx; ++i) out.row(i).setConstant(j[i].get<double>());
      return out;
    }
    for (int i = 0; i < nx; ++i) {
      if (static_cast<int>(j[i].size()) != nn)
        throw Error("config: sigma table has wrong node count");
      for (int k = 0; k < nn; ++k) out(i, k) = j[i][k].get<double>();
    }
    return out;
  }
  throw Error("config: sigma must be a number, a table, or a separable form");
}

// Kernels accept: number | per-cell array | nested (cells x nodes x nodes)
// table | {"separable": [x_factor, out_factor, in_factor]}.
std::vector<Eigen::MatrixXd> read_kernel(const json& j, int nx, int nn,
                                         const char* name) {
  std::vector<Eigen::MatrixXd> out(nx, Eigen::MatrixXd(nn, nn));
  if (j.is_number()) {
    for (auto& m : out) m.setConstant(j.get<double>());
    return out;
  }
  if (j.is_object() && j.contains("separable")) {
    const json& f = j["separable"];
    if (!f.is_array() || f.size() != 3)
      throw Error(std::string("config: ") + name + " separable form needs exactly 3 factors");
    Eigen::ArrayXd fx = factor_values(f[0], nx, "kernel x-factor");
    Eigen::ArrayXd fo = factor_values(f[1], nn, "kernel out-factor");
    Eigen::ArrayXd fi = factor_values(f[2], nn, "kernel in-factor");
    for (int i = 0; i < nx; ++i)
      for (int a = 0; a < nn; ++a)
        for (int b = 0; b < nn; ++b) out[i](a, b) = fx[i] * fo[a] * fi[b];
    return out;
  }
  if (j.is_array()) {
    if (static_cast<int>(j.size()) != nx)
      throw Error(std::string("config: ") + name + " table has wrong cell count");
    if (j[0].is_number()) {
      for (int i = 0; i < nx; ++i) out[i].setConstant(j[i].get<double>());
      return out;
    }
    for (int i = 0; i < nx; ++i) {
      if (static_cast<int>(j[i].size()) != nn)
        throw Error(std::string("config: ") + name + " table has wrong out-node count");
      for (int a = 0; a < nn; ++a) {
        if (static_cast<int>(j[i][a].size()) != nn)
          throw Error(std::string("config: ") + name + " table has wrong in-node count");
        for (int b = 0; b < nn; ++b) out[i](a, b) = j[i][a][b].get<double>();
      }
    }
    return out;
  }
  throw Error(std::string("config: ") + name + " must be a number, a table, or a separable form");
}

}  // namespace

ProblemModel build_problem(const std::string& config_json) {
  const json cfg = parse_json(config_json);
  if (!cfg.is_object()) throw Error("config: top level must be an object");

  ProblemModel model;
  const std::string kind = cfg.value("kind", std::string());
  if (kind == "transport")
    model.kind = ModelKind::Transport;
  else if (kind == "diffusion")
    model.kind = ModelKind::Diffusion;
  else
    throw Error("config: kind must be \"transport\" or \"diffusion\"");

  if (!cfg.contains("geometry")) throw Error("config: missing geometry");
  model.geometry.width = require_number(cfg["geometry"], "width");
  model.geometry.cells = require_int(cfg["geometry"], "cells");
  if (!(model.geometry.width > 0.0)) throw Error("geometry: non-positive width");
  if (model.geometry.cells < 1) throw Error("geometry: cell count must be at least 1");

  int nn = 0;
  if (model.kind == ModelKind::Transport) {
    if (!cfg.contains("velocity")) throw Error("config: transport model needs a velocity block");
    const json& v = cfg["velocity"];
    if (v.contains("speeds")) {
      // Discrete speed shells, one +/- node pair per speed, unit weights.
      const json& sp = v["speeds"];
      if (!sp.is_array() || sp.empty()) throw Error("config: velocity.speeds must be a non-empty array");
      const int m = static_cast<int>(sp.size());
      std::vector<double> speeds(m);
      for (int s = 0; s < m; ++s) speeds[s] = sp[s].get<double>();
      std::sort(speeds.begin(), speeds.end());
      if (!(speeds.front() > 0.0))
        throw Error("velocity grid: velocities must be bounded away from zero (v_min > 0)");
      model.velocity.nodes.resize(2 * m);
      model.velocity.weights = Eigen::ArrayXd::Ones(2 * m);
      for (int s = 0; s < m; ++s) {
        model.velocity.nodes[m - 1 - s] = -speeds[s];
        model.velocity.nodes[m + s] = speeds[s];
      }
      model.velocity.v_min = speeds.front();
      model.velocity.v_max = speeds.back();
    } else {
      const double v_min = require_number(v, "v_min");
      const double v_max = require_number(v, "v_max");
      const int per_sign = require_int(v, "nodes_per_sign");
      if (!(v_min > 0.0))
        throw Error("velocity grid: velocities must be bounded away from zero (v_min > 0)");
      if (!(v_max > v_min)) throw Error("velocity grid: v_max must exceed v_min");
      if (per_sign < 1) throw Error("velocity grid: nodes_per_sign must be at least 1");
      Eigen::ArrayXd pos, w;
      gauss_legendre(per_sign, v_min, v_max, pos, w);
      model.velocity.nodes.resize(2 * per_sign);
      model.velocity.weights.resize(2 * per_sign);
      for (int s = 0; s < per_sign; ++s) {
        model.velocity.nodes[per_sign - 1 - s] = -pos[s];
        model.velocity.weights[per_sign - 1 - s] = w[s];
        model.velocity.nodes[per_sign + s] = pos[s];
        model.velocity.weights[per_sign + s] = w[s];
      }
      model.velocity.v_min = v_min;
      model.velocity.v_max = v_max;
    }
    nn = static_cast<int>(model.velocity.nodes.size());
  } else {
    if (!cfg.contains("energy")) throw Error("config: diffusion model needs an energy block");
    const json& e = cfg["energy"];
    model.energy.xi_min = require_number(e, "xi_min");
    model.energy.xi_max = require_number(e, "xi_max");
    const int groups = require_int(e, "groups");
    if (groups < 1) throw Error("energy grid: no groups");
    if (!(model.energy.xi_max > model.energy.xi_min)) throw Error("energy grid: empty interval");
    const double dxi = (model.energy.xi_max - model.energy.xi_min) / groups;
    model.energy.nodes.resize(groups);
    model.energy.weights = Eigen::ArrayXd::Constant(groups, dxi);
    for (int g = 0; g < groups; ++g)
      model.energy.nodes[g] = model.energy.xi_min + (g + 0.5) * dxi;
    nn = groups;
  }

  const int nx = model.geometry.cells;
  if (!cfg.contains("sigma")) throw Error("config: missing sigma");
  if (!cfg.contains("sigma_s")) throw Error("config: missing sigma_s");
  if (!cfg.contains("sigma_f")) throw Error("config: missing sigma_f");
  model.xs.sigma = read_sigma(cfg["sigma"], nx, nn);
  model.xs.sigma_s = read_kernel(cfg["sigma_s"], nx, nn, "sigma_s");
  model.xs.sigma_f = read_kernel(cfg["sigma_f"], nx, nn, "sigma_f");
  model.xs.sigma_floor = model.xs.sigma.minCoeff();

  if (model.kind == ModelKind::Diffusion) {
    if (!cfg.contains("diffusion")) throw Error("config: diffusion model needs a diffusion block");
    const json& d = cfg["diffusion"];
    DiffusionData data;
    if (d.contains("table")) {
      data.degenerate = false;
      data.table.resize(nx, nn);
      const json& t = d["table"];
      if (!t.is_array() || static_cast<int>(t.size()) != nx)
        throw Error("diffusion table: shape mismatch");
      for (int i = 0; i < nx; ++i) {
        if (static_cast<int>(t[i].size()) != nn) throw Error("diffusion table: shape mismatch");
        for (int g = 0; g < nn; ++g) data.table(i, g) = t[i][g].get<double>();
      }
    } else {
      if (!d.contains("d0") || !d.contains("d1"))
        throw Error("config: diffusion block needs d0 and d1 (or a full table)");
      data.d0 = factor_values(d["d0"], nx, "diffusion d0");
      data.d1 = factor_values(d["d1"], nn, "diffusion d1");
    }
    model.diffusion = std::move(data);
  }

  model.p_norm = cfg.value("p_norm", 2.0);

  model.validate();
  return model;
}

ProblemModel build_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return build_problem(ss.str());
}

namespace {

// First nonpositive fission entry in cell-major scan order.
std::optional<IrreducibilityWitness> first_zero(const std::vector<Eigen::MatrixXd>& kf) {
  for (int i = 0; i < static_cast<int>(kf.size()); ++i)
    for (int a = 0; a < kf[i].rows(); ++a)
      for (int b = 0; b < kf[i].cols(); ++b)
        if (!(kf[i](a, b) > 0.0)) return IrreducibilityWitness{i, static_cast<int>(a), static_cast<int>(b)};
  return std::nullopt;
}

}  // namespace

IrreducibilityReport validate_irreducibility(const ProblemModel& model) {
  const int nx = model.num_cells();
  const int nn = model.num_nodes();
  const auto& kf = model.xs.sigma_f;
  IrreducibilityReport rep;

  std::vector<bool> col_ok(nn, true), row_ok(nn, true);
  for (int i = 0; i < nx; ++i)
    for (int a = 0; a < nn; ++a)
      for (int b = 0; b < nn; ++b) {
        if (!(kf[i](a, b) > 0.0)) {
          col_ok[b] = col_ok[b] && false;
          row_ok[a] = row_ok[a] && false;
        }
      }

  if (model.kind == ModelKind::Diffusion) {
    // Input band: fission positive from every band group into every group.
    for (int b = 0; b < nn; ++b)
      if (col_ok[b]) rep.band.push_back(b);
    if (!rep.band.empty()) {
      rep.pass = true;
      rep.mode = "energy-band";
      rep.band_lo = model.energy.nodes[rep.band.front()];
      rep.band_hi = model.energy.nodes[rep.band.back()];
      rep.detail = "fission positive from an energy band into all groups";
      return rep;
    }
    rep.witness = first_zero(kf);
    rep.detail = "no energy band with strictly positive fission columns";
    return rep;
  }

  // Transport: a speed band feeding all nodes (positive input columns) or
  // fed by all nodes (positive output rows); either side generates
  // irreducibility through the resolvent.
  std::vector<int> input_band;
  std::vector<int> output_band;
  for (int b = 0; b < nn; ++b) {
    if (col_ok[b]) input_band.push_back(b);
    if (row_ok[b]) output_band.push_back(b);
  }
  if (!input_band.empty() || !output_band.empty()) {
    const bool from_input = !input_band.empty();
    rep.band = from_input ? input_band : output_band;
    rep.pass = true;
    rep.mode = "velocity-band";
    double lo = std::abs(model.velocity.nodes[rep.band.front()]);
    double hi = lo;
    for (int b : rep.band) {
      lo = std::min(lo, std::abs(model.velocity.nodes[b]));
      hi = std::max(hi, std::abs(model.velocity.nodes[b]));
    }
    rep.band_lo = lo;
    rep.band_hi = hi;
    rep.detail = from_input
                     ? "fission positive from a speed band into all nodes"
                     : "fission positive into a speed band from all nodes";
    return rep;
  }

  // Fall back to the chain condition over equal-speed shells: for every
  // shell pair (i, j) some shell l has fission positive on (out i, in l)
  // and (out l, in j) at every cell.
  std::map<double, std::vector<int>> shells_by_speed;
  for (int j = 0; j < nn; ++j) shells_by_speed[std::abs(model.velocity.nodes[j])].push_back(j);
  const int ns = static_cast<int>(shells_by_speed.size());
  if (ns >= 2) {
    std::vector<std::vector<int>> shells;
    shells.reserve(ns);
    for (auto& [speed, idx] : shells_by_speed) shells.push_back(idx);
    std::vector<std::vector<bool>> pos(ns, std::vector<bool>(ns, true));
    for (int s = 0; s < ns; ++s)
      for (int t = 0; t < ns; ++t)
        for (int i = 0; i < nx && pos[s][t]; ++i)
          for (int a : shells[s]) {
            for (int b : shells[t])
              if (!(kf[i](a, b) > 0.0)) {
                pos[s][t] = false;
                break;
              }
            if (!pos[s][t]) break;
          }
    bool chain = true;
    for (int s = 0; s < ns && chain; ++s)
      for (int t = 0; t < ns && chain; ++t) {
        bool linked = false;
        for (int l = 0; l < ns; ++l)
          if (pos[s][l] && pos[l][t]) {
            linked = true;
            break;
          }
        chain = linked;
      }
    if (chain) {
      rep.pass = true;
      rep.mode = "multigroup-chain";
      rep.detail = "every shell pair is linked through one intermediate shell";
      return rep;
    }
  }

  rep.witness = first_zero(kf);
  rep.detail = "no velocity band or shell chain with the required fission positivity";
  return rep;
}

DegenerateApprox degenerate_approx(const std::vector<Eigen::MatrixXd>& kernel,
                                   int rank) {
  if (kernel.empty()) throw Error("degenerate_approx: empty kernel");
  const int nx = static_cast<int>(kernel.size());
  const int nn = static_cast<int>(kernel[0].cols());
  const int rows = nx * nn;
  const int full = std::min(rows, nn);
  if (rank < 1 || rank > full)
    throw Error("degenerate_approx: rank must be in [1, min(#(x,v) pairs, #nodes)]");

  Eigen::MatrixXd flat(rows, nn);
  for (int i = 0; i < nx; ++i) flat.middleRows(i * nn, nn) = kernel[i];

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(flat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  DegenerateApprox out;
  out.singular_values = svd.singularValues();
  out.rank = rank;
  out.g = svd.matrixU().leftCols(rank) * out.singular_values.head(rank).asDiagonal();
  out.theta = svd.matrixV().leftCols(rank);
  out.error_estimate = rank < out.singular_values.size() ? out.singular_values[rank] : 0.0;
  return out;
}

std::vector<Eigen::MatrixXd> DegenerateApprox::reconstruct(int cells, int nodes) const {
  if (g.rows() != static_cast<Eigen::Index>(cells) * nodes)
    throw Error("degenerate_approx: reconstruction shape mismatch");
  std::vector<Eigen::MatrixXd> out(cells);
  for (int i = 0; i < cells; ++i)
    out[i] = g.middleRows(i * nodes, nodes) * theta.transpose();
  return out;
}

}  // namespace keff
