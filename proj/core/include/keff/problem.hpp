#ifndef KEFF_PROBLEM_HPP
#define KEFF_PROBLEM_HPP

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "keff/types.hpp"

namespace keff {

struct SlabGeometry {
  double width = 0.0;
  int cells = 0;

  double dx() const { return width / cells; }
  double center(int i) const { return (i + 0.5) * dx(); }
};

/// Signed velocity nodes, symmetric under v -> -v, with |v| in [v_min, v_max]
/// and v_min > 0.  Weights are the quadrature measure on the node set.
struct VelocityGrid {
  Eigen::ArrayXd nodes;
  Eigen::ArrayXd weights;
  double v_min = 0.0;
  double v_max = 0.0;
};

/// Energy nodes strictly inside [xi_min, xi_max]; weights sum to the
/// interval length.
struct EnergyGrid {
  double xi_min = 0.0;
  double xi_max = 0.0;
  Eigen::ArrayXd nodes;
  Eigen::ArrayXd weights;
};

/// Collision data on the discrete phase space.  sigma is (cells x nodes);
/// the scattering and fission kernels are one (node_out x node_in) matrix
/// per cell.
struct CrossSectionSet {
  Eigen::ArrayXXd sigma;
  std::vector<Eigen::MatrixXd> sigma_s;
  std::vector<Eigen::MatrixXd> sigma_f;
  double sigma_floor = 0.0;  // recorded lower bound c with sigma >= c > 0
};

/// Diffusion coefficients.  Degenerate data factorizes as D(x,xi) =
/// d0(x) * d1(xi); a full table disables the factorization and with it the
/// principal-eigenvalue machinery.
struct DiffusionData {
  Eigen::ArrayXd d0;
  Eigen::ArrayXd d1;
  Eigen::ArrayXXd table;  // (cells x groups), empty when degenerate
  bool degenerate = true;

  double coefficient(int cell, int group) const {
    return degenerate ? d0[cell] * d1[group] : table(cell, group);
  }
};

struct ProblemModel {
  ModelKind kind = ModelKind::Transport;
  SlabGeometry geometry;
  VelocityGrid velocity;
  EnergyGrid energy;
  CrossSectionSet xs;
  std::optional<DiffusionData> diffusion;
  double p_norm = 2.0;

  int num_cells() const { return geometry.cells; }
  int num_nodes() const {
    return kind == ModelKind::Transport ? static_cast<int>(velocity.nodes.size())
                                        : static_cast<int>(energy.nodes.size());
  }
  const Eigen::ArrayXd& node_values() const {
    return kind == ModelKind::Transport ? velocity.nodes : energy.nodes;
  }
  const Eigen::ArrayXd& node_weights() const {
    return kind == ModelKind::Transport ? velocity.weights : energy.weights;
  }

  /// Diffusion norms are taken in L^2 regardless of the configured exponent.
  double effective_p() const { return kind == ModelKind::Diffusion ? 2.0 : p_norm; }

  /// (sum_ij dx * w_j |phi_ij|^p)^(1/p) with the model's effective exponent.
  double norm_p(const Field& phi) const;

  GridFunction make_function(Field values) const {
    return GridFunction{std::move(values), effective_p()};
  }

  /// Checks every structural invariant; throws Error with a description of
  /// the first violations found.
  void validate() const;
};

/// Builds and validates a model from a JSON configuration document.
ProblemModel build_problem(const std::string& config_json);
ProblemModel build_problem_file(const std::string& path);

/// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, Eigen::ArrayXd& nodes,
                    Eigen::ArrayXd& weights);

struct IrreducibilityWitness {
  int cell = 0;
  int node_out = 0;
  int node_in = 0;
};

struct IrreducibilityReport {
  bool pass = false;
  std::string mode;            // "velocity-band", "multigroup-chain", "energy-band"
  std::vector<int> band;       // node indices of the certified band (band modes)
  double band_lo = 0.0;        // |v| or xi range covered by the band
  double band_hi = 0.0;
  std::optional<IrreducibilityWitness> witness;  // first vanishing entry on failure
  std::string detail;
};

/// Checks the discrete fission-positivity patterns that make the fission
/// operator irreducibility-generating: a velocity band positive against all
/// nodes as inputs or as outputs (transport), the chain condition over
/// equal-speed shells (multigroup transport), or an input energy band
/// (diffusion).
IrreducibilityReport validate_irreducibility(const ProblemModel& model);

/// Truncated-SVD factorization of a collision kernel into sum_i g_i(x,v)
/// theta_i(v'); rows of the flattened kernel are (cell, node) pairs in
/// cell-major order.
struct DegenerateApprox {
  Eigen::MatrixXd g;               // (cells*nodes) x rank, scaled by singular values
  Eigen::MatrixXd theta;           // nodes x rank
  Eigen::VectorXd singular_values; // full spectrum, descending
  int rank = 0;
  double error_estimate = 0.0;     // (rank+1)-th singular value, 0 at full rank

  std::vector<Eigen::MatrixXd> reconstruct(int cells, int nodes) const;
};

DegenerateApprox degenerate_approx(const std::vector<Eigen::MatrixXd>& kernel,
                                   int rank);

}  // namespace keff

#endif
