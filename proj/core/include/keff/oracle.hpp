#ifndef KEFF_ORACLE_HPP
#define KEFF_ORACLE_HPP

#include <Eigen/Core>

#include "keff/problem.hpp"
#include "keff/types.hpp"

namespace keff {

/// Dense assembly of the discrete operators, flattened cell-major,
/// node-minor: index = cell * nodes + node.  Independent of the matrix-free
/// code paths; used to cross-check them.
struct DenseSystem {
  Eigen::MatrixXd zero_minus_T;
  Eigen::MatrixXd Ks;
  Eigen::MatrixXd Kf;
};

inline constexpr int kOracleDimensionLimit = 4096;

/// Builds the dense system from explicit stencil loops; refuses flattened
/// dimensions above kOracleDimensionLimit.
DenseSystem assemble_dense(const ProblemModel& model);

struct OracleResult {
  double k_eff = 0.0;
  Eigen::VectorXd perron;          // unit Euclidean norm, nonnegative
  double scattering_radius = 0.0;  // r of (0-T)^{-1} K_s, dense
  int iterations = 0;
};

/// k_eff as the dominant eigenvalue of (I - A Ks)^{-1} A Kf with
/// A = zero_minus_T^{-1}, via LU factorizations and long power iteration
/// with a tiny diagonal shift.
OracleResult oracle_keff(const DenseSystem& system, double tol = 1e-12);

/// Dominant eigenvalue of a dense nonnegative matrix by long power
/// iteration (Collatz-Wielandt bracket midpoint).
double dense_dominant_eigenvalue(const Eigen::MatrixXd& m, double tol = 1e-12,
                                 int max_iterations = 100000);

}  // namespace keff

#endif
