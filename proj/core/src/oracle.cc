#include "keff/oracle.hpp"

#include <cmath>
#include <limits>

#include <Eigen/LU>

namespace keff {

namespace {

// Power iteration on a dense matrix; returns the Collatz-Wielandt bracket
// midpoint and leaves the normalized iterate in vec.
struct DensePower {
  double radius = 0.0;
  Eigen::VectorXd vec;
  int iterations = 0;
  bool converged = false;
};

DensePower dense_power(const Eigen::MatrixXd& m, double tol, int max_iterations) {
  const int n = static_cast<int>(m.rows());
  DensePower res;
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  for (int it = 1; it <= max_iterations; ++it) {
    Eigen::VectorXd y = m * x;
    res.iterations = it;
    const double ymax = y.cwiseAbs().maxCoeff();
    if (ymax == 0.0) {
      res.radius = 0.0;
      res.vec = x;
      res.converged = true;
      return res;
    }
    double rmin = std::numeric_limits<double>::infinity();
    double rmax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      if (x[i] > 1e-12) {
        const double r = y[i] / x[i];
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
      }
    res.radius = 0.5 * (rmin + rmax);
    Eigen::VectorXd next = y / ymax;
    const double delta = (next - x).cwiseAbs().maxCoeff();
    x = std::move(next);
    if ((rmax - rmin) <= tol * std::max(1.0, std::abs(rmax)) && delta <= 1e-13) {
      res.converged = true;
      break;
    }
  }
  res.vec = x;
  return res;
}

}  // namespace

DenseSystem assemble_dense(const ProblemModel& model) {
  const int nx = model.num_cells();
  const int nn = model.num_nodes();
  const long dim = static_cast<long>(nx) * nn;
  if (dim > kOracleDimensionLimit)
    throw Error("oracle: flattened dimension " + std::to_string(dim) +
                " exceeds the limit " + std::to_string(kOracleDimensionLimit));

  const int n = static_cast<int>(dim);
  auto idx = [nn](int cell, int node) { return cell * nn + node; };

  DenseSystem sys;
  sys.zero_minus_T = Eigen::MatrixXd::Zero(n, n);
  sys.Ks = Eigen::MatrixXd::Zero(n, n);
  sys.Kf = Eigen::MatrixXd::Zero(n, n);

  const double dx = model.geometry.dx();
  if (model.kind == ModelKind::Transport) {
    for (int j = 0; j < nn; ++j) {
      const double v = model.velocity.nodes[j];
      const double c = std::abs(v) / dx;
      for (int i = 0; i < nx; ++i) {
        sys.zero_minus_T(idx(i, j), idx(i, j)) = c + model.xs.sigma(i, j);
        const int up = v > 0.0 ? i - 1 : i + 1;
        if (up >= 0 && up < nx) sys.zero_minus_T(idx(i, j), idx(up, j)) = -c;
      }
    }
  } else {
    const DiffusionData& data = *model.diffusion;
    const double inv_dx2 = 1.0 / (dx * dx);
    for (int g = 0; g < nn; ++g) {
      for (int i = 0; i < nx; ++i) {
        const double d_here = data.coefficient(i, g);
        double west, east;
        if (i == 0)
          west = 2.0 * d_here;
        else
          west = 0.5 * (data.coefficient(i - 1, g) + d_here);
        if (i == nx - 1)
          east = 2.0 * d_here;
        else
          east = 0.5 * (d_here + data.coefficient(i + 1, g));
        sys.zero_minus_T(idx(i, g), idx(i, g)) =
            (west + east) * inv_dx2 + model.xs.sigma(i, g);
        if (i > 0) sys.zero_minus_T(idx(i, g), idx(i - 1, g)) = -west * inv_dx2;
        if (i < nx - 1) sys.zero_minus_T(idx(i, g), idx(i + 1, g)) = -east * inv_dx2;
      }
    }
  }

  const Eigen::ArrayXd& w = model.node_weights();
  for (int i = 0; i < nx; ++i)
    for (int a = 0; a < nn; ++a)
      for (int b = 0; b < nn; ++b) {
        sys.Ks(idx(i, a), idx(i, b)) = model.xs.sigma_s[i](a, b) * w[b];
        sys.Kf(idx(i, a), idx(i, b)) = model.xs.sigma_f[i](a, b) * w[b];
      }
  return sys;
}

OracleResult oracle_keff(const DenseSystem& system, double tol) {
  const int n = static_cast<int>(system.zero_minus_T.rows());
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system.zero_minus_T);
  Eigen::MatrixXd Ls = lu.solve(system.Ks);
  Eigen::MatrixXd Lf = lu.solve(system.Kf);

  OracleResult res;
  res.scattering_radius = dense_dominant_eigenvalue(Ls, tol);
  if (!(res.scattering_radius < 1.0))
    throw Error("oracle: scattering loop radius >= 1, the inner inverse does not exist");

  Eigen::MatrixXd M =
      (Eigen::MatrixXd::Identity(n, n) - Ls).partialPivLu().solve(Lf);
  const double shift = 1e-12 * M.maxCoeff();
  M.diagonal().array() += shift;
  DensePower p = dense_power(M, tol, 100000);
  if (!p.converged) throw Error("oracle: power iteration did not converge");
  res.k_eff = p.radius - shift;
  res.perron = p.vec / p.vec.norm();
  if (res.perron.sum() < 0.0) res.perron = -res.perron;
  res.iterations = p.iterations;
  return res;
}

double dense_dominant_eigenvalue(const Eigen::MatrixXd& m, double tol,
                                 int max_iterations) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw Error("oracle: square matrix required");
  if (!(m.maxCoeff() > 0.0) && m.minCoeff() == 0.0) return 0.0;
  const double shift = 1e-12 * std::max(m.maxCoeff(), 0.0);
  Eigen::MatrixXd shifted = m;
  shifted.diagonal().array() += shift;
  DensePower p = dense_power(shifted, tol, max_iterations);
  if (!p.converged)
    throw Error("oracle: dominant eigenvalue iteration did not converge");
  return p.radius - shift;
}

}  // namespace keff
