#include "keff/diffusion.hpp"

#include <cmath>

namespace keff {

void DiffusionOperator::Tridiag::factorize() {
  const int n = static_cast<int>(diag.size());
  lower.resize(std::max(n - 1, 0));
  pivot.resize(n);
  pivot[0] = diag[0];
  for (int i = 0; i + 1 < n; ++i) {
    lower[i] = sub[i] / pivot[i];
    pivot[i + 1] = diag[i + 1] - lower[i] * sub[i];
  }
}

Eigen::ArrayXd DiffusionOperator::Tridiag::solve(const Eigen::ArrayXd& rhs) const {
  const int n = static_cast<int>(diag.size());
  Eigen::ArrayXd y(n);
  y[0] = rhs[0];
  for (int i = 1; i < n; ++i) y[i] = rhs[i] - lower[i - 1] * y[i - 1];
  Eigen::ArrayXd x(n);
  x[n - 1] = y[n - 1] / pivot[n - 1];
  for (int i = n - 2; i >= 0; --i) x[i] = (y[i] - sub[i] * x[i + 1]) / pivot[i];
  return x;
}

namespace {

// Symmetric tridiagonal form of rho -> -div(D grad rho) [+ sigma rho] with
// mirror-ghost Dirichlet faces and arithmetic-mean face coefficients.
void assemble_tridiag(const Eigen::ArrayXd& d, const double* sigma_column, int stride,
                      double dx, Eigen::ArrayXd& sub, Eigen::ArrayXd& diag) {
  const int n = static_cast<int>(d.size());
  const double inv_dx2 = 1.0 / (dx * dx);
  sub.resize(std::max(n - 1, 0));
  diag.resize(n);
  for (int i = 0; i + 1 < n; ++i) sub[i] = -0.5 * (d[i] + d[i + 1]) * inv_dx2;
  for (int i = 0; i < n; ++i) {
    const double west = (i == 0) ? 2.0 * d[0] * inv_dx2 : -sub[i - 1];
    const double east = (i == n - 1) ? 2.0 * d[n - 1] * inv_dx2 : -sub[i];
    diag[i] = west + east;
    if (sigma_column) diag[i] += sigma_column[i * stride];
  }
}

// Error-free sum: returns fl(a + b) and adds the exact rounding error to err.
double sum_with_error(double a, double b, double& err) {
  const double s = a + b;
  const double z = s - a;
  err += (a - (s - z)) + (b - z);
  return s;
}

// Row action of a symmetric tridiagonal in twofold working precision.  The
// entries are O(1/dx^2) while the smallest eigenvalue is O(1), so a plain sum
// cancels away exactly the digits the Rayleigh quotient needs.
double row_action(const Eigen::ArrayXd& sub, const Eigen::ArrayXd& diag,
                  const Eigen::ArrayXd& x, int i) {
  const int n = static_cast<int>(x.size());
  double err = 0.0;
  double s = diag[i] * x[i];
  err += std::fma(diag[i], x[i], -s);
  if (i > 0) {
    const double p = sub[i - 1] * x[i - 1];
    err += std::fma(sub[i - 1], x[i - 1], -p);
    s = sum_with_error(s, p, err);
  }
  if (i + 1 < n) {
    const double p = sub[i] * x[i + 1];
    err += std::fma(sub[i], x[i + 1], -p);
    s = sum_with_error(s, p, err);
  }
  return s + err;
}

}  // namespace

DiffusionOperator::DiffusionOperator(const ProblemModel& model) : model_(&model) {
  if (model.kind != ModelKind::Diffusion)
    throw Error("diffusion operator requires a diffusion model");
  const int nx = model.num_cells();
  const int ng = model.num_nodes();
  const double dx = model.geometry.dx();
  const DiffusionData& data = *model.diffusion;

  groups_.resize(ng);
  Eigen::ArrayXd d(nx);
  for (int g = 0; g < ng; ++g) {
    for (int i = 0; i < nx; ++i) d[i] = data.coefficient(i, g);
    // sigma is column-major in Eigen, so consecutive cells of one group are
    // contiguous with stride 1.
    assemble_tridiag(d, &model.xs.sigma(0, g), 1, dx, groups_[g].sub, groups_[g].diag);
    groups_[g].factorize();
  }

  if (data.degenerate) {
    PrincipalEigenpair pair;
    Tridiag spatial;
    assemble_tridiag(data.d0, nullptr, 1, dx, spatial.sub, spatial.diag);
    spatial.factorize();
    auto apply = [&](const Eigen::ArrayXd& x) {
      Eigen::ArrayXd y(nx);
      for (int i = 0; i < nx; ++i) y[i] = row_action(spatial.sub, spatial.diag, x, i);
      return y;
    };
    Eigen::ArrayXd x = Eigen::ArrayXd::Ones(nx);
    x /= std::sqrt(x.square().sum());
    double best = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int it = 1; it <= 10000; ++it) {
      Eigen::ArrayXd y = spatial.solve(x);
      x = y / std::sqrt(y.square().sum());
      Eigen::ArrayXd ax = apply(x);
      pair.lambda0 = (x * ax).sum();
      pair.residual = std::sqrt((ax - pair.lambda0 * x).square().sum());
      pair.iterations = it;
      if (pair.residual < best * 0.5) {
        best = pair.residual;
        stalled = 0;
      } else if (++stalled >= 3 && pair.residual <= 1e-10) {
        break;
      }
      if (pair.residual <= 1e-15 * std::max(1.0, std::abs(pair.lambda0))) break;
    }
    if (pair.residual > 1e-10)
      throw Error("principal eigenpair: inverse iteration did not reach the residual target");
    if (x.sum() < 0.0) x = -x;
    if (!(x.minCoeff() > 0.0))
      throw Error("principal eigenpair: eigenvector not strictly positive");
    pair.rho0 = x;
    principal_ = std::move(pair);
  }
}

const PrincipalEigenpair& DiffusionOperator::principal_eigenpair() const {
  if (!principal_)
    throw Error("principal eigenpair requires degenerate diffusion data D = D0(x) d1(xi)");
  return *principal_;
}

Field DiffusionOperator::apply_T(const Field& rho) const {
  const int nx = model_->num_cells();
  const int ng = model_->num_nodes();
  Field out(nx, ng);
  for (int g = 0; g < ng; ++g) {
    const Tridiag& m = groups_[g];
    for (int i = 0; i < nx; ++i) {
      double acc = m.diag[i] * rho(i, g);
      if (i > 0) acc += m.sub[i - 1] * rho(i - 1, g);
      if (i + 1 < nx) acc += m.sub[i] * rho(i + 1, g);
      out(i, g) = -acc;
    }
  }
  return out;
}

Field DiffusionOperator::apply_resolvent(const Field& q) const {
  const int nx = model_->num_cells();
  const int ng = model_->num_nodes();
  Field out(nx, ng);
  for (int g = 0; g < ng; ++g)
    out.col(g) = groups_[g].solve(q.col(g));
  return out;
}

namespace {

Field apply_kernel(const ProblemModel& model, const std::vector<Eigen::MatrixXd>& kernel,
                   const Field& phi) {
  const int nx = model.num_cells();
  const int nn = model.num_nodes();
  const Eigen::ArrayXd& w = model.node_weights();
  Field out(nx, nn);
  for (int i = 0; i < nx; ++i) {
    Eigen::VectorXd weighted = (phi.row(i).transpose() * w).matrix();
    out.row(i) = (kernel[i] * weighted).transpose().array();
  }
  return out;
}

}  // namespace

Field DiffusionOperator::apply_scattering(const Field& rho) const {
  return apply_kernel(*model_, model_->xs.sigma_s, rho);
}

Field DiffusionOperator::apply_fission(const Field& rho) const {
  return apply_kernel(*model_, model_->xs.sigma_f, rho);
}

}  // namespace keff
