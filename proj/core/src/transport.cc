#include "keff/transport.hpp"

#include <cmath>

namespace keff {

double stay_time(double width, double x, double v) {
  if (v == 0.0) throw Error("stay_time: zero velocity");
  if (x < 0.0 || x > width) throw Error("stay_time: position outside the slab");
  return v > 0.0 ? x / v : (width - x) / (-v);
}

TransportOperator::TransportOperator(const ProblemModel& model) : model_(&model) {
  if (model.kind != ModelKind::Transport)
    throw Error("transport operator requires a transport model");
  const int nx = model.num_cells();
  const int nn = model.num_nodes();
  const double dx = model.geometry.dx();
  const double a = model.geometry.width;

  coupling_.resize(nn);
  diag_.resize(nx, nn);
  tau_.resize(nx, nn);
  tau_face_.resize(nx, nn);
  for (int j = 0; j < nn; ++j) {
    const double v = model.velocity.nodes[j];
    coupling_[j] = std::abs(v) / dx;
    for (int i = 0; i < nx; ++i) {
      diag_(i, j) = coupling_[j] + model.xs.sigma(i, j);
      const double x = model.geometry.center(i);
      tau_(i, j) = stay_time(a, x, v);
      tau_face_(i, j) = tau_(i, j) + 0.5 * dx / std::abs(v);
    }
  }
}

Field TransportOperator::apply_T(const Field& phi) const {
  const int nx = model_->num_cells();
  const int nn = model_->num_nodes();
  Field out(nx, nn);
  for (int j = 0; j < nn; ++j) {
    const bool rightward = model_->velocity.nodes[j] > 0.0;
    for (int i = 0; i < nx; ++i) {
      const int up = rightward ? i - 1 : i + 1;
      const double upstream = (up >= 0 && up < nx) ? phi(up, j) : 0.0;
      out(i, j) = coupling_[j] * upstream - diag_(i, j) * phi(i, j);
    }
  }
  return out;
}

Field TransportOperator::apply_resolvent(const Field& q) const {
  const int nx = model_->num_cells();
  const int nn = model_->num_nodes();
  Field phi(nx, nn);
  for (int j = 0; j < nn; ++j) {
    if (model_->velocity.nodes[j] > 0.0) {
      phi(0, j) = q(0, j) / diag_(0, j);
      for (int i = 1; i < nx; ++i)
        phi(i, j) = (q(i, j) + coupling_[j] * phi(i - 1, j)) / diag_(i, j);
    } else {
      phi(nx - 1, j) = q(nx - 1, j) / diag_(nx - 1, j);
      for (int i = nx - 2; i >= 0; --i)
        phi(i, j) = (q(i, j) + coupling_[j] * phi(i + 1, j)) / diag_(i, j);
    }
  }
  return phi;
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

Field TransportOperator::apply_scattering(const Field& phi) const {
  return apply_kernel(*model_, model_->xs.sigma_s, phi);
}

Field TransportOperator::apply_fission(const Field& phi) const {
  return apply_kernel(*model_, model_->xs.sigma_f, phi);
}

}  // namespace keff
