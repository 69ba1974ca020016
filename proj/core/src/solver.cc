#include "keff/solver.hpp"

#include <cmath>
#include <limits>

#include "keff/variational.hpp"

namespace keff {

PowerIterationResult spectral_radius(const std::function<Field(const Field&)>& apply,
                                     const Field& start,
                                     const PowerIterationOptions& opts) {
  PowerIterationResult res;
  if (start.size() == 0) throw Error("spectral_radius: empty start vector");
  if (start.minCoeff() < 0.0 || !(start.maxCoeff() > 0.0))
    throw Error("spectral_radius: start vector must be nonnegative and nonzero");

  Field phi = start / start.abs().maxCoeff();
  for (int it = 1; it <= opts.max_iterations; ++it) {
    Field psi = apply(phi);
    res.iterations = it;
    const double psi_max = psi.abs().maxCoeff();
    if (psi_max == 0.0) {
      res.radius = res.ratio_min = res.ratio_max = 0.0;
      res.vec = phi;
      res.converged = true;
      return res;
    }

    double rmin = std::numeric_limits<double>::infinity();
    double rmax = -std::numeric_limits<double>::infinity();
    const double floor = opts.ratio_floor;  // phi has unit sup-norm
    for (int i = 0; i < phi.rows(); ++i)
      for (int j = 0; j < phi.cols(); ++j)
        if (phi(i, j) > floor) {
          const double r = psi(i, j) / phi(i, j);
          rmin = std::min(rmin, r);
          rmax = std::max(rmax, r);
        }
    res.ratio_min = rmin;
    res.ratio_max = rmax;
    res.radius = 0.5 * (rmin + rmax);

    Field next = psi / psi_max;
    const double vec_delta = (next - phi).abs().maxCoeff();
    phi = std::move(next);

    const bool gap_ok = (rmax - rmin) <= opts.tol * std::max(1.0, std::abs(rmax));
    if (gap_ok && vec_delta <= opts.vector_tol) {
      res.converged = true;
      break;
    }
  }
  res.vec = phi;
  return res;
}

PowerIterationResult loop_radius(const PhaseOperators& ops, double gamma,
                                 const PowerIterationOptions& opts,
                                 const Field* warm_start) {
  const ProblemModel& m = ops.model();
  Field start = warm_start && warm_start->size() > 0
                    ? *warm_start
                    : Field::Ones(m.num_cells(), m.num_nodes());
  return spectral_radius([&](const Field& phi) { return ops.apply_loop(phi, gamma); },
                         start, opts);
}

ExistenceCheck check_existence(const PhaseOperators& ops, const SolverOptions& opts) {
  const ProblemModel& m = ops.model();
  ExistenceCheck chk;
  chk.probe_gamma = opts.gamma_min_probe;

  Field ones = Field::Ones(m.num_cells(), m.num_nodes());
  auto scatter_loop = [&](const Field& phi) {
    return ops.apply_resolvent(ops.apply_scattering(phi));
  };
  chk.scattering_radius = spectral_radius(scatter_loop, ones, opts.power).radius;
  chk.scattering_ok = chk.scattering_radius < 1.0;

  chk.radius_at_probe = loop_radius(ops, chk.probe_gamma, opts.power).radius;
  chk.fission_ok = chk.radius_at_probe > 1.0;

  chk.exists = chk.scattering_ok && chk.fission_ok;
  if (!chk.scattering_ok) chk.violated = "scattering_radius";
  if (!chk.fission_ok) chk.violated += chk.violated.empty() ? "fission_probe" : "+fission_probe";
  return chk;
}

namespace {

CriticalitySolution finish_solution(const PhaseOperators& ops, double k,
                                    const PowerIterationResult& at_root,
                                    SolveMethod method, int outer, long applies,
                                    ExistenceCheck existence) {
  const ProblemModel& m = ops.model();
  CriticalitySolution sol;
  sol.k_eff = k;
  sol.method = method;
  sol.outer_iterations = outer;
  sol.operator_applications = applies + at_root.iterations;
  sol.existence = std::move(existence);
  sol.radius_gap = std::abs(at_root.radius - 1.0);

  Field phi = at_root.vec;
  const double n = m.norm_p(phi);
  if (!(n > 0.0)) throw Error("solver: zero eigenvector");
  phi /= n;
  if (!(phi.minCoeff() > 0.0))
    throw Error("solver: eigenvector not strictly positive");
  sol.residual = m.norm_p(ops.apply_loop(phi, k) - phi);
  sol.phi_eff = m.make_function(std::move(phi));
  sol.classification = classify(k);
  return sol;
}

}  // namespace

CriticalitySolution solve_keff_rootfind(const PhaseOperators& ops,
                                        const SolverOptions& opts) {
  ExistenceCheck existence = check_existence(ops, opts);
  if (!existence.exists)
    throw ExistenceError("no unique k_eff: violated condition(s): " + existence.violated);

  long applies = 0;
  Field warm;
  auto R = [&](double gamma) {
    PowerIterationResult r = loop_radius(ops, gamma, opts.power, warm.size() ? &warm : nullptr);
    if (!r.converged)
      throw Error("solver: power iteration did not converge at gamma = " + std::to_string(gamma));
    warm = r.vec;
    applies += r.iterations;
    return r;
  };

  // Bracket the decreasing map R around 1 by quadrupling outward from 1.
  int outer = 0;
  double lo, hi, r_lo, r_hi;
  {
    double g = 1.0;
    PowerIterationResult r = R(g);
    ++outer;
    if (r.radius > 1.0) {
      lo = g;
      r_lo = r.radius;
      hi = 4.0 * g;
      for (;;) {
        if (hi > opts.bracket_hi)
          throw Error("solver: no bracket for R(gamma) = 1 within bounds");
        PowerIterationResult rr = R(hi);
        ++outer;
        if (rr.radius <= 1.0) {
          r_hi = rr.radius;
          break;
        }
        lo = hi;
        r_lo = rr.radius;
        hi *= 4.0;
      }
    } else {
      hi = g;
      r_hi = r.radius;
      lo = 0.25 * g;
      for (;;) {
        if (lo < opts.bracket_lo)
          throw Error("solver: no bracket for R(gamma) = 1 within bounds");
        PowerIterationResult rr = R(lo);
        ++outer;
        if (rr.radius >= 1.0) {
          r_lo = rr.radius;
          break;
        }
        hi = lo;
        r_hi = rr.radius;
        lo *= 0.25;
      }
    }
  }

  // Secant step inside the bracket when well-placed, bisection otherwise.
  double k_best = lo;
  double gap_best = std::numeric_limits<double>::infinity();
  PowerIterationResult pi_best;
  auto consider = [&](double g, const PowerIterationResult& r) {
    const double gap = std::abs(r.radius - 1.0);
    if (gap <= gap_best) {
      gap_best = gap;
      k_best = g;
      pi_best = r;
    }
  };
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
    double g = 0.5 * (lo + hi);
    if (r_lo > r_hi) {
      const double secant = lo + (r_lo - 1.0) * (hi - lo) / (r_lo - r_hi);
      const double margin = 0.05 * (hi - lo);
      if (secant > lo + margin && secant < hi - margin) g = secant;
    }
    PowerIterationResult r = R(g);
    ++outer;
    consider(g, r);
    if (r.radius >= 1.0) {
      lo = g;
      r_lo = r.radius;
    } else {
      hi = g;
      r_hi = r.radius;
    }
  }

  if (pi_best.vec.size() == 0 || gap_best > opts.tolerance) {
    PowerIterationResult r = R(k_best);
    consider(k_best, r);
  }
  if (gap_best > opts.tolerance)
    throw Error("solver: root refinement stalled with |R(k)-1| above tolerance");

  // Tight final pass at the accepted root for the eigenvector.
  PowerIterationOptions fine = opts.power;
  fine.tol = std::min(fine.tol, 1e-12);
  PowerIterationResult at_root = loop_radius(ops, k_best, fine, &pi_best.vec);
  return finish_solution(ops, k_best, at_root, SolveMethod::RootFind, outer, applies,
                         std::move(existence));
}

CriticalitySolution solve_keff_direct(const PhaseOperators& ops,
                                      const SolverOptions& opts) {
  ExistenceCheck existence = check_existence(ops, opts);
  if (!existence.scattering_ok)
    throw ExistenceError(
        "direct method precondition failed: scattering radius >= 1");

  long applies = 0;
  auto apply_M = [&](const Field& phi) {
    Field z = ops.apply_resolvent(ops.apply_fission(phi));
    Field y = z;
    ++applies;
    for (int it = 0; it < 100000; ++it) {
      Field next = z + ops.apply_resolvent(ops.apply_scattering(y));
      ++applies;
      const double delta = (next - y).abs().maxCoeff();
      y = std::move(next);
      if (delta <= 1e-15 * std::max(1.0, y.abs().maxCoeff())) break;
    }
    return y;
  };

  const ProblemModel& m = ops.model();
  Field ones = Field::Ones(m.num_cells(), m.num_nodes());
  PowerIterationResult r = spectral_radius(apply_M, ones, opts.power);
  if (!r.converged) throw Error("solver: direct power iteration did not converge");
  if (!(r.radius > 0.0)) throw Error("solver: direct method found zero radius");

  return finish_solution(ops, r.radius, loop_radius(ops, r.radius, opts.power, &r.vec),
                         SolveMethod::Direct, r.iterations, applies,
                         std::move(existence));
}

EigenfunctionTrace approximate_eigenfunction(const PhaseOperators& ops,
                                             const CriticalitySolution& reference,
                                             int max_iterations, double tol) {
  const ProblemModel& m = ops.model();
  EigenfunctionTrace trace;

  Field phi = ops.apply_resolvent(Field::Ones(m.num_cells(), m.num_nodes()));
  phi /= m.norm_p(phi);

  for (int it = 0; it < max_iterations; ++it) {
    ExtendedTau tp = tau_plus(ops, phi);
    if (!std::isfinite(tp.value) || !(tp.value > 0.0))
      throw Error("eigenfunction approximation: tau_plus degenerate at iterate " +
                  std::to_string(it));
    trace.gamma.push_back(tp.value);
    trace.error.push_back(m.norm_p(phi - reference.phi_eff.values));
    trace.iterations = it + 1;
    if (trace.error.back() <= tol) {
      trace.converged = true;
      break;
    }
    phi = ops.apply_loop(phi, tp.value);
    phi /= m.norm_p(phi);
  }
  trace.phi_final = std::move(phi);
  return trace;
}

}  // namespace keff
