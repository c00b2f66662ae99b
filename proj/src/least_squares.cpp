#include "feshrf/least_squares.hpp"

#include <cmath>

#include "feshrf/errors.hpp"

namespace feshrf {

std::string to_string(FitStatus status) {
  switch (status) {
    case FitStatus::Converged: return "converged";
    case FitStatus::MaxIterations: return "max_iterations";
    case FitStatus::AtBoundary: return "at_boundary";
    case FitStatus::Stalled: return "stalled";
    case FitStatus::Unidentifiable: return "unidentifiable";
  }
  return "unknown";
}

std::optional<Eigen::MatrixXd> finite_difference_jacobian(const ResidualFunction& f, const Eigen::VectorXd& p,
                                                          const Eigen::VectorXd& r0, double rel_step,
                                                          const Eigen::VectorXd& abs_floor) {
  Eigen::MatrixXd jac(r0.size(), p.size());
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double h = rel_step * std::max(std::abs(p[j]), abs_floor[j]);
    Eigen::VectorXd up = p;
    Eigen::VectorXd dn = p;
    up[j] += h;
    dn[j] -= h;
    const auto r_up = f(up);
    const auto r_dn = f(dn);
    if (r_up && r_dn) {
      jac.col(j) = (*r_up - *r_dn) / (up[j] - dn[j]);
    } else if (r_up) {
      jac.col(j) = (*r_up - r0) / (up[j] - p[j]);
    } else if (r_dn) {
      jac.col(j) = (r0 - *r_dn) / (p[j] - dn[j]);
    } else {
      return std::nullopt;
    }
  }
  return jac;
}

namespace {

bool inside(const Eigen::VectorXd& p, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    if (!(p[j] > lower[j]) || !(p[j] <= upper[j])) return false;
  }
  return true;
}

bool small_gradient(const Eigen::MatrixXd& jac, const Eigen::VectorXd& r, double tol) {
  const double rn = r.norm();
  if (rn == 0.0) return true;
  const Eigen::VectorXd g = jac.transpose() * r;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const double cn = jac.col(j).norm();
    if (cn == 0.0) continue;
    if (std::abs(g[j]) > tol * cn * rn) return false;
  }
  return true;
}

}  // namespace

LeastSquaresResult levenberg_marquardt(const ResidualFunction& f, Eigen::VectorXd p0, const Eigen::VectorXd& lower,
                                       const Eigen::VectorXd& upper, const Eigen::VectorXd& scale,
                                       const LeastSquaresOptions& options) {
  if (!inside(p0, lower, upper)) throw DomainError("least squares: initial parameters outside bounds");
  auto r0 = f(p0);
  if (!r0) throw DomainError("least squares: model undefined at initial parameters");

  LeastSquaresResult res;
  res.params = std::move(p0);
  res.residuals = std::move(*r0);
  res.cost = 0.5 * res.residuals.squaredNorm();
  double damping = options.initial_damping;

  auto jacobian_at = [&](const Eigen::VectorXd& p, const Eigen::VectorXd& r) {
    auto jac = finite_difference_jacobian(f, p, r, options.fd_rel_step, scale);
    if (!jac) throw DomainError("least squares: Jacobian probes left the model domain");
    return *jac;
  };

  res.jacobian = jacobian_at(res.params, res.residuals);
  bool done = false;
  for (res.iterations = 0; res.iterations < options.max_iterations && !done;) {
    ++res.iterations;
    if (small_gradient(res.jacobian, res.residuals, options.gradient_tol)) {
      res.status = FitStatus::Converged;
      break;
    }
    const Eigen::MatrixXd normal = res.jacobian.transpose() * res.jacobian;
    const Eigen::VectorXd gradient = res.jacobian.transpose() * res.residuals;
    Eigen::VectorXd diag = normal.diagonal();
    for (Eigen::Index j = 0; j < diag.size(); ++j) {
      if (!(diag[j] > 0.0)) diag[j] = 1.0 / (scale[j] * scale[j]);
    }

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd damped = normal;
      damped.diagonal() += damping * diag;
      const Eigen::VectorXd step = damped.ldlt().solve(-gradient);
      double rel_change = 0.0;
      for (Eigen::Index j = 0; j < step.size(); ++j) {
        rel_change = std::max(rel_change, std::abs(step[j]) / std::max(std::abs(res.params[j]), scale[j]));
      }
      const Eigen::VectorXd trial = res.params + step;
      std::optional<Eigen::VectorXd> r_trial;
      if (step.allFinite() && inside(trial, lower, upper)) r_trial = f(trial);
      const double cost_trial = r_trial ? 0.5 * r_trial->squaredNorm() : INFINITY;
      if (r_trial && cost_trial <= res.cost) {
        res.params = trial;
        res.residuals = std::move(*r_trial);
        res.cost = cost_trial;
        damping = std::max(damping * options.damping_down, 1e-12);
        accepted = true;
        res.jacobian = jacobian_at(res.params, res.residuals);
        if (rel_change < options.rel_step_tol) {
          res.status = FitStatus::Converged;
          done = true;
        }
      } else {
        damping *= options.damping_up;
        if (rel_change < options.rel_step_tol) {
          // The remaining proposed step is below resolution: already at the minimum.
          res.status = FitStatus::Converged;
          done = true;
          break;
        }
        if (damping > options.max_damping) {
          res.status = FitStatus::Stalled;
          done = true;
          break;
        }
      }
    }
  }
  if (!done && res.status != FitStatus::Converged) res.status = FitStatus::MaxIterations;

  for (Eigen::Index j = 0; j < res.params.size(); ++j) {
    if (res.params[j] - lower[j] < 1e-6 * scale[j]) res.at_lower_bound = true;
    if (upper[j] - res.params[j] < 1e-6 * scale[j]) res.at_upper_bound = true;
  }
  if (res.status == FitStatus::Converged && (res.at_lower_bound || res.at_upper_bound)) {
    res.status = FitStatus::AtBoundary;
  }
  return res;
}

}  // namespace feshrf
