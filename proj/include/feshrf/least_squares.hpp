#pragma once

// Small dense damped Gauss-Newton (Levenberg-Marquardt) solver with central
// finite-difference Jacobians. Intended for 1-3 parameter problems.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>

namespace feshrf {

// Residual vector for a parameter vector, or nullopt if the parameters are
// outside the model's domain (the trial step is then rejected).
using ResidualFunction = std::function<std::optional<Eigen::VectorXd>(const Eigen::VectorXd&)>;

struct LeastSquaresOptions {
  int max_iterations = 200;
  double rel_step_tol = 1e-8;
  double gradient_tol = 1e-10;
  double fd_rel_step = 1e-6;
  double initial_damping = 1e-3;
  double damping_up = 10.0;
  double damping_down = 0.3;
  double max_damping = 1e16;
};

enum class FitStatus {
  Converged,
  MaxIterations,
  AtBoundary,   // optimum pinned to a parameter bound
  Stalled,      // damping exhausted before the convergence tests were met
  Unidentifiable,
};

std::string to_string(FitStatus status);

struct LeastSquaresResult {
  Eigen::VectorXd params;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd jacobian;
  double cost = 0.0;  // 0.5 * |r|^2
  int iterations = 0;
  FitStatus status = FitStatus::MaxIterations;
  bool at_lower_bound = false;
  bool at_upper_bound = false;
};

// Central differences with step fd_rel_step * max(|p_j|, abs_floor_j).
std::optional<Eigen::MatrixXd> finite_difference_jacobian(const ResidualFunction& f, const Eigen::VectorXd& p,
                                                          const Eigen::VectorXd& r0, double rel_step,
                                                          const Eigen::VectorXd& abs_floor);

// Minimizes 0.5 |r(p)|^2 subject to lower < p <= upper (componentwise; trial steps
// leaving the box are rejected, never clipped). `scale` gives a typical magnitude per
// parameter for step-size floors and the relative-change test.
LeastSquaresResult levenberg_marquardt(const ResidualFunction& f, Eigen::VectorXd p0, const Eigen::VectorXd& lower,
                                       const Eigen::VectorXd& upper, const Eigen::VectorXd& scale,
                                       const LeastSquaresOptions& options);

}  // namespace feshrf
