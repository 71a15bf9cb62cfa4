#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace fogest {

enum class LossKind { Square, Huber };

// Huber convention used throughout:
//   loss(r) = r^2                      if |r| <= delta
//   loss(r) = 2*delta*|r| - delta^2    otherwise
struct Loss {
  LossKind kind = LossKind::Square;
  double delta = 1.0;

  static Loss square() { return {}; }
  static Loss huber(double delta);
};

double loss_value(const Loss& loss, double r);

struct ScaledResidual {
  double residual = 0.0;         // sign(r) * sqrt(loss(r))
  double jacobian_factor = 1.0;  // d scaled / d r
};

/// Rewrites a raw residual so that its square equals the robust loss. The
/// solver then runs plain Gauss-Newton/LM on the scaled residuals.
ScaledResidual robust_scale(const Loss& loss, double r);

// r: R^n -> R^m with analytic Jacobian, cost = sum_k w_k * loss(r_k),
// subject to lower <= x <= upper.
struct ResidualProblem {
  int parameter_count = 0;
  int residual_count = 0;
  std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r)> residuals;
  std::function<void(const Eigen::VectorXd& x, Eigen::MatrixXd& jacobian)> jacobian;
  Eigen::VectorXd weights;  // empty means all ones
  Loss loss;
  Eigen::VectorXd lower;  // empty means unbounded
  Eigen::VectorXd upper;
};

struct SolveOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-10;
  double step_tolerance = 1e-12;
  double initial_damping = 1e-3;
};

enum class Termination { Gradient, Step, MaxIterations };

std::string_view to_string(Termination t) noexcept;

struct SolveReport {
  Eigen::VectorXd parameters;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  Termination termination = Termination::MaxIterations;
  Eigen::VectorXd residuals;  // raw, unweighted residuals at the solution
  bool init_projected = false;
  std::vector<double> cost_history;  // initial cost followed by every accepted cost
};

/// Weighted robust cost of `problem` at x.
double evaluate_cost(const ResidualProblem& problem, const Eigen::VectorXd& x);

/// Projected Levenberg-Marquardt. Parameters sitting on a bound with the
/// gradient pointing outward are held fixed for the step; the damped
/// Gauss-Newton step for the rest is solved by dense Cholesky with
/// Marquardt (diagonal) scaling, then the trial point is projected onto the box.
/// Damping is multiplied by 10 on rejection and divided by 10 (floor 1e-12)
/// on acceptance.
SolveReport solve(const ResidualProblem& problem, const Eigen::VectorXd& init, const SolveOptions& options = {});

struct JacobianCheck {
  double max_relative_deviation = 0.0;
  int row = -1;
  int col = -1;
};

/// Compares the analytic Jacobian with central differences, step
/// step_scale * max(1, |x_j|). Deviation is |a - b| / max(1, |a|, |b|).
JacobianCheck check_jacobian(const ResidualProblem& problem, const Eigen::VectorXd& x, double step_scale = 1e-6);

}  // namespace fogest
