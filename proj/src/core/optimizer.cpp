#include "fogest/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "fogest/error.hpp"

namespace fogest {

Loss Loss::huber(double delta) {
  require(std::isfinite(delta) && delta > 0.0, "Huber threshold must be positive");
  return {LossKind::Huber, delta};
}

double loss_value(const Loss& loss, double r) {
  if (loss.kind == LossKind::Square) return r * r;
  const double a = std::abs(r);
  return a <= loss.delta ? r * r : 2.0 * loss.delta * a - loss.delta * loss.delta;
}

ScaledResidual robust_scale(const Loss& loss, double r) {
  if (loss.kind == LossKind::Square || std::abs(r) <= loss.delta) return {r, 1.0};
  const double s = std::sqrt(2.0 * loss.delta * std::abs(r) - loss.delta * loss.delta);
  return {std::copysign(s, r), loss.delta / s};
}

std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::Gradient: return "gradient";
    case Termination::Step: return "step";
    case Termination::MaxIterations: return "max-iter";
  }
  return "max-iter";
}

namespace {

constexpr double kMinDamping = 1e-12;

class Evaluator {
 public:
  explicit Evaluator(const ResidualProblem& p) : p_(p) {
    require(p.parameter_count > 0, "problem needs at least one parameter");
    require(p.residual_count > 0, "problem needs at least one residual");
    require(static_cast<bool>(p.residuals) && static_cast<bool>(p.jacobian), "problem needs residual and Jacobian evaluators");
    require(p.weights.size() == 0 || p.weights.size() == p.residual_count, "weight count must match residual count");
    for (Eigen::Index k = 0; k < p.weights.size(); ++k)
      require(p.weights[k] >= 0.0 && std::isfinite(p.weights[k]), "weights must be finite and non-negative");
    const bool bounded = p.lower.size() != 0 || p.upper.size() != 0;
    if (bounded) {
      require(p.lower.size() == p.parameter_count && p.upper.size() == p.parameter_count,
              "bound vectors must match the parameter count");
      for (int i = 0; i < p.parameter_count; ++i)
        require(p.lower[i] <= p.upper[i], fmt::format("bounds of parameter {} are inverted", i));
      lower_ = p.lower;
      upper_ = p.upper;
    } else {
      lower_ = Eigen::VectorXd::Constant(p.parameter_count, -std::numeric_limits<double>::infinity());
      upper_ = Eigen::VectorXd::Constant(p.parameter_count, std::numeric_limits<double>::infinity());
    }
  }

  double weight(Eigen::Index k) const { return p_.weights.size() ? p_.weights[k] : 1.0; }

  Eigen::VectorXd project(const Eigen::VectorXd& x) const { return x.cwiseMax(lower_).cwiseMin(upper_); }

  // Raw residuals; returns false if any is non-finite.
  bool residuals(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    r.resize(p_.residual_count);
    p_.residuals(x, r);
    require(r.size() == p_.residual_count, "residual evaluator returned the wrong size");
    return r.allFinite();
  }

  double cost(const Eigen::VectorXd& r) const {
    double c = 0.0;
    for (Eigen::Index k = 0; k < r.size(); ++k) c += weight(k) * loss_value(p_.loss, r[k]);
    return c;
  }

  // Scaled residuals s and the scaled Jacobian ds/dx.
  void linearize(const Eigen::VectorXd& x, const Eigen::VectorXd& r, Eigen::VectorXd& s, Eigen::MatrixXd& js) const {
    js.resize(p_.residual_count, p_.parameter_count);
    p_.jacobian(x, js);
    require(js.rows() == p_.residual_count && js.cols() == p_.parameter_count,
            "Jacobian evaluator returned the wrong shape");
    if (!js.allFinite()) fail(ErrorCode::Numeric, "non-finite Jacobian entry");
    s.resize(r.size());
    for (Eigen::Index k = 0; k < r.size(); ++k) {
      const auto scaled = robust_scale(p_.loss, r[k]);
      const double sw = std::sqrt(weight(k));
      s[k] = sw * scaled.residual;
      js.row(k) *= sw * scaled.jacobian_factor;
    }
  }

  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }

 private:
  const ResidualProblem& p_;
  Eigen::VectorXd lower_, upper_;
};

}  // namespace

double evaluate_cost(const ResidualProblem& problem, const Eigen::VectorXd& x) {
  Evaluator ev(problem);
  require(x.size() == problem.parameter_count, "parameter vector has the wrong size");
  Eigen::VectorXd r;
  if (!ev.residuals(x, r)) return std::numeric_limits<double>::infinity();
  return ev.cost(r);
}

SolveReport solve(const ResidualProblem& problem, const Eigen::VectorXd& init, const SolveOptions& options) {
  Evaluator ev(problem);
  require(init.size() == problem.parameter_count, "initial parameter vector has the wrong size");
  require(options.max_iterations >= 0, "max iterations must be non-negative");
  require(options.initial_damping > 0.0, "initial damping must be positive");

  const int n = problem.parameter_count;
  SolveReport report;
  Eigen::VectorXd x = ev.project(init);
  report.init_projected = (x.array() != init.array()).any();

  Eigen::VectorXd r;
  if (!ev.residuals(x, r)) fail(ErrorCode::Numeric, "non-finite residual at the initial point");
  double cost = ev.cost(r);
  report.initial_cost = cost;
  report.cost_history.push_back(cost);

  Eigen::VectorXd s;
  Eigen::MatrixXd js;
  ev.linearize(x, r, s, js);
  Eigen::VectorXd g = js.transpose() * s;
  Eigen::MatrixXd h = js.transpose() * js;

  double lambda = options.initial_damping;
  report.termination = Termination::MaxIterations;
  Eigen::VectorXd r_trial;

  for (;;) {
    const Eigen::VectorXd projected_gradient = x - ev.project(x - g);
    if (projected_gradient.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
      report.termination = Termination::Gradient;
      break;
    }
    if (report.iterations >= options.max_iterations) break;
    ++report.iterations;

    std::vector<int> free;
    free.reserve(n);
    for (int i = 0; i < n; ++i) {
      const bool pinned_low = x[i] <= ev.lower()[i] && g[i] > 0.0;
      const bool pinned_high = x[i] >= ev.upper()[i] && g[i] < 0.0;
      if (!pinned_low && !pinned_high) free.push_back(i);
    }
    const int nf = static_cast<int>(free.size());
    const double diag_floor = 1e-12 * std::max(1.0, h.diagonal().maxCoeff());
    Eigen::MatrixXd a(nf, nf);
    Eigen::VectorXd b(nf);
    for (int i = 0; i < nf; ++i) {
      for (int j = 0; j < nf; ++j) a(i, j) = h(free[i], free[j]);
      a(i, i) += lambda * std::max(h(free[i], free[i]), diag_floor);
      b[i] = -g[free[i]];
    }
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
      lambda *= 10.0;
      continue;
    }
    const Eigen::VectorXd delta_free = llt.solve(b);
    Eigen::VectorXd x_trial = x;
    for (int i = 0; i < nf; ++i) x_trial[free[i]] += delta_free[i];
    x_trial = ev.project(x_trial);

    if ((x_trial - x).norm() <= options.step_tolerance * (x.norm() + options.step_tolerance)) {
      report.termination = Termination::Step;
      break;
    }

    const bool finite = ev.residuals(x_trial, r_trial);
    const double cost_trial = finite ? ev.cost(r_trial) : std::numeric_limits<double>::infinity();
    if (cost_trial < cost) {
      x = x_trial;
      r.swap(r_trial);
      cost = cost_trial;
      report.cost_history.push_back(cost);
      ev.linearize(x, r, s, js);
      g.noalias() = js.transpose() * s;
      h.noalias() = js.transpose() * js;
      lambda = std::max(lambda / 10.0, kMinDamping);
    } else {
      lambda *= 10.0;
    }
  }

  report.parameters = x;
  report.final_cost = cost;
  report.residuals = r;
  return report;
}

JacobianCheck check_jacobian(const ResidualProblem& problem, const Eigen::VectorXd& x, double step_scale) {
  Evaluator ev(problem);
  require(x.size() == problem.parameter_count, "parameter vector has the wrong size");
  require(step_scale > 0.0, "finite-difference step must be positive");
  Eigen::MatrixXd analytic(problem.residual_count, problem.parameter_count);
  problem.jacobian(x, analytic);

  JacobianCheck out;
  Eigen::VectorXd rp, rm;
  for (int j = 0; j < problem.parameter_count; ++j) {
    const double h = step_scale * std::max(1.0, std::abs(x[j]));
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    ev.residuals(xp, rp);
    ev.residuals(xm, rm);
    for (int k = 0; k < problem.residual_count; ++k) {
      const double numeric = (rp[k] - rm[k]) / (2.0 * h);
      const double a = analytic(k, j);
      const double dev = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      if (dev > out.max_relative_deviation || out.row < 0) {
        out.max_relative_deviation = dev;
        out.row = k;
        out.col = j;
      }
    }
  }
  return out;
}

}  // namespace fogest
