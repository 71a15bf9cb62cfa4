#include "fogest/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <fmt/core.h>

#include "fogest/error.hpp"
#include "fogest/metrics.hpp"

namespace fogest {

void validate(const EstimatorConfig& c) {
  require(c.eta > 0.0, "eta must be positive");
  require(c.delta > 0.0, "delta must be positive");
  require(c.beta_bounds.lower > 0.0 && c.beta_bounds.lower <= c.beta_bounds.upper, "beta bounds must be positive and ordered");
  require(c.update_gate > 0.0, "update gate must be positive");
  require(c.initial_beta > 0.0, "initial beta must be positive");
  validate(c.thresholds);
}

namespace {

struct Extremes {
  std::size_t nearest = 0;
  std::size_t farthest = 0;
  bool has_spread = false;
};

// First occurrence wins on ties.
Extremes extremes(const LandmarkObservations& group) {
  Extremes e;
  for (std::size_t k = 1; k < group.pairs.size(); ++k) {
    if (group.pairs[k].distance < group.pairs[e.nearest].distance) e.nearest = k;
    if (group.pairs[k].distance > group.pairs[e.farthest].distance) e.farthest = k;
  }
  e.has_spread = group.pairs[e.farthest].distance > group.pairs[e.nearest].distance;
  return e;
}

}  // namespace

FogBounds derive_bounds(const ObservationSet& obs, const GammaMap& map, double eta, ParameterBounds beta_bounds) {
  require(!obs.empty(), "cannot derive bounds from an empty observation set");
  require(eta > 0.0, "eta must be positive");
  const double lo = map.expand(0.0);
  const double hi = map.expand(255.0);
  const auto clamp = [&](double l) { return std::clamp(l, lo, hi); };

  FogBounds bounds;
  bounds.beta = beta_bounds;
  std::vector<double> l_inf_candidates;
  bounds.lc.reserve(obs.groups.size());
  for (const auto& group : obs.groups) {
    require(!group.pairs.empty(), fmt::format("landmark {} has no observations", group.landmark));
    const Extremes e = extremes(group);
    ParameterBounds lc{lo, hi};
    if (e.has_spread) {
      const auto& near = group.pairs[e.nearest];
      const auto& far = group.pairs[e.farthest];
      const double slope =
          (map.compress(far.radiance, true) - map.compress(near.radiance, true)) / (far.distance - near.distance);
      if (slope > eta) {
        lc.upper = clamp(near.radiance);
        l_inf_candidates.push_back(clamp(far.radiance));
      } else if (slope < -eta) {
        lc.lower = clamp(near.radiance);
      }
    }
    bounds.lc.push_back(lc);
  }
  bounds.l_inf = {l_inf_candidates.empty() ? lo : median(l_inf_candidates), hi};
  return bounds;
}

Eigen::VectorXd initialize(const ObservationSet& obs, const EstimatorState& state, const FogBounds& bounds,
                           double initial_beta) {
  require(bounds.lc.size() == obs.groups.size(), "bounds do not match the observation set");
  const std::size_t k = obs.groups.size();
  Eigen::VectorXd x(kFirstLcIndex + static_cast<Eigen::Index>(k));

  std::vector<double> farthest;
  farthest.reserve(k);
  for (std::size_t g = 0; g < k; ++g) {
    const auto& group = obs.groups[g];
    const Extremes e = extremes(group);
    farthest.push_back(group.pairs[e.farthest].radiance);
    double lc = group.pairs[e.nearest].radiance;
    if (state.previous) {
      if (auto it = state.previous->lc.find(group.landmark); it != state.previous->lc.end()) lc = it->second;
    }
    x[kFirstLcIndex + g] = std::clamp(lc, bounds.lc[g].lower, bounds.lc[g].upper);
  }
  const double beta = state.previous ? state.previous->beta : initial_beta;
  const double l_inf = state.previous ? state.previous->l_inf : median(farthest);
  x[kBetaIndex] = std::clamp(beta, bounds.beta.lower, bounds.beta.upper);
  x[kLInfIndex] = std::clamp(l_inf, bounds.l_inf.lower, bounds.l_inf.upper);
  return x;
}

FogEstimate weighting_reference(const ObservationSet& obs, const EstimatorState& state, const Eigen::VectorXd& init) {
  FogEstimate ref;
  ref.beta = state.previous ? state.previous->beta : init[kBetaIndex];
  ref.l_inf = state.previous ? state.previous->l_inf : init[kLInfIndex];
  for (std::size_t g = 0; g < obs.groups.size(); ++g) {
    const LandmarkId id = obs.groups[g].landmark;
    double lc = init[kFirstLcIndex + g];
    if (state.previous) {
      if (auto it = state.previous->lc.find(id); it != state.previous->lc.end()) lc = it->second;
    }
    ref.lc[id] = lc;
  }
  return ref;
}

std::vector<double> compute_weights(const ObservationSet& obs, const EstimatorState& state, const FogEstimate& reference) {
  std::vector<double> w;
  w.reserve(obs.pair_count());
  for (const auto& group : obs.groups) {
    const auto it = reference.lc.find(group.landmark);
    require(it != reference.lc.end(), fmt::format("no reference clear radiance for landmark {}", group.landmark));
    const double contrast = std::abs(it->second - reference.l_inf);
    for (const auto& p : group.pairs) {
      const auto c = state.inlier_counts.find({p.frame, group.landmark});
      const int count = c == state.inlier_counts.end() ? 0 : c->second;
      w.push_back(contrast * (count + 1));
    }
  }
  return w;
}

double radiance_threshold(const GammaMap& map, double delta) {
  require(delta > 0.0 && delta < 255.0, "delta must lie in (0, 255)");
  return map.expand(127.5 + delta / 2.0) - map.expand(127.5 - delta / 2.0);
}

void residual_and_jacobian(const Eigen::VectorXd& params, const ObservationSet& obs, Eigen::VectorXd* residuals,
                           Eigen::MatrixXd* jacobian) {
  const auto n = static_cast<Eigen::Index>(obs.pair_count());
  const Eigen::Index p = kFirstLcIndex + static_cast<Eigen::Index>(obs.groups.size());
  require(params.size() == p, "parameter vector does not match the observation set");
  if (residuals) residuals->resize(n);
  if (jacobian) jacobian->setZero(n, p);

  const double beta = params[kBetaIndex];
  const double l_inf = params[kLInfIndex];
  Eigen::Index row = 0;
  for (std::size_t g = 0; g < obs.groups.size(); ++g) {
    const Eigen::Index col = kFirstLcIndex + static_cast<Eigen::Index>(g);
    const double lc = params[col];
    for (const auto& pair : obs.groups[g].pairs) {
      const double t = std::exp(-beta * pair.distance);
      if (residuals) (*residuals)[row] = pair.radiance - ((lc - l_inf) * t + l_inf);
      if (jacobian) {
        (*jacobian)(row, kBetaIndex) = pair.distance * (lc - l_inf) * t;
        (*jacobian)(row, kLInfIndex) = t - 1.0;
        (*jacobian)(row, col) = -t;
      }
      ++row;
    }
  }
}

ResidualProblem make_fog_problem(const ObservationSet& obs, const FogBounds& bounds, std::vector<double> weights,
                                 const Loss& loss) {
  require(bounds.lc.size() == obs.groups.size(), "bounds do not match the observation set");
  ResidualProblem problem;
  problem.parameter_count = kFirstLcIndex + static_cast<int>(obs.groups.size());
  problem.residual_count = static_cast<int>(obs.pair_count());
  // The problem holds its own copy so it stays valid independent of `obs`.
  auto data = std::make_shared<const ObservationSet>(obs);
  problem.residuals = [data](const Eigen::VectorXd& x, Eigen::VectorXd& r) { residual_and_jacobian(x, *data, &r, nullptr); };
  problem.jacobian = [data](const Eigen::VectorXd& x, Eigen::MatrixXd& j) { residual_and_jacobian(x, *data, nullptr, &j); };
  if (!weights.empty()) {
    require(weights.size() == obs.pair_count(), "one weight per observation is required");
    problem.weights = Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  }
  problem.loss = loss;
  problem.lower.resize(problem.parameter_count);
  problem.upper.resize(problem.parameter_count);
  problem.lower[kBetaIndex] = bounds.beta.lower;
  problem.upper[kBetaIndex] = bounds.beta.upper;
  problem.lower[kLInfIndex] = bounds.l_inf.lower;
  problem.upper[kLInfIndex] = bounds.l_inf.upper;
  for (std::size_t g = 0; g < bounds.lc.size(); ++g) {
    problem.lower[kFirstLcIndex + g] = bounds.lc[g].lower;
    problem.upper[kFirstLcIndex + g] = bounds.lc[g].upper;
  }
  return problem;
}

namespace {

FogEstimate to_estimate(const ObservationSet& obs, const Eigen::VectorXd& x) {
  FogEstimate e;
  e.beta = x[kBetaIndex];
  e.l_inf = x[kLInfIndex];
  for (std::size_t g = 0; g < obs.groups.size(); ++g) e.lc[obs.groups[g].landmark] = x[kFirstLcIndex + g];
  return e;
}

void persist(EstimatorState& state, const FogEstimate& estimate) {
  if (!state.previous) {
    state.previous = estimate;
    return;
  }
  state.previous->beta = estimate.beta;
  state.previous->l_inf = estimate.l_inf;
  for (const auto& [id, lc] : estimate.lc) state.previous->lc[id] = lc;
}

}  // namespace

EstimateResult estimate(const ObservationSet& obs, const GammaMap& map, EstimatorState& state,
                        const EstimatorConfig& config) {
  validate(config);
  if (!check_sufficiency(obs, config.thresholds))
    fail(ErrorCode::NotEnoughData,
         fmt::format("only {} landmarks observed in at least xi_F = {} frames; xi_K = {} required", obs.groups.size(),
                     config.thresholds.xi_f, config.thresholds.xi_k));
  const bool any_spread = std::any_of(obs.groups.begin(), obs.groups.end(), [](const auto& g) { return extremes(g).has_spread; });
  if (!any_spread)
    fail(ErrorCode::DegenerateData, "no landmark is observed over a range of distances; beta is unobservable");

  EstimateResult result;
  result.observations = obs.pair_count();
  result.threshold = radiance_threshold(map, config.delta);

  const FogBounds bounds = derive_bounds(obs, map, config.eta, config.beta_bounds);
  const Eigen::VectorXd init = initialize(obs, state, bounds, config.initial_beta);

  std::vector<double> weights;
  if (config.weighting == Weighting::Adaptive)
    weights = compute_weights(obs, state, weighting_reference(obs, state, init));
  const ResidualProblem stage1 = make_fog_problem(obs, bounds, std::move(weights), Loss::huber(result.threshold));
  result.stage1 = solve(stage1, init, config.solver);

  // Inlier classification on the unweighted stage-1 residuals.
  ObservationSet inliers;
  FogBounds inlier_bounds{bounds.beta, bounds.l_inf, {}};
  std::vector<Eigen::Index> kept_groups;
  Eigen::Index row = 0;
  for (std::size_t g = 0; g < obs.groups.size(); ++g) {
    const auto& group = obs.groups[g];
    LandmarkObservations kept{group.landmark, {}};
    for (const auto& pair : group.pairs) {
      if (std::abs(result.stage1.residuals[row++]) <= result.threshold) {
        ++state.inlier_counts[{pair.frame, group.landmark}];
        kept.pairs.push_back(pair);
      }
    }
    result.inliers += kept.pairs.size();
    if (!kept.pairs.empty()) {
      inliers.groups.push_back(std::move(kept));
      inlier_bounds.lc.push_back(bounds.lc[g]);
      kept_groups.push_back(static_cast<Eigen::Index>(g));
    }
  }

  Eigen::VectorXd solution = result.stage1.parameters;
  if (config.two_stage) {
    if (inliers.empty()) {
      result.degraded = true;
    } else {
      const ResidualProblem stage2 = make_fog_problem(inliers, inlier_bounds, {}, Loss::square());
      Eigen::VectorXd warm(kFirstLcIndex + static_cast<Eigen::Index>(kept_groups.size()));
      warm[kBetaIndex] = solution[kBetaIndex];
      warm[kLInfIndex] = solution[kLInfIndex];
      for (std::size_t i = 0; i < kept_groups.size(); ++i) warm[kFirstLcIndex + i] = solution[kFirstLcIndex + kept_groups[i]];
      result.stage2 = solve(stage2, warm, config.solver);
      const auto& x2 = result.stage2->parameters;
      solution[kBetaIndex] = x2[kBetaIndex];
      solution[kLInfIndex] = x2[kLInfIndex];
      for (std::size_t i = 0; i < kept_groups.size(); ++i) solution[kFirstLcIndex + kept_groups[i]] = x2[kFirstLcIndex + i];
    }
  }

  result.estimate = to_estimate(obs, solution);
  persist(state, result.estimate);
  return result;
}

bool should_update(const Vec3& position, const EstimatorState& state, const EstimatorConfig& config) {
  if (!state.last_update_position) return true;
  return distance(position, *state.last_update_position) >= config.update_gate;
}

void mark_updated(EstimatorState& state, const Vec3& position) { state.last_update_position = position; }

}  // namespace fogest
