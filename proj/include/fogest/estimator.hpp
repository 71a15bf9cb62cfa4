#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fogest/localmap.hpp"
#include "fogest/optimizer.hpp"
#include "fogest/photometry.hpp"

namespace fogest {

struct ParameterBounds {
  double lower = 0.0;
  double upper = 0.0;
  friend bool operator==(const ParameterBounds&, const ParameterBounds&) = default;
};

// Box constraints for the parameter vector [beta, l_inf, lc_0, ..., lc_{K-1}],
// where lc_g belongs to obs.groups[g].
struct FogBounds {
  ParameterBounds beta;
  ParameterBounds l_inf;
  std::vector<ParameterBounds> lc;
};

struct FogEstimate {
  double beta = 0.0;
  double l_inf = 0.0;
  std::map<LandmarkId, double> lc;
};

using ObservationKey = std::pair<FrameId, LandmarkId>;

// Carried from one update to the next. Owned by one caller at a time.
struct EstimatorState {
  std::optional<FogEstimate> previous;
  std::map<ObservationKey, int> inlier_counts;
  std::optional<Vec3> last_update_position;
};

enum class Weighting { Adaptive, Uniform };

struct EstimatorConfig {
  double eta = 2.0;    // slope threshold, intensity levels per metre
  double delta = 5.0;  // Huber threshold, intensity levels
  ParameterBounds beta_bounds{0.001, 0.2};
  double update_gate = 5.0;  // metres travelled between updates
  SelectionThresholds thresholds;
  double initial_beta = 0.014;
  bool two_stage = true;
  Weighting weighting = Weighting::Adaptive;
  SolveOptions solver;
};

void validate(const EstimatorConfig& config);

// Parameter vector layout.
inline constexpr int kBetaIndex = 0;
inline constexpr int kLInfIndex = 1;
inline constexpr int kFirstLcIndex = 2;

/// Bounds from the per-landmark intensity slope between the farthest and the
/// nearest observation. A strongly rising landmark (slope > eta) is darker than
/// the fog: its clear radiance is capped by the nearest observation and its
/// farthest observation becomes a lower-bound candidate for l_inf. A strongly
/// falling one is brighter than the fog and is floored by the nearest
/// observation. l_inf is bounded below by the median candidate and above by
/// expand(255).
FogBounds derive_bounds(const ObservationSet& obs, const GammaMap& map, double eta, ParameterBounds beta_bounds);

/// Starting point: previous estimates where the state has them; otherwise
/// beta = initial_beta, l_inf = median over landmarks of the farthest
/// observation, lc = nearest observation. Projected into `bounds`.
Eigen::VectorXd initialize(const ObservationSet& obs, const EstimatorState& state, const FogBounds& bounds,
                           double initial_beta = 0.014);

/// Estimate used as the weighting reference: previous values where known,
/// the initial point elsewhere.
FogEstimate weighting_reference(const ObservationSet& obs, const EstimatorState& state, const Eigen::VectorXd& init);

/// w = |lc_n - l_inf| * (c + 1) per pair, flattened in group order.
std::vector<double> compute_weights(const ObservationSet& obs, const EstimatorState& state, const FogEstimate& reference);

/// The intensity-domain Huber threshold converted to radiance around mid-grey:
/// expand(127.5 + delta/2) - expand(127.5 - delta/2).
double radiance_threshold(const GammaMap& map, double delta);

/// Residuals obs - predicted, one per pair in group order, and their Jacobian.
/// Either output may be null.
void residual_and_jacobian(const Eigen::VectorXd& params, const ObservationSet& obs, Eigen::VectorXd* residuals,
                           Eigen::MatrixXd* jacobian);

ResidualProblem make_fog_problem(const ObservationSet& obs, const FogBounds& bounds, std::vector<double> weights,
                                 const Loss& loss);

struct EstimateResult {
  FogEstimate estimate;
  SolveReport stage1;
  std::optional<SolveReport> stage2;
  double threshold = 0.0;  // radiance-domain Huber / inlier threshold
  std::size_t observations = 0;
  std::size_t inliers = 0;
  bool degraded = false;  // stage 2 had no inliers; stage-1 result returned

  double inlier_fraction() const noexcept {
    return observations ? static_cast<double>(inliers) / observations : 0.0;
  }
};

/// Full two-stage estimate. Updates inlier counts and the stored previous
/// estimate in `state`.
EstimateResult estimate(const ObservationSet& obs, const GammaMap& map, EstimatorState& state,
                        const EstimatorConfig& config);

/// True if no update has happened yet or the camera moved at least the gate distance.
bool should_update(const Vec3& position, const EstimatorState& state, const EstimatorConfig& config);
void mark_updated(EstimatorState& state, const Vec3& position);

}  // namespace fogest
