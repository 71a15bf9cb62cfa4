#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fogest/estimator.hpp"
#include "fogest/localmap.hpp"
#include "fogest/photometry.hpp"
#include "fogest/scattering.hpp"

namespace fogest {

// Linear approach: each landmark is first seen at `far` metres and approached
// to `near` metres over `frames` evenly spaced frames.
struct ApproachSchedule {
  double far = 60.0;
  double near = 10.0;
  int frames = 6;
};

// A vehicle driving along +x. Frame m sits at x = m * spacing. Landmarks are
// scattered ahead of the start over [x_min, x_max] with lateral offsets up
// to `lateral` metres and heights up to `height`. A landmark is observed from
// a frame when it lies ahead and within [min_range, max_range]; each such
// observation is independently dropped with probability `dropout`.
struct TrajectorySpec {
  int frames = 100;
  double spacing = 1.0;
  double x_min = 10.0;
  double x_max = 150.0;
  double lateral = 8.0;
  double height = 4.0;
  double min_range = 5.0;
  double max_range = 80.0;
  double dropout = 0.1;
};

struct SceneSpec {
  int landmarks = 20;
  // Clear radiance drawn uniformly from this range; defaults to
  // [expand(20), expand(235)] of the scene's gamma map.
  std::optional<ParameterBounds> lc_range;
  // Distance schedule. `distances` (when non-empty) is shared by all
  // landmarks, one frame per entry; otherwise `approach` is used unless a
  // trajectory is given.
  std::vector<double> distances;
  ApproachSchedule approach;
  double distance_jitter = 0.0;  // per-landmark offset in [0, jitter) added to schedule distances
  std::optional<TrajectorySpec> trajectory;
};

void validate(const SceneSpec& spec);

enum class NoiseDomain { Intensity, Radiance };

struct NoiseSpec {
  double std = 1.0;  // Gaussian standard deviation in the noise domain's units
  std::uint64_t seed = 0;
  bool quantize = false;
  NoiseDomain domain = NoiseDomain::Intensity;
  // Fraction of observations replaced by gross outliers (feature mismatches):
  // a uniform offset of +-[0.5, 1] * outlier_magnitude intensity levels.
  double outlier_fraction = 0.0;
  double outlier_magnitude = 60.0;
};

void validate(const NoiseSpec& noise);

struct GroundTruth {
  FogParams fog;
  GammaMap map;
  std::map<LandmarkId, double> lc;
};

struct Scene {
  LocalMapGraph graph;
  GroundTruth truth;
};

/// Forward-simulates every scheduled observation through the scattering model,
/// the gamma compression and the noise model. Deterministic for a fixed seed.
Scene generate_scene(const SceneSpec& spec, const FogParams& fog, const GammaMap& map, const NoiseSpec& noise);
/// Intensity-domain fog: equivalent to the radiance form with an identity map.
Scene generate_scene(const SceneSpec& spec, const IntensityFogParams& fog, const NoiseSpec& noise);

/// Seed of trial `index` derived from a master seed; independent of execution order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

std::string ground_truth_json(const GroundTruth& truth);
void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);
GroundTruth read_ground_truth(const std::filesystem::path& path);

// Everything needed to run `simulate` from a config file.
struct SceneConfig {
  SceneSpec scene;
  FogParams fog{beta_from_visibility(50.0), 200.0};
  NoiseSpec noise;
};

/// JSON scene config; field names are documented in docs/file_formats.md.
SceneConfig read_scene_config(const std::filesystem::path& path);
SceneConfig parse_scene_config(const std::string& json_text);

/// Frame ids of `graph` grouped into consecutive windows of `window` frames,
/// advancing by `stride` frames.
std::vector<std::set<FrameId>> sliding_windows(const LocalMapGraph& graph, int window, int stride);

struct GammaBiasConfig {
  int trials = 1000;
  double beta = 0.025;
  double l_inf = 200.0;  // radiance
  GammaMap map;
  NoiseSpec noise{1.0, 0, false, NoiseDomain::Radiance};
  SceneSpec scene;
  EstimatorConfig estimator;
};

/// The map 255^(1 - gamma) * I^gamma, which fixes both ends of [0, 255].
GammaMap normalized_gamma_map(double gamma);

struct GammaBiasTrial {
  int index = 0;
  bool ok = false;
  double beta_radiance = 0.0;
  double beta_intensity = 0.0;
  std::string error;
};

struct GammaBiasResult {
  std::vector<GammaBiasTrial> trials;
  std::size_t failed = 0;
  double mean_beta_radiance = 0.0;  // over successful trials
  double mean_beta_intensity = 0.0;
  double fraction_intensity_greater = 0.0;
};

/// Per trial: clean radiances at the configured beta, corrupted by noise and
/// compressed by the map; then one estimate on the radiances and one on the
/// intensities treated as radiances, both with an identity map.
GammaBiasResult gamma_bias_experiment(const GammaBiasConfig& config);

}  // namespace fogest
