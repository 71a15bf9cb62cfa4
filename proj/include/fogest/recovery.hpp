#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fogest/baselines.hpp"
#include "fogest/estimator.hpp"
#include "fogest/image.hpp"
#include "fogest/metrics.hpp"
#include "fogest/simulator.hpp"

namespace fogest {

enum class Method { Full, OneStage, UniformWeight, LiModified, LiOriginal };

inline constexpr Method kAllMethods[] = {Method::Full, Method::OneStage, Method::UniformWeight, Method::LiModified,
                                         Method::LiOriginal};

std::string_view to_string(Method method) noexcept;
Method parse_method(std::string_view name);

// Grayscale street view rendered through intensity-domain fog: sky above the
// horizon, a textured ground plane below it, a few buildings, and small
// saturated lamps against the sky. Used by the dark-channel baselines.
struct ViewSpec {
  int width = 160;
  int height = 120;
  double noise_std = 1.0;  // intensity levels, applied before quantization
  int lamps = 4;
};

Image render_foggy_view(const ViewSpec& spec, const IntensityFogParams& fog, std::uint64_t seed);

struct RecoveryConfig {
  std::vector<double> visibilities{30.0, 40.0, 50.0, 60.0, 70.0, 80.0};
  // One scene per entry, each with its own atmospheric light (identity gamma).
  std::vector<double> atmospheric_light{178.5, 204.0, 229.5};
  std::uint64_t seed = 1;
  int landmarks = 120;
  TrajectorySpec trajectory{120, 1.0, 10.0, 210.0, 8.0, 4.0, 5.0, 80.0, 0.1};
  NoiseSpec noise{1.0, 0, true, NoiseDomain::Intensity, 0.1, 20.0};
  int window = 20;  // frames per local map
  EstimatorConfig estimator;
  HistogramConfig histogram;
  int patch_radius = 7;
  ViewSpec view;
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  unsigned threads = 1;  // scenarios run concurrently; output does not depend on this
};

void validate(const RecoveryConfig& config);

// One estimate of one method at one update.
struct RecoveryEstimate {
  std::string scenario;
  double visibility = 0.0;
  int scene = 0;
  int update = 0;
  FrameId frame = 0;
  Method method = Method::Full;
  bool ok = false;
  double beta = 0.0;
  double l_inf = 0.0;
  double beta_true = 0.0;
  double l_inf_true = 0.0;
  std::string status;  // "ok" or the failure message
};

struct ScenarioMetrics {
  std::string scenario;
  Method method = Method::Full;
  std::size_t estimates = 0;
  std::size_t failures = 0;
  MetricsReport beta;
  MetricsReport l_inf;
};

struct MethodSummary {
  Method method = Method::Full;
  std::size_t scenarios = 0;  // scenarios with at least one estimate
  std::size_t failures = 0;
  MetricsReport beta;  // equal-weight average over scenarios
  MetricsReport l_inf;
};

struct RecoveryReport {
  std::vector<RecoveryEstimate> estimates;
  std::vector<ScenarioMetrics> scenarios;
  std::vector<MethodSummary> summary;

  const MethodSummary& find(Method method) const;
};

RecoveryReport run_recovery_suite(const RecoveryConfig& config);

/// Writes recovery_estimates.csv, recovery_scenarios.csv and recovery_summary.csv into `directory`.
void write_recovery_report(const RecoveryReport& report, const std::filesystem::path& directory);

// Unbounded versus bounded beta histograms on one noisy scene.
struct HistogramDemoConfig {
  double visibility = 30.0;
  double a = 204.0;
  double a_error = 1.0;  // added to the true atmospheric light before voting
  int landmarks = 80;
  TrajectorySpec trajectory{60, 1.0, 10.0, 120.0, 8.0, 4.0, 5.0, 80.0, 0.1};
  NoiseSpec noise{1.0, 5, true, NoiseDomain::Intensity, 0.0, 60.0};
  HistogramConfig histogram;
  ParameterBounds bounds{0.001, 0.2};
};

struct HistogramDemo {
  double beta_true = 0.0;
  double a_used = 0.0;
  BetaHistogram unbounded;
  BetaHistogram bounded;
};

HistogramDemo run_histogram_demo(const HistogramDemoConfig& config);

}  // namespace fogest
