#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "fogest/estimator.hpp"
#include "fogest/image.hpp"
#include "fogest/localmap.hpp"

namespace fogest {

/// Minimum over channels and over the (2r+1)x(2r+1) patch around each pixel,
/// with edge clamping. On a grayscale image this is a plain min filter.
Image dark_channel(const Image& image, int patch_radius);

/// Pixel indices (y * width + x) of the brightest 0.1% of the dark channel,
/// at least one pixel. Ties favour the lower index.
std::vector<std::size_t> brightest_dark_pixels(const Image& dark);

/// Atmospheric light per channel: the maximum over the brightest dark-channel pixels.
std::vector<double> estimate_a_original(const Image& image, int patch_radius);
/// Same pixel set, taking the per-channel median instead of the maximum.
std::vector<double> estimate_a_modified(const Image& image, int patch_radius);

struct HistogramConfig {
  double bin_width = 0.001;                       // 1/m
  std::optional<ParameterBounds> bounds;          // discard beta outside, when set
  double min_inverse_depth_gap = 0.01;            // tau, 1/m
};

void validate(const HistogramConfig& config);

struct BetaHistogram {
  double beta = 0.0;                         // centre of the highest bin
  double bin_width = 0.0;
  std::map<std::int64_t, std::size_t> bins;  // bin index -> count; centre = index * bin_width
  std::size_t accepted = 0;                  // values placed in the histogram
  std::size_t rejected_by_bounds = 0;

  double center(std::int64_t index) const noexcept { return static_cast<double>(index) * bin_width; }
};

/// Pairwise inversion of the intensity-domain model within each landmark,
/// followed by a histogram vote. `obs` must hold intensities (identity map).
BetaHistogram estimate_beta_histogram(const ObservationSet& obs, double a, const HistogramConfig& config);

/// Two columns per line: bin centre and count, in increasing bin order.
void write_histogram(const BetaHistogram& histogram, const std::filesystem::path& path);

}  // namespace fogest
