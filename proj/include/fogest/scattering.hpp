#pragma once

#include <optional>
#include <span>

#include "fogest/image.hpp"

namespace fogest {

// Fog parameters in the radiance domain.
struct FogParams {
  double beta = 0.0;   // scattering coefficient, 1/m
  double l_inf = 0.0;  // atmospheric-light radiance
};

// Fog parameters in the pixel-intensity domain.
struct IntensityFogParams {
  double beta_int = 0.0;  // 1/m
  double a = 0.0;         // atmospheric-light intensity, [0, 255]
};

void validate(const FogParams& params);
void validate(const IntensityFogParams& params);

/// exp(-beta * d). d = 0 is allowed and yields exactly 1.
double transmission(double beta, double d);

/// Meteorological optical range: the distance at which transmission is 5%.
double visibility_from_beta(double beta);
double beta_from_visibility(double visibility);

/// Observed radiance of a point with clear radiance `lc` seen through fog at distance d.
double predict_radiance(double lc, const FogParams& params, double d);

/// Foggy intensity J*t + A*(1 - t), clamped to [0, 255].
double synthesize_fog_pixel(double j, const IntensityFogParams& params, double d);

/// Applies synthesize_fog_pixel to every pixel. `per_channel` holds one entry
/// per image channel, or one entry shared by all channels. Distances above
/// `max_distance` (when given) are clamped to it before use.
Image synthesize_fog_image(const Image& clear, const Image& distance_map,
                           std::span<const IntensityFogParams> per_channel,
                           std::optional<double> max_distance = std::nullopt);

/// Converts a z-depth map to Euclidean distance from the optical centre
/// for a pinhole camera with focal lengths (fx, fy) and principal point (cx, cy).
Image distance_from_depth(const Image& depth, double fx, double fy, double cx, double cy);

}  // namespace fogest
