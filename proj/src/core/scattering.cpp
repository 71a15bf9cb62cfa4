#include "fogest/scattering.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "fogest/error.hpp"

namespace fogest {

namespace {

// -ln(0.05): optical depth at which 5% of the light survives.
const double kMorOpticalDepth = -std::log(0.05);

}  // namespace

void validate(const FogParams& params) {
  require(std::isfinite(params.beta) && params.beta > 0.0, "beta must be positive and finite");
  require(std::isfinite(params.l_inf), "l_inf must be finite");
}

void validate(const IntensityFogParams& params) {
  require(std::isfinite(params.beta_int) && params.beta_int > 0.0, "beta_int must be positive and finite");
  require(params.a >= 0.0 && params.a <= 255.0, "atmospheric light A must lie in [0, 255]");
}

double transmission(double beta, double d) {
  require(std::isfinite(beta) && beta > 0.0, fmt::format("beta must be positive and finite, got {}", beta));
  require(std::isfinite(d) && d >= 0.0, fmt::format("distance must be non-negative and finite, got {}", d));
  return std::exp(-beta * d);
}

double visibility_from_beta(double beta) {
  require(std::isfinite(beta) && beta > 0.0, "beta must be positive and finite");
  return kMorOpticalDepth / beta;
}

double beta_from_visibility(double visibility) {
  require(std::isfinite(visibility) && visibility > 0.0, "visibility must be positive and finite");
  return kMorOpticalDepth / visibility;
}

double predict_radiance(double lc, const FogParams& params, double d) {
  validate(params);
  require(std::isfinite(lc), "clear radiance must be finite");
  const double t = transmission(params.beta, d);
  return (lc - params.l_inf) * t + params.l_inf;
}

double synthesize_fog_pixel(double j, const IntensityFogParams& params, double d) {
  validate(params);
  require(j >= 0.0 && j <= 255.0, fmt::format("clear intensity must lie in [0, 255], got {}", j));
  const double t = transmission(params.beta_int, d);
  return std::clamp(j * t + params.a * (1.0 - t), 0.0, 255.0);
}

Image synthesize_fog_image(const Image& clear, const Image& distance_map,
                           std::span<const IntensityFogParams> per_channel,
                           std::optional<double> max_distance) {
  require(!clear.empty(), "clear image is empty");
  require(distance_map.channels() == 1, "distance map must have a single channel");
  require(clear.same_size(distance_map), "clear image and distance map dimensions differ");
  require(per_channel.size() == 1 || per_channel.size() == static_cast<std::size_t>(clear.channels()),
          "need one fog parameter set per channel, or a single shared one");
  if (max_distance) require(*max_distance > 0.0, "max distance clamp must be positive");
  for (const auto& p : per_channel) validate(p);

  Image foggy(clear.width(), clear.height(), clear.channels());
  for (int y = 0; y < clear.height(); ++y) {
    for (int x = 0; x < clear.width(); ++x) {
      double d = distance_map.at(x, y);
      require(std::isfinite(d) && d >= 0.0, fmt::format("invalid distance {} at ({}, {})", d, x, y));
      if (max_distance) d = std::min(d, *max_distance);
      for (int c = 0; c < clear.channels(); ++c) {
        const auto& p = per_channel.size() == 1 ? per_channel[0] : per_channel[c];
        foggy.at(x, y, c) = synthesize_fog_pixel(clear.at(x, y, c), p, d);
      }
    }
  }
  return foggy;
}

Image distance_from_depth(const Image& depth, double fx, double fy, double cx, double cy) {
  require(depth.channels() == 1 && !depth.empty(), "depth map must be a non-empty single-channel raster");
  require(fx > 0.0 && fy > 0.0, "focal lengths must be positive");
  Image distance(depth.width(), depth.height(), 1);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      const double z = depth.at(x, y);
      const double u = (x - cx) / fx;
      const double v = (y - cy) / fy;
      distance.at(x, y) = z * std::sqrt(1.0 + u * u + v * v);
    }
  }
  return distance;
}

}  // namespace fogest
