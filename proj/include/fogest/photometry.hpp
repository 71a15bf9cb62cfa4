#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace fogest {

enum class Channel { Gray = 0, Red = 1, Green = 2, Blue = 3 };

std::string_view to_string(Channel channel) noexcept;
Channel parse_channel(std::string_view name);

// Luma weights used to derive a grayscale intensity from RGB.
inline constexpr double kLumaRed = 0.299;
inline constexpr double kLumaGreen = 0.587;
inline constexpr double kLumaBlue = 0.114;

inline double to_gray(double r, double g, double b) noexcept {
  return kLumaRed * r + kLumaGreen * g + kLumaBlue * b;
}

// Intensity -> radiance map g(I) = alpha * I^gamma + zeta and its inverse.
class GammaMap {
 public:
  GammaMap() = default;  // identity
  GammaMap(double alpha, double gamma, double zeta);

  static GammaMap identity() { return {}; }

  double alpha() const noexcept { return alpha_; }
  double gamma() const noexcept { return gamma_; }
  double zeta() const noexcept { return zeta_; }

  bool is_identity() const noexcept { return alpha_ == 1.0 && gamma_ == 1.0 && zeta_ == 0.0; }

  /// Radiance for intensity i in [0, 255].
  double expand(double i) const;
  /// Intensity for radiance l in [expand(0), expand(255)]. Out-of-range input
  /// is a Range error unless `clamp` is set.
  double compress(double l, bool clamp = false) const;

  double min_radiance() const noexcept { return zeta_; }
  double max_radiance() const noexcept;

  friend bool operator==(const GammaMap&, const GammaMap&) = default;

 private:
  double alpha_ = 1.0;
  double gamma_ = 1.0;
  double zeta_ = 0.0;
};

// One map per channel: gray, red, green, blue.
class ChannelGammaMaps {
 public:
  ChannelGammaMaps() = default;
  explicit ChannelGammaMaps(const GammaMap& all) { maps_.fill(all); }

  const GammaMap& get(Channel c) const noexcept { return maps_[static_cast<int>(c)]; }
  void set(Channel c, const GammaMap& map) noexcept { maps_[static_cast<int>(c)] = map; }

  friend bool operator==(const ChannelGammaMaps&, const ChannelGammaMaps&) = default;

 private:
  std::array<GammaMap, 4> maps_{};
};

struct CalibrationSample {
  double intensity = 0.0;  // [0, 255]
  double power = 0.0;      // optical power, microwatts
};

struct GammaFit {
  GammaMap map;
  double residual_norm = 0.0;  // sqrt of the sum of squared power residuals
};

/// Unweighted least-squares fit of (alpha, gamma, zeta) to power = alpha*I^gamma + zeta.
/// For fixed gamma the problem is linear in (alpha, zeta) and is solved in closed
/// form; gamma is located on [0.2, 5] by a coarse scan followed by golden-section
/// refinement of the profiled residual. Sample order does not matter.
GammaFit fit_gamma_map(std::span<const CalibrationSample> samples);

// Gamma file: JSON object {"format": "fogest-gamma", "version": 1,
// "channels": [{"channel": "gray", "alpha": .., "gamma": .., "zeta": ..}, ...]}.
// Channels missing from the file default to identity.
ChannelGammaMaps read_gamma_file(const std::filesystem::path& path);
void write_gamma_file(const ChannelGammaMaps& maps, const std::filesystem::path& path);

// Calibration CSV with header "channel,intensity,power"; returns samples per channel
// in file order. Channels without samples are left empty.
std::array<std::vector<CalibrationSample>, 4> read_calibration_csv(const std::filesystem::path& path);

}  // namespace fogest
