#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace fogest {

// Row-major, channel-interleaved floating-point image. Values are kept
// unquantized; call quantize() before writing an 8-bit file.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const noexcept { return values_.empty(); }

  double& at(int x, int y, int c = 0) { return values_[index(x, y, c)]; }
  double at(int x, int y, int c = 0) const { return values_[index(x, y, c)]; }

  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  bool same_size(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<double> values_;
};

// Round to nearest and clamp to [0, 255].
Image quantize(const Image& image);

// Binary (P5/P6) and ASCII (P2/P3) netpbm, maxval <= 255.
Image read_pnm(const std::filesystem::path& path);
// Writes P5 for one channel, P6 for three. Values must already be integers in [0, 255].
void write_pnm(const Image& image, const std::filesystem::path& path);

// Single-channel float raster (distance or depth maps). Header is two text
// lines holding width then height; the body is width*height little-endian
// float32 values, row-major. Files ending in ".txt" carry a whitespace
// separated decimal body instead.
Image read_raster(const std::filesystem::path& path);
void write_raster(const Image& raster, const std::filesystem::path& path);

}  // namespace fogest
