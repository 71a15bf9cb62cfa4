#include "fogest/image.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/core.h>

#include "fogest/error.hpp"

namespace fogest {

Image::Image(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  require(width > 0 && height > 0, "image dimensions must be positive");
  require(channels == 1 || channels == 3, "image must have 1 or 3 channels");
  values_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Image quantize(const Image& image) {
  Image out = image;
  for (double& v : out.values()) v = std::clamp(std::round(v), 0.0, 255.0);
  return out;
}

namespace {

// Reads the next header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string token;
  while (in >> token) {
    if (token[0] != '#') return token;
    std::string rest;
    std::getline(in, rest);
  }
  fail(ErrorCode::Parse, "unexpected end of netpbm header");
}

int parse_int(const std::string& token, const char* what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(token, &used);
    if (used == token.size()) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::Parse, fmt::format("bad netpbm {} '{}'", what, token));
}

}  // namespace

Image read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));

  const std::string magic = next_token(in);
  int channels = 0;
  bool binary = false;
  if (magic == "P2") channels = 1;
  else if (magic == "P3") channels = 3;
  else if (magic == "P5") channels = 1, binary = true;
  else if (magic == "P6") channels = 3, binary = true;
  else fail(ErrorCode::Parse, fmt::format("'{}': unsupported netpbm magic '{}'", path.string(), magic));

  const int width = parse_int(next_token(in), "width");
  const int height = parse_int(next_token(in), "height");
  const int maxval = parse_int(next_token(in), "maxval");
  if (width <= 0 || height <= 0) fail(ErrorCode::Parse, "netpbm dimensions must be positive");
  if (maxval <= 0 || maxval > 255) fail(ErrorCode::Parse, "only 8-bit netpbm files are supported");

  Image image(width, height, channels);
  auto& values = image.values();
  if (binary) {
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> raw(values.size());
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size()))
      fail(ErrorCode::Parse, fmt::format("'{}': truncated pixel data", path.string()));
    std::transform(raw.begin(), raw.end(), values.begin(), [](unsigned char c) { return double(c); });
  } else {
    for (double& v : values) {
      int sample = 0;
      if (!(in >> sample)) fail(ErrorCode::Parse, fmt::format("'{}': truncated pixel data", path.string()));
      v = sample;
    }
  }
  if (maxval != 255)
    for (double& v : values) v = v * 255.0 / maxval;
  return image;
}

void write_pnm(const Image& image, const std::filesystem::path& path) {
  require(!image.empty(), "cannot write an empty image");
  std::vector<unsigned char> raw(image.values().size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double v = image.values()[i];
    if (!(v >= 0.0 && v <= 255.0) || v != std::round(v))
      fail(ErrorCode::Range, "image must be quantized to integers in [0, 255] before writing");
    raw[i] = static_cast<unsigned char>(v);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
  out << (image.channels() == 1 ? "P5" : "P6") << '\n'
      << image.width() << ' ' << image.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

namespace {

bool is_text_raster(const std::filesystem::path& path) { return path.extension() == ".txt"; }

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xFF) << 24) | ((v & 0xFF00) << 8) | ((v >> 8) & 0xFF00) | (v >> 24);
  }
  return v;
}

}  // namespace

Image read_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));
  std::string line;
  int dims[2] = {0, 0};
  for (int& d : dims) {
    if (!std::getline(in, line)) fail(ErrorCode::Parse, fmt::format("'{}': missing raster header", path.string()));
    d = parse_int(line, "raster dimension");
  }
  if (dims[0] <= 0 || dims[1] <= 0) fail(ErrorCode::Parse, "raster dimensions must be positive");

  Image raster(dims[0], dims[1], 1);
  auto& values = raster.values();
  if (is_text_raster(path)) {
    for (double& v : values)
      if (!(in >> v)) fail(ErrorCode::Parse, fmt::format("'{}': truncated raster body", path.string()));
  } else {
    for (double& v : values) {
      std::uint32_t bits = 0;
      if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits))
        fail(ErrorCode::Parse, fmt::format("'{}': truncated raster body", path.string()));
      v = std::bit_cast<float>(to_little_endian(bits));
    }
  }
  return raster;
}

void write_raster(const Image& raster, const std::filesystem::path& path) {
  require(raster.channels() == 1 && !raster.empty(), "raster must be a non-empty single-channel image");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
  out << raster.width() << '\n' << raster.height() << '\n';
  if (is_text_raster(path)) {
    for (int y = 0; y < raster.height(); ++y) {
      for (int x = 0; x < raster.width(); ++x) out << (x ? " " : "") << fmt::format("{}", raster.at(x, y));
      out << '\n';
    }
  } else {
    for (double v : raster.values()) {
      const std::uint32_t bits = to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
}

}  // namespace fogest
