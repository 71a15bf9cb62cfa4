#include "fogest/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/core.h>

#include "fogest/error.hpp"
#include "fogest/metrics.hpp"
#include "fogest/text_util.hpp"

namespace fogest {

Image dark_channel(const Image& image, int patch_radius) {
  require(!image.empty(), "dark channel of an empty image");
  require(patch_radius >= 0, "patch radius must be non-negative");
  const int w = image.width(), h = image.height();

  Image channel_min(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double m = image.at(x, y, 0);
      for (int c = 1; c < image.channels(); ++c) m = std::min(m, image.at(x, y, c));
      channel_min.at(x, y) = m;
    }

  // Separable min filter: rows, then columns.
  Image rows(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double m = channel_min.at(x, y);
      for (int k = -patch_radius; k <= patch_radius; ++k)
        m = std::min(m, channel_min.at(std::clamp(x + k, 0, w - 1), y));
      rows.at(x, y) = m;
    }
  Image out(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double m = rows.at(x, y);
      for (int k = -patch_radius; k <= patch_radius; ++k) m = std::min(m, rows.at(x, std::clamp(y + k, 0, h - 1)));
      out.at(x, y) = m;
    }
  return out;
}

std::vector<std::size_t> brightest_dark_pixels(const Image& dark) {
  require(!dark.empty() && dark.channels() == 1, "expected a single-channel dark-channel map");
  const auto& v = dark.values();
  const std::size_t count = std::max<std::size_t>(1, v.size() / 1000);
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(),
                    [&](std::size_t a, std::size_t b) { return v[a] > v[b] || (v[a] == v[b] && a < b); });
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {

template <typename Reduce>
std::vector<double> atmospheric_light(const Image& image, int patch_radius, Reduce reduce) {
  const auto pixels = brightest_dark_pixels(dark_channel(image, patch_radius));
  std::vector<double> out;
  for (int c = 0; c < image.channels(); ++c) {
    std::vector<double> values;
    values.reserve(pixels.size());
    for (std::size_t p : pixels)
      values.push_back(image.values()[p * static_cast<std::size_t>(image.channels()) + static_cast<std::size_t>(c)]);
    out.push_back(reduce(std::move(values)));
  }
  return out;
}

}  // namespace

std::vector<double> estimate_a_original(const Image& image, int patch_radius) {
  return atmospheric_light(image, patch_radius,
                           [](std::vector<double> v) { return *std::max_element(v.begin(), v.end()); });
}

std::vector<double> estimate_a_modified(const Image& image, int patch_radius) {
  return atmospheric_light(image, patch_radius, [](std::vector<double> v) { return median(std::move(v)); });
}

void validate(const HistogramConfig& config) {
  require(std::isfinite(config.bin_width) && config.bin_width > 0.0, "histogram bin width must be positive");
  require(std::isfinite(config.min_inverse_depth_gap) && config.min_inverse_depth_gap >= 0.0,
          "inverse-depth gap must be non-negative");
  if (config.bounds) require(config.bounds->lower <= config.bounds->upper, "histogram bounds are inverted");
}

BetaHistogram estimate_beta_histogram(const ObservationSet& obs, double a, const HistogramConfig& config) {
  validate(config);
  require(std::isfinite(a), "atmospheric light must be finite");
  BetaHistogram hist;
  hist.bin_width = config.bin_width;
  for (const auto& group : obs.groups) {
    const auto& p = group.pairs;
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = i + 1; j < p.size(); ++j) {
        const double d1 = p[i].distance, d2 = p[j].distance;
        if (std::abs(1.0 / d1 - 1.0 / d2) < config.min_inverse_depth_gap) continue;
        const double e1 = p[i].radiance - a, e2 = p[j].radiance - a;
        if (e1 == 0.0 || e2 == 0.0 || (e1 > 0.0) != (e2 > 0.0)) continue;
        const double beta = std::log(e2 / e1) / (d1 - d2);
        if (!std::isfinite(beta)) continue;
        if (config.bounds && (beta < config.bounds->lower || beta > config.bounds->upper)) {
          ++hist.rejected_by_bounds;
          continue;
        }
        ++hist.bins[std::llround(beta / config.bin_width)];
        ++hist.accepted;
      }
  }
  if (hist.accepted == 0)
    fail(ErrorCode::NotEnoughData, "no observation pair yields a usable scattering coefficient");
  std::size_t best = 0;
  for (const auto& [index, count] : hist.bins)
    if (count > best) {
      best = count;
      hist.beta = hist.center(index);
    }
  // A bin straddling a bound can have its centre just outside it.
  if (config.bounds) hist.beta = std::clamp(hist.beta, config.bounds->lower, config.bounds->upper);
  return hist;
}

void write_histogram(const BetaHistogram& histogram, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
  out << "# bin_center count\n";
  for (const auto& [index, count] : histogram.bins) out << format_double(histogram.center(index)) << ' ' << count << '\n';
}

}  // namespace fogest
