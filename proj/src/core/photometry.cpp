#include "fogest/photometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <fmt/core.h>

#include "fogest/error.hpp"
#include "fogest/text_util.hpp"
#include "json.hpp"

namespace fogest {

std::string_view to_string(Channel channel) noexcept {
  switch (channel) {
    case Channel::Gray: return "gray";
    case Channel::Red: return "red";
    case Channel::Green: return "green";
    case Channel::Blue: return "blue";
  }
  return "gray";
}

Channel parse_channel(std::string_view name) {
  if (name == "gray" || name == "grey" || name == "grayscale") return Channel::Gray;
  if (name == "red" || name == "r") return Channel::Red;
  if (name == "green" || name == "g") return Channel::Green;
  if (name == "blue" || name == "b") return Channel::Blue;
  fail(ErrorCode::InvalidArgument, fmt::format("unknown channel '{}'", name));
}

GammaMap::GammaMap(double alpha, double gamma, double zeta) : alpha_(alpha), gamma_(gamma), zeta_(zeta) {
  require(std::isfinite(alpha) && alpha > 0.0, fmt::format("gamma map alpha must be positive, got {}", alpha));
  require(std::isfinite(gamma) && gamma > 0.0, fmt::format("gamma map gamma must be positive, got {}", gamma));
  require(std::isfinite(zeta), "gamma map zeta must be finite");
}

double GammaMap::max_radiance() const noexcept { return alpha_ * std::pow(255.0, gamma_) + zeta_; }

double GammaMap::expand(double i) const {
  require(i >= 0.0 && i <= 255.0, fmt::format("intensity must lie in [0, 255], got {}", i));
  if (gamma_ == 1.0) return alpha_ * i + zeta_;
  return alpha_ * std::pow(i, gamma_) + zeta_;
}

double GammaMap::compress(double l, bool clamp) const {
  if (std::isnan(l)) fail(ErrorCode::Range, "radiance is NaN");
  const double lo = min_radiance();
  const double hi = max_radiance();
  if (l < lo || l > hi) {
    if (!clamp) fail(ErrorCode::Range, fmt::format("radiance {} outside representable range [{}, {}]", l, lo, hi));
    l = std::clamp(l, lo, hi);
  }
  const double base = (l - zeta_) / alpha_;
  const double i = gamma_ == 1.0 ? base : std::pow(base, 1.0 / gamma_);
  return std::min(i, 255.0);
}

namespace {

struct LinearFit {
  double alpha = 0.0;
  double zeta = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

// Closed-form (alpha, zeta) for fixed gamma.
LinearFit fit_for_gamma(std::span<const CalibrationSample> samples, double gamma) {
  const double n = static_cast<double>(samples.size());
  std::vector<double> x(samples.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    x[k] = std::pow(samples[k].intensity, gamma);
    mean_x += x[k];
    mean_y += samples[k].power;
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    sxx += (x[k] - mean_x) * (x[k] - mean_x);
    sxy += (x[k] - mean_x) * (samples[k].power - mean_y);
  }
  LinearFit fit;
  if (!(sxx > 0.0)) return fit;
  fit.alpha = sxy / sxx;
  fit.zeta = mean_y - fit.alpha * mean_x;
  fit.sse = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double r = samples[k].power - (fit.alpha * x[k] + fit.zeta);
    fit.sse += r * r;
  }
  return fit;
}

constexpr double kGammaMin = 0.2;
constexpr double kGammaMax = 5.0;
constexpr int kScanSteps = 480;

}  // namespace

GammaFit fit_gamma_map(std::span<const CalibrationSample> input) {
  require(input.size() >= 4, fmt::format("calibration needs at least 4 samples, got {}", input.size()));
  std::vector<CalibrationSample> samples(input.begin(), input.end());
  for (const auto& s : samples) {
    require(s.intensity >= 0.0 && s.intensity <= 255.0, "calibration intensity must lie in [0, 255]");
    require(std::isfinite(s.power), "calibration power must be finite");
  }
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) {
    return a.power != b.power ? a.power < b.power : a.intensity < b.intensity;
  });
  if (samples.front().intensity == samples.back().intensity)
    fail(ErrorCode::DegenerateData, "calibration intensities are constant");
  for (std::size_t k = 1; k < samples.size(); ++k)
    require(samples[k].intensity > samples[k - 1].intensity && samples[k].power > samples[k - 1].power,
            "calibration intensities must increase strictly with power");

  auto sse = [&](double gamma) { return fit_for_gamma(samples, gamma).sse; };

  int best = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  const double step = (kGammaMax - kGammaMin) / kScanSteps;
  for (int k = 0; k <= kScanSteps; ++k) {
    const double v = sse(kGammaMin + k * step);
    if (v < best_sse) best_sse = v, best = k;
  }

  double lo = kGammaMin + std::max(best - 1, 0) * step;
  double hi = kGammaMin + std::min(best + 1, kScanSteps) * step;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = sse(x1), f2 = sse(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    if (f1 <= f2) {
      hi = x2, x2 = x1, f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = sse(x1);
    } else {
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = sse(x2);
    }
  }

  double gamma = f1 <= f2 ? x1 : x2;
  LinearFit fit = fit_for_gamma(samples, gamma);
  // Edge of the scan range: keep the grid point if it beats the refined one.
  if (best_sse < fit.sse) {
    gamma = kGammaMin + best * step;
    fit = fit_for_gamma(samples, gamma);
  }
  if (!(fit.alpha > 0.0)) fail(ErrorCode::DegenerateData, "calibration fit produced a non-positive alpha");
  return {GammaMap(fit.alpha, gamma, fit.zeta), std::sqrt(fit.sse)};
}

ChannelGammaMaps read_gamma_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, fmt::format("cannot open gamma file '{}'", path.string()));
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, fmt::format("gamma file '{}': {}", path.string(), e.what()));
  }
  ChannelGammaMaps maps;
  try {
    if (doc.value("format", "") != "fogest-gamma")
      fail(ErrorCode::Parse, fmt::format("gamma file '{}': missing \"format\": \"fogest-gamma\"", path.string()));
    for (const auto& rec : doc.at("channels")) {
      const Channel c = parse_channel(rec.at("channel").get<std::string>());
      maps.set(c, GammaMap(rec.at("alpha").get<double>(), rec.at("gamma").get<double>(), rec.at("zeta").get<double>()));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, fmt::format("gamma file '{}': {}", path.string(), e.what()));
  }
  return maps;
}

void write_gamma_file(const ChannelGammaMaps& maps, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["format"] = "fogest-gamma";
  doc["version"] = 1;
  doc["channels"] = nlohmann::json::array();
  for (Channel c : {Channel::Gray, Channel::Red, Channel::Green, Channel::Blue}) {
    const auto& m = maps.get(c);
    doc["channels"].push_back(
        {{"channel", std::string(to_string(c))}, {"alpha", m.alpha()}, {"gamma", m.gamma()}, {"zeta", m.zeta()}});
  }
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, fmt::format("cannot write gamma file '{}'", path.string()));
  out << doc.dump(2) << '\n';
}

std::array<std::vector<CalibrationSample>, 4> read_calibration_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, fmt::format("cannot open calibration file '{}'", path.string()));
  std::array<std::vector<CalibrationSample>, 4> out;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split(line, ',');
    if (!header_seen) {
      header_seen = true;
      if (fields.size() != 3 || trim(fields[0]) != "channel")
        fail(ErrorCode::Parse, fmt::format("{}:{}: expected header 'channel,intensity,power'", path.string(), line_no));
      continue;
    }
    if (fields.size() != 3)
      fail(ErrorCode::Parse, fmt::format("{}:{}: expected 3 fields, got {}", path.string(), line_no, fields.size()));
    const Channel c = parse_channel(trim(fields[0]));
    CalibrationSample s;
    s.intensity = parse_double(fields[1], fmt::format("{}:{}", path.string(), line_no));
    s.power = parse_double(fields[2], fmt::format("{}:{}", path.string(), line_no));
    out[static_cast<int>(c)].push_back(s);
  }
  return out;
}

}  // namespace fogest
