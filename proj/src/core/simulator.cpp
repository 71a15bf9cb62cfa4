#include "fogest/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "fogest/error.hpp"
#include "json.hpp"

namespace fogest {

using nlohmann::json;

void validate(const SceneSpec& spec) {
  require(spec.landmarks > 0, "scene needs at least one landmark");
  if (spec.lc_range)
    require(std::isfinite(spec.lc_range->lower) && std::isfinite(spec.lc_range->upper) &&
                spec.lc_range->lower <= spec.lc_range->upper,
            "clear-radiance range must be finite and ordered");
  require(std::isfinite(spec.distance_jitter) && spec.distance_jitter >= 0.0, "distance jitter must be non-negative");
  if (spec.trajectory) {
    const auto& t = *spec.trajectory;
    require(t.frames > 0, "trajectory needs at least one frame");
    require(t.spacing > 0.0 && std::isfinite(t.spacing), "frame spacing must be positive");
    require(t.x_min <= t.x_max, "landmark x range is inverted");
    require(t.lateral >= 0.0 && t.height >= 0.0, "landmark spread must be non-negative");
    require(t.min_range > 0.0 && t.min_range <= t.max_range, "observation range must be positive and ordered");
    require(t.dropout >= 0.0 && t.dropout < 1.0, "dropout probability must lie in [0, 1)");
  } else if (!spec.distances.empty()) {
    for (double d : spec.distances) require(std::isfinite(d) && d > 0.0, "scheduled distances must be positive");
  } else {
    const auto& a = spec.approach;
    require(a.frames >= 1, "approach needs at least one frame");
    require(std::isfinite(a.far) && std::isfinite(a.near) && a.near > 0.0 && a.far >= a.near,
            "approach distances must satisfy 0 < near <= far");
  }
}

void validate(const NoiseSpec& noise) {
  require(std::isfinite(noise.std) && noise.std >= 0.0, "noise standard deviation must be non-negative");
  require(noise.outlier_fraction >= 0.0 && noise.outlier_fraction <= 1.0, "outlier fraction must lie in [0, 1]");
  require(std::isfinite(noise.outlier_magnitude) && noise.outlier_magnitude >= 0.0,
          "outlier magnitude must be non-negative");
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  // splitmix64 finalizer over a combination of both inputs
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

std::vector<double> schedule(const SceneSpec& spec) {
  if (!spec.distances.empty()) return spec.distances;
  const auto& a = spec.approach;
  std::vector<double> d(static_cast<std::size_t>(a.frames));
  for (int k = 0; k < a.frames; ++k)
    d[static_cast<std::size_t>(k)] = a.frames == 1 ? a.far : a.far + (a.near - a.far) * k / (a.frames - 1);
  return d;
}

class ObservationNoise {
 public:
  ObservationNoise(const NoiseSpec& spec, const GammaMap& map, std::mt19937_64& rng)
      : spec_(spec), map_(map), rng_(rng) {}

  // Clean radiance in, recorded intensity out.
  double observe(double radiance) {
    if (spec_.domain == NoiseDomain::Radiance && spec_.std > 0.0) radiance += spec_.std * gauss_(rng_);
    radiance = std::clamp(radiance, map_.min_radiance(), map_.max_radiance());
    double i = map_.compress(radiance, true);
    if (spec_.domain == NoiseDomain::Intensity && spec_.std > 0.0) i += spec_.std * gauss_(rng_);
    if (spec_.outlier_fraction > 0.0 && unit_(rng_) < spec_.outlier_fraction) {
      const double magnitude = spec_.outlier_magnitude * (0.5 + 0.5 * unit_(rng_));
      i += unit_(rng_) < 0.5 ? -magnitude : magnitude;
    }
    i = std::clamp(i, 0.0, 255.0);
    return spec_.quantize ? std::round(i) : i;
  }

 private:
  const NoiseSpec& spec_;
  const GammaMap& map_;
  std::mt19937_64& rng_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

ParameterBounds lc_range_for(const SceneSpec& spec, const GammaMap& map) {
  return spec.lc_range ? *spec.lc_range : ParameterBounds{map.expand(20.0), map.expand(235.0)};
}

}  // namespace

Scene generate_scene(const SceneSpec& spec, const FogParams& fog, const GammaMap& map, const NoiseSpec& noise) {
  validate(spec);
  validate(fog);
  validate(noise);
  std::mt19937_64 rng(noise.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const ParameterBounds range = lc_range_for(spec, map);

  Scene scene{LocalMapGraph(1), GroundTruth{fog, map, {}}};
  ObservationNoise observe(noise, map, rng);

  if (!spec.trajectory) {
    const std::vector<double> dist = schedule(spec);
    std::vector<double> jitter(static_cast<std::size_t>(spec.landmarks));
    for (int n = 0; n < spec.landmarks; ++n) {
      scene.truth.lc[n] = range.lower + (range.upper - range.lower) * unit(rng);
      jitter[static_cast<std::size_t>(n)] = spec.distance_jitter * unit(rng);
      scene.graph.add_landmark(n);
    }
    for (std::size_t m = 0; m < dist.size(); ++m) {
      scene.graph.add_frame(static_cast<FrameId>(m), Vec3{dist.front() - dist[m], 0.0, 0.0});
      for (int n = 0; n < spec.landmarks; ++n) {
        const double d = dist[m] + jitter[static_cast<std::size_t>(n)];
        const double i = observe.observe(predict_radiance(scene.truth.lc[n], fog, d));
        scene.graph.add_edge({static_cast<FrameId>(m), n, d, {i, 0.0, 0.0}});
      }
    }
    return scene;
  }

  const auto& t = *spec.trajectory;
  std::vector<Vec3> positions;
  for (int n = 0; n < spec.landmarks; ++n) {
    scene.truth.lc[n] = range.lower + (range.upper - range.lower) * unit(rng);
    const Vec3 p{t.x_min + (t.x_max - t.x_min) * unit(rng), t.lateral * (2.0 * unit(rng) - 1.0), t.height * unit(rng)};
    positions.push_back(p);
    scene.graph.add_landmark(n, p);
  }
  for (int m = 0; m < t.frames; ++m) {
    const Vec3 camera{m * t.spacing, 0.0, 0.0};
    scene.graph.add_frame(m, camera);
    for (int n = 0; n < spec.landmarks; ++n) {
      const Vec3& p = positions[static_cast<std::size_t>(n)];
      const double d = distance(camera, p);
      if (p.x <= camera.x || d < t.min_range || d > t.max_range) continue;
      if (unit(rng) < t.dropout) continue;
      const double i = observe.observe(predict_radiance(scene.truth.lc[n], fog, d));
      scene.graph.add_edge({m, n, d, {i, 0.0, 0.0}});
    }
  }
  return scene;
}

Scene generate_scene(const SceneSpec& spec, const IntensityFogParams& fog, const NoiseSpec& noise) {
  validate(fog);
  return generate_scene(spec, FogParams{fog.beta_int, fog.a}, GammaMap::identity(), noise);
}

std::string ground_truth_json(const GroundTruth& truth) {
  json doc;
  doc["format"] = "fogest-truth";
  doc["version"] = 1;
  doc["beta"] = truth.fog.beta;
  doc["l_inf"] = truth.fog.l_inf;
  doc["visibility"] = visibility_from_beta(truth.fog.beta);
  doc["gamma"] = {{"alpha", truth.map.alpha()}, {"gamma", truth.map.gamma()}, {"zeta", truth.map.zeta()}};
  json lc = json::array();
  for (const auto& [id, value] : truth.lc) lc.push_back({{"landmark", id}, {"lc", value}});
  doc["landmarks"] = std::move(lc);
  return doc.dump(2) + "\n";
}

void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
  out << ground_truth_json(truth);
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));
  try {
    const json doc = json::parse(in);
    if (doc.at("format") != "fogest-truth") fail(ErrorCode::Parse, "not a ground-truth file");
    GroundTruth t;
    t.fog = {doc.at("beta").get<double>(), doc.at("l_inf").get<double>()};
    const auto& g = doc.at("gamma");
    t.map = GammaMap(g.at("alpha").get<double>(), g.at("gamma").get<double>(), g.at("zeta").get<double>());
    for (const auto& r : doc.at("landmarks")) t.lc[r.at("landmark").get<LandmarkId>()] = r.at("lc").get<double>();
    return t;
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, fmt::format("'{}': {}", path.string(), e.what()));
  }
}

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const char* where) {
  if (!obj.is_object()) fail(ErrorCode::Parse, fmt::format("'{}' must be an object", where));
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
    if (!known) fail(ErrorCode::Parse, fmt::format("unknown key '{}' in '{}'", item.key(), where));
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

SceneConfig parse_scene_config(const std::string& json_text) {
  SceneConfig cfg;
  try {
    const json doc = json::parse(json_text);
    check_keys(doc, {"landmarks", "lc_range", "distances", "approach", "distance_jitter", "trajectory", "fog", "noise"},
               "scene");
    read_opt(doc, "landmarks", cfg.scene.landmarks);
    if (doc.contains("lc_range")) {
      const auto r = doc.at("lc_range").get<std::vector<double>>();
      if (r.size() != 2) fail(ErrorCode::Parse, "'lc_range' needs two values");
      cfg.scene.lc_range = ParameterBounds{r[0], r[1]};
    }
    read_opt(doc, "distances", cfg.scene.distances);
    read_opt(doc, "distance_jitter", cfg.scene.distance_jitter);
    if (doc.contains("approach")) {
      const auto& a = doc.at("approach");
      check_keys(a, {"far", "near", "frames"}, "approach");
      read_opt(a, "far", cfg.scene.approach.far);
      read_opt(a, "near", cfg.scene.approach.near);
      read_opt(a, "frames", cfg.scene.approach.frames);
    }
    if (doc.contains("trajectory")) {
      const auto& t = doc.at("trajectory");
      check_keys(t, {"frames", "spacing", "x_min", "x_max", "lateral", "height", "min_range", "max_range", "dropout"},
                 "trajectory");
      TrajectorySpec ts;
      read_opt(t, "frames", ts.frames);
      read_opt(t, "spacing", ts.spacing);
      read_opt(t, "x_min", ts.x_min);
      read_opt(t, "x_max", ts.x_max);
      read_opt(t, "lateral", ts.lateral);
      read_opt(t, "height", ts.height);
      read_opt(t, "min_range", ts.min_range);
      read_opt(t, "max_range", ts.max_range);
      read_opt(t, "dropout", ts.dropout);
      cfg.scene.trajectory = ts;
    }
    if (doc.contains("fog")) {
      const auto& f = doc.at("fog");
      check_keys(f, {"beta", "visibility", "l_inf"}, "fog");
      if (f.contains("beta") && f.contains("visibility")) fail(ErrorCode::Parse, "give either 'beta' or 'visibility'");
      if (f.contains("beta")) cfg.fog.beta = f.at("beta").get<double>();
      if (f.contains("visibility")) cfg.fog.beta = beta_from_visibility(f.at("visibility").get<double>());
      read_opt(f, "l_inf", cfg.fog.l_inf);
    }
    if (doc.contains("noise")) {
      const auto& n = doc.at("noise");
      check_keys(n, {"std", "seed", "quantize", "domain", "outlier_fraction", "outlier_magnitude"}, "noise");
      read_opt(n, "std", cfg.noise.std);
      read_opt(n, "seed", cfg.noise.seed);
      read_opt(n, "quantize", cfg.noise.quantize);
      read_opt(n, "outlier_fraction", cfg.noise.outlier_fraction);
      read_opt(n, "outlier_magnitude", cfg.noise.outlier_magnitude);
      if (n.contains("domain")) {
        const auto d = n.at("domain").get<std::string>();
        if (d == "intensity")
          cfg.noise.domain = NoiseDomain::Intensity;
        else if (d == "radiance")
          cfg.noise.domain = NoiseDomain::Radiance;
        else
          fail(ErrorCode::Parse, fmt::format("unknown noise domain '{}'", d));
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, fmt::format("scene config: {}", e.what()));
  }
  validate(cfg.scene);
  validate(cfg.fog);
  validate(cfg.noise);
  return cfg;
}

SceneConfig read_scene_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_scene_config(text.str());
  } catch (const Error& e) {
    fail(e.code(), fmt::format("'{}': {}", path.string(), e.what()));
  }
}

std::vector<std::set<FrameId>> sliding_windows(const LocalMapGraph& graph, int window, int stride) {
  require(window > 0 && stride > 0, "window and stride must be positive");
  std::vector<FrameId> ids;
  for (const auto& [id, pos] : graph.frames()) ids.push_back(id);
  std::vector<std::set<FrameId>> out;
  if (ids.empty()) return out;
  const std::size_t w = static_cast<std::size_t>(window);
  if (ids.size() <= w) {
    out.emplace_back(ids.begin(), ids.end());
    return out;
  }
  for (std::size_t start = 0; start + w <= ids.size(); start += static_cast<std::size_t>(stride))
    out.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(start),
                     ids.begin() + static_cast<std::ptrdiff_t>(start + w));
  return out;
}

GammaMap normalized_gamma_map(double gamma) {
  require(std::isfinite(gamma) && gamma > 0.0, "gamma must be positive");
  return GammaMap(std::pow(255.0, 1.0 - gamma), gamma, 0.0);
}

GammaBiasResult gamma_bias_experiment(const GammaBiasConfig& config) {
  require(config.trials >= 1, "the experiment needs at least one trial");
  validate(config.scene);
  validate(config.noise);
  validate(config.estimator);
  require(!config.scene.trajectory, "the gamma-bias experiment uses a distance schedule, not a trajectory");
  const FogParams fog{config.beta, config.l_inf};
  validate(fog);
  const GammaMap& map = config.map;
  require(config.l_inf >= map.min_radiance() && config.l_inf <= map.max_radiance(),
          "atmospheric light lies outside the map's radiance range");

  // The radiance run uses the affine map spanning the same radiance range,
  // which is the identity for normalized maps.
  const GammaMap radiance_map((map.max_radiance() - map.min_radiance()) / 255.0, 1.0, map.min_radiance());
  const ParameterBounds range = lc_range_for(config.scene, map);
  const std::vector<double> dist = schedule(config.scene);

  GammaBiasResult result;
  result.trials.resize(static_cast<std::size_t>(config.trials));
  for (int k = 0; k < config.trials; ++k) {
    GammaBiasTrial& trial = result.trials[static_cast<std::size_t>(k)];
    trial.index = k;
    std::mt19937_64 rng(derive_seed(config.noise.seed, static_cast<std::uint64_t>(k)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    ObservationSet radiance_obs, intensity_obs;
    for (int n = 0; n < config.scene.landmarks; ++n) {
      const double lc = range.lower + (range.upper - range.lower) * unit(rng);
      const double jitter = config.scene.distance_jitter * unit(rng);
      LandmarkObservations lr{n, {}}, li{n, {}};
      for (std::size_t m = 0; m < dist.size(); ++m) {
        const double d = dist[m] + jitter;
        double l = predict_radiance(lc, fog, d);
        double i = 0.0;
        if (config.noise.domain == NoiseDomain::Radiance) {
          l = std::clamp(l + config.noise.std * gauss(rng), map.min_radiance(), map.max_radiance());
          i = map.compress(l, true);
          if (config.noise.quantize) i = std::round(i);
        } else {
          i = std::clamp(map.compress(l, true) + config.noise.std * gauss(rng), 0.0, 255.0);
          if (config.noise.quantize) i = std::round(i);
          l = map.expand(i);
        }
        lr.pairs.push_back({static_cast<FrameId>(m), d, l});
        li.pairs.push_back({static_cast<FrameId>(m), d, i});
      }
      radiance_obs.groups.push_back(std::move(lr));
      intensity_obs.groups.push_back(std::move(li));
    }

    try {
      EstimatorState sr, si;
      trial.beta_radiance = estimate(radiance_obs, radiance_map, sr, config.estimator).estimate.beta;
      trial.beta_intensity = estimate(intensity_obs, GammaMap::identity(), si, config.estimator).estimate.beta;
      trial.ok = true;
    } catch (const Error& e) {
      trial.error = e.what();
      ++result.failed;
    }
  }

  std::size_t ok = 0, greater = 0;
  for (const auto& t : result.trials) {
    if (!t.ok) continue;
    ++ok;
    result.mean_beta_radiance += t.beta_radiance;
    result.mean_beta_intensity += t.beta_intensity;
    if (t.beta_intensity > t.beta_radiance) ++greater;
  }
  if (ok) {
    result.mean_beta_radiance /= static_cast<double>(ok);
    result.mean_beta_intensity /= static_cast<double>(ok);
    result.fraction_intensity_greater = static_cast<double>(greater) / static_cast<double>(ok);
  }
  return result;
}

}  // namespace fogest
