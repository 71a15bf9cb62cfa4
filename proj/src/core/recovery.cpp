#include "fogest/recovery.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <future>
#include <random>

#include <fmt/core.h>

#include "fogest/error.hpp"
#include "fogest/text_util.hpp"

namespace fogest {

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::Full: return "ours";
    case Method::OneStage: return "ours-one-stage";
    case Method::UniformWeight: return "ours-uniform-weight";
    case Method::LiModified: return "li-modified";
    case Method::LiOriginal: return "li-original";
  }
  return "ours";
}

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods)
    if (to_string(m) == name) return m;
  fail(ErrorCode::InvalidArgument, fmt::format("unknown method '{}'", name));
}

Image render_foggy_view(const ViewSpec& spec, const IntensityFogParams& fog, std::uint64_t seed) {
  require(spec.width >= 8 && spec.height >= 8, "view must be at least 8x8 pixels");
  require(spec.noise_std >= 0.0 && spec.lamps >= 0, "invalid view noise or lamp count");
  validate(fog);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const int w = spec.width, h = spec.height;
  const double f = w;             // focal length in pixels
  const double camera_height = 1.5;
  const double horizon = 0.4 * h;
  constexpr double kSky = 1e6;

  Image clear(w, h, 1);
  Image dist(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (y < horizon) {
        clear.at(x, y) = 235.0;
        dist.at(x, y) = kSky;
      } else {
        clear.at(x, y) = std::clamp(80.0 + 15.0 * std::sin(0.7 * x) * std::cos(0.3 * y) + 10.0 * gauss(rng), 0.0, 255.0);
        dist.at(x, y) = camera_height * f / (y - horizon + 0.5);
      }
    }

  // Buildings standing on the ground plane, painted far to near.
  struct Box {
    double d, x0, width, height, j;
  };
  std::vector<Box> boxes;
  for (int k = 0; k < 4; ++k)
    boxes.push_back({15.0 + 45.0 * unit(rng), unit(rng) * w, 4.0 + 6.0 * unit(rng), 4.0 + 8.0 * unit(rng),
                     30.0 + 170.0 * unit(rng)});
  std::sort(boxes.begin(), boxes.end(), [](const Box& a, const Box& b) { return a.d > b.d; });
  for (const auto& b : boxes) {
    const int bottom = static_cast<int>(horizon + camera_height * f / b.d);
    const int top = static_cast<int>(bottom - b.height * f / b.d);
    const int x0 = static_cast<int>(b.x0), x1 = static_cast<int>(b.x0 + b.width * f / b.d);
    for (int y = std::max(0, top); y < std::min(h, bottom); ++y)
      for (int x = std::max(0, x0); x < std::min(w, x1); ++x) {
        clear.at(x, y) = b.j;
        dist.at(x, y) = b.d;
      }
  }

  // Small saturated lamps seen against the sky.
  for (int k = 0; k < spec.lamps; ++k) {
    const int cx = static_cast<int>(unit(rng) * (w - 2));
    const int cy = static_cast<int>(unit(rng) * (horizon - 2.0));
    const double d = 10.0 + 15.0 * unit(rng);
    for (int y = cy; y < cy + 2; ++y)
      for (int x = cx; x < cx + 2; ++x) {
        clear.at(x, y) = 255.0;
        dist.at(x, y) = d;
      }
  }

  const IntensityFogParams params[] = {fog};
  Image foggy = synthesize_fog_image(clear, dist, params);
  if (spec.noise_std > 0.0)
    for (double& v : foggy.values()) v += spec.noise_std * gauss(rng);
  return quantize(foggy);
}

void validate(const RecoveryConfig& config) {
  require(!config.visibilities.empty(), "recovery suite needs at least one visibility level");
  for (double v : config.visibilities) require(std::isfinite(v) && v > 0.0, "visibility levels must be positive");
  require(!config.atmospheric_light.empty(), "recovery suite needs at least one scene");
  for (double a : config.atmospheric_light)
    require(a >= 0.0 && a <= 255.0, "atmospheric light must lie in [0, 255]");
  require(config.landmarks > 0, "recovery suite needs landmarks");
  require(config.window >= 2, "local-map window needs at least two frames");
  require(config.patch_radius >= 0, "patch radius must be non-negative");
  require(!config.methods.empty(), "no methods selected");
  SceneSpec spec;
  spec.landmarks = config.landmarks;
  spec.trajectory = config.trajectory;
  validate(spec);
  validate(config.noise);
  validate(config.estimator);
  validate(config.histogram);
}

const MethodSummary& RecoveryReport::find(Method method) const {
  for (const auto& s : summary)
    if (s.method == method) return s;
  fail(ErrorCode::InvalidArgument, fmt::format("method '{}' was not run", to_string(method)));
}

namespace {

EstimatorConfig variant(const EstimatorConfig& base, Method method) {
  EstimatorConfig cfg = base;
  if (method == Method::OneStage) cfg.two_stage = false;
  if (method == Method::UniformWeight) cfg.weighting = Weighting::Uniform;
  return cfg;
}

bool is_ours(Method m) { return m == Method::Full || m == Method::OneStage || m == Method::UniformWeight; }

}  // namespace

namespace {

struct ScenarioResult {
  std::vector<RecoveryEstimate> rows;
  std::vector<ScenarioMetrics> metrics;
};

ScenarioResult run_scenario(const RecoveryConfig& config, std::size_t vi, std::size_t si) {
  const GammaMap identity;
  const double visibility = config.visibilities[vi];
  const double a = config.atmospheric_light[si];
  const std::string scenario = fmt::format("V{}-s{}", format_double(visibility), si);
  const std::uint64_t scene_seed = derive_seed(config.seed, vi * 1000 + si);
  const FogParams fog{beta_from_visibility(visibility), a};

  SceneSpec spec;
  spec.landmarks = config.landmarks;
  spec.trajectory = config.trajectory;
  NoiseSpec noise = config.noise;
  noise.seed = scene_seed;
  const Scene scene = generate_scene(spec, fog, identity, noise);

  ScenarioResult out;
  std::vector<EstimatorState> states(config.methods.size());
  EstimatorState gate;
  std::vector<FrameId> ids;
  for (const auto& [id, pos] : scene.graph.frames()) ids.push_back(id);

  int update = 0;
  for (std::size_t end = static_cast<std::size_t>(config.window) - 1; end < ids.size(); ++end) {
    const Vec3 position = scene.graph.frames().at(ids[end]).value_or(Vec3{});
    if (!should_update(position, gate, config.estimator)) continue;
    mark_updated(gate, position);

    const std::set<FrameId> window(ids.begin() + static_cast<std::ptrdiff_t>(end + 1 - config.window),
                                   ids.begin() + static_cast<std::ptrdiff_t>(end + 1));
    const LocalMapGraph local = scene.graph.restrict_to_frames(window);
    const ObservationSet obs = generate_dr_pairs(local, identity, Channel::Gray, config.estimator.thresholds);
    Image view;

    for (std::size_t k = 0; k < config.methods.size(); ++k) {
      const Method method = config.methods[k];
      RecoveryEstimate row;
      row.scenario = scenario;
      row.visibility = visibility;
      row.scene = static_cast<int>(si);
      row.update = update;
      row.frame = ids[end];
      row.method = method;
      row.beta_true = fog.beta;
      row.l_inf_true = fog.l_inf;
      try {
        if (is_ours(method)) {
          const auto r = estimate(obs, identity, states[k], variant(config.estimator, method));
          row.beta = r.estimate.beta;
          row.l_inf = r.estimate.l_inf;
        } else {
          if (view.empty())
            view = render_foggy_view(config.view, {fog.beta, a}, derive_seed(scene_seed, static_cast<std::uint64_t>(update)));
          const bool modified = method == Method::LiModified;
          const double a_est = modified ? estimate_a_modified(view, config.patch_radius)[0]
                                        : estimate_a_original(view, config.patch_radius)[0];
          HistogramConfig hc = config.histogram;
          if (modified)
            hc.bounds = config.estimator.beta_bounds;
          else
            hc.bounds.reset();
          row.beta = estimate_beta_histogram(obs, a_est, hc).beta;
          row.l_inf = a_est;
        }
        row.ok = true;
        row.status = "ok";
      } catch (const Error& e) {
        row.status = e.what();
      }
      out.rows.push_back(std::move(row));
    }
    ++update;
  }

  for (Method method : config.methods) {
    ScenarioMetrics sm;
    sm.scenario = scenario;
    sm.method = method;
    std::vector<double> b, l;
    for (const auto& r : out.rows) {
      if (r.method != method) continue;
      if (r.ok) {
        b.push_back(r.beta);
        l.push_back(r.l_inf);
      } else {
        ++sm.failures;
      }
    }
    sm.estimates = b.size();
    if (!b.empty()) {
      sm.beta = compute_metrics(b, fog.beta);
      sm.l_inf = compute_metrics(l, fog.l_inf);
    }
    out.metrics.push_back(sm);
  }
  return out;
}

}  // namespace

RecoveryReport run_recovery_suite(const RecoveryConfig& config) {
  validate(config);
  const std::size_t nv = config.visibilities.size(), ns = config.atmospheric_light.size();
  std::vector<ScenarioResult> results(nv * ns);

  // Scenarios are independent; results land in fixed slots so the report
  // does not depend on scheduling.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < results.size(); k = next++) results[k] = run_scenario(config, k / ns, k % ns);
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(results.size())));
  std::vector<std::future<void>> pool;
  for (unsigned t = 1; t < threads; ++t) pool.push_back(std::async(std::launch::async, worker));
  worker();
  for (auto& f : pool) f.get();

  RecoveryReport report;
  for (auto& r : results) {
    report.estimates.insert(report.estimates.end(), r.rows.begin(), r.rows.end());
    report.scenarios.insert(report.scenarios.end(), r.metrics.begin(), r.metrics.end());
  }

  for (Method method : config.methods) {
    MethodSummary s;
    s.method = method;
    std::vector<MetricsReport> b, l;
    for (const auto& sm : report.scenarios) {
      if (sm.method != method) continue;
      s.failures += sm.failures;
      if (sm.estimates == 0) continue;
      b.push_back(sm.beta);
      l.push_back(sm.l_inf);
    }
    s.scenarios = b.size();
    if (!b.empty()) {
      s.beta = average_metrics(b);
      s.l_inf = average_metrics(l);
    }
    report.summary.push_back(s);
  }
  return report;
}

void write_recovery_report(const RecoveryReport& report, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  {
    const auto path = directory / "recovery_estimates.csv";
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
    out << "scenario,visibility,scene,update,frame,method,beta,beta_true,l_inf,l_inf_true,status\n";
    for (const auto& r : report.estimates) {
      std::string status = r.status;
      std::replace(status.begin(), status.end(), ',', ';');
      out << r.scenario << ',' << format_double(r.visibility) << ',' << r.scene << ',' << r.update << ',' << r.frame
          << ',' << to_string(r.method) << ',' << format_double(r.beta) << ',' << format_double(r.beta_true) << ','
          << format_double(r.l_inf) << ',' << format_double(r.l_inf_true) << ',' << status << '\n';
    }
  }
  std::vector<MetricsRow> rows;
  for (const auto& s : report.scenarios) {
    if (s.estimates == 0) continue;
    const std::string label = fmt::format("{}@{}", to_string(s.method), s.scenario);
    rows.push_back({label, "beta", s.beta});
    rows.push_back({label, "l_inf", s.l_inf});
  }
  write_metrics_csv(rows, directory / "recovery_scenarios.csv");
  rows.clear();
  for (const auto& s : report.summary) {
    if (s.scenarios == 0) continue;
    rows.push_back({std::string(to_string(s.method)), "beta", s.beta});
    rows.push_back({std::string(to_string(s.method)), "l_inf", s.l_inf});
  }
  write_metrics_csv(rows, directory / "recovery_summary.csv");
}

HistogramDemo run_histogram_demo(const HistogramDemoConfig& config) {
  const IntensityFogParams fog{beta_from_visibility(config.visibility), config.a};
  SceneSpec spec;
  spec.landmarks = config.landmarks;
  spec.trajectory = config.trajectory;
  const Scene scene = generate_scene(spec, fog, config.noise);
  const ObservationSet obs = generate_dr_pairs(scene.graph, GammaMap{}, Channel::Gray, SelectionThresholds{2, 1});

  HistogramDemo demo;
  demo.beta_true = fog.beta_int;
  demo.a_used = config.a + config.a_error;
  HistogramConfig unbounded = config.histogram;
  unbounded.bounds.reset();
  HistogramConfig bounded = config.histogram;
  bounded.bounds = config.bounds;
  demo.unbounded = estimate_beta_histogram(obs, demo.a_used, unbounded);
  demo.bounded = estimate_beta_histogram(obs, demo.a_used, bounded);
  return demo;
}

}  // namespace fogest
