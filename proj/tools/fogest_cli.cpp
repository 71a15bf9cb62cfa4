// Command-line front end. Talks to the library only through the C API.
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fogest/fogest.h"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

class Failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void check(fogest_status status, const std::string& context) {
  if (status != FOGEST_OK)
    throw Failure(context + ": " + fogest_status_string(status) + ": " + fogest_last_error());
}

template <class T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};

using MapPtr = std::unique_ptr<fogest_map, Deleter<fogest_map, fogest_map_destroy>>;
using GammaPtr = std::unique_ptr<fogest_gamma_maps, Deleter<fogest_gamma_maps, fogest_gamma_maps_destroy>>;
using EstimatorPtr = std::unique_ptr<fogest_estimator, Deleter<fogest_estimator, fogest_estimator_destroy>>;
using ImagePtr = std::unique_ptr<fogest_image, Deleter<fogest_image, fogest_image_destroy>>;
using HistogramPtr = std::unique_ptr<fogest_histogram, Deleter<fogest_histogram, fogest_histogram_destroy>>;
using GammaBiasPtr = std::unique_ptr<fogest_gamma_bias, Deleter<fogest_gamma_bias, fogest_gamma_bias_destroy>>;
using RecoveryPtr = std::unique_ptr<fogest_recovery, Deleter<fogest_recovery, fogest_recovery_destroy>>;

// Shortest text that reads back to the same double.
std::string fmt_num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to `path`, or to stdout when it is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw Failure("cannot open " + path + " for writing");
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }
  void finish(const std::string& what) {
    out_->flush();
    if (!*out_) throw Failure("failed writing " + what);
  }

 private:
  std::ofstream file_;
  std::ostream* out_ = &std::cout;
};

GammaPtr load_gamma(const std::string& path) {
  fogest_gamma_maps* maps = nullptr;
  if (path.empty())
    check(fogest_gamma_maps_create_identity(&maps), "gamma");
  else
    check(fogest_gamma_maps_load(path.c_str(), &maps), "loading " + path);
  return GammaPtr(maps);
}

MapPtr load_map(const std::string& path) {
  fogest_map* map = nullptr;
  check(fogest_map_load(path.c_str(), &map), "loading " + path);
  return MapPtr(map);
}

fogest_channel parse_channel(const std::string& name) {
  fogest_channel c{};
  check(fogest_channel_parse(name.c_str(), &c), "channel");
  return c;
}

const char* channel_name(fogest_channel c) {
  switch (c) {
    case FOGEST_CHANNEL_RED: return "red";
    case FOGEST_CHANNEL_GREEN: return "green";
    case FOGEST_CHANNEL_BLUE: return "blue";
    default: return "gray";
  }
}

std::vector<int64_t> frame_ids(const fogest_map* map) {
  size_t count = 0;
  check(fogest_map_frame_ids(map, nullptr, 0, &count), "frames");
  std::vector<int64_t> ids(count);
  check(fogest_map_frame_ids(map, ids.data(), ids.size(), &count), "frames");
  return ids;
}

// Consecutive windows of `window` frames advancing by `stride`; a map with
// no more than `window` frames is a single window.
std::vector<std::vector<int64_t>> windows_of(const std::vector<int64_t>& ids, int window, int stride) {
  std::vector<std::vector<int64_t>> out;
  if (ids.empty()) return out;
  const size_t w = static_cast<size_t>(window);
  if (ids.size() <= w) return {ids};
  for (size_t start = 0; start + w <= ids.size(); start += static_cast<size_t>(stride))
    out.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(start),
                     ids.begin() + static_cast<std::ptrdiff_t>(start + w));
  return out;
}

std::string metrics_row(const fogest_metrics& m) {
  return std::to_string(m.count) + "," + fmt_num(m.rmse) + "," + fmt_num(m.rmse_rel) + "," + fmt_num(m.mae) + "," +
         fmt_num(m.mae_rel) + "," + fmt_num(m.sd) + "," + fmt_num(m.sd_rel) + "," + fmt_num(m.bias);
}

// ---- simulate ----

struct SimulateOptions {
  std::string config, gamma, out, truth;
  std::optional<uint64_t> seed;
};

int run_simulate(const SimulateOptions& o) {
  const std::string text = read_text(o.config);
  GammaPtr maps = o.gamma.empty() ? nullptr : load_gamma(o.gamma);
  fogest_map* raw = nullptr;
  char* truth = nullptr;
  const uint64_t seed = o.seed.value_or(0);
  check(fogest_simulate(text.c_str(), maps.get(), o.seed ? &seed : nullptr, &raw, &truth), "simulate");
  MapPtr map(raw);
  std::unique_ptr<char, decltype(&fogest_string_free)> truth_text(truth, fogest_string_free);
  check(fogest_map_save(map.get(), o.out.c_str()), "saving " + o.out);

  std::string truth_path = o.truth;
  if (truth_path.empty()) truth_path = std::filesystem::path(o.out).replace_extension(".truth.json").string();
  std::ofstream t(truth_path);
  t << truth_text.get() << '\n';
  if (!t) throw Failure("failed writing " + truth_path);

  size_t frames = 0, landmarks = 0, edges = 0;
  check(fogest_map_counts(map.get(), &frames, &landmarks, &edges), "counts");
  std::cerr << "wrote " << o.out << " (" << frames << " frames, " << landmarks << " landmarks, " << edges
            << " observations) and " << truth_path << '\n';
  return 0;
}

// ---- estimate ----

struct EstimatorFlags {
  fogest_estimator_config config{};
  bool one_stage = false;
  bool uniform = false;

  EstimatorFlags() { fogest_estimator_config_default(&config); }

  void add_to(CLI::App* app) {
    app->add_option("--eta", config.eta, "Slope threshold, intensity levels per metre")->capture_default_str();
    app->add_option("--delta", config.delta, "Huber threshold, intensity levels")->capture_default_str();
    app->add_option("--beta-min", config.beta_lower, "Lower bound on beta, 1/m")->capture_default_str();
    app->add_option("--beta-max", config.beta_upper, "Upper bound on beta, 1/m")->capture_default_str();
    app->add_option("--gate", config.update_gate, "Metres travelled between updates")->capture_default_str();
    app->add_option("--xi-f", config.xi_f, "Minimum frames observing a landmark")->capture_default_str();
    app->add_option("--xi-k", config.xi_k, "Minimum qualifying landmarks")->capture_default_str();
    app->add_option("--initial-beta", config.initial_beta, "Cold-start beta, 1/m")->capture_default_str();
    app->add_option("--max-iterations", config.max_iterations, "Solver iteration cap")->capture_default_str();
    app->add_flag("--one-stage", one_stage, "Skip the inlier-only second stage");
    app->add_flag("--uniform-weights", uniform, "Use unit weights instead of the adaptive ones");
  }

  fogest_estimator_config resolved() const {
    fogest_estimator_config c = config;
    if (one_stage) c.two_stage = 0;
    if (uniform) c.uniform_weights = 1;
    return c;
  }
};

struct EstimateOptions {
  std::string map, gamma, out, channel = "gray";
  int window = 0;
  int stride = 1;
  EstimatorFlags flags;
};

constexpr const char* kEstimateHeader =
    "frame,channel,beta,l_inf,visibility,inlier_fraction,stage1_cost,stage2_cost,status";

std::string estimate_row(int64_t frame, fogest_channel channel, const fogest_estimate& e) {
  return std::to_string(frame) + "," + channel_name(channel) + "," + fmt_num(e.beta) + "," + fmt_num(e.l_inf) + "," +
         fmt_num(e.visibility) + "," + fmt_num(e.inlier_fraction) + "," + fmt_num(e.stage1_cost) + "," +
         fmt_num(e.stage2_cost) + "," + (e.degraded ? "degraded" : "ok");
}

std::string csv_safe(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n') c = ';';
  return s;
}

int run_estimate(const EstimateOptions& o) {
  MapPtr map = load_map(o.map);
  GammaPtr maps = load_gamma(o.gamma);
  std::vector<fogest_channel> channels;
  if (o.channel == "rgb")
    channels = {FOGEST_CHANNEL_RED, FOGEST_CHANNEL_GREEN, FOGEST_CHANNEL_BLUE};
  else
    channels = {parse_channel(o.channel)};
  const fogest_estimator_config config = o.flags.resolved();
  const std::vector<int64_t> ids = frame_ids(map.get());
  if (ids.empty()) throw Failure("map has no frames");

  Output out(o.out);
  out.stream() << kEstimateHeader << '\n';

  if (o.window <= 0) {
    // One estimate over the whole map; a failure is fatal.
    for (fogest_channel c : channels) {
      fogest_estimator* raw = nullptr;
      check(fogest_estimator_create(&config, &raw), "estimator");
      EstimatorPtr est(raw);
      fogest_estimate e{};
      check(fogest_estimator_update(est.get(), map.get(), maps.get(), c, &e), "estimate");
      out.stream() << estimate_row(ids.back(), c, e) << '\n';
    }
    out.finish("estimates");
    return 0;
  }

  size_t successes = 0, attempts = 0;
  for (fogest_channel c : channels) {
    fogest_estimator* raw = nullptr;
    check(fogest_estimator_create(&config, &raw), "estimator");
    EstimatorPtr est(raw);
    for (const auto& window : windows_of(ids, o.window, o.stride)) {
      double pos[3];
      int has_pos = 0;
      check(fogest_map_frame_position(map.get(), window.back(), pos, &has_pos), "frame position");
      if (has_pos) {
        int go = 0;
        check(fogest_estimator_should_update(est.get(), pos, &go), "gate");
        if (!go) continue;
      }
      fogest_map* sub_raw = nullptr;
      check(fogest_map_restrict(map.get(), window.data(), window.size(), &sub_raw), "window");
      MapPtr sub(sub_raw);
      fogest_estimate e{};
      ++attempts;
      const fogest_status s = fogest_estimator_update(est.get(), sub.get(), maps.get(), c, &e);
      if (s == FOGEST_OK) {
        ++successes;
        out.stream() << estimate_row(window.back(), c, e) << '\n';
        if (has_pos) check(fogest_estimator_mark_updated(est.get(), pos), "gate");
      } else {
        out.stream() << window.back() << ',' << channel_name(c) << ",,,,,,," << "error: "
                     << csv_safe(fogest_last_error()) << '\n';
      }
    }
  }
  out.finish("estimates");
  if (attempts > 0 && successes == 0) throw Failure("no window produced an estimate");
  return 0;
}

// ---- baseline ----

struct BaselineOptions {
  std::string map, image, histogram, out, method = "li-modified", channel = "gray";
  std::optional<double> a;
  int patch_radius = 7;
  int xi_f = 4;
  fogest_histogram_config hist{};
  double beta_min = 0.001, beta_max = 0.2;

  BaselineOptions() { fogest_histogram_config_default(&hist); }
};

int run_baseline(const BaselineOptions& o) {
  const bool modified = o.method == "li-modified";
  double a = 0.0;
  if (o.a) {
    a = *o.a;
  } else {
    fogest_image* raw = nullptr;
    check(fogest_image_load_pnm(o.image.c_str(), &raw), "loading " + o.image);
    ImagePtr image(raw);
    double values[3];
    size_t n = 0;
    check(fogest_estimate_a(image.get(), o.patch_radius, modified, values, 3, &n), "atmospheric light");
    // A colour image yields one value per channel; pick the requested one.
    const fogest_channel c = parse_channel(o.channel);
    if (n == 1)
      a = values[0];
    else if (c == FOGEST_CHANNEL_GRAY)
      a = 0.299 * values[0] + 0.587 * values[1] + 0.114 * values[2];
    else
      a = values[static_cast<int>(c) - 1];
  }

  MapPtr map = load_map(o.map);
  fogest_histogram_config cfg = o.hist;
  cfg.bounded = modified;
  cfg.lower = o.beta_min;
  cfg.upper = o.beta_max;
  fogest_histogram* raw = nullptr;
  check(fogest_beta_histogram(map.get(), parse_channel(o.channel), a, o.xi_f, &cfg, &raw), "histogram");
  HistogramPtr hist(raw);
  if (!o.histogram.empty()) check(fogest_histogram_save(hist.get(), o.histogram.c_str()), "saving histogram");

  double beta = 0.0, visibility = 0.0;
  size_t accepted = 0;
  check(fogest_histogram_beta(hist.get(), &beta, &accepted), "histogram");
  const bool has_vis = beta > 0.0 && fogest_visibility_from_beta(beta, &visibility) == FOGEST_OK;
  Output out(o.out);
  out.stream() << "method,a,beta,visibility,votes\n"
               << o.method << ',' << fmt_num(a) << ',' << fmt_num(beta) << ',' << (has_vis ? fmt_num(visibility) : "")
               << ',' << accepted << '\n';
  out.finish("baseline");
  return 0;
}

// ---- fit-gamma ----

int run_fit_gamma(const std::string& calibration, const std::string& out_path) {
  fogest_gamma_maps* raw = nullptr;
  unsigned mask = 0;
  check(fogest_fit_gamma_csv(calibration.c_str(), &raw, &mask), "fitting " + calibration);
  GammaPtr maps(raw);
  check(fogest_gamma_maps_save(maps.get(), out_path.c_str()), "saving " + out_path);
  std::cout << "channel,alpha,gamma,zeta\n";
  for (int c = 0; c < 4; ++c) {
    if (!(mask & (1u << c))) continue;
    double alpha = 0, gamma = 0, zeta = 0;
    check(fogest_gamma_maps_get(maps.get(), static_cast<fogest_channel>(c), &alpha, &gamma, &zeta), "gamma");
    std::cout << channel_name(static_cast<fogest_channel>(c)) << ',' << fmt_num(alpha) << ',' << fmt_num(gamma)
              << ',' << fmt_num(zeta) << '\n';
  }
  return 0;
}

// ---- synthesize-fog ----

struct SynthOptions {
  std::string image, distance, depth, out;
  std::vector<double> beta, visibility, a;
  double fx = 0, fy = 0, cx = 0, cy = 0;
  double max_distance = 0.0;
};

int run_synthesize(const SynthOptions& o) {
  fogest_image* raw = nullptr;
  check(fogest_image_load_pnm(o.image.c_str(), &raw), "loading " + o.image);
  ImagePtr clear(raw);

  ImagePtr dist;
  if (!o.distance.empty()) {
    check(fogest_raster_load(o.distance.c_str(), &raw), "loading " + o.distance);
    dist.reset(raw);
  } else {
    check(fogest_raster_load(o.depth.c_str(), &raw), "loading " + o.depth);
    ImagePtr depth(raw);
    check(fogest_distance_from_depth(depth.get(), o.fx, o.fy, o.cx, o.cy, &raw), "depth conversion");
    dist.reset(raw);
  }

  std::vector<double> beta = o.beta;
  for (double v : o.visibility) {
    double b = 0.0;
    check(fogest_beta_from_visibility(v, &b), "visibility");
    beta.push_back(b);
  }
  std::vector<double> a = o.a;
  if (beta.size() != a.size()) {
    if (beta.size() == 1) beta.resize(a.size(), beta[0]);
    else if (a.size() == 1) a.resize(beta.size(), a[0]);
    else throw Failure("--beta/--visibility and --a must have matching counts");
  }
  check(fogest_synthesize_fog_image(clear.get(), dist.get(), beta.data(), a.data(), a.size(), o.max_distance, &raw),
        "synthesis");
  ImagePtr foggy(raw);
  check(fogest_image_save_pnm(foggy.get(), o.out.c_str()), "saving " + o.out);
  return 0;
}

// ---- experiment gamma-bias ----

struct GammaBiasOptions {
  fogest_gamma_bias_config config{};
  std::vector<double> gammas{2.2};
  std::vector<double> noise{1.0};
  std::string domain = "radiance";
  std::string out, trials_out;

  GammaBiasOptions() { fogest_gamma_bias_config_default(&config); }
};

int run_gamma_bias(const GammaBiasOptions& o) {
  if (o.domain != "radiance" && o.domain != "intensity") throw Failure("--noise-domain must be radiance or intensity");
  if (!o.trials_out.empty() && (o.gammas.size() != 1 || o.noise.size() != 1))
    throw Failure("--trials-out needs a single --gamma and --noise-std");
  Output out(o.out);
  out.stream() << "gamma,noise_std,trials,failed,mean_beta_radiance,mean_beta_intensity,fraction_intensity_greater\n";
  for (double g : o.gammas) {
    for (double s : o.noise) {
      fogest_gamma_bias_config c = o.config;
      c.gamma = g;
      c.noise_std = s;
      c.noise_domain = o.domain == "radiance" ? FOGEST_NOISE_RADIANCE : FOGEST_NOISE_INTENSITY;
      fogest_gamma_bias* raw = nullptr;
      check(fogest_gamma_bias_run(&c, &raw), "gamma-bias");
      GammaBiasPtr result(raw);
      fogest_gamma_bias_summary sum{};
      check(fogest_gamma_bias_summary_get(result.get(), &sum), "gamma-bias");
      out.stream() << fmt_num(g) << ',' << fmt_num(s) << ',' << sum.trials << ',' << sum.failed << ','
                   << fmt_num(sum.mean_beta_radiance) << ',' << fmt_num(sum.mean_beta_intensity) << ','
                   << fmt_num(sum.fraction_intensity_greater) << '\n';
      if (!o.trials_out.empty())
        check(fogest_gamma_bias_save_csv(result.get(), o.trials_out.c_str()), "saving " + o.trials_out);
    }
  }
  out.finish("gamma-bias summary");
  return 0;
}

// ---- experiment recovery ----

int run_recovery(const fogest_recovery_config& config, const std::string& dir) {
  fogest_recovery* raw = nullptr;
  check(fogest_recovery_run(&config, &raw), "recovery");
  RecoveryPtr result(raw);
  std::filesystem::create_directories(dir);
  check(fogest_recovery_save(result.get(), dir.c_str()), "saving report");
  std::cout << "method,parameter,count,rmse_abs,rmse_rel,mae_abs,mae_rel,sd_abs,sd_rel,bias,failures\n";
  for (int m = 0; m < FOGEST_METHOD_COUNT; ++m) {
    fogest_metrics beta{}, l_inf{};
    size_t failures = 0;
    check(fogest_recovery_summary(result.get(), m, &beta, &l_inf, &failures), "summary");
    std::cout << fogest_method_name(m) << ",beta," << metrics_row(beta) << ',' << failures << '\n';
    std::cout << fogest_method_name(m) << ",l_inf," << metrics_row(l_inf) << ',' << failures << '\n';
  }
  return 0;
}

// ---- experiment histogram ----

struct HistDemoOptions {
  double visibility = 30.0, a = 204.0, a_error = 1.0;
  uint64_t seed = 5;
  std::string dir = ".";
};

int run_hist_demo(const HistDemoOptions& o) {
  fogest_histogram *u = nullptr, *b = nullptr;
  check(fogest_histogram_demo(o.visibility, o.a, o.a_error, o.seed, &u, &b), "histogram demo");
  HistogramPtr unbounded(u), bounded(b);
  std::filesystem::create_directories(o.dir);
  const std::string up = (std::filesystem::path(o.dir) / "histogram_unbounded.txt").string();
  const std::string bp = (std::filesystem::path(o.dir) / "histogram_bounded.txt").string();
  check(fogest_histogram_save(unbounded.get(), up.c_str()), "saving " + up);
  check(fogest_histogram_save(bounded.get(), bp.c_str()), "saving " + bp);
  double bu = 0, bb = 0, truth = 0;
  check(fogest_histogram_beta(unbounded.get(), &bu, nullptr), "histogram");
  check(fogest_histogram_beta(bounded.get(), &bb, nullptr), "histogram");
  check(fogest_beta_from_visibility(o.visibility, &truth), "visibility");
  std::cout << "variant,beta,beta_true\nunbounded," << fmt_num(bu) << ',' << fmt_num(truth) << "\nbounded,"
            << fmt_num(bb) << ',' << fmt_num(truth) << '\n';
  return 0;
}

// ---- metrics ----

struct MetricsOptions {
  std::string csv, column, truth_column, label = "estimate", parameter, out;
  std::optional<double> truth;
};

int run_metrics(const MetricsOptions& o) {
  fogest_metrics m{};
  check(fogest_metrics_from_csv(o.csv.c_str(), o.column.c_str(),
                                o.truth_column.empty() ? nullptr : o.truth_column.c_str(), o.truth.value_or(0.0), &m),
        "metrics");
  const std::string parameter = o.parameter.empty() ? o.column : o.parameter;
  if (!o.out.empty() && o.out != "-") {
    check(fogest_metrics_save_csv(&m, o.label.c_str(), parameter.c_str(), o.out.c_str()), "saving " + o.out);
  } else {
    std::cout << "label,parameter,count,rmse_abs,rmse_rel,mae_abs,mae_rel,sd_abs,sd_rel,bias\n"
              << o.label << ',' << parameter << ',' << metrics_row(m) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fog parameter estimation from landmark observations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fogest_version());
  int code = 0;

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic local map and its ground truth");
  simulate->add_option("--config", sim.config, "Scene config JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--gamma", sim.gamma, "Gamma file (gray map used)")->check(CLI::ExistingFile);
  simulate->add_option("--seed", sim.seed, "Overrides the config's noise seed");
  simulate->add_option("--out", sim.out, "Output map file")->required();
  simulate->add_option("--truth", sim.truth, "Ground-truth JSON (default: beside the map)");
  simulate->callback([&] { code = run_simulate(sim); });

  EstimateOptions est;
  auto* estimate = app.add_subcommand("estimate", "Estimate fog parameters from a local map");
  estimate->add_option("--map", est.map, "Local map file")->required()->check(CLI::ExistingFile);
  estimate->add_option("--gamma", est.gamma, "Gamma file (default: identity)")->check(CLI::ExistingFile);
  estimate->add_option("--channel", est.channel, "gray, red, green, blue, or rgb")->capture_default_str();
  estimate->add_option("--window", est.window, "Frames per sliding window; 0 uses the whole map")
      ->check(CLI::NonNegativeNumber);
  estimate->add_option("--stride", est.stride, "Frames between window starts")->check(CLI::PositiveNumber);
  estimate->add_option("--out", est.out, "CSV output (default: stdout)");
  est.flags.add_to(estimate);
  estimate->callback([&] { code = run_estimate(est); });

  BaselineOptions base;
  auto* baseline = app.add_subcommand("baseline", "Dark-channel atmospheric light plus beta histogram");
  baseline->add_option("--map", base.map, "Local map file")->required()->check(CLI::ExistingFile);
  auto* a_opt = baseline->add_option("--a", base.a, "Atmospheric-light intensity");
  auto* img_opt = baseline->add_option("--image", base.image, "Foggy PNM image for estimating A")
                      ->check(CLI::ExistingFile);
  a_opt->excludes(img_opt);
  baseline->add_option("--method", base.method, "li-modified or li-original")
      ->check(CLI::IsMember({"li-modified", "li-original"}))
      ->capture_default_str();
  baseline->add_option("--channel", base.channel, "Map channel")->capture_default_str();
  baseline->add_option("--patch-radius", base.patch_radius, "Dark-channel patch radius")->capture_default_str();
  baseline->add_option("--xi-f", base.xi_f, "Minimum frames observing a landmark")->capture_default_str();
  baseline->add_option("--bin-width", base.hist.bin_width, "Histogram bin width, 1/m")->capture_default_str();
  baseline->add_option("--tau", base.hist.min_inverse_depth_gap, "Minimum inverse-depth gap, 1/m")
      ->capture_default_str();
  baseline->add_option("--beta-min", base.beta_min, "Lower bound (li-modified)")->capture_default_str();
  baseline->add_option("--beta-max", base.beta_max, "Upper bound (li-modified)")->capture_default_str();
  baseline->add_option("--histogram", base.histogram, "Write the two-column histogram here");
  baseline->add_option("--out", base.out, "CSV output (default: stdout)");
  baseline->callback([&] {
    if (!base.a && base.image.empty()) throw CLI::RequiredError("--a or --image");
    code = run_baseline(base);
  });

  std::string calibration, gamma_out;
  auto* fit = app.add_subcommand("fit-gamma", "Fit gamma maps to a calibration CSV");
  fit->add_option("--calibration", calibration, "CSV with header channel,intensity,power")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--out", gamma_out, "Output gamma file")->required();
  fit->callback([&] { code = run_fit_gamma(calibration, gamma_out); });

  SynthOptions syn;
  auto* synth = app.add_subcommand("synthesize-fog", "Render fog into a clear image");
  synth->add_option("--image", syn.image, "Clear PNM image")->required()->check(CLI::ExistingFile);
  auto* dist_opt = synth->add_option("--distance", syn.distance, "Distance raster")->check(CLI::ExistingFile);
  auto* depth_opt = synth->add_option("--depth", syn.depth, "Z-depth raster")->check(CLI::ExistingFile);
  dist_opt->excludes(depth_opt);
  synth->add_option("--fx", syn.fx, "Focal length x (with --depth)");
  synth->add_option("--fy", syn.fy, "Focal length y (with --depth)");
  synth->add_option("--cx", syn.cx, "Principal point x (with --depth)");
  synth->add_option("--cy", syn.cy, "Principal point y (with --depth)");
  auto* beta_opt = synth->add_option("--beta", syn.beta, "Scattering coefficient per channel or shared");
  auto* vis_opt = synth->add_option("--visibility", syn.visibility, "Visibility in metres instead of --beta");
  beta_opt->excludes(vis_opt);
  synth->add_option("--a", syn.a, "Atmospheric-light intensity per channel or shared")->required();
  synth->add_option("--max-distance", syn.max_distance, "Clamp distances above this (0: off)");
  synth->add_option("--out", syn.out, "Output PNM")->required();
  synth->callback([&] {
    if (syn.distance.empty() && syn.depth.empty()) throw CLI::RequiredError("--distance or --depth");
    if (syn.beta.empty() && syn.visibility.empty()) throw CLI::RequiredError("--beta or --visibility");
    code = run_synthesize(syn);
  });

  auto* experiment = app.add_subcommand("experiment", "Run a synthetic experiment");
  experiment->require_subcommand(1);

  GammaBiasOptions gb;
  auto* bias = experiment->add_subcommand("gamma-bias", "Radiance versus intensity estimation under gamma");
  bias->add_option("--trials", gb.config.trials, "Number of trials")->capture_default_str();
  bias->add_option("--beta", gb.config.beta, "Ground-truth beta, 1/m")->capture_default_str();
  bias->add_option("--l-inf", gb.config.l_inf, "Ground-truth atmospheric radiance")->capture_default_str();
  bias->add_option("--gamma", gb.gammas, "One or more gamma exponents")->capture_default_str();
  bias->add_option("--noise-std", gb.noise, "One or more noise levels (sensitivity sweep)")->capture_default_str();
  bias->add_option("--noise-domain", gb.domain, "radiance or intensity")->capture_default_str();
  bias->add_flag("--quantize", gb.config.quantize, "Round intensities to integers");
  bias->add_option("--landmarks", gb.config.landmarks, "Landmarks per trial")->capture_default_str();
  bias->add_option("--seed", gb.config.seed, "Master seed")->capture_default_str();
  bias->add_option("--out", gb.out, "Summary CSV (default: stdout)");
  bias->add_option("--trials-out", gb.trials_out, "Per-trial CSV");
  bias->callback([&] { code = run_gamma_bias(gb); });

  fogest_recovery_config rc{};
  fogest_recovery_config_default(&rc);
  std::string recovery_dir = ".";
  auto* recovery = experiment->add_subcommand("recovery", "Method comparison across visibility levels");
  recovery->add_option("--seed", rc.seed, "Master seed")->capture_default_str();
  recovery->add_option("--threads", rc.threads, "Concurrent scenarios")->capture_default_str();
  recovery->add_option("--noise-std", rc.noise_std, "Gaussian noise, intensity levels")->capture_default_str();
  recovery->add_option("--outlier-fraction", rc.outlier_fraction, "Fraction of gross outliers")
      ->capture_default_str();
  recovery->add_option("--outlier-magnitude", rc.outlier_magnitude, "Outlier scale, intensity levels")
      ->capture_default_str();
  recovery->add_option("--landmarks", rc.landmarks, "Landmarks per scene")->capture_default_str();
  recovery->add_option("--frames", rc.frames, "Frames per scene")->capture_default_str();
  recovery->add_option("--window", rc.window, "Frames per local map")->capture_default_str();
  recovery->add_option("--out", recovery_dir, "Output directory")->capture_default_str();
  recovery->callback([&] { code = run_recovery(rc, recovery_dir); });

  HistDemoOptions hd;
  auto* hist = experiment->add_subcommand("histogram", "Unbounded versus bounded beta histogram");
  hist->add_option("--visibility", hd.visibility, "Visibility in metres")->capture_default_str();
  hist->add_option("--a", hd.a, "True atmospheric light")->capture_default_str();
  hist->add_option("--a-error", hd.a_error, "Error added to A before voting")->capture_default_str();
  hist->add_option("--seed", hd.seed, "Noise seed")->capture_default_str();
  hist->add_option("--out", hd.dir, "Output directory")->capture_default_str();
  hist->callback([&] { code = run_hist_demo(hd); });

  MetricsOptions mo;
  auto* metrics = app.add_subcommand("metrics", "Error metrics of a CSV column against ground truth");
  metrics->add_option("--csv", mo.csv, "Input CSV")->required()->check(CLI::ExistingFile);
  metrics->add_option("--column", mo.column, "Estimate column")->required();
  auto* truth_opt = metrics->add_option("--truth", mo.truth, "Scalar ground truth");
  auto* truth_col = metrics->add_option("--truth-column", mo.truth_column, "Ground-truth column");
  truth_opt->excludes(truth_col);
  metrics->add_option("--label", mo.label, "Row label")->capture_default_str();
  metrics->add_option("--parameter", mo.parameter, "Parameter name (default: the column)");
  metrics->add_option("--out", mo.out, "Output CSV (default: stdout)");
  metrics->callback([&] {
    if (!mo.truth && mo.truth_column.empty()) throw CLI::RequiredError("--truth or --truth-column");
    code = run_metrics(mo);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc_parse = app.exit(e);
    return rc_parse == 0 ? 0 : kExitUsage;
  } catch (const Failure& e) {
    std::cerr << "fogest: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "fogest: " << e.what() << '\n';
    return kExitRuntime;
  }
  return code;
}
