#include "fogest/fogest.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "fogest/baselines.hpp"
#include "fogest/error.hpp"
#include "fogest/estimator.hpp"
#include "fogest/image.hpp"
#include "fogest/localmap.hpp"
#include "fogest/metrics.hpp"
#include "fogest/photometry.hpp"
#include "fogest/recovery.hpp"
#include "fogest/scattering.hpp"
#include "fogest/simulator.hpp"
#include "fogest/text_util.hpp"

struct fogest_image {
  fogest::Image image;
};

struct fogest_gamma_maps {
  fogest::ChannelGammaMaps maps;
};

struct fogest_map {
  fogest::LocalMapGraph graph;
};

struct fogest_estimator {
  fogest::EstimatorConfig config;
  fogest::EstimatorState state;
};

struct fogest_histogram {
  fogest::BetaHistogram histogram;
};

struct fogest_gamma_bias {
  fogest::GammaBiasResult result;
};

struct fogest_recovery {
  fogest::RecoveryReport report;
};

namespace {

thread_local std::string g_last_error;

fogest_status set_error(fogest_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
fogest_status guarded(F&& body) noexcept {
  try {
    body();
    return FOGEST_OK;
  } catch (const fogest::Error& e) {
    return set_error(static_cast<fogest_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(FOGEST_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(FOGEST_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(FOGEST_ERR_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* name) {
  if (p == nullptr) fogest::fail(fogest::ErrorCode::InvalidArgument, fmt::format("{} must not be null", name));
}

fogest::Channel to_channel(fogest_channel c) {
  if (c < FOGEST_CHANNEL_GRAY || c > FOGEST_CHANNEL_BLUE)
    fogest::fail(fogest::ErrorCode::InvalidArgument, fmt::format("invalid channel {}", static_cast<int>(c)));
  return static_cast<fogest::Channel>(c);
}

fogest::Vec3 to_vec(const double* p) { return {p[0], p[1], p[2]}; }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

fogest_metrics to_c(const fogest::MetricsReport& m) {
  return {m.rmse, m.mae, m.sd, m.bias, m.rmse_rel, m.mae_rel, m.sd_rel, m.count};
}

fogest::MetricsReport from_c(const fogest_metrics& m) {
  return {m.rmse, m.mae, m.sd, m.bias, m.rmse_rel, m.mae_rel, m.sd_rel, m.count};
}

fogest::EstimatorConfig from_c(const fogest_estimator_config& c) {
  fogest::EstimatorConfig out;
  out.eta = c.eta;
  out.delta = c.delta;
  out.beta_bounds = {c.beta_lower, c.beta_upper};
  out.update_gate = c.update_gate;
  out.thresholds = {c.xi_f, c.xi_k};
  out.initial_beta = c.initial_beta;
  out.two_stage = c.two_stage != 0;
  out.weighting = c.uniform_weights ? fogest::Weighting::Uniform : fogest::Weighting::Adaptive;
  out.solver.max_iterations = c.max_iterations;
  out.solver.gradient_tolerance = c.gradient_tolerance;
  out.solver.step_tolerance = c.step_tolerance;
  out.solver.initial_damping = c.initial_damping;
  return out;
}

fogest::HistogramConfig from_c(const fogest_histogram_config& c) {
  fogest::HistogramConfig out;
  out.bin_width = c.bin_width;
  out.min_inverse_depth_gap = c.min_inverse_depth_gap;
  if (c.bounded) out.bounds = fogest::ParameterBounds{c.lower, c.upper};
  return out;
}

template <class T>
T* make_handle(T value) {
  return new T(std::move(value));
}

}  // namespace

extern "C" {

const char* fogest_version(void) { return "1.0.0"; }

const char* fogest_last_error(void) { return g_last_error.c_str(); }

const char* fogest_status_string(fogest_status status) {
  switch (status) {
    case FOGEST_OK: return "ok";
    case FOGEST_ERR_INTERNAL: return "internal error";
    default:
      if (status >= FOGEST_ERR_INVALID_ARGUMENT && status <= FOGEST_ERR_IO)
        return fogest::to_string(static_cast<fogest::ErrorCode>(status));
      return "unknown status";
  }
}

void fogest_string_free(char* s) { std::free(s); }

fogest_status fogest_channel_parse(const char* name, fogest_channel* out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    *out = static_cast<fogest_channel>(fogest::parse_channel(name));
  });
}

// ---- Scattering -------------------------------------------------------------

fogest_status fogest_transmission(double beta, double d, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = fogest::transmission(beta, d);
  });
}

fogest_status fogest_visibility_from_beta(double beta, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = fogest::visibility_from_beta(beta);
  });
}

fogest_status fogest_beta_from_visibility(double visibility, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = fogest::beta_from_visibility(visibility);
  });
}

fogest_status fogest_predict_radiance(double lc, double beta, double l_inf, double d, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = fogest::predict_radiance(lc, {beta, l_inf}, d);
  });
}

fogest_status fogest_synthesize_fog_pixel(double j, double beta_int, double a, double d, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = fogest::synthesize_fog_pixel(j, {beta_int, a}, d);
  });
}

// ---- Images -----------------------------------------------------------------

fogest_status fogest_image_create(int width, int height, int channels, const double* data, fogest_image** out) {
  return guarded([&] {
    need(out, "out");
    fogest::require(width > 0 && height > 0, "image dimensions must be positive");
    fogest::require(channels == 1 || channels == 3, "images have one or three channels");
    fogest::Image image(width, height, channels);
    if (data != nullptr) std::copy(data, data + image.values().size(), image.values().begin());
    *out = make_handle(fogest_image{std::move(image)});
  });
}

fogest_status fogest_image_load_pnm(const char* path, fogest_image** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = make_handle(fogest_image{fogest::read_pnm(path)});
  });
}

fogest_status fogest_image_save_pnm(const fogest_image* image, const char* path) {
  return guarded([&] {
    need(image, "image");
    need(path, "path");
    fogest::write_pnm(fogest::quantize(image->image), path);
  });
}

fogest_status fogest_raster_load(const char* path, fogest_image** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = make_handle(fogest_image{fogest::read_raster(path)});
  });
}

fogest_status fogest_raster_save(const fogest_image* raster, const char* path) {
  return guarded([&] {
    need(raster, "raster");
    need(path, "path");
    fogest::write_raster(raster->image, path);
  });
}

fogest_status fogest_image_info(const fogest_image* image, int* width, int* height, int* channels) {
  return guarded([&] {
    need(image, "image");
    if (width) *width = image->image.width();
    if (height) *height = image->image.height();
    if (channels) *channels = image->image.channels();
  });
}

fogest_status fogest_image_data(const fogest_image* image, const double** data) {
  return guarded([&] {
    need(image, "image");
    need(data, "data");
    *data = image->image.values().data();
  });
}

void fogest_image_destroy(fogest_image* image) { delete image; }

fogest_status fogest_synthesize_fog_image(const fogest_image* clear, const fogest_image* distance_map,
                                          const double* beta_int, const double* a, size_t count, double max_distance,
                                          fogest_image** out) {
  return guarded([&] {
    need(clear, "clear");
    need(distance_map, "distance_map");
    need(beta_int, "beta_int");
    need(a, "a");
    need(out, "out");
    std::vector<fogest::IntensityFogParams> params;
    for (size_t k = 0; k < count; ++k) params.push_back({beta_int[k], a[k]});
    std::optional<double> clamp;
    if (max_distance > 0.0) clamp = max_distance;
    *out = make_handle(fogest_image{fogest::synthesize_fog_image(clear->image, distance_map->image, params, clamp)});
  });
}

fogest_status fogest_distance_from_depth(const fogest_image* depth, double fx, double fy, double cx, double cy,
                                         fogest_image** out) {
  return guarded([&] {
    need(depth, "depth");
    need(out, "out");
    *out = make_handle(fogest_image{fogest::distance_from_depth(depth->image, fx, fy, cx, cy)});
  });
}

// ---- Photometry -------------------------------------------------------------

fogest_status fogest_gamma_maps_create_identity(fogest_gamma_maps** out) {
  return guarded([&] {
    need(out, "out");
    *out = make_handle(fogest_gamma_maps{});
  });
}

fogest_status fogest_gamma_maps_load(const char* path, fogest_gamma_maps** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = make_handle(fogest_gamma_maps{fogest::read_gamma_file(path)});
  });
}

fogest_status fogest_gamma_maps_save(const fogest_gamma_maps* maps, const char* path) {
  return guarded([&] {
    need(maps, "maps");
    need(path, "path");
    fogest::write_gamma_file(maps->maps, path);
  });
}

fogest_status fogest_gamma_maps_set(fogest_gamma_maps* maps, fogest_channel channel, double alpha, double gamma,
                                    double zeta) {
  return guarded([&] {
    need(maps, "maps");
    maps->maps.set(to_channel(channel), fogest::GammaMap(alpha, gamma, zeta));
  });
}

fogest_status fogest_gamma_maps_get(const fogest_gamma_maps* maps, fogest_channel channel, double* alpha,
                                    double* gamma, double* zeta) {
  return guarded([&] {
    need(maps, "maps");
    const fogest::GammaMap& m = maps->maps.get(to_channel(channel));
    if (alpha) *alpha = m.alpha();
    if (gamma) *gamma = m.gamma();
    if (zeta) *zeta = m.zeta();
  });
}

void fogest_gamma_maps_destroy(fogest_gamma_maps* maps) { delete maps; }

fogest_status fogest_gamma_expand(const fogest_gamma_maps* maps, fogest_channel channel, double intensity,
                                  double* out) {
  return guarded([&] {
    need(maps, "maps");
    need(out, "out");
    *out = maps->maps.get(to_channel(channel)).expand(intensity);
  });
}

fogest_status fogest_gamma_compress(const fogest_gamma_maps* maps, fogest_channel channel, double radiance,
                                    int clamp, double* out) {
  return guarded([&] {
    need(maps, "maps");
    need(out, "out");
    *out = maps->maps.get(to_channel(channel)).compress(radiance, clamp != 0);
  });
}

fogest_status fogest_fit_gamma(const double* intensity, const double* power, size_t count, double* alpha,
                               double* gamma, double* zeta, double* residual_norm) {
  return guarded([&] {
    need(intensity, "intensity");
    need(power, "power");
    std::vector<fogest::CalibrationSample> samples(count);
    for (size_t k = 0; k < count; ++k) samples[k] = {intensity[k], power[k]};
    const fogest::GammaFit fit = fogest::fit_gamma_map(samples);
    if (alpha) *alpha = fit.map.alpha();
    if (gamma) *gamma = fit.map.gamma();
    if (zeta) *zeta = fit.map.zeta();
    if (residual_norm) *residual_norm = fit.residual_norm;
  });
}

fogest_status fogest_fit_gamma_csv(const char* csv_path, fogest_gamma_maps** out, unsigned* fitted_mask) {
  return guarded([&] {
    need(csv_path, "csv_path");
    need(out, "out");
    const auto samples = fogest::read_calibration_csv(csv_path);
    fogest::ChannelGammaMaps maps;
    unsigned mask = 0;
    for (int c = 0; c < 4; ++c) {
      if (samples[c].empty()) continue;
      maps.set(static_cast<fogest::Channel>(c), fogest::fit_gamma_map(samples[c]).map);
      mask |= 1u << c;
    }
    if (mask == 0) fogest::fail(fogest::ErrorCode::NotEnoughData, "calibration file holds no samples");
    *out = make_handle(fogest_gamma_maps{maps});
    if (fitted_mask) *fitted_mask = mask;
  });
}

// ---- Local maps ---------------------------------------------------------------

fogest_status fogest_map_create(int channels, fogest_map** out) {
  return guarded([&] {
    need(out, "out");
    *out = make_handle(fogest_map{fogest::LocalMapGraph(channels)});
  });
}

fogest_status fogest_map_load(const char* path, fogest_map** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = make_handle(fogest_map{fogest::load_map(path)});
  });
}

fogest_status fogest_map_save(const fogest_map* map, const char* path) {
  return guarded([&] {
    need(map, "map");
    need(path, "path");
    fogest::save_map(map->graph, path);
  });
}

fogest_status fogest_map_add_frame(fogest_map* map, int64_t id, const double* position) {
  return guarded([&] {
    need(map, "map");
    std::optional<fogest::Vec3> p;
    if (position) p = to_vec(position);
    map->graph.add_frame(id, p);
  });
}

fogest_status fogest_map_add_landmark(fogest_map* map, int64_t id, const double* position) {
  return guarded([&] {
    need(map, "map");
    std::optional<fogest::Vec3> p;
    if (position) p = to_vec(position);
    map->graph.add_landmark(id, p);
  });
}

fogest_status fogest_map_add_edge(fogest_map* map, int64_t frame, int64_t landmark, double distance,
                                  const double* intensity) {
  return guarded([&] {
    need(map, "map");
    need(intensity, "intensity");
    fogest::Edge edge{frame, landmark, distance, {}};
    for (int c = 0; c < map->graph.channels(); ++c) edge.intensity[static_cast<size_t>(c)] = intensity[c];
    map->graph.add_edge(edge);
  });
}

fogest_status fogest_map_counts(const fogest_map* map, size_t* frames, size_t* landmarks, size_t* edges) {
  return guarded([&] {
    need(map, "map");
    if (frames) *frames = map->graph.frames().size();
    if (landmarks) *landmarks = map->graph.landmarks().size();
    if (edges) *edges = map->graph.edges().size();
  });
}

fogest_status fogest_map_frame_ids(const fogest_map* map, int64_t* ids, size_t capacity, size_t* count) {
  return guarded([&] {
    need(map, "map");
    size_t k = 0;
    for (const auto& [id, pos] : map->graph.frames()) {
      if (ids && k < capacity) ids[k] = id;
      ++k;
    }
    if (count) *count = k;
  });
}

fogest_status fogest_map_frame_position(const fogest_map* map, int64_t id, double* position, int* has_position) {
  return guarded([&] {
    need(map, "map");
    const auto it = map->graph.frames().find(id);
    if (it == map->graph.frames().end())
      fogest::fail(fogest::ErrorCode::InvalidArgument, fmt::format("unknown frame {}", id));
    if (has_position) *has_position = it->second.has_value();
    if (position && it->second) {
      position[0] = it->second->x;
      position[1] = it->second->y;
      position[2] = it->second->z;
    }
  });
}

fogest_status fogest_map_restrict(const fogest_map* map, const int64_t* frame_ids, size_t count, fogest_map** out) {
  return guarded([&] {
    need(map, "map");
    need(out, "out");
    if (count > 0) need(frame_ids, "frame_ids");
    std::set<fogest::FrameId> frames(frame_ids, frame_ids + count);
    *out = make_handle(fogest_map{map->graph.restrict_to_frames(frames)});
  });
}

fogest_status fogest_map_qualifying_landmarks(const fogest_map* map, int xi_f, size_t* out) {
  return guarded([&] {
    need(map, "map");
    need(out, "out");
    const auto obs = fogest::generate_dr_pairs(map->graph, fogest::GammaMap::identity(), fogest::Channel::Gray,
                                               fogest::SelectionThresholds{xi_f, 1});
    *out = obs.groups.size();
  });
}

void fogest_map_destroy(fogest_map* map) { delete map; }

// ---- Estimator ------------------------------------------------------------------

void fogest_estimator_config_default(fogest_estimator_config* config) {
  if (config == nullptr) return;
  const fogest::EstimatorConfig d;
  config->eta = d.eta;
  config->delta = d.delta;
  config->beta_lower = d.beta_bounds.lower;
  config->beta_upper = d.beta_bounds.upper;
  config->update_gate = d.update_gate;
  config->xi_f = d.thresholds.xi_f;
  config->xi_k = d.thresholds.xi_k;
  config->initial_beta = d.initial_beta;
  config->two_stage = d.two_stage;
  config->uniform_weights = d.weighting == fogest::Weighting::Uniform;
  config->max_iterations = d.solver.max_iterations;
  config->gradient_tolerance = d.solver.gradient_tolerance;
  config->step_tolerance = d.solver.step_tolerance;
  config->initial_damping = d.solver.initial_damping;
}

fogest_status fogest_estimator_create(const fogest_estimator_config* config, fogest_estimator** out) {
  return guarded([&] {
    need(out, "out");
    fogest::EstimatorConfig c;
    if (config) c = from_c(*config);
    fogest::validate(c);
    *out = make_handle(fogest_estimator{c, {}});
  });
}

void fogest_estimator_destroy(fogest_estimator* estimator) { delete estimator; }

fogest_status fogest_estimator_update(fogest_estimator* estimator, const fogest_map* map,
                                      const fogest_gamma_maps* maps, fogest_channel channel, fogest_estimate* out) {
  return guarded([&] {
    need(estimator, "estimator");
    need(map, "map");
    need(out, "out");
    const fogest::Channel ch = to_channel(channel);
    const fogest::ChannelGammaMaps identity;
    const fogest::ChannelGammaMaps& m = maps ? maps->maps : identity;
    const auto obs = fogest::generate_dr_pairs(map->graph, m, ch, estimator->config.thresholds);
    // Work on a copy so a failed update leaves the state untouched.
    fogest::EstimatorState state = estimator->state;
    const fogest::EstimateResult r = fogest::estimate(obs, m.get(ch), state, estimator->config);
    estimator->state = std::move(state);

    fogest_estimate e{};
    e.beta = r.estimate.beta;
    e.l_inf = r.estimate.l_inf;
    e.visibility = fogest::visibility_from_beta(r.estimate.beta);
    e.inlier_fraction = r.inlier_fraction();
    e.stage1_cost = r.stage1.final_cost;
    e.stage2_cost = r.stage2 ? r.stage2->final_cost : 0.0;
    e.threshold = r.threshold;
    e.landmarks = obs.groups.size();
    e.observations = r.observations;
    e.inliers = r.inliers;
    e.stage1_iterations = r.stage1.iterations;
    e.stage2_iterations = r.stage2 ? r.stage2->iterations : 0;
    e.degraded = r.degraded;
    *out = e;
  });
}

fogest_status fogest_estimator_should_update(const fogest_estimator* estimator, const double* position, int* out) {
  return guarded([&] {
    need(estimator, "estimator");
    need(position, "position");
    need(out, "out");
    *out = fogest::should_update(to_vec(position), estimator->state, estimator->config);
  });
}

fogest_status fogest_estimator_mark_updated(fogest_estimator* estimator, const double* position) {
  return guarded([&] {
    need(estimator, "estimator");
    need(position, "position");
    fogest::mark_updated(estimator->state, to_vec(position));
  });
}

fogest_status fogest_estimator_landmark_radiance(const fogest_estimator* estimator, int64_t landmark, double* out) {
  return guarded([&] {
    need(estimator, "estimator");
    need(out, "out");
    const auto& prev = estimator->state.previous;
    if (!prev) fogest::fail(fogest::ErrorCode::InvalidArgument, "no estimate has been made yet");
    const auto it = prev->lc.find(landmark);
    if (it == prev->lc.end())
      fogest::fail(fogest::ErrorCode::InvalidArgument, fmt::format("landmark {} has no estimate", landmark));
    *out = it->second;
  });
}

// ---- Baselines --------------------------------------------------------------------

fogest_status fogest_dark_channel(const fogest_image* image, int patch_radius, fogest_image** out) {
  return guarded([&] {
    need(image, "image");
    need(out, "out");
    *out = make_handle(fogest_image{fogest::dark_channel(image->image, patch_radius)});
  });
}

fogest_status fogest_estimate_a(const fogest_image* image, int patch_radius, int modified, double* a,
                                size_t capacity, size_t* count) {
  return guarded([&] {
    need(image, "image");
    const std::vector<double> values = modified ? fogest::estimate_a_modified(image->image, patch_radius)
                                                : fogest::estimate_a_original(image->image, patch_radius);
    for (size_t k = 0; a && k < values.size() && k < capacity; ++k) a[k] = values[k];
    if (count) *count = values.size();
  });
}

void fogest_histogram_config_default(fogest_histogram_config* config) {
  if (config == nullptr) return;
  const fogest::HistogramConfig d;
  config->bin_width = d.bin_width;
  config->min_inverse_depth_gap = d.min_inverse_depth_gap;
  config->bounded = 0;
  config->lower = 0.0;
  config->upper = 0.0;
}

fogest_status fogest_beta_histogram(const fogest_map* map, fogest_channel channel, double a, int xi_f,
                                    const fogest_histogram_config* config, fogest_histogram** out) {
  return guarded([&] {
    need(map, "map");
    need(out, "out");
    fogest::HistogramConfig c;
    if (config) c = from_c(*config);
    const auto obs = fogest::generate_dr_pairs(map->graph, fogest::GammaMap::identity(), to_channel(channel),
                                               fogest::SelectionThresholds{xi_f, 1});
    *out = make_handle(fogest_histogram{fogest::estimate_beta_histogram(obs, a, c)});
  });
}

fogest_status fogest_histogram_beta(const fogest_histogram* histogram, double* beta, size_t* accepted) {
  return guarded([&] {
    need(histogram, "histogram");
    if (beta) *beta = histogram->histogram.beta;
    if (accepted) *accepted = histogram->histogram.accepted;
  });
}

fogest_status fogest_histogram_bins(const fogest_histogram* histogram, double* centers, size_t* counts,
                                    size_t capacity, size_t* bin_count) {
  return guarded([&] {
    need(histogram, "histogram");
    size_t k = 0;
    for (const auto& [index, n] : histogram->histogram.bins) {
      if (k < capacity) {
        if (centers) centers[k] = histogram->histogram.center(index);
        if (counts) counts[k] = n;
      }
      ++k;
    }
    if (bin_count) *bin_count = k;
  });
}

fogest_status fogest_histogram_save(const fogest_histogram* histogram, const char* path) {
  return guarded([&] {
    need(histogram, "histogram");
    need(path, "path");
    fogest::write_histogram(histogram->histogram, path);
  });
}

void fogest_histogram_destroy(fogest_histogram* histogram) { delete histogram; }

// ---- Simulation and experiments ---------------------------------------------------

fogest_status fogest_simulate(const char* config_json, const fogest_gamma_maps* maps, const uint64_t* seed,
                              fogest_map** map_out, char** truth_json) {
  return guarded([&] {
    need(config_json, "config_json");
    need(map_out, "map_out");
    fogest::SceneConfig config = fogest::parse_scene_config(config_json);
    if (seed) config.noise.seed = *seed;
    const fogest::GammaMap map = maps ? maps->maps.get(fogest::Channel::Gray) : fogest::GammaMap::identity();
    fogest::Scene scene = fogest::generate_scene(config.scene, config.fog, map, config.noise);
    char* truth = truth_json ? dup_string(fogest::ground_truth_json(scene.truth)) : nullptr;
    *map_out = make_handle(fogest_map{std::move(scene.graph)});
    if (truth_json) *truth_json = truth;
  });
}

void fogest_gamma_bias_config_default(fogest_gamma_bias_config* config) {
  if (config == nullptr) return;
  const fogest::GammaBiasConfig d;
  config->trials = d.trials;
  config->beta = d.beta;
  config->l_inf = d.l_inf;
  config->gamma = 2.2;
  config->noise_std = d.noise.std;
  config->noise_domain = d.noise.domain == fogest::NoiseDomain::Radiance ? FOGEST_NOISE_RADIANCE
                                                                          : FOGEST_NOISE_INTENSITY;
  config->quantize = d.noise.quantize;
  config->seed = d.noise.seed;
  config->landmarks = d.scene.landmarks;
}

fogest_status fogest_gamma_bias_run(const fogest_gamma_bias_config* config, fogest_gamma_bias** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    fogest::GammaBiasConfig c;
    c.trials = config->trials;
    c.beta = config->beta;
    c.l_inf = config->l_inf;
    c.map = fogest::normalized_gamma_map(config->gamma);
    c.noise.std = config->noise_std;
    c.noise.domain =
        config->noise_domain == FOGEST_NOISE_RADIANCE ? fogest::NoiseDomain::Radiance : fogest::NoiseDomain::Intensity;
    c.noise.quantize = config->quantize != 0;
    c.noise.seed = config->seed;
    c.scene.landmarks = config->landmarks;
    *out = make_handle(fogest_gamma_bias{fogest::gamma_bias_experiment(c)});
  });
}

fogest_status fogest_gamma_bias_summary_get(const fogest_gamma_bias* result, fogest_gamma_bias_summary* out) {
  return guarded([&] {
    need(result, "result");
    need(out, "out");
    const auto& r = result->result;
    *out = {r.trials.size(), r.failed, r.mean_beta_radiance, r.mean_beta_intensity, r.fraction_intensity_greater};
  });
}

fogest_status fogest_gamma_bias_trial(const fogest_gamma_bias* result, size_t index, int* ok, double* beta_radiance,
                                      double* beta_intensity) {
  return guarded([&] {
    need(result, "result");
    if (index >= result->result.trials.size()) fogest::fail(fogest::ErrorCode::Range, "trial index out of range");
    const auto& t = result->result.trials[index];
    if (ok) *ok = t.ok;
    if (beta_radiance) *beta_radiance = t.beta_radiance;
    if (beta_intensity) *beta_intensity = t.beta_intensity;
  });
}

fogest_status fogest_gamma_bias_save_csv(const fogest_gamma_bias* result, const char* path) {
  return guarded([&] {
    need(result, "result");
    need(path, "path");
    std::ofstream out(path);
    if (!out) fogest::fail(fogest::ErrorCode::Io, fmt::format("cannot open {} for writing", path));
    out << "trial,ok,beta_radiance,beta_intensity,error\n";
    for (const auto& t : result->result.trials) {
      std::string error = t.error;
      std::replace(error.begin(), error.end(), ',', ';');
      out << t.index << ',' << (t.ok ? 1 : 0) << ',' << fogest::format_double(t.beta_radiance) << ','
          << fogest::format_double(t.beta_intensity) << ',' << error << '\n';
    }
    if (!out) fogest::fail(fogest::ErrorCode::Io, fmt::format("failed writing {}", path));
  });
}

void fogest_gamma_bias_destroy(fogest_gamma_bias* result) { delete result; }

void fogest_recovery_config_default(fogest_recovery_config* config) {
  if (config == nullptr) return;
  const fogest::RecoveryConfig d;
  config->seed = d.seed;
  config->threads = d.threads;
  config->noise_std = d.noise.std;
  config->quantize = d.noise.quantize;
  config->outlier_fraction = d.noise.outlier_fraction;
  config->outlier_magnitude = d.noise.outlier_magnitude;
  config->landmarks = d.landmarks;
  config->frames = d.trajectory.frames;
  config->window = d.window;
}

const char* fogest_method_name(int method) {
  if (method < 0 || method >= FOGEST_METHOD_COUNT) return nullptr;
  return fogest::to_string(fogest::kAllMethods[method]).data();
}

fogest_status fogest_recovery_run(const fogest_recovery_config* config, fogest_recovery** out) {
  return guarded([&] {
    need(out, "out");
    fogest::RecoveryConfig c;
    if (config) {
      c.seed = config->seed;
      c.threads = config->threads;
      c.noise.std = config->noise_std;
      c.noise.quantize = config->quantize != 0;
      c.noise.outlier_fraction = config->outlier_fraction;
      c.noise.outlier_magnitude = config->outlier_magnitude;
      c.landmarks = config->landmarks;
      c.trajectory.frames = config->frames;
      c.window = config->window;
    }
    *out = make_handle(fogest_recovery{fogest::run_recovery_suite(c)});
  });
}

fogest_status fogest_recovery_summary(const fogest_recovery* result, int method, fogest_metrics* beta,
                                      fogest_metrics* l_inf, size_t* failures) {
  return guarded([&] {
    need(result, "result");
    if (method < 0 || method >= FOGEST_METHOD_COUNT) fogest::fail(fogest::ErrorCode::Range, "method out of range");
    const fogest::MethodSummary& s = result->report.find(fogest::kAllMethods[method]);
    if (beta) *beta = to_c(s.beta);
    if (l_inf) *l_inf = to_c(s.l_inf);
    if (failures) *failures = s.failures;
  });
}

fogest_status fogest_recovery_save(const fogest_recovery* result, const char* directory) {
  return guarded([&] {
    need(result, "result");
    need(directory, "directory");
    fogest::write_recovery_report(result->report, directory);
  });
}

void fogest_recovery_destroy(fogest_recovery* result) { delete result; }

fogest_status fogest_histogram_demo(double visibility, double a, double a_error, uint64_t seed,
                                    fogest_histogram** unbounded, fogest_histogram** bounded) {
  return guarded([&] {
    need(unbounded, "unbounded");
    need(bounded, "bounded");
    fogest::HistogramDemoConfig c;
    c.visibility = visibility;
    c.a = a;
    c.a_error = a_error;
    c.noise.seed = seed;
    fogest::HistogramDemo demo = fogest::run_histogram_demo(c);
    auto* u = make_handle(fogest_histogram{std::move(demo.unbounded)});
    try {
      *bounded = make_handle(fogest_histogram{std::move(demo.bounded)});
    } catch (...) {
      delete u;
      throw;
    }
    *unbounded = u;
  });
}

// ---- Metrics ----------------------------------------------------------------------

fogest_status fogest_compute_metrics(const double* estimates, size_t count, const double* truth,
                                     double truth_scalar, fogest_metrics* out) {
  return guarded([&] {
    need(out, "out");
    if (count > 0) need(estimates, "estimates");
    const std::span<const double> est(estimates, count);
    *out = to_c(truth ? fogest::compute_metrics(est, std::span<const double>(truth, count))
                      : fogest::compute_metrics(est, truth_scalar));
  });
}

fogest_status fogest_metrics_from_csv(const char* path, const char* column, const char* truth_column,
                                      double truth_scalar, fogest_metrics* out) {
  return guarded([&] {
    need(path, "path");
    need(column, "column");
    need(out, "out");
    const std::vector<double> est = fogest::read_csv_column(path, column);
    if (truth_column) {
      const std::vector<double> truth = fogest::read_csv_column(path, truth_column);
      *out = to_c(fogest::compute_metrics(est, truth));
    } else {
      *out = to_c(fogest::compute_metrics(est, truth_scalar));
    }
  });
}

fogest_status fogest_metrics_save_csv(const fogest_metrics* metrics, const char* label, const char* parameter,
                                      const char* path) {
  return guarded([&] {
    need(metrics, "metrics");
    need(label, "label");
    need(parameter, "parameter");
    need(path, "path");
    const fogest::MetricsRow row{label, parameter, from_c(*metrics)};
    fogest::write_metrics_csv(std::span<const fogest::MetricsRow>(&row, 1), path);
  });
}

}  // extern "C"
