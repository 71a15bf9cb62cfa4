#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "fogest/fogest.h"

using doctest::Approx;

namespace {

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("fogest_capi_" + name);
}

// Noiseless map: `landmarks` landmarks seen at six distances.
fogest_map* noiseless_map(double beta, double l_inf, int landmarks) {
  fogest_map* map = nullptr;
  REQUIRE(fogest_map_create(1, &map) == FOGEST_OK);
  for (int m = 0; m < 6; ++m) {
    const double pos[3] = {10.0 * m, 0.0, 0.0};
    REQUIRE(fogest_map_add_frame(map, m, pos) == FOGEST_OK);
  }
  for (int n = 0; n < landmarks; ++n) {
    REQUIRE(fogest_map_add_landmark(map, n, nullptr) == FOGEST_OK);
    const double lc = 20.0 + 200.0 * n / (landmarks - 1);
    for (int m = 0; m < 6; ++m) {
      const double d = 60.0 - 10.0 * m + 0.3 * n;
      double i = 0.0;
      REQUIRE(fogest_predict_radiance(lc, beta, l_inf, d, &i) == FOGEST_OK);
      REQUIRE(fogest_map_add_edge(map, m, n, d, &i) == FOGEST_OK);
    }
  }
  return map;
}

}  // namespace

TEST_CASE("capi: status and errors") {
  CHECK(std::string(fogest_version()) == "1.0.0");
  CHECK(std::string(fogest_status_string(FOGEST_OK)) == "ok");
  CHECK(std::string(fogest_status_string(FOGEST_ERR_INTERNAL)) == "internal error");
  CHECK(std::string(fogest_status_string(static_cast<fogest_status>(42))) == "unknown status");

  double out = 0.0;
  CHECK(fogest_transmission(-1.0, 10.0, &out) == FOGEST_ERR_INVALID_ARGUMENT);
  CHECK(std::string(fogest_last_error()).size() > 0);
  CHECK(fogest_transmission(0.1, 10.0, nullptr) == FOGEST_ERR_INVALID_ARGUMENT);
  CHECK(std::string(fogest_last_error()).find("out") != std::string::npos);
  CHECK(fogest_transmission(0.1, 10.0, &out) == FOGEST_OK);
  CHECK(out == Approx(std::exp(-1.0)));
}

TEST_CASE("capi: scalar functions") {
  double v = 0.0, b = 0.0, l = 0.0, i = 0.0;
  REQUIRE(fogest_visibility_from_beta(0.05, &v) == FOGEST_OK);
  CHECK(v == Approx(-std::log(0.05) / 0.05));
  REQUIRE(fogest_beta_from_visibility(v, &b) == FOGEST_OK);
  CHECK(b == Approx(0.05));
  REQUIRE(fogest_predict_radiance(100.0, 0.05, 200.0, 0.0, &l) == FOGEST_OK);
  CHECK(l == 100.0);
  REQUIRE(fogest_synthesize_fog_pixel(0.0, 0.1, 200.0, 1e6, &i) == FOGEST_OK);
  CHECK(i == Approx(200.0));

  fogest_channel ch = FOGEST_CHANNEL_GRAY;
  CHECK(fogest_channel_parse("green", &ch) == FOGEST_OK);
  CHECK(ch == FOGEST_CHANNEL_GREEN);
  CHECK(fogest_channel_parse("purple", &ch) != FOGEST_OK);
}

TEST_CASE("capi: images") {
  const std::vector<double> px{0, 10, 20, 30, 40, 50};
  fogest_image* img = nullptr;
  REQUIRE(fogest_image_create(3, 2, 1, px.data(), &img) == FOGEST_OK);
  int w = 0, h = 0, c = 0;
  REQUIRE(fogest_image_info(img, &w, &h, &c) == FOGEST_OK);
  CHECK(w == 3);
  CHECK(h == 2);
  CHECK(c == 1);
  const auto path = scratch("img.pgm").string();
  REQUIRE(fogest_image_save_pnm(img, path.c_str()) == FOGEST_OK);
  fogest_image* back = nullptr;
  REQUIRE(fogest_image_load_pnm(path.c_str(), &back) == FOGEST_OK);
  const double* data = nullptr;
  REQUIRE(fogest_image_data(back, &data) == FOGEST_OK);
  CHECK(data[5] == 50.0);

  fogest_image* dark = nullptr;
  REQUIRE(fogest_dark_channel(img, 1, &dark) == FOGEST_OK);
  REQUIRE(fogest_image_data(dark, &data) == FOGEST_OK);
  CHECK(data[5] == 10.0);
  double a = 0.0;
  size_t n = 0;
  CHECK(fogest_estimate_a(img, 0, 1, &a, 1, &n) == FOGEST_OK);
  CHECK(n == 1);
  CHECK(a == 50.0);

  CHECK(fogest_image_create(0, 2, 1, nullptr, &img) == FOGEST_ERR_INVALID_ARGUMENT);
  CHECK(fogest_image_load_pnm("/nonexistent.pgm", &back) == FOGEST_ERR_IO);
  fogest_image_destroy(img);
  fogest_image_destroy(back);
  fogest_image_destroy(dark);
  fogest_image_destroy(nullptr);
  std::filesystem::remove(path);
}

TEST_CASE("capi: gamma maps") {
  fogest_gamma_maps* maps = nullptr;
  REQUIRE(fogest_gamma_maps_create_identity(&maps) == FOGEST_OK);
  REQUIRE(fogest_gamma_maps_set(maps, FOGEST_CHANNEL_RED, 0.01, 2.0, 1.0) == FOGEST_OK);
  double l = 0.0, i = 0.0;
  REQUIRE(fogest_gamma_expand(maps, FOGEST_CHANNEL_RED, 10.0, &l) == FOGEST_OK);
  CHECK(l == Approx(2.0));
  REQUIRE(fogest_gamma_compress(maps, FOGEST_CHANNEL_RED, 2.0, 0, &i) == FOGEST_OK);
  CHECK(i == Approx(10.0));
  REQUIRE(fogest_gamma_expand(maps, FOGEST_CHANNEL_GRAY, 10.0, &l) == FOGEST_OK);
  CHECK(l == 10.0);
  CHECK(fogest_gamma_expand(maps, FOGEST_CHANNEL_RED, 300.0, &l) == FOGEST_ERR_INVALID_ARGUMENT);
  CHECK(fogest_gamma_compress(maps, FOGEST_CHANNEL_RED, 1e9, 0, &i) == FOGEST_ERR_RANGE);
  CHECK(fogest_gamma_compress(maps, FOGEST_CHANNEL_RED, 1e9, 1, &i) == FOGEST_OK);
  CHECK(i == 255.0);

  const auto path = scratch("gamma.json").string();
  REQUIRE(fogest_gamma_maps_save(maps, path.c_str()) == FOGEST_OK);
  fogest_gamma_maps* back = nullptr;
  REQUIRE(fogest_gamma_maps_load(path.c_str(), &back) == FOGEST_OK);
  double alpha = 0, gamma = 0, zeta = 0;
  REQUIRE(fogest_gamma_maps_get(back, FOGEST_CHANNEL_RED, &alpha, &gamma, &zeta) == FOGEST_OK);
  CHECK(alpha == 0.01);
  CHECK(gamma == 2.0);
  CHECK(zeta == 1.0);
  fogest_gamma_maps_destroy(maps);
  fogest_gamma_maps_destroy(back);
  std::filesystem::remove(path);

  std::vector<double> in, pw;
  for (int k = 0; k < 10; ++k) {
    in.push_back(20.0 + 20.0 * k);
    pw.push_back(3e-4 * std::pow(in.back(), 2.2) + 0.5);
  }
  REQUIRE(fogest_fit_gamma(in.data(), pw.data(), in.size(), &alpha, &gamma, &zeta, nullptr) == FOGEST_OK);
  CHECK(gamma == Approx(2.2).epsilon(1e-6));
  CHECK(zeta == Approx(0.5).epsilon(1e-6));
  CHECK(fogest_fit_gamma(in.data(), pw.data(), 3, &alpha, &gamma, &zeta, nullptr) != FOGEST_OK);
}

TEST_CASE("capi: map and estimator") {
  fogest_map* map = noiseless_map(0.03, 200.0, 20);
  size_t frames = 0, landmarks = 0, edges = 0;
  REQUIRE(fogest_map_counts(map, &frames, &landmarks, &edges) == FOGEST_OK);
  CHECK(frames == 6);
  CHECK(landmarks == 20);
  CHECK(edges == 120);
  size_t q = 0;
  REQUIRE(fogest_map_qualifying_landmarks(map, 4, &q) == FOGEST_OK);
  CHECK(q == 20);
  int64_t ids[4] = {};
  size_t count = 0;
  REQUIRE(fogest_map_frame_ids(map, ids, 4, &count) == FOGEST_OK);
  CHECK(count == 6);
  CHECK(ids[3] == 3);
  double pos[3] = {};
  int has = 0;
  REQUIRE(fogest_map_frame_position(map, 5, pos, &has) == FOGEST_OK);
  CHECK(has == 1);
  CHECK(pos[0] == 50.0);
  const double bad_i = 10.0;
  CHECK(fogest_map_add_edge(map, 0, 0, 5.0, &bad_i) == FOGEST_ERR_VALIDATION);  // duplicate edge

  fogest_estimator_config cfg;
  fogest_estimator_config_default(&cfg);
  CHECK(cfg.xi_k == 15);
  CHECK(cfg.initial_beta == 0.014);
  fogest_estimator* est = nullptr;
  REQUIRE(fogest_estimator_create(&cfg, &est) == FOGEST_OK);
  double lc = 0.0;
  CHECK(fogest_estimator_landmark_radiance(est, 0, &lc) == FOGEST_ERR_INVALID_ARGUMENT);

  fogest_estimate e{};
  REQUIRE(fogest_estimator_update(est, map, nullptr, FOGEST_CHANNEL_GRAY, &e) == FOGEST_OK);
  CHECK(e.beta == Approx(0.03).epsilon(1e-3));
  CHECK(e.l_inf == Approx(200.0).epsilon(1e-3));
  CHECK(e.landmarks == 20);
  CHECK(e.observations == 120);
  CHECK(e.degraded == 0);
  REQUIRE(fogest_estimator_landmark_radiance(est, 0, &lc) == FOGEST_OK);
  CHECK(lc == Approx(20.0).epsilon(1e-3));

  int go = 0;
  const double here[3] = {0, 0, 0}, near[3] = {4.0, 0, 0};
  REQUIRE(fogest_estimator_should_update(est, here, &go) == FOGEST_OK);
  CHECK(go == 1);
  REQUIRE(fogest_estimator_mark_updated(est, here) == FOGEST_OK);
  REQUIRE(fogest_estimator_should_update(est, near, &go) == FOGEST_OK);
  CHECK(go == 0);

  // A restricted map without enough frames fails and leaves the state alone.
  const int64_t keep[2] = {0, 1};
  fogest_map* small = nullptr;
  REQUIRE(fogest_map_restrict(map, keep, 2, &small) == FOGEST_OK);
  fogest_estimate e2{};
  CHECK(fogest_estimator_update(est, small, nullptr, FOGEST_CHANNEL_GRAY, &e2) == FOGEST_ERR_NOT_ENOUGH_DATA);
  CHECK(std::string(fogest_last_error()).find("xi_K") != std::string::npos);
  REQUIRE(fogest_estimator_landmark_radiance(est, 0, &lc) == FOGEST_OK);
  CHECK(fogest_estimator_update(est, map, nullptr, FOGEST_CHANNEL_RED, &e2) != FOGEST_OK);

  cfg.beta_lower = 1.0;
  fogest_estimator* bad = nullptr;
  CHECK(fogest_estimator_create(&cfg, &bad) == FOGEST_ERR_INVALID_ARGUMENT);
  CHECK(bad == nullptr);

  const auto path = scratch("map.fogmap").string();
  REQUIRE(fogest_map_save(map, path.c_str()) == FOGEST_OK);
  fogest_map* loaded = nullptr;
  REQUIRE(fogest_map_load(path.c_str(), &loaded) == FOGEST_OK);
  REQUIRE(fogest_map_counts(loaded, &frames, &landmarks, &edges) == FOGEST_OK);
  CHECK(edges == 120);
  std::filesystem::remove(path);

  fogest_map_destroy(loaded);
  fogest_map_destroy(small);
  fogest_map_destroy(map);
  fogest_estimator_destroy(est);
}

TEST_CASE("capi: histogram baseline") {
  fogest_map* map = nullptr;
  REQUIRE(fogest_map_create(1, &map) == FOGEST_OK);
  for (int m = 0; m < 4; ++m) REQUIRE(fogest_map_add_frame(map, m, nullptr) == FOGEST_OK);
  for (int n = 0; n < 5; ++n) {
    REQUIRE(fogest_map_add_landmark(map, n, nullptr) == FOGEST_OK);
    for (int m = 0; m < 4; ++m) {
      const double d = 40.0 - 10.0 * m;
      double i = 0.0;
      REQUIRE(fogest_synthesize_fog_pixel(20.0 + 30.0 * n, 0.04, 200.0, d, &i) == FOGEST_OK);
      REQUIRE(fogest_map_add_edge(map, m, n, d, &i) == FOGEST_OK);
    }
  }
  fogest_histogram_config hc;
  fogest_histogram_config_default(&hc);
  fogest_histogram* h = nullptr;
  REQUIRE(fogest_beta_histogram(map, FOGEST_CHANNEL_GRAY, 200.0, 4, &hc, &h) == FOGEST_OK);
  double beta = 0.0;
  size_t accepted = 0;
  REQUIRE(fogest_histogram_beta(h, &beta, &accepted) == FOGEST_OK);
  CHECK(beta == Approx(0.04));
  CHECK(accepted == 25);  // (40, 30) is below the inverse-depth gap
  fogest_histogram_destroy(h);
  fogest_map_destroy(map);
}

TEST_CASE("capi: simulate") {
  const char* config = R"({"landmarks": 16, "distances": [50, 40, 30, 20], "fog": {"beta": 0.02, "l_inf": 190},
                           "noise": {"std": 0}})";
  fogest_map* map = nullptr;
  char* truth = nullptr;
  const uint64_t seed = 5;
  REQUIRE(fogest_simulate(config, nullptr, &seed, &map, &truth) == FOGEST_OK);
  REQUIRE(truth != nullptr);
  CHECK(std::string(truth).find("fogest-truth") != std::string::npos);
  fogest_string_free(truth);
  size_t f = 0, l = 0, e = 0;
  REQUIRE(fogest_map_counts(map, &f, &l, &e) == FOGEST_OK);
  CHECK(e == 64);
  fogest_map_destroy(map);
  CHECK(fogest_simulate("{bad", nullptr, nullptr, &map, nullptr) == FOGEST_ERR_PARSE);
  CHECK(fogest_simulate(config, nullptr, nullptr, nullptr, nullptr) == FOGEST_ERR_INVALID_ARGUMENT);
}

TEST_CASE("capi: gamma bias and metrics") {
  fogest_gamma_bias_config gc;
  fogest_gamma_bias_config_default(&gc);
  CHECK(gc.gamma == 2.2);
  gc.trials = 3;
  fogest_gamma_bias* r = nullptr;
  REQUIRE(fogest_gamma_bias_run(&gc, &r) == FOGEST_OK);
  fogest_gamma_bias_summary s{};
  REQUIRE(fogest_gamma_bias_summary_get(r, &s) == FOGEST_OK);
  CHECK(s.trials == 3);
  CHECK(s.mean_beta_intensity > s.mean_beta_radiance);
  fogest_gamma_bias_destroy(r);

  const double est[2] = {11.0, 9.0};
  fogest_metrics m{};
  REQUIRE(fogest_compute_metrics(est, 2, nullptr, 10.0, &m) == FOGEST_OK);
  CHECK(m.rmse == Approx(1.0));
  CHECK(m.count == 2);
  CHECK(fogest_compute_metrics(est, 0, nullptr, 10.0, &m) == FOGEST_ERR_INVALID_ARGUMENT);
  CHECK(std::string(fogest_method_name(0)) == "ours");
  CHECK(fogest_method_name(99) == nullptr);
}
