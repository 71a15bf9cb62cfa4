#include <cmath>
#include <fstream>
#include <set>

#include "doctest.h"
#include "fogest/simulator.hpp"
#include "test_helpers.hpp"

using namespace fogest;
using doctest::Approx;

namespace {

NoiseSpec clean() {
  NoiseSpec n;
  n.std = 0.0;
  return n;
}

}  // namespace

TEST_CASE("derive_seed") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("generate_scene: distance schedule") {
  SceneSpec spec;
  spec.landmarks = 8;
  spec.distances = {50, 40, 30, 20};
  spec.distance_jitter = 2.0;
  const FogParams fog{0.03, 190.0};
  const GammaMap map(0.01, 2.0, 1.0);
  const Scene s = generate_scene(spec, fog, map, clean());
  CHECK(s.graph.frames().size() == 4);
  CHECK(s.graph.landmarks().size() == 8);
  CHECK(s.graph.edges().size() == 32);
  CHECK(s.truth.fog.beta == 0.03);
  CHECK(s.truth.map == map);
  for (const Edge& e : s.graph.edges()) {
    const double lc = s.truth.lc.at(e.landmark);
    CHECK(lc >= map.expand(20.0));
    CHECK(lc <= map.expand(235.0));
    CHECK(e.distance >= spec.distances[static_cast<std::size_t>(e.frame)]);
    CHECK(e.distance < spec.distances[static_cast<std::size_t>(e.frame)] + 2.0);
    CHECK(e.intensity[0] == Approx(map.compress(predict_radiance(lc, fog, e.distance))).epsilon(1e-12));
  }
  // Frame positions advance by the distance covered.
  CHECK(s.graph.frames().at(3)->x == 30.0);
}

TEST_CASE("generate_scene: approach schedule and determinism") {
  SceneSpec spec;
  spec.landmarks = 5;
  spec.approach = {60.0, 10.0, 6};
  NoiseSpec noise;
  noise.std = 1.0;
  noise.seed = 11;
  noise.quantize = true;
  const Scene a = generate_scene(spec, IntensityFogParams{0.02, 200.0}, noise);
  const Scene b = generate_scene(spec, IntensityFogParams{0.02, 200.0}, noise);
  CHECK(a.graph == b.graph);
  CHECK(a.truth.lc == b.truth.lc);
  std::set<double> distances;
  for (const Edge& e : a.graph.edges()) {
    distances.insert(e.distance);
    CHECK(e.intensity[0] == std::round(e.intensity[0]));
    CHECK(e.intensity[0] >= 0.0);
    CHECK(e.intensity[0] <= 255.0);
  }
  CHECK(distances == std::set<double>{10, 20, 30, 40, 50, 60});
  noise.seed = 12;
  CHECK_FALSE(generate_scene(spec, IntensityFogParams{0.02, 200.0}, noise).graph == a.graph);
}

TEST_CASE("generate_scene: trajectory") {
  SceneSpec spec;
  spec.landmarks = 30;
  spec.trajectory = TrajectorySpec{};
  const Scene s = generate_scene(spec, FogParams{0.02, 200.0}, GammaMap{}, clean());
  CHECK(s.graph.frames().size() == 100);
  CHECK_FALSE(s.graph.edges().empty());
  for (const Edge& e : s.graph.edges()) {
    const Vec3 cam = *s.graph.frames().at(e.frame);
    const Vec3 lm = *s.graph.landmarks().at(e.landmark);
    CHECK(lm.x > cam.x);
    CHECK(e.distance == Approx(distance(cam, lm)));
    CHECK(e.distance >= 5.0);
    CHECK(e.distance <= 80.0);
  }
}

TEST_CASE("generate_scene: outliers") {
  SceneSpec spec;
  spec.landmarks = 40;
  spec.distances = {40, 30, 20, 10};
  NoiseSpec all = clean();
  all.outlier_fraction = 1.0;
  all.outlier_magnitude = 40.0;
  const FogParams fog{0.02, 128.0};
  const Scene s = generate_scene(spec, fog, GammaMap{}, all);
  for (const Edge& e : s.graph.edges()) {
    const double offset = std::abs(e.intensity[0] - predict_radiance(s.truth.lc.at(e.landmark), fog, e.distance));
    const bool clamped = e.intensity[0] == 0.0 || e.intensity[0] == 255.0;
    if (!clamped) {
      CHECK(offset >= 20.0 - 1e-9);
      CHECK(offset <= 40.0 + 1e-9);
    }
  }
}

TEST_CASE("generate_scene: validation") {
  SceneSpec spec;
  spec.landmarks = 0;
  CHECK_FOGEST_ERROR(generate_scene(spec, FogParams{0.02, 200}, GammaMap{}, clean()), ErrorCode::InvalidArgument);
  spec.landmarks = 3;
  spec.distances = {10, -1};
  CHECK_FOGEST_ERROR(generate_scene(spec, FogParams{0.02, 200}, GammaMap{}, clean()), ErrorCode::InvalidArgument);
  spec.distances.clear();
  NoiseSpec n;
  n.std = -1;
  CHECK_FOGEST_ERROR(generate_scene(spec, FogParams{0.02, 200}, GammaMap{}, n), ErrorCode::InvalidArgument);
}

TEST_CASE("ground truth JSON") {
  TempDir dir("truth");
  const GroundTruth t{{0.0123, 201.5}, GammaMap(0.02, 1.8, 3.0), {{0, 12.5}, {7, 99.0}}};
  write_ground_truth(t, dir / "t.json");
  const GroundTruth back = read_ground_truth(dir / "t.json");
  CHECK(back.fog.beta == t.fog.beta);
  CHECK(back.fog.l_inf == t.fog.l_inf);
  CHECK(back.map == t.map);
  CHECK(back.lc == t.lc);
  CHECK(ground_truth_json(t).find("\"visibility\"") != std::string::npos);
  {
    std::ofstream(dir / "bad.json") << "{\"format\": \"other\"}";
  }
  CHECK_FOGEST_ERROR(read_ground_truth(dir / "bad.json"), ErrorCode::Parse);
  CHECK_FOGEST_ERROR(read_ground_truth(dir / "missing.json"), ErrorCode::Io);
}

TEST_CASE("scene config") {
  SUBCASE("full document") {
    const SceneConfig c = parse_scene_config(R"({
      "landmarks": 12, "lc_range": [10, 200], "distance_jitter": 1.5,
      "approach": {"far": 80, "near": 20, "frames": 5},
      "fog": {"visibility": 60, "l_inf": 210},
      "noise": {"std": 0.5, "seed": 9, "quantize": true, "domain": "radiance", "outlier_fraction": 0.1}
    })");
    CHECK(c.scene.landmarks == 12);
    REQUIRE(c.scene.lc_range.has_value());
    CHECK(c.scene.lc_range->upper == 200.0);
    CHECK(c.scene.approach.frames == 5);
    CHECK(c.fog.beta == Approx(beta_from_visibility(60.0)));
    CHECK(c.fog.l_inf == 210.0);
    CHECK(c.noise.domain == NoiseDomain::Radiance);
    CHECK(c.noise.seed == 9);
    CHECK(c.noise.outlier_fraction == 0.1);
    CHECK_FALSE(c.scene.trajectory.has_value());
  }
  SUBCASE("trajectory and defaults") {
    const SceneConfig c = parse_scene_config(R"({"trajectory": {"frames": 30}, "fog": {"beta": 0.05}})");
    REQUIRE(c.scene.trajectory.has_value());
    CHECK(c.scene.trajectory->frames == 30);
    CHECK(c.scene.trajectory->max_range == 80.0);
    CHECK(c.fog.beta == 0.05);
    CHECK(c.fog.l_inf == 200.0);
  }
  SUBCASE("errors") {
    CHECK_FOGEST_ERROR(parse_scene_config("{"), ErrorCode::Parse);
    CHECK_FOGEST_ERROR(parse_scene_config(R"({"landmark": 3})"), ErrorCode::Parse);
    CHECK_FOGEST_ERROR(parse_scene_config(R"({"fog": {"beta": 0.1, "visibility": 30}})"), ErrorCode::Parse);
    CHECK_FOGEST_ERROR(parse_scene_config(R"({"noise": {"domain": "log"}})"), ErrorCode::Parse);
    CHECK_FOGEST_ERROR(parse_scene_config(R"({"lc_range": [1]})"), ErrorCode::Parse);
    CHECK_FOGEST_ERROR(parse_scene_config(R"({"landmarks": "many"})"), ErrorCode::Parse);
    CHECK_FOGEST_ERROR(parse_scene_config(R"({"landmarks": -2})"), ErrorCode::InvalidArgument);
    CHECK_FOGEST_ERROR(read_scene_config("/nonexistent/scene.json"), ErrorCode::Io);
  }
  SUBCASE("shipped configs") {
    const SceneConfig c = read_scene_config(FOGEST_TEST_DATA_DIR "/scene_default.json");
    CHECK(c.scene.landmarks == 40);
    CHECK(c.scene.trajectory.has_value());
  }
}

TEST_CASE("sliding windows") {
  LocalMapGraph g;
  for (int m = 0; m < 7; ++m) g.add_frame(m * 2);
  const auto w = sliding_windows(g, 3, 2);
  REQUIRE(w.size() == 3);
  CHECK(w[0] == std::set<FrameId>{0, 2, 4});
  CHECK(w[1] == std::set<FrameId>{4, 6, 8});
  CHECK(w[2] == std::set<FrameId>{8, 10, 12});
  CHECK(sliding_windows(g, 10, 1).size() == 1);
  CHECK(sliding_windows(LocalMapGraph{}, 3, 1).empty());
  CHECK_FOGEST_ERROR(sliding_windows(g, 0, 1), ErrorCode::InvalidArgument);
}

TEST_CASE("normalized gamma map") {
  const GammaMap m = normalized_gamma_map(2.2);
  CHECK(m.expand(0.0) == 0.0);
  CHECK(m.expand(255.0) == Approx(255.0));
  CHECK(normalized_gamma_map(1.0).is_identity());
  CHECK_FOGEST_ERROR(normalized_gamma_map(0.0), ErrorCode::InvalidArgument);
}

TEST_CASE("gamma-bias experiment") {
  GammaBiasConfig c;
  c.trials = 5;
  c.noise.seed = 4;
  SUBCASE("identity map gives identical estimates") {
    c.map = normalized_gamma_map(1.0);
    const GammaBiasResult r = gamma_bias_experiment(c);
    CHECK(r.failed == 0);
    CHECK(r.trials.size() == 5);
    for (const auto& t : r.trials) CHECK(std::abs(t.beta_intensity - t.beta_radiance) < 1e-9);
    CHECK(r.mean_beta_radiance == Approx(0.025).epsilon(0.1));
  }
  SUBCASE("gamma above one inflates the intensity estimate") {
    c.map = normalized_gamma_map(2.2);
    const GammaBiasResult r = gamma_bias_experiment(c);
    CHECK(r.mean_beta_intensity > r.mean_beta_radiance);
  }
  SUBCASE("deterministic") {
    c.map = normalized_gamma_map(1.5);
    const GammaBiasResult a = gamma_bias_experiment(c);
    const GammaBiasResult b = gamma_bias_experiment(c);
    for (std::size_t k = 0; k < a.trials.size(); ++k) CHECK(a.trials[k].beta_intensity == b.trials[k].beta_intensity);
  }
  SUBCASE("validation") {
    c.trials = 0;
    CHECK_FOGEST_ERROR(gamma_bias_experiment(c), ErrorCode::InvalidArgument);
    c.trials = 1;
    c.scene.trajectory = TrajectorySpec{};
    CHECK_FOGEST_ERROR(gamma_bias_experiment(c), ErrorCode::InvalidArgument);
  }
}
