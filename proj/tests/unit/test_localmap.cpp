#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fogest/localmap.hpp"
#include "test_helpers.hpp"

using namespace fogest;

namespace {

// 4 frames, 5 landmarks, 17 edges. Landmarks 2-4 appear in every frame;
// landmark 1 in three frames and landmark 5 in two.
LocalMapGraph sparse_example() {
  LocalMapGraph g;
  for (FrameId m = 1; m <= 4; ++m) g.add_frame(m, Vec3{static_cast<double>(m), 0.0, 0.0});
  for (LandmarkId n = 1; n <= 5; ++n) g.add_landmark(n);
  double i = 10.0;
  const auto edge = [&](FrameId m, LandmarkId n) { g.add_edge({m, n, 50.0 - 5.0 * m + n, {i += 3.0, 0, 0}}); };
  for (FrameId m = 1; m <= 4; ++m)
    for (LandmarkId n = 2; n <= 4; ++n) edge(m, n);
  for (FrameId m = 1; m <= 3; ++m) edge(m, 1);
  for (FrameId m = 3; m <= 4; ++m) edge(m, 5);
  return g;
}

}  // namespace

TEST_CASE("graph invariants") {
  LocalMapGraph g;
  g.add_frame(0);
  g.add_landmark(7);
  g.add_edge({0, 7, 3.0, {100, 0, 0}});
  CHECK(g.has_edge(0, 7));
  CHECK_FOGEST_ERROR(g.add_edge({0, 7, 4.0, {90, 0, 0}}), ErrorCode::Validation);
  CHECK_FOGEST_ERROR(g.add_edge({1, 7, 4.0, {90, 0, 0}}), ErrorCode::Validation);
  CHECK_FOGEST_ERROR(g.add_edge({0, 8, 4.0, {90, 0, 0}}), ErrorCode::Validation);
  g.add_landmark(8);
  CHECK_FOGEST_ERROR(g.add_edge({0, 8, 0.0, {90, 0, 0}}), ErrorCode::Validation);
  CHECK_FOGEST_ERROR(g.add_edge({0, 8, -1.0, {90, 0, 0}}), ErrorCode::Validation);
  CHECK_FOGEST_ERROR(g.add_edge({0, 8, 2.0, {256, 0, 0}}), ErrorCode::Validation);
  CHECK_FOGEST_ERROR(g.add_frame(0), ErrorCode::Validation);
  CHECK_FOGEST_ERROR(LocalMapGraph(2), ErrorCode::InvalidArgument);
}

TEST_CASE("generate_dr_pairs") {
  const SelectionThresholds t{4, 15};
  SUBCASE("sparse landmarks are dropped") {
    const LocalMapGraph g = sparse_example();
    REQUIRE(g.frames().size() == 4);
    REQUIRE(g.landmarks().size() == 5);
    REQUIRE(g.edges().size() == 17);
    const ObservationSet obs = generate_dr_pairs(g, GammaMap::identity(), Channel::Gray, t);
    REQUIRE(obs.groups.size() == 3);
    CHECK(obs.groups[0].landmark == 2);
    CHECK(obs.groups[1].landmark == 3);
    CHECK(obs.groups[2].landmark == 4);
    CHECK(obs.pair_count() == 12);
    for (const auto& grp : obs.groups)
      for (std::size_t k = 1; k < grp.pairs.size(); ++k) CHECK(grp.pairs[k - 1].frame < grp.pairs[k].frame);
  }
  SUBCASE("empty graph") { CHECK(generate_dr_pairs(LocalMapGraph(), GammaMap::identity(), Channel::Gray, t).empty()); }
  SUBCASE("boundary inclusion") {
    LocalMapGraph g;
    g.add_landmark(0);
    for (FrameId m = 0; m < 4; ++m) {
      g.add_frame(m);
      g.add_edge({m, 0, 10.0 + m, {50.0 + m, 0, 0}});
    }
    const auto obs = generate_dr_pairs(g, GammaMap::identity(), Channel::Gray, t);
    REQUIRE(obs.groups.size() == 1);
    CHECK(obs.groups[0].pairs.size() == 4);
  }
  SUBCASE("gamma expansion applied") {
    const GammaMap m(0.01, 2.0, 0.5);
    const auto obs = generate_dr_pairs(sparse_example(), m, Channel::Gray, t);
    const Edge e = sparse_example().edges_of(2).front();
    CHECK(obs.groups[0].pairs[0].radiance == doctest::Approx(m.expand(e.intensity[0])));
  }
  SUBCASE("channel selection") {
    LocalMapGraph g(3);
    g.add_frame(0);
    g.add_landmark(0);
    g.add_edge({0, 0, 5.0, {100, 50, 20}});
    const Edge& e = g.edges().front();
    CHECK(channel_intensity(g, e, Channel::Red) == 100);
    CHECK(channel_intensity(g, e, Channel::Blue) == 20);
    CHECK(channel_intensity(g, e, Channel::Gray) == doctest::Approx(to_gray(100, 50, 20)));
    LocalMapGraph gray;
    gray.add_frame(0);
    gray.add_landmark(0);
    gray.add_edge({0, 0, 5.0, {100, 0, 0}});
    CHECK_FOGEST_ERROR(channel_intensity(gray, gray.edges().front(), Channel::Red), ErrorCode::InvalidArgument);
  }
  SUBCASE("thresholds validated") {
    CHECK_FOGEST_ERROR(validate(SelectionThresholds{1, 15}), ErrorCode::InvalidArgument);
    CHECK_FOGEST_ERROR(validate(SelectionThresholds{4, 0}), ErrorCode::InvalidArgument);
  }
}

TEST_CASE("check_sufficiency") {
  const SelectionThresholds t{4, 15};
  ObservationSet obs;
  CHECK_FALSE(check_sufficiency(obs, t));
  for (int n = 0; n < 14; ++n) obs.groups.push_back({n, {}});
  CHECK_FALSE(check_sufficiency(obs, t));
  obs.groups.push_back({14, {}});
  CHECK(check_sufficiency(obs, t));
}

TEST_CASE("restrict_to_frames") {
  const LocalMapGraph g = sparse_example();
  const LocalMapGraph sub = g.restrict_to_frames({3, 4});
  CHECK(sub.frames().size() == 2);
  CHECK(sub.edges().size() == 9);  // 3 shared landmarks x2, landmark 1 once, landmark 5 twice
  CHECK(sub.landmarks().size() == 5);
  CHECK(sub.latest_frame_position() == Vec3{4.0, 0.0, 0.0});
}

TEST_CASE("map file") {
  TempDir dir("map");
  SUBCASE("round trip") {
    const LocalMapGraph g = sparse_example();
    save_map(g, dir / "m.map");
    CHECK(load_map(dir / "m.map") == g);
  }
  SUBCASE("comments and blank lines") {
    std::istringstream in("# header follows\nfogmap 1 1 1 1 1\n\nF 0 1 2 3\nK 5  # landmark\nE 0 5 12.5 80\n");
    const LocalMapGraph g = parse_map(in, "inline");
    CHECK(g.edges().front().distance == 12.5);
    CHECK(g.frames().at(0) == Vec3{1, 2, 3});
  }
  SUBCASE("edges may precede their frame records") {
    std::istringstream in("fogmap 1 1 1 1 1\nE 0 5 12.5 80\nF 0\nK 5\n");
    CHECK(parse_map(in, "inline").edges().size() == 1);
  }
  SUBCASE("duplicate edge") {
    std::istringstream in("fogmap 1 1 1 1 2\nF 0\nK 5\nE 0 5 12.5 80\nE 0 5 13 81\n");
    CHECK_FOGEST_ERROR(parse_map(in, "dup"), ErrorCode::Validation);
  }
  SUBCASE("zero distance") {
    std::istringstream in("fogmap 1 1 1 1 1\nF 0\nK 5\nE 0 5 0 80\n");
    try {
      parse_map(in, "zero");
      FAIL("expected a validation error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Validation);
      CHECK(std::string(e.what()).find("edge (0, 5)") != std::string::npos);
      CHECK(std::string(e.what()).find("zero:4") != std::string::npos);
    }
  }
  SUBCASE("parse errors carry line numbers") {
    std::istringstream in("fogmap 1 1 1 1 1\nF 0\nK 5\nE 0 5 abc 80\n");
    try {
      parse_map(in, "bad");
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Parse);
      CHECK(std::string(e.what()).find("bad:4") != std::string::npos);
    }
  }
  SUBCASE("malformed inputs") {
    const char* cases[] = {
        "",                                            // no header
        "map 1 1 0 0 0\n",                             // wrong magic
        "fogmap 2 1 0 0 0\n",                          // version
        "fogmap 1 2 0 0 0\n",                          // channels
        "fogmap 1 1 1 1 1\nF 0\nK 5\nE 0 5 1\n",       // missing intensity
        "fogmap 1 1 1 0 0\nX 3\n",                     // unknown record
    };
    for (const char* text : cases) {
      std::istringstream in(text);
      CHECK_FOGEST_ERROR(parse_map(in, "m"), ErrorCode::Parse);
    }
    std::istringstream count("fogmap 1 1 2 1 0\nF 0\nK 1\n");
    CHECK_FOGEST_ERROR(parse_map(count, "m"), ErrorCode::Validation);
  }
  SUBCASE("missing file") { CHECK_FOGEST_ERROR(load_map(dir / "nope.map"), ErrorCode::Io); }
}
