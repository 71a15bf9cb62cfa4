#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fogest/baselines.hpp"
#include "fogest/scattering.hpp"
#include "test_helpers.hpp"

using namespace fogest;
using doctest::Approx;

namespace {

ObservationSet intensity_obs(const IntensityFogParams& fog, int landmarks, const std::vector<double>& distances) {
  ObservationSet obs;
  for (int n = 0; n < landmarks; ++n) {
    LandmarkObservations g{n, {}};
    const double j = 10.0 + 7.0 * n;
    for (std::size_t m = 0; m < distances.size(); ++m)
      g.pairs.push_back({static_cast<FrameId>(m), distances[m], synthesize_fog_pixel(j, fog, distances[m])});
    obs.groups.push_back(std::move(g));
  }
  return obs;
}

}  // namespace

TEST_CASE("dark channel") {
  SUBCASE("uniform image") {
    const Image dark = dark_channel(Image(9, 7, 1, 120.0), 2);
    for (double v : dark.values()) CHECK(v == 120.0);
  }
  SUBCASE("one black pixel spreads over its patch") {
    Image img(7, 7, 1, 200.0);
    img.at(3, 3) = 0.0;
    const Image dark = dark_channel(img, 1);
    for (int y = 0; y < 7; ++y)
      for (int x = 0; x < 7; ++x) {
        const bool inside = std::abs(x - 3) <= 1 && std::abs(y - 3) <= 1;
        CHECK(dark.at(x, y) == (inside ? 0.0 : 200.0));
      }
  }
  SUBCASE("minimum over channels") {
    Image img(2, 1, 3);
    img.at(0, 0, 0) = 50;
    img.at(0, 0, 1) = 20;
    img.at(0, 0, 2) = 90;
    img.at(1, 0, 0) = 70;
    img.at(1, 0, 1) = 80;
    img.at(1, 0, 2) = 60;
    const Image dark = dark_channel(img, 0);
    CHECK(dark.channels() == 1);
    CHECK(dark.at(0, 0) == 20.0);
    CHECK(dark.at(1, 0) == 60.0);
  }
  SUBCASE("errors") {
    CHECK_FOGEST_ERROR(dark_channel(Image(), 1), ErrorCode::InvalidArgument);
    CHECK_FOGEST_ERROR(dark_channel(Image(2, 2, 1), -1), ErrorCode::InvalidArgument);
  }
}

TEST_CASE("brightest dark pixels") {
  Image dark(100, 30, 1, 10.0);
  dark.at(5, 2) = 99.0;
  dark.at(7, 2) = 98.0;
  dark.at(9, 2) = 98.0;
  const auto idx = brightest_dark_pixels(dark);  // 3000 pixels -> 3
  REQUIRE(idx.size() == 3);
  CHECK(idx == std::vector<std::size_t>{205, 207, 209});
  CHECK(brightest_dark_pixels(Image(3, 3, 1, 1.0)) == std::vector<std::size_t>{0});
}

TEST_CASE("atmospheric light") {
  SUBCASE("uniform image") {
    const Image img(40, 30, 1, 200.0);
    CHECK(estimate_a_original(img, 3) == std::vector<double>{200.0});
    CHECK(estimate_a_modified(img, 3) == std::vector<double>{200.0});
  }
  SUBCASE("median never exceeds maximum") {
    Image img(100, 30, 1, 100.0);  // 3000 pixels -> 3 selected
    for (int x = 0; x < 10; ++x) img.at(x * 10, 5) = 100.0 + x;
    const double a_orig = estimate_a_original(img, 0)[0];
    const double a_mod = estimate_a_modified(img, 0)[0];
    CHECK(a_orig == 109.0);
    CHECK(a_mod == 108.0);  // median of {107, 108, 109}
    CHECK(a_mod <= a_orig);
  }
  SUBCASE("fogged image recovers A") {
    Image clear(64, 48, 1);
    Image dist(64, 48, 1);
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 64; ++x) {
        clear.at(x, y) = 30.0 + (x * 7 + y * 3) % 60;
        dist.at(x, y) = y < 12 ? 1e4 : 20.0 + y;
      }
    const IntensityFogParams fog{0.05, 204.0};
    const Image foggy = synthesize_fog_image(clear, dist, std::span(&fog, 1));
    CHECK(std::abs(estimate_a_modified(foggy, 3)[0] - 204.0) < 5.0);
    CHECK(std::abs(estimate_a_original(foggy, 3)[0] - 204.0) < 5.0);
  }
}

TEST_CASE("beta histogram") {
  const IntensityFogParams fog{0.1, 204.0};
  const ObservationSet obs = intensity_obs(fog, 15, {10, 15, 20, 30});
  SUBCASE("noiseless votes land in one bin") {
    const BetaHistogram h = estimate_beta_histogram(obs, 204.0, {});
    CHECK(h.beta == Approx(0.1).epsilon(1e-9));
    CHECK(h.bins.size() == 1);
    CHECK(h.accepted == 15 * 6);
  }
  SUBCASE("bounds respected") {
    HistogramConfig c;
    c.bounds = ParameterBounds{0.001, 0.05};
    ObservationSet mixed = obs;
    for (auto& g : intensity_obs({0.02, 204.0}, 5, {10, 15, 20, 30}).groups) {
      g.landmark += 100;
      mixed.groups.push_back(g);
    }
    const BetaHistogram h = estimate_beta_histogram(mixed, 204.0, c);
    CHECK(h.beta == Approx(0.02).epsilon(1e-9));
    CHECK(h.rejected_by_bounds == 15 * 6);
    for (const auto& [i, count] : h.bins) {
      CHECK(h.center(i) >= 0.001 - h.bin_width);
      CHECK(h.center(i) <= 0.05 + h.bin_width);
    }
  }
  SUBCASE("overestimated A lowers the vote") {
    const BetaHistogram h = estimate_beta_histogram(obs, 209.0, {});
    CHECK(h.beta < 0.1);
  }
  SUBCASE("inverse-depth gap") {
    HistogramConfig c;
    c.min_inverse_depth_gap = 0.02;  // drops (15, 20) and (20, 30)
    CHECK(estimate_beta_histogram(obs, 204.0, c).accepted == 15 * 4);
  }
  SUBCASE("no usable pair") {
    const ObservationSet flat = intensity_obs(fog, 3, {10, 10.0001});
    CHECK_FOGEST_ERROR(estimate_beta_histogram(flat, 204.0, {}), ErrorCode::NotEnoughData);
    ObservationSet at_a{{{0, {{0, 10, 204.0}, {1, 30, 204.0}}}}};
    CHECK_FOGEST_ERROR(estimate_beta_histogram(at_a, 204.0, {}), ErrorCode::NotEnoughData);
  }
  SUBCASE("invalid config") {
    HistogramConfig c;
    c.bin_width = 0.0;
    CHECK_FOGEST_ERROR(estimate_beta_histogram(obs, 204.0, c), ErrorCode::InvalidArgument);
  }
  SUBCASE("file output") {
    TempDir dir("hist");
    const BetaHistogram h = estimate_beta_histogram(obs, 204.0, {});
    write_histogram(h, dir / "h.txt");
    std::ifstream in(dir / "h.txt");
    std::string header, line;
    std::getline(in, header);
    CHECK(header.front() == '#');
    std::getline(in, line);
    std::istringstream row(line);
    double centre = 0;
    std::size_t count = 0;
    row >> centre >> count;
    CHECK(centre == Approx(0.1));
    CHECK(count == 90);
  }
}
