#include <fstream>

#include "doctest.h"
#include "fogest/image.hpp"
#include "test_helpers.hpp"

using namespace fogest;

TEST_CASE("quantize") {
  Image img(3, 1, 1);
  img.at(0, 0) = -4.0;
  img.at(1, 0) = 127.5;
  img.at(2, 0) = 300.0;
  const Image q = quantize(img);
  CHECK(q.at(0, 0) == 0.0);
  CHECK(q.at(1, 0) == 128.0);
  CHECK(q.at(2, 0) == 255.0);
}

TEST_CASE("pnm round trip") {
  TempDir dir("pnm");
  Image gray(5, 4, 1);
  Image rgb(3, 2, 3);
  for (std::size_t k = 0; k < gray.values().size(); ++k) gray.values()[k] = static_cast<double>((k * 37) % 256);
  for (std::size_t k = 0; k < rgb.values().size(); ++k) rgb.values()[k] = static_cast<double>((k * 53) % 256);
  write_pnm(gray, dir / "g.pgm");
  write_pnm(rgb, dir / "c.ppm");
  CHECK(read_pnm(dir / "g.pgm") == gray);
  CHECK(read_pnm(dir / "c.ppm") == rgb);

  std::ofstream(dir / "ascii.pgm") << "P2\n# comment\n2 2\n255\n0 10\n20 255\n";
  const Image a = read_pnm(dir / "ascii.pgm");
  CHECK(a.width() == 2);
  CHECK(a.at(1, 1) == 255.0);

  Image frac(1, 1, 1, 10.5);
  CHECK_FOGEST_ERROR(write_pnm(frac, dir / "f.pgm"), ErrorCode::Range);
  std::ofstream(dir / "bad.pgm") << "P9\n1 1\n255\n0\n";
  CHECK_FOGEST_ERROR(read_pnm(dir / "bad.pgm"), ErrorCode::Parse);
  CHECK_FOGEST_ERROR(read_pnm(dir / "missing.pgm"), ErrorCode::Io);
}

TEST_CASE("raster round trip") {
  TempDir dir("raster");
  Image r(4, 3, 1);
  for (std::size_t k = 0; k < r.values().size(); ++k) r.values()[k] = 0.25 * static_cast<double>(k) + 1.5;
  write_raster(r, dir / "d.raw");
  CHECK(read_raster(dir / "d.raw") == r);
  write_raster(r, dir / "d.txt");
  CHECK(read_raster(dir / "d.txt") == r);
  std::ofstream(dir / "short.txt") << "2\n2\n1 2 3\n";
  CHECK_FOGEST_ERROR(read_raster(dir / "short.txt"), ErrorCode::Parse);
}
