#include <cmath>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "fogest/metrics.hpp"
#include "test_helpers.hpp"

using namespace fogest;
using doctest::Approx;

TEST_CASE("median") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_FOGEST_ERROR(median({}), ErrorCode::InvalidArgument);
}

TEST_CASE("compute_metrics") {
  SUBCASE("symmetric errors") {
    const std::vector<double> est{11.0, 9.0};
    const MetricsReport m = compute_metrics(est, 10.0);
    CHECK(m.rmse == Approx(1.0));
    CHECK(m.mae == Approx(1.0));
    CHECK(m.sd == Approx(1.0));
    CHECK(m.bias == Approx(0.0));
    CHECK(m.rmse_rel == Approx(10.0));
    CHECK(m.count == 2);
  }
  SUBCASE("single biased estimate") {
    const std::vector<double> est{7.0};
    const MetricsReport m = compute_metrics(est, 5.0);
    CHECK(m.rmse == Approx(2.0));
    CHECK(m.mae == Approx(2.0));
    CHECK(m.sd == Approx(0.0));
    CHECK(m.bias == Approx(2.0));
    CHECK(m.mae_rel == Approx(40.0));
  }
  SUBCASE("per-estimate truth") {
    const std::vector<double> est{1.1, 2.2, 2.7};
    const std::vector<double> truth{1.0, 2.0, 3.0};
    const MetricsReport m = compute_metrics(est, truth);
    CHECK(m.rmse * m.rmse == Approx(m.sd * m.sd + m.bias * m.bias));
    CHECK(m.mae == Approx(0.2));
    CHECK(m.rmse_rel == Approx(100.0 * std::sqrt((0.01 + 0.01 + 0.01) / 3.0)));
  }
  SUBCASE("errors") {
    const std::vector<double> empty;
    CHECK_FOGEST_ERROR(compute_metrics(empty, 1.0), ErrorCode::InvalidArgument);
    const std::vector<double> two{1.0, 2.0}, one{1.0};
    CHECK_FOGEST_ERROR(compute_metrics(two, one), ErrorCode::InvalidArgument);
    CHECK_FOGEST_ERROR(compute_metrics(one, 0.0), ErrorCode::InvalidArgument);
  }
}

TEST_CASE("average_metrics") {
  const std::vector<MetricsReport> r{{1, 2, 3, 4, 5, 6, 7, 10}, {3, 4, 5, 6, 7, 8, 9, 20}};
  const MetricsReport a = average_metrics(r);
  CHECK(a.rmse == 2.0);
  CHECK(a.sd_rel == 8.0);
  CHECK(a.count == 30);
  CHECK_FOGEST_ERROR(average_metrics(std::span<const MetricsReport>{}), ErrorCode::InvalidArgument);
}

TEST_CASE("metrics CSV") {
  TempDir dir("metrics");
  const std::vector<MetricsRow> rows{{"ours", "beta", {0.1, 0.2, 0.3, 0.4, 5.0, 6.0, 7.0, 12}},
                                     {"li-original", "l_inf", {1.0 / 3.0, 2, 3, -4, 5, 6, 7, 1}}};
  write_metrics_csv(rows, dir / "m.csv");
  const auto back = read_metrics_csv(dir / "m.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[1].label == "li-original");
  CHECK(back[1].metrics.rmse == 1.0 / 3.0);
  CHECK(back[1].metrics.bias == -4.0);
  CHECK(back[0].metrics.count == 12);

  const std::vector<MetricsRow> bad{{"a,b", "beta", {}}};
  CHECK_FOGEST_ERROR(write_metrics_csv(bad, dir / "bad.csv"), ErrorCode::InvalidArgument);
  {
    std::ofstream(dir / "wrong.csv") << "label,x\n";
  }
  CHECK_FOGEST_ERROR(read_metrics_csv(dir / "wrong.csv"), ErrorCode::Parse);
  CHECK_FOGEST_ERROR(read_metrics_csv(dir / "missing.csv"), ErrorCode::Io);
}

TEST_CASE("read_csv_column") {
  TempDir dir("column");
  {
    std::ofstream(dir / "e.csv") << "frame,beta,status\n1,0.02,ok\n\n2,0.03,ok\n";
  }
  CHECK(read_csv_column(dir / "e.csv", "beta") == std::vector<double>{0.02, 0.03});
  CHECK_FOGEST_ERROR(read_csv_column(dir / "e.csv", "gamma"), ErrorCode::Parse);
  CHECK_FOGEST_ERROR(read_csv_column(dir / "e.csv", "status"), ErrorCode::Parse);
  CHECK_FOGEST_ERROR(read_csv_column(dir / "none.csv", "beta"), ErrorCode::Io);
}
