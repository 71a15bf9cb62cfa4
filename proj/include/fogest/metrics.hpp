#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fogest {

/// Median; the mean of the two middle values for an even count.
double median(std::vector<double> values);

// Error statistics of estimates against ground truth. SD is the population
// standard deviation of the errors, so rmse^2 == sd^2 + bias^2 exactly.
// Relative forms are percentages of the ground truth.
struct MetricsReport {
  double rmse = 0.0;
  double mae = 0.0;
  double sd = 0.0;
  double bias = 0.0;  // mean signed error
  double rmse_rel = 0.0;
  double mae_rel = 0.0;
  double sd_rel = 0.0;
  std::size_t count = 0;
};

MetricsReport compute_metrics(std::span<const double> estimates, double truth);
MetricsReport compute_metrics(std::span<const double> estimates, std::span<const double> truth);

/// Equal-weight mean of several reports, field by field.
MetricsReport average_metrics(std::span<const MetricsReport> reports);

// Table-style CSV: one row per (label, parameter).
struct MetricsRow {
  std::string label;      // method, or method plus scenario
  std::string parameter;  // "beta" or "l_inf"
  MetricsReport metrics;
};

inline constexpr const char* kMetricsCsvHeader =
    "label,parameter,count,rmse_abs,rmse_rel,mae_abs,mae_rel,sd_abs,sd_rel,bias";

void write_metrics_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

/// Reads one numeric column (by header name) from a CSV file.
std::vector<double> read_csv_column(const std::filesystem::path& path, const std::string& column);

}  // namespace fogest
