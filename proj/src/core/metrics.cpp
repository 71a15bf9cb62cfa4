#include "fogest/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/core.h>

#include "fogest/error.hpp"
#include "fogest/text_util.hpp"

namespace fogest {

double median(std::vector<double> values) {
  require(!values.empty(), "median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

MetricsReport compute_metrics(std::span<const double> estimates, std::span<const double> truth) {
  require(!estimates.empty(), "metrics need at least one estimate");
  require(truth.size() == estimates.size(), "one ground-truth value per estimate is required");
  MetricsReport m;
  m.count = estimates.size();
  const double n = static_cast<double>(estimates.size());
  double sq = 0.0, abs_sum = 0.0, sum = 0.0;
  double rel_sq = 0.0, rel_abs = 0.0, rel_sum = 0.0;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    const double e = estimates[k] - truth[k];
    sq += e * e;
    abs_sum += std::abs(e);
    sum += e;
    require(truth[k] > 0.0, "relative metrics need positive ground truth");
    const double er = 100.0 * e / truth[k];
    rel_sq += er * er;
    rel_abs += std::abs(er);
    rel_sum += er;
  }
  m.rmse = std::sqrt(sq / n);
  m.mae = abs_sum / n;
  m.bias = sum / n;
  m.sd = std::sqrt(std::max(0.0, sq / n - m.bias * m.bias));
  m.rmse_rel = std::sqrt(rel_sq / n);
  m.mae_rel = rel_abs / n;
  const double rel_bias = rel_sum / n;
  m.sd_rel = std::sqrt(std::max(0.0, rel_sq / n - rel_bias * rel_bias));
  return m;
}

MetricsReport compute_metrics(std::span<const double> estimates, double truth) {
  const std::vector<double> t(estimates.size(), truth);
  return compute_metrics(estimates, t);
}

MetricsReport average_metrics(std::span<const MetricsReport> reports) {
  require(!reports.empty(), "nothing to average");
  MetricsReport out;
  for (const auto& r : reports) {
    out.rmse += r.rmse;
    out.mae += r.mae;
    out.sd += r.sd;
    out.bias += r.bias;
    out.rmse_rel += r.rmse_rel;
    out.mae_rel += r.mae_rel;
    out.sd_rel += r.sd_rel;
    out.count += r.count;
  }
  const double n = static_cast<double>(reports.size());
  out.rmse /= n;
  out.mae /= n;
  out.sd /= n;
  out.bias /= n;
  out.rmse_rel /= n;
  out.mae_rel /= n;
  out.sd_rel /= n;
  return out;
}

void write_metrics_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
  out << kMetricsCsvHeader << '\n';
  for (const auto& row : rows) {
    require(row.label.find(',') == std::string::npos, "CSV labels must not contain commas");
    const auto& m = row.metrics;
    out << row.label << ',' << row.parameter << ',' << m.count << ',' << format_double(m.rmse) << ','
        << format_double(m.rmse_rel) << ',' << format_double(m.mae) << ',' << format_double(m.mae_rel) << ','
        << format_double(m.sd) << ',' << format_double(m.sd_rel) << ',' << format_double(m.bias) << '\n';
  }
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line) || trim(line) != kMetricsCsvHeader)
    fail(ErrorCode::Parse, fmt::format("'{}': unexpected metrics header", path.string()));
  std::vector<MetricsRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    const std::string where = fmt::format("{}:{}", path.string(), line_no);
    if (f.size() != 10) fail(ErrorCode::Parse, where + ": expected 10 fields");
    MetricsRow row;
    row.label = f[0];
    row.parameter = f[1];
    row.metrics.count = static_cast<std::size_t>(parse_int64(f[2], where));
    row.metrics.rmse = parse_double(f[3], where);
    row.metrics.rmse_rel = parse_double(f[4], where);
    row.metrics.mae = parse_double(f[5], where);
    row.metrics.mae_rel = parse_double(f[6], where);
    row.metrics.sd = parse_double(f[7], where);
    row.metrics.sd_rel = parse_double(f[8], where);
    row.metrics.bias = parse_double(f[9], where);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> read_csv_column(const std::filesystem::path& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Parse, fmt::format("'{}' is empty", path.string()));
  const auto header = split(trim(line), ',');
  std::size_t index = header.size();
  for (std::size_t k = 0; k < header.size(); ++k)
    if (trim(header[k]) == column) index = k;
  if (index == header.size()) fail(ErrorCode::Parse, fmt::format("'{}' has no column '{}'", path.string(), column));
  std::vector<double> values;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line[0] == '#') continue;
    const auto f = split(trim(line), ',');
    if (f.size() <= index) fail(ErrorCode::Parse, fmt::format("{}:{}: missing column '{}'", path.string(), line_no, column));
    values.push_back(parse_double(f[index], fmt::format("{}:{}", path.string(), line_no)));
  }
  return values;
}

}  // namespace fogest
