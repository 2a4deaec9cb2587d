#pragma once

#include "idexp/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace idexp {

enum class ExperimentId { CrossExplain, PcCross, AngleCurve, ErrorVsParams, MeasureCheck };

/// CLI spelling: cross-explain, pc-cross, angle-curve, error-vs-params, measure.
std::string_view to_string(ExperimentId id);
ExperimentId parse_experiment(std::string_view text);

/// Everything needed to regenerate a report from its model.
struct ExperimentConfig {
  ExperimentId experiment = ExperimentId::CrossExplain;
  std::string model_name;
  /// CRC-32 over the model's stored values (see model_fingerprint).
  std::uint32_t model_fingerprint = 0;
  Index n = 0;
  Index m = 0;
  Index k = 0;
  bool raw_coefficients = false;
  std::int64_t trials = 1;
  std::uint64_t seed = 0;
  double epsilon = 1.0;
  std::int64_t samples = 1'000'000;
  unsigned workers = 1;
  double tolerance = 1e-10;
  Index n_active = 2;
};

nlohmann::json config_to_json(const ExperimentConfig& config);
/// Throws MalformedManifest on missing or mistyped fields.
ExperimentConfig config_from_json(const nlohmann::json& j);

using Cell = std::variant<std::int64_t, double, std::string>;
using Row = std::vector<Cell>;

struct SummaryStat {
  std::string group;
  std::string metric;
  std::int64_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<std::string> columns;
  std::vector<Row> rows;
  /// Column whose string value groups rows in the summary; empty = one group.
  std::string group_column;
  /// Double-valued columns summarized per group.
  std::vector<std::string> metric_columns;
  std::vector<SummaryStat> summary;

  std::size_t column_index(std::string_view name) const;
  double number(std::size_t row, std::string_view column) const;
  const std::string& text(std::size_t row, std::string_view column) const;
};

/// Recompute `summary` (mean and sample stddev of finite values per group and
/// metric, groups in first-appearance order).
void summarize(ExperimentReport& report);

/// Header line with column names, then one line per row. Doubles are written
/// with 17 significant digits; non-finite values as inf, -inf, nan.
std::string to_csv(const ExperimentReport& report);

/// {"experiment", "config", "columns", "rows" (objects), "summary"}.
/// Non-finite doubles are encoded as the strings "inf", "-inf", "nan".
nlohmann::json to_json(const ExperimentReport& report);
std::string to_json_text(const ExperimentReport& report);

}  // namespace idexp
