#include "idexp/report.hpp"

#include "idexp/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace idexp {
namespace {

constexpr std::array<std::pair<ExperimentId, std::string_view>, 5> kNames{{
    {ExperimentId::CrossExplain, "cross-explain"},
    {ExperimentId::PcCross, "pc-cross"},
    {ExperimentId::AngleCurve, "angle-curve"},
    {ExperimentId::ErrorVsParams, "error-vs-params"},
    {ExperimentId::MeasureCheck, "measure"},
}};

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

nlohmann::json double_to_json(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  return csv_escape(std::get<std::string>(c));
}

nlohmann::json cell_json(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  if (const auto* d = std::get_if<double>(&c)) return double_to_json(*d);
  return std::get<std::string>(c);
}

template <class T>
T field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw MalformedManifest(std::string("config is missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw MalformedManifest(std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace

std::string_view to_string(ExperimentId id) {
  for (const auto& [e, name] : kNames)
    if (e == id) return name;
  return "unknown";
}

ExperimentId parse_experiment(std::string_view text) {
  for (const auto& [e, name] : kNames)
    if (name == text) return e;
  throw RangeError("unknown experiment '" + std::string(text) + "'");
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  char fp[9];
  std::snprintf(fp, sizeof fp, "%08x", c.model_fingerprint);
  return {
      {"experiment", std::string(to_string(c.experiment))},
      {"model_name", c.model_name},
      {"model_fingerprint", fp},
      {"n", c.n},
      {"m", c.m},
      {"k", c.k},
      {"raw_coefficients", c.raw_coefficients},
      {"trials", c.trials},
      {"seed", c.seed},
      {"epsilon", c.epsilon},
      {"samples", c.samples},
      {"workers", c.workers},
      {"tolerance", c.tolerance},
      {"n_active", c.n_active},
  };
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw MalformedManifest("config must be a JSON object");
  ExperimentConfig c;
  try {
    c.experiment = parse_experiment(field<std::string>(j, "experiment"));
  } catch (const RangeError& e) {
    throw MalformedManifest(e.what());
  }
  c.model_name = field<std::string>(j, "model_name");
  const auto fp = field<std::string>(j, "model_fingerprint");
  try {
    std::size_t used = 0;
    c.model_fingerprint = static_cast<std::uint32_t>(std::stoul(fp, &used, 16));
    if (used != fp.size()) throw std::invalid_argument(fp);
  } catch (const std::exception&) {
    throw MalformedManifest("config model_fingerprint is not hexadecimal");
  }
  c.n = field<Index>(j, "n");
  c.m = field<Index>(j, "m");
  c.k = field<Index>(j, "k");
  c.raw_coefficients = field<bool>(j, "raw_coefficients");
  c.trials = field<std::int64_t>(j, "trials");
  c.seed = field<std::uint64_t>(j, "seed");
  c.epsilon = field<double>(j, "epsilon");
  c.samples = field<std::int64_t>(j, "samples");
  c.workers = field<unsigned>(j, "workers");
  c.tolerance = field<double>(j, "tolerance");
  c.n_active = field<Index>(j, "n_active");
  return c;
}

std::size_t ExperimentReport::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw RangeError("report has no column '" + std::string(name) + "'");
}

double ExperimentReport::number(std::size_t row, std::string_view column) const {
  const Cell& c = rows.at(row).at(column_index(column));
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  throw RangeError("column '" + std::string(column) + "' is not numeric");
}

const std::string& ExperimentReport::text(std::size_t row, std::string_view column) const {
  const Cell& c = rows.at(row).at(column_index(column));
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  throw RangeError("column '" + std::string(column) + "' is not text");
}

void summarize(ExperimentReport& report) {
  report.summary.clear();
  std::vector<std::string> groups;
  const bool grouped = !report.group_column.empty();
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    const std::string g = grouped ? report.text(r, report.group_column) : "all";
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
  }
  for (const auto& g : groups) {
    for (const auto& metric : report.metric_columns) {
      SummaryStat s{g, metric};
      double sum = 0.0, sq = 0.0;
      for (std::size_t r = 0; r < report.rows.size(); ++r) {
        if (grouped && report.text(r, report.group_column) != g) continue;
        const double x = report.number(r, metric);
        if (!std::isfinite(x)) continue;
        ++s.count;
        sum += x;
        sq += x * x;
      }
      if (s.count > 0) {
        const double n = static_cast<double>(s.count);
        s.mean = sum / n;
        s.stddev = s.count > 1 ? std::sqrt(std::max(0.0, (sq - n * s.mean * s.mean) / (n - 1.0))) : 0.0;
      }
      report.summary.push_back(std::move(s));
    }
  }
}

std::string to_csv(const ExperimentReport& report) {
  std::ostringstream os;
  for (std::size_t i = 0; i < report.columns.size(); ++i) os << (i ? "," : "") << report.columns[i];
  os << '\n';
  for (const auto& row : report.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
    os << '\n';
  }
  return os.str();
}

nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[report.columns[i]] = cell_json(row[i]);
    rows.push_back(std::move(obj));
  }
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& s : report.summary) {
    summary.push_back({{"group", s.group},
                       {"metric", s.metric},
                       {"count", s.count},
                       {"mean", double_to_json(s.mean)},
                       {"stddev", double_to_json(s.stddev)}});
  }
  return {{"experiment", std::string(to_string(report.config.experiment))},
          {"config", config_to_json(report.config)},
          {"columns", report.columns},
          {"rows", std::move(rows)},
          {"summary", std::move(summary)}};
}

std::string to_json_text(const ExperimentReport& report) { return to_json(report).dump(2) + "\n"; }

}  // namespace idexp
