#include "core/report_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace bandloop {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json report_body(const ExperimentReport& report) {
  json j;
  j["format_version"] = report.format_version;
  j["kind"] = report.kind;

  json cfg = json::object();
  for (const auto& [k, v] : report.config_echo) cfg[k] = v;
  j["config"] = cfg;

  j["columns"] = report.columns;
  json rows = json::array();
  for (const auto& row : report.rows) {
    json jr = json::array();
    for (const auto& cell : row) {
      if (std::holds_alternative<double>(cell))
        jr.push_back(std::get<double>(cell));
      else
        jr.push_back(std::get<std::string>(cell));
    }
    rows.push_back(std::move(jr));
  }
  j["rows"] = rows;

  json summary = json::array();
  for (const auto& [k, v] : report.summary) summary.push_back({{"name", k}, {"value", v}});
  j["summary"] = summary;

  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"value", c.value},
                      {"threshold", c.threshold},
                      {"comparison", c.comparison}});
  }
  j["checks"] = checks;
  j["failures"] = report.failures;
  return j;
}

}  // namespace

std::string report_payload_json(const ExperimentReport& report) {
  return report_body(report).dump(2);
}

std::string report_to_json(const ExperimentReport& report) {
  json j = report_body(report);
  json runtime = json::object();
  runtime["threads"] = report.threads_used;
  json timings = json::array();
  for (const auto& [k, v] : report.timings) timings.push_back({{"name", k}, {"seconds", v}});
  runtime["timings"] = timings;
  j["runtime"] = runtime;
  return j.dump(2);
}

ExperimentReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("report parse: ") + e.what());
  }
  ExperimentReport report;
  report.format_version = j.at("format_version").get<std::string>();
  report.kind = j.at("kind").get<std::string>();
  for (const auto& [k, v] : j.at("config").items())
    report.config_echo.emplace_back(k, v.get<std::string>());
  // nlohmann objects iterate in sorted key order, but "kind" must stay first
  // to match the emitter's echo order.
  std::stable_sort(report.config_echo.begin(), report.config_echo.end(),
                   [](const auto& a, const auto& b) {
                     if ((a.first == "kind") != (b.first == "kind")) return a.first == "kind";
                     return false;
                   });
  report.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& row : j.at("rows")) {
    std::vector<Cell> cells;
    for (const auto& cell : row) {
      if (cell.is_number())
        cells.emplace_back(cell.get<double>());
      else
        cells.emplace_back(cell.get<std::string>());
    }
    report.rows.push_back(std::move(cells));
  }
  for (const auto& s : j.at("summary"))
    report.summary.emplace_back(s.at("name").get<std::string>(), s.at("value").get<double>());
  for (const auto& c : j.at("checks")) {
    report.checks.push_back({c.at("name").get<std::string>(), c.at("passed").get<bool>(),
                             c.at("value").get<double>(), c.at("threshold").get<double>(),
                             c.at("comparison").get<std::string>()});
  }
  report.failures = j.at("failures").get<std::vector<std::string>>();
  if (j.contains("runtime")) {
    report.threads_used = j["runtime"].value("threads", 1);
    if (j["runtime"].contains("timings")) {
      for (const auto& t : j["runtime"]["timings"])
        report.timings.emplace_back(t.at("name").get<std::string>(),
                                    t.at("seconds").get<double>());
    }
  }
  return report;
}

std::string report_to_csv(const ExperimentReport& report) {
  std::string out;
  out += "# bandloop report " + report.format_version + "\n";
  for (const auto& [k, v] : report.config_echo) out += "# " + k + " = " + v + "\n";
  for (std::size_t i = 0; i < report.columns.size(); ++i) {
    if (i) out += ",";
    out += report.columns[i];
  }
  out += "\n";
  for (const auto& row : report.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      if (std::holds_alternative<double>(row[i]))
        out += format_double(std::get<double>(row[i]));
      else
        out += std::get<std::string>(row[i]);
    }
    out += "\n";
  }
  return out;
}

void write_report(const ExperimentReport& report, const std::string& path, ReportFormat format,
                  bool overwrite) {
  const fs::path target(path);
  std::error_code ec;
  if (!overwrite && fs::exists(target, ec)) {
    throw IoError("refusing to overwrite existing file " + path + " (pass the overwrite flag)");
  }
  const std::string body =
      format == ReportFormat::Csv ? report_to_csv(report) : report_to_json(report);

  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << body;
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw IoError("short write to " + tmp.string());
    }
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move report into place at " + path);
  }
}

}  // namespace bandloop
