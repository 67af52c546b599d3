#pragma once

#include <string>

#include "core/experiment.hpp"

namespace bandloop {

enum class ReportFormat { Csv, Json };

/// Full JSON document for a report. Numeric payload lives under "config",
/// "columns", "rows", "summary", "checks", "failures"; execution metadata
/// (wall-clock timings, thread count) under "runtime".
std::string report_to_json(const ExperimentReport& report);

/// JSON without the "runtime" section: the part that must be byte-identical
/// across reruns and thread counts.
std::string report_payload_json(const ExperimentReport& report);

/// Inverse of report_to_json (runtime section optional).
ExperimentReport report_from_json(const std::string& text);

/// CSV: '#'-prefixed config echo, a header row, then data rows with doubles
/// printed at 17 significant digits, '.' decimal point, no locale.
std::string report_to_csv(const ExperimentReport& report);

/// Writes via a temporary file and rename; refuses to overwrite unless asked,
/// and removes the partial file on failure.
void write_report(const ExperimentReport& report, const std::string& path, ReportFormat format,
                  bool overwrite);

}  // namespace bandloop
