#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "octo/eval.hpp"

namespace octo {

inline constexpr int kReportSchemaVersion = 1;

// Structured report document: schema_version, run configuration echo
// (including the seed), and one entry per resolution row.
nlohmann::json report_to_json(const VerificationReport& report,
                              const nlohmann::json& run_config);

void write_report_json(const VerificationReport& report,
                       const nlohmann::json& run_config,
                       const std::string& path);

// Inverse of report_to_json, so downstream tables and plots can be rebuilt
// from the JSON artifact without re-running the evaluation.
VerificationReport report_from_json(const nlohmann::json& doc);

// Flat table, one row per resolution.
void write_report_csv(const VerificationReport& report, const std::string& path);

// One (FAR, TAR) point per line for external plotting.
void write_roc_csv(const ResolutionResult& row, const std::string& path);

// Optional SVG renderings derived purely from the already-computed report.
void write_accuracy_plot_svg(const VerificationReport& report,
                             const std::string& path);
void write_roc_plot_svg(const VerificationReport& report,
                        const std::string& path);

}  // namespace octo
