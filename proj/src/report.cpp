#include "octo/report.hpp"

#include <cstdio>
#include <fstream>

namespace octo {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

nlohmann::json report_to_json(const VerificationReport& report,
                              const nlohmann::json& run_config) {
  nlohmann::json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["mode"] = report.mode;
  doc["config"] = run_config;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json r;
    r["resolution"] = row.resolution;
    r["accuracy_mean"] = row.accuracy_mean;
    r["accuracy_std"] = row.accuracy_std;
    r["eer"] = row.eer;
    nlohmann::json tars = nlohmann::json::array();
    for (const auto& [far, tar] : row.tar_at_fars) {
      tars.push_back({{"far", far}, {"tar", tar}});
    }
    r["tar_at_far"] = tars;
    nlohmann::json roc = nlohmann::json::array();
    for (const RocPoint& p : row.roc) roc.push_back({p.far, p.tar});
    r["roc"] = roc;
    rows.push_back(std::move(r));
  }
  doc["rows"] = rows;
  return doc;
}

void write_report_json(const VerificationReport& report,
                       const nlohmann::json& run_config,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report: " + path);
  out << report_to_json(report, run_config).dump(2) << '\n';
}

VerificationReport report_from_json(const nlohmann::json& doc) {
  if (!doc.contains("schema_version") ||
      doc["schema_version"].get<int>() != kReportSchemaVersion) {
    throw ProtocolError("unsupported report schema version");
  }
  VerificationReport report;
  report.mode = doc.at("mode").get<std::string>();
  for (const auto& r : doc.at("rows")) {
    ResolutionResult row;
    row.resolution = r.at("resolution").get<int>();
    row.accuracy_mean = r.at("accuracy_mean").get<double>();
    row.accuracy_std = r.at("accuracy_std").get<double>();
    row.eer = r.at("eer").get<double>();
    for (const auto& t : r.at("tar_at_far")) {
      row.tar_at_fars.emplace_back(t.at("far").get<double>(),
                                   t.at("tar").get<double>());
    }
    if (r.contains("roc")) {
      for (const auto& p : r["roc"]) {
        row.roc.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_report_csv(const VerificationReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report CSV: " + path);
  out << "mode,resolution,accuracy_mean,accuracy_std,eer";
  for (double far : kDefaultFars) out << ",tar_at_far_" << fmt(far);
  out << '\n';
  for (const auto& row : report.rows) {
    out << report.mode << ',' << row.resolution << ',' << fmt(row.accuracy_mean)
        << ',' << fmt(row.accuracy_std) << ',' << fmt(row.eer);
    for (const auto& [far, tar] : row.tar_at_fars) out << ',' << fmt(tar);
    out << '\n';
  }
}

void write_roc_csv(const ResolutionResult& row, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write ROC CSV: " + path);
  out << "far,tar\n";
  for (const RocPoint& p : row.roc) {
    out << fmt(p.far) << ',' << fmt(p.tar) << '\n';
  }
}

namespace {

constexpr int kPlotW = 640;
constexpr int kPlotH = 420;
constexpr int kMargin = 50;

double map_x(double v) { return kMargin + v * (kPlotW - 2 * kMargin); }
double map_y(double v) { return kPlotH - kMargin - v * (kPlotH - 2 * kMargin); }

void svg_header(std::ofstream& out, const std::string& title) {
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kPlotW
      << "' height='" << kPlotH << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n"
      << "<text x='" << kPlotW / 2 << "' y='20' text-anchor='middle' "
      << "font-family='sans-serif' font-size='14'>" << title << "</text>\n";
  // axes
  out << "<line x1='" << map_x(0) << "' y1='" << map_y(0) << "' x2='"
      << map_x(1) << "' y2='" << map_y(0) << "' stroke='black'/>\n"
      << "<line x1='" << map_x(0) << "' y1='" << map_y(0) << "' x2='"
      << map_x(0) << "' y2='" << map_y(1) << "' stroke='black'/>\n";
}

const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                         "#9467bd", "#8c564b"};

}  // namespace

void write_accuracy_plot_svg(const VerificationReport& report,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write plot: " + path);
  svg_header(out, "verification accuracy vs resolution (" + report.mode + ")");
  const std::size_t n = report.rows.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = report.rows[i];
    const double x0 = map_x((i + 0.15) / n);
    const double x1 = map_x((i + 0.85) / n);
    const double y = map_y(row.accuracy_mean);
    out << "<rect x='" << x0 << "' y='" << y << "' width='" << (x1 - x0)
        << "' height='" << (map_y(0) - y) << "' fill='" << kColors[i % 6]
        << "'/>\n";
    out << "<text x='" << (x0 + x1) / 2 << "' y='" << map_y(0) + 16
        << "' text-anchor='middle' font-family='sans-serif' font-size='12'>"
        << row.resolution << "px</text>\n";
    out << "<text x='" << (x0 + x1) / 2 << "' y='" << y - 4
        << "' text-anchor='middle' font-family='sans-serif' font-size='11'>"
        << fmt(row.accuracy_mean) << "</text>\n";
  }
  out << "</svg>\n";
}

void write_roc_plot_svg(const VerificationReport& report,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write plot: " + path);
  svg_header(out, "ROC (" + report.mode + ")");
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    out << "<polyline fill='none' stroke='" << kColors[i % 6]
        << "' stroke-width='1.5' points='";
    for (const RocPoint& p : row.roc) {
      out << map_x(p.far) << ',' << map_y(p.tar) << ' ';
    }
    out << "'/>\n";
    out << "<text x='" << kPlotW - kMargin - 80 << "' y='"
        << kMargin + 16 * (i + 1)
        << "' font-family='sans-serif' font-size='12' fill='" << kColors[i % 6]
        << "'>" << row.resolution << "px EER=" << fmt(row.eer) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace octo
