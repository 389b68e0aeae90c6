#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "octo/report.hpp"

using namespace octo;

namespace {

VerificationReport sample_report() {
  VerificationReport report;
  report.mode = "cross";
  ResolutionResult row;
  row.resolution = 7;
  row.accuracy_mean = 0.8125;
  row.accuracy_std = 0.03;
  row.eer = 0.19;
  row.tar_at_fars = {{0.1, 0.7}, {0.01, 0.5}, {0.001, 0.25}};
  row.roc = {{0.0, 0.0}, {0.1, 0.6}, {1.0, 1.0}};
  report.rows.push_back(row);
  row.resolution = 112;
  row.accuracy_mean = 0.975;
  row.eer = 0.02;
  report.rows.push_back(row);
  return report;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("report JSON document") {
  const nlohmann::json config{{"seed", 7}, {"margin", 25.0}};
  const nlohmann::json doc = report_to_json(sample_report(), config);

  CHECK(doc["schema_version"] == kReportSchemaVersion);
  CHECK(doc["mode"] == "cross");
  CHECK(doc["config"]["seed"] == 7);
  CHECK(doc["config"]["margin"] == 25.0);
  REQUIRE(doc["rows"].size() == 2);
  CHECK(doc["rows"][0]["resolution"] == 7);
  CHECK(doc["rows"][0]["accuracy_mean"] == 0.8125);
  CHECK(doc["rows"][0]["eer"] == 0.19);
  REQUIRE(doc["rows"][0]["tar_at_far"].size() == 3);
  CHECK(doc["rows"][0]["tar_at_far"][1]["far"] == 0.01);
  CHECK(doc["rows"][0]["tar_at_far"][1]["tar"] == 0.5);
  CHECK(doc["rows"][1]["resolution"] == 112);

  SUBCASE("file writer emits parseable JSON, byte-stable") {
    const std::string path = "report_json_test.json";
    write_report_json(sample_report(), config, path);
    const nlohmann::json parsed = nlohmann::json::parse(slurp(path));
    CHECK(parsed == doc);
    const std::string first = slurp(path);
    write_report_json(sample_report(), config, path);
    CHECK(slurp(path) == first);
    std::filesystem::remove(path);
  }
}

TEST_CASE("report CSV and ROC CSV") {
  const VerificationReport report = sample_report();
  const std::string path = "report_csv_test.csv";
  write_report_csv(report, path);
  std::ifstream in(path);
  std::string header, line;
  REQUIRE(std::getline(in, header));
  CHECK(header ==
        "mode,resolution,accuracy_mean,accuracy_std,eer,tar_at_far_0.1,"
        "tar_at_far_0.01,tar_at_far_0.001");
  REQUIRE(std::getline(in, line));
  CHECK(line == "cross,7,0.8125,0.03,0.19,0.7,0.5,0.25");
  in.close();
  std::filesystem::remove(path);

  const std::string roc_path = "roc_csv_test.csv";
  write_roc_csv(report.rows[0], roc_path);
  CHECK(slurp(roc_path) == "far,tar\n0,0\n0.1,0.6\n1,1\n");
  std::filesystem::remove(roc_path);
}

TEST_CASE("plot writers emit SVG") {
  const VerificationReport report = sample_report();
  for (const std::string path :
       {std::string("acc_plot_test.svg"), std::string("roc_plot_test.svg")}) {
    if (path.rfind("acc", 0) == 0) {
      write_accuracy_plot_svg(report, path);
    } else {
      write_roc_plot_svg(report, path);
    }
    const std::string body = slurp(path);
    CHECK(body.rfind("<svg", 0) == 0);
    CHECK(body.find("</svg>") != std::string::npos);
    std::filesystem::remove(path);
  }
}
