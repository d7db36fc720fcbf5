#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lcdur/extract.hpp"
#include "lcdur/lognormal.hpp"
#include "lcdur/stats.hpp"

namespace lcdur {

struct AnalysisConfig {
  BinEdges bins;
  TestMode test_mode = TestMode::Auto;
};

/// A rectangular table of already-formatted cells.
struct Table {
  std::string name;   // file stem, e.g. "table_III"
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const;
  std::string markdown() const;
};

struct CdfFile {
  std::string name;  // e.g. "cdf_car_left"
  std::vector<CdfPoint> points;

  std::string csv() const;
};

struct Analysis {
  std::vector<Table> tables;   // table_I .. table_X
  std::vector<CdfFile> cdfs;   // one per non-empty (class, direction) group
  std::vector<std::string> warnings;
  std::size_t excluded_from_bins = 0;

  const Table& table(std::string_view name) const;
};

/// Builds every duration table, the speed-bin tables and tests, the stage
/// tables and tests, and the CDF data. Groups that are empty produce rows
/// with empty statistics and "n/a" test results instead of errors. Throws
/// MissingData when `events` is empty.
Analysis analyze(std::span<const LaneChangeEvent> events, const AnalysisConfig& config = {});

/// Writes `<name>.csv` and `<name>.md` per table and `<name>.csv` per CDF.
void write_analysis(const Analysis& analysis, const std::filesystem::path& dir);

struct Report {
  Analysis analysis;
  std::vector<LogNormalModel> models;    // the groups that could be fitted
  std::vector<std::string> model_errors; // one line per group that could not
  std::string summary_json;
};

/// Analysis plus per-group model fits and `summary.json` content (counts,
/// group statistics, test outcomes, model parameters).
Report build_report(std::span<const LaneChangeEvent> events, const AnalysisConfig& config = {});

/// Writes the analysis files, `models.json` and `summary.json`.
void write_report(const Report& report, const std::filesystem::path& dir);

/// Writes `content` to `path`, creating parent directories. Throws Io.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace lcdur
