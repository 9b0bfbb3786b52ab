#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ssi/config.hpp"

namespace ssi {

struct CsvTable {
  std::string name;
  std::vector<std::string> columns;
  /// Each row is a JSON array of scalars, one per column.
  std::vector<Json> rows;
};

struct RunReport {
  std::string command;
  Json config;
  std::string tool_version = kToolVersion;
  Json trials = Json::array();
  Json aggregates = Json::object();
  /// Booleans anywhere inside count as pass/fail verdicts.
  Json verdicts = Json::object();
  /// Measured comparisons reported without a pass/fail claim.
  Json observations = Json::object();
  Json seeds = Json::object();
  double wall_seconds = 0.0;
  std::vector<CsvTable> tables;
  /// Extra free-form files (name, contents), e.g. trajectory CSVs.
  std::vector<std::pair<std::string, std::string>> files;

  bool passed() const;
  int exit_code() const { return passed() ? 0 : 4; }
};

Json to_json(const RunReport& r);

/// "# ssi-lab <version> config_hash=<hash>" then a header row and the data rows.
void write_csv(std::ostream& os, const CsvTable& t, const std::string& hash);

/// Writes report.json and <table>.csv files into `dir` (created if missing).
void write_outputs(const RunReport& r, const std::string& dir);

/// The part of a report that must replay bit-identically.
Json replay_view(const Json& report);

}  // namespace ssi
