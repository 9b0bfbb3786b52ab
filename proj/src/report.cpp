#include "ssi/report.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include "ssi/error.hpp"

namespace ssi {

namespace {

bool all_true(const Json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_object() || j.is_array())
    for (const auto& v : j)
      if (!all_true(v)) return false;
  return true;
}

}  // namespace

bool RunReport::passed() const { return all_true(verdicts); }

Json to_json(const RunReport& r) {
  Json j;
  j["report_format"] = "ssi-lab-report/1";
  j["tool_version"] = r.tool_version;
  j["command"] = r.command;
  j["config"] = r.config;
  j["config_hash"] = config_hash(r.config);
  j["seeds"] = r.seeds;
  j["aggregates"] = r.aggregates;
  j["verdicts"] = r.verdicts;
  j["observations"] = r.observations;
  j["passed"] = r.passed();
  j["trials"] = r.trials;
  j["wall_seconds"] = r.wall_seconds;
  return j;
}

void write_csv(std::ostream& os, const CsvTable& t, const std::string& hash) {
  os << "# ssi-lab " << kToolVersion << " config_hash=" << hash << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      const auto& v = row[i];
      os << (v.is_string() ? v.get<std::string>() : v.dump());
    }
    os << '\n';
  }
}

void write_outputs(const RunReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  const std::string hash = config_hash(r.config);
  {
    std::ofstream os(fs::path(dir) / "report.json");
    if (!os) throw ConfigError("cannot write report.json in '" + dir + "'");
    os << to_json(r).dump(2) << '\n';
  }
  for (const auto& t : r.tables) {
    std::ofstream os(fs::path(dir) / (t.name + ".csv"));
    write_csv(os, t, hash);
  }
  for (const auto& [name, body] : r.files) {
    std::ofstream os(fs::path(dir) / name);
    os << "# ssi-lab " << kToolVersion << " config_hash=" << hash << '\n' << body;
  }
}

Json replay_view(const Json& report) {
  return {{"aggregates", report.at("aggregates")},
          {"verdicts", report.at("verdicts")},
          {"observations", report.at("observations")},
          {"trials", report.at("trials")}};
}

}  // namespace ssi
