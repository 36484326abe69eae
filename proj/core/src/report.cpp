#include "twistlab/report.hpp"

#include <filesystem>
#include <fstream>

#include "twistlab/errors.hpp"

namespace twistlab {

namespace {

Json to_json(const Table& t) {
  Json j;
  j["name"] = t.name;
  j["columns"] = t.columns;
  j["rows"] = t.rows;
  return j;
}

Json to_json(const Verdict& v) {
  Json j;
  j["name"] = v.name;
  j["pass"] = v.pass;
  j["value"] = v.value;
  j["bound"] = v.bound;
  j["detail"] = v.detail;
  return j;
}

// doubles rendered exactly as in the JSON report, so the two formats agree
std::string csv_number(double x) { return Json(x).dump(); }

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << bytes;
  if (!f) throw Error("write failed for " + path.string());
}

void write_tables(const Report& r, const std::filesystem::path& dir) {
  for (const Table& t : r.tables) {
    std::string csv;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      if (i) csv += ',';
      csv += csv_quote(t.columns[i]);
    }
    csv += '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) csv += ',';
        csv += csv_number(row[i]);
      }
      csv += '\n';
    }
    write_file(dir / (r.scenario + "." + t.name + ".csv"), csv);
  }
}

}  // namespace

bool Report::pass() const {
  for (const Verdict& v : verdicts)
    if (!v.pass) return false;
  return true;
}

Json to_json(const FiberBunchingReport& r) {
  Json j;
  j["theta"] = r.theta;
  j["c_theta"] = r.c_theta;
  j["rho"] = r.rho;
  j["c_rho"] = r.c_rho;
  j["nu"] = r.nu;
  j["lambda"] = r.lambda;
  j["strictness"] = r.strictness == Strictness::FiveTwo ? "five_two" : "seven_two";
  j["margin"] = r.margin;
  j["delta"] = r.delta;
  j["satisfied"] = r.satisfied;
  j["n_range"] = r.n_range;
  j["hol_rate"] = r.hol_rate();
  j["q_cert"] = r.q_cert();
  j["note"] = r.note;
  return j;
}

Json to_json(const Report& r) {
  Json j;
  j["scenario"] = r.scenario;
  j["seed"] = r.seed;
  j["pass"] = r.pass();
  j["verdicts"] = Json::array();
  for (const Verdict& v : r.verdicts) j["verdicts"].push_back(to_json(v));
  j["bunching"] = r.bunching;
  j["tables"] = Json::array();
  for (const Table& t : r.tables) j["tables"].push_back(to_json(t));
  j["note"] = r.note;
  j["config"] = r.config_echo;
  return j;
}

void emit(const Report& r, const std::string& out_dir, const std::string& format) {
  if (format != "json" && format != "csv-bundle")
    throw ConfigError("emit: format must be json or csv-bundle, got " + format);
  std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  write_file(dir / "report.json", to_json(r).dump(2) + "\n");
  if (format == "csv-bundle") write_tables(r, dir);
}

void emit_suite(const std::vector<Report>& reports, const std::string& out_dir,
                const std::string& format) {
  if (format != "json" && format != "csv-bundle")
    throw ConfigError("emit_suite: format must be json or csv-bundle, got " + format);
  std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  Json j;
  bool all = true;
  for (const Report& r : reports) all = all && r.pass();
  j["pass"] = all;
  j["scenarios"] = Json::array();
  for (const Report& r : reports) j["scenarios"].push_back(to_json(r));
  write_file(dir / "suite.json", j.dump(2) + "\n");
  if (format == "csv-bundle")
    for (const Report& r : reports) write_tables(r, dir);
}

}  // namespace twistlab
