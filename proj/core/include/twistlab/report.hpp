#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "twistlab/fiber_bunching.hpp"

namespace twistlab {

using Json = nlohmann::ordered_json;

// one CSV-able diagnostic series
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Verdict {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double bound = 0.0;
  std::string detail;  // sample sizes, tolerances, witnesses
};

// Deterministic by construction: no wall-clock fields, ordered keys, fixed
// table ordering. A fixed seed must reproduce the emitted bytes.
struct Report {
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<Verdict> verdicts;
  Json bunching;  // certificate object or array of them
  std::vector<Table> tables;
  std::string note;
  Json config_echo;

  bool pass() const;
};

Json to_json(const FiberBunchingReport& r);
Json to_json(const Report& r);

// format "json": <out_dir>/report.json; "csv-bundle": report.json plus one
// <scenario>.<table>.csv per table
void emit(const Report& r, const std::string& out_dir, const std::string& format);

// suite.json with the per-scenario reports in order; csv-bundle adds every
// scenario's tables
void emit_suite(const std::vector<Report>& reports, const std::string& out_dir,
                const std::string& format);

}  // namespace twistlab
