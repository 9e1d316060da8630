#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"

namespace qrec::cli {

inline constexpr const char* kToolkitVersion = "0.1.0";

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct RunResult {
  std::string experiment;
  json parameters;
  json payload = json::object();
  std::optional<Table> table;
  bool verified = true;
  std::string failure;  // counterexample datum when !verified
  std::string message;
  std::optional<double> wall_clock;
};

struct SelftestCase {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct Experiment {
  std::string group;  // "scan"
  std::string name;   // "quadform"
  std::string help;
  std::vector<KeySpec> schema;
  std::function<RunResult(const ExperimentConfig&)> run;
  std::function<std::vector<SelftestCase>()> selftest;

  std::string id() const { return group + "." + name; }
  ExperimentConfig config() const { return ExperimentConfig(id(), schema); }
};

const std::vector<Experiment>& experiments();
const Experiment& find_experiment(const std::string& id);

/// Runs the experiment; VerificationError from the modules becomes a
/// failed RunResult carrying the message.
RunResult run(const ExperimentConfig& config);

enum class Format { Json, Csv };
Format parse_format(const std::string& name);

void emit(const RunResult& result, Format format, std::ostream& out);
/// Writes to `path`, or stdout when the path is empty or "-".
void emit_to(const RunResult& result, Format format, const std::string& path);

/// Module oracle checks behind --selftest.
std::vector<SelftestCase> selftest_linalg_poly();
std::vector<SelftestCase> selftest_expsum();
std::vector<SelftestCase> selftest_orbits();
std::vector<SelftestCase> selftest_systems();
std::vector<SelftestCase> selftest_diffscan();

/// Full command-line entry point; returns the process exit code.
int main_entry(int argc, char** argv);

}  // namespace qrec::cli
