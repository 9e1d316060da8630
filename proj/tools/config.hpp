#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace qrec::cli {

using json = nlohmann::ordered_json;

/// Bad flag, bad config value or missing required parameter (exit code 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind { Integer, Real, String, Bool, List };

struct KeySpec {
  std::string name;
  Kind kind;
  json fallback;  // null: no default
  std::string help;
};

/// Flat key/value parameters of one experiment, validated against a schema.
/// File format: one `key = value` per line, `#` starts a comment, values are
/// JSON literals or bare words (read as strings).
class ExperimentConfig {
 public:
  ExperimentConfig(std::string experiment, std::vector<KeySpec> schema);

  const std::string& experiment() const { return experiment_; }
  const std::vector<KeySpec>& schema() const { return schema_; }

  /// Parses and type-checks one value. Throws UsageError on unknown keys.
  void set(const std::string& key, const std::string& raw);
  void set_json(const std::string& key, json value);
  void load_file(const std::string& path);
  void load_text(const std::string& text, const std::string& origin = "<config>");

  bool has(const std::string& key) const;
  const json& get(const std::string& key) const;  // value or default; UsageError if neither
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key) const;
  double get_real(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::uint64_t seed() const;  // UsageError when absent

  /// Explicitly set values only, in schema order.
  json values() const;
  /// Every key with a value or default, in schema order.
  json resolved() const;
  /// Text form that load_text reads back to an equal config.
  std::string serialize() const;

  bool operator==(const ExperimentConfig& o) const;

 private:
  const KeySpec& spec(const std::string& key) const;
  std::string experiment_;
  std::vector<KeySpec> schema_;
  json values_ = json::object();
};

json parse_value(const std::string& raw);

}  // namespace qrec::cli
