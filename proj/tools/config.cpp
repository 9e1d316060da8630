#include "config.hpp"

#include <fstream>
#include <sstream>

namespace qrec::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Strips a trailing comment that is not inside a string literal.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '\\' && in_string) {
      ++i;
    } else if (c == '"') {
      in_string = !in_string;
    } else if (c == '#' && !in_string) {
      return line.substr(0, i);
    }
  }
  return line;
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Integer: return "integer";
    case Kind::Real: return "number";
    case Kind::String: return "string";
    case Kind::Bool: return "boolean";
    case Kind::List: return "list";
  }
  return "";
}

json coerce(const KeySpec& s, json v) {
  auto bad = [&] {
    return UsageError("--" + s.name + ": expected a " + kind_name(s.kind) + ", got " + v.dump());
  };
  switch (s.kind) {
    case Kind::Integer:
      if (!v.is_number_integer()) throw bad();
      return v;
    case Kind::Real:
      if (!v.is_number()) throw bad();
      return json(v.get<double>());
    case Kind::String:
      if (v.is_string()) return v;
      if (v.is_number() || v.is_boolean()) return json(v.dump());
      throw bad();
    case Kind::Bool:
      if (!v.is_boolean()) throw bad();
      return v;
    case Kind::List:
      if (!v.is_array()) throw bad();
      return v;
  }
  return v;
}

}  // namespace

json parse_value(const std::string& raw) {
  const std::string t = trim(raw);
  if (t.empty()) throw UsageError("empty value");
  json v = json::parse(t, nullptr, false);
  if (v.is_discarded()) return json(t);
  return v;
}

ExperimentConfig::ExperimentConfig(std::string experiment, std::vector<KeySpec> schema)
    : experiment_(std::move(experiment)), schema_(std::move(schema)) {}

const KeySpec& ExperimentConfig::spec(const std::string& key) const {
  for (const auto& s : schema_)
    if (s.name == key) return s;
  throw UsageError("unknown key '" + key + "' for experiment " + experiment_);
}

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const KeySpec& s = spec(key);
  json v;
  try {
    v = parse_value(raw);
  } catch (const UsageError&) {
    throw UsageError("--" + key + ": empty value");
  }
  values_[key] = coerce(s, std::move(v));
}

void ExperimentConfig::set_json(const std::string& key, json value) { values_[key] = coerce(spec(key), std::move(value)); }

void ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  load_text(ss.str(), path);
}

void ExperimentConfig::load_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw UsageError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string raw = body.substr(eq + 1);
    try {
      if (key == "experiment") {
        const json id = parse_value(raw);
        if (!id.is_string() || id.get<std::string>() != experiment_)
          throw UsageError("config is for experiment " + id.dump() + ", not " + experiment_);
        continue;
      }
      set(key, raw);
    } catch (const UsageError& e) {
      throw UsageError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

bool ExperimentConfig::has(const std::string& key) const {
  spec(key);
  return values_.contains(key);
}

const json& ExperimentConfig::get(const std::string& key) const {
  const KeySpec& s = spec(key);
  if (values_.contains(key)) return values_.at(key);
  if (!s.fallback.is_null()) return s.fallback;
  throw UsageError("missing required parameter --" + key);
}

std::int64_t ExperimentConfig::get_int(const std::string& key) const {
  const json& v = get(key);
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
    throw UsageError("--" + key + ": value too large");
  return v.get<std::int64_t>();
}

std::uint64_t ExperimentConfig::get_uint(const std::string& key) const {
  const json& v = get(key);
  if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)
    throw UsageError("--" + key + ": must be nonnegative");
  return v.get<std::uint64_t>();
}

double ExperimentConfig::get_real(const std::string& key) const { return get(key).get<double>(); }

std::string ExperimentConfig::get_string(const std::string& key) const { return get(key).get<std::string>(); }

bool ExperimentConfig::get_bool(const std::string& key) const { return get(key).get<bool>(); }

std::uint64_t ExperimentConfig::seed() const {
  if (!values_.contains("seed")) throw UsageError("missing required parameter --seed (randomized experiment)");
  return get_uint("seed");
}

json ExperimentConfig::values() const {
  json out = json::object();
  for (const auto& s : schema_)
    if (values_.contains(s.name)) out[s.name] = values_.at(s.name);
  return out;
}

json ExperimentConfig::resolved() const {
  json out = json::object();
  for (const auto& s : schema_) {
    if (values_.contains(s.name))
      out[s.name] = values_.at(s.name);
    else if (!s.fallback.is_null())
      out[s.name] = s.fallback;
  }
  return out;
}

std::string ExperimentConfig::serialize() const {
  std::string out = "experiment = " + json(experiment_).dump() + "\n";
  const json vals = values();
  for (const auto& [k, v] : vals.items()) out += k + " = " + v.dump() + "\n";
  return out;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return experiment_ == o.experiment_ && values() == o.values();
}

}  // namespace qrec::cli
