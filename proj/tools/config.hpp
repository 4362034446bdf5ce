#pragma once

// Run configuration for the psskit tool: a typed key schema per command,
// TOML/JSON loading, flag overrides and the canonical family object.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "psskit/families.hpp"

namespace psskit::cli {

using json = nlohmann::json;

/// Malformed or invalid configuration (exit status 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable input or unwritable output (exit status 3).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KeyType { Rational, OptRational, Real, Int, Bool, String, Family };

struct KeySpec {
  std::string name;
  KeyType type;
  json default_value;
  std::string help;
};

const std::vector<std::string>& command_names();
/// Keys accepted by `command`, including the common ones (out, seed).
const std::vector<KeySpec>& command_keys(const std::string& command);

/// Reads a TOML or JSON file into a JSON object. A report written by the
/// tool is accepted too; its embedded "config" is used.
json load_config_file(const std::string& path);

/// Converts one raw value (from a file or a flag string) to its canonical form.
json normalize(const KeySpec& key, const json& raw);

/// defaults <- file <- flags, with unknown keys rejected.
json resolve_config(const std::string& command, const json& file, const std::map<std::string, std::string>& flags);

/// Canonical family object <-> parameters.
json family_to_json(const FamilyParams& p);
FamilyParams family_from_json(const json& j);
/// A named family, a path to a family file, or an inline object.
json resolve_family(const json& value);

Rational rational_at(const json& config, const std::string& key);
std::optional<Rational> opt_rational_at(const json& config, const std::string& key);

}  // namespace psskit::cli
