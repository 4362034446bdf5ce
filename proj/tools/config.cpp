#include "config.hpp"

#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <toml.hpp>

#include "psskit/parse.hpp"

namespace psskit::cli {

namespace {

std::vector<KeySpec> common_keys() {
  return {
      {"out", KeyType::String, "psskit-out", "output directory"},
      {"seed", KeyType::Int, 20261019, "seed for randomized parts"},
  };
}

std::map<std::string, std::vector<KeySpec>> build_schema() {
  std::map<std::string, std::vector<KeySpec>> s;
  s["verify"] = {{"family", KeyType::Family, "t22-default", "named family, family file, or inline table"}};
  s["lemma21"] = {{"family", KeyType::Family, "t22-default", "named family, family file, or inline table"},
                  {"delta", KeyType::Rational, "1", "scalar of the third compatibility condition"}};
  s["match-ch"] = {{"ansatz", KeyType::String, "t24", "family searched (t24 or t22)"},
                   {"target", KeyType::String, "", "right-hand side F; empty means Camassa-Holm"}};
  s["immerse"] = {
      {"case", KeyType::String, "P35i", "P35i, P35ii, P37i, P37ii or P37iii"},
      {"alpha", KeyType::Real, 2.5, "closed forms: alpha > 0"},
      {"beta", KeyType::Real, 1.0, "integration constant beta"},
      {"mu2", KeyType::Real, 0.0, "mu2 (nonzero for the ODE cases)"},
      {"eta2", KeyType::Real, 1.0, "eta2"},
      {"C1", KeyType::Real, 0.0, "C1"},
      {"lambda", KeyType::Real, 1.0, "lambda of the T24 instance used for the Codazzi check"},
      {"sign", KeyType::Int, 1, "branch sign epsilon"},
      {"root", KeyType::Int, 1, "closed forms: sign of a = +-sqrt(L); ODE cases: sqrt(Delta) branch times sign"},
      {"b0", KeyType::Real, 2.0, "ODE cases: b at xi0"},
      {"xi0", KeyType::Real, 0.0, "ODE cases: initial xi"},
      {"xi_end", KeyType::Real, 1.0, "ODE cases: final xi"},
      {"abs_tol", KeyType::Real, 1e-10, "ODE absolute tolerance"},
      {"rel_tol", KeyType::Real, 1e-10, "ODE relative tolerance"},
      {"samples", KeyType::Int, 101, "points in the exported coefficient table"},
      {"gauss_tol", KeyType::Real, 1e-8, "accepted |ac - b^2 + 1|"},
      {"codazzi_tol", KeyType::Real, 1e-8, "accepted Codazzi residual"},
  };
  s["certify"] = {
      {"kind", KeyType::String, "t23", "t23, t25i or t25ii"},
      {"sign", KeyType::Int, 1, "branch sign epsilon"},
      {"mu2", KeyType::Rational, "0", ""},
      {"eta2", KeyType::Rational, "1", ""},
      {"mu3", KeyType::OptRational, nullptr, "unset: implied by the kind"},
      {"eta3", KeyType::OptRational, nullptr, "unset: implied by the kind"},
      {"lambda", KeyType::Rational, "1", ""},
      {"C2", KeyType::Rational, "0", ""},
      {"theta", KeyType::Rational, "1", ""},
      {"nu", KeyType::Rational, "1", ""},
      {"sigma", KeyType::Rational, "0", ""},
      {"tau", KeyType::Rational, "1", ""},
      {"sweep", KeyType::Int, 0, "additionally certify this many random admissible parameter sets"},
  };
  s["reconstruct"] = {
      {"solution", KeyType::String, "sg_kink", "sg_kink or traveling_wave"},
      {"family", KeyType::Family, "", "traveling waves: family (empty: the matched Camassa-Holm instance)"},
      {"a", KeyType::Real, 1.0, "kink parameter"},
      {"c", KeyType::Real, 2.0, "wave speed"},
      {"U0", KeyType::Real, 0.1, "U at xi0"},
      {"U1", KeyType::Real, 0.05, "U' at xi0"},
      {"U2", KeyType::Real, 0.0, "U'' at xi0"},
      {"xi0", KeyType::Real, 0.0, "initial point of the wave profile"},
      {"x0", KeyType::Real, 0.25, "grid origin x"},
      {"t0", KeyType::Real, 0.25, "grid origin t"},
      {"hx", KeyType::Real, 0.01, "grid spacing in x"},
      {"ht", KeyType::Real, 0.01, "grid spacing in t"},
      {"nx", KeyType::Int, 101, "nodes in x"},
      {"nt", KeyType::Int, 101, "nodes in t"},
      {"sff", KeyType::String, "sine_gordon", "sine_gordon, constant, P35i, P37i or P37ii"},
      {"sff_sign", KeyType::Int, 1, "sign of b (sine_gordon) or epsilon (closed forms)"},
      {"sff_a", KeyType::Real, 0.0, "constant a"},
      {"sff_b", KeyType::Real, 1.0, "constant b"},
      {"sff_c", KeyType::Real, 0.0, "constant c"},
      {"alpha", KeyType::Real, 2.5, "closed forms: alpha"},
      {"beta", KeyType::Real, 1.0, "closed forms: beta"},
      {"drift_threshold", KeyType::Real, 1e-6, "maximal frame orthonormality drift"},
      {"reorthonormalize", KeyType::Bool, false, "re-orthonormalize the frame after each step"},
  };
  for (auto& [name, keys] : s) {
    auto common = common_keys();
    keys.insert(keys.begin(), common.begin(), common.end());
  }
  return s;
}

const std::map<std::string, std::vector<KeySpec>>& schema() {
  static const auto s = build_schema();
  return s;
}

json from_toml(const toml::node& n) {
  if (auto t = n.as_table()) {
    json o = json::object();
    for (const auto& [k, v] : *t) o[std::string(k.str())] = from_toml(v);
    return o;
  }
  if (auto a = n.as_array()) {
    json o = json::array();
    for (const auto& v : *a) o.push_back(from_toml(v));
    return o;
  }
  if (auto v = n.as_integer()) return v->get();
  if (auto v = n.as_floating_point()) return v->get();
  if (auto v = n.as_boolean()) return v->get();
  if (auto v = n.as_string()) return v->get();
  throw ConfigError("unsupported TOML value (dates and times are not accepted)");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path);
  return ss.str();
}

json parse_document(const std::string& text, const std::string& path) {
  const std::string ext = std::filesystem::path(path).extension().string();
  auto as_json = [&] { return json::parse(text); };
  auto as_toml = [&] { return from_toml(toml::parse(text, path)); };
  try {
    if (ext == ".json") return as_json();
    if (ext == ".toml") return as_toml();
    try {
      return as_json();
    } catch (const json::exception&) {
      return as_toml();
    }
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const toml::parse_error& e) {
    std::ostringstream ss;
    ss << path << ": " << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError(ss.str());
  }
}

std::string lower(std::string s) {
  for (char& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

Rational to_rational(const json& v, const std::string& what) {
  if (v.is_number_integer()) return Rational(std::to_string(v.get<long long>()));
  if (v.is_number_float()) return rational_from_double(v.get<double>());
  if (v.is_string()) {
    if (auto q = parse_rational(v.get<std::string>())) return *q;
  }
  throw ConfigError(what + ": expected a rational number, got " + v.dump());
}

double to_real(const json& v, const std::string& what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    double d = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ec == std::errc() && p == s.data() + s.size()) return d;
    if (auto q = parse_rational(s)) return to_double(*q);
  }
  throw ConfigError(what + ": expected a number, got " + v.dump());
}

long long to_int(const json& v, const std::string& what) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == double(static_cast<long long>(d))) return static_cast<long long>(d);
  }
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    long long i = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), i);
    if (ec == std::errc() && p == s.data() + s.size()) return i;
  }
  throw ConfigError(what + ": expected an integer, got " + v.dump());
}

bool to_bool(const json& v, const std::string& what) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer() && (v == 0 || v == 1)) return v == 1;
  if (v.is_string()) {
    const std::string s = lower(v.get<std::string>());
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
  }
  throw ConfigError(what + ": expected true or false, got " + v.dump());
}

const std::vector<std::string>& family_keys() {
  static const std::vector<std::string> k = {"kind",  "sign", "mu2", "eta2",  "mu3", "eta3", "lambda", "C1",
                                             "C2",    "theta", "nu", "sigma", "tau", "f",    "phi1",   "vphi"};
  return k;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"verify", "lemma21", "match-ch", "immerse", "certify", "reconstruct"};
  return names;
}

const std::vector<KeySpec>& command_keys(const std::string& command) {
  auto it = schema().find(command);
  if (it == schema().end()) throw ConfigError("unknown command " + command);
  return it->second;
}

json load_config_file(const std::string& path) {
  json doc = parse_document(read_file(path), path);
  if (!doc.is_object()) throw ConfigError(path + ": top level must be a table");
  if (doc.contains("config") && doc.contains("result")) doc = doc["config"];
  if (!doc.is_object()) throw ConfigError(path + ": embedded config must be a table");
  return doc;
}

json normalize(const KeySpec& key, const json& raw) {
  const std::string what = "key '" + key.name + "'";
  switch (key.type) {
    case KeyType::Rational: return to_string(to_rational(raw, what));
    case KeyType::OptRational:
      if (raw.is_null() || (raw.is_string() && (raw == "" || lower(raw.get<std::string>()) == "none"))) return nullptr;
      return to_string(to_rational(raw, what));
    case KeyType::Real: {
      const double d = to_real(raw, what);
      if (!std::isfinite(d)) throw ConfigError(what + " must be finite");
      return d;
    }
    case KeyType::Int: return to_int(raw, what);
    case KeyType::Bool: return to_bool(raw, what);
    case KeyType::String:
      if (!raw.is_string()) throw ConfigError(what + ": expected a string, got " + raw.dump());
      return raw;
    case KeyType::Family:
      if (raw.is_string() && raw == "") return raw;
      return resolve_family(raw);
  }
  return raw;
}

json resolve_config(const std::string& command, const json& file, const std::map<std::string, std::string>& flags) {
  const auto& keys = command_keys(command);
  json out = json::object();
  for (const auto& k : keys) out[k.name] = k.default_value;
  for (const auto& [name, value] : file.items()) {
    if (name == "command") {
      if (value != command) throw ConfigError("config was written for command " + value.dump());
      continue;
    }
    if (name == "version") continue;
    bool known = false;
    for (const auto& k : keys) known = known || k.name == name;
    if (!known) throw ConfigError("unknown key '" + name + "' for command " + command);
    out[name] = value;
  }
  for (const auto& [name, value] : flags) out[name] = value;
  for (const auto& k : keys) out[k.name] = normalize(k, out[k.name]);
  out["command"] = command;
  return out;
}

json family_to_json(const FamilyParams& p) {
  auto slot = [](const std::optional<JetExpr>& e) -> json { return e ? json(render(*e)) : json("opaque"); };
  auto opt = [](const std::optional<Rational>& q) -> json { return q ? json(to_string(*q)) : json(nullptr); };
  json j = json::object();
  j["kind"] = to_string(p.kind);
  j["sign"] = p.sign;
  j["mu2"] = to_string(p.mu2);
  j["eta2"] = to_string(p.eta2);
  j["mu3"] = opt(p.mu3);
  j["eta3"] = opt(p.eta3);
  j["lambda"] = to_string(p.lambda);
  j["C1"] = to_string(p.C1);
  j["C2"] = to_string(p.C2);
  j["theta"] = to_string(p.theta);
  j["nu"] = to_string(p.nu);
  j["sigma"] = to_string(p.sigma);
  j["tau"] = to_string(p.tau);
  j["f"] = slot(p.f);
  j["phi1"] = slot(p.phi1);
  j["vphi"] = slot(p.vphi);
  return j;
}

FamilyParams family_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("family must be a table");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const auto& name : family_keys()) known = known || name == k;
    if (!known) throw ConfigError("unknown family key '" + k + "'");
  }
  if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError("family needs a string 'kind'");
  auto kind = parse_family_kind(j["kind"].get<std::string>());
  if (!kind) throw ConfigError("unknown family kind " + j["kind"].dump());
  const int sign = j.contains("sign") ? int(to_int(j["sign"], "family sign")) : 1;
  FamilyParams p = default_params(*kind, sign);
  auto rat = [&](const char* key, Rational& dst) {
    if (j.contains(key)) dst = to_rational(j[key], std::string("family ") + key);
  };
  auto opt = [&](const char* key, std::optional<Rational>& dst) {
    if (!j.contains(key)) return;
    if (j[key].is_null())
      dst.reset();
    else
      dst = to_rational(j[key], std::string("family ") + key);
  };
  auto slot = [&](const char* key, std::optional<JetExpr>& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_string()) throw ConfigError(std::string("family ") + key + " must be an expression string");
    const std::string text = j[key].get<std::string>();
    if (text == "opaque") {
      dst.reset();
      return;
    }
    try {
      dst = parse_expr(text);
    } catch (const JetError& e) {
      throw ConfigError(std::string("family ") + key + ": " + e.what());
    }
  };
  rat("mu2", p.mu2);
  rat("eta2", p.eta2);
  opt("mu3", p.mu3);
  opt("eta3", p.eta3);
  rat("lambda", p.lambda);
  rat("C1", p.C1);
  rat("C2", p.C2);
  rat("theta", p.theta);
  rat("nu", p.nu);
  rat("sigma", p.sigma);
  rat("tau", p.tau);
  slot("f", p.f);
  slot("phi1", p.phi1);
  slot("vphi", p.vphi);
  try {
    validate(p);
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("family: ") + e.what());
  } catch (const JetError& e) {
    throw ConfigError(std::string("family: ") + e.what());
  }
  return p;
}

json resolve_family(const json& value) {
  if (value.is_object()) return family_to_json(family_from_json(value));
  if (!value.is_string()) throw ConfigError("family must be a name, a path or a table");
  const std::string s = value.get<std::string>();
  if (auto p = named_family(lower(s))) return family_to_json(*p);
  if (!std::filesystem::exists(s)) throw IoError("no named family or file called '" + s + "'");
  json doc = parse_document(read_file(s), s);
  if (doc.is_object() && doc.contains("family") && doc["family"].is_object()) doc = doc["family"];
  return family_to_json(family_from_json(doc));
}

Rational rational_at(const json& config, const std::string& key) { return to_rational(config.at(key), key); }

std::optional<Rational> opt_rational_at(const json& config, const std::string& key) {
  if (config.at(key).is_null()) return std::nullopt;
  return to_rational(config.at(key), key);
}

}  // namespace psskit::cli
