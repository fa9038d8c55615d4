#include "corrugate/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "corrugate/errors.hpp"

namespace corrugate {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& where) {
  double x = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(where + ": expected a number, got '" + v + "'");
  return x;
}

int to_int(const std::string& v, const std::string& where) {
  int x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(where + ": expected an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(where + ": expected true or false, got '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = [] {
    std::vector<std::pair<std::string, Setter>> t;
    auto dbl = [&t](const char* k, auto member) {
      t.emplace_back(k, [member](RunConfig& c, const std::string& v, const std::string& w) {
        member(c) = to_double(v, w);
      });
    };
    auto integer = [&t](const char* k, auto member) {
      t.emplace_back(k, [member](RunConfig& c, const std::string& v, const std::string& w) {
        member(c) = to_int(v, w);
      });
    };
    auto str = [&t](const char* k, auto member) {
      t.emplace_back(k, [member](RunConfig& c, const std::string& v, const std::string&) { member(c) = v; });
    };
    integer("n", [](RunConfig& c) -> int& { return c.n; });
    str("preset", [](RunConfig& c) -> std::string& { return c.preset; });
    dbl("scale", [](RunConfig& c) -> double& { return c.scale; });
    dbl("epsilon", [](RunConfig& c) -> double& { return c.epsilon; });
    integer("grid_points", [](RunConfig& c) -> int& { return c.grid_points; });
    dbl("lower", [](RunConfig& c) -> double& { return c.lower; });
    dbl("upper", [](RunConfig& c) -> double& { return c.upper; });
    dbl("delta0", [](RunConfig& c) -> double& { return c.schedule.delta0; });
    dbl("lambda0", [](RunConfig& c) -> double& { return c.schedule.lambda0; });
    dbl("growth_base", [](RunConfig& c) -> double& { return c.schedule.growth_base; });
    dbl("b_exponent", [](RunConfig& c) -> double& { return c.schedule.b_exponent; });
    dbl("tau", [](RunConfig& c) -> double& { return c.schedule.tau; });
    integer("J", [](RunConfig& c) -> int& { return c.schedule.J; });
    dbl("K_factor", [](RunConfig& c) -> double& { return c.schedule.K_factor; });
    integer("stages", [](RunConfig& c) -> int& { return c.schedule.stages; });
    dbl("alpha_target", [](RunConfig& c) -> double& { return c.schedule.alpha_target; });
    dbl("eta0", [](RunConfig& c) -> double& { return c.eta0; });
    dbl("moll_constant", [](RunConfig& c) -> double& { return c.moll_constant; });
    dbl("lambda_constant", [](RunConfig& c) -> double& { return c.lambda_constant; });
    dbl("r_threshold", [](RunConfig& c) -> double& { return c.r_threshold; });
    dbl("kaellen_nearness", [](RunConfig& c) -> double& { return c.kaellen_nearness; });
    dbl("positivity", [](RunConfig& c) -> double& { return c.positivity; });
    dbl("amplitude_floor", [](RunConfig& c) -> double& { return c.amplitude_floor; });
    dbl("direction_threshold", [](RunConfig& c) -> double& { return c.direction_threshold; });
    dbl("immersion_threshold", [](RunConfig& c) -> double& { return c.immersion_threshold; });
    integer("samples_per_period", [](RunConfig& c) -> int& { return c.samples_per_period; });
    t.emplace_back("holder_alphas", [](RunConfig& c, const std::string& v, const std::string& w) {
      c.holder_alphas.clear();
      std::size_t pos = 0;
      while (pos <= v.size()) {
        const auto comma = v.find(',', pos);
        const std::string item = trim(v.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        c.holder_alphas.push_back(to_double(item, w));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    });
    t.emplace_back("deterministic", [](RunConfig& c, const std::string& v, const std::string& w) {
      c.deterministic = to_bool(v, w);
    });
    str("csv_path", [](RunConfig& c) -> std::string& { return c.csv_path; });
    str("json_path", [](RunConfig& c) -> std::string& { return c.json_path; });
    str("mesh_path", [](RunConfig& c) -> std::string& { return c.mesh_path; });
    integer("mesh_stage", [](RunConfig& c) -> int& { return c.mesh_stage; });
    return t;
  }();
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  std::map<std::string, const Setter*> lookup;
  for (const auto& [name, fn] : setters()) lookup[name] = &fn;
  RunConfig c;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = lookup.find(key);
    if (it == lookup.end()) throw ConfigError(where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    (*it->second)(c, value, where);
  }
  c.schedule.n = c.n;
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in, path);
}

}  // namespace corrugate
