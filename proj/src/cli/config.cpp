#include <algorithm>
#include <cstdlib>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dpt/cli.hpp"
#include "dpt/cumulant.hpp"

#ifndef DPT_VERSION
#define DPT_VERSION "unknown"
#endif

namespace dpt::cli {

namespace pt = boost::property_tree;

std::string_view version() { return DPT_VERSION; }

const std::vector<std::string>& setting_keys() {
  static const std::vector<std::string> keys{"omega",  "kappa1", "kappa2", "lambda", "grid",  "window", "cutoff",
                                             "workers", "out",   "class",  "phase",  "level", "closure"};
  return keys;
}

namespace {

bool known_command(std::string_view c) {
  return std::find(std::begin(kCommands), std::end(kCommands), c) != std::end(kCommands);
}

bool known_key(const std::string& k) {
  const auto& keys = setting_keys();
  return std::find(keys.begin(), keys.end(), k) != keys.end();
}

double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + text + "'");
  }
  if (used != text.size()) throw ConfigError(key + ": not a number: '" + text + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  const double v = parse_double(key, text);
  if (v != static_cast<int>(v)) throw ConfigError(key + ": expected an integer, got '" + text + "'");
  return static_cast<int>(v);
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    out.push_back(parse_double(key, item));
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::string one_of(const std::string& key, const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return v;
  std::string msg = key + ": '" + v + "' is not one of";
  for (const char* a : allowed) msg += std::string(" ") + a;
  throw ConfigError(msg);
}

}  // namespace

Settings command_defaults(std::string_view command) {
  if (!known_command(command)) throw ConfigError("unknown command '" + std::string(command) + "'");
  Settings s;
  for (const auto& k : setting_keys()) s[k] = "";
  s["omega"] = "1";
  s["kappa1"] = "0.1";
  s["class"] = "both";
  s["phase"] = "both";
  s["level"] = "all";
  s["closure"] = "expanded";
  s["cutoff"] = "40";
  s["workers"] = "1";
  if (command == "table1") {
    s["kappa2"] = "1e-9";
    s["window"] = "1e-8,1e-4";
    s["grid"] = "41";
  } else if (command == "table2") {
    s["window"] = "1e-9,1e-5";
    s["grid"] = "17";
  } else if (command == "collapse") {
    s["kappa2"] = "1e-9,1e-8,1e-7";
    s["grid"] = "40";
  } else if (command == "supp-figs") {
    s["kappa2"] = "1e-12";
    s["window"] = "1e-6,1e-4";
    s["grid"] = "21";
  } else if (command == "oracle") {
    s["kappa1"] = "0.2";
    s["kappa2"] = "0.1";
    s["lambda"] = "0.3";
  } else if (command == "adr") {
    s["class"] = "weak";
    s["phase"] = "normal";
    s["window"] = "1e-8,1e-4";
    s["grid"] = "41";
    s["cutoff"] = "60";
  }
  return s;
}

Settings load_ini(const std::filesystem::path& path, std::string_view command) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("cannot read config: " + std::string(e.what()));
  }
  Settings out;
  auto take = [&](const std::string& section) {
    const auto it = tree.find(section);
    if (it == tree.not_found()) return;
    for (const auto& [key, node] : it->second) {
      if (!known_key(key)) throw ConfigError("[" + section + "] unknown key '" + key + "'");
      out[key] = node.get_value<std::string>();
    }
  };
  for (const auto& [section, node] : tree) {
    if (section != "common" && section != "meta" && !known_command(section))
      throw ConfigError("unknown section [" + section + "]");
  }
  take("common");
  take(std::string(command));
  return out;
}

void write_ini(const std::filesystem::path& path, std::string_view command, const Settings& s) {
  pt::ptree tree;
  tree.put("meta.program", "dptlab");
  tree.put("meta.version", std::string(version()));
  pt::ptree section;
  for (const auto& [k, v] : s) section.put(k, v);
  tree.add_child(std::string(command), section);
  try {
    pt::ini_parser::write_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("cannot write config: " + std::string(e.what()));
  }
}

std::vector<SymmetryClass> SweepConfig::classes() const {
  if (symmetry == "weak") return {SymmetryClass::Weak};
  if (symmetry == "strong") return {SymmetryClass::Strong};
  return {SymmetryClass::Weak, SymmetryClass::Strong};
}

std::vector<Phase> SweepConfig::phases() const {
  if (phase == "normal") return {Phase::Normal};
  if (phase == "superradiant") return {Phase::Superradiant};
  return {Phase::Normal, Phase::Superradiant};
}

std::filesystem::path default_output_root() {
  if (const char* env = std::getenv("DPTLAB_OUT"); env != nullptr && *env != '\0') return env;
  return "dptlab-out";
}

SweepConfig resolve(std::string_view command, const Settings& s) {
  SweepConfig c;
  c.command = std::string(command);
  Settings full = command_defaults(command);
  for (const auto& [k, v] : s) {
    if (!known_key(k)) throw ConfigError("unknown setting '" + k + "'");
    full[k] = v;
  }
  auto get = [&](const std::string& k) -> const std::string& { return full.at(k); };

  c.omega = parse_double("omega", get("omega"));
  if (!(c.omega > 0.0)) throw ConfigError("omega must be positive");
  c.kappa1 = parse_double("kappa1", get("kappa1"));
  if (!(c.kappa1 >= 0.0)) throw ConfigError("kappa1 must be non-negative");
  if (!get("kappa2").empty()) c.kappa2 = parse_list("kappa2", get("kappa2"));
  for (double k : c.kappa2)
    if (!(k > 0.0)) throw ConfigError("kappa2 values must be positive");
  if (!get("lambda").empty()) {
    c.lambda = parse_double("lambda", get("lambda"));
    if (!(*c.lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  }
  if (!get("grid").empty()) {
    c.grid = parse_int("grid", get("grid"));
    if (*c.grid < 2) throw ConfigError("grid needs at least two points");
  }
  if (!get("window").empty()) {
    const auto w = parse_list("window", get("window"));
    if (w.size() != 2 || !(w[0] > 0.0) || !(w[1] > w[0])) throw ConfigError("window must be lo,hi with 0 < lo < hi");
    c.window = std::make_pair(w[0], w[1]);
  }
  c.cutoff = parse_int("cutoff", get("cutoff"));
  if (c.cutoff < 8) throw ConfigError("cutoff must be at least 8");
  c.workers = parse_int("workers", get("workers"));
  if (c.workers < 1) throw ConfigError("workers must be at least 1");
  c.symmetry = one_of("class", get("class"), {"weak", "strong", "both"});
  c.phase = one_of("phase", get("phase"), {"normal", "superradiant", "both"});
  c.level = one_of("level", get("level"), {"gaussian", "oneloop", "exact", "all"});
  c.closure = one_of("closure", get("closure"), {"expanded", "printed"});
  c.out = get("out").empty() ? default_output_root() / c.command : std::filesystem::path(get("out"));
  full["out"] = c.out.string();
  c.resolved = full;
  return c;
}

}  // namespace dpt::cli
