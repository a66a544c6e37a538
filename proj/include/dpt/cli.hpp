#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dpt/errors.hpp"
#include "dpt/model.hpp"

namespace dpt::cli {

enum class Exit : int { Pass = 0, Mismatch = 1, ConfigError = 2 };

class ConfigError : public Error {
  using Error::Error;
};

std::string_view version();

inline constexpr std::string_view kCommands[] = {"table1", "table2", "collapse", "supp-figs", "oracle", "adr"};

/// Flat key/value settings of one command; keys are the long flag names without dashes.
using Settings = std::map<std::string, std::string>;

/// Keys understood by every command.
const std::vector<std::string>& setting_keys();

/// Built-in defaults of a command. Throws ConfigError for an unknown command.
Settings command_defaults(std::string_view command);

/// Reads an INI file and returns the [common] entries overridden by the [<command>] entries.
/// Throws ConfigError when the file cannot be parsed or contains unknown keys.
Settings load_ini(const std::filesystem::path& path, std::string_view command);

/// Writes the resolved settings as [<command>] plus a [meta] section with the version.
void write_ini(const std::filesystem::path& path, std::string_view command, const Settings& s);

/// Typed view of a command's settings.
struct SweepConfig {
  std::string command;
  double omega = 1.0;
  double kappa1 = 0.1;
  std::vector<double> kappa2;
  std::optional<double> lambda;
  /// "weak", "strong" or "both".
  std::string symmetry = "both";
  /// "normal", "superradiant" or "both".
  std::string phase = "both";
  /// "gaussian", "oneloop", "exact" or "all".
  std::string level = "all";
  std::string closure = "expanded";
  std::optional<std::pair<double, double>> window;
  std::optional<int> grid;
  int cutoff = 40;
  int workers = 1;
  std::filesystem::path out;
  Settings resolved;

  std::vector<SymmetryClass> classes() const;
  std::vector<Phase> phases() const;
};

/// Default output root: $DPTLAB_OUT when set, ./dptlab-out otherwise.
std::filesystem::path default_output_root();

/// Validates and converts settings. Throws ConfigError.
SweepConfig resolve(std::string_view command, const Settings& s);

/// Runs one command and writes its artifacts into cfg.out. Returns the exit status.
Exit run_command(const SweepConfig& cfg, std::ostream& log);

/// Full command-line entry point.
int run(int argc, char** argv);

}  // namespace dpt::cli
