#pragma once

#include "dlab/birefringent_model.hpp"
#include "dlab/numerics.hpp"

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>

namespace dlab::cli {

enum class Command { Sweep, Kk, Zeros, Pulse };

std::string to_string(Command c);
std::optional<Command> parse_command(std::string_view name);

struct PulseOptions {
  std::optional<double> carrier_ghz;  ///< default: half-waveplate frequency nearest band centre
  double sigma_ns = 5.0;
  double window_sigma = 24.0;
  std::size_t samples = 65536;
  bool front = true;
  double front_sigma = 6.0;           ///< front placed this many sigma before the peak
  double causality_threshold = 1e-10;
};

struct RunConfig {
  RunConfig(SystemConfig s, FrequencyGrid g) : system(std::move(s)), grid(g) {}

  SystemConfig system;
  FrequencyGrid grid;
  bool correct = false;
  double interior_fraction = 0.6;
  double exclusion_fraction = 0.05;
  std::optional<int> n_first;
  std::optional<int> n_last;
  PulseOptions pulse;
};

/// Values given on the command line or in the environment; each beats the
/// config file.
struct Overrides {
  std::optional<double> beta_deg;
  bool correct = false;
  std::optional<std::string> points_env;
};

using KeyValues = std::map<std::string, std::string>;

/// Flat "key = value" lines, '#' starts a comment. Throws ConfigError on
/// malformed lines and duplicate keys.
KeyValues parse_key_values(std::istream& in);

/// Index model from "1.34", "constant:1.34", "linear:n0,slope,omega_ref" or
/// "lorentz:n_inf,strength,resonance,width" (SI units, rad/s).
IndexModel parse_index_model(std::string_view text);

RunConfig build_run_config(const KeyValues& values, const Overrides& overrides);
RunConfig load_run_config(const std::filesystem::path& path, const Overrides& overrides);

/// Shortest locale-independent form with 17 significant digits; "nan" for
/// undefined values.
std::string format_number(double value);

struct CommandOutput {
  std::string csv;
  std::string report;
  /// Set when a pass/fail check in the report failed.
  bool check_failed = false;
};

CommandOutput cmd_sweep(const RunConfig& config);
CommandOutput cmd_kk(const RunConfig& config);
CommandOutput cmd_zeros(const RunConfig& config);
CommandOutput cmd_pulse(const RunConfig& config);
CommandOutput run_command(Command command, const RunConfig& config);

/// Matplotlib script that plots the CSV written next to it.
std::string plot_script(Command command, const std::filesystem::path& csv_path);

/// Path of the plot script emitted for a CSV: "<stem>.plot.py".
std::filesystem::path plot_script_path(const std::filesystem::path& csv_path);

inline constexpr int exit_ok = 0;
inline constexpr int exit_domain = 1;
inline constexpr int exit_usage = 2;

/// Full command-line entry point. Reads DLAB_POINTS from the environment.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace dlab::cli
