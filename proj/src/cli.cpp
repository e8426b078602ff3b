#include "dlab/cli.hpp"

#include "dlab/kk_engine.hpp"
#include "dlab/pulse_sim.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace dlab::cli {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double deg = pi / 180.0;
constexpr double two_pi = 2.0 * pi;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view text, const std::string& key) {
  text = trim(text);
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError("'" + key + "': expected a finite number, got '" + std::string(text) + "'");
  }
  return v;
}

long long parse_integer(std::string_view text, const std::string& key) {
  text = trim(text);
  long long v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("'" + key + "': expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

std::size_t parse_count(std::string_view text, const std::string& key) {
  const long long v = parse_integer(text, key);
  if (v <= 0) throw ConfigError("'" + key + "' must be positive");
  return static_cast<std::size_t>(v);
}

bool parse_bool(std::string_view text, const std::string& key) {
  text = trim(text);
  if (text == "true" || text == "yes" || text == "on" || text == "1") return true;
  if (text == "false" || text == "no" || text == "off" || text == "0") return false;
  throw ConfigError("'" + key + "': expected true or false, got '" + std::string(text) + "'");
}

std::vector<double> parse_list(std::string_view text, std::size_t expected, const std::string& what) {
  std::vector<double> out;
  while (true) {
    const auto comma = text.find(',');
    out.push_back(parse_double(text.substr(0, comma), what));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (out.size() != expected) {
    throw ConfigError(what + ": expected " + std::to_string(expected) + " comma-separated values");
  }
  return out;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "d_m",          "air_path_m",         "theta_deg",    "beta_deg",       "index_te",
      "index_tm",     "f_min_ghz",          "f_max_ghz",    "points",         "correct",
      "interior_fraction", "exclusion_fraction", "n_first", "n_last",         "carrier_ghz",
      "sigma_ns",     "window_sigma",       "samples",      "front",          "front_sigma",
      "causality_threshold"};
  return keys;
}

// CSV assembly with a fixed header.
class Csv {
public:
  explicit Csv(std::initializer_list<std::string_view> header) {
    bool first = true;
    for (auto h : header) {
      if (!first) text_ += ',';
      text_ += h;
      first = false;
    }
    text_ += '\n';
  }
  template <class... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((append(fields, first)), ...);
    text_ += '\n';
  }
  std::string str() && { return std::move(text_); }

private:
  void append(double v, bool& first) { sep(first), text_ += format_number(v); }
  void append(const std::optional<double>& v, bool& first) { append(v ? *v : std::nan(""), first); }
  void append(int v, bool& first) { sep(first), text_ += std::to_string(v); }
  void append(std::string_view v, bool& first) { sep(first), text_ += v; }
  void sep(bool& first) {
    if (!first) text_ += ',';
    first = false;
  }
  std::string text_;
};

std::ostringstream report_stream() {
  std::ostringstream os;
  os.precision(10);
  return os;
}

void describe_system(std::ostream& os, const RunConfig& rc) {
  const SystemConfig& s = rc.system;
  os << "slab d = " << s.d << " m, air path = " << s.air_path << " m\n"
     << "theta = " << s.theta / deg << " deg, beta = " << s.beta / deg << " deg\n"
     << "index TE = " << s.index_te.describe() << ", index TM = " << s.index_tm.describe() << "\n"
     << "band " << rc.grid.omega_min() / two_pi / 1e9 << " - " << rc.grid.omega_max() / two_pi / 1e9 << " GHz, "
     << rc.grid.size() << " points\n";
}

HalfWaveplateSearch band_half_waveplates(const SystemConfig& s, const FrequencyGrid& g) {
  double lo = delta_phi(s, g.omega_min()), hi = delta_phi(s, g.omega_max());
  if (lo > hi) std::swap(lo, hi);
  const int m_first = static_cast<int>(std::floor((lo / pi - 1.0) / 2.0));
  const int m_last = static_cast<int>(std::ceil((hi / pi - 1.0) / 2.0));
  return half_waveplate_frequencies(s, g, m_first, m_last);
}

} // namespace

std::string to_string(Command c) {
  switch (c) {
  case Command::Sweep:
    return "sweep";
  case Command::Kk:
    return "kk";
  case Command::Zeros:
    return "zeros";
  case Command::Pulse:
    return "pulse";
  }
  return "unknown";
}

std::optional<Command> parse_command(std::string_view name) {
  for (Command c : {Command::Sweep, Command::Kk, Command::Zeros, Command::Pulse}) {
    if (name == to_string(c)) return c;
  }
  return std::nullopt;
}

KeyValues parse_key_values(std::istream& in) {
  KeyValues out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
    }
    const std::string key(trim(view.substr(0, eq)));
    const std::string value(trim(view.substr(eq + 1)));
    if (key.empty() || value.empty()) {
      throw ConfigError("line " + std::to_string(number) + ": empty key or value");
    }
    if (!out.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(number) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

IndexModel parse_index_model(std::string_view text) {
  text = trim(text);
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) return ConstantIndex{parse_double(text, "index")};
  const std::string_view kind = trim(text.substr(0, colon));
  const std::string_view args = text.substr(colon + 1);
  if (kind == "constant") return ConstantIndex{parse_double(args, "constant index")};
  if (kind == "linear") {
    const auto v = parse_list(args, 3, "linear index");
    return LinearIndex{v[0], v[1], v[2]};
  }
  if (kind == "lorentz") {
    const auto v = parse_list(args, 4, "Lorentz index");
    return LorentzIndex{v[0], v[1], v[2], v[3]};
  }
  throw ConfigError("unknown index model '" + std::string(kind) + "'");
}

RunConfig build_run_config(const KeyValues& values, const Overrides& overrides) {
  for (const auto& [key, value] : values) {
    if (!known_keys().contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
  };
  auto number_or = [&](const std::string& key, double fallback) {
    const std::string* v = get(key);
    return v ? parse_double(*v, key) : fallback;
  };

  SystemConfig system;
  system.d = number_or("d_m", system.d);
  system.air_path = number_or("air_path_m", system.air_path);
  system.theta = number_or("theta_deg", 45.0) * deg;
  system.beta = (overrides.beta_deg ? *overrides.beta_deg : number_or("beta_deg", 45.0)) * deg;
  if (!get("index_te") || !get("index_tm")) throw ConfigError("config must set index_te and index_tm");
  system.index_te = parse_index_model(*get("index_te"));
  system.index_tm = parse_index_model(*get("index_tm"));
  system.validate();

  if (!get("f_min_ghz") || !get("f_max_ghz")) throw ConfigError("config must set f_min_ghz and f_max_ghz");
  std::size_t points = 8192;
  if (const std::string* v = get("points")) points = parse_count(*v, "points");
  if (overrides.points_env) points = parse_count(*overrides.points_env, "DLAB_POINTS");
  FrequencyGrid grid(two_pi * 1e9 * number_or("f_min_ghz", 0.0), two_pi * 1e9 * number_or("f_max_ghz", 0.0),
                     points);
  system.index_te.require_positive_on(grid);
  system.index_tm.require_positive_on(grid);

  RunConfig rc(system, grid);
  if (const std::string* v = get("correct")) rc.correct = parse_bool(*v, "correct");
  if (overrides.correct) rc.correct = true;
  rc.interior_fraction = number_or("interior_fraction", rc.interior_fraction);
  rc.exclusion_fraction = number_or("exclusion_fraction", rc.exclusion_fraction);
  if (!(rc.exclusion_fraction >= 0.0 && rc.exclusion_fraction < 0.5)) {
    throw ConfigError("exclusion_fraction must lie in [0, 0.5)");
  }
  if (const std::string* v = get("n_first")) rc.n_first = static_cast<int>(parse_integer(*v, "n_first"));
  if (const std::string* v = get("n_last")) rc.n_last = static_cast<int>(parse_integer(*v, "n_last"));
  if (rc.n_first.has_value() != rc.n_last.has_value()) throw ConfigError("set both n_first and n_last, or neither");
  if (rc.n_first && *rc.n_first > *rc.n_last) throw ConfigError("n_first must not exceed n_last");

  PulseOptions& p = rc.pulse;
  if (get("carrier_ghz")) p.carrier_ghz = number_or("carrier_ghz", 0.0);
  p.sigma_ns = number_or("sigma_ns", p.sigma_ns);
  p.window_sigma = number_or("window_sigma", p.window_sigma);
  if (const std::string* v = get("samples")) p.samples = parse_count(*v, "samples");
  if (const std::string* v = get("front")) p.front = parse_bool(*v, "front");
  p.front_sigma = number_or("front_sigma", p.front_sigma);
  p.causality_threshold = number_or("causality_threshold", p.causality_threshold);
  if (!(p.front_sigma > 0.0 && 2.0 * p.front_sigma < p.window_sigma)) {
    throw ConfigError("front_sigma must be positive and leave the front inside the window");
  }
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  return build_run_config(parse_key_values(in), overrides);
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

CommandOutput cmd_sweep(const RunConfig& rc) {
  const SystemConfig& s = rc.system;
  const FrequencyGrid& g = rc.grid;
  const std::size_t n = g.size();

  std::vector<double> mag(n), raw;
  std::vector<std::size_t> defined;
  for (std::size_t k = 0; k < n; ++k) {
    const auto h = transfer_h(s, g[k]);
    mag[k] = std::abs(h);
    if (mag[k] >= zero_transmission_threshold) {
      defined.push_back(k);
      raw.push_back(std::arg(h));
    }
  }
  // Unwrap across the defined samples; nulls leave gaps.
  const std::vector<double> unwrapped = unwrap_phase(raw);
  std::vector<std::optional<double>> phase(n);
  for (std::size_t j = 0; j < defined.size(); ++j) phase[defined[j]] = unwrapped[j];

  Csv csv({"frequency_hz", "magnitude", "phase_rad", "group_delay_s"});
  std::size_t k_min = 0, k_tau = 0;
  std::vector<std::optional<double>> tau(n);
  for (std::size_t k = 0; k < n; ++k) {
    const GroupDelay gd = group_delay(s, g[k]);
    if (!gd.near_singular) tau[k] = gd.seconds;
    if (mag[k] < mag[k_min]) k_min = k;
    if (tau[k] && (!tau[k_tau] || *tau[k] < *tau[k_tau])) k_tau = k;
    csv.row(g[k] / two_pi, mag[k], phase[k], tau[k]);
  }

  auto os = report_stream();
  os << "dlab sweep\n";
  describe_system(os, rc);
  for (const auto& r : band_half_waveplates(s, g).roots) {
    os << "half-waveplate frequency (m = " << r.m << "): " << r.omega / two_pi / 1e9 << " GHz\n";
  }
  os << "minimum |H| = " << mag[k_min] << " at " << g[k_min] / two_pi / 1e9 << " GHz\n";
  if (tau[k_tau]) {
    const double tm_delay = mode_phase_derivative(s, Mode::TM, g[k_tau]);
    os << "minimum group delay = " << *tau[k_tau] << " s at " << g[k_tau] / two_pi / 1e9
       << " GHz (TM-only delay " << tm_delay << " s)\n";
  }
  const std::size_t undefined = n - defined.size();
  if (undefined > 0) os << undefined << " sample(s) at zero transmission: phase undefined (nan)\n";
  return {std::move(csv).str(), os.str()};
}

CommandOutput cmd_kk(const RunConfig& rc) {
  ReconstructionOptions options;
  options.interior_fraction = rc.interior_fraction;
  options.exclusion_fraction = rc.exclusion_fraction;
  options.correct = rc.correct;
  const ReconstructionReport r = reconstruct_phase(rc.system, rc.grid, options);

  Csv csv({"frequency_hz", "phase_model_rad", "phase_kk_rad", "residual_rad"});
  for (std::size_t k = 0; k < rc.grid.size(); ++k) {
    csv.row(rc.grid[k] / two_pi, r.model_phase[k], r.reconstruction.phase.values[k], r.residual.values[k]);
  }

  auto os = report_stream();
  const double d_over_c = rc.system.d / speed_of_light;
  os << "dlab kk\n";
  describe_system(os, rc);
  os << "classification: " << to_string(r.classification) << "\n"
     << "fitted d0 = " << r.reconstruction.d0 << " s = " << r.reconstruction.d0 / d_over_c << " d/c (source: "
     << r.d0_source << ")\n"
     << "phase offset = " << r.reconstruction.offset << " rad\n"
     << "fit excludes |f - " << r.center / two_pi / 1e9 << " GHz| <= " << r.exclusion_halfwidth / two_pi / 1e9
     << " GHz\n"
     << "all-pass correction: " << (r.reconstruction.correction_applied ? "applied" : "not applied");
  if (r.reconstruction.correction_applied) os << " (" << r.reconstruction.zeros_used.size() << " zero(s))";
  os << "\n";
  if (r.classification == PhaseClass::NonMinimumPhase && !rc.correct) {
    os << "note: upper-half-plane zeros in band; rerun with --correct for the all-pass corrected phase\n";
  }
  os << "max interior residual = " << r.max_interior_residual << " rad\n";
  return {std::move(csv).str(), os.str()};
}

CommandOutput cmd_zeros(const RunConfig& rc) {
  const SystemConfig& s = rc.system;
  const FrequencyGrid& g = rc.grid;
  const ZeroSearch found = rc.n_first ? transfer_zeros(s, g, *rc.n_first, *rc.n_last)
                                      : zeros_with_real_part_in(s, g, g.omega_min(), g.omega_max());
  const PhaseClass cls = classify_minimum_phase(s, KkBand(g, rc.interior_fraction));

  Csv csv({"n", "re_freq_hz", "im_freq_hz", "half_plane", "residual"});
  for (const ComplexZero& z : found.zeros) {
    const std::string_view tag = cls == PhaseClass::Boundary             ? "Boundary"
                                 : z.half_plane == HalfPlane::Upper ? "Upper"
                                                                    : "Lower";
    csv.row(z.n, static_cast<double>(z.omega.real() / two_pi), static_cast<double>(z.omega.imag() / two_pi), tag,
            z.residual);
  }

  auto os = report_stream();
  os << "dlab zeros\n";
  describe_system(os, rc);
  os << "classification: " << to_string(cls) << "\n" << found.zeros.size() << " zero(s) found\n";
  for (const ComplexZero& z : found.zeros) {
    os << "  n = " << z.n << ": " << static_cast<double>(z.omega.real() / two_pi) / 1e9 << " GHz "
       << (z.omega.imag() < 0 ? "- " : "+ ") << std::abs(static_cast<double>(z.omega.imag() / two_pi)) / 1e9
       << " GHz i, residual " << z.residual << "\n";
  }
  for (const RejectedZero& r : found.rejected) os << "  rejected n = " << r.n << ": " << r.reason << "\n";
  return {std::move(csv).str(), os.str()};
}

CommandOutput cmd_pulse(const RunConfig& rc) {
  const SystemConfig& s = rc.system;
  const FrequencyGrid& g = rc.grid;
  const PulseOptions& po = rc.pulse;

  double carrier = 0.5 * (g.omega_min() + g.omega_max());
  if (po.carrier_ghz) {
    carrier = two_pi * 1e9 * *po.carrier_ghz;
  } else if (const auto hw = band_half_waveplates(s, g); !hw.roots.empty()) {
    const double mid = carrier;
    carrier = std::min_element(hw.roots.begin(), hw.roots.end(), [&](const auto& a, const auto& b) {
                return std::abs(a.omega - mid) < std::abs(b.omega - mid);
              })->omega;
  }

  PulseSpec spec;
  spec.carrier = carrier;
  spec.envelope_sigma = po.sigma_ns * 1e-9;
  spec.window = po.window_sigma * spec.envelope_sigma;
  spec.samples = po.samples;
  if (po.front) spec.front_time = spec.center() - po.front_sigma * spec.envelope_sigma;
  const Pulse input = synth_pulse(spec);
  const PropagationResult r = propagate(input, s, g);

  Csv csv({"time_s", "input_envelope", "output_envelope"});
  for (std::size_t i = 0; i < r.output.size(); ++i) {
    csv.row(static_cast<double>(i) * r.dt, r.input_envelope[i], r.output_envelope[i]);
  }

  const double tm_delay = mode_phase_derivative(s, Mode::TM, carrier);
  auto os = report_stream();
  os << "dlab pulse\n";
  describe_system(os, rc);
  os << "carrier = " << carrier / two_pi / 1e9 << " GHz, sigma = " << po.sigma_ns << " ns, " << spec.samples
     << " samples over " << spec.window << " s\n"
     << "input peak_time = " << r.input_peak_time << " s\n"
     << "output peak_time = " << r.peak_time << " s\n"
     << "measured peak delay = " << r.peak_shift() << " s\n"
     << "predicted_group_delay = " << r.predicted_group_delay << " s\n"
     << "TM-only reference delay = " << tm_delay << " s\n"
     << "peak delay relative to TM-only reference = " << r.peak_shift() - tm_delay << " s ("
     << (r.peak_shift() < tm_delay ? "advanced" : "retarded") << ")\n"
     << "in-band spectral energy = " << r.in_band_energy_fraction << "\n";
  for (const auto& w : r.warnings) os << "warning: " << w << "\n";

  CommandOutput out{std::move(csv).str(), {}};
  if (r.pre_front_energy_ratio) {
    const CausalityReport c = front_causality_check(r, po.causality_threshold);
    os << "front delay T = " << r.front_offset << " s\n"
       << "pre_front_energy_ratio = " << c.ratio << "\n"
       << "causality: " << (c.pass ? "pass" : "FAIL") << " (threshold " << c.threshold << ")\n";
    if (!c.pass) out.check_failed = true;
  } else {
    os << "causality: not checked (pulse has no front)\n";
  }
  out.report = os.str();
  return out;
}

CommandOutput run_command(Command command, const RunConfig& config) {
  switch (command) {
  case Command::Sweep:
    return cmd_sweep(config);
  case Command::Kk:
    return cmd_kk(config);
  case Command::Zeros:
    return cmd_zeros(config);
  case Command::Pulse:
    return cmd_pulse(config);
  }
  throw ConfigError("unknown command");
}

std::filesystem::path plot_script_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".plot.py");
  return p;
}

std::string plot_script(Command command, const std::filesystem::path& csv_path) {
  std::ostringstream os;
  os << "import sys\n"
        "import numpy as np\n"
        "import matplotlib\n"
        "matplotlib.use('Agg')\n"
        "import matplotlib.pyplot as plt\n\n"
     << "csv = sys.argv[1] if len(sys.argv) > 1 else " << '\'' << csv_path.filename().string() << "'\n"
     << "d = np.genfromtxt(csv, delimiter=',', names=True"
     << (command == Command::Zeros ? ", dtype=None, encoding='utf-8'" : "") << ")\n";
  switch (command) {
  case Command::Sweep:
    os << "f = d['frequency_hz'] / 1e9\n"
          "fig, ax = plt.subplots(3, 1, sharex=True, figsize=(6, 8))\n"
          "ax[0].plot(f, d['magnitude']); ax[0].set_ylabel('|H|')\n"
          "ax[1].plot(f, d['phase_rad']); ax[1].set_ylabel('arg H (rad)')\n"
          "ax[2].plot(f, d['group_delay_s'] * 1e9); ax[2].set_ylabel('group delay (ns)')\n"
          "ax[2].set_xlabel('frequency (GHz)')\n";
    break;
  case Command::Kk:
    os << "f = d['frequency_hz'] / 1e9\n"
          "fig, ax = plt.subplots(2, 1, sharex=True, figsize=(6, 6))\n"
          "ax[0].plot(f, d['phase_model_rad'], ':', label='model')\n"
          "ax[0].plot(f, d['phase_kk_rad'], label='from |H|')\n"
          "ax[0].set_ylabel('phase (rad)'); ax[0].legend()\n"
          "ax[1].plot(f, d['residual_rad']); ax[1].set_ylabel('residual (rad)')\n"
          "ax[1].set_xlabel('frequency (GHz)')\n";
    break;
  case Command::Zeros:
    os << "d = np.atleast_1d(d)\n"
          "fig, ax = plt.subplots(figsize=(6, 4))\n"
          "ax.axhline(0, color='k', lw=0.5)\n"
          "ax.plot(d['re_freq_hz'] / 1e9, d['im_freq_hz'] / 1e9, 'o')\n"
          "ax.set_xlabel('Re f (GHz)'); ax.set_ylabel('Im f (GHz)')\n";
    break;
  case Command::Pulse:
    os << "t = d['time_s'] * 1e9\n"
          "fig, ax = plt.subplots(figsize=(7, 4))\n"
          "ax.plot(t, d['input_envelope'], label='input')\n"
          "ax.plot(t, d['output_envelope'], label='output')\n"
          "ax.set_xlabel('time (ns)'); ax.set_ylabel('envelope'); ax.legend()\n";
    break;
  }
  os << "fig.tight_layout()\n"
        "fig.savefig(csv.rsplit('.', 1)[0] + '.png', dpi=150)\n";
  return os.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Birefringent slab transfer-function laboratory", "dlab"};
  app.require_subcommand(1);

  struct Args {
    std::string config;
    std::optional<double> beta_deg;
    bool correct = false;
    std::string out;
  };
  Args args;
  const std::pair<Command, const char*> commands[] = {
      {Command::Sweep, "magnitude, phase and group delay over the band"},
      {Command::Kk, "phase reconstructed from |H| against the model phase"},
      {Command::Zeros, "complex-frequency zeros of H"},
      {Command::Pulse, "Gaussian pulse through the slab: peak delay and front causality"}};
  for (const auto& [c, help] : commands) {
    CLI::App* sub = app.add_subcommand(to_string(c), help);
    sub->add_option("--config", args.config, "key = value config file")->required();
    sub->add_option("--beta-deg", args.beta_deg, "analyzer angle override (degrees)");
    sub->add_flag("--correct", args.correct, "apply the all-pass correction (kk)");
    sub->add_option("--out", args.out, "CSV output path (default <command>.csv)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "dlab: " << e.what() << "\n" << app.help();
    return exit_usage;
  }

  const Command command = *parse_command(app.get_subcommands().front()->get_name());
  try {
    Overrides overrides;
    overrides.beta_deg = args.beta_deg;
    overrides.correct = args.correct;
    if (const char* env = std::getenv("DLAB_POINTS"); env != nullptr && *env != '\0') overrides.points_env = env;
    const RunConfig rc = load_run_config(args.config, overrides);
    const CommandOutput result = run_command(command, rc);

    const std::filesystem::path csv_path = args.out.empty() ? to_string(command) + ".csv" : args.out;
    const std::filesystem::path script_path = plot_script_path(csv_path);
    std::ofstream csv(csv_path, std::ios::binary);
    csv << result.csv;
    std::ofstream script(script_path, std::ios::binary);
    script << plot_script(command, csv_path);
    if (!csv || !script) {
      err << "dlab: cannot write output to '" << csv_path.string() << "'\n";
      return exit_domain;
    }
    out << result.report << "csv: " << csv_path.string() << "\nplot script: " << script_path.string() << "\n";
    return result.check_failed ? exit_domain : exit_ok;
  } catch (const ConfigError& e) {
    err << "dlab: config error: " << e.what() << "\n";
    return exit_usage;
  } catch (const DomainError& e) {
    err << "dlab: " << e.what() << "\n";
    return exit_domain;
  } catch (const std::exception& e) {
    err << "dlab: " << e.what() << "\n";
    return exit_domain;
  }
}

} // namespace dlab::cli
