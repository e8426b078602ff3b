#include "dlab/cli.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace dlab;
using namespace dlab::cli;

namespace {

constexpr const char* paper40 = R"(# calibrated slab
d_m = 0.2
air_path_m = 0
theta_deg = 45
beta_deg = 40
index_te = 1.3847451429850746
index_tm = 1.34
f_min_ghz = 13
f_max_ghz = 20
points = 2048
samples = 16384
)";

KeyValues kv(const std::string& text) {
  std::istringstream in(text);
  return parse_key_values(in);
}

RunConfig config(const std::string& text, Overrides o = {}) { return build_run_config(kv(text), o); }

std::vector<std::vector<std::string>> rows(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    out.push_back(cells);
  }
  return out;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("dlab_cli_test_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::filesystem::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

int invoke(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "dlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

} // namespace

TEST_CASE("key-value parsing") {
  const KeyValues v = kv("# header\n  a = 1  # trailing\n\nb=two words\r\n");
  CHECK(v.size() == 2);
  CHECK(v.at("a") == "1");
  CHECK(v.at("b") == "two words");
  CHECK_THROWS_AS(kv("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(kv("just text\n"), ConfigError);
  CHECK_THROWS_AS(kv("a =\n"), ConfigError);
}

TEST_CASE("index model strings") {
  CHECK(std::holds_alternative<ConstantIndex>(parse_index_model("1.34").variant()));
  CHECK(std::holds_alternative<LinearIndex>(parse_index_model("linear:1.3,1e-13,1e11").variant()));
  const IndexModel lor = parse_index_model("lorentz: 1.2, 3e21, 2.5e11, 1.2e10");
  CHECK(parse_index_model(lor.describe()).describe() == lor.describe());
  CHECK_THROWS_AS(parse_index_model("cubic:1"), ConfigError);
  CHECK_THROWS_AS(parse_index_model("linear:1,2"), ConfigError);
  CHECK_THROWS_AS(parse_index_model("abc"), ConfigError);
}

TEST_CASE("run config: degrees on the surface, overrides win") {
  const RunConfig rc = config(paper40);
  CHECK(rc.system.beta == doctest::Approx(40 * test::deg));
  CHECK(rc.system.theta == doctest::Approx(test::pi / 4));
  CHECK(rc.grid.size() == 2048);
  CHECK(rc.grid.omega_min() == doctest::Approx(13 * test::GHz));

  Overrides o;
  o.beta_deg = 50.0;
  o.correct = true;
  o.points_env = "1024";
  const RunConfig over = config(paper40, o);
  CHECK(over.system.beta == doctest::Approx(50 * test::deg));
  CHECK(over.correct);
  CHECK(over.grid.size() == 1024);

  o.points_env = "12x";
  CHECK_THROWS_AS(config(paper40, o), ConfigError);
  CHECK_THROWS_AS(config(std::string(paper40) + "colour = red\n"), ConfigError);
  CHECK_THROWS_AS(config("index_te = 1.4\nf_min_ghz = 1\nf_max_ghz = 2\n"), ConfigError);
  CHECK_THROWS_AS(config(std::string(paper40) + "n_first = 0\n"), ConfigError);
}

TEST_CASE("number formatting is fixed and locale independent") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(13e9) == "13000000000");
  CHECK(format_number(-2.5e-10) == "-2.5000000000000002e-10");
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("sweep: dip, anomalous dispersion and magnitude symmetry") {
  const CommandOutput s40 = cmd_sweep(config(paper40));
  Overrides o;
  o.beta_deg = 50.0;
  const CommandOutput s50 = cmd_sweep(config(paper40, o));
  const auto r40 = rows(s40.csv), r50 = rows(s50.csv);
  REQUIRE(r40.size() == 2049);
  CHECK(r40[0] == std::vector<std::string>{"frequency_hz", "magnitude", "phase_rad", "group_delay_s"});
  double min_mag = 1.0, at = 0.0, min_tau = 1.0;
  for (std::size_t i = 1; i < r40.size(); ++i) {
    const double m = std::stod(r40[i][1]);
    if (m < min_mag) min_mag = m, at = std::stod(r40[i][0]);
    min_tau = std::min(min_tau, std::stod(r40[i][3]));
    CHECK(std::abs(m - std::stod(r50[i][1])) <= 1e-12);
  }
  CHECK(min_mag == doctest::Approx(0.087).epsilon(0.01));
  CHECK(at == doctest::Approx(16.75e9).epsilon(1e-3));
  CHECK(min_tau < 0.894e-9);  // below the TM-only delay
  CHECK(s40.csv.find('\r') == std::string::npos);
}

TEST_CASE("sweep marks the exact null as undefined") {
  Overrides o;
  o.beta_deg = 45.0;
  RunConfig rc = config(paper40, o);
  rc.grid = FrequencyGrid(13 * test::GHz, 20.5 * test::GHz, 8193);
  const auto r = rows(cmd_sweep(rc).csv);
  std::size_t nan_rows = 0;
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (r[i][2] == "nan") {
      ++nan_rows;
      CHECK(std::stod(r[i][1]) < 1e-12);
      CHECK(std::stod(r[i][0]) == doctest::Approx(16.75e9));
    }
  }
  CHECK(nan_rows == 1);
}

TEST_CASE("kk command") {
  const CommandOutput k40 = cmd_kk(config(paper40));
  CHECK(k40.report.find("classification: MinimumPhase") != std::string::npos);
  CHECK(k40.report.find("fitted d0") != std::string::npos);
  CHECK(rows(k40.csv)[0] == std::vector<std::string>{"frequency_hz", "phase_model_rad", "phase_kk_rad", "residual_rad"});
  CHECK(rows(k40.csv)[1][2] == "nan");

  Overrides o;
  o.beta_deg = 50.0;
  CHECK(cmd_kk(config(paper40, o)).report.find("NonMinimumPhase") != std::string::npos);
  o.beta_deg = 45.0;
  CHECK_THROWS_AS(cmd_kk(config(paper40, o)), DomainError);
}

TEST_CASE("zeros command") {
  Overrides o;
  o.beta_deg = 50.0;
  const auto up = rows(cmd_zeros(config(paper40, o)).csv);
  const auto dn = rows(cmd_zeros(config(paper40)).csv);
  REQUIRE(up.size() == 2);
  REQUIRE(dn.size() == 2);
  CHECK(up[0] == std::vector<std::string>{"n", "re_freq_hz", "im_freq_hz", "half_plane", "residual"});
  CHECK(up[1][3] == "Upper");
  CHECK(dn[1][3] == "Lower");
  CHECK(std::stod(up[1][2]) == doctest::Approx(-std::stod(dn[1][2])).epsilon(1e-9));
  o.beta_deg = 45.0;
  CHECK(rows(cmd_zeros(config(paper40, o)).csv)[1][3] == "Boundary");
}

TEST_CASE("pulse command") {
  const CommandOutput p40 = cmd_pulse(config(paper40));
  CHECK(rows(p40.csv)[0] == std::vector<std::string>{"time_s", "input_envelope", "output_envelope"});
  CHECK(rows(p40.csv).size() == 16385);
  CHECK(p40.report.find("(advanced)") != std::string::npos);
  CHECK(p40.report.find("causality: pass") != std::string::npos);
  CHECK_FALSE(p40.check_failed);

  Overrides o;
  o.beta_deg = 0.0;
  const CommandOutput p0 = cmd_pulse(config(paper40, o));
  CHECK(p0.report.find("causality: pass") != std::string::npos);
  o.beta_deg = 50.0;
  CHECK(cmd_pulse(config(paper40, o)).report.find("(retarded)") != std::string::npos);
}

TEST_CASE("command line: outputs, determinism and exit codes") {
  const TempDir dir;
  const auto cfg = dir.write("paper.conf", paper40).string();
  const auto out1 = (dir.path / "a.csv").string(), out2 = (dir.path / "b.csv").string();

  std::string text;
  CHECK(invoke({"sweep", "--config", cfg, "--out", out1}, &text) == exit_ok);
  CHECK(text.find("dlab sweep") != std::string::npos);
  CHECK(invoke({"sweep", "--config", cfg, "--out", out2}) == exit_ok);
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(out1) == slurp(out2));
  CHECK(std::filesystem::exists(dir.path / "a.plot.py"));
  CHECK(slurp((dir.path / "a.plot.py").string()).find("a.csv") != std::string::npos);

  CHECK(invoke({"kk", "--config", cfg, "--beta-deg", "45", "--out", out1}) == exit_domain);
  CHECK(invoke({"kk", "--config", cfg, "--beta-deg", "50", "--correct", "--out", out1}, &text) == exit_ok);
  CHECK(text.find("all-pass correction: applied") != std::string::npos);
  CHECK(invoke({"sweep", "--config", (dir.path / "missing.conf").string()}) == exit_usage);
  CHECK(invoke({"sweep"}) == exit_usage);
  CHECK(invoke({"frobnicate", "--config", cfg}) == exit_usage);
  CHECK(invoke({"sweep", "--config", cfg, "--beta-deg", "forty"}) == exit_usage);
  const auto bad = dir.write("bad.conf", "d_m = -1\nindex_te = 1.4\nindex_tm = 1.3\nf_min_ghz = 1\nf_max_ghz = 2\n");
  CHECK(invoke({"sweep", "--config", bad.string(), "--out", out1}) == exit_usage);
}

TEST_CASE("plot scripts name the columns they plot") {
  CHECK(plot_script(Command::Sweep, "s.csv").find("group_delay_s") != std::string::npos);
  CHECK(plot_script(Command::Kk, "k.csv").find("phase_kk_rad") != std::string::npos);
  CHECK(plot_script(Command::Zeros, "z.csv").find("im_freq_hz") != std::string::npos);
  CHECK(plot_script(Command::Pulse, "p.csv").find("output_envelope") != std::string::npos);
  CHECK(plot_script_path("out/run.csv") == std::filesystem::path("out/run.plot.py"));
}
