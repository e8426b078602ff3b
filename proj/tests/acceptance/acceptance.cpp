// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "dlab/kk_engine.hpp"
#include "dlab/pulse_sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace dlab;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double deg = pi / 180.0;
constexpr double GHz = 2.0 * pi * 1e9;
constexpr double omega_m = 16.75 * GHz;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome magnitude_phase_asymmetry() {
  const auto t0 = std::chrono::steady_clock::now();
  const FrequencyGrid g(13 * GHz, 20 * GHz, 8192);
  const SystemConfig lo = paper_config(40 * deg), hi = paper_config(50 * deg);
  const RealSeries m_lo = magnitude_series(lo, g), m_hi = magnitude_series(hi, g);
  const RealSeries p_lo = arg_h(lo, g), p_hi = arg_h(hi, g);
  const double elapsed = seconds_since(t0);
  double mag_gap = 0.0, phase_gap = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    mag_gap = std::max(mag_gap, std::abs(m_lo[k] - m_hi[k]));
    if (std::abs(g[k] - omega_m) <= 0.05 * omega_m) phase_gap = std::max(phase_gap, std::abs(p_lo[k] - p_hi[k]));
  }
  return {mag_gap <= 1e-12 && phase_gap > pi / 2 && elapsed < 1.0,
          fmt("max |H40-H50| = %.2e, max phase gap near w_m = %.3f rad, %.3f s", mag_gap, phase_gap, elapsed)};
}

Outcome half_waveplate_placement() {
  const auto roots = half_waveplate_frequencies(paper_config(40 * deg), FrequencyGrid(13 * GHz, 20 * GHz, 8192), 0, 0);
  if (roots.roots.size() != 1) return {false, "expected exactly one half-waveplate frequency in 13-20 GHz"};
  const double f = roots.roots[0].omega / (2 * pi);
  return {std::abs(f - 16.75e9) <= 1e3 && f >= 16.5e9 && f <= 17e9,
          fmt("f_m = %.6f GHz, offset %.3g Hz", f / 1e9, f - 16.75e9)};
}

Outcome epsilon_expansion_check() {
  bool pass = true;
  std::ostringstream detail;
  double previous = 0.0;
  for (double eps : {0.04, 0.02, 0.01}) {
    const SystemConfig c = paper_config(pi / 4 - eps);
    const EpsilonPrediction p = epsilon_expansion(c, omega_m);
    const double mag_err = std::abs(magnitude_h(c, omega_m) - p.magnitude);
    if (previous > 0.0) {
      const double ratio = previous / mag_err;
      pass = pass && ratio > 4.0 && ratio < 16.0;
      detail << fmt("|H| err ratio %.2f; ", ratio);
    }
    previous = mag_err;
    for (double sign : {-1.0, 1.0}) {
      const SystemConfig cs = paper_config(pi / 4 + sign * eps);
      const double exact = group_delay(cs, omega_m).seconds;
      const double predicted = epsilon_expansion(cs, omega_m).group_delay;
      const double rel = std::abs(exact - predicted) / std::abs(predicted);
      pass = pass && rel < 0.01;
      detail << fmt("tau eps=%+.2f rel err %.2f%%; ", sign * eps, 100 * rel);
    }
  }
  return {pass, detail.str()};
}

Outcome group_delay_oracle() {
  const FrequencyGrid g(13 * GHz, 20 * GHz, 4096);
  double worst = 0.0;
  for (double b : {30.0, 40.0, 50.0, 60.0}) {
    const SystemConfig c = paper_config(b * deg);
    const RealSeries phase = arg_h(c, g);
    for (std::size_t k = 1; k + 1 < g.size(); ++k) {
      if (std::abs(g[k] - omega_m) <= 0.1 * omega_m) continue;
      const double fd = (phase[k + 1] - phase[k - 1]) / (2 * g.spacing());
      const double tau = group_delay(c, g[k]).seconds;
      worst = std::max(worst, std::abs(fd - tau) / std::abs(tau));
    }
  }
  return {worst < 1e-6, fmt("max relative error %.2e away from w_m (4096 points)", worst)};
}

Outcome zero_classification() {
  const FrequencyGrid g(13 * GHz, 20 * GHz, 8192);
  bool pass = true;
  std::size_t count = 0;
  double worst = 0.0;
  for (double b : {30.0, 40.0, 44.0, 46.0, 50.0, 60.0}) {
    const SystemConfig c = paper_config(b * deg);
    double band_max = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) band_max = std::max(band_max, magnitude_h(c, g[k]));
    const ZeroSearch z = zeros_with_real_part_in(c, g, g.omega_min(), g.omega_max());
    pass = pass && !z.zeros.empty() && z.rejected.empty();
    for (const ComplexZero& zero : z.zeros) {
      ++count;
      const HalfPlane expected = b < 45.0 ? HalfPlane::Lower : HalfPlane::Upper;
      const double rel = static_cast<double>(std::abs(transfer_h(c, zero.omega))) / band_max;
      worst = std::max(worst, rel);
      pass = pass && zero.half_plane == expected && rel < 1e-9;
    }
  }
  return {pass, fmt("%zu in-band zeros over 6 analyzer angles, max residual %.2e of band max", count, worst)};
}

Outcome lorentzian_round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  const double w0 = 1.0, gamma = 0.2;
  const FrequencyGrid g(w0 / 10, 10 * w0, 16384);
  std::vector<double> re(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) re[k] = (1.0 / std::complex<double>(w0 * w0 - g[k] * g[k], -gamma * g[k])).real();
  const RealSeries re_series(g, re);
  const MaskedSeries back = kk_re_from_im(kk_im_from_re(re_series));
  const double elapsed = seconds_since(t0);
  const KkBand band(g);
  double err = 0.0, scale = 0.0;
  for (std::size_t k : band.interior_indices()) {
    if (!back.values[k]) return {false, "interior sample left unevaluated"};
    err = std::max(err, std::abs(*back.values[k] - re[k]));
    scale = std::max(scale, std::abs(re[k]));
  }
  const double rel = err / scale;
  return {rel < 0.02 && elapsed < 30.0, fmt("interior error %.3f%% of max |Re|, %.2f s", 100 * rel, elapsed)};
}

Outcome fig3_replication() {
  const FrequencyGrid g(13 * GHz, 20 * GHz, 8192);
  const ReconstructionReport r40 = reconstruct_phase(paper_config(40 * deg), g);
  const ReconstructionReport r50 = reconstruct_phase(paper_config(50 * deg), g);
  ReconstructionOptions fix;
  fix.correct = true;
  const ReconstructionReport r50c = reconstruct_phase(paper_config(50 * deg), g, fix);

  // Largest uncorrected residual within +-5% of w_m.
  double near = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (r50.residual.values[k] && std::abs(g[k] - omega_m) <= 0.05 * omega_m) {
      near = std::max(near, std::abs(*r50.residual.values[k]));
    }
  }
  const bool pass = r40.classification == PhaseClass::MinimumPhase && r40.max_interior_residual < 0.05 &&
                    near > pi / 2 && r50c.max_interior_residual < 0.05;
  return {pass, fmt("beta=40: %.4f rad; beta=50 uncorrected: %.3f rad near w_m; beta=50 corrected: %.4f rad",
                    r40.max_interior_residual, near, r50c.max_interior_residual)};
}

Outcome d0_fit() {
  const FrequencyGrid g(13 * GHz, 20 * GHz, 8192);
  const SystemConfig c = paper_config(40 * deg);
  const KkBand band(g);
  const D0Fit fit = fit_d0(magnitude_series(c, g), arg_h(c, g), band, omega_m, 0.05 * omega_m);
  const double ratio = fit.d0 / (c.d / speed_of_light);
  return {std::abs(ratio - 1.34) <= 0.05 * 1.34, fmt("d0 = %.4f d/c (target 1.34, %zu fit points)", ratio, fit.points_used)};
}

Outcome pulse_causality() {
  const SystemConfig c = paper_config(40 * deg);
  const FrequencyGrid band(13 * GHz, 20 * GHz, 8192);
  PulseSpec spec;
  spec.carrier = omega_m;
  spec.envelope_sigma = 5e-9;
  spec.window = 24 * spec.envelope_sigma;
  spec.samples = 1u << 20;
  spec.front_time = spec.center() - 6 * spec.envelope_sigma;

  const auto t0 = std::chrono::steady_clock::now();
  const PropagationResult r = propagate(synth_pulse(spec), c, band);
  const CausalityReport causal = front_causality_check(r);
  const double elapsed = seconds_since(t0);

  const double tm = mode_phase_derivative(c, Mode::TM, omega_m);
  const double advance = r.peak_shift() - tm;
  const double predicted = r.predicted_group_delay - tm;
  const double leading = epsilon_expansion(c, omega_m).group_delay - tm;
  const double rel = std::abs(advance - predicted) / std::abs(predicted);
  const bool pass = spec.carrier * spec.envelope_sigma >= 20 && advance < 0 && rel < 0.02 && causal.pass && elapsed < 5.0;
  return {pass, fmt("advance %.4g ps vs group delay %.4g ps (%.2f%%; leading-order form %.4g ps), "
                    "pre-front ratio %.2e, %.2f s",
                    advance * 1e12, predicted * 1e12, 100 * rel, leading * 1e12, causal.ratio, elapsed)};
}

Outcome energy_conservation() {
  std::mt19937_64 rng(20240517);
  std::uniform_real_distribution<double> angle(0.0, pi / 2), phase(0.0, 2 * pi);
  SystemConfig c = paper_config(0.0);
  const double slope = delta_phi_derivative(c, omega_m);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    c.theta = angle(rng);
    c.beta = angle(rng);
    const double w = (phase(rng) + 2 * pi * 10) / slope;  // delta_phi(w) = drawn phase + 20 pi
    const double total = std::norm(transfer_h(c, w)) + std::norm(transfer_h(c.with_beta(c.beta + pi / 2), w));
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return {worst <= 1e-12, fmt("max | |H_b|^2 + |H_b+90|^2 - 1 | = %.2e over 1000 triples", worst)};
}

} // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"magnitude/phase asymmetry", magnitude_phase_asymmetry},
      {"half-waveplate placement", half_waveplate_placement},
      {"epsilon expansion", epsilon_expansion_check},
      {"group-delay oracle", group_delay_oracle},
      {"zero classification", zero_classification},
      {"K-K Lorentzian round trip", lorentzian_round_trip},
      {"amplitude-to-phase replication", fig3_replication},
      {"d0 fit", d0_fit},
      {"pulse causality", pulse_causality},
      {"energy conservation", energy_conservation},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %2d %-32s %s  %s\n", index, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
  }
  std::printf("%d of %d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}
