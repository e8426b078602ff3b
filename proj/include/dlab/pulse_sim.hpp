#pragma once

#include "dlab/birefringent_model.hpp"
#include "dlab/numerics.hpp"

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dlab {

/// Gaussian-enveloped carrier sampled on [0, window). The envelope peaks at
/// window / 2; with front_time set, every sample before it is exactly zero.
struct PulseSpec {
  double carrier = 0.0;          ///< rad/s
  double envelope_sigma = 0.0;   ///< s
  std::optional<double> front_time;
  double window = 0.0;           ///< s
  std::size_t samples = 0;       ///< power of two

  void validate() const;
  double dt() const { return window / static_cast<double>(samples); }
  double center() const { return 0.5 * window; }
};

struct Pulse {
  PulseSpec spec;
  std::vector<double> samples;
};

Pulse synth_pulse(const PulseSpec& spec);

/// |analytic signal| of a real series, via a one-sided spectrum.
std::vector<double> analytic_envelope(std::span<const double> x);

/// Peak time of an envelope from a least-squares parabola through the
/// log-envelope over +-5 samples around the maximum.
double locate_peak(std::span<const double> envelope, double dt);

/// Discrete spectrum of a real series: bin k holds frequency 2 pi k / (N dt)
/// for k = 0..N/2, scaled by dt to approximate the continuous transform.
std::vector<std::complex<double>> real_spectrum(std::span<const double> x, double dt);

using TransferFunction = std::function<std::complex<double>(double omega)>;

struct PropagationResult {
  std::vector<double> output;
  std::vector<double> input_envelope;
  std::vector<double> output_envelope;
  double dt = 0.0;
  double input_peak_time = 0.0;
  double peak_time = 0.0;
  double predicted_group_delay = 0.0;
  /// Delay between the input front and the earliest admissible output.
  double front_offset = 0.0;
  /// Output energy before front_time + front_offset over total output energy;
  /// empty for frontless pulses.
  std::optional<double> pre_front_energy_ratio;
  double in_band_energy_fraction = 1.0;
  std::vector<std::string> warnings;

  double peak_shift() const { return peak_time - input_peak_time; }
};

/// Minimum share of input spectral energy that must fall inside the model's
/// calibrated band.
inline constexpr double min_in_band_energy = 0.999;

/// Spectral multiplication by the slab transfer function. Spectra use the
/// engineering FFT sign (exp(-i w t) forward), so H enters conjugated to
/// keep exp(+i phi) a delay. Out-of-band input energy above 0.1% is an error
/// for frontless pulses and a warning for fronted ones.
PropagationResult propagate(const Pulse& input, const SystemConfig& config, const FrequencyGrid& valid_band);

/// Same machinery for an arbitrary transfer function.
PropagationResult propagate_through(const Pulse& input, const TransferFunction& transfer, double predicted_group_delay,
                                    double front_offset, const std::optional<FrequencyGrid>& valid_band);

struct CausalityReport {
  bool pass = false;
  double ratio = 0.0;
  double threshold = 0.0;
};

/// Passes iff the pre-front energy ratio is strictly below threshold. Throws
/// DomainError for results of frontless pulses.
CausalityReport front_causality_check(const PropagationResult& result, double threshold = 1e-10);

double energy(std::span<const double> x);

} // namespace dlab
