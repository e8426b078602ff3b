#include "dlab/pulse_sim.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

namespace dlab {

namespace {

constexpr double pi = std::numbers::pi;

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
struct PlanDestroy {
  void operator()(fftw_plan p) const { fftw_destroy_plan(p); }
};
using PlanPtr = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDestroy>;

template <class T>
std::unique_ptr<T[], FftwFree> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw std::bad_alloc();
  return std::unique_ptr<T[], FftwFree>(p);
}

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

// Unnormalised forward r2c transform: N/2 + 1 bins.
std::vector<std::complex<double>> forward(std::span<const double> x) {
  const std::size_t n = x.size();
  auto in = fftw_buffer<double>(n);
  auto out = fftw_buffer<fftw_complex>(n / 2 + 1);
  // FFTW planning is not thread-safe; ESTIMATE keeps it cheap and leaves the
  // input untouched.
  PlanPtr plan(fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
  std::copy(x.begin(), x.end(), in.get());
  fftw_execute(plan.get());
  std::vector<std::complex<double>> spec(n / 2 + 1);
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] = {out[k][0], out[k][1]};
  return spec;
}

// Normalised inverse c2r transform back to n real samples.
std::vector<double> inverse_real(std::span<const std::complex<double>> spec, std::size_t n) {
  auto in = fftw_buffer<fftw_complex>(n / 2 + 1);
  auto out = fftw_buffer<double>(n);
  PlanPtr plan(fftw_plan_dft_c2r_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
  for (std::size_t k = 0; k < spec.size(); ++k) {
    in[k][0] = spec[k].real();
    in[k][1] = spec[k].imag();
  }
  fftw_execute(plan.get());
  std::vector<double> x(out.get(), out.get() + n);
  for (double& v : x) v /= static_cast<double>(n);
  return x;
}

// |analytic signal| from the half spectrum of a real series of length n.
std::vector<double> envelope_from_half_spectrum(std::span<const std::complex<double>> half, std::size_t n) {
  auto in = fftw_buffer<fftw_complex>(n);
  auto out = fftw_buffer<fftw_complex>(n);
  PlanPtr plan(fftw_plan_dft_1d(static_cast<int>(n), in.get(), out.get(), FFTW_BACKWARD, FFTW_ESTIMATE));
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> v{};
    if (k == 0 || k == n / 2) {
      v = half[k];
    } else if (k < n / 2) {
      v = 2.0 * half[k];
    }
    in[k][0] = v.real();
    in[k][1] = v.imag();
  }
  fftw_execute(plan.get());
  std::vector<double> env(n);
  for (std::size_t k = 0; k < n; ++k) env[k] = std::hypot(out[k][0], out[k][1]) / static_cast<double>(n);
  return env;
}

double bin_omega(std::size_t k, std::size_t n, double dt) {
  return 2.0 * pi * static_cast<double>(k) / (static_cast<double>(n) * dt);
}

double in_band_fraction(std::span<const std::complex<double>> half, std::size_t n, double dt,
                        const FrequencyGrid& band) {
  double inside = 0.0, total = 0.0;
  for (std::size_t k = 0; k < half.size(); ++k) {
    const double e = std::norm(half[k]);
    total += e;
    const double w = bin_omega(k, n, dt);
    if (w >= band.omega_min() && w <= band.omega_max()) inside += e;
  }
  return total > 0.0 ? inside / total : 1.0;
}

} // namespace

void PulseSpec::validate() const {
  if (!(carrier > 0.0) || !std::isfinite(carrier)) throw ConfigError("pulse carrier must be positive");
  if (!(envelope_sigma > 0.0) || !std::isfinite(envelope_sigma)) {
    throw ConfigError("pulse envelope sigma must be positive");
  }
  if (carrier * envelope_sigma < 20.0) {
    std::ostringstream os;
    os << "pulse is not narrowband: carrier * sigma = " << carrier * envelope_sigma << " < 20";
    throw ConfigError(os.str());
  }
  if (!(window >= 12.0 * envelope_sigma)) throw ConfigError("pulse window must span at least 12 sigma");
  if (!is_power_of_two(samples)) throw ConfigError("pulse sample count must be a power of two");
  if (carrier >= pi / dt()) throw ConfigError("pulse carrier exceeds the Nyquist frequency of the sampling");
  if (front_time && (!std::isfinite(*front_time) || *front_time < 0.0 || *front_time >= window)) {
    throw ConfigError("pulse front time must lie inside the window");
  }
}

Pulse synth_pulse(const PulseSpec& spec) {
  spec.validate();
  Pulse pulse{spec, std::vector<double>(spec.samples)};
  const double dt = spec.dt();
  const double t0 = spec.center();
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const double t = static_cast<double>(i) * dt;
    if (spec.front_time && t < *spec.front_time) continue;
    const double u = (t - t0) / spec.envelope_sigma;
    pulse.samples[i] = std::exp(-0.5 * u * u) * std::cos(spec.carrier * (t - t0));
  }
  return pulse;
}

std::vector<double> analytic_envelope(std::span<const double> x) {
  return envelope_from_half_spectrum(forward(x), x.size());
}

double locate_peak(std::span<const double> envelope, double dt) {
  constexpr std::ptrdiff_t half = 5;
  const auto n = static_cast<std::ptrdiff_t>(envelope.size());
  if (n < 2 * half + 1) throw DomainError("envelope too short to locate a peak");
  std::ptrdiff_t k = std::max_element(envelope.begin(), envelope.end()) - envelope.begin();
  k = std::clamp(k, half, n - 1 - half);
  // Parabola y = a x^2 + b x + c through ln(envelope) at x = -5..5.
  double sy = 0.0, sxy = 0.0, sx2y = 0.0;
  constexpr double s2 = 110.0, s4 = 1958.0, count = 11.0;
  for (std::ptrdiff_t x = -half; x <= half; ++x) {
    const double y = std::log(std::max(envelope[static_cast<std::size_t>(k + x)], 1e-300));
    const auto xd = static_cast<double>(x);
    sy += y;
    sxy += xd * y;
    sx2y += xd * xd * y;
  }
  const double a = (count * sx2y - s2 * sy) / (count * s4 - s2 * s2);
  const double b = sxy / s2;
  const double vertex = a < 0.0 ? std::clamp(-b / (2.0 * a), -static_cast<double>(half), static_cast<double>(half)) : 0.0;
  return (static_cast<double>(k) + vertex) * dt;
}

std::vector<std::complex<double>> real_spectrum(std::span<const double> x, double dt) {
  auto spec = forward(x);
  for (auto& v : spec) v *= dt;
  return spec;
}

double energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

PropagationResult propagate_through(const Pulse& input, const TransferFunction& transfer, double predicted_group_delay,
                                    double front_offset, const std::optional<FrequencyGrid>& valid_band) {
  input.spec.validate();
  const std::size_t n = input.samples.size();
  const double dt = input.spec.dt();

  PropagationResult result;
  result.dt = dt;
  result.predicted_group_delay = predicted_group_delay;
  result.front_offset = front_offset;

  std::vector<std::complex<double>> spec = forward(input.samples);
  if (valid_band) {
    result.in_band_energy_fraction = in_band_fraction(spec, n, dt, *valid_band);
    if (result.in_band_energy_fraction < min_in_band_energy) {
      std::ostringstream os;
      os << "band violation: only " << 100.0 * result.in_band_energy_fraction
         << "% of the input spectral energy lies inside the model band";
      if (!input.spec.front_time) throw DomainError(os.str());
      result.warnings.push_back(os.str() + " (fronted pulse: the transfer function is extended analytically)");
    }
  }

  result.input_envelope = envelope_from_half_spectrum(spec, n);
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= std::conj(transfer(bin_omega(k, n, dt)));
  result.output = inverse_real(spec, n);
  result.output_envelope = envelope_from_half_spectrum(spec, n);

  result.input_peak_time = locate_peak(result.input_envelope, dt);
  result.peak_time = locate_peak(result.output_envelope, dt);

  if (input.spec.front_time) {
    const double cutoff = *input.spec.front_time + front_offset;
    double before = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = result.output[i] * result.output[i];
      total += e;
      if (static_cast<double>(i) * dt < cutoff) before += e;
    }
    result.pre_front_energy_ratio = total > 0.0 ? std::clamp(before / total, 0.0, 1.0) : 0.0;
  }
  return result;
}

PropagationResult propagate(const Pulse& input, const SystemConfig& config, const FrequencyGrid& valid_band) {
  config.validate();
  const double nyquist = pi / input.spec.dt();
  auto transfer = [&config](double omega) {
    return omega == 0.0 ? std::complex<double>(config.amplitude_te() + config.amplitude_tm(), 0.0)
                        : transfer_h(config, omega);
  };
  return propagate_through(input, transfer, group_delay(config, input.spec.carrier).seconds,
                           front_delay(config, nyquist), valid_band);
}

CausalityReport front_causality_check(const PropagationResult& result, double threshold) {
  if (!result.pre_front_energy_ratio) {
    throw DomainError("front causality check needs a pulse with a hard front (front_time unset)");
  }
  const double ratio = *result.pre_front_energy_ratio;
  return {ratio < threshold, ratio, threshold};
}

} // namespace dlab
