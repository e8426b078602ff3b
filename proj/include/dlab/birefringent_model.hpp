#pragma once

#include "dlab/numerics.hpp"

#include <complex>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

namespace dlab {

inline constexpr double speed_of_light = 299'792'458.0;

enum class Mode { TE, TM };

struct ConstantIndex {
  double n0 = 1.0;
};

/// n(w) = n0 + slope * (w - omega_ref)
struct LinearIndex {
  double n0 = 1.0;
  double slope = 0.0;
  double omega_ref = 0.0;
};

/// n(w) = n_inf + A (W0^2 - w^2) / ((W0^2 - w^2)^2 + g^2 w^2)
struct LorentzIndex {
  double n_inf = 1.0;
  double strength = 0.0;
  double resonance = 1.0;
  double width = 1.0;
};

/// Refractive index of one polarization mode as an analytic function of
/// angular frequency. Evaluates for real or complex arguments.
class IndexModel {
public:
  using Variant = std::variant<ConstantIndex, LinearIndex, LorentzIndex>;

  IndexModel() = default;
  IndexModel(ConstantIndex m) : model_(m) { validate(); }
  IndexModel(LinearIndex m) : model_(m) { validate(); }
  IndexModel(LorentzIndex m) : model_(m) { validate(); }

  const Variant& variant() const noexcept { return model_; }

  template <class T>
  T operator()(T omega) const {
    return std::visit([&](const auto& m) { return eval(m, omega); }, model_);
  }

  /// dn/dw
  template <class T>
  T derivative(T omega) const {
    return std::visit([&](const auto& m) { return eval_derivative(m, omega); }, model_);
  }

  /// Index governing the arrival of a sharp front: the high-frequency limit
  /// for Lorentz models, the smallest value over (0, omega_max] otherwise.
  double front_index(double omega_max) const;

  /// Throws ConfigError if n <= 0 anywhere on the grid.
  void require_positive_on(const FrequencyGrid& grid) const;

  std::string describe() const;

private:
  void validate() const;

  template <class T>
  static T eval(const ConstantIndex& m, T) {
    return T(m.n0);
  }
  template <class T>
  static T eval(const LinearIndex& m, T w) {
    return T(m.n0) + T(m.slope) * (w - T(m.omega_ref));
  }
  template <class T>
  static T eval(const LorentzIndex& m, T w) {
    const T detune = T(m.resonance) * T(m.resonance) - w * w;
    return T(m.n_inf) + T(m.strength) * detune / (detune * detune + T(m.width) * T(m.width) * w * w);
  }

  template <class T>
  static T eval_derivative(const ConstantIndex&, T) {
    return T(0);
  }
  template <class T>
  static T eval_derivative(const LinearIndex& m, T) {
    return T(m.slope);
  }
  template <class T>
  static T eval_derivative(const LorentzIndex& m, T w) {
    const T g2 = T(m.width) * T(m.width);
    const T detune = T(m.resonance) * T(m.resonance) - w * w;
    const T denom = detune * detune + g2 * w * w;
    // d/dw of detune / denom, with d(detune)/dw = -2w.
    const T d_detune = T(-2) * w;
    const T d_denom = T(2) * detune * d_detune + T(2) * g2 * w;
    return T(m.strength) * (d_detune * denom - detune * d_denom) / (denom * denom);
  }

  Variant model_ = ConstantIndex{};
};

/// Slab between an input polarizer at theta and an analyzer at beta, both
/// measured from the crystal's fast (TM) axis. Lengths in metres, angles in
/// radians. The polarization unit vectors are (sin a, cos a) in (TE, TM).
struct SystemConfig {
  double d = 0.2;
  double air_path = 0.0;
  double theta = std::numbers::pi / 4.0;
  double beta = std::numbers::pi / 4.0;
  IndexModel index_te = ConstantIndex{1.0};
  IndexModel index_tm = ConstantIndex{1.0};

  /// Checks d > 0, air_path >= 0 and finite angles. The analyzer range
  /// 0 < beta < pi/2 is enforced by the operations that need cot(beta).
  void validate() const;

  /// Copy of this configuration with a different analyzer angle.
  SystemConfig with_beta(double new_beta) const;

  double amplitude_te() const;  ///< sin(beta) sin(theta)
  double amplitude_tm() const;  ///< cos(beta) cos(theta)
};

/// Half-waveplate frequency and slab thickness reproducing the measured
/// transmission dip near 16.75 GHz.
struct PaperCalibration {
  static constexpr double half_waveplate_hz = 16.75e9;
  static constexpr double thickness_m = 0.2;
  static constexpr double fast_index = 1.34;
};

/// n_TE - n_TM that puts the first half-waveplate frequency at f_m for a
/// slab of thickness d.
double calibrated_birefringence(double half_waveplate_hz, double d);

/// Constant-index slab calibrated to PaperCalibration, theta = 45 degrees.
SystemConfig paper_config(double beta);

double mode_phase(const SystemConfig& config, Mode mode, double omega);
double mode_phase_derivative(const SystemConfig& config, Mode mode, double omega);

/// phi_TE - phi_TM; the air path cancels.
double delta_phi(const SystemConfig& config, double omega);
double delta_phi_derivative(const SystemConfig& config, double omega);

std::complex<double> transfer_h(const SystemConfig& config, double omega);
/// Analytic continuation to complex frequency, in extended precision since
/// |exp(i phi)| grows exponentially off the real axis.
std::complex<long double> transfer_h(const SystemConfig& config, std::complex<long double> omega);

double magnitude_h(const SystemConfig& config, double omega);

/// Below this |H| the phase is treated as undefined.
inline constexpr double zero_transmission_threshold = 1e-13;

/// Unwrapped arg H over the grid, anchored so the first sample lies in
/// (-pi, pi]. Throws DomainError if |H| < zero_transmission_threshold anywhere.
RealSeries arg_h(const SystemConfig& config, const FrequencyGrid& grid);

RealSeries magnitude_series(const SystemConfig& config, const FrequencyGrid& grid);

struct GroupDelay {
  double seconds = 0.0;
  /// Set when |H| <= zero_transmission_threshold; seconds is then unreliable.
  bool near_singular = false;
};

/// Closed-form d(arg H)/d(omega).
GroupDelay group_delay(const SystemConfig& config, double omega);

struct HalfWaveplateFrequency {
  int m = 0;
  double omega = 0.0;
};

struct HalfWaveplateSearch {
  std::vector<HalfWaveplateFrequency> roots;
  /// Set when delta_phi is not monotone over the band; every crossing is
  /// still returned.
  bool multi_root_warning = false;
};

/// Solves delta_phi(omega) = (2m + 1) pi for m in [m_first, m_last] within
/// the grid's band by bracketing on the grid, bisection and a Newton polish.
HalfWaveplateSearch half_waveplate_frequencies(const SystemConfig& config, const FrequencyGrid& band,
                                               int m_first, int m_last);

struct EpsilonPrediction {
  double epsilon = 0.0;         ///< beta - pi/4 (signed)
  double magnitude = 0.0;       ///< |H(w_m)| ~ |epsilon|
  double group_delay = 0.0;     ///< phi'_TM + sign(epsilon) delta_phi' / (2 |epsilon|)
};

/// Leading-order behaviour at a half-waveplate frequency for beta = pi/4 +- eps.
/// Requires theta = pi/4 and 0 < |eps| < 0.1.
EpsilonPrediction epsilon_expansion(const SystemConfig& config, double omega_m);

enum class HalfPlane { Upper, Lower };

struct ComplexZero {
  int n = 0;
  std::complex<long double> omega;
  HalfPlane half_plane = HalfPlane::Lower;
  /// |H(omega)| at the polished root.
  double residual = 0.0;
};

struct RejectedZero {
  int n = 0;
  std::string reason;
};

struct ZeroSearch {
  std::vector<ComplexZero> zeros;
  std::vector<RejectedZero> rejected;
};

/// Roots of H in the complex frequency plane, one per branch n of
/// delta_phi(w) = -i ln|cot beta| + 2 pi (n + 1/2). The band seeds the
/// numerical search for Lorentz index models.
ZeroSearch transfer_zeros(const SystemConfig& config, const FrequencyGrid& band, int n_first, int n_last);

/// Zeros whose real parts lie inside [lo, hi].
ZeroSearch zeros_with_real_part_in(const SystemConfig& config, const FrequencyGrid& band, double lo,
                                   double hi);

/// Earliest time after which the slab output can be non-zero, measured from
/// the input front: (n_front d + air_path) / c with n_front the smaller of the
/// two modes' front indices.
double front_delay(const SystemConfig& config, double omega_max);

} // namespace dlab
