#include "dlab/birefringent_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dlab {

namespace {

constexpr double pi = std::numbers::pi;
using cld = std::complex<long double>;

bool all_finite(std::initializer_list<double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

const IndexModel& index_of(const SystemConfig& config, Mode mode) {
  return mode == Mode::TE ? config.index_te : config.index_tm;
}

template <class T>
T phase_of(const SystemConfig& config, Mode mode, T omega) {
  const T n = index_of(config, mode)(omega);
  return n * omega * T(config.d / speed_of_light) + omega * T(config.air_path / speed_of_light);
}

template <class T>
T delta_phi_of(const SystemConfig& config, T omega) {
  const T dn = config.index_te(omega) - config.index_tm(omega);
  return dn * omega * T(config.d / speed_of_light);
}

template <class T>
T delta_phi_derivative_of(const SystemConfig& config, T omega) {
  const T dn = config.index_te(omega) - config.index_tm(omega);
  const T ddn = config.index_te.derivative(omega) - config.index_tm.derivative(omega);
  return (dn + omega * ddn) * T(config.d / speed_of_light);
}

// cos(beta) cos(theta) + sin(beta) sin(theta) exp(i delta_phi): H with the
// TM propagation factor removed.
std::complex<double> interference_factor(const SystemConfig& config, double omega) {
  return config.amplitude_tm() + config.amplitude_te() * std::polar(1.0, delta_phi(config, omega));
}

void require_open_analyzer_range(const SystemConfig& config, const char* what) {
  if (!(config.beta > 0.0 && config.beta < pi / 2.0)) {
    std::ostringstream os;
    os << what << " requires 0 < beta < pi/2, got beta = " << config.beta;
    throw DomainError(os.str());
  }
}

// Newton iteration on a complex function in extended precision.
template <class F, class DF>
bool newton_polish(cld& z, F f, DF df, int max_iterations) {
  const long double tol = 8.0L * std::numeric_limits<long double>::epsilon();
  for (int it = 0; it < max_iterations; ++it) {
    const cld slope = df(z);
    if (slope == cld(0.0L)) return false;
    const cld step = f(z) / slope;
    z -= step;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    if (std::abs(step) <= tol * std::abs(z)) return true;
  }
  return false;
}

// Seeds for delta_phi(w) = target. Constant and Linear index models make
// delta_phi a polynomial of degree <= 2 in w, which is inverted exactly.
std::optional<cld> analytic_seed(const SystemConfig& config, cld target, std::string& why) {
  const long double k = config.d / speed_of_light;
  auto linear_part = [](const IndexModel& m, long double& n0, long double& s) {
    if (const auto* c = std::get_if<ConstantIndex>(&m.variant())) {
      n0 = c->n0;
      s = 0.0L;
      return true;
    }
    if (const auto* l = std::get_if<LinearIndex>(&m.variant())) {
      n0 = static_cast<long double>(l->n0) - static_cast<long double>(l->slope) * l->omega_ref;
      s = l->slope;
      return true;
    }
    return false;
  };
  long double a_te = 0, s_te = 0, a_tm = 0, s_tm = 0;
  if (!linear_part(config.index_te, a_te, s_te) || !linear_part(config.index_tm, a_tm, s_tm)) {
    return std::nullopt;
  }
  // delta_phi = k (ds w^2 + da w)
  const long double ds = s_te - s_tm;
  const long double da = a_te - a_tm;
  if (ds == 0.0L) {
    if (da == 0.0L) {
      why = "identical TE and TM indices: delta_phi vanishes identically";
      return std::nullopt;
    }
    return target / (k * da);
  }
  const cld disc = std::sqrt(cld(da * da) + 4.0L * ds * target / k);
  const cld r1 = (-da + disc) / (2.0L * ds);
  const cld r2 = (-da - disc) / (2.0L * ds);
  // The physically relevant branch is the one continuing the positive real axis.
  return r1.real() >= r2.real() ? r1 : r2;
}

} // namespace

double IndexModel::front_index(double omega_max) const {
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ConstantIndex>) {
          return m.n0;
        } else if constexpr (std::is_same_v<M, LinearIndex>) {
          return std::min(eval(m, 0.0), eval(m, omega_max));
        } else {
          return m.n_inf;
        }
      },
      model_);
}

void IndexModel::require_positive_on(const FrequencyGrid& grid) const {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double n = (*this)(grid[k]);
    if (!(n > 0.0)) {
      std::ostringstream os;
      os << "index model " << describe() << " is not positive at omega = " << grid[k];
      throw ConfigError(os.str());
    }
  }
}

std::string IndexModel::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ConstantIndex>) {
          os << "constant:" << m.n0;
        } else if constexpr (std::is_same_v<M, LinearIndex>) {
          os << "linear:" << m.n0 << ',' << m.slope << ',' << m.omega_ref;
        } else {
          os << "lorentz:" << m.n_inf << ',' << m.strength << ',' << m.resonance << ',' << m.width;
        }
      },
      model_);
  return os.str();
}

void IndexModel::validate() const {
  std::visit(
      [](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ConstantIndex>) {
          if (!std::isfinite(m.n0) || m.n0 <= 0.0) throw ConfigError("constant index must be positive");
        } else if constexpr (std::is_same_v<M, LinearIndex>) {
          if (!all_finite({m.n0, m.slope, m.omega_ref})) throw ConfigError("linear index parameters must be finite");
          if (m.n0 <= 0.0) throw ConfigError("linear index must be positive at its reference frequency");
        } else {
          if (!all_finite({m.n_inf, m.strength, m.resonance, m.width})) {
            throw ConfigError("Lorentz index parameters must be finite");
          }
          if (m.resonance <= 0.0) throw ConfigError("Lorentz resonance must be positive");
          if (m.width <= 0.0) throw ConfigError("Lorentz width must be positive");
        }
      },
      model_);
}

void SystemConfig::validate() const {
  if (!std::isfinite(d) || d <= 0.0) throw ConfigError("slab thickness d must be positive");
  if (!std::isfinite(air_path) || air_path < 0.0) throw ConfigError("air path must be non-negative");
  if (!std::isfinite(theta) || !std::isfinite(beta)) throw ConfigError("polarizer angles must be finite");
}

SystemConfig SystemConfig::with_beta(double new_beta) const {
  SystemConfig out = *this;
  out.beta = new_beta;
  return out;
}

double SystemConfig::amplitude_te() const { return std::sin(beta) * std::sin(theta); }
double SystemConfig::amplitude_tm() const { return std::cos(beta) * std::cos(theta); }

double calibrated_birefringence(double half_waveplate_hz, double d) {
  if (!(half_waveplate_hz > 0.0) || !(d > 0.0)) {
    throw ConfigError("calibration needs a positive half-waveplate frequency and thickness");
  }
  // delta_phi(2 pi f) = dn 2 pi f d / c = pi
  return speed_of_light / (2.0 * half_waveplate_hz * d);
}

SystemConfig paper_config(double beta) {
  SystemConfig config;
  config.d = PaperCalibration::thickness_m;
  config.air_path = 0.0;
  config.theta = pi / 4.0;
  config.beta = beta;
  const double n_fast = PaperCalibration::fast_index;
  config.index_tm = ConstantIndex{n_fast};
  config.index_te =
      ConstantIndex{n_fast + calibrated_birefringence(PaperCalibration::half_waveplate_hz, config.d)};
  return config;
}

double mode_phase(const SystemConfig& config, Mode mode, double omega) {
  return phase_of(config, mode, omega);
}

double mode_phase_derivative(const SystemConfig& config, Mode mode, double omega) {
  const IndexModel& model = index_of(config, mode);
  return (model(omega) + omega * model.derivative(omega)) * config.d / speed_of_light +
         config.air_path / speed_of_light;
}

double delta_phi(const SystemConfig& config, double omega) { return delta_phi_of(config, omega); }

double delta_phi_derivative(const SystemConfig& config, double omega) {
  return delta_phi_derivative_of(config, omega);
}

std::complex<double> transfer_h(const SystemConfig& config, double omega) {
  return std::polar(1.0, mode_phase(config, Mode::TM, omega)) * interference_factor(config, omega);
}

std::complex<long double> transfer_h(const SystemConfig& config, std::complex<long double> omega) {
  const cld i(0.0L, 1.0L);
  const long double a_te = std::sin(static_cast<long double>(config.beta)) *
                           std::sin(static_cast<long double>(config.theta));
  const long double a_tm = std::cos(static_cast<long double>(config.beta)) *
                           std::cos(static_cast<long double>(config.theta));
  const cld phi_tm = phase_of(config, Mode::TM, omega);
  const cld dphi = delta_phi_of(config, omega);
  return std::exp(i * phi_tm) * (a_tm + a_te * std::exp(i * dphi));
}

double magnitude_h(const SystemConfig& config, double omega) { return std::abs(interference_factor(config, omega)); }

RealSeries magnitude_series(const SystemConfig& config, const FrequencyGrid& grid) {
  std::vector<double> v(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) v[k] = magnitude_h(config, grid[k]);
  return RealSeries(grid, std::move(v));
}

RealSeries arg_h(const SystemConfig& config, const FrequencyGrid& grid) {
  std::vector<double> raw(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const std::complex<double> h = transfer_h(config, grid[k]);
    if (std::abs(h) < zero_transmission_threshold) {
      std::ostringstream os;
      os.precision(17);
      os << "phase undefined: |H| = " << std::abs(h) << " at omega = " << grid[k];
      throw DomainError(os.str());
    }
    raw[k] = std::arg(h);
  }
  return RealSeries(grid, unwrap_phase(raw));
}

GroupDelay group_delay(const SystemConfig& config, double omega) {
  const double a = config.amplitude_te();
  const double b = config.amplitude_tm();
  const double dphi = delta_phi(config, omega);
  const std::complex<double> factor = b + a * std::polar(1.0, dphi);
  const double weight_num = a * a + a * b * std::cos(dphi);
  const double weight_den = std::norm(factor);
  GroupDelay out;
  out.near_singular = std::sqrt(weight_den) <= zero_transmission_threshold;
  out.seconds = mode_phase_derivative(config, Mode::TM, omega) +
                delta_phi_derivative(config, omega) * weight_num / weight_den;
  return out;
}

HalfWaveplateSearch half_waveplate_frequencies(const SystemConfig& config, const FrequencyGrid& band,
                                               int m_first, int m_last) {
  HalfWaveplateSearch out;
  const std::size_t n = band.size();
  std::vector<double> dphi(n);
  for (std::size_t k = 0; k < n; ++k) dphi[k] = delta_phi(config, band[k]);

  bool rising = false, falling = false;
  for (std::size_t k = 1; k < n; ++k) {
    rising |= dphi[k] > dphi[k - 1];
    falling |= dphi[k] < dphi[k - 1];
  }
  out.multi_root_warning = rising && falling;

  for (int m = m_first; m <= m_last; ++m) {
    const double target = (2.0 * m + 1.0) * pi;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double f0 = dphi[k] - target;
      const double f1 = dphi[k + 1] - target;
      // Half-open brackets avoid reporting a root sitting exactly on a node twice.
      const bool crosses = (f0 == 0.0) || (f0 < 0.0 && f1 > 0.0) || (f0 > 0.0 && f1 < 0.0);
      if (!crosses) continue;
      double lo = band[k], hi = band[k + 1];
      double flo = f0;
      double root = lo;
      if (f0 != 0.0) {
        for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double fm = delta_phi(config, mid) - target;
          if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        root = 0.5 * (lo + hi);
        for (int it = 0; it < 3; ++it) {
          const double slope = delta_phi_derivative(config, root);
          if (slope == 0.0) break;
          const double next = root - (delta_phi(config, root) - target) / slope;
          if (next < band[k] || next > band[k + 1]) break;
          root = next;
        }
      }
      if (std::abs(delta_phi(config, root) - target) < 1e-10) out.roots.push_back({m, root});
    }
  }
  std::sort(out.roots.begin(), out.roots.end(),
            [](const auto& x, const auto& y) { return x.omega < y.omega; });
  return out;
}

EpsilonPrediction epsilon_expansion(const SystemConfig& config, double omega_m) {
  if (std::abs(config.theta - pi / 4.0) > 1e-12) {
    throw DomainError("epsilon expansion assumes theta = pi/4");
  }
  EpsilonPrediction out;
  out.epsilon = config.beta - pi / 4.0;
  const double eps = std::abs(out.epsilon);
  if (!(eps > 0.0 && eps < 0.1)) {
    throw DomainError("epsilon expansion requires 0 < |beta - pi/4| < 0.1");
  }
  const double sign = out.epsilon > 0.0 ? 1.0 : -1.0;
  out.magnitude = eps;
  out.group_delay = mode_phase_derivative(config, Mode::TM, omega_m) +
                    sign * delta_phi_derivative(config, omega_m) / (2.0 * eps);
  return out;
}

ZeroSearch transfer_zeros(const SystemConfig& config, const FrequencyGrid& band, int n_first, int n_last) {
  require_open_analyzer_range(config, "zero search");
  ZeroSearch out;
  const long double log_cot = std::log(std::abs(1.0L / std::tan(static_cast<long double>(config.beta))));
  const double scale = std::abs(config.amplitude_te()) + std::abs(config.amplitude_tm());
  constexpr int max_iterations = 50;

  for (int n = n_first; n <= n_last; ++n) {
    const long double real_target = 2.0L * std::numbers::pi_v<long double> * (n + 0.5L);
    const cld target(real_target, -log_cot);
    auto g = [&](cld w) { return delta_phi_of<cld>(config, w) - target; };
    auto dg = [&](cld w) { return delta_phi_derivative_of<cld>(config, w); };

    std::string why;
    std::optional<cld> seed = analytic_seed(config, target, why);
    if (!seed && why.empty()) {
      // Numerical seed: real crossing of delta_phi = 2 pi (n + 1/2) in the band,
      // displaced off-axis by the first-order imaginary shift.
      // (2m + 1) pi == 2 pi (n + 1/2) for m = n.
      const auto crossings = half_waveplate_frequencies(config, band, n, n);
      if (crossings.roots.empty()) {
        out.rejected.push_back({n, "no real half-waveplate crossing in the band to seed the search"});
        continue;
      }
      const double wr = crossings.roots.front().omega;
      const double slope = delta_phi_derivative(config, wr);
      cld z(wr, -log_cot / slope);
      if (!newton_polish(z, g, dg, max_iterations)) {
        out.rejected.push_back({n, "Newton iteration on delta_phi did not converge"});
        continue;
      }
      seed = z;
    }
    if (!seed) {
      out.rejected.push_back({n, why});
      continue;
    }

    cld z = *seed;
    auto h = [&](cld w) { return transfer_h(config, w); };
    auto dh = [&](cld w) {
      const cld i(0.0L, 1.0L);
      const long double a_te = std::sin(static_cast<long double>(config.beta)) *
                               std::sin(static_cast<long double>(config.theta));
      const long double a_tm = std::cos(static_cast<long double>(config.beta)) *
                               std::cos(static_cast<long double>(config.theta));
      const cld phi_te = phase_of(config, Mode::TE, w);
      const cld phi_tm = phase_of(config, Mode::TM, w);
      const long double k = config.d / speed_of_light;
      const long double air = config.air_path / speed_of_light;
      const cld dphi_te = (config.index_te(w) + w * config.index_te.derivative(w)) * k + air;
      const cld dphi_tm = (config.index_tm(w) + w * config.index_tm.derivative(w)) * k + air;
      return i * (a_te * dphi_te * std::exp(i * phi_te) + a_tm * dphi_tm * std::exp(i * phi_tm));
    };
    if (!newton_polish(z, h, dh, max_iterations)) {
      // A seed that is already exact stalls on rounding noise; accept it if
      // the residual says so.
      if (!(std::abs(h(z)) <= 1e-9L * scale)) {
        out.rejected.push_back({n, "Newton iteration on H did not converge within 50 steps"});
        continue;
      }
    }
    const double residual = static_cast<double>(std::abs(h(z)));
    if (!(residual <= 1e-9 * scale)) {
      std::ostringstream os;
      os << "residual |H| = " << residual << " exceeds tolerance after polish";
      out.rejected.push_back({n, os.str()});
      continue;
    }
    ComplexZero zero;
    zero.n = n;
    zero.omega = z;
    zero.half_plane = z.imag() > 0.0L ? HalfPlane::Upper : HalfPlane::Lower;
    zero.residual = residual;
    out.zeros.push_back(zero);
  }
  return out;
}

ZeroSearch zeros_with_real_part_in(const SystemConfig& config, const FrequencyGrid& band, double lo, double hi) {
  if (!(hi > lo) || !(hi > 0.0)) throw DomainError("invalid real-part window for zero search");
  const double search_lo = std::max(lo, 1e-6 * hi);
  const FrequencyGrid window(search_lo, hi, std::max<std::size_t>(band.size(), 64));
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = -dmin;
  for (std::size_t k = 0; k < window.size(); ++k) {
    const double v = delta_phi(config, window[k]);
    dmin = std::min(dmin, v);
    dmax = std::max(dmax, v);
  }
  const int n_first = static_cast<int>(std::floor(dmin / (2.0 * pi) - 0.5)) - 1;
  const int n_last = static_cast<int>(std::ceil(dmax / (2.0 * pi) - 0.5)) + 1;
  ZeroSearch all = transfer_zeros(config, window, n_first, n_last);
  ZeroSearch out;
  for (const auto& z : all.zeros) {
    const double re = static_cast<double>(z.omega.real());
    if (re >= lo && re <= hi) out.zeros.push_back(z);
  }
  for (const auto& r : all.rejected) {
    if (r.reason.rfind("no real half-waveplate crossing", 0) != 0) out.rejected.push_back(r);
  }
  return out;
}

double front_delay(const SystemConfig& config, double omega_max) {
  const double n_front =
      std::max(0.0, std::min(config.index_te.front_index(omega_max), config.index_tm.front_index(omega_max)));
  return (n_front * config.d + config.air_path) / speed_of_light;
}

} // namespace dlab
