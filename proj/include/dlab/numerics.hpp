#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dlab {

/// Raised for physically or mathematically invalid requests (zero
/// transmission, evaluation outside a band, ...). The CLI maps it to exit 1.
class DomainError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed configuration or arguments. The CLI maps it to exit 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Uniform sampling of positive angular frequency, omega_min..omega_max
/// inclusive. Sample k sits at omega_min + k * spacing().
class FrequencyGrid {
public:
  static constexpr std::size_t min_count = 16;

  FrequencyGrid(double omega_min, double omega_max, std::size_t count);

  double omega_min() const noexcept { return omega_min_; }
  double omega_max() const noexcept { return omega_max_; }
  std::size_t size() const noexcept { return count_; }
  double spacing() const noexcept { return spacing_; }

  double operator[](std::size_t k) const noexcept {
    return omega_min_ + static_cast<double>(k) * spacing_;
  }

  std::vector<double> samples() const;

  /// Contiguous sub-grid over samples [first, last].
  FrequencyGrid slice(std::size_t first, std::size_t last) const;

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

private:
  double omega_min_;
  double omega_max_;
  std::size_t count_;
  double spacing_;
};

FrequencyGrid make_grid(double omega_min, double omega_max, std::size_t count);

/// One real sample per grid point. Construction rejects length mismatch and
/// non-finite values.
class RealSeries {
public:
  RealSeries(FrequencyGrid grid, std::vector<double> values);

  const FrequencyGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t k) const noexcept { return values_[k]; }

private:
  FrequencyGrid grid_;
  std::vector<double> values_;
};

/// Output of a band-truncated transform: samples too close to the band edges
/// are not evaluated and stay empty rather than being zero-filled.
struct MaskedSeries {
  FrequencyGrid grid;
  std::vector<std::optional<double>> values;

  std::size_t evaluated_count() const;
  /// The longest run of evaluated samples as a plain series on its sub-grid.
  RealSeries evaluated_run() const;
};

/// Principal value of the integral of f(W) / (W^2 - omega^2) over the grid's
/// band, by singularity subtraction plus trapezoidal quadrature. omega must
/// sit at least one grid spacing inside the band.
double pv_kernel_integral(const RealSeries& f, double omega);

/// Same as pv_kernel_integral evaluated at grid node k (1 <= k <= N-2).
double pv_kernel_integral_at(const RealSeries& f, std::size_t k);

/// Whether pv_kernel_integral accepts omega on this grid.
bool pv_evaluable(const FrequencyGrid& grid, double omega) noexcept;

/// Removes 2*pi jumps so that adjacent samples differ by less than pi.
std::vector<double> unwrap_phase(std::span<const double> raw);
RealSeries unwrap_phase(const RealSeries& raw);

/// Least-squares line y = slope * x + intercept.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

} // namespace dlab
