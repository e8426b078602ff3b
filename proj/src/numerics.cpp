#include "dlab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dlab {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Nodes closer than this (in grid spacings) are treated as coincident.
constexpr double snap_fraction = 1e-6;

std::string describe(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// (1/2w) ln|((w2 - w)(w1 + w)) / ((w2 + w)(w1 - w))|, the principal value of
// the kernel alone over [w1, w2].
double kernel_log_term(double w1, double w2, double w) {
  return std::log(std::abs(((w2 - w) * (w1 + w)) / ((w2 + w) * (w1 - w)))) / (2.0 * w);
}

double node_derivative(std::span<const double> f, std::size_t k, double h) {
  const std::size_t n = f.size();
  if (k >= 2 && k + 2 < n) {
    return (-f[k + 2] + 8.0 * f[k + 1] - 8.0 * f[k - 1] + f[k - 2]) / (12.0 * h);
  }
  if (k + 2 < n) {
    return (-3.0 * f[k] + 4.0 * f[k + 1] - f[k + 2]) / (2.0 * h);
  }
  return (3.0 * f[k] - 4.0 * f[k - 1] + f[k - 2]) / (2.0 * h);
}

void check_pv_domain(const FrequencyGrid& grid, double omega) {
  const double w1 = grid.omega_min();
  const double w2 = grid.omega_max();
  if (!(omega > w1 && omega < w2)) {
    throw DomainError("principal-value evaluation point " + describe(omega) +
                      " lies outside the open band (" + describe(w1) + ", " + describe(w2) + ")");
  }
  if (!pv_evaluable(grid, omega)) {
    throw DomainError("principal-value evaluation point " + describe(omega) +
                      " lies within one grid spacing of a band edge");
  }
}

} // namespace

FrequencyGrid::FrequencyGrid(double omega_min, double omega_max, std::size_t count)
    : omega_min_(omega_min), omega_max_(omega_max), count_(count), spacing_(0.0) {
  if (!std::isfinite(omega_min) || !std::isfinite(omega_max)) {
    throw ConfigError("frequency grid bounds must be finite");
  }
  if (omega_min <= 0.0) {
    throw ConfigError("frequency grid requires omega_min > 0, got " + describe(omega_min));
  }
  if (omega_max <= omega_min) {
    throw ConfigError("frequency grid requires omega_max > omega_min, got [" + describe(omega_min) +
                      ", " + describe(omega_max) + "]");
  }
  if (count < min_count) {
    throw ConfigError("frequency grid requires at least " + std::to_string(min_count) +
                      " samples, got " + std::to_string(count));
  }
  spacing_ = (omega_max - omega_min) / static_cast<double>(count - 1);
}

std::vector<double> FrequencyGrid::samples() const {
  std::vector<double> out(count_);
  for (std::size_t k = 0; k < count_; ++k) out[k] = (*this)[k];
  return out;
}

FrequencyGrid FrequencyGrid::slice(std::size_t first, std::size_t last) const {
  if (first >= last || last >= count_) {
    throw DomainError("invalid grid slice [" + std::to_string(first) + ", " + std::to_string(last) + "]");
  }
  return FrequencyGrid((*this)[first], (*this)[last], last - first + 1);
}

FrequencyGrid make_grid(double omega_min, double omega_max, std::size_t count) {
  return FrequencyGrid(omega_min, omega_max, count);
}

RealSeries::RealSeries(FrequencyGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw DomainError("series length " + std::to_string(values_.size()) +
                      " does not match grid size " + std::to_string(grid_.size()));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw DomainError("non-finite series value at index " + std::to_string(k));
    }
  }
}

std::size_t MaskedSeries::evaluated_count() const {
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [](const auto& v) { return v.has_value(); }));
}

RealSeries MaskedSeries::evaluated_run() const {
  std::size_t best_first = 0, best_len = 0;
  for (std::size_t k = 0; k < values.size();) {
    if (!values[k]) {
      ++k;
      continue;
    }
    std::size_t j = k;
    while (j < values.size() && values[j]) ++j;
    if (j - k > best_len) {
      best_first = k;
      best_len = j - k;
    }
    k = j;
  }
  if (best_len < FrequencyGrid::min_count) {
    throw DomainError("too few evaluated samples (" + std::to_string(best_len) + ") to form a series");
  }
  std::vector<double> v(best_len);
  for (std::size_t k = 0; k < best_len; ++k) v[k] = *values[best_first + k];
  return RealSeries(grid.slice(best_first, best_first + best_len - 1), std::move(v));
}

bool pv_evaluable(const FrequencyGrid& grid, double omega) noexcept {
  const double h = grid.spacing();
  const double slack = 1e-9 * h;
  return omega - grid.omega_min() >= h - slack && grid.omega_max() - omega >= h - slack;
}

double pv_kernel_integral_at(const RealSeries& f, std::size_t k) {
  const FrequencyGrid& grid = f.grid();
  const std::size_t n = grid.size();
  if (k == 0 || k + 1 >= n) {
    throw DomainError("principal-value node " + std::to_string(k) + " is at a band edge");
  }
  const auto v = f.values();
  const double h = grid.spacing();
  const double w = grid[k];
  const double fk = v[k];

  auto integrand = [&](std::size_t j) {
    if (j == k) return node_derivative(v, k, h) / (2.0 * w);
    const double wj = grid[j];
    return (v[j] - fk) / ((wj - w) * (wj + w));
  };

  double sum = 0.5 * (integrand(0) + integrand(n - 1));
  for (std::size_t j = 1; j + 1 < n; ++j) sum += integrand(j);
  return sum * h + fk * kernel_log_term(grid.omega_min(), grid.omega_max(), w);
}

double pv_kernel_integral(const RealSeries& f, double omega) {
  const FrequencyGrid& grid = f.grid();
  check_pv_domain(grid, omega);

  const double h = grid.spacing();
  const std::size_t n = grid.size();
  const double pos = (omega - grid.omega_min()) / h;
  const auto nearest = static_cast<std::size_t>(std::llround(pos));
  if (std::abs(pos - static_cast<double>(nearest)) <= snap_fraction && nearest >= 1 && nearest + 1 < n) {
    return pv_kernel_integral_at(f, nearest);
  }

  // Off-node evaluation: f(omega) from the cubic Lagrange interpolant
  // through the four nodes bracketing omega.
  const auto v = f.values();
  std::size_t first = static_cast<std::size_t>(std::floor(pos));
  first = first >= 1 ? first - 1 : 0;
  first = std::min(first, n - 4);
  const double x = pos - static_cast<double>(first);
  double p = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    double li = 1.0;
    for (std::size_t j = 0; j < 4; ++j) {
      if (j == i) continue;
      li *= (x - static_cast<double>(j)) / (static_cast<double>(i) - static_cast<double>(j));
    }
    p += li * v[first + i];
  }

  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double wj = grid[j];
    const double g = (v[j] - p) / ((wj - omega) * (wj + omega));
    sum += (j == 0 || j + 1 == n) ? 0.5 * g : g;
  }
  return sum * h + p * kernel_log_term(grid.omega_min(), grid.omega_max(), omega);
}

std::vector<double> unwrap_phase(std::span<const double> raw) {
  std::vector<double> out(raw.begin(), raw.end());
  double offset = 0.0;
  for (std::size_t k = 1; k < raw.size(); ++k) {
    const double step = raw[k] - raw[k - 1];
    offset -= two_pi * std::round(step / two_pi);
    out[k] = raw[k] + offset;
  }
  return out;
}

RealSeries unwrap_phase(const RealSeries& raw) {
  return RealSeries(raw.grid(), unwrap_phase(raw.values()));
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DomainError("line fit needs at least two paired points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("line fit abscissae are all equal");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

} // namespace dlab
