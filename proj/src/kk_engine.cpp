#include "dlab/kk_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

namespace dlab {

namespace {

constexpr double pi = std::numbers::pi;

// Evaluates fn(k) at every node where the principal-value integral is
// defined; the evaluations are independent, so they are split across threads.
template <class Fn>
MaskedSeries evaluate_nodes(const FrequencyGrid& grid, Fn fn) {
  MaskedSeries out{grid, std::vector<std::optional<double>>(grid.size())};
  const std::size_t n = grid.size();
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, n / 512));
  auto run = [&](std::size_t first, std::size_t last) {
    for (std::size_t k = first; k < last; ++k) {
      if (k >= 1 && k + 1 < n && pv_evaluable(grid, grid[k])) out.values[k] = fn(k);
    }
  };
  if (workers == 1) {
    run(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t first = w * chunk;
      const std::size_t last = std::min(n, first + chunk);
      if (first < last) pool.emplace_back(run, first, last);
    }
  }
  if (out.evaluated_count() == 0) {
    throw DomainError("band too narrow: no sample lies far enough from the band edges for a transform");
  }
  return out;
}

// Re-embeds a transform computed on a sub-grid into the parent grid.
MaskedSeries embed(const MaskedSeries& parent_shape, const MaskedSeries& sub) {
  MaskedSeries out{parent_shape.grid, std::vector<std::optional<double>>(parent_shape.grid.size())};
  const double h = parent_shape.grid.spacing();
  const auto offset =
      static_cast<std::size_t>(std::llround((sub.grid.omega_min() - parent_shape.grid.omega_min()) / h));
  for (std::size_t k = 0; k < sub.values.size(); ++k) out.values[offset + k] = sub.values[k];
  return out;
}

std::vector<double> phase_without_linear_term(const PhaseReconstruction& recon, std::vector<std::size_t>& nodes,
                                              const std::vector<std::size_t>& candidates) {
  std::vector<double> y;
  for (std::size_t k : candidates) {
    if (!recon.phase.values[k]) continue;
    const double w = recon.phase.grid[k];
    nodes.push_back(k);
    y.push_back(*recon.phase.values[k] - recon.d0 * w - recon.offset);
  }
  return y;
}

std::vector<std::size_t> fit_nodes(const KkBand& band, double center, double exclusion_halfwidth) {
  std::vector<std::size_t> out;
  for (std::size_t k : band.interior_indices()) {
    if (std::abs(band.grid()[k] - center) > exclusion_halfwidth) out.push_back(k);
  }
  return out;
}

void require_same_grid(const FrequencyGrid& a, const FrequencyGrid& b) {
  if (!(a == b)) throw DomainError("series are sampled on different grids");
}

} // namespace

KkBand::KkBand(FrequencyGrid grid, double interior_fraction)
    : grid_(std::move(grid)), interior_fraction_(interior_fraction) {
  if (!(interior_fraction > 0.0 && interior_fraction <= 1.0)) {
    throw ConfigError("interior fraction must lie in (0, 1]");
  }
  if (interior_indices().empty()) throw ConfigError("interior sub-band contains no samples");
}

double KkBand::interior_lo() const noexcept {
  const double mid = 0.5 * (grid_.omega_min() + grid_.omega_max());
  return mid - 0.5 * interior_fraction_ * (grid_.omega_max() - grid_.omega_min());
}

double KkBand::interior_hi() const noexcept {
  const double mid = 0.5 * (grid_.omega_min() + grid_.omega_max());
  return mid + 0.5 * interior_fraction_ * (grid_.omega_max() - grid_.omega_min());
}

bool KkBand::in_interior(double omega) const noexcept { return omega >= interior_lo() && omega <= interior_hi(); }

std::vector<std::size_t> KkBand::interior_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    if (in_interior(grid_[k])) out.push_back(k);
  }
  return out;
}

MaskedSeries kk_re_from_im(const RealSeries& im) {
  const FrequencyGrid& grid = im.grid();
  std::vector<double> weighted(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) weighted[k] = grid[k] * im[k];
  const RealSeries f(grid, std::move(weighted));
  return evaluate_nodes(grid, [&](std::size_t k) { return (2.0 / pi) * pv_kernel_integral_at(f, k); });
}

MaskedSeries kk_im_from_re(const RealSeries& re) {
  const FrequencyGrid& grid = re.grid();
  return evaluate_nodes(grid, [&](std::size_t k) { return -(2.0 * grid[k] / pi) * pv_kernel_integral_at(re, k); });
}

MaskedSeries kk_re_from_im(const MaskedSeries& im) { return embed(im, kk_re_from_im(im.evaluated_run())); }

MaskedSeries kk_im_from_re(const MaskedSeries& re) { return embed(re, kk_im_from_re(re.evaluated_run())); }

PhaseReconstruction phase_from_magnitude(const RealSeries& mag, double d0, double offset) {
  const FrequencyGrid& grid = mag.grid();
  std::vector<double> log_mag(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(mag[k] > zero_transmission_threshold)) {
      std::ostringstream os;
      os.precision(17);
      os << "zero transmission: |H| = " << mag[k] << " at omega = " << grid[k]
         << " rad/s; the amplitude-to-phase transform is undefined";
      throw DomainError(os.str());
    }
    log_mag[k] = std::log(mag[k]);
  }
  const RealSeries f(grid, std::move(log_mag));
  MaskedSeries phase = evaluate_nodes(grid, [&](std::size_t k) {
    const double w = grid[k];
    return d0 * w + offset - (2.0 * w / pi) * pv_kernel_integral_at(f, k);
  });
  return PhaseReconstruction{std::move(phase), d0, offset, false, {}};
}

PhaseReconstruction with_linear_term(PhaseReconstruction recon, double d0, double offset) {
  const FrequencyGrid& grid = recon.phase.grid;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!recon.phase.values[k]) continue;
    const double w = grid[k];
    recon.phase.values[k] = *recon.phase.values[k] + (d0 - recon.d0) * w + (offset - recon.offset);
  }
  recon.d0 = d0;
  recon.offset = offset;
  return recon;
}

D0Fit fit_d0(const PhaseReconstruction& recon, const RealSeries& reference_phase, const KkBand& band, double center,
             double exclusion_halfwidth) {
  require_same_grid(recon.phase.grid, band.grid());
  require_same_grid(reference_phase.grid(), band.grid());
  std::vector<std::size_t> nodes;
  const std::vector<double> base = phase_without_linear_term(recon, nodes, fit_nodes(band, center, exclusion_halfwidth));
  constexpr std::size_t min_points = 8;
  if (nodes.size() < min_points) {
    throw DomainError("insufficient data for the d0 fit: " + std::to_string(nodes.size()) +
                      " usable points (need " + std::to_string(min_points) + ")");
  }
  std::vector<double> x(nodes.size()), y(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    x[i] = band.grid()[nodes[i]];
    y[i] = reference_phase[nodes[i]] - base[i];
  }
  const LineFit line = fit_line(x, y);
  return {line.slope, line.intercept, nodes.size()};
}

D0Fit fit_d0(const RealSeries& mag, const RealSeries& reference_phase, const KkBand& band, double center,
             double exclusion_halfwidth) {
  return fit_d0(phase_from_magnitude(mag, 0.0), reference_phase, band, center, exclusion_halfwidth);
}

double fit_phase_offset(const PhaseReconstruction& recon, const RealSeries& reference_phase, const KkBand& band,
                        double center, double exclusion_halfwidth) {
  require_same_grid(recon.phase.grid, band.grid());
  require_same_grid(reference_phase.grid(), band.grid());
  std::vector<std::size_t> nodes;
  const std::vector<double> base = phase_without_linear_term(recon, nodes, fit_nodes(band, center, exclusion_halfwidth));
  if (nodes.empty()) throw DomainError("no usable points for the phase offset fit");
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double w = band.grid()[nodes[i]];
    sum += reference_phase[nodes[i]] - base[i] - recon.d0 * w;
  }
  return sum / static_cast<double>(nodes.size());
}

std::string to_string(PhaseClass c) {
  switch (c) {
  case PhaseClass::MinimumPhase:
    return "MinimumPhase";
  case PhaseClass::NonMinimumPhase:
    return "NonMinimumPhase";
  case PhaseClass::Boundary:
    return "Boundary";
  }
  return "Unknown";
}

PhaseClass classify_minimum_phase(const SystemConfig& config, const KkBand& band) {
  if (std::abs(config.beta - pi / 4.0) < 1e-12) return PhaseClass::Boundary;
  const FrequencyGrid& grid = band.grid();
  const ZeroSearch found = zeros_with_real_part_in(config, grid, grid.omega_min(), grid.omega_max());
  const bool any_upper = std::any_of(found.zeros.begin(), found.zeros.end(),
                                     [](const ComplexZero& z) { return z.half_plane == HalfPlane::Upper; });
  return any_upper ? PhaseClass::NonMinimumPhase : PhaseClass::MinimumPhase;
}

std::vector<ComplexZero> correction_zeros(const SystemConfig& config, const FrequencyGrid& band) {
  const double mid = 0.5 * (band.omega_min() + band.omega_max());
  const double half = 0.75 * (band.omega_max() - band.omega_min());
  const ZeroSearch found = zeros_with_real_part_in(config, band, std::max(mid - half, 0.0), mid + half);
  std::vector<ComplexZero> out;
  std::copy_if(found.zeros.begin(), found.zeros.end(), std::back_inserter(out),
               [](const ComplexZero& z) { return z.half_plane == HalfPlane::Upper; });
  return out;
}

std::complex<double> allpass_factor(const ComplexZero& zero, double omega) {
  const std::complex<double> z(static_cast<double>(zero.omega.real()), static_cast<double>(zero.omega.imag()));
  return (omega - z) / (omega - std::conj(z));
}

double allpass_phase(const ComplexZero& zero, double omega) {
  // arg(w - z) - arg(w - conj z) = -2 atan2(Im z, w - Re z), continuous in w
  // for Im z > 0.
  const double x = static_cast<double>(zero.omega.real());
  const double y = static_cast<double>(zero.omega.imag());
  return -2.0 * std::atan2(y, omega - x);
}

PhaseReconstruction allpass_phase_correction(const PhaseReconstruction& recon, std::span<const ComplexZero> zeros) {
  for (const ComplexZero& z : zeros) {
    if (z.half_plane != HalfPlane::Upper) {
      throw DomainError("all-pass correction received a lower-half-plane zero (branch n = " + std::to_string(z.n) +
                        "); only upper-half-plane zeros carry excess phase");
    }
  }
  PhaseReconstruction out = recon;
  const FrequencyGrid& grid = out.phase.grid;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!out.phase.values[k]) continue;
    double extra = 0.0;
    for (const ComplexZero& z : zeros) extra += allpass_phase(z, grid[k]);
    out.phase.values[k] = *out.phase.values[k] + extra;
  }
  out.correction_applied = true;
  out.zeros_used.insert(out.zeros_used.end(), zeros.begin(), zeros.end());
  return out;
}

ReconstructionReport reconstruct_phase(const SystemConfig& config, const FrequencyGrid& grid,
                                       const ReconstructionOptions& options) {
  config.validate();
  const KkBand band(grid, options.interior_fraction);

  const PhaseClass classification = classify_minimum_phase(config, band);
  double center = 0.5 * (grid.omega_min() + grid.omega_max());
  double exclusion = 0.0;
  std::string d0_source = "fit";

  // Centre the exclusion window on the half-waveplate frequency closest to
  // the middle of the band, if there is one.
  double dmin = delta_phi(config, grid.omega_min()), dmax = delta_phi(config, grid.omega_max());
  if (dmin > dmax) std::swap(dmin, dmax);
  const int m_first = static_cast<int>(std::floor((dmin / pi - 1.0) / 2.0));
  const int m_last = static_cast<int>(std::ceil((dmax / pi - 1.0) / 2.0));
  const HalfWaveplateSearch hw = half_waveplate_frequencies(config, grid, m_first, m_last);
  if (!hw.roots.empty()) {
    const double mid = center;
    center = std::min_element(hw.roots.begin(), hw.roots.end(), [&](const auto& a, const auto& b) {
                      return std::abs(a.omega - mid) < std::abs(b.omega - mid);
                    })->omega;
    exclusion = options.exclusion_fraction * center;
    if (classification == PhaseClass::Boundary) {
      std::ostringstream os;
      os.precision(17);
      os << "zero transmission: beta = pi/4 nulls |H| at the half-waveplate frequency omega = " << center
         << " rad/s; the amplitude-to-phase transform is undefined";
      throw DomainError(os.str());
    }
  }

  const RealSeries mag = magnitude_series(config, grid);
  const PhaseReconstruction base = phase_from_magnitude(mag, 0.0);
  const RealSeries model_phase = arg_h(config, grid);

  PhaseReconstruction recon = base;
  if (classification == PhaseClass::NonMinimumPhase && options.correct) {
    recon = allpass_phase_correction(recon, correction_zeros(config, grid));
  }

  if (classification == PhaseClass::NonMinimumPhase && !options.correct) {
    // |H| is blind to beta -> pi/2 - beta, so the transform calibrated where
    // it is valid is the one compared against this configuration's phase.
    const RealSeries twin_phase = arg_h(config.with_beta(pi / 2.0 - config.beta), grid);
    const D0Fit twin = fit_d0(recon, twin_phase, band, center, exclusion);
    recon = with_linear_term(recon, twin.d0, 0.0);
    recon = with_linear_term(recon, twin.d0, fit_phase_offset(recon, model_phase, band, center, exclusion));
    d0_source = "magnitude-twin";
  } else {
    const D0Fit fit = fit_d0(recon, model_phase, band, center, exclusion);
    recon = with_linear_term(recon, fit.d0, fit.offset);
  }

  MaskedSeries residual{grid, std::vector<std::optional<double>>(grid.size())};
  double max_residual = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!recon.phase.values[k]) continue;
    const double r = model_phase[k] - *recon.phase.values[k];
    residual.values[k] = r;
    if (band.in_interior(grid[k])) max_residual = std::max(max_residual, std::abs(r));
  }
  return ReconstructionReport{classification, std::move(recon), model_phase, std::move(residual),
                              center,         exclusion,        d0_source,   max_residual};
}

} // namespace dlab
