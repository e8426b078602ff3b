#pragma once

#include "dlab/birefringent_model.hpp"
#include "dlab/numerics.hpp"

#include <span>
#include <string>
#include <vector>

namespace dlab {

/// A sampled band plus the centred sub-band in which band-truncated
/// transforms are trusted.
class KkBand {
public:
  explicit KkBand(FrequencyGrid grid, double interior_fraction = 0.6);

  const FrequencyGrid& grid() const noexcept { return grid_; }
  double interior_fraction() const noexcept { return interior_fraction_; }
  double interior_lo() const noexcept;
  double interior_hi() const noexcept;
  bool in_interior(double omega) const noexcept;
  std::vector<std::size_t> interior_indices() const;

private:
  FrequencyGrid grid_;
  double interior_fraction_;
};

/// Re G(w) = (2/pi) P int W Im G(W) / (W^2 - w^2) dW over the band.
MaskedSeries kk_re_from_im(const RealSeries& im);
/// Im G(w) = -(2w/pi) P int Re G(W) / (W^2 - w^2) dW over the band.
MaskedSeries kk_im_from_re(const RealSeries& re);

/// Overloads for chained transforms: the integral runs over the longest
/// evaluated run of the input and unevaluated samples stay unevaluated.
MaskedSeries kk_re_from_im(const MaskedSeries& im);
MaskedSeries kk_im_from_re(const MaskedSeries& re);

struct PhaseReconstruction {
  MaskedSeries phase;
  /// Linear phase coefficient d0 (s) and the constant offset (rad) folded
  /// into phase.
  double d0 = 0.0;
  double offset = 0.0;
  bool correction_applied = false;
  std::vector<ComplexZero> zeros_used;
};

/// arg H(w) = d0 w + offset - (2w/pi) P int ln|H(W)| / (W^2 - w^2) dW, with
/// the integral truncated to the band. Rejects magnitudes at or below
/// zero_transmission_threshold.
PhaseReconstruction phase_from_magnitude(const RealSeries& mag, double d0, double offset = 0.0);

/// Replaces the linear term of a reconstruction.
PhaseReconstruction with_linear_term(PhaseReconstruction recon, double d0, double offset);

struct D0Fit {
  double d0 = 0.0;
  double offset = 0.0;
  std::size_t points_used = 0;
};

/// Least-squares d0 (and constant offset) matching the reconstruction to a
/// reference phase over the interior, excluding |w - center| <= exclusion.
D0Fit fit_d0(const PhaseReconstruction& recon, const RealSeries& reference_phase, const KkBand& band,
             double center, double exclusion_halfwidth);
D0Fit fit_d0(const RealSeries& mag, const RealSeries& reference_phase, const KkBand& band, double center,
             double exclusion_halfwidth);

/// Offset only, with d0 held at the reconstruction's current value.
double fit_phase_offset(const PhaseReconstruction& recon, const RealSeries& reference_phase, const KkBand& band,
                        double center, double exclusion_halfwidth);

enum class PhaseClass { MinimumPhase, NonMinimumPhase, Boundary };

std::string to_string(PhaseClass c);

PhaseClass classify_minimum_phase(const SystemConfig& config, const KkBand& band);

/// Upper-half-plane zeros whose real parts lie in the band widened 1.5x about
/// its centre.
std::vector<ComplexZero> correction_zeros(const SystemConfig& config, const FrequencyGrid& band);

/// (w - z) / (w - conj z); unit modulus on the real axis.
std::complex<double> allpass_factor(const ComplexZero& zero, double omega);
/// Continuous arg of allpass_factor along real w.
double allpass_phase(const ComplexZero& zero, double omega);

/// Adds the phase of one all-pass factor per upper-half-plane zero. Throws
/// DomainError if any zero is tagged Lower.
PhaseReconstruction allpass_phase_correction(const PhaseReconstruction& recon, std::span<const ComplexZero> zeros);

struct ReconstructionOptions {
  double interior_fraction = 0.6;
  /// Half-width of the window around the half-waveplate frequency excluded
  /// from the d0 fit, as a fraction of that frequency.
  double exclusion_fraction = 0.05;
  bool correct = false;
};

/// End-to-end amplitude-to-phase comparison against the model phase.
struct ReconstructionReport {
  PhaseClass classification;
  PhaseReconstruction reconstruction;
  RealSeries model_phase;
  MaskedSeries residual;
  double center = 0.0;             ///< frequency the fit window is centred on
  double exclusion_halfwidth = 0.0;
  /// How d0 was obtained: "fit" against this configuration's phase, or
  /// "magnitude-twin" when the uncorrected non-minimum-phase case borrows the
  /// d0 fitted for the analyzer angle pi/2 - beta (identical |H|).
  std::string d0_source;
  double max_interior_residual = 0.0;
};

ReconstructionReport reconstruct_phase(const SystemConfig& config, const FrequencyGrid& grid,
                                       const ReconstructionOptions& options = {});

} // namespace dlab
