"""Birefringent slab transfer functions, Kramers-Kronig transforms and pulse propagation."""

from ._core import (
    ConfigError,
    DomainError,
    FrequencyGrid,
    IndexModel,
    SystemConfig,
    arg_h,
    calibrated_birefringence,
    classify_minimum_phase,
    delta_phi,
    group_delay,
    half_waveplate_frequencies,
    kk_im_from_re,
    kk_re_from_im,
    magnitude_h,
    paper_config,
    phase_from_magnitude,
    propagate_pulse,
    reconstruct_phase,
    run_command,
    speed_of_light,
    transfer_h,
    transfer_zeros,
    zeros_in_band,
)

__all__ = [name for name in dir() if not name.startswith("_")]
