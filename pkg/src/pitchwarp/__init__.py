"""Pitch-curve time warping with shape-aware DTW and its baselines."""

__version__ = "0.1.0"

from .curve import (
    PitchCurve,
    from_frames,
    hz_to_semitones,
    interpolate_unvoiced,
    z_normalize,
)
from .dtw import AlignmentPath, brute_force_dtw, dtw, euclidean_cost, path_to_map
from .sadtw import SADTWParams, chi_square_cost, sadtw, shape_descriptors
from .ctw import CTWParams, cca_fit, ctw_align, delay_embed
from .metrics import f0_rmse, paa
from .warp import warp_features, warp_pitch_to_amateur_timeline

__all__ = [
    "PitchCurve", "from_frames", "hz_to_semitones", "interpolate_unvoiced", "z_normalize",
    "AlignmentPath", "brute_force_dtw", "dtw", "euclidean_cost", "path_to_map",
    "SADTWParams", "chi_square_cost", "sadtw", "shape_descriptors",
    "CTWParams", "cca_fit", "ctw_align", "delay_embed",
    "f0_rmse", "paa", "warp_features", "warp_pitch_to_amateur_timeline",
]
