"""GAN-based hyperspectral anomaly detection.

A conditional encoder/decoder GAN learns to reproduce background spectra;
the spectral difference between a pixel and its reconstruction is scored
with the RX (Mahalanobis) detector. Includes classic RX / weighted RX /
autoencoder baselines, a synthetic target-implant scene generator, and ROC
evaluation, all driven by the ``ganrx`` command-line tool.
"""

__version__ = "0.1.0"

from .errors import (DataError, FormatError, GanrxError, NumericError,
                     PlacementError, ShapeError, StateError, UsageError)
from .hsi import (HsiCube, Mask, NormStats, denormalize_cube, load_cube,
                  load_mask, normalize_cube, save_cube, save_mask)

__all__ = [
    "__version__",
    "GanrxError", "FormatError", "DataError", "ShapeError", "PlacementError",
    "NumericError", "StateError", "UsageError",
    "HsiCube", "Mask", "NormStats",
    "save_cube", "load_cube", "save_mask", "load_mask",
    "normalize_cube", "denormalize_cube",
]
