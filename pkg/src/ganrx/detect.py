"""Anomaly detectors: RX, weighted RX, autoencoder residual, and GAN-RX.

Every detector maps a cube to a :class:`ScoreMap` of non-negative per-pixel
anomaly scores; larger means more anomalous. The Mahalanobis-based scores
are computed from a Cholesky factor of the background covariance via two
triangular solves -- the covariance is never explicitly inverted.

GAN-RX works in the normalized [-1, 1] domain: the input cube is normalized
with its own band ranges (the same transform used when the generator was
trained on that cube), reconstructed, and the spectral difference
d_i = s_i - G(s_i) is scored with RX. The autoencoder baseline uses the
plain squared reconstruction error instead.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DataError, NumericError, ShapeError
from .gan import difference_image, reconstruct
from .hsi import HsiCube, normalize_cube, save_cube, save_gray_pgm

WRX_ITERATIONS = 5


@dataclass
class BackgroundStats:
    """Mean spectrum and covariance of the background model.

    The Cholesky factor is computed lazily on first use, so statistics of a
    degenerate (singular) sample can still be constructed and inspected;
    only scoring against them fails.
    """

    mean: np.ndarray  # float64 (bands,)
    cov: np.ndarray  # float64 (bands, bands)
    _chol: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.cov = np.asarray(self.cov, dtype=np.float64)
        if self.mean.ndim != 1 or self.cov.shape != (self.mean.size,) * 2:
            raise ShapeError("mean must be (L,) and cov (L, L)")

    @property
    def bands(self) -> int:
        return self.mean.size

    def cholesky(self) -> np.ndarray:
        """Lower-triangular factor of the covariance (cached)."""
        if self._chol is None:
            try:
                self._chol = np.linalg.cholesky(self.cov)
            except np.linalg.LinAlgError as exc:
                raise NumericError(
                    "background covariance is not positive definite; "
                    "increase the ridge term"
                ) from exc
        return self._chol


@dataclass
class ScoreMap:
    """Per-pixel anomaly scores aligned with a cube."""

    width: int
    height: int
    scores: np.ndarray  # float64 (height, width), >= 0

    def __post_init__(self):
        self.scores = np.ascontiguousarray(self.scores, dtype=np.float64)
        if self.scores.shape != (self.height, self.width):
            raise ShapeError("score array does not match its dimensions")
        if not np.isfinite(self.scores).all():
            raise NumericError("score map contains non-finite values")
        if (self.scores < 0).any():
            raise NumericError("score map contains negative values")

    def ravel(self) -> np.ndarray:
        """Scores flattened row-major, matching ``HsiCube.pixels`` order."""
        return self.scores.reshape(-1)


def estimate_stats(pixels: np.ndarray, weights=None,
                   ridge: float = 0.0) -> BackgroundStats:
    """Weighted mean/covariance of an (N, L) spectrum matrix.

    With no weights each sample counts 1/N. Weights must be non-negative
    with a positive sum and are normalized internally, so only their ratios
    matter. ``ridge`` adds ridge * mean-eigenvalue * I to the covariance
    (an absolute floor of ridge + 1e-12 when the covariance is all zero) to
    keep the Cholesky factorization well posed.
    """
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim != 2:
        raise ShapeError("pixel matrix must be (n_pixels, bands)")
    n, bands = pixels.shape
    if n < 2:
        raise DataError("need at least two samples to estimate a covariance")
    if ridge < 0 or not np.isfinite(ridge):
        raise DataError("ridge must be finite and >= 0")

    if weights is None:
        w = np.full(n, 1.0 / n)
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (n,):
            raise ShapeError(f"weights must have shape ({n},)")
        if (w < 0).any() or not np.isfinite(w).all():
            raise DataError("weights must be finite and >= 0")
        total = w.sum()
        if total <= 0:
            raise DataError("weights must not all be zero")
        w = w / total

    mean = w @ pixels
    centered = pixels - mean
    cov = (centered * w[:, None]).T @ centered
    cov = 0.5 * (cov + cov.T)

    if ridge > 0:
        trace = np.trace(cov)
        if trace > 0:
            cov[np.diag_indices(bands)] += ridge * trace / bands
        else:
            cov[np.diag_indices(bands)] += ridge + 1e-12
    return BackgroundStats(mean, cov)


def mahalanobis_scores(pixels: np.ndarray, stats: BackgroundStats) -> np.ndarray:
    """(d - m)^T C^-1 (d - m) per row, via two triangular solves."""
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim != 2 or pixels.shape[1] != stats.bands:
        raise ShapeError(
            f"pixel matrix must be (n, {stats.bands}), got {pixels.shape}"
        )
    chol = stats.cholesky()
    y = solve_triangular(chol, (pixels - stats.mean).T, lower=True)
    scores = np.einsum("ij,ij->j", y, y)
    return np.maximum(scores, 0.0)


def _as_map(cube: HsiCube, scores: np.ndarray) -> ScoreMap:
    return ScoreMap(cube.width, cube.height,
                    scores.reshape(cube.height, cube.width))


def rx_detect(cube: HsiCube, ridge: float = 0.0) -> ScoreMap:
    """Global RX: Mahalanobis distance of every pixel from the cube's own
    mean/covariance."""
    pix = cube.pixels()
    stats = estimate_stats(pix, ridge=ridge)
    return _as_map(cube, mahalanobis_scores(pix, stats))


def wrx_detect(cube: HsiCube, iterations: int = WRX_ITERATIONS,
               ridge: float = 0.0) -> ScoreMap:
    """Weighted RX: iteratively re-estimate the background with weights
    1 / (1 + score), which discounts likely anomalies."""
    if iterations < 1:
        raise DataError("weighted RX needs at least one iteration")
    pix = cube.pixels()
    weights = None
    for _ in range(iterations):
        stats = estimate_stats(pix, weights=weights, ridge=ridge)
        scores = mahalanobis_scores(pix, stats)
        weights = 1.0 / (1.0 + scores)
        weights /= weights.sum()
    return _as_map(cube, scores)


def ae_detect(cube: HsiCube, generator, batch_size: int = 512) -> ScoreMap:
    """Autoencoder baseline: squared L2 reconstruction error per pixel, in
    the normalized domain."""
    ncube, _ = normalize_cube(cube)
    recon = reconstruct(generator, ncube, batch_size=batch_size)
    diff = ncube.pixels().astype(np.float64) - recon.pixels().astype(np.float64)
    return _as_map(cube, np.sum(diff * diff, axis=1))


def gan_rx_detect(cube: HsiCube, generator, ridge: float = 0.0,
                  batch_size: int = 512) -> ScoreMap:
    """RX applied to the spectral difference d_i = s_i - G(s_i) between the
    normalized cube and the generator's background reconstruction."""
    ncube, _ = normalize_cube(cube)
    recon = reconstruct(generator, ncube, batch_size=batch_size)
    diff = difference_image(ncube, recon)
    pix = diff.pixels()
    stats = estimate_stats(pix, ridge=ridge)
    return _as_map(cube, mahalanobis_scores(pix, stats))


# --- score map export --------------------------------------------------------

def score_cube(smap: ScoreMap) -> HsiCube:
    """Wrap a score map as a single-band cube for HSC1 export."""
    return HsiCube(smap.width, smap.height, 1,
                   smap.scores.astype(np.float32)[None, :, :])


def save_score_map(smap: ScoreMap, hsc_path, pgm_path) -> None:
    """Write a score map as a 1-band HSC1 cube plus an 8-bit PGM preview.

    The preview stretches min -> 0 and max -> 255; a constant map renders
    as all zeros.
    """
    save_cube(score_cube(smap), hsc_path)
    lo = smap.scores.min()
    hi = smap.scores.max()
    if hi > lo:
        gray = np.round((smap.scores - lo) / (hi - lo) * 255.0)
    else:
        gray = np.zeros_like(smap.scores)
    save_gray_pgm(gray.astype(np.uint8), pgm_path)
