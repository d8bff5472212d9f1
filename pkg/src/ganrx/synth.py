"""Procedural background cubes and the diagonal target-implant protocol.

Background model: each pixel is a convex combination of K smooth random
endmember spectra (cumulative-sum-smoothed Gaussian draws rescaled to
[0.1, 1]) plus zero-mean Gaussian noise, clipped to stay non-negative. The
mixing weights are Dirichlet draws with a concentration below 1, which
pushes pixels toward the endmember "corners" and gives the background the
clustered, non-Gaussian character of real scenes.

Targets are implanted by linear mixing: m = a*t + (1-a)*s per band, with
abundance a in (0, 1]. The stock layout places one square block per
abundance value along the main diagonal, evenly spaced, weakest first.

All randomness is drawn from per-purpose PCG64 streams ("endmembers",
"abundancemap", "noise", "target") keyed by the scene seed, so scenes are
reproducible from a single integer.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, PlacementError, ShapeError
from .hsi import HsiCube, Mask
from .rng import stream

# Dirichlet concentration for per-pixel mixing weights; < 1 concentrates
# mass near single endmembers.
ABUNDANCE_CONCENTRATION = 0.4


@dataclass
class SceneSpec:
    """Dimensions and randomness of a synthetic background scene."""

    width: int = 64
    height: int = 64
    bands: int = 40
    endmembers: int = 4
    noise_sigma: float = 0.02
    seed: int = 0

    def __post_init__(self):
        if min(self.width, self.height, self.bands, self.endmembers) < 1:
            raise DataError("scene dimensions and endmember count must be >= 1")
        if not np.isfinite(self.noise_sigma) or self.noise_sigma < 0:
            raise DataError("noise_sigma must be finite and >= 0")


@dataclass
class ImplantSpec:
    """A target spectrum and where to mix it in.

    ``placements`` is a list of (row, col, block_height, block_width,
    abundance) tuples; abundances must lie in (0, 1] and blocks must be
    disjoint and inside the image.
    """

    target: np.ndarray
    placements: list = field(default_factory=list)

    def __post_init__(self):
        self.target = np.asarray(self.target, dtype=np.float32)
        if self.target.ndim != 1:
            raise ShapeError("target spectrum must be one-dimensional")


def _smooth_spectrum(rng: np.random.Generator, bands: int,
                     lo: float = 0.1, hi: float = 1.0) -> np.ndarray:
    """Cumulative sum of Gaussian draws rescaled into [lo, hi]."""
    walk = np.cumsum(rng.standard_normal(bands))
    span = walk.max() - walk.min()
    if span == 0:
        return np.full(bands, (lo + hi) / 2.0)
    return (walk - walk.min()) / span * (hi - lo) + lo


def generate_background(spec: SceneSpec) -> HsiCube:
    """Deterministic synthetic background for a scene spec."""
    em_rng = stream(spec.seed, "endmembers")
    ab_rng = stream(spec.seed, "abundancemap")
    noise_rng = stream(spec.seed, "noise")

    endmembers = np.stack([
        _smooth_spectrum(em_rng, spec.bands) for _ in range(spec.endmembers)
    ])  # [K, L]
    n = spec.width * spec.height
    weights = ab_rng.dirichlet(
        np.full(spec.endmembers, ABUNDANCE_CONCENTRATION), size=n
    )  # [N, K]
    pix = weights @ endmembers
    if spec.noise_sigma > 0:
        pix = pix + noise_rng.normal(0.0, spec.noise_sigma, size=pix.shape)
    np.clip(pix, 0.0, None, out=pix)
    return HsiCube.from_pixels(pix.astype(np.float32), spec.width, spec.height)


def target_spectrum(spec: SceneSpec) -> np.ndarray:
    """Default implant spectrum for a scene: a dim base with bright spikes
    on alternating bands. Smooth backgrounds put almost no energy at that
    band-to-band frequency, so the comb stays outside the subspace a
    background model can represent."""
    rng = stream(spec.seed, "target")
    t = rng.uniform(0.1, 0.3, size=spec.bands)
    phase = int(rng.integers(0, 2))
    t[phase::2] = rng.uniform(0.9, 1.0, size=t[phase::2].shape)
    return t.astype(np.float32)


def implant_targets(cube: HsiCube, spec: ImplantSpec):
    """Mix the target into each placed block: m = a*t + (1-a)*s per band.

    Pixels outside the blocks are byte-identical to the input. Returns
    (implanted cube, mask marking exactly the placed pixels)."""
    if spec.target.size != cube.bands:
        raise ShapeError(
            f"target has {spec.target.size} bands, cube has {cube.bands}"
        )
    occupied = np.zeros((cube.height, cube.width), dtype=bool)
    for row, col, bh, bw, a in spec.placements:
        if bh < 1 or bw < 1:
            raise PlacementError("block dimensions must be >= 1")
        if row < 0 or col < 0 or row + bh > cube.height or col + bw > cube.width:
            raise PlacementError(
                f"block at ({row}, {col}) size {bh}x{bw} is out of bounds"
            )
        if not 0.0 < a <= 1.0:
            raise PlacementError(f"abundance {a} outside (0, 1]")
        if occupied[row : row + bh, col : col + bw].any():
            raise PlacementError(f"block at ({row}, {col}) overlaps another block")
        occupied[row : row + bh, col : col + bw] = True

    data = cube.data.copy()
    t32 = spec.target.astype(np.float32)
    for row, col, bh, bw, a in spec.placements:
        a32 = np.float32(a)
        region = data[:, row : row + bh, col : col + bw]
        data[:, row : row + bh, col : col + bw] = (
            a32 * t32[:, None, None] + (np.float32(1.0) - a32) * region
        )
    mask = Mask(cube.width, cube.height, occupied.astype(np.uint8))
    return HsiCube(cube.width, cube.height, cube.bands, data), mask


def diagonal_layout(width: int, height: int, block: int, abundances):
    """Square blocks along the main diagonal, evenly spaced, one per
    abundance value in increasing order."""
    abundances = sorted(float(a) for a in abundances)
    if not abundances:
        raise PlacementError("need at least one abundance value")
    if block < 1:
        raise PlacementError("block side must be >= 1")
    diag = min(width, height)
    n = len(abundances)
    if n * block > diag:
        raise PlacementError(
            f"{n} blocks of side {block} need {n * block} diagonal pixels, "
            f"only {diag} available"
        )
    if n == 1:
        starts = [(diag - block) // 2]
    else:
        step = (diag - block) / (n - 1)
        starts = [round(i * step) for i in range(n)]
    return [(s, s, block, block, a) for s, a in zip(starts, abundances)]


def build_scene(scene: SceneSpec, block: int, abundances):
    """Background + default target implanted on the diagonal; returns
    (cube, mask)."""
    background = generate_background(scene)
    placements = diagonal_layout(scene.width, scene.height, block, abundances)
    implant = ImplantSpec(target=target_spectrum(scene), placements=placements)
    return implant_targets(background, implant)
