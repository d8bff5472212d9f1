"""Hyperspectral cube / mask data model, binary file formats, and the
normalization used to bring spectra into the network's tanh range.

On-disk formats
---------------
HSC1 cube file:
    bytes 0-7    magic ``HSCUBE01``
    bytes 8-11   header length H, unsigned 32-bit little-endian
    bytes 12..   UTF-8 text header: exactly the keys ``width``, ``height``,
                 ``bands``, ``dtype`` (must be ``f32le``) and ``interleave``
                 (must be ``bsq``), one ``key=value`` per line
    then         width*height*bands float32 little-endian values in BSQ
                 order (band-major, then row, then column)

Mask file: binary PGM (``P5``), maxval <= 255, nonzero pixel = anomaly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError, FormatError, ShapeError
from .ioutil import atomic_write

HSC_MAGIC = b"HSCUBE01"
_HSC_KEYS = ("width", "height", "bands", "dtype", "interleave")


@dataclass
class HsiCube:
    """A width x height x bands cube of float32 values.

    ``data`` has shape (bands, height, width); its C-order ravel is exactly
    the BSQ byte layout of the HSC1 format.
    """

    width: int
    height: int
    bands: int
    data: np.ndarray

    def __post_init__(self):
        if min(self.width, self.height, self.bands) < 1:
            raise DataError("cube dimensions must all be >= 1")
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)
        expected = (self.bands, self.height, self.width)
        if self.data.shape != expected:
            if self.data.size == self.width * self.height * self.bands:
                self.data = self.data.reshape(expected)
            else:
                raise DataError(
                    f"data has {self.data.size} values, expected "
                    f"{self.width * self.height * self.bands}"
                )
        if not np.isfinite(self.data).all():
            raise DataError("cube contains non-finite values")

    @property
    def n_pixels(self) -> int:
        return self.width * self.height

    def pixels(self) -> np.ndarray:
        """View of the cube as an (n_pixels, bands) spectrum matrix; pixel i
        is row-major over (row, col)."""
        return self.data.reshape(self.bands, self.n_pixels).T

    @classmethod
    def from_pixels(cls, pix: np.ndarray, width: int, height: int) -> "HsiCube":
        """Inverse of :meth:`pixels`: build a cube from an (n_pixels, bands)
        matrix."""
        bands = pix.shape[1]
        data = np.ascontiguousarray(pix.T, dtype=np.float32)
        return cls(width, height, bands, data.reshape(bands, height, width))


@dataclass
class Mask:
    """Per-pixel binary anomaly labels aligned with a cube."""

    width: int
    height: int
    labels: np.ndarray  # uint8 (height, width), values 0/1

    def __post_init__(self):
        if min(self.width, self.height) < 1:
            raise DataError("mask dimensions must be >= 1")
        self.labels = np.ascontiguousarray(self.labels, dtype=np.uint8)
        if self.labels.shape != (self.height, self.width):
            raise DataError("mask label array does not match its dimensions")
        self.labels = (self.labels != 0).astype(np.uint8)

    @property
    def anomaly_count(self) -> int:
        return int(self.labels.sum())


@dataclass
class NormStats:
    """Per-band minimum/maximum recorded by :func:`normalize_cube`; carries
    everything needed to invert the normalization."""

    band_min: np.ndarray  # float32 (bands,)
    band_max: np.ndarray  # float32 (bands,)

    def __post_init__(self):
        self.band_min = np.asarray(self.band_min, dtype=np.float32)
        self.band_max = np.asarray(self.band_max, dtype=np.float32)
        if self.band_min.shape != self.band_max.shape:
            raise ShapeError("band_min and band_max must have the same length")
        if np.any(self.band_min > self.band_max):
            raise DataError("band minimum exceeds band maximum")

    @property
    def bands(self) -> int:
        return self.band_min.size


def _encode_hsc_header(cube: HsiCube) -> bytes:
    text = (
        f"width={cube.width}\n"
        f"height={cube.height}\n"
        f"bands={cube.bands}\n"
        "dtype=f32le\n"
        "interleave=bsq\n"
    )
    return text.encode("utf-8")


def save_cube(cube: HsiCube, path) -> None:
    """Write a cube to an HSC1 file (atomically)."""
    header = _encode_hsc_header(cube)
    payload = (
        HSC_MAGIC
        + np.uint32(len(header)).astype("<u4").tobytes()
        + header
        + cube.data.astype("<f4").tobytes()
    )
    atomic_write(path, payload)


def load_cube(path) -> HsiCube:
    """Read an HSC1 file written by :func:`save_cube`."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:8] != HSC_MAGIC:
        raise FormatError(f"{path}: not an HSC1 file (bad magic)")
    if len(raw) < 12:
        raise FormatError(f"{path}: truncated header length field")
    hlen = int(np.frombuffer(raw[8:12], dtype="<u4")[0])
    if len(raw) < 12 + hlen:
        raise FormatError(f"{path}: truncated header")
    try:
        text = raw[12 : 12 + hlen].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: header is not valid UTF-8") from exc

    fields = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{path}: malformed header line {line!r}")
        key, value = line.split("=", 1)
        if key in fields:
            raise FormatError(f"{path}: duplicate header key {key!r}")
        fields[key] = value
    if set(fields) != set(_HSC_KEYS):
        raise FormatError(
            f"{path}: header keys {sorted(fields)} != {sorted(_HSC_KEYS)}"
        )
    if fields["dtype"] != "f32le":
        raise FormatError(f"{path}: unsupported dtype {fields['dtype']!r}")
    if fields["interleave"] != "bsq":
        raise FormatError(f"{path}: unsupported interleave {fields['interleave']!r}")
    try:
        width = int(fields["width"])
        height = int(fields["height"])
        bands = int(fields["bands"])
    except ValueError as exc:
        raise FormatError(f"{path}: non-integer dimension in header") from exc
    if min(width, height, bands) < 1:
        raise FormatError(f"{path}: dimensions must be >= 1")

    body = raw[12 + hlen :]
    expected = width * height * bands * 4
    if len(body) != expected:
        raise DataError(
            f"{path}: payload is {len(body)} bytes, expected {expected}"
        )
    data = np.frombuffer(body, dtype="<f4").reshape(bands, height, width)
    if not np.isfinite(data).all():
        raise DataError(f"{path}: cube contains non-finite values")
    return HsiCube(width, height, bands, data.copy())


def normalize_cube(cube: HsiCube):
    """Affinely map each band so band-min -> -1 and band-max -> +1.

    A degenerate band (min == max) maps to all zeros; the stats still record
    the constant so denormalization restores it. Returns (cube, NormStats).
    """
    flat = cube.data.reshape(cube.bands, -1)
    lo = flat.min(axis=1)
    hi = flat.max(axis=1)
    span = (hi - lo).astype(np.float64)
    safe = np.where(span > 0, span, 1.0)
    scaled = 2.0 * (flat.astype(np.float64) - lo[:, None]) / safe[:, None] - 1.0
    scaled[span == 0, :] = 0.0
    # rounding to float32 can overshoot the endpoints by an ulp
    out32 = np.clip(scaled.astype(np.float32), -1.0, 1.0)
    out = HsiCube(cube.width, cube.height, cube.bands,
                  out32.reshape(cube.data.shape))
    return out, NormStats(lo, hi)


def denormalize_cube(cube: HsiCube, stats: NormStats) -> HsiCube:
    """Invert :func:`normalize_cube`. Degenerate bands return their recorded
    constant."""
    if stats.bands != cube.bands:
        raise ShapeError(
            f"stats have {stats.bands} bands, cube has {cube.bands}"
        )
    lo = stats.band_min.astype(np.float64)
    hi = stats.band_max.astype(np.float64)
    span = hi - lo
    flat = cube.data.reshape(cube.bands, -1).astype(np.float64)
    restored = (flat + 1.0) / 2.0 * span[:, None] + lo[:, None]
    restored[span == 0, :] = lo[span == 0, None]
    return HsiCube(cube.width, cube.height, cube.bands,
                   restored.astype(np.float32).reshape(cube.data.shape))


# --- PGM masks ---------------------------------------------------------------

def save_mask(mask: Mask, path) -> None:
    """Write a mask as binary PGM; anomaly pixels are stored as 255."""
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii")
    body = (mask.labels * np.uint8(255)).tobytes()
    atomic_write(path, header + body)


def save_gray_pgm(img: np.ndarray, path) -> None:
    """Write a uint8 (height, width) image as binary PGM."""
    img = np.ascontiguousarray(img, dtype=np.uint8)
    if img.ndim != 2:
        raise ShapeError("grayscale image must be two-dimensional")
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    atomic_write(path, header + img.tobytes())


def _pgm_tokens(raw: bytes):
    """Yield whitespace-separated header tokens, skipping '#' comments, and
    finally the offset of the first payload byte."""
    i = 0
    tokens = []
    while len(tokens) < 4 and i < len(raw):
        c = raw[i : i + 1]
        if c.isspace():
            i += 1
        elif c == b"#":
            while i < len(raw) and raw[i : i + 1] not in (b"\n", b"\r"):
                i += 1
        else:
            j = i
            while j < len(raw) and not raw[j : j + 1].isspace():
                j += 1
            tokens.append(raw[i:j])
            i = j
    return tokens, i + 1  # one whitespace byte separates maxval from payload


def load_mask(path) -> Mask:
    """Read a binary PGM mask; any nonzero pixel becomes label 1."""
    with open(path, "rb") as fh:
        raw = fh.read()
    tokens, offset = _pgm_tokens(raw)
    if len(tokens) != 4 or tokens[0] != b"P5":
        raise FormatError(f"{path}: not a binary PGM (P5) file")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise FormatError(f"{path}: non-integer PGM header field") from exc
    if width < 1 or height < 1 or width * height > 2**31:
        raise DataError(f"{path}: bad PGM dimensions {width}x{height}")
    if not 0 < maxval <= 255:
        raise FormatError(f"{path}: unsupported PGM maxval {maxval}")
    body = raw[offset : offset + width * height]
    if len(body) != width * height:
        raise DataError(f"{path}: PGM payload truncated")
    labels = np.frombuffer(body, dtype=np.uint8).reshape(height, width)
    return Mask(width, height, labels.copy())
