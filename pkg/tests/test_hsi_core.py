import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ganrx.errors import DataError, FormatError, ShapeError
from ganrx.hsi import (HsiCube, Mask, NormStats, denormalize_cube, load_cube,
                       load_mask, normalize_cube, save_cube, save_gray_pgm,
                       save_mask)


def random_cube(rng, w=8, h=8, bands=16):
    data = rng.normal(size=(bands, h, w)).astype(np.float32)
    return HsiCube(w, h, bands, data)


# --- cube data model ---------------------------------------------------------

def test_cube_rejects_bad_dimensions():
    with pytest.raises(DataError):
        HsiCube(0, 4, 4, np.zeros((4, 4, 0), dtype=np.float32))


def test_cube_rejects_wrong_size():
    with pytest.raises(DataError):
        HsiCube(2, 2, 3, np.zeros(11, dtype=np.float32))


def test_cube_rejects_non_finite():
    data = np.zeros((3, 2, 2), dtype=np.float32)
    data[1, 0, 1] = np.nan
    with pytest.raises(DataError):
        HsiCube(2, 2, 3, data)


def test_pixels_matches_bsq_enumeration():
    # pixel i (row-major) band b must be data[b, row, col]
    rng = np.random.default_rng(0)
    cube = random_cube(rng, w=5, h=3, bands=4)
    pix = cube.pixels()
    for row in range(3):
        for col in range(5):
            for b in range(4):
                assert pix[row * 5 + col, b] == cube.data[b, row, col]


def test_from_pixels_inverts_pixels():
    rng = np.random.default_rng(1)
    cube = random_cube(rng, w=6, h=4, bands=5)
    again = HsiCube.from_pixels(cube.pixels(), cube.width, cube.height)
    assert np.array_equal(again.data, cube.data)


# --- HSC1 format -------------------------------------------------------------

def test_cube_roundtrip_bitwise(tmp_path):
    rng = np.random.default_rng(2)
    cube = random_cube(rng)
    path = tmp_path / "c.hsc"
    save_cube(cube, path)
    back = load_cube(path)
    assert back.width == cube.width
    assert back.height == cube.height
    assert back.bands == cube.bands
    assert back.data.tobytes() == cube.data.tobytes()


def test_save_is_deterministic(tmp_path):
    rng = np.random.default_rng(3)
    cube = random_cube(rng)
    save_cube(cube, tmp_path / "a.hsc")
    save_cube(cube, tmp_path / "b.hsc")
    assert (tmp_path / "a.hsc").read_bytes() == (tmp_path / "b.hsc").read_bytes()


def test_minimal_cube_file_size(tmp_path):
    # magic(8) + header-length(4) + header + one float32
    cube = HsiCube(1, 1, 1, np.zeros((1, 1, 1), dtype=np.float32))
    path = tmp_path / "m.hsc"
    save_cube(cube, path)
    raw = path.read_bytes()
    hlen = int(np.frombuffer(raw[8:12], dtype="<u4")[0])
    assert len(raw) == 12 + hlen + 4


def test_load_rejects_bad_magic(tmp_path):
    path = tmp_path / "x.hsc"
    path.write_bytes(b"XXXXXXXX" + b"\x00" * 32)
    with pytest.raises(FormatError):
        load_cube(path)


def test_load_rejects_short_payload(tmp_path):
    # header says 2x2x3 = 12 floats but only 11 are present
    cube = HsiCube(2, 2, 3, np.arange(12, dtype=np.float32))
    path = tmp_path / "t.hsc"
    save_cube(cube, path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-4])
    with pytest.raises(DataError):
        load_cube(path)


def test_load_rejects_trailing_garbage(tmp_path):
    cube = HsiCube(2, 2, 3, np.arange(12, dtype=np.float32))
    path = tmp_path / "t.hsc"
    save_cube(cube, path)
    path.write_bytes(path.read_bytes() + b"\x00\x00\x00\x00")
    with pytest.raises(DataError):
        load_cube(path)


def test_load_rejects_missing_header_key(tmp_path):
    header = b"width=2\nheight=2\nbands=3\ndtype=f32le\n"  # no interleave
    body = np.zeros(12, dtype="<f4").tobytes()
    path = tmp_path / "t.hsc"
    path.write_bytes(b"HSCUBE01" + np.uint32(len(header)).astype("<u4").tobytes()
                     + header + body)
    with pytest.raises(FormatError):
        load_cube(path)


def test_load_rejects_unknown_dtype(tmp_path):
    header = b"width=2\nheight=2\nbands=3\ndtype=f64le\ninterleave=bsq\n"
    body = np.zeros(12, dtype="<f4").tobytes()
    path = tmp_path / "t.hsc"
    path.write_bytes(b"HSCUBE01" + np.uint32(len(header)).astype("<u4").tobytes()
                     + header + body)
    with pytest.raises(FormatError):
        load_cube(path)


def test_load_rejects_non_finite_payload(tmp_path):
    header = b"width=1\nheight=1\nbands=1\ndtype=f32le\ninterleave=bsq\n"
    body = np.array([np.inf], dtype="<f4").tobytes()
    path = tmp_path / "t.hsc"
    path.write_bytes(b"HSCUBE01" + np.uint32(len(header)).astype("<u4").tobytes()
                     + header + body)
    with pytest.raises(DataError):
        load_cube(path)


def test_save_to_directory_raises(tmp_path):
    cube = HsiCube(1, 1, 1, np.zeros((1, 1, 1), dtype=np.float32))
    with pytest.raises(OSError):
        save_cube(cube, tmp_path)


# --- normalization -----------------------------------------------------------

def test_normalize_affine_endpoints():
    data = np.array([0.0, 5.0, 10.0], dtype=np.float32).reshape(1, 1, 3)
    cube = HsiCube(3, 1, 1, data)
    normed, stats = normalize_cube(cube)
    assert np.allclose(normed.data.reshape(-1), [-1.0, 0.0, 1.0])
    assert stats.band_min[0] == 0.0 and stats.band_max[0] == 10.0


def test_normalize_constant_band_is_zero():
    data = np.full((1, 1, 3), 3.0, dtype=np.float32)
    cube = HsiCube(3, 1, 1, data)
    normed, stats = normalize_cube(cube)
    assert np.all(normed.data == 0.0)
    assert stats.band_min[0] == stats.band_max[0] == 3.0
    restored = denormalize_cube(normed, stats)
    assert np.all(restored.data == 3.0)


def test_denormalize_known_values():
    normed = HsiCube(3, 1, 1,
                     np.array([-1.0, 0.0, 1.0], dtype=np.float32).reshape(1, 1, 3))
    stats = NormStats(np.array([0.0]), np.array([10.0]))
    restored = denormalize_cube(normed, stats)
    assert np.allclose(restored.data.reshape(-1), [0.0, 5.0, 10.0])


def test_denormalize_band_mismatch():
    cube = HsiCube(2, 2, 2, np.zeros((2, 2, 2), dtype=np.float32))
    stats = NormStats(np.zeros(3), np.ones(3))
    with pytest.raises(ShapeError):
        denormalize_cube(cube, stats)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_normalize_roundtrip_property(seed):
    rng = np.random.default_rng(seed)
    w, h, bands = (int(rng.integers(1, 9)) for _ in range(3))
    cube = HsiCube(w, h, bands,
                   rng.normal(scale=10.0, size=(bands, h, w)).astype(np.float32))
    normed, stats = normalize_cube(cube)
    assert normed.data.min() >= -1.0 and normed.data.max() <= 1.0
    restored = denormalize_cube(normed, stats)
    scale = np.abs(cube.data) + 1.0
    assert np.all(np.abs(restored.data - cube.data) / scale < 1e-5)


# --- masks -------------------------------------------------------------------

def test_mask_binarizes_labels():
    labels = np.array([[0, 1], [7, 255]], dtype=np.uint8)
    mask = Mask(2, 2, labels)
    assert mask.labels.tolist() == [[0, 1], [1, 1]]
    assert mask.anomaly_count == 3


def test_mask_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    labels = (rng.random((6, 5)) > 0.6).astype(np.uint8)
    mask = Mask(5, 6, labels)
    path = tmp_path / "m.pgm"
    save_mask(mask, path)
    back = load_mask(path)
    assert np.array_equal(back.labels, mask.labels)
    save_mask(mask, tmp_path / "m2.pgm")
    assert path.read_bytes() == (tmp_path / "m2.pgm").read_bytes()


def test_mask_nonzero_rule(tmp_path):
    body = bytes([0, 1, 255, 42])
    (tmp_path / "m.pgm").write_bytes(b"P5\n4 1\n255\n" + body)
    mask = load_mask(tmp_path / "m.pgm")
    assert mask.labels.reshape(-1).tolist() == [0, 1, 1, 1]


def test_all_zero_mask(tmp_path):
    (tmp_path / "m.pgm").write_bytes(b"P5\n3 2\n255\n" + bytes(6))
    assert load_mask(tmp_path / "m.pgm").anomaly_count == 0


def test_pgm_comments_are_skipped(tmp_path):
    (tmp_path / "m.pgm").write_bytes(b"P5\n# made by hand\n2 1\n255\n" + bytes([0, 9]))
    mask = load_mask(tmp_path / "m.pgm")
    assert mask.labels.reshape(-1).tolist() == [0, 1]


def test_pgm_rejects_ascii_variant(tmp_path):
    (tmp_path / "m.pgm").write_bytes(b"P2\n2 1\n255\n0 1\n")
    with pytest.raises(FormatError):
        load_mask(tmp_path / "m.pgm")


def test_pgm_rejects_wide_maxval(tmp_path):
    (tmp_path / "m.pgm").write_bytes(b"P5\n2 1\n65535\n" + bytes(4))
    with pytest.raises(FormatError):
        load_mask(tmp_path / "m.pgm")


def test_pgm_rejects_truncated_body(tmp_path):
    (tmp_path / "m.pgm").write_bytes(b"P5\n4 4\n255\n" + bytes(7))
    with pytest.raises(DataError):
        load_mask(tmp_path / "m.pgm")


def test_gray_pgm_writer(tmp_path):
    img = np.arange(6, dtype=np.uint8).reshape(2, 3)
    save_gray_pgm(img, tmp_path / "g.pgm")
    raw = (tmp_path / "g.pgm").read_bytes()
    assert raw == b"P5\n3 2\n255\n" + img.tobytes()
