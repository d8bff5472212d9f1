"""Rebuild the committed golden files in tests/fixtures.

The format-stability tests compare current serializer output byte-for-byte
against these files, so regenerate them only after a deliberate format
change and review the diff:

    python3 tests/make_fixtures.py
"""

import tempfile
from pathlib import Path

import numpy as np

from ganrx.detect import ScoreMap, save_score_map
from ganrx.evaluation import MethodSummary, report_csv, roc_csv, roc_curve
from ganrx.gan import TrainMetrics, metrics_csv
from ganrx.hsi import HsiCube, Mask, save_cube, save_gray_pgm, save_mask
from ganrx.nn.layers import LayerSpec
from ganrx.nn.network import Network, save_network

FIXTURES = Path(__file__).resolve().parent / "fixtures"


def golden_cube() -> HsiCube:
    values = [
        0.0, 1.0, -1.0, 0.5, 2.75, -3.125,
        10.0, 1e-3, 123.456, -0.001953125, 7.5, 0.25,
        -2.0, 4.5, 99.0, 0.125, -0.75, 6.0,
        1e6, -1e-6, 3.14159274, 42.0, -273.15, 0.0078125,
    ]
    data = np.array(values, dtype=np.float32).reshape(4, 2, 3)
    return HsiCube(3, 2, 4, data)


def golden_mask() -> Mask:
    labels = np.array([[0, 1, 0, 0],
                       [1, 1, 0, 0],
                       [0, 0, 0, 1]], dtype=np.uint8)
    return Mask(4, 3, labels)


def golden_scores() -> ScoreMap:
    return ScoreMap(3, 2, np.array([[0.0, 1.5, 3.0],
                                    [4.5, 6.0, 12.0]]))


def golden_network() -> Network:
    net = Network([
        LayerSpec("conv1d", kernel=3, stride=2, padding=1,
                  in_channels=1, out_channels=2),
        LayerSpec("batchnorm", in_channels=2),
        LayerSpec("leaky_relu", negative_slope=0.2),
        LayerSpec("deconv1d", kernel=4, stride=2, padding=1,
                  in_channels=2, out_channels=1),
        LayerSpec("tanh"),
        LayerSpec("crop", length=6),
    ])
    net.param_vector[...] = (np.arange(net.n_params) - 10.0) / 8.0
    bn = net.layers[1]
    bn.state["running_mean"][...] = [0.25, -0.5]
    bn.state["running_var"][...] = [1.5, 0.75]
    return net.eval()


def golden_roc():
    scores = np.array([3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0])
    labels = np.array([0, 0, 0, 1, 0, 1, 0, 1])
    return roc_curve(scores, labels)


def golden_summaries():
    curve = golden_roc()
    return [
        MethodSummary("rx", 0.512345678, 0.0, 1, np.array([0.512345678]), curve),
        MethodSummary("gan-rx", 0.987654321, 0.00123456789, 3,
                      np.array([0.99, 0.985, 0.988]), curve),
    ]


def golden_history():
    return [TrainMetrics(0, 1.375, 0.5, 0.25, 3.0),
            TrainMetrics(1, 1.0, 0.662912607, 0.125, 1.912912607)]


def render_all() -> dict:
    """Serialize every golden object; returns {filename: bytes}."""
    out = {
        "golden_roc.csv": roc_csv(golden_roc()),
        "golden_report.csv": report_csv(golden_summaries()),
        "golden_metrics.csv": metrics_csv(golden_history()),
    }
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        save_cube(golden_cube(), tmp / "c.hsc")
        out["golden.hsc"] = (tmp / "c.hsc").read_bytes()
        save_mask(golden_mask(), tmp / "m.pgm")
        out["golden_mask.pgm"] = (tmp / "m.pgm").read_bytes()
        save_score_map(golden_scores(), tmp / "s.hsc", tmp / "s.pgm")
        out["golden_scores.hsc"] = (tmp / "s.hsc").read_bytes()
        out["golden_scores.pgm"] = (tmp / "s.pgm").read_bytes()
        save_gray_pgm(np.array([[0, 128, 255]], dtype=np.uint8), tmp / "g.pgm")
        out["golden_gray.pgm"] = (tmp / "g.pgm").read_bytes()
        save_network(golden_network(), tmp / "n.nn")
        out["golden_model.nn"] = (tmp / "n.nn").read_bytes()
    return out


def main():
    FIXTURES.mkdir(exist_ok=True)
    for name, blob in sorted(render_all().items()):
        path = FIXTURES / name
        path.write_bytes(blob)
        print(f"wrote {path} ({len(blob)} bytes)")


if __name__ == "__main__":
    main()
