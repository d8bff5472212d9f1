"""Sequential network container, seeded initialization, and the GANRX-NN1
model file format.

Model file layout: 9-byte magic ``GANRX-NN1``, a u32 little-endian header
length, a JSON header describing the layer specs, then every layer's arrays
as float32 little-endian in layer order (trainable parameters first, then
running statistics).
"""

import json
from dataclasses import asdict

import numpy as np

from ..errors import FormatError, ShapeError, StateError
from .layers import LayerSpec, Tensor, build_layer

NN_MAGIC = b"GANRX-NN1"
NN_VERSION = 1


def _check_channel_flow(specs):
    """Validate that adjacent layers agree on channel/feature counts where
    that is decidable without knowing the input length."""
    channels = None
    for spec in specs:
        if spec.kind in ("conv1d", "deconv1d"):
            if channels is not None and channels != spec.in_channels:
                raise ShapeError(
                    f"{spec.kind} expects {spec.in_channels} channels but the "
                    f"previous layer produces {channels}"
                )
            channels = spec.out_channels
        elif spec.kind == "batchnorm":
            if channels is not None and channels != spec.in_channels:
                raise ShapeError(
                    f"batchnorm over {spec.in_channels} channels after a layer "
                    f"producing {channels}"
                )
        elif spec.kind == "affine":
            if channels is not None and channels != spec.in_channels:
                raise ShapeError(
                    f"affine expects {spec.in_channels} features but gets {channels}"
                )
            channels = spec.out_channels
        elif spec.kind == "flatten":
            channels = None  # features become channels * length, length unknown here


class Network:
    """An ordered stack of layers sharing flat parameter/gradient buffers.

    All trainable values live in one contiguous vector (``param_vector``)
    with per-layer tensors as views into it, so optimizers can treat the
    whole network as a single parameter array.
    """

    def __init__(self, specs, dtype=np.float32):
        specs = [s if isinstance(s, LayerSpec) else LayerSpec(**s) for s in specs]
        if not specs:
            raise ShapeError("a network needs at least one layer")
        _check_channel_flow(specs)
        self.specs = specs
        self.layers = [build_layer(s) for s in specs]
        self.dtype = np.dtype(dtype)
        self.training = True
        self._alloc()

    def _alloc(self):
        total = 0
        for layer in self.layers:
            total += sum(int(np.prod(shape)) for _, shape in layer.param_shapes())
        self._pbuf = np.zeros(total, dtype=self.dtype)
        self._gbuf = np.zeros(total, dtype=self.dtype)
        offset = 0
        for layer in self.layers:
            layer.params = {}
            for name, shape in layer.param_shapes():
                n = int(np.prod(shape))
                layer.params[name] = Tensor(
                    self._pbuf[offset : offset + n].reshape(shape),
                    self._gbuf[offset : offset + n].reshape(shape),
                )
                offset += n
            layer.state = {
                name: np.zeros(shape, dtype=self.dtype)
                for name, shape in layer.state_shapes()
            }

    @property
    def param_vector(self) -> np.ndarray:
        return self._pbuf

    @property
    def grad_vector(self) -> np.ndarray:
        return self._gbuf

    @property
    def n_params(self) -> int:
        return self._pbuf.size

    def train(self):
        self.training = True
        return self

    def eval(self):
        self.training = False
        return self

    def zero_grad(self):
        self._gbuf[...] = 0.0

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=self.dtype)
        for layer in self.layers:
            x = layer.forward(x, self.training)
        return x

    def backward(self, gy: np.ndarray, param_grads: bool = True) -> np.ndarray:
        """Propagate an upstream gradient through the stack, accumulating
        parameter gradients unless ``param_grads`` is False; returns the
        gradient w.r.t. the network input."""
        if not self.training:
            raise StateError("backward called on a network in eval mode")
        gy = np.asarray(gy, dtype=self.dtype)
        for layer in reversed(self.layers):
            gy = layer.backward(gy, param_grads)
        return gy

    def to_dtype(self, dtype) -> "Network":
        """Convert parameters, gradients and running stats in place; clears
        layer caches."""
        dtype = np.dtype(dtype)
        if dtype == self.dtype:
            return self
        old_p = self._pbuf
        old_states = [dict(layer.state) for layer in self.layers]
        self.dtype = dtype
        self._alloc()
        self._pbuf[...] = old_p.astype(dtype)
        for layer, saved in zip(self.layers, old_states):
            for name, arr in saved.items():
                layer.state[name][...] = arr.astype(dtype)
        return self

    def state_arrays(self):
        """All running-stat arrays in serialization order."""
        out = []
        for layer in self.layers:
            for name, _ in layer.state_shapes():
                out.append(layer.state[name])
        return out


def init_network(specs, seed: int, dtype=np.float32) -> Network:
    """Build a network and initialize it deterministically from ``seed``:
    conv/deconv/affine weights ~ N(0, 0.02^2), biases 0, batchnorm gamma=1,
    beta=0, running stats (0, 1)."""
    net = Network(specs, dtype=dtype)
    rng = np.random.Generator(np.random.PCG64(seed))
    for layer in net.layers:
        layer.init_params(rng)
    return net


def save_network(net: Network, path) -> None:
    """Serialize a network to the GANRX-NN1 format (atomically)."""
    from ..ioutil import atomic_write

    header = json.dumps(
        {"version": NN_VERSION, "layers": [asdict(s) for s in net.specs]},
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")
    chunks = [NN_MAGIC, np.uint32(len(header)).astype("<u4").tobytes(), header]
    for layer in net.layers:
        for name, _ in layer.param_shapes():
            chunks.append(layer.params[name].data.astype("<f4").tobytes())
        for name, _ in layer.state_shapes():
            chunks.append(layer.state[name].astype("<f4").tobytes())
    atomic_write(path, b"".join(chunks))


def load_network(path) -> Network:
    """Read a GANRX-NN1 file; the returned network is in eval mode."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[: len(NN_MAGIC)] != NN_MAGIC:
        raise FormatError(f"{path}: not a GANRX-NN1 model file")
    pos = len(NN_MAGIC)
    if len(raw) < pos + 4:
        raise FormatError(f"{path}: truncated header length")
    hlen = int(np.frombuffer(raw[pos : pos + 4], dtype="<u4")[0])
    pos += 4
    if len(raw) < pos + hlen:
        raise FormatError(f"{path}: truncated header")
    try:
        header = json.loads(raw[pos : pos + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: unreadable model header") from exc
    pos += hlen
    if header.get("version") != NN_VERSION:
        raise FormatError(
            f"{path}: unsupported model version {header.get('version')!r}"
        )
    try:
        specs = [LayerSpec(**d) for d in header["layers"]]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{path}: malformed layer specs") from exc

    net = Network(specs, dtype=np.float32)
    body = raw[pos:]
    offset = 0

    def take(shape):
        nonlocal offset
        n = int(np.prod(shape)) * 4
        if offset + n > len(body):
            raise FormatError(f"{path}: parameter payload truncated")
        arr = np.frombuffer(body[offset : offset + n], dtype="<f4").reshape(shape)
        offset += n
        return arr

    for layer in net.layers:
        for name, shape in layer.param_shapes():
            layer.params[name].data[...] = take(shape)
        for name, shape in layer.state_shapes():
            layer.state[name][...] = take(shape)
    if offset != len(body):
        raise FormatError(f"{path}: {len(body) - offset} trailing bytes")
    return net.eval()
