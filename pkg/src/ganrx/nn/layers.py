"""Layer zoo for the sequential network core.

All layers operate on numpy arrays; 3-D activations are [batch, channels,
length] and 2-D activations are [batch, features]. Each layer caches what its
backward pass needs during a train-mode forward; backward accumulates into
the parameter gradient buffers and returns the input gradient.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..errors import DataError, ShapeError, StateError

KINDS = (
    "conv1d",
    "deconv1d",
    "batchnorm",
    "leaky_relu",
    "tanh",
    "sigmoid",
    "affine",
    "flatten",
    "global_avg",
    "pad_reflect",
    "crop",
)

BN_EPS = 1e-5
BN_MOMENTUM = 0.9  # running = momentum * running + (1 - momentum) * batch


@dataclass(frozen=True)
class LayerSpec:
    """Declarative description of one layer.

    Field use by kind: conv1d/deconv1d use kernel/stride/padding and the
    channel pair; affine uses in_channels/out_channels as feature counts;
    batchnorm uses in_channels; leaky_relu uses negative_slope; pad_reflect
    pads the last axis up to the next multiple of ``length``; crop keeps the
    first ``length`` positions. Remaining kinds are parameter-free.
    """

    kind: str
    kernel: int = 1
    stride: int = 1
    padding: int = 0
    in_channels: int = 1
    out_channels: int = 1
    negative_slope: float = 0.2
    length: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ShapeError(f"unknown layer kind {self.kind!r}")
        if self.kernel < 1 or self.stride < 1:
            raise ShapeError("kernel and stride must be >= 1")
        if self.padding < 0:
            raise ShapeError("padding must be >= 0")
        if self.in_channels < 1 or self.out_channels < 1:
            raise ShapeError("channel counts must be >= 1")
        if self.kind in ("pad_reflect", "crop") and self.length < 1:
            raise ShapeError(f"{self.kind} requires length >= 1")


class Tensor:
    """A float array paired with a same-shape gradient buffer."""

    __slots__ = ("data", "grad")

    def __init__(self, data: np.ndarray, grad: np.ndarray):
        if data.shape != grad.shape:
            raise ShapeError("tensor data/grad shapes differ")
        self.data = data
        self.grad = grad

    @property
    def shape(self):
        return self.data.shape


def _require_3d(x, channels, kind):
    if x.ndim != 3:
        raise ShapeError(f"{kind} expects [B, C, L] input, got shape {x.shape}")
    if x.shape[1] != channels:
        raise ShapeError(
            f"{kind} expects {channels} channels, got {x.shape[1]}"
        )


class Layer:
    """Base: parameter-free, shape-preserving. Subclasses override as needed.

    ``param_shapes`` lists trainable arrays (name, shape) in serialization
    order; ``state_shapes`` lists non-trainable arrays (running stats).
    """

    def __init__(self, spec: LayerSpec):
        self.spec = spec
        self.params: dict[str, Tensor] = {}
        self.state: dict[str, np.ndarray] = {}
        self._cache = None

    def param_shapes(self):
        return []

    def state_shapes(self):
        return []

    def init_params(self, rng: np.random.Generator):
        pass

    def out_len(self, length: int) -> int:
        return length

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        raise NotImplementedError

    def backward(self, gy: np.ndarray, param_grads: bool = True) -> np.ndarray:
        """Input gradient; accumulates parameter gradients unless
        ``param_grads`` is False (used when only upstream gradients are
        needed, e.g. pushing adversarial gradients through a frozen net)."""
        raise NotImplementedError

    def _need_cache(self):
        if self._cache is None:
            raise StateError(
                f"{self.spec.kind}: backward requires a preceding train-mode forward"
            )
        return self._cache


def _init_normal(rng, tensor, std=0.02):
    tensor.data[...] = rng.normal(0.0, std, size=tensor.shape)


class Conv1d(Layer):
    def param_shapes(self):
        s = self.spec
        return [("w", (s.out_channels, s.in_channels, s.kernel)), ("b", (s.out_channels,))]

    def init_params(self, rng):
        _init_normal(rng, self.params["w"])
        self.params["b"].data[...] = 0.0

    def out_len(self, length):
        s = self.spec
        out = (length + 2 * s.padding - s.kernel) // s.stride + 1
        if length + 2 * s.padding - s.kernel < 0 or out < 1:
            raise ShapeError(
                f"conv1d: input length {length} too short for kernel "
                f"{s.kernel}/stride {s.stride}/padding {s.padding}"
            )
        return out

    def forward(self, x, train):
        s = self.spec
        _require_3d(x, s.in_channels, "conv1d")
        B, C, L = x.shape
        K, S = s.kernel, s.stride
        Lout = self.out_len(L)
        if s.padding:
            xp = np.zeros((B, C, L + 2 * s.padding), dtype=x.dtype)
            xp[:, :, s.padding : s.padding + L] = x
        else:
            xp = x
        # one GEMM over all taps: columns gather the K-window under each
        # output position, so y = W[O, C*K] @ col[C*K, B*Lout]
        st = xp.strides
        windows = np.lib.stride_tricks.as_strided(
            xp, shape=(B, C, K, Lout), strides=(st[0], st[1], st[2], st[2] * S)
        )
        col = windows.transpose(1, 2, 0, 3).reshape(C * K, B * Lout)
        y = self.params["w"].data.reshape(s.out_channels, C * K) @ col
        y += self.params["b"].data[:, None]
        y = np.ascontiguousarray(
            y.reshape(s.out_channels, B, Lout).transpose(1, 0, 2)
        )
        self._cache = (col, xp.shape, L, Lout) if train else None
        return y

    def backward(self, gy, param_grads=True):
        col, xp_shape, L, Lout = self._need_cache()
        s = self.spec
        K, S, C, O = s.kernel, s.stride, s.in_channels, s.out_channels
        B = gy.shape[0]
        g2 = np.ascontiguousarray(gy.transpose(1, 0, 2)).reshape(O, B * Lout)
        if param_grads:
            self.params["b"].grad += g2.sum(axis=1)
            self.params["w"].grad += (g2 @ col.T).reshape(O, C, K)
        gcol = self.params["w"].data.reshape(O, C * K).T @ g2
        gwin = gcol.reshape(C, K, B, Lout).transpose(2, 0, 1, 3)
        gxp = np.zeros(xp_shape, dtype=gy.dtype)
        for k in range(K):  # windows overlap when stride < kernel
            gxp[:, :, k : k + S * Lout : S] += gwin[:, :, k, :]
        if s.padding:
            return gxp[:, :, s.padding : s.padding + L]
        return gxp


class Deconv1d(Layer):
    """Transposed convolution; weight layout [in_channels, out_channels, K]."""

    def param_shapes(self):
        s = self.spec
        return [("w", (s.in_channels, s.out_channels, s.kernel)), ("b", (s.out_channels,))]

    def init_params(self, rng):
        _init_normal(rng, self.params["w"])
        self.params["b"].data[...] = 0.0

    def out_len(self, length):
        s = self.spec
        out = (length - 1) * s.stride - 2 * s.padding + s.kernel
        if out < 1:
            raise ShapeError(
                f"deconv1d: input length {length} yields non-positive output"
            )
        return out

    def forward(self, x, train):
        s = self.spec
        _require_3d(x, s.in_channels, "deconv1d")
        B, C, L = x.shape
        K, S, O = s.kernel, s.stride, s.out_channels
        Lout = self.out_len(L)
        Lfull = (L - 1) * S + K
        x2 = np.ascontiguousarray(x.transpose(1, 0, 2)).reshape(C, B * L)
        taps = self.params["w"].data.reshape(C, O * K).T @ x2  # [O*K, B*L]
        spread = taps.reshape(O, K, B, L).transpose(2, 0, 1, 3)
        yfull = np.zeros((B, O, Lfull), dtype=x.dtype)
        for k in range(K):  # taps overlap when stride < kernel
            yfull[:, :, k : k + S * L : S] += spread[:, :, k, :]
        y = yfull[:, :, s.padding : s.padding + Lout] + self.params["b"].data[None, :, None]
        self._cache = (x2, B, L, Lout, Lfull) if train else None
        return y

    def backward(self, gy, param_grads=True):
        x2, B, L, Lout, Lfull = self._need_cache()
        s = self.spec
        K, S, C, O = s.kernel, s.stride, s.in_channels, s.out_channels
        gyfull = np.zeros((B, O, Lfull), dtype=gy.dtype)
        gyfull[:, :, s.padding : s.padding + Lout] = gy
        st = gyfull.strides
        windows = np.lib.stride_tricks.as_strided(
            gyfull, shape=(B, O, K, L), strides=(st[0], st[1], st[2], st[2] * S)
        )
        col = windows.transpose(1, 2, 0, 3).reshape(O * K, B * L)
        if param_grads:
            self.params["b"].grad += gy.sum(axis=(0, 2))
            self.params["w"].grad += (x2 @ col.T).reshape(C, O, K)
        gx2 = self.params["w"].data.reshape(C, O * K) @ col
        return np.ascontiguousarray(gx2.reshape(C, B, L).transpose(1, 0, 2))


class BatchNorm(Layer):
    """Per-channel batch normalization over the (batch, position) axes."""

    def param_shapes(self):
        c = self.spec.in_channels
        return [("gamma", (c,)), ("beta", (c,))]

    def state_shapes(self):
        c = self.spec.in_channels
        return [("running_mean", (c,)), ("running_var", (c,))]

    def init_params(self, rng):
        self.params["gamma"].data[...] = 1.0
        self.params["beta"].data[...] = 0.0
        self.state["running_mean"][...] = 0.0
        self.state["running_var"][...] = 1.0

    def forward(self, x, train):
        _require_3d(x, self.spec.in_channels, "batchnorm")
        gamma = self.params["gamma"].data
        beta = self.params["beta"].data
        if train:
            if x.shape[0] < 2:
                raise DataError("batchnorm requires batch size >= 2 in train mode")
            M = x.shape[0] * x.shape[2]
            mean = np.einsum("bcl->c", x) / M
            xc = x - mean[None, :, None]
            var = np.einsum("bcl,bcl->c", xc, xc) / M
            self.state["running_mean"][...] = (
                BN_MOMENTUM * self.state["running_mean"] + (1.0 - BN_MOMENTUM) * mean
            )
            self.state["running_var"][...] = (
                BN_MOMENTUM * self.state["running_var"] + (1.0 - BN_MOMENTUM) * var
            )
        else:
            mean = self.state["running_mean"]
            var = self.state["running_var"]
            xc = x - mean[None, :, None]
        inv = 1.0 / np.sqrt(var + np.asarray(BN_EPS, dtype=x.dtype))
        xhat = xc * inv[None, :, None]
        y = gamma[None, :, None] * xhat + beta[None, :, None]
        self._cache = (xhat, inv) if train else None
        return y

    def backward(self, gy, param_grads=True):
        xhat, inv = self._need_cache()
        gamma = self.params["gamma"].data
        M = gy.shape[0] * gy.shape[2]
        sum_gy = np.einsum("bcl->c", gy)
        sum_gyx = np.einsum("bcl,bcl->c", gy, xhat)
        if param_grads:
            self.params["gamma"].grad += sum_gyx
            self.params["beta"].grad += sum_gy
        coef = gamma * inv / M
        return (coef[None, :, None] * (M * gy - sum_gy[None, :, None]
                                       - xhat * sum_gyx[None, :, None]))


class LeakyReLU(Layer):
    def forward(self, x, train):
        fac = np.where(x >= 0, np.asarray(1.0, dtype=x.dtype),
                       np.asarray(self.spec.negative_slope, dtype=x.dtype))
        y = x * fac
        self._cache = fac if train else None
        return y

    def backward(self, gy, param_grads=True):
        return gy * self._need_cache()


class Tanh(Layer):
    def forward(self, x, train):
        y = np.tanh(x)
        self._cache = y if train else None
        return y

    def backward(self, gy, param_grads=True):
        y = self._need_cache()
        return gy * (1.0 - y * y)


class Sigmoid(Layer):
    def forward(self, x, train):
        y = expit(x)
        self._cache = y if train else None
        return y

    def backward(self, gy, param_grads=True):
        y = self._need_cache()
        return gy * y * (1.0 - y)


class Affine(Layer):
    """Fully connected layer on [B, in_features] inputs."""

    def param_shapes(self):
        s = self.spec
        return [("w", (s.in_channels, s.out_channels)), ("b", (s.out_channels,))]

    def init_params(self, rng):
        _init_normal(rng, self.params["w"])
        self.params["b"].data[...] = 0.0

    def forward(self, x, train):
        if x.ndim != 2 or x.shape[1] != self.spec.in_channels:
            raise ShapeError(
                f"affine expects [B, {self.spec.in_channels}], got {x.shape}"
            )
        y = x @ self.params["w"].data + self.params["b"].data[None, :]
        self._cache = x if train else None
        return y

    def backward(self, gy, param_grads=True):
        x = self._need_cache()
        if param_grads:
            self.params["w"].grad += x.T @ gy
            self.params["b"].grad += gy.sum(axis=0)
        return gy @ self.params["w"].data.T


class Flatten(Layer):
    def forward(self, x, train):
        if x.ndim != 3:
            raise ShapeError(f"flatten expects [B, C, L], got {x.shape}")
        self._cache = x.shape if train else None
        return x.reshape(x.shape[0], -1)

    def backward(self, gy, param_grads=True):
        return gy.reshape(self._need_cache())


class GlobalAvgPool(Layer):
    """Mean over the position axis: [B, C, L] -> [B, C]."""

    def forward(self, x, train):
        if x.ndim != 3:
            raise ShapeError(f"global_avg expects [B, C, L], got {x.shape}")
        self._cache = x.shape if train else None
        return x.mean(axis=2)

    def backward(self, gy, param_grads=True):
        B, C, L = self._need_cache()
        return np.broadcast_to(gy[:, :, None], (B, C, L)) / np.asarray(L, gy.dtype)


class ReflectPadTo(Layer):
    """Right-reflect-pad the position axis up to the next multiple of
    ``spec.length``. Reflection excludes the edge sample, so the pad amount
    must be <= L - 1."""

    def out_len(self, length):
        m = self.spec.length
        return -(-length // m) * m

    def forward(self, x, train):
        if x.ndim != 3:
            raise ShapeError(f"pad_reflect expects [B, C, L], got {x.shape}")
        L = x.shape[2]
        pad = self.out_len(L) - L
        if pad > L - 1:
            raise ShapeError(
                f"pad_reflect: cannot reflect {pad} positions from length {L}"
            )
        if pad:
            stop = L - 2 - pad  # one before the last reflected sample
            y = np.empty((x.shape[0], x.shape[1], L + pad), dtype=x.dtype)
            y[:, :, :L] = x
            y[:, :, L:] = x[:, :, L - 2 : (stop if stop >= 0 else None) : -1]
        else:
            y = x.copy()
        self._cache = (L, pad) if train else None
        return y

    def backward(self, gy, param_grads=True):
        L, pad = self._need_cache()
        gx = gy[:, :, :L].copy()
        for j in range(pad):
            gx[:, :, L - 2 - j] += gy[:, :, L + j]
        return gx


class Crop(Layer):
    """Keep the first ``spec.length`` positions of the last axis."""

    def out_len(self, length):
        if self.spec.length > length:
            raise ShapeError(
                f"crop to {self.spec.length} exceeds input length {length}"
            )
        return self.spec.length

    def forward(self, x, train):
        if x.ndim != 3:
            raise ShapeError(f"crop expects [B, C, L], got {x.shape}")
        self.out_len(x.shape[2])
        self._cache = x.shape if train else None
        return x[:, :, : self.spec.length].copy()

    def backward(self, gy, param_grads=True):
        shape = self._need_cache()
        gx = np.zeros(shape, dtype=gy.dtype)
        gx[:, :, : self.spec.length] = gy
        return gx


_LAYER_CLASSES = {
    "conv1d": Conv1d,
    "deconv1d": Deconv1d,
    "batchnorm": BatchNorm,
    "leaky_relu": LeakyReLU,
    "tanh": Tanh,
    "sigmoid": Sigmoid,
    "affine": Affine,
    "flatten": Flatten,
    "global_avg": GlobalAvgPool,
    "pad_reflect": ReflectPadTo,
    "crop": Crop,
}


def build_layer(spec: LayerSpec) -> Layer:
    return _LAYER_CLASSES[spec.kind](spec)
