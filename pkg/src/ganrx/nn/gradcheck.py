"""Central finite-difference verification of every layer's backward pass.

For each layer kind we build random single-layer networks at float64, take
loss = sum(forward(x) * R) for a fixed random R, and compare the analytic
gradients (parameters and input) against (f(t+h) - f(t-h)) / 2h. The
reported error is |analytic - numeric| / max(1, |analytic|, |numeric|),
maximized over every component of every case.
"""

from dataclasses import dataclass

import numpy as np

from .layers import KINDS, LayerSpec
from .network import init_network

FD_STEP = 1e-4
TOLERANCE = 1e-4


@dataclass
class GradCheckResult:
    kind: str
    cases: int
    max_rel_err: float
    tolerance: float = TOLERANCE

    @property
    def passed(self) -> bool:
        return self.max_rel_err < self.tolerance


def _random_case(kind: str, rng: np.random.Generator):
    """Random (spec, input) for a single layer of the given kind; shapes stay
    small (B <= 4, C <= 8, L <= 32) so finite differencing is fast."""
    B = int(rng.integers(1, 5))
    C = int(rng.integers(1, 9))
    L = int(rng.integers(4, 33))
    if kind == "conv1d":
        spec = LayerSpec(kind, kernel=int(rng.integers(1, 5)),
                         stride=int(rng.integers(1, 4)),
                         padding=int(rng.integers(0, 3)),
                         in_channels=C, out_channels=int(rng.integers(1, 9)))
        x = rng.standard_normal((B, C, L))
    elif kind == "deconv1d":
        K = int(rng.integers(1, 5))
        S = int(rng.integers(1, 4))
        max_pad = ((L - 1) * S + K - 1) // 2
        P = int(rng.integers(0, min(2, max_pad) + 1))
        spec = LayerSpec(kind, kernel=K, stride=S, padding=P,
                         in_channels=C, out_channels=int(rng.integers(1, 9)))
        x = rng.standard_normal((B, C, L))
    elif kind == "batchnorm":
        B = int(rng.integers(2, 5))
        spec = LayerSpec(kind, in_channels=C)
        x = rng.standard_normal((B, C, L))
    elif kind == "leaky_relu":
        spec = LayerSpec(kind, negative_slope=float(rng.choice([0.0, 0.2, 0.5, 1.0])))
        x = rng.standard_normal((B, C, L))
        # keep inputs away from the kink at 0 so the FD oracle is valid
        side = np.where(x >= 0, 1.0, -1.0)
        x = np.where(np.abs(x) < 0.05, x + 0.1 * side, x)
    elif kind == "affine":
        spec = LayerSpec(kind, in_channels=int(rng.integers(1, 17)),
                         out_channels=int(rng.integers(1, 9)))
        x = rng.standard_normal((B, spec.in_channels))
    elif kind == "pad_reflect":
        M = int(rng.choice([4, 8]))
        L = int(rng.integers(3 if M == 4 else 5, 33))
        spec = LayerSpec(kind, length=M)
        x = rng.standard_normal((B, C, L))
    elif kind == "crop":
        spec = LayerSpec(kind, length=int(rng.integers(1, L + 1)))
        x = rng.standard_normal((B, C, L))
    else:  # tanh, sigmoid, flatten, global_avg
        spec = LayerSpec(kind)
        x = rng.standard_normal((B, C, L))
    return spec, x


def _fd_direction(loss, vec, j, h):
    orig = vec[j]
    vec[j] = orig + h
    lp = loss()
    vec[j] = orig - h
    lm = loss()
    vec[j] = orig
    return (lp - lm) / (2.0 * h)


def gradcheck_layer(kind: str, n_cases: int = 20, seed: int = 0,
                    h: float = FD_STEP) -> GradCheckResult:
    """Run ``n_cases`` random finite-difference checks for one layer kind."""
    rng = np.random.Generator(np.random.PCG64(seed))
    worst = 0.0
    for _ in range(n_cases):
        spec, x = _random_case(kind, rng)
        net = init_network([spec], seed=int(rng.integers(2**31)), dtype=np.float64)
        net.train()
        R = rng.standard_normal(net.forward(x).shape)

        net.zero_grad()
        net.forward(x)
        gx = net.backward(R)
        analytic_p = net.grad_vector.copy()

        def loss():
            return float((net.forward(x) * R).sum())

        pvec = net.param_vector
        for j in range(pvec.size):
            num = _fd_direction(loss, pvec, j, h)
            rel = abs(analytic_p[j] - num) / max(1.0, abs(analytic_p[j]), abs(num))
            worst = max(worst, rel)

        xflat = x.reshape(-1)
        gxflat = gx.reshape(-1)
        for j in range(xflat.size):
            num = _fd_direction(loss, xflat, j, h)
            rel = abs(gxflat[j] - num) / max(1.0, abs(gxflat[j]), abs(num))
            worst = max(worst, rel)
    return GradCheckResult(kind=kind, cases=n_cases, max_rel_err=worst)


def run_gradchecks(kinds=KINDS, n_cases: int = 20, seed: int = 0):
    """Gradcheck every layer kind once; returns one result per kind."""
    return [gradcheck_layer(k, n_cases=n_cases, seed=seed + i)
            for i, k in enumerate(kinds)]
