"""Adversarially trained background reconstructor.

The generator is a 1-D convolutional encoder/decoder over the spectral axis
(channels 1-16-32-64, kernel 4, stride 2, padding 1, mirrored decoder ending
in tanh); the discriminator reuses the encoder topology and emits a
probability through global average pooling, an affine head and a sigmoid.
Spectra are reflect-padded to the next multiple of 8 inside the network and
cropped back on the way out, so callers only ever see length-L vectors.

Training alternates a discriminator ascent step on real-vs-reconstructed
batches with a generator step that combines the non-saturating adversarial
term -log D(G(s)) and an L1 reconstruction penalty weighted by ``alpha``.
"""

import io
from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericError, ShapeError
from .hsi import HsiCube
from .ioutil import atomic_write
from .nn import LayerSpec, Network, adam_step, init_adam, init_network
from .rng import derive_seed, stream

PROB_CLAMP = 1e-7  # keeps BCE finite at saturated probabilities


@dataclass
class GanHyper:
    """Training hyperparameters; defaults are the desk-scale settings."""

    alpha: float = 10.0
    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    batch_size: int = 64
    epochs: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.alpha < 0:
            raise DataError("alpha must be >= 0")
        if self.lr <= 0:
            raise DataError("learning rate must be > 0")
        if self.batch_size < 2:
            raise DataError("batch_size must be >= 2")
        if self.epochs < 1:
            raise DataError("epochs must be >= 1")


@dataclass
class TrainMetrics:
    """Per-epoch loss summary."""

    epoch: int
    d_loss: float
    g_adv: float
    l1: float
    total: float


def _encoder_blocks():
    blocks = []
    channels = [1, 16, 32, 64]
    for cin, cout in zip(channels, channels[1:]):
        blocks += [
            LayerSpec("conv1d", kernel=4, stride=2, padding=1,
                      in_channels=cin, out_channels=cout),
            LayerSpec("batchnorm", in_channels=cout),
            LayerSpec("leaky_relu", negative_slope=0.2),
        ]
    return blocks


def generator_specs(bands: int):
    if bands < 8:
        raise ShapeError(f"generator needs >= 8 bands, got {bands}")
    specs = [LayerSpec("pad_reflect", length=8)]
    specs += _encoder_blocks()
    for cin, cout in ((64, 32), (32, 16)):
        specs += [
            LayerSpec("deconv1d", kernel=4, stride=2, padding=1,
                      in_channels=cin, out_channels=cout),
            LayerSpec("batchnorm", in_channels=cout),
            LayerSpec("leaky_relu", negative_slope=0.2),
        ]
    specs += [
        LayerSpec("deconv1d", kernel=4, stride=2, padding=1,
                  in_channels=16, out_channels=1),
        LayerSpec("tanh"),
        LayerSpec("crop", length=bands),
    ]
    return specs


def discriminator_specs(bands: int):
    if bands < 8:
        raise ShapeError(f"discriminator needs >= 8 bands, got {bands}")
    specs = [LayerSpec("pad_reflect", length=8)]
    specs += _encoder_blocks()
    specs += [
        LayerSpec("global_avg"),
        LayerSpec("affine", in_channels=64, out_channels=1),
        LayerSpec("sigmoid"),
    ]
    return specs


def build_generator(bands: int, seed: int = 0) -> Network:
    """Encoder/decoder network mapping [B, 1, bands] -> [B, 1, bands] with
    outputs in [-1, 1]."""
    return init_network(generator_specs(bands), seed=seed)


def build_discriminator(bands: int, seed: int = 0) -> Network:
    """Probability scorer mapping [B, 1, bands] -> [B, 1] in (0, 1)."""
    return init_network(discriminator_specs(bands), seed=seed)


def generator_bands(net: Network) -> int:
    """Band count a generator was built for (its final crop length)."""
    for spec in reversed(net.specs):
        if spec.kind == "crop":
            return spec.length
    raise ShapeError("network has no crop layer; not a generator built here")


def bce(p, label):
    """Binary cross-entropy against a constant label, averaged over the
    batch; probabilities are clamped to [1e-7, 1 - 1e-7] so saturated
    predictions stay finite. Returns (loss, gradient w.r.t. p)."""
    p = np.asarray(p, dtype=np.float64)
    pc = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
    y = float(label)
    loss = float(-(y * np.log(pc) + (1.0 - y) * np.log1p(-pc)).mean())
    grad = (pc - y) / (pc * (1.0 - pc)) / p.size
    return loss, grad


def l1_reconstruction(s, g):
    """Mean absolute difference over all elements plus its (sub)gradient
    w.r.t. g; the gradient is 0 wherever s == g."""
    s = np.asarray(s)
    g = np.asarray(g)
    if s.shape != g.shape:
        raise ShapeError(f"l1: shapes {s.shape} and {g.shape} differ")
    diff = g.astype(np.float64) - s.astype(np.float64)
    loss = float(np.abs(diff).mean())
    return loss, np.sign(diff) / diff.size


def _check_normalized(cube: HsiCube):
    peak = float(np.abs(cube.data).max())
    if peak > 1.0 + 1e-5:
        raise DataError(
            f"cube must be normalized to [-1, 1] (max |value| = {peak:.4g})"
        )


def train(cube: HsiCube, hyper: GanHyper):
    """Adversarial training on every pixel spectrum of a normalized cube.

    Deterministic given ``hyper.seed``: network initializations and the
    per-epoch pixel shuffle all derive from it. Returns (generator,
    discriminator, per-epoch metrics); both networks come back in eval mode.
    """
    _check_normalized(cube)
    n = cube.n_pixels
    if n < hyper.batch_size:
        raise DataError(
            f"cube has {n} pixels, fewer than batch_size {hyper.batch_size}"
        )
    pix = np.ascontiguousarray(cube.pixels(), dtype=np.float32)

    gen = init_network(generator_specs(cube.bands),
                       seed=derive_seed(hyper.seed, "generator")).train()
    disc = init_network(discriminator_specs(cube.bands),
                        seed=derive_seed(hyper.seed, "discriminator")).train()
    adam_g = init_adam(gen.n_params, hyper.lr, hyper.beta1, hyper.beta2)
    adam_d = init_adam(disc.n_params, hyper.lr, hyper.beta1, hyper.beta2)
    shuffle = stream(hyper.seed, "shuffle")

    steps = n // hyper.batch_size
    history = []
    for epoch in range(hyper.epochs):
        order = shuffle.permutation(n)
        sums = np.zeros(3)  # d_loss, g_adv, l1
        for step in range(steps):
            idx = order[step * hyper.batch_size : (step + 1) * hyper.batch_size]
            batch = pix[idx][:, None, :]

            # discriminator: real up, reconstruction down
            disc.zero_grad()
            loss_real, g_real = bce(disc.forward(batch), 1.0)
            disc.backward(g_real)
            g_out = gen.forward(batch)
            loss_fake, g_fake = bce(disc.forward(g_out), 0.0)
            disc.backward(g_fake)
            adam_step(disc.param_vector, disc.grad_vector, adam_d)

            # generator: non-saturating adversarial term + alpha * L1; the
            # discriminator only relays gradients here, its own stay frozen
            gen.zero_grad()
            adv_loss, g_adv = bce(disc.forward(g_out), 1.0)
            grad_at_output = disc.backward(g_adv, param_grads=False)
            l1_loss, g_l1 = l1_reconstruction(batch, g_out)
            gen.backward(grad_at_output + hyper.alpha * g_l1)
            adam_step(gen.param_vector, gen.grad_vector, adam_g)

            d_loss = loss_real + loss_fake
            if not np.isfinite([d_loss, adv_loss, l1_loss]).all():
                raise NumericError(f"non-finite loss at epoch {epoch}")
            sums += (d_loss, adv_loss, l1_loss)
        means = sums / steps
        history.append(TrainMetrics(
            epoch=epoch,
            d_loss=float(means[0]),
            g_adv=float(means[1]),
            l1=float(means[2]),
            total=float(means[1] + hyper.alpha * means[2]),
        ))
    return gen.eval(), disc.eval(), history


def train_autoencoder(cube: HsiCube, hyper: GanHyper):
    """Reconstruction-only baseline: the generator topology trained on the
    L1 loss alone (no discriminator). Returns (generator, metrics)."""
    _check_normalized(cube)
    n = cube.n_pixels
    if n < hyper.batch_size:
        raise DataError(
            f"cube has {n} pixels, fewer than batch_size {hyper.batch_size}"
        )
    pix = np.ascontiguousarray(cube.pixels(), dtype=np.float32)
    gen = init_network(generator_specs(cube.bands),
                       seed=derive_seed(hyper.seed, "generator")).train()
    adam_g = init_adam(gen.n_params, hyper.lr, hyper.beta1, hyper.beta2)
    shuffle = stream(hyper.seed, "shuffle")

    steps = n // hyper.batch_size
    history = []
    for epoch in range(hyper.epochs):
        order = shuffle.permutation(n)
        total = 0.0
        for step in range(steps):
            idx = order[step * hyper.batch_size : (step + 1) * hyper.batch_size]
            batch = pix[idx][:, None, :]
            gen.zero_grad()
            g_out = gen.forward(batch)
            l1_loss, g_l1 = l1_reconstruction(batch, g_out)
            gen.backward(g_l1)
            adam_step(gen.param_vector, gen.grad_vector, adam_g)
            if not np.isfinite(l1_loss):
                raise NumericError(f"non-finite loss at epoch {epoch}")
            total += l1_loss
        mean_l1 = total / steps
        history.append(TrainMetrics(epoch=epoch, d_loss=0.0, g_adv=0.0,
                                    l1=float(mean_l1), total=float(mean_l1)))
    return gen.eval(), history


def reconstruct(generator: Network, cube: HsiCube, batch_size: int = 512) -> HsiCube:
    """Run every pixel spectrum through the generator in eval mode; output
    has the cube's shape with values in [-1, 1]."""
    bands = generator_bands(generator)
    if bands != cube.bands:
        raise ShapeError(
            f"generator was built for {bands} bands, cube has {cube.bands}"
        )
    generator.eval()
    pix = np.ascontiguousarray(cube.pixels(), dtype=np.float32)
    out = np.empty_like(pix)
    for start in range(0, pix.shape[0], batch_size):
        chunk = pix[start : start + batch_size]
        out[start : start + chunk.shape[0]] = generator.forward(chunk[:, None, :])[:, 0, :]
    return HsiCube.from_pixels(out, cube.width, cube.height)


def difference_image(cube: HsiCube, reconstruction: HsiCube) -> HsiCube:
    """Elementwise cube minus reconstruction (both in the normalized
    domain)."""
    if (cube.width, cube.height, cube.bands) != (
        reconstruction.width, reconstruction.height, reconstruction.bands
    ):
        raise ShapeError("cube and reconstruction shapes differ")
    return HsiCube(cube.width, cube.height, cube.bands,
                   cube.data - reconstruction.data)


def metrics_csv(history) -> bytes:
    buf = io.StringIO()
    buf.write("epoch,d_loss,g_adv,l1,total\n")
    for row in history:
        buf.write(f"{row.epoch},{row.d_loss:.9g},{row.g_adv:.9g},"
                  f"{row.l1:.9g},{row.total:.9g}\n")
    return buf.getvalue().encode("utf-8")


def save_metrics(history, path) -> None:
    """Write per-epoch metrics as CSV: epoch,d_loss,g_adv,l1,total."""
    atomic_write(path, metrics_csv(history))
