"""Domain types: distributions, datasets, hypotheses, losses, seeded RNG streams."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

import numpy as np

# Probabilities fed to logs are clamped to [PROB_CLAMP, 1 - PROB_CLAMP]; for the
# logistic loss this is equivalent to clipping the margin w.x to +/- LOGIT_CLAMP.
PROB_CLAMP = 1e-12
LOGIT_CLAMP = math.log((1.0 - PROB_CLAMP) / PROB_CLAMP)

_MIX64 = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def _splitmix64(v: int) -> int:
    v = (v + _MIX64) & _MASK64
    v = ((v ^ (v >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    v = ((v ^ (v >> 27)) * 0x94D049BB133111EB) & _MASK64
    return v ^ (v >> 31)


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream: (seed, stream_id) fully determines all draws.

    Distinct stream_ids key independent Philox streams, so parallel trials can
    each own a stream without coordination.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, self.stream_id & _MASK64],
                       dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, k: int) -> "RngStream":
        """Derive an independent substream; deterministic in (stream_id, k)."""
        return RngStream(self.seed, _splitmix64((self.stream_id ^ _MIX64) + k))


class DomainTag(Enum):
    SOURCE = "source"
    TARGET = "target"


@dataclass(frozen=True)
class Instance:
    """One sample: feature vector x, optional binary label y."""

    x: np.ndarray
    y: Optional[int] = None

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        if not np.all(np.isfinite(x)):
            raise ValueError("instance features must be finite")
        object.__setattr__(self, "x", x)
        if self.y is not None and self.y not in (0, 1):
            raise ValueError("label must be 0 or 1 when present")


@dataclass(frozen=True)
class Hypothesis:
    """Weight vector, optionally constrained to an L2 ball."""

    w: np.ndarray
    constraint_radius: Optional[float] = None

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.w, dtype=float))
        object.__setattr__(self, "w", w)
        if self.constraint_radius is not None:
            if self.constraint_radius <= 0:
                raise ValueError("constraint_radius must be positive")
            if float(np.linalg.norm(w)) > self.constraint_radius + 1e-9:
                raise ValueError(
                    f"||w|| = {np.linalg.norm(w):.6g} exceeds radius "
                    f"{self.constraint_radius:.6g}")


@dataclass(frozen=True)
class ScalarGaussian:
    """1-D Gaussian over unlabeled scalar instances."""

    mean: float
    variance: float

    def __post_init__(self):
        if self.variance <= 0:
            raise ValueError("variance must be positive")

    @property
    def labeled(self) -> bool:
        return False

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class TruncatedGaussianLogistic:
    """2-D diagonal Gaussian features truncated to the box |x_j| < halfwidth,
    with a Bernoulli(sigmoid(label_weights . x)) label."""

    mean: np.ndarray
    diag_variance: np.ndarray
    box_halfwidth: float
    label_weights: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        var = np.atleast_1d(np.asarray(self.diag_variance, dtype=float))
        lw = np.atleast_1d(np.asarray(self.label_weights, dtype=float))
        if mean.shape != var.shape or mean.shape != lw.shape:
            raise ValueError("mean, diag_variance, label_weights must share shape")
        if np.any(var <= 0):
            raise ValueError("variances must be strictly positive")
        if self.box_halfwidth <= 0:
            raise ValueError("box_halfwidth must be positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "diag_variance", var)
        object.__setattr__(self, "label_weights", lw)

    @property
    def labeled(self) -> bool:
        return True

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])


DistributionSpec = Union[ScalarGaussian, TruncatedGaussianLogistic]


@dataclass(frozen=True)
class TransferDataset:
    """round(beta*n) target samples plus the remaining source samples."""

    target_samples: tuple
    source_samples: tuple
    beta: float
    n: int

    def __post_init__(self):
        if not (0 <= self.beta < 1):
            raise ValueError("beta must lie in [0, 1)")
        if self.n <= 0:
            raise ValueError("n must be positive")
        object.__setattr__(self, "target_samples", tuple(self.target_samples))
        object.__setattr__(self, "source_samples", tuple(self.source_samples))
        n_t = len(self.target_samples)
        if n_t != round(self.beta * self.n):
            raise ValueError(f"expected {round(self.beta * self.n)} target "
                             f"samples, got {n_t}")
        if n_t + len(self.source_samples) != self.n:
            raise ValueError("target + source sample counts must equal n")
        if self.beta == 0 and n_t != 0:
            raise ValueError("beta = 0 requires an empty target set")


def sigmoid(u):
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    eu = np.exp(u[~pos])
    out[~pos] = eu / (1.0 + eu)
    return out if out.ndim else float(out)


def _softplus(u):
    # log(1 + e^u), stable for large |u|
    u = np.asarray(u, dtype=float)
    return np.where(u > 0, u + np.log1p(np.exp(-np.abs(u))),
                    np.log1p(np.exp(np.minimum(u, 0.0))))


class SquaredError:
    """(w - z)^2 with gradient 2(w - z); for unlabeled scalar instances."""

    kind = "squared_error"

    @staticmethod
    def eval(w: np.ndarray, x: np.ndarray, y=None) -> float:
        w = np.atleast_1d(np.asarray(w, dtype=float))
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if w.shape != x.shape:
            raise ValueError("hypothesis and instance dimensions differ")
        return float(np.sum((w - x) ** 2))

    @staticmethod
    def gradient(w: np.ndarray, x: np.ndarray, y=None) -> np.ndarray:
        w = np.atleast_1d(np.asarray(w, dtype=float))
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if w.shape != x.shape:
            raise ValueError("hypothesis and instance dimensions differ")
        return 2.0 * (w - x)


class LogisticCrossEntropy:
    """-(y log p + (1-y) log(1-p)) with p = sigmoid(w.x), clamped away from {0,1}."""

    kind = "logistic"

    @staticmethod
    def eval(w: np.ndarray, x: np.ndarray, y: int) -> float:
        w = np.atleast_1d(np.asarray(w, dtype=float))
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if w.shape != x.shape:
            raise ValueError("hypothesis and instance dimensions differ")
        if y is None:
            raise ValueError("logistic loss requires a label")
        u = float(np.clip(np.dot(w, x), -LOGIT_CLAMP, LOGIT_CLAMP))
        return float(_softplus(u) - y * u)

    @staticmethod
    def gradient(w: np.ndarray, x: np.ndarray, y: int) -> np.ndarray:
        w = np.atleast_1d(np.asarray(w, dtype=float))
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if w.shape != x.shape:
            raise ValueError("hypothesis and instance dimensions differ")
        if y is None:
            raise ValueError("logistic loss requires a label")
        return (sigmoid(float(np.dot(w, x))) - y) * x


LossModel = Union[SquaredError, LogisticCrossEntropy]

SQUARED_ERROR = SquaredError()
LOGISTIC_LOSS = LogisticCrossEntropy()


def loss_eval(loss: LossModel, w: Hypothesis, z: Instance) -> float:
    """Nonnegative loss of hypothesis w on instance z."""
    return loss.eval(w.w, z.x, z.y)


def loss_gradient(loss: LossModel, w: Hypothesis, z: Instance) -> np.ndarray:
    return loss.gradient(w.w, z.x, z.y)


def sample_arrays(spec: DistributionSpec, count: int, rng: RngStream):
    """Draw count IID samples as arrays: (x, y) with y None for unlabeled specs.

    Truncated Gaussian features are rejection-sampled into the box; the
    acceptance probability is near 1 for the parameter ranges of interest.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    gen = rng.generator()
    if isinstance(spec, ScalarGaussian):
        x = gen.normal(spec.mean, math.sqrt(spec.variance), size=(count, 1))
        return x, None
    if isinstance(spec, TruncatedGaussianLogistic):
        d = spec.dim
        sd = np.sqrt(spec.diag_variance)
        h = spec.box_halfwidth
        out = np.empty((count, d))
        got = 0
        while got < count:
            need = count - got
            # oversample to keep the expected number of rounds near 1
            m = int(need * 1.1) + 16
            cand = spec.mean + sd * gen.standard_normal((m, d))
            ok = cand[np.all(np.abs(cand) < h, axis=1)]
            take = min(need, ok.shape[0])
            out[got:got + take] = ok[:take]
            got += take
        p = sigmoid(out @ spec.label_weights)
        y = (gen.random(count) < p).astype(np.int64)
        return out, y
    raise TypeError(f"unsupported distribution spec: {type(spec).__name__}")


def sample(spec: DistributionSpec, count: int, rng: RngStream) -> list:
    """Draw count IID Instance objects from spec, reproducibly in rng."""
    x, y = sample_arrays(spec, count, rng)
    if y is None:
        return [Instance(xi) for xi in x]
    return [Instance(xi, int(yi)) for xi, yi in zip(x, y)]


def instances_to_arrays(samples) -> tuple:
    """Stack a list of Instance into (x matrix, label vector or None)."""
    if len(samples) == 0:
        raise ValueError("empty sample list")
    x = np.stack([z.x for z in samples])
    if samples[0].y is None:
        return x, None
    y = np.array([z.y for z in samples], dtype=np.int64)
    return x, y
