"""Reproducible generators for the simulation study's data models.

Data are synthesized as X = Sigma^{1/2} Y + mu column by column, where the
entries of the p x n matrix Y are i.i.d. draws from a standardized law
(mean 0, variance 1) whose excess kurtosis Delta = E Y^4 - 3 is known in
closed form.  One deliberately non-standardized law, a normal with nonzero
mean, exercises the statistics' sensitivity to an unmodelled mean shift.

Randomness comes from counter-based Philox streams: a master seed plus an
integer stream id yields a generator that is bit-reproducible and
independent across ids, so replications can run in any order or in
parallel without coordination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .covstats import DataMatrix

__all__ = [
    "EntryDistribution",
    "CovarianceSpec",
    "RngStream",
    "std_normal",
    "shifted_normal",
    "centered_gamma",
    "centered_uniform",
    "two_point",
    "two_point_delta",
    "sample_entries",
    "make_covariance",
    "synthesize",
]

RNG_ALGORITHM = "philox"


# ---------------------------------------------------------------------------
# Entry distributions

def two_point_delta(gamma: float) -> float:
    """Excess kurtosis of the standardized two-point law with weight gamma.

    The law puts mass gamma at -sqrt((1-gamma)/gamma) and 1-gamma at
    sqrt(gamma/(1-gamma)); its excess kurtosis is
    (1-gamma)^2/gamma + gamma^2/(1-gamma) - 3, symmetric in
    gamma <-> 1-gamma.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"two-point weight must lie strictly in (0,1), got {gamma}")
    return (1.0 - gamma) ** 2 / gamma + gamma**2 / (1.0 - gamma) - 3.0


def _format_params(*values: float) -> str:
    return ",".join(f"{v:g}" for v in values)


@dataclass(frozen=True)
class EntryDistribution:
    """An i.i.d. law for the entries of the latent matrix Y.

    Every kind except ``shifted_normal`` is standardized to mean 0 and
    variance 1.  ``delta`` is the implied excess kurtosis E Y^4 - 3.
    """

    kind: str
    params: tuple = ()

    _KINDS = ("std_normal", "shifted_normal", "centered_gamma",
              "centered_uniform", "two_point")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        want = {"std_normal": 0, "shifted_normal": 1, "centered_gamma": 2,
                "centered_uniform": 1, "two_point": 1}[self.kind]
        if len(self.params) != want:
            raise ValueError(
                f"{self.kind} takes {want} parameter(s), got {len(self.params)}"
            )
        if self.kind == "centered_gamma":
            shape, scale = self.params
            if shape <= 0 or scale <= 0:
                raise ValueError("gamma shape and scale must be positive")
        elif self.kind == "centered_uniform":
            if self.params[0] <= 0:
                raise ValueError("uniform width must be positive")
        elif self.kind == "two_point":
            if not 0.0 < self.params[0] < 1.0:
                raise ValueError("two-point weight must lie strictly in (0,1)")

    @property
    def delta(self) -> float:
        """Excess kurtosis implied by the kind and parameters."""
        if self.kind in ("std_normal", "shifted_normal"):
            return 0.0
        if self.kind == "centered_gamma":
            return 6.0 / self.params[0]
        if self.kind == "centered_uniform":
            return -1.2
        return two_point_delta(self.params[0])

    @property
    def mean(self) -> float:
        """Entry mean (nonzero only for the shifted normal)."""
        return self.params[0] if self.kind == "shifted_normal" else 0.0

    @property
    def label(self) -> str:
        """Compact text form used in result tables."""
        if not self.params:
            return self.kind
        return f"{self.kind}({_format_params(*self.params)})"

    def sample(self, p: int, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw a p x n matrix of i.i.d. entries."""
        size = (int(p), int(n))
        if self.kind == "std_normal":
            return rng.standard_normal(size)
        if self.kind == "shifted_normal":
            return self.params[0] + rng.standard_normal(size)
        if self.kind == "centered_gamma":
            shape, scale = self.params
            draws = rng.gamma(shape, scale, size)
            return (draws - shape * scale) / math.sqrt(shape * scale**2)
        if self.kind == "centered_uniform":
            width = self.params[0]
            draws = rng.uniform(0.0, width, size)
            return (draws - width / 2.0) / (width / math.sqrt(12.0))
        gamma = self.params[0]
        low = -math.sqrt((1.0 - gamma) / gamma)
        high = math.sqrt(gamma / (1.0 - gamma))
        return np.where(rng.random(size) < gamma, low, high)

    def to_dict(self) -> dict:
        names = {"shifted_normal": ("mean",), "centered_gamma": ("shape", "scale"),
                 "centered_uniform": ("width",), "two_point": ("gamma",)}
        out = {"kind": self.kind}
        for name, value in zip(names.get(self.kind, ()), self.params):
            out[name] = value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "EntryDistribution":
        data = dict(data)
        kind = data.pop("kind", None)
        if kind == "std_normal":
            dist = std_normal()
        elif kind == "shifted_normal":
            dist = shifted_normal(data.pop("mean"))
        elif kind == "centered_gamma":
            dist = centered_gamma(data.pop("shape"), data.pop("scale"))
        elif kind == "centered_uniform":
            dist = centered_uniform(data.pop("width"))
        elif kind == "two_point":
            dist = two_point(data.pop("gamma"))
        else:
            raise ValueError(f"unknown distribution kind {kind!r}")
        if data:
            raise ValueError(f"unexpected distribution fields {sorted(data)}")
        return dist


def std_normal() -> EntryDistribution:
    """Standard normal entries (delta = 0)."""
    return EntryDistribution("std_normal")


def shifted_normal(mean: float = 0.25) -> EntryDistribution:
    """Normal entries with unit variance and a deliberate nonzero mean."""
    return EntryDistribution("shifted_normal", (mean,))


def centered_gamma(shape: float = 4.0, scale: float = 0.5) -> EntryDistribution:
    """Gamma(shape, scale) entries centered and scaled to mean 0, variance 1.

    Shape-scale convention: raw mean shape*scale, raw variance
    shape*scale^2; excess kurtosis 6/shape survives standardization.
    """
    return EntryDistribution("centered_gamma", (shape, scale))


def centered_uniform(width: float = 2.0 * math.sqrt(3.0)) -> EntryDistribution:
    """Uniform[0, width] entries centered and scaled to mean 0, variance 1.

    The default width 2*sqrt(3) already has unit variance after centering.
    Excess kurtosis is -1.2 regardless of width.
    """
    return EntryDistribution("centered_uniform", (width,))


def two_point(gamma: float) -> EntryDistribution:
    """Standardized two-point law: mass gamma on the negative support point."""
    return EntryDistribution("two_point", (gamma,))


# ---------------------------------------------------------------------------
# Covariance specifications

@dataclass(frozen=True)
class CovarianceSpec:
    """A diagonal population covariance of dimension p.

    * ``identity``: I_p.
    * ``spiked``: the first floor(fraction * p) diagonal entries equal
      ``value``, the rest are 1.
    * ``diagonal``: explicit positive entries.
    """

    kind: str
    p: int
    value: float | None = None
    fraction: float | None = None
    values: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("identity", "spiked", "diagonal"):
            raise ValueError(f"unknown covariance kind {self.kind!r}")
        if self.p < 1:
            raise ValueError(f"dimension must be at least 1, got {self.p}")
        if self.kind == "spiked":
            if self.value is None or self.value <= 0:
                raise ValueError("spiked covariance needs a positive value")
            frac = 0.2 if self.fraction is None else float(self.fraction)
            if not 0.0 < frac <= 1.0:
                raise ValueError("spike fraction must lie in (0,1]")
            object.__setattr__(self, "fraction", frac)
        elif self.kind == "diagonal":
            if not self.values:
                raise ValueError("diagonal covariance needs explicit values")
            vals = tuple(float(v) for v in self.values)
            if len(vals) != self.p:
                raise ValueError(
                    f"diagonal length {len(vals)} does not match p={self.p}"
                )
            if min(vals) <= 0:
                raise ValueError("diagonal entries must be positive")
            object.__setattr__(self, "values", vals)

    @classmethod
    def identity(cls, p: int) -> "CovarianceSpec":
        return cls("identity", p)

    @classmethod
    def spiked(cls, p: int, value: float, fraction: float = 0.2) -> "CovarianceSpec":
        return cls("spiked", p, value=value, fraction=fraction)

    @classmethod
    def diagonal(cls, values) -> "CovarianceSpec":
        vals = tuple(float(v) for v in values)
        return cls("diagonal", len(vals), values=vals)

    @property
    def is_identity(self) -> bool:
        if self.kind == "identity":
            return True
        if self.kind == "diagonal":
            return all(v == 1.0 for v in self.values)
        return False

    def diagonal_entries(self) -> np.ndarray:
        if self.kind == "identity":
            return np.ones(self.p)
        if self.kind == "spiked":
            out = np.ones(self.p)
            out[: int(self.fraction * self.p)] = self.value
            return out
        return np.asarray(self.values, dtype=float)

    @property
    def label(self) -> str:
        if self.kind == "identity":
            return "identity"
        if self.kind == "spiked":
            return f"spiked({_format_params(self.value, self.fraction)})"
        return f"diagonal(p={self.p})"

    def to_dict(self) -> dict:
        if self.kind == "identity":
            return {"kind": "identity"}
        if self.kind == "spiked":
            return {"kind": "spiked", "value": self.value,
                    "fraction": self.fraction}
        return {"kind": "diagonal", "values": list(self.values)}

    @classmethod
    def from_dict(cls, data: dict, p: int) -> "CovarianceSpec":
        data = dict(data)
        kind = data.pop("kind", None)
        if kind == "identity":
            spec = cls.identity(p)
        elif kind == "spiked":
            spec = cls.spiked(p, data.pop("value"),
                              data.pop("fraction", 0.2))
        elif kind == "diagonal":
            values = data.pop("values")
            if len(values) != p:
                raise ValueError(
                    f"diagonal length {len(values)} does not match p={p}"
                )
            spec = cls.diagonal(values)
        else:
            raise ValueError(f"unknown covariance kind {kind!r}")
        if data:
            raise ValueError(f"unexpected covariance fields {sorted(data)}")
        return spec


def make_covariance(spec: CovarianceSpec) -> tuple[np.ndarray, np.ndarray]:
    """Materialize a covariance spec as (Sigma, Sigma^{1/2}) dense matrices."""
    diag = spec.diagonal_entries()
    return np.diag(diag), np.diag(np.sqrt(diag))


# ---------------------------------------------------------------------------
# Random streams and synthesis

@dataclass(frozen=True)
class RngStream:
    """A named, independent random stream: (master seed, stream id).

    Streams are spawned from a Philox counter-based generator via seed
    sequences, so distinct ids are independent by construction and the
    same pair reproduces identical draws bit for bit.
    """

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        if self.master_seed < 0 or self.stream_id < 0:
            raise ValueError("seed and stream id must be nonnegative")

    @property
    def algorithm(self) -> str:
        return RNG_ALGORITHM

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed,
                                     spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(seq))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng)!r}")


def sample_entries(dist: EntryDistribution, p: int, n: int, rng) -> DataMatrix:
    """Draw the p x n latent matrix Y for one replication."""
    return DataMatrix(dist.sample(p, n, _as_generator(rng)))


def synthesize(dist: EntryDistribution, spec: CovarianceSpec, mu, p: int,
               n: int, rng) -> DataMatrix:
    """Generate X = Sigma^{1/2} Y + mu with p variables and n observations.

    ``mu`` may be a scalar or a length-p vector, added to every column.
    """
    if spec.p != p:
        raise ValueError(f"covariance dimension {spec.p} does not match p={p}")
    if np.ndim(mu) == 0:
        mu_vec = np.full(p, float(mu))
    else:
        mu_vec = np.asarray(mu, dtype=float).reshape(-1)
        if mu_vec.shape != (p,):
            raise ValueError(
                f"mean vector has length {mu_vec.size}, expected {p}"
            )
    entries = dist.sample(p, n, _as_generator(rng))
    root = np.sqrt(spec.diagonal_entries())
    return DataMatrix(root[:, None] * entries + mu_vec[:, None])
