"""Finite probability mass functions on the non-negative integers.

Everything the analytic model needs (link weights, intra-domain distances,
minima over gateways, bus-network distances) is an integer-valued random
variable with bounded support, so a pmf is just a dense array of masses
indexed by value.  Operations are pure and return new objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

DEFAULT_MAX_VALUE = 4096
DEFAULT_TAIL_TOL = 1e-6
TABLE_TOL = 1e-6
NORM_TOL = 1e-9


class PmfError(ValueError):
    """Base class for invalid distribution input."""


class NegativeValue(PmfError):
    pass


class NonNormalized(PmfError):
    pass


class EmptyTable(PmfError):
    pass


@dataclass(frozen=True, eq=False)
class DiscretePmf:
    """Mass ``probs[x]`` at integer value ``x``.

    ``tail_mass`` records how much probability was folded into the last bin
    by truncation; it is zero for pmfs built from tables.
    """

    probs: np.ndarray
    tail_mass: float = 0.0
    tail_tol: float = field(default=DEFAULT_TAIL_TOL, repr=False)

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise EmptyTable("pmf needs at least one value")
        if np.any(p < 0):
            raise NegativeValue("negative probability mass")
        # Trailing zeros carry no information and would make equality noisy.
        nz = np.flatnonzero(p)
        if nz.size == 0:
            raise NonNormalized("pmf has zero total mass")
        p = p[: nz[-1] + 1]
        total = p.sum()
        if abs(total - 1.0) > NORM_TOL:
            p = p / total
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def max_value(self) -> int:
        return self.probs.size - 1

    @property
    def min_value(self) -> int:
        return int(np.flatnonzero(self.probs)[0])

    @property
    def truncated(self) -> bool:
        return self.tail_mass > self.tail_tol

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probs)

    def mean(self) -> float:
        return mean(self)

    def variance(self) -> float:
        return variance(self)

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)

    def survival(self) -> np.ndarray:
        """P(X > x) for x = 0..max_value, summed from the top for accuracy."""
        rev = np.cumsum(self.probs[::-1])[::-1]
        return np.append(rev[1:], 0.0)

    def prob(self, value: int) -> float:
        if 0 <= value < self.probs.size:
            return float(self.probs[value])
        return 0.0

    def as_dict(self) -> dict[int, float]:
        return {int(x): float(self.probs[x]) for x in self.support}

    def allclose(self, other: "DiscretePmf", atol: float = 1e-12) -> bool:
        n = max(self.probs.size, other.probs.size)
        a = np.zeros(n)
        b = np.zeros(n)
        a[: self.probs.size] = self.probs
        b[: other.probs.size] = other.probs
        return bool(np.allclose(a, b, rtol=0.0, atol=atol))

    def __repr__(self) -> str:
        shown = ", ".join(f"{k}: {v:.4g}" for k, v in list(self.as_dict().items())[:8])
        more = ", ..." if self.support.size > 8 else ""
        return f"DiscretePmf({{{shown}{more}}}, tail_mass={self.tail_mass:.3g})"


def point_mass(value: int) -> DiscretePmf:
    if value < 0:
        raise NegativeValue(f"value {value} < 0")
    p = np.zeros(value + 1)
    p[value] = 1.0
    return DiscretePmf(p)


def uniform(values: Iterable[int]) -> DiscretePmf:
    vals = list(values)
    return pmf_from_table([(v, 1.0 / len(vals)) for v in vals])


def pmf_from_table(entries: Iterable[tuple[int, float]]) -> DiscretePmf:
    entries = list(entries)
    if not entries:
        raise EmptyTable("empty distribution table")
    seen = set()
    for value, prob in entries:
        if int(value) != value or value < 0:
            raise NegativeValue(f"value {value!r} is not a non-negative integer")
        if prob < 0:
            raise NegativeValue(f"probability {prob!r} for value {value} is negative")
        if value in seen:
            raise PmfError(f"duplicate value {value}")
        seen.add(value)
    total = math.fsum(p for _, p in entries)
    if abs(total - 1.0) > TABLE_TOL:
        raise NonNormalized(f"probabilities sum to {total:.9g}, not 1")
    p = np.zeros(int(max(v for v, _ in entries)) + 1)
    for value, prob in entries:
        p[int(value)] = prob
    return DiscretePmf(p / total)


def parse_pmf(text: str) -> DiscretePmf:
    """Parse ``value,probability`` lines; ``#`` starts a comment."""
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [s.strip() for s in line.split(",")]
        if len(parts) != 2:
            raise PmfError(f"line {lineno}: expected 'value,probability', got {raw!r}")
        try:
            value = int(parts[0])
            prob = float(parts[1])
        except ValueError as exc:
            raise PmfError(f"line {lineno}: {exc}") from None
        entries.append((value, prob))
    return pmf_from_table(entries)


def load_pmf(path: str | Path) -> DiscretePmf:
    return parse_pmf(Path(path).read_text())


def format_pmf(d: DiscretePmf) -> str:
    return "".join(f"{x},{p!r}\n" for x, p in d.as_dict().items())


def sample_weights_path() -> Path:
    return Path(__file__).parent / "data" / "sample_weights.txt"


def _clip(p: np.ndarray, max_value: int, tail: float, tail_tol: float) -> DiscretePmf:
    if p.size > max_value + 1:
        excess = float(p[max_value + 1 :].sum())
        p = p[: max_value + 1].copy()
        p[max_value] += excess
        tail += excess
    return DiscretePmf(p, tail_mass=tail, tail_tol=tail_tol)


def convolve(a: DiscretePmf, b: DiscretePmf, max_value: int = DEFAULT_MAX_VALUE) -> DiscretePmf:
    """Pmf of the sum of independent draws from ``a`` and ``b``."""
    p = np.convolve(a.probs, b.probs)
    np.clip(p, 0.0, None, out=p)
    return _clip(p, max_value, a.tail_mass + b.tail_mass, min(a.tail_tol, b.tail_tol))


def convolve_power(w: DiscretePmf, count: int, max_value: int = DEFAULT_MAX_VALUE) -> DiscretePmf:
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    result = point_mass(0)
    base = w
    # Square-and-multiply keeps the number of convolutions logarithmic.
    while count:
        if count & 1:
            result = convolve(result, base, max_value)
        count >>= 1
        if count:
            base = convolve(base, base, max_value)
    return result


def shift(d: DiscretePmf, offset: int, max_value: int = DEFAULT_MAX_VALUE) -> DiscretePmf:
    if offset < 0 and -offset > d.min_value:
        raise NegativeValue(f"shift by {offset} moves mass below zero")
    if offset >= 0:
        p = np.concatenate([np.zeros(offset), d.probs])
    else:
        p = d.probs[-offset:]
    return _clip(p, max_value, d.tail_mass, d.tail_tol)


def min_of_iid(d: DiscretePmf, count: float) -> DiscretePmf:
    """Pmf of the minimum of ``count`` iid draws from ``d``.

    Works on the survival function: P(min > x) = P(X > x) ** count.
    ``count`` may be a large float (the approximate bus recursion uses
    ``beta ** (k - 1)``).
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if count == 1:
        return d
    cdf = d.cdf()
    with np.errstate(divide="ignore"):
        # log1p keeps (1 - F) ** count accurate when F is tiny and count huge.
        log_s = np.where(cdf < 0.5, np.log1p(-np.minimum(cdf, 0.5)), np.log(d.survival()))
    s = np.exp(count * log_s)
    prev = np.concatenate([[1.0], s[:-1]])
    p = prev - s
    np.clip(p, 0.0, None, out=p)
    return DiscretePmf(p, tail_mass=d.tail_mass, tail_tol=d.tail_tol)


def mixture(components: Sequence[tuple[float, DiscretePmf]]) -> DiscretePmf:
    if not components:
        raise EmptyTable("mixture needs at least one component")
    weights = [w for w, _ in components]
    if any(w < 0 for w in weights):
        raise NegativeValue("negative mixture weight")
    total = math.fsum(weights)
    if abs(total - 1.0) > TABLE_TOL:
        raise NonNormalized(f"mixture weights sum to {total:.9g}, not 1")
    size = max(c.probs.size for _, c in components)
    p = np.zeros(size)
    tail = 0.0
    for w, c in components:
        p[: c.probs.size] += w * c.probs
        tail += w * c.tail_mass
    return DiscretePmf(p / total, tail_mass=tail, tail_tol=min(c.tail_tol for _, c in components))


def mean(d: DiscretePmf) -> float:
    x = np.arange(d.probs.size)
    return float(np.dot(x, d.probs))


def variance(d: DiscretePmf) -> float:
    x = np.arange(d.probs.size, dtype=np.float64)
    mu = np.dot(x, d.probs)
    return float(max(np.dot((x - mu) ** 2, d.probs), 0.0))


def moment(d: DiscretePmf, order: int) -> float:
    x = np.arange(d.probs.size, dtype=np.float64)
    return float(np.dot(x**order, d.probs))


def sample(d: DiscretePmf, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw ``size`` integer values using inverse-cdf lookup."""
    cdf = d.cdf()
    u = rng.random(size)
    idx = np.searchsorted(cdf, u * cdf[-1], side="right")
    return np.minimum(idx, d.max_value).astype(np.int64)
