"""Shared numerical utilities: deterministic counter-based random streams,
bracketed bisection, and empirical-distribution statistics.

The random-stream contract is the backbone of reproducible parallel Monte
Carlo: a stream is keyed by ``(master_seed, stream_id)`` and always yields
the same variate sequence for the same key, so trial ``i`` can consume
stream ``i`` regardless of which worker executes it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BracketError, ModelDomainError

_UINT64_MASK = 0xFFFFFFFFFFFFFFFF


class RngStream:
    """Deterministic random stream keyed by ``(master_seed, stream_id)``.

    Backed by the counter-based Philox generator, so identical keys give
    bit-identical sequences across runs and platforms, and distinct
    stream ids give statistically independent streams.
    """

    def __init__(self, master_seed: int, stream_id: int):
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        key = np.array(
            [self.master_seed & _UINT64_MASK, self.stream_id & _UINT64_MASK],
            dtype=np.uint64,
        )
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def uniform(self, size=None):
        """Uniform draws on [0, 1)."""
        return self._gen.random(size)

    def poisson(self, mean: float) -> int:
        return int(self._gen.poisson(mean))

    def integers(self, low, high, size=None):
        """Integer draws on [low, high); accepts array bounds."""
        return self._gen.integers(low, high, size=size)

    def normal(self, size=None):
        return self._gen.standard_normal(size)

    def __repr__(self) -> str:
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id})"


def exponential_inverse_cdf(u, mean: float):
    """Map uniform draws ``u`` in [0, 1) to exponential variates via -mean*ln(1-u)."""
    if mean <= 0 or not math.isfinite(mean):
        raise ModelDomainError(f"mean must be finite and > 0 (got {mean!r})")
    return -mean * np.log1p(-np.asarray(u)) if np.ndim(u) else -mean * math.log1p(-u)


def exponential_variate(stream: RngStream, mean: float, size=None):
    """Exponential draws from ``stream`` by inverse-CDF transform.

    The inverse-CDF route (rather than rejection) keeps the draw count per
    variate fixed, which is what makes counter-based streams reproducible.
    """
    return exponential_inverse_cdf(stream.uniform(size), mean)


def bisect_root(
    f: Callable[[float], float], lo: float, hi: float, tol: float
) -> float:
    """Find a root of monotone ``f`` on [lo, hi] by bracketed bisection.

    Returns the bracket midpoint once the bracket width is <= tol. Raises
    BracketError when f(lo) and f(hi) have the same (nonzero) sign. Never
    exceeds ceil(log2((hi-lo)/tol)) + 2 iterations.
    """
    if not (tol > 0):
        raise ModelDomainError(f"tol must be > 0 (got {tol!r})")
    if not (lo < hi):
        raise ModelDomainError(f"need lo < hi (got {lo!r}, {hi!r})")
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(
            f"f({lo!r})={flo!r} and f({hi!r})={fhi!r} do not bracket a root"
        )
    max_iter = math.ceil(math.log2((hi - lo) / tol)) + 2
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True, eq=False)
class EmpiricalCdf:
    """Empirical CDF over a sorted sample; evaluation at x is (#samples <= x)/count."""

    sorted_samples: np.ndarray
    count: int = field(init=False)

    def __eq__(self, other):
        if not isinstance(other, EmpiricalCdf):
            return NotImplemented
        return self.count == other.count and bool(
            np.array_equal(self.sorted_samples, other.sorted_samples)
        )

    def __post_init__(self):
        samples = np.asarray(self.sorted_samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise ModelDomainError("need a non-empty 1-D sample")
        if np.any(np.isnan(samples)):
            raise ModelDomainError("samples must not contain NaN")
        if np.any(samples[1:] < samples[:-1]):
            raise ModelDomainError("samples must be sorted ascending")
        object.__setattr__(self, "sorted_samples", samples)
        object.__setattr__(self, "count", int(samples.size))

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalCdf":
        return cls(np.sort(np.asarray(samples, dtype=float)))

    def evaluate(self, x):
        """CDF value(s) at x; accepts scalars or arrays."""
        idx = np.searchsorted(self.sorted_samples, x, side="right")
        out = idx / self.count
        return float(out) if np.ndim(x) == 0 else out


def ks_distance(emp: EmpiricalCdf, model: Callable[[float], float]) -> float:
    """Two-sided Kolmogorov-Smirnov distance between ``emp`` and a model CDF.

    Standard step evaluation: at the i-th order statistic the empirical CDF
    jumps from (i-1)/n to i/n, and the supremum over the real line is
    attained against one of those two step levels.
    """
    xs = emp.sorted_samples
    n = emp.count
    model_vals = np.array([model(float(x)) for x in xs], dtype=float)
    hi = np.arange(1, n + 1) / n
    lo = np.arange(0, n) / n
    return float(np.max(np.maximum(hi - model_vals, model_vals - lo)))
