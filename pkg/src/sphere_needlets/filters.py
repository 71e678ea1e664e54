"""C^kappa needlet filters supported on [1/2, 2].

The window is built from the order-kappa smoothstep

    S(x) = int_0^x u^kappa (1-u)^kappa du / B(kappa+1, kappa+1),

as ``h(t) = sin(pi/2 * S(2t - 1))`` on [1/2, 1] and ``h(t) = cos(pi/2 * S(t - 1))``
on [1, 2].  Since ``h(2t)`` on [1/2, 1] is the cosine of the same angle,
``h(t)**2 + h(2t)**2 == 1`` holds identically.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError

DEFAULT_KAPPA = 5
MAX_KAPPA = 20


@dataclass(frozen=True)
class Filter:
    """Needlet window h with smoothness ``kappa``; evaluate with ``filt(t)``."""

    kappa: int = DEFAULT_KAPPA
    _binom: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.kappa, (int, np.integer)) or not 1 <= self.kappa <= MAX_KAPPA:
            raise ParameterError(f"kappa must be an integer in [1, {MAX_KAPPA}], got {self.kappa!r}")
        n = 2 * self.kappa + 1
        object.__setattr__(self, "_binom", tuple(float(math.comb(n, i)) for i in range(n + 1)))

    def smoothstep(self, x) -> np.ndarray:
        """S(x) on [0, 1], clipped outside."""
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        n = 2 * self.kappa + 1
        # evaluate the shorter tail for accuracy; S(x) = 1 - S(1 - x) by symmetry
        lo = x <= 0.5
        y = np.where(lo, x, 1.0 - x)
        tail = np.zeros_like(y)
        one_minus = 1.0 - y
        for i in range(self.kappa + 1, n + 1):
            tail += self._binom[i] * y**i * one_minus ** (n - i)
        return np.where(lo, tail, 1.0 - tail)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        rise = (t > 0.5) & (t <= 1.0)
        fall = (t > 1.0) & (t < 2.0)
        out[rise] = np.sin(0.5 * np.pi * self.smoothstep(2.0 * t[rise] - 1.0))
        out[fall] = np.cos(0.5 * np.pi * self.smoothstep(t[fall] - 1.0))
        return float(out) if out.ndim == 0 else out


def build_filter(kappa: int = DEFAULT_KAPPA) -> Filter:
    return Filter(int(kappa) if isinstance(kappa, (int, np.integer)) else kappa)


def band(j: int) -> np.ndarray:
    """Integer degrees strictly inside (2^(j-2), 2^j), the support of level j >= 1."""
    if j < 1:
        raise ParameterError("level j must be >= 1")
    lo = 2 ** (j - 2) if j >= 2 else 0
    return np.arange(lo + 1, 2**j)


@functools.lru_cache(maxsize=None)
def _level_table(filt: Filter, j: int) -> tuple[np.ndarray, np.ndarray]:
    ells = band(j)
    vals = np.asarray(filt(ells / 2.0 ** (j - 1)), dtype=float)
    keep = vals > 0.0
    ells, vals = ells[keep], vals[keep]
    ells.setflags(write=False)
    vals.setflags(write=False)
    return ells, vals


def level_filter_values(filt: Filter, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Degrees ell in the level-j band and h(ell / 2^(j-1)) (first power)."""
    return _level_table(filt, j)


def level_weights(filt: Filter, j: int) -> dict[int, float]:
    """Squared weights ``{ell: h(ell / 2^(j-1))**2}`` for the non-zero entries of level j."""
    ells, vals = _level_table(filt, j)
    return {int(ell): float(v * v) for ell, v in zip(ells, vals)}


def verify_partition_of_unity(filt: Filter, t_samples) -> float:
    """Max over samples of |sum_{j>=0} h(t / 2^j)^2 - 1| for t >= 1."""
    t = np.asarray(t_samples, dtype=float).ravel()
    if t.size == 0:
        return 0.0
    if np.any(t < 1.0):
        raise DomainError("partition of unity holds for t >= 1 only")
    total = np.zeros_like(t)
    for j in range(int(np.ceil(np.log2(t.max()))) + 2):
        total += np.asarray(filt(t / 2.0**j)) ** 2
    return float(np.max(np.abs(total - 1.0)))
