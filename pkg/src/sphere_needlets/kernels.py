"""Sobolev reproducing kernels on S^d and cubature worst-case errors.

The default coefficient sequence is ``a_ell = (1 + ell)^(-2s)``.  Two
kernel-matched sequences (exact Fourier coefficients of the Cui-Freeden and
distance kernels on S^2) exist for validating the series evaluator against the
closed forms; they describe different but equivalent norms for s = 3/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .errors import DegenerateFitError, NumericalConsistencyError, ParameterError
from .sphere_core import _check_t, harmonic_dims, harmonic_weighted_sums, legendre_series

SEQUENCES = ("standard", "distance_exact", "cui_freeden_exact")
FORMS = ("series", "cui_freeden", "distance", "generalised_distance")
DEFAULT_EPS = 1e-10
DEFAULT_MAX_DEGREE = 1 << 16
BLOCK = 256
MOMENT_MAX_DEGREE = 1024  # harmonic-moment wce route on S^2 up to this degree


@dataclass(frozen=True)
class SobolevParams:
    d: int = 2
    s: float = 1.5
    sequence: str = "standard"

    def __post_init__(self):
        if self.d < 2:
            raise ParameterError("d must be >= 2")
        if not self.s > self.d / 2:
            raise ParameterError(f"need s > d/2 for a reproducing kernel, got s={self.s}, d={self.d}")
        if self.sequence not in SEQUENCES:
            raise ParameterError(f"unknown coefficient sequence {self.sequence!r}")
        if self.sequence != "standard" and (self.d != 2 or self.s != 1.5):
            raise ParameterError(f"sequence {self.sequence!r} exists only for d=2, s=3/2")


def a_ell(p: SobolevParams, ell):
    """Kernel coefficient a_ell^{(s)} (array-friendly)."""
    ell = np.asarray(ell, dtype=float)
    if p.sequence == "standard":
        out = (1.0 + ell) ** (-2.0 * p.s)
    else:
        z = 2.0 * ell + 1.0
        safe = np.where(ell == 0, 1.0, ell)
        if p.sequence == "distance_exact":
            out = np.where(ell == 0, 4.0 / 3.0, 1.0 / (z * (safe + 1.5) * (safe - 0.5)))
        else:
            out = np.where(ell == 0, 1.0, 1.0 / (z * safe * (safe + 1.0)))
    return float(out) if out.ndim == 0 else out


def _z_continuous(d: int, x):
    """Z(d, x) continued to real x via log-gamma (for tail integrals)."""
    x = np.asarray(x, dtype=float)
    return (2 * x + d - 1) * np.exp(gammaln(x + d - 1) - gammaln(d) - gammaln(x + 1))


@dataclass(frozen=True)
class KernelSpec:
    """A zonal kernel choice.  ``series`` is truncated by a tail bound."""

    form: str = "distance"
    params: SobolevParams = SobolevParams()
    eps: float = DEFAULT_EPS
    max_degree: int | None = None

    def __post_init__(self):
        if self.form not in FORMS:
            raise ParameterError(f"unknown kernel form {self.form!r}")
        d, s = self.params.d, self.params.s
        if self.form in ("cui_freeden", "distance") and (d != 2 or s != 1.5):
            raise ParameterError(f"{self.form} kernel represents d=2, s=3/2 only")
        if self.form == "generalised_distance" and not d / 2 < s <= (d + 1) / 2:
            raise ParameterError("generalised distance kernel needs d/2 < s <= (d+1)/2")

    @property
    def a0(self) -> float:
        if self.form == "series":
            return float(a_ell(self.params, 0))
        if self.form == "cui_freeden":
            return 1.0
        if self.form == "distance":
            return 4.0 / 3.0
        return gdist_constant(self.params.d, self.params.s)


def gdist_constant(d: int, s: float) -> float:
    """V_{d-2s}(S^d) = 2^(2s-1) Gamma((d+1)/2) Gamma(s) / (sqrt(pi) Gamma(d/2 + s))."""
    if d / 2 + s < 170:
        g = math.gamma((d + 1) / 2) * math.gamma(s) / math.gamma(d / 2 + s)
    else:
        g = math.exp(math.lgamma((d + 1) / 2) + math.lgamma(s) - math.lgamma(d / 2 + s))
    return 2.0 ** (2 * s - 1) * g / math.sqrt(math.pi)


def _tail_bound(p: SobolevParams, L: int) -> float:
    """Upper bound on sum_{ell > L} a_ell Z(d, ell) for an eventually decreasing summand."""
    f = lambda x: float(a_ell(p, x)) * float(_z_continuous(p.d, x))
    val, _ = integrate.quad(f, L, np.inf, limit=200)
    return val


def series_truncation(k: KernelSpec) -> int:
    """Smallest power-of-two-spaced L whose tail bound is below ``k.eps``, capped."""
    if k.max_degree is not None:
        return int(k.max_degree)
    L = 16
    while L < DEFAULT_MAX_DEGREE and _tail_bound(k.params, L) >= k.eps:
        L *= 2
    return min(L, DEFAULT_MAX_DEGREE)


def _series_coefficients(k: KernelSpec, L: int) -> np.ndarray:
    ells = np.arange(L + 1)
    return a_ell(k.params, ells) * harmonic_dims(k.params.d, L)


def _series_eval(k: KernelSpec, t: np.ndarray, centred: bool) -> np.ndarray:
    L = series_truncation(k)
    c = _series_coefficients(k, L)
    if centred:
        c[0] = 0.0
    val = legendre_series(k.params.d, c, t)
    if k.max_degree is None:
        # at t = 1 every P_ell equals one, so the neglected tail is a scalar series;
        # the midpoint integral estimates it to O(c''(L)).
        at_pole = t >= 1.0 - 1e-15
        if np.any(at_pole):
            f = lambda x: float(a_ell(k.params, x)) * float(_z_continuous(k.params.d, x))
            tail, _ = integrate.quad(f, L + 0.5, np.inf, limit=200, epsabs=1e-16)
            val = np.where(at_pole, val + tail, val)
    return val


def _closed_form(form: str, d: int, s: float, r: np.ndarray) -> np.ndarray:
    if form == "cui_freeden":
        return 2.0 - 2.0 * np.log1p(0.5 * r)
    if form == "distance":
        return 8.0 / 3.0 - r
    return 2.0 * gdist_constant(d, s) - r ** (2 * s - d)


def kernel_eval(k: KernelSpec, t):
    """K^{(s)}(t) for t = <x, y> in [-1, 1]."""
    t = _check_t(t)
    if k.form == "series":
        val = _series_eval(k, t, centred=False)
    else:
        val = _closed_form(k.form, k.params.d, k.params.s, np.sqrt(np.maximum(0.0, 2.0 - 2.0 * t)))
    return float(val) if np.ndim(val) == 0 else val


def centered_kernel_eval(k: KernelSpec, t):
    """The kernel with its degree-0 term a_0 removed."""
    t = _check_t(t)
    if k.form == "series":
        val = _series_eval(k, t, centred=True)
    else:
        val = kernel_eval(k, t) - k.a0
    return float(val) if np.ndim(val) == 0 else val


# --------------------------------------------------------------------------
# worst-case error


@numba.njit(cache=True)
def _closed_pair_sum(x, w, form, expo, const, block):
    # row-block partials then a fixed-order reduction: independent of threading
    n = x.shape[0]
    nblocks = (n + block - 1) // block
    partial = np.zeros(nblocks)
    for b in range(nblocks):
        acc = 0.0
        for i in range(b * block, min(n, (b + 1) * block)):
            row = 0.0
            for j in range(n):
                d0 = x[i, 0] - x[j, 0]
                d1 = x[i, 1] - x[j, 1]
                d2 = x[i, 2] - x[j, 2]
                r = math.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
                if form == 0:
                    kv = const - 2.0 * math.log1p(0.5 * r)
                elif form == 1:
                    kv = const - r
                else:
                    kv = const - r**expo
                row += w[j] * kv
            acc += w[i] * row
        partial[b] = acc
    total = 0.0
    for b in range(nblocks):
        total += partial[b]
    return total


def _canonical(rule) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(rule.points, dtype=float)
    w = np.asarray(rule.weights, dtype=float)
    order = np.lexsort((w, x[:, 2], x[:, 1], x[:, 0]))
    return np.ascontiguousarray(x[order]), np.ascontiguousarray(w[order])


def _series_pair_sum(k: KernelSpec, x: np.ndarray, w: np.ndarray) -> float:
    L = series_truncation(k)
    c = _series_coefficients(k, L)
    c[0] = 0.0
    partials = []
    for start in range(0, len(x), BLOCK):
        t = np.clip(x[start:start + BLOCK] @ x.T, -1.0, 1.0)
        kv = legendre_series(k.params.d, c, t)
        partials.append(float(w[start:start + BLOCK] @ (kv @ w)))
    return math.fsum(partials)


def _series_moment_sum(k: KernelSpec, x: np.ndarray, w: np.ndarray) -> float:
    # addition theorem on S^2: sum_ij w_i w_j Z P_ell(x_i.x_j) = sum_m (sum_i w_i Y_ell,m(x_i))^2,
    # so every term is a nonnegative square and exact rules give wce^2 ~ eps^2
    L = series_truncation(k)
    a = np.asarray(a_ell(k.params, np.arange(L + 1)), dtype=float)
    mom = harmonic_weighted_sums(x, w, L) ** 2
    ells = np.repeat(np.arange(L + 1), 2 * np.arange(L + 1) + 1)
    terms = a[ells] * mom
    terms[0] = 0.0
    return math.fsum(terms)


def wce_squared(rule, k: KernelSpec, include_mass_term: bool = True) -> float:
    """Squared worst-case error; may be slightly negative from rounding."""
    x, w = _canonical(rule)
    if k.form == "series" and k.params.d == 2 and series_truncation(k) <= MOMENT_MAX_DEGREE:
        double_sum = _series_moment_sum(k, x, w)
    elif k.form == "series":
        double_sum = _series_pair_sum(k, x, w)
    else:
        code = {"cui_freeden": 0, "distance": 1, "generalised_distance": 2}[k.form]
        # closed forms are const - g(r); the centred kernel subtracts a_0 from const
        const = float(_closed_form(k.form, k.params.d, k.params.s, np.zeros(1))[0]) - k.a0
        double_sum = _closed_pair_sum(x, w, code, 2.0 * k.params.s - k.params.d, const, BLOCK)
    if include_mass_term:
        double_sum += (float(np.sum(w)) - 1.0) ** 2 * k.a0
    return double_sum


def worst_case_error(rule, k: KernelSpec) -> float:
    """Worst-case integration error of ``rule`` in the RKHS of ``k``."""
    sq = wce_squared(rule, k)
    if sq < -1e-12:
        raise NumericalConsistencyError(f"negative squared worst-case error {sq:.3e}")
    return math.sqrt(max(sq, 0.0))


def default_kernel_for(s: float, d: int = 2, series_degree: int | None = None) -> KernelSpec:
    """Closed-form kernel where one exists for (d, s), otherwise the truncated series."""
    p = SobolevParams(d, s)
    if d / 2 < s <= (d + 1) / 2:
        return KernelSpec("generalised_distance", p)
    return KernelSpec("series", p, max_degree=series_degree)


@dataclass
class StrengthRow:
    s: float
    slope: float | None
    c_qmc: float
    wce: list
    degenerate: bool = False


def loglog_slope(N_list, values) -> float:
    n = np.log(np.asarray(N_list, dtype=float))
    v = np.log(np.asarray(values, dtype=float))
    if np.ptp(v) == 0.0 or np.ptp(n) == 0.0:
        raise DegenerateFitError("constant data, slope undefined")
    return float(np.polyfit(n, v, 1)[0])


def strength_estimate(generator, N_list, s_grid, d: int = 2, kernel_for=default_kernel_for,
                      slack: float = 0.1):
    """Fit log wce against log N for each s and report the empirical strength.

    Returns ``(rows, strength)`` where ``strength`` is the largest s whose
    slope is at most ``-s/d + slack`` (None if no s qualifies).
    """
    N_list = [int(n) for n in N_list]
    if len(N_list) < 3:
        raise ParameterError("need at least three point counts")
    rules = [generator(n) for n in N_list]
    rows = []
    for s in s_grid:
        k = kernel_for(s, d)
        wce = [worst_case_error(r, k) for r in rules]
        c_qmc = max(e * n ** (s / d) for e, n in zip(wce, N_list))
        try:
            slope = loglog_slope(N_list, wce)
            rows.append(StrengthRow(float(s), slope, c_qmc, wce))
        except DegenerateFitError:
            rows.append(StrengthRow(float(s), None, c_qmc, wce, degenerate=True))
    ok = [r.s for r in rows if r.slope is not None and r.slope <= -r.s / d + slack]
    return rows, (max(ok) if ok else None)
