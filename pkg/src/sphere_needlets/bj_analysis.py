"""Error-budget constants B_j for generalised needlet levels.

B_j is the constant in front of ``N_j^(-s/d)`` in the generalised-needlet error
bound.  Its square is the one-dimensional integral

    B_j^2 = (omega_{d-1}/omega_d) int_{-1}^{1} A_j(t)^2 S_M(t) (1 - t^2)^(d/2 - 1) dt,

with ``A_j(t) = sum_ell h(ell/2^(j-1))^2 Z(d, ell) P_ell(t)``, ``M = 2^j`` and
``S_M(t) = sum_{n <= 2(M-1)} (1+n)^(2s) Z(d, n) P_n(t)``.  The integrand is a
polynomial, so Gauss-Jacobi quadrature is exact up to rounding; expanding it
instead with the Gegenbauer triple-product integral gives a sum of
non-negative terms.  The two routes share only the filter values.

The quadrature route runs in extended precision (``numpy.longdouble``): the
high-degree Legendre projections of A_j^2 are ~1e-10 of its peak, and weighting
them by (1+n)^(2s) exposes double rounding at the 1e-8 level by j = 7.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, roots_jacobi

from .errors import NumericalConsistencyError, ParameterError, ResourceLimitError
from .filters import Filter, level_filter_values
from .sphere_core import _check_d, _check_t, harmonic_dims, legendre_series, omega_ratio

MAX_NODES = 1 << 20
METHODS = ("quadrature", "exact_sum", "asymptotic")


@dataclass(frozen=True)
class BjRequest:
    d: int = 2
    s: float = 2.0
    j: int = 5
    filter: Filter = field(default_factory=Filter)

    def __post_init__(self):
        _check_d(self.d)
        if not self.s > self.d / 2:
            raise ParameterError(f"need s > d/2, got s={self.s}, d={self.d}")
        if self.j < 1:
            raise ParameterError("B_j is defined for levels j >= 1")


@dataclass(frozen=True)
class BjResult:
    value: float
    method: str
    diagnostics: dict = field(default_factory=dict)


def s_m_kernel(d: int, s: float, M: int, t):
    """S_M(t) = sum_{n=0}^{2(M-1)} (1+n)^(2s) Z(d, n) P_n(t)."""
    if M < 1:
        raise ParameterError("M must be >= 1")
    t = _check_t(t)
    n_max = 2 * (M - 1)
    n = np.arange(n_max + 1, dtype=float)
    val = legendre_series(d, (1.0 + n) ** (2.0 * s) * harmonic_dims(d, n_max), t)
    return float(val) if np.ndim(val) == 0 else val


def bj_node_count(j: int) -> int:
    """Gauss-Jacobi nodes exact for the integrand degree 6 * 2^j - 6."""
    return -(-(6 * 2**j - 5) // 2)


def _filtered_sum_coefficients(req: BjRequest) -> np.ndarray:
    ells, hv = level_filter_values(req.filter, req.j)
    c = np.zeros(2**req.j)
    c[ells] = hv**2 * harmonic_dims(req.d, 2**req.j - 1)[ells]
    return c


def _jacobi_symmetric(n: int, a, x):
    """P_n^{(a,a)}(x) by the three-term recurrence, in the dtype of ``x``."""
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev
    p = (a + 1) * x
    for k in range(2, n + 1):
        c = 2 * k + 2 * a
        p_prev, p = p, ((c - 1) * c * (c - 2) * x * p - 2 * (k + a - 1) ** 2 * c * p_prev) / (
            2 * k * (k + 2 * a) * (c - 2))
    return p


def gauss_jacobi(n: int, a: float, newton_steps: int = 3):
    """Gauss-Jacobi rule for the weight (1-t^2)^a on [-1, 1] in long double.

    scipy's double nodes seed a few Newton steps on the Jacobi recurrence;
    weights use the closed form with the derivative
    ``P_n' = (n + 2a + 1)/2 * P_{n-1}^{(a+1, a+1)}``.
    """
    if n < 1:
        raise ParameterError("need at least one node")
    x0, _ = roots_jacobi(n, a, a)
    x = x0.astype(np.longdouble)
    aL = np.longdouble(a)

    def deriv(x):
        return (n + 2 * aL + 1) / 2 * _jacobi_symmetric(n - 1, aL + 1, x)

    for _ in range(newton_steps):
        x = x - _jacobi_symmetric(n, aL, x) / deriv(x)
    dp = deriv(x)
    log_c = (2 * math.lgamma(n + a + 1) - math.lgamma(n + 2 * a + 1) - math.lgamma(n + 1)
             + (2 * a + 1) * math.log(2.0))
    w = np.exp(np.longdouble(log_c)) / ((1 - x * x) * dp * dp)
    return x, w


def _legendre_series_ld(d: int, coeffs, x):
    """sum_n c_n P_n(x) for the S^d Legendre polynomials, in long double."""
    c = np.asarray(coeffs, dtype=np.longdouble)
    total = c[0] * np.ones_like(x)
    if len(c) == 1:
        return total
    p_prev, p = np.ones_like(x), x.copy()
    total = total + c[1] * p
    for n in range(2, len(c)):
        p_prev, p = p, ((2 * n + d - 3) * x * p - (n - 1) * p_prev) / (n + d - 2)
        total = total + c[n] * p
    return total


def bj_quadrature(req: BjRequest, n_nodes: int | None = None, max_nodes: int = MAX_NODES) -> BjResult:
    """B_j from the Legendre-expansion integral by Gauss-Jacobi quadrature."""
    n = bj_node_count(req.j) if n_nodes is None else int(n_nodes)
    if n > max_nodes:
        raise ResourceLimitError(f"B_{req.j} needs {n} quadrature nodes, cap is {max_nodes}")
    t, w = gauss_jacobi(n, req.d / 2.0 - 1.0)
    A = _legendre_series_ld(req.d, _filtered_sum_coefficients(req), t)
    n_max = 2 * (2**req.j - 1)
    deg = np.arange(n_max + 1, dtype=np.longdouble)
    S = _legendre_series_ld(req.d, (1 + deg) ** np.longdouble(2 * req.s) * harmonic_dims(req.d, n_max), t)
    sq = np.longdouble(omega_ratio(req.d)) * np.sum(np.sort(w * A * A * S))
    if not sq > 0:
        raise NumericalConsistencyError(f"non-positive B_j^2 = {float(sq):.3e}")
    return BjResult(float(np.sqrt(sq)), "quadrature", {"nodes": n, "B_squared": float(sq)})


def _triple_log_terms(req: BjRequest):
    """Log of every non-zero term of the triple sum, indexed by (n, ell, ell')."""
    lam = (req.d - 1) / 2.0
    ells, hv = level_filter_values(req.filter, req.j)
    n = np.arange(2 * (2**req.j - 1) + 1)
    N, L1, L2 = np.meshgrid(n, ells, ells, indexing="ij")
    two_r = N + L1 + L2
    keep = (two_r % 2 == 0) & (N <= L1 + L2) & (L1 <= N + L2) & (L2 <= N + L1)
    N, L1, L2 = N[keep], L1[keep], L2[keep]
    r = (N + L1 + L2) // 2
    logh2 = 2.0 * np.log(hv)
    lh1 = logh2[np.searchsorted(ells, L1)]
    lh2 = logh2[np.searchsorted(ells, L2)]

    # Z(d, k) P_k = (k + lam)/lam * C_k^lam, and the weighted integral of three
    # Gegenbauer polynomials has a closed gamma-ratio form
    log_pref = (math.log(omega_ratio(req.d)) + math.log(math.pi) + (1 - 2 * lam) * math.log(2.0)
                - 4 * math.lgamma(lam))
    out = log_pref + gammaln(r + 2 * lam) - gammaln(r + lam + 1)
    for k in (N, L1, L2):
        out += gammaln(r - k + lam) - gammaln(r - k + 1) + np.log((k + lam) / lam)
    out += 2.0 * req.s * np.log1p(N) + lh1 + lh2
    return out, int(keep.size)


def bj_exact(req: BjRequest) -> BjResult:
    """B_j as a square root of a sum of non-negative Gegenbauer triple-product terms."""
    logs, n_all = _triple_log_terms(req)
    if logs.size == 0:
        raise ParameterError("empty triple sum")
    top = float(np.max(logs))
    # every term is exp(real), hence non-negative; sorted accumulation keeps it deterministic
    terms = np.sort(np.exp(logs - top))
    assert np.all(terms >= 0.0)
    sq_scaled = math.fsum(terms)
    value = math.exp(0.5 * (top + math.log(sq_scaled)))
    return BjResult(value, "exact_sum", {"terms": int(logs.size), "candidates": n_all})


def bj_asymptotic(d: int, s: float, j: int) -> float:
    """Envelope 2^(j(s+d))."""
    return 2.0 ** (j * (s + d))


def compute_bj(req: BjRequest, method: str = "quadrature") -> BjResult:
    if method == "quadrature":
        return bj_quadrature(req)
    if method == "exact_sum":
        return bj_exact(req)
    if method == "asymptotic":
        return BjResult(bj_asymptotic(req.d, req.s, req.j), "asymptotic")
    raise ParameterError(f"unknown B_j method {method!r}")


@dataclass
class ErrorBudget:
    total: float
    per_level: dict
    recommended_N: dict
    B: dict


def error_budget(scheme, s: float, C_qmc: float, method: str = "quadrature") -> ErrorBudget:
    """Second term of the hybrid error bound and the per-level point counts it suggests.

    Per level j > J0 the contribution is ``B_j / N_j^(s/d)``; the total is their
    sum times ``C_qmc / 2^((J0-1)s)``.  ``recommended_N[j] = ceil(B_j^(d/s))``.
    """
    d = scheme.d
    per, rec, bvals = {}, {}, {}
    for lv in scheme.levels:
        if lv.j <= scheme.J0:
            continue
        b = compute_bj(BjRequest(d, s, lv.j, scheme.filter), method).value
        bvals[lv.j] = b
        per[lv.j] = b / lv.size ** (s / d)
        rec[lv.j] = math.ceil(b ** (d / s))
    total = C_qmc / 2.0 ** ((scheme.J0 - 1) * s) * math.fsum(per.values())
    return ErrorBudget(total, per, rec, bvals)
