"""Polynomial and harmonic building blocks on the unit sphere S^d.

Conventions
-----------
* ``P_ell`` is the Legendre (Gegenbauer) polynomial attached to S^d,
  normalised so that ``P_ell(1) == 1``.
* Spherical harmonics are real and orthonormal with respect to the
  *normalised* surface measure (total mass 1), so ``Y_{0,1} == 1``.
* Harmonics of degree ``ell`` on S^2 carry orders ``m = 1 .. 2*ell + 1``:
  ``m = 1`` is the zonal one, ``m = 2k`` multiplies ``cos(k*phi)`` and
  ``m = 2k + 1`` multiplies ``sin(k*phi)``.  Flat tables store ``(ell, m)``
  at column ``ell**2 + m - 1``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, ParameterError, UnsupportedDimensionError

T_SLACK = 1e-12


# --------------------------------------------------------------------------
# dimension counts


def harmonic_space_dim(d: int, ell: int) -> int:
    """Dimension Z(d, ell) of the spherical harmonics of exact degree ell on S^d.

    Exact integer arithmetic (Python integers do not overflow).
    """
    if d < 1 or ell < 0:
        raise ParameterError(f"need d >= 1 and ell >= 0, got d={d}, ell={ell}")
    if ell == 0:
        return 1
    # homogeneous polynomials of degree ell in d+1 variables minus |x|^2 * (degree ell-2)
    return math.comb(ell + d, d) - math.comb(ell + d - 2, d)


def poly_space_dim(d: int, L: int) -> int:
    """Dimension of the spherical polynomials of degree <= L on S^d, i.e. Z(d+1, L)."""
    if d < 1 or L < 0:
        raise ParameterError(f"need d >= 1 and L >= 0, got d={d}, L={L}")
    return harmonic_space_dim(d + 1, L)


def harmonic_dims(d: int, L: int) -> np.ndarray:
    """Z(d, ell) for ell = 0..L as a float array (for weighting sums)."""
    return np.array([harmonic_space_dim(d, ell) for ell in range(L + 1)], dtype=float)


def laplace_eigenvalue(d: int, ell: int) -> float:
    """Eigenvalue ell*(ell+d-1) of the negative Laplace-Beltrami operator."""
    if ell < 0:
        raise ParameterError("ell must be non-negative")
    return float(ell * (ell + d - 1))


def omega_ratio(d: int) -> float:
    """Surface-area ratio omega_{d-1} / omega_d = Gamma((d+1)/2) / (sqrt(pi) Gamma(d/2))."""
    return math.exp(math.lgamma((d + 1) / 2) - math.lgamma(d / 2)) / math.sqrt(math.pi)


# --------------------------------------------------------------------------
# Legendre / Gegenbauer / Jacobi recurrences


def _check_t(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if t.size and (np.any(~np.isfinite(t)) or np.max(np.abs(t)) > 1.0 + T_SLACK):
        raise DomainError("t must lie in [-1, 1]")
    return np.clip(t, -1.0, 1.0)


def _check_d(d: int) -> None:
    if d < 2:
        raise UnsupportedDimensionError(f"sphere dimension must be >= 2, got {d}")


def legendre_table(d: int, L: int, t) -> np.ndarray:
    """Return ``P_0(t), ..., P_L(t)`` for S^d in one recurrence pass.

    The result has shape ``(L + 1,) + np.shape(t)``.  Uses

        (n + d - 2) P_n = (2n + d - 3) t P_{n-1} - (n - 1) P_{n-2},

    the Gegenbauer recurrence rescaled to ``P_n(1) = 1``.
    """
    _check_d(d)
    if L < 0:
        raise ParameterError("L must be non-negative")
    t = _check_t(t)
    out = np.empty((L + 1,) + t.shape)
    out[0] = 1.0
    if L >= 1:
        out[1] = t
    for n in range(2, L + 1):
        out[n] = ((2 * n + d - 3) * t * out[n - 1] - (n - 1) * out[n - 2]) / (n + d - 2)
    return out


def legendre_P(d: int, ell: int, t):
    """Normalised Legendre polynomial P_ell for S^d (scalar or array ``t``)."""
    if ell < 0:
        raise ParameterError("ell must be non-negative")
    val = legendre_table(d, ell, t)[ell]
    return float(val) if np.ndim(val) == 0 else val


def legendre_series(d: int, coeffs, t) -> np.ndarray:
    """Evaluate ``sum_ell coeffs[ell] * P_ell(t)`` without storing the table.

    Runs the same three-term recurrence as :func:`legendre_table`, keeping only
    two rows; zero leading coefficients are still stepped through.
    """
    _check_d(d)
    coeffs = np.asarray(coeffs, dtype=float)
    t = _check_t(t)
    acc = np.zeros(t.shape)
    if coeffs.size == 0:
        return acc
    p_prev = np.ones(t.shape)
    acc += coeffs[0] * p_prev
    if coeffs.size == 1:
        return acc
    p_cur = t.copy()
    acc += coeffs[1] * p_cur
    for n in range(2, coeffs.size):
        p_prev, p_cur = p_cur, ((2 * n + d - 3) * t * p_cur - (n - 1) * p_prev) / (n + d - 2)
        if coeffs[n] != 0.0:
            acc += coeffs[n] * p_cur
    return acc


def jacobi_table(n_max: int, alpha: float, beta: float, t) -> np.ndarray:
    """Classical Jacobi polynomials P_0^{(a,b)} .. P_n_max^{(a,b)} by recurrence."""
    t = np.asarray(t, dtype=float)
    a, b = float(alpha), float(beta)
    out = np.empty((n_max + 1,) + t.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = 0.5 * (a - b) + 0.5 * (a + b + 2.0) * t
    for n in range(2, n_max + 1):
        c = 2 * n + a + b
        a1 = 2.0 * n * (n + a + b) * (c - 2.0)
        a2 = (c - 1.0) * (a * a - b * b)
        a3 = (c - 2.0) * (c - 1.0) * c
        a4 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * c
        out[n] = ((a2 + a3 * t) * out[n - 1] - a4 * out[n - 2]) / a1
    return out


def proj_kernel(d: int, L: int, t):
    """Reproducing kernel of the degree-<=L polynomials: sum_{ell<=L} Z(d,ell) P_ell(t)."""
    t_arr = _check_t(t)
    val = legendre_series(d, harmonic_dims(d, L), t_arr)
    return float(val) if np.ndim(val) == 0 else val


def proj_kernel_closed_form(d: int, L: int, t):
    """Cross-check oracle: ((d)_L / (d/2)_L) * P_L^{(d/2, d/2-1)}(t).

    Pochhammer ratio via log-gamma, Jacobi polynomial via its own recurrence.
    """
    _check_d(d)
    t_arr = _check_t(t)
    ratio = math.exp(gammaln(d + L) - gammaln(d) - gammaln(d / 2 + L) + gammaln(d / 2))
    val = ratio * jacobi_table(L, d / 2, d / 2 - 1, t_arr)[L]
    return float(val) if np.ndim(val) == 0 else val


# --------------------------------------------------------------------------
# points


def unit_vectors(points, tol: float = 1e-8) -> np.ndarray:
    """Return ``points`` as an (N, d+1) float array of unit vectors.

    Rows are re-normalised when their norm is within ``tol`` of one;
    anything further away raises :class:`DomainError`.
    """
    x = np.atleast_2d(np.asarray(points, dtype=float))
    norms = np.linalg.norm(x, axis=1)
    bad = np.abs(norms - 1.0) > tol
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise DomainError(f"row {i} has norm {norms[i]!r}, not a unit vector")
    return x / norms[:, None]


def spherical_angles(points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(cos theta, sin theta, phi) of points on S^2."""
    x = np.asarray(points, dtype=float)
    if x.ndim != 2 or x.shape[1] != 3:
        raise UnsupportedDimensionError("real spherical harmonics are implemented for S^2 only")
    z = np.clip(x[:, 2], -1.0, 1.0)
    u = np.hypot(x[:, 0], x[:, 1])
    phi = np.arctan2(x[:, 1], x[:, 0])
    return z, u, phi


# --------------------------------------------------------------------------
# real spherical harmonics on S^2


def harmonic_index(ell: int, m: int) -> int:
    """Flat column of harmonic (ell, m); orders run over 1..2*ell+1."""
    if ell < 0 or not 1 <= m <= 2 * ell + 1:
        raise ParameterError(f"invalid harmonic index (ell={ell}, m={m})")
    return ell * ell + m - 1


def harmonic_from_index(idx: int) -> tuple[int, int]:
    ell = math.isqrt(idx)
    return ell, idx - ell * ell + 1


def _assoc_legendre_orders(L: int, z: np.ndarray, u: np.ndarray):
    """Yield ``(m, rows)`` with rows[ell - m] = fully normalised P_ell^m(z), ell = m..L.

    Normalisation makes ``P_ell^0`` and ``sqrt(2) P_ell^m cos(m phi)`` orthonormal
    under the normalised measure on S^2 (the geodesy "4 pi" convention).
    """
    pmm = np.ones_like(z)
    for m in range(L + 1):
        if m == 1:
            pmm = math.sqrt(3.0) * u
        elif m >= 2:
            pmm = pmm * u * math.sqrt((2 * m + 1) / (2 * m))
        rows = np.empty((L - m + 1,) + z.shape)
        rows[0] = pmm
        if m < L:
            rows[1] = math.sqrt(2 * m + 3) * z * pmm
        for ell in range(m + 2, L + 1):
            denom = (ell - m) * (ell + m)
            a = math.sqrt((2 * ell - 1) * (2 * ell + 1) / denom)
            b = math.sqrt((2 * ell + 1) * (ell + m - 1) * (ell - m - 1) / (denom * (2 * ell - 3)))
            rows[ell - m] = a * z * rows[ell - m - 1] - b * rows[ell - m - 2]
        yield m, rows


def real_sph_harm_table(L: int, points) -> np.ndarray:
    """All real harmonics up to degree L at ``points``; shape (N, (L+1)**2)."""
    z, u, phi = spherical_angles(points)
    out = np.empty((z.size, (L + 1) ** 2))
    for m, rows in _assoc_legendre_orders(L, z, u):
        ells = np.arange(m, L + 1)
        if m == 0:
            out[:, ells * ells] = rows.T
        else:
            c, s = np.cos(m * phi), np.sin(m * phi)
            out[:, ells * ells + 2 * m - 1] = (rows * c).T
            out[:, ells * ells + 2 * m] = (rows * s).T
    return out


def real_spherical_harmonic(ell: int, m: int, x) -> np.ndarray | float:
    """Value of the real orthonormal harmonic Y_{ell,m} on S^2 at one or many points."""
    idx = harmonic_index(ell, m)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if x.shape[-1] != 3:
        raise UnsupportedDimensionError("real spherical harmonics are implemented for S^2 only")
    vals = real_sph_harm_table(ell, np.atleast_2d(x))[:, idx]
    return float(vals[0]) if single else vals


def harmonic_weighted_sums(points, values, L: int, chunk: int = 65536) -> np.ndarray:
    """Return ``sum_i values[i] * Y_{ell,m}(points[i])`` for all ell <= L.

    Works order by order so memory stays O(chunk * L) even for large rules.
    """
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    out = np.zeros((L + 1) ** 2)
    for start in range(0, len(points), chunk):
        z, u, phi = spherical_angles(points[start:start + chunk])
        v = values[start:start + chunk]
        for m, rows in _assoc_legendre_orders(L, z, u):
            ells = np.arange(m, L + 1)
            if m == 0:
                out[ells * ells] += rows @ v
            else:
                out[ells * ells + 2 * m - 1] += rows @ (v * np.cos(m * phi))
                out[ells * ells + 2 * m] += rows @ (v * np.sin(m * phi))
    return out


def harmonic_synthesis(coeffs, points, chunk: int = 65536) -> np.ndarray:
    """Evaluate ``sum coeffs[idx] * Y_idx(x)`` at ``points`` (coeffs in flat order)."""
    coeffs = np.asarray(coeffs, dtype=float)
    L = math.isqrt(coeffs.size) - 1
    if (L + 1) ** 2 != coeffs.size:
        raise ParameterError("coefficient vector length must be a perfect square")
    points = np.asarray(points, dtype=float)
    out = np.zeros(len(points))
    for start in range(0, len(points), chunk):
        z, u, phi = spherical_angles(points[start:start + chunk])
        acc = np.zeros(z.size)
        for m, rows in _assoc_legendre_orders(L, z, u):
            ells = np.arange(m, L + 1)
            if m == 0:
                acc += coeffs[ells * ells] @ rows
            else:
                acc += (coeffs[ells * ells + 2 * m - 1] @ rows) * np.cos(m * phi)
                acc += (coeffs[ells * ells + 2 * m] @ rows) * np.sin(m * phi)
        out[start:start + chunk] = acc
    return out


def fourier_coefficients(f, L: int, rule) -> np.ndarray:
    """Quadrature Laplace-Fourier coefficients ``sum_k w_k f(x_k) Y_{ell,m}(x_k)``.

    ``f`` is a callable on an (N, 3) array (or an array of values at the rule's
    nodes).  Entry ``harmonic_index(ell, m)`` of the result holds the (ell, m)
    coefficient.  Exact for polynomials of degree <= L when the rule has
    precision >= 2L.
    """
    vals = f(rule.points) if callable(f) else np.asarray(f, dtype=float)
    return harmonic_weighted_sums(rule.points, rule.weights * vals, L)
