"""Needlets, generalised needlets and the hybrid multiresolution approximation.

Level j >= 1 needlets are ``sqrt(w_k) * Lambda_j(<x_k, x>)`` with the filtered
kernel ``Lambda_j(t) = sum_ell h(ell / 2^(j-1)) Z(d, ell) P_ell(t)``; level 0
needlets are the constants ``sqrt(w_k)``.  Levels ``j <= J0`` use rules exact
to degree ``2^(j+1) - 1`` (classical needlets), levels above use arbitrary
positive-weight rules (generalised needlets).  The formula is the same for
both kinds; the kind only decides what is validated.

Two evaluation paths give the same numbers up to rounding:

``direct``
    one Legendre recurrence over the level band per (centre, point) pair;
    the reference path, cost proportional to ``sum_j N_j * band_j`` per point.
``harmonic``
    expands each level through the addition theorem into real harmonics of
    degree < 2^J (S^2 only); much cheaper when both the number of centres and
    the number of evaluation points are large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cubature import CubatureRule, has_precision
from .errors import MismatchError, ParameterError, PrecisionViolationError
from .filters import Filter, level_filter_values
from .sphere_core import (
    _check_t,
    harmonic_dims,
    harmonic_synthesis,
    harmonic_weighted_sums,
    legendre_series,
    unit_vectors,
)

FORMAT_VERSION = 1
BLOCK = 512


def required_precision(j: int) -> int:
    return 2 ** (j + 1) - 1


def coefficient_quad_degree(J: int) -> int:
    """Degree 3 * 2^J - 1 that preserves the needlet error estimates."""
    return 3 * 2**J - 1


def _rule_has_precision(rule: CubatureRule, degree: int) -> bool:
    if rule.claimed_precision is not None and rule.kind == "gl_product":
        return rule.claimed_precision >= degree
    if rule.claimed_precision is not None and rule.claimed_precision < degree:
        return False
    return has_precision(rule, degree)


@dataclass(frozen=True, eq=False)
class NeedletLevel:
    j: int
    rule: CubatureRule
    kind: str = "exact"  # "exact" (classical) or "qmc" (generalised)

    def __post_init__(self):
        if self.j < 0:
            raise ParameterError("level index must be >= 0")
        if self.kind not in ("exact", "qmc"):
            raise ParameterError(f"level kind must be 'exact' or 'qmc', got {self.kind!r}")

    @property
    def degree(self) -> int:
        return 0 if self.j == 0 else 2**self.j - 1

    @property
    def size(self) -> int:
        return len(self.rule)


@dataclass(frozen=True, eq=False)
class NeedletScheme:
    J0: int
    J: int
    levels: tuple
    filter: Filter = field(default_factory=Filter)
    d: int = 2
    validate: bool = True

    def __post_init__(self):
        if self.J0 < -1 or self.J < self.J0:
            raise ParameterError(f"need J >= J0 >= -1, got J0={self.J0}, J={self.J}")
        levels = tuple(self.levels)
        object.__setattr__(self, "levels", levels)
        if [lv.j for lv in levels] != list(range(self.J + 1)):
            raise ParameterError("levels must be contiguous 0..J")
        for lv in levels:
            want = "exact" if lv.j <= self.J0 else "qmc"
            if lv.kind != want:
                raise ParameterError(f"level {lv.j} must be of kind {want!r} for J0={self.J0}")
            if self.validate and lv.kind == "exact" and not _rule_has_precision(lv.rule, required_precision(lv.j)):
                raise PrecisionViolationError(
                    f"level {lv.j}: rule is not exact to degree {required_precision(lv.j)}")

    @property
    def max_degree(self) -> int:
        return 2**self.J - 1 if self.J >= 1 else 0

    @property
    def sizes(self) -> list[int]:
        return [lv.size for lv in self.levels]


def make_scheme(J0: int, J: int, exact_rule_for, qmc_rule_for=None, filt: Filter | None = None,
                validate: bool = True) -> NeedletScheme:
    """Assemble a hybrid scheme from per-level rule factories ``j -> CubatureRule``."""
    levels = []
    for j in range(J + 1):
        if j <= J0:
            levels.append(NeedletLevel(j, exact_rule_for(j), "exact"))
        else:
            if qmc_rule_for is None:
                raise ParameterError("levels above J0 need a qmc rule factory")
            levels.append(NeedletLevel(j, qmc_rule_for(j), "qmc"))
    return NeedletScheme(J0, J, tuple(levels), filt or Filter(), validate=validate)


# --------------------------------------------------------------------------
# kernels and single needlets


def _band_coefficients(filt: Filter, j: int, d: int) -> np.ndarray:
    """Legendre coefficients h(ell/2^(j-1)) Z(d, ell), ell = 0..2^j - 1."""
    ells, hv = level_filter_values(filt, j)
    c = np.zeros(2**j)
    c[ells] = hv * harmonic_dims(d, 2**j - 1)[ells]
    return c


def lambda_kernel(filt: Filter, j: int, t, d: int = 2):
    """Filtered projection kernel Lambda_j(t), j >= 1 (scalar or array t)."""
    if j < 1:
        raise ParameterError("Lambda_j is defined for j >= 1")
    t = _check_t(t)
    val = legendre_series(d, _band_coefficients(filt, j, d), t)
    return float(val) if np.ndim(val) == 0 else val


def needlet_value(level: NeedletLevel, k: int, x, filt: Filter | None = None, d: int = 2):
    """psi_{j,k}(x) (or Psi_{j,k}(x); the formula is the same)."""
    if not 0 <= k < level.size:
        raise IndexError(f"needlet index {k} out of range for level {level.j} (size {level.size})")
    x = np.asarray(x, dtype=float)
    sw = math.sqrt(level.rule.weights[k])
    if level.j == 0:
        val = np.full(x.shape[:-1], sw)
    else:
        t = np.clip(x @ level.rule.points[k], -1.0, 1.0)
        val = sw * lambda_kernel(filt or Filter(), level.j, t, d)
    return float(val) if np.ndim(val) == 0 else val


def localization_profile(level: NeedletLevel, k: int, angles, filt: Filter | None = None,
                         d: int = 2) -> np.ndarray:
    """|psi_{j,k}| at geodesic distance ``angles`` from its centre (zonal, so even in theta)."""
    if level.j < 1:
        raise ParameterError("localisation profile needs j >= 1")
    t = np.cos(np.asarray(angles, dtype=float))
    return math.sqrt(level.rule.weights[k]) * np.abs(lambda_kernel(filt or Filter(), level.j, t, d))


def _kernel_matrix_product(filt, j, d, centres, nodes, vec):
    """Return ``Lambda_j(centres @ nodes.T) @ vec`` block by block."""
    c = _band_coefficients(filt, j, d)
    out = np.empty(len(centres))
    for start in range(0, len(centres), BLOCK):
        g = np.clip(centres[start:start + BLOCK] @ nodes.T, -1.0, 1.0)
        out[start:start + BLOCK] = legendre_series(d, c, g) @ vec
    return out


# --------------------------------------------------------------------------
# coefficients


@dataclass(eq=False)
class CoefficientSet:
    """Per-level needlet coefficients ``(f, psi_{j,k})`` plus the rule used to compute them."""

    values: list
    quad_kind: str = "custom"
    quad_size: int = 0
    quad_precision: int | None = None

    def check(self, scheme: NeedletScheme) -> None:
        if len(self.values) != len(scheme.levels) or any(
                len(v) != lv.size for v, lv in zip(self.values, scheme.levels)):
            raise MismatchError("coefficient set does not match the scheme's level sizes")


def compute_coefficients(f, scheme: NeedletScheme, quad: CubatureRule, method: str = "harmonic",
                         allow_low_precision: bool = False) -> CoefficientSet:
    """Approximate ``(f, psi_{j,k}) = sum_q v_q f(y_q) psi_{j,k}(y_q)`` with the rule ``quad``.

    ``quad`` must be exact to degree 3 * 2^J - 1 unless ``allow_low_precision``.
    """
    if scheme.J >= 0 and not allow_low_precision:
        need = coefficient_quad_degree(scheme.J)
        if not _rule_has_precision(quad, need):
            raise PrecisionViolationError(f"coefficient rule must be exact to degree {need}")
    fv = f(quad.points) if callable(f) else np.asarray(f, dtype=float)
    vf = quad.weights * fv
    values = []
    if method == "harmonic":
        fhat = harmonic_weighted_sums(quad.points, vf, scheme.max_degree) if scheme.J >= 1 else None
        mean = float(np.sum(vf))
        for lv in scheme.levels:
            sw = np.sqrt(lv.rule.weights)
            if lv.j == 0:
                values.append(sw * mean)
                continue
            values.append(sw * harmonic_synthesis(_filtered_harmonics(scheme, lv.j, fhat), lv.rule.points))
    elif method == "direct":
        mean = math.fsum(vf)
        for lv in scheme.levels:
            sw = np.sqrt(lv.rule.weights)
            if lv.j == 0:
                values.append(sw * mean)
            else:
                values.append(sw * _kernel_matrix_product(scheme.filter, lv.j, scheme.d,
                                                          lv.rule.points, quad.points, vf))
    else:
        raise ParameterError(f"unknown method {method!r}")
    return CoefficientSet(values, quad.kind, len(quad), quad.claimed_precision)


def _filtered_harmonics(scheme: NeedletScheme, j: int, fhat: np.ndarray) -> np.ndarray:
    """Flat harmonic coefficients h(ell/2^(j-1)) * fhat_{ell,m}, truncated at degree 2^j - 1."""
    if scheme.d != 2:
        raise ParameterError("the harmonic path is implemented for S^2 only")
    L = 2**j - 1
    ells, hv = level_filter_values(scheme.filter, j)
    scale = np.zeros(L + 1)
    scale[ells] = hv
    per_col = np.repeat(scale, 2 * np.arange(L + 1) + 1)
    return per_col * fhat[: (L + 1) ** 2]


def level_contributions(coeffs: CoefficientSet, scheme: NeedletScheme, x,
                        method: str = "harmonic") -> np.ndarray:
    """Per-level terms ``sum_k c_{j,k} psi_{j,k}(x)``; shape (J+1, len(x))."""
    coeffs.check(scheme)
    x = unit_vectors(x, tol=1e-8) if len(np.shape(x)) == 2 and len(x) else np.zeros((0, 3))
    out = np.zeros((len(scheme.levels), len(x)))
    for lv, c in zip(scheme.levels, coeffs.values):
        sw = np.sqrt(lv.rule.weights)
        if lv.j == 0:
            out[0] = float(np.dot(c, sw))
            continue
        if method == "harmonic":
            g = harmonic_weighted_sums(lv.rule.points, c * sw, lv.degree)
            out[lv.j] = harmonic_synthesis(_filtered_harmonics(scheme, lv.j, g), x)
        elif method == "direct":
            out[lv.j] = _kernel_matrix_product(scheme.filter, lv.j, scheme.d, x, lv.rule.points, c * sw)
        else:
            raise ParameterError(f"unknown method {method!r}")
    return out


def evaluate_approximation(coeffs: CoefficientSet, scheme: NeedletScheme, x,
                           method: str = "direct") -> np.ndarray:
    """V_J(f; x) summed over all levels of the hybrid scheme."""
    x = np.atleast_2d(np.asarray(x, dtype=float)) if np.size(x) else np.zeros((0, 3))
    if not scheme.levels:
        return np.zeros(len(x))
    return level_contributions(coeffs, scheme, x, method).sum(axis=0)


# --------------------------------------------------------------------------
# serialisation


def save_coefficients(path, coeffs: CoefficientSet, scheme: NeedletScheme) -> None:
    """Write the CSV layout documented in docs/coefficient_format.md."""
    coeffs.check(scheme)
    lines = [
        f"# sphere-needlets coefficients v{FORMAT_VERSION}",
        f"# scheme J0={scheme.J0} J={scheme.J} d={scheme.d} filter_kappa={scheme.filter.kappa}",
        f"# quad kind={coeffs.quad_kind} n={coeffs.quad_size} precision="
        f"{'none' if coeffs.quad_precision is None else coeffs.quad_precision}",
    ]
    for lv in scheme.levels:
        lines.append(f"# level j={lv.j} kind={lv.kind} rule={lv.rule.kind} n={lv.size}")
    lines.append("level,k,coefficient")
    for lv, c in zip(scheme.levels, coeffs.values):
        lines.extend(f"{lv.j},{k},{float(v)!r}" for k, v in enumerate(c))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_coefficients(path) -> tuple[CoefficientSet, dict]:
    """Read a coefficient CSV; returns the set and the parsed header fields."""
    header: dict = {"levels": []}
    rows: dict[int, list] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("# level "):
            header["levels"].append(dict(kv.split("=") for kv in line[8:].split()))
        elif line.startswith("# scheme ") or line.startswith("# quad "):
            key = line.split()[1]
            header[key] = dict(kv.split("=") for kv in line.split()[2:])
        elif line.startswith("# sphere-needlets coefficients v"):
            header["version"] = int(line.rsplit("v", 1)[1])
        elif line and not line.startswith("#") and line != "level,k,coefficient":
            j, k, v = line.split(",")
            rows.setdefault(int(j), []).append((int(k), float(v)))
    if header.get("version") != FORMAT_VERSION:
        raise ParameterError(f"{path}: unsupported coefficient format")
    values = []
    for lv in header["levels"]:
        j, n = int(lv["j"]), int(lv["n"])
        entries = sorted(rows.get(j, []))
        if [k for k, _ in entries] != list(range(n)):
            raise MismatchError(f"{path}: level {j} rows do not match its header count {n}")
        values.append(np.array([v for _, v in entries]))
    quad = header.get("quad", {})
    prec = quad.get("precision", "none")
    cs = CoefficientSet(values, quad.get("kind", "custom"), int(quad.get("n", 0)),
                        None if prec == "none" else int(prec))
    return cs, header
