"""Weighted point sets on S^2: generation, loading and exactness checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    NonPositiveWeightError,
    NonUnitPointError,
    ParameterError,
    PointSetParseError,
    PrecisionViolationError,
)
from .sphere_core import harmonic_weighted_sums, poly_space_dim

KINDS = ("gl_product", "spherical_design_file", "bauer_spiral", "equal_area", "random", "custom")
EXACT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CubatureRule:
    """Points ``x_k`` (N x 3) and positive weights ``w_k`` approximating the mean over S^2."""

    points: np.ndarray
    weights: np.ndarray
    kind: str = "custom"
    claimed_precision: int | None = None
    claimed_strength: float | None = None

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=float)
        w = np.ascontiguousarray(self.weights, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ParameterError("points must be an (N, 3) array")
        if w.shape != (pts.shape[0],):
            raise ParameterError("need exactly one weight per point")
        if pts.shape[0] == 0:
            raise ParameterError("a cubature rule needs at least one point")
        if np.any(w <= 0.0):
            raise NonPositiveWeightError("cubature weights must be positive")
        if self.kind not in KINDS:
            raise ParameterError(f"unknown rule kind {self.kind!r}")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.points.shape[0]

    def integrate(self, f) -> float:
        vals = f(self.points) if callable(f) else np.asarray(f, dtype=float)
        return float(self.weights @ vals)


def _from_angles(z: np.ndarray, phi: np.ndarray) -> np.ndarray:
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def gl_product_rule(t: int) -> CubatureRule:
    """Gauss-Legendre in cos(theta) times equispaced azimuths, exact on P_t(S^2).

    ``ceil((t+1)/2)`` latitude nodes and ``t+1`` longitudes; points are stored
    ring by ring from the south pole upward.
    """
    if t < 0:
        raise ParameterError("degree must be non-negative")
    n_lat = (t + 2) // 2
    n_lon = t + 1
    z, wz = np.polynomial.legendre.leggauss(n_lat)
    phi = 2.0 * np.pi * np.arange(n_lon) / n_lon
    zz = np.repeat(z, n_lon)
    pp = np.tile(phi, n_lat)
    w = np.repeat(wz / (2.0 * n_lon), n_lon)
    w = w / w.sum()
    return CubatureRule(_from_angles(zz, pp), w, "gl_product", claimed_precision=t)


def bauer_spiral(N: int) -> CubatureRule:
    """Bauer generalised spiral: z_k = 1 - (2k-1)/N, phi_k = sqrt(N pi) * theta_k mod 2 pi."""
    if N < 2:
        raise ParameterError("spiral needs N >= 2")
    k = np.arange(1, N + 1)
    z = 1.0 - (2.0 * k - 1.0) / N
    theta = np.arccos(z)
    phi = np.mod(math.sqrt(N * math.pi) * theta, 2.0 * np.pi)
    return CubatureRule(_from_angles(z, phi), np.full(N, 1.0 / N), "bauer_spiral", claimed_strength=3.0)


def _cap_colatitude(area_fraction: float) -> float:
    # normalised area of the cap {theta <= a} is sin^2(a/2)
    return 2.0 * math.asin(math.sqrt(min(1.0, max(0.0, area_fraction))))


def equal_area_points(N: int) -> CubatureRule:
    """Centres of a zonal equal-area partition of S^2 into N cells.

    Two polar caps of area 1/N each; the band between them is cut into
    collars whose cell counts are rounded from the ideal (running-remainder
    rounding), then each collar is split into equal longitude sectors.
    Collar boundaries are placed so every cell has area exactly 1/N.
    """
    if N < 1:
        raise ParameterError("N must be >= 1")
    if N == 1:
        return CubatureRule(np.array([[0.0, 0.0, 1.0]]), np.ones(1), "equal_area")
    if N == 2:
        pts = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
        return CubatureRule(pts, np.full(2, 0.5), "equal_area")

    cap = _cap_colatitude(1.0 / N)
    ideal_angle = math.sqrt(4.0 * math.pi / N)
    n_collars = max(1, round((math.pi - 2.0 * cap) / ideal_angle))
    fit_angle = (math.pi - 2.0 * cap) / n_collars

    counts = []
    remainder = 0.0
    for i in range(n_collars):
        a0 = cap + i * fit_angle
        a1 = a0 + fit_angle
        ideal = N * (math.sin(a1 / 2) ** 2 - math.sin(a0 / 2) ** 2) + remainder
        c = round(ideal)
        remainder = ideal - c
        counts.append(int(c))
    # rounding remainders telescope; fix any off-by-one on the last collar
    counts[-1] += (N - 2) - sum(counts)

    z_parts = [np.array([1.0])]
    phi_parts = [np.array([0.0])]
    done = 1
    top = cap
    for c in counts:
        bottom = _cap_colatitude((done + c) / N)
        if c > 0:
            mid = 0.5 * (top + bottom)
            z_parts.append(np.full(c, math.cos(mid)))
            phi_parts.append(2.0 * np.pi * (np.arange(c) + 0.5) / c)
        done += c
        top = bottom
    z_parts.append(np.array([-1.0]))
    phi_parts.append(np.array([0.0]))
    pts = _from_angles(np.concatenate(z_parts), np.concatenate(phi_parts))
    return CubatureRule(pts, np.full(N, 1.0 / N), "equal_area")


def random_points(N: int, seed: int = 0) -> CubatureRule:
    """Independent uniform points (Monte Carlo baseline), equal weights."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((N, 3))
    x /= np.linalg.norm(x, axis=1)[:, None]
    return CubatureRule(x, np.full(N, 1.0 / N), "random")


def load_pointset(path, weight_mode: str = "equal", unit_tol: float = 1e-8,
                  normalise_weights: bool = True) -> CubatureRule:
    """Read a point-set file: rows ``x y z`` or ``x y z w``; ``#`` lines are comments.

    ``weight_mode="equal"`` assigns 1/N (a fourth column, if present, is
    ignored); ``"in_file"`` reads the fourth column, which is rescaled to sum
    to one unless ``normalise_weights`` is false (catalogues often store
    weights summing to 4 pi).
    """
    if weight_mode not in ("equal", "in_file"):
        raise ParameterError(f"weight_mode must be 'equal' or 'in_file', got {weight_mode!r}")
    rows = []
    ncols = None
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) not in (3, 4) or (ncols is not None and len(fields) != ncols):
            raise PointSetParseError(f"{path}:{lineno}: expected 3 or 4 columns consistently")
        ncols = len(fields)
        try:
            rows.append([float(v) for v in fields])
        except ValueError as exc:
            raise PointSetParseError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise PointSetParseError(f"{path}: no points found")
    data = np.array(rows)
    pts = data[:, :3]
    norms = np.linalg.norm(pts, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > unit_tol)
    if bad.size:
        raise NonUnitPointError(f"{path}: row {bad[0] + 1} has norm {norms[bad[0]]:.6g}")
    pts = pts / norms[:, None]
    if weight_mode == "equal":
        w = np.full(len(pts), 1.0 / len(pts))
    else:
        if ncols != 4:
            raise PointSetParseError(f"{path}: weight_mode='in_file' needs a fourth column")
        w = data[:, 3]
        if np.any(w <= 0.0):
            raise NonPositiveWeightError(f"{path}: weights must be positive")
        if normalise_weights:
            w = w / w.sum()
    return CubatureRule(pts, w, "spherical_design_file")


def exactness_defect(rule: CubatureRule, L: int) -> np.ndarray:
    """Per-degree defect ``max_m |sum_k w_k Y_{ell,m}(x_k) - delta_{ell,0}|`` for ell <= L."""
    if L < 0:
        raise ParameterError("L must be non-negative")
    sums = harmonic_weighted_sums(rule.points, rule.weights, L)
    sums[0] -= 1.0
    return np.array([np.max(np.abs(sums[ell * ell:(ell + 1) ** 2])) for ell in range(L + 1)])


def verified_precision(rule: CubatureRule, L_max: int, tol: float = EXACT_TOL) -> int:
    """Largest L <= L_max with all defects up to L below ``tol`` (-1 if none)."""
    defects = exactness_defect(rule, L_max)
    failed = np.flatnonzero(defects > tol)
    return int(failed[0]) - 1 if failed.size else L_max


def has_precision(rule: CubatureRule, L: int, tol: float = EXACT_TOL) -> bool:
    return bool(np.all(exactness_defect(rule, L) <= tol))


def min_points_for_precision(L: int) -> int:
    """Lower bound dim P_{floor(L/2)}(S^2) on the size of any rule exact to degree L."""
    return poly_space_dim(2, L // 2)


def needlet_rule_for_level(j: int, source: str = "gl_product", path=None,
                           weight_mode: str = "equal") -> CubatureRule:
    """Cubature rule exact to degree 2^(j+1) - 1 for needlet level j."""
    if j < 0:
        raise ParameterError("level must be >= 0")
    degree = 2 ** (j + 1) - 1
    if source in ("gl", "gl_product"):
        return gl_product_rule(degree)
    if source in ("design", "design_file"):
        if path is None:
            raise ParameterError("design_file source needs a path")
        rule = load_pointset(path, weight_mode)
        if not has_precision(rule, degree):
            got = verified_precision(rule, degree)
            raise PrecisionViolationError(
                f"{path}: verified precision {got} < {degree} required at level {j}")
        return CubatureRule(rule.points, rule.weights, rule.kind, claimed_precision=degree)
    raise ParameterError(f"unknown rule source {source!r}")
