"""Test functions, L2 error estimation and hybrid-needlet convergence runs."""

from __future__ import annotations

import functools
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .cubature import CubatureRule, bauer_spiral, equal_area_points, gl_product_rule, needlet_rule_for_level
from .errors import DegenerateFitError, ParameterError
from .filters import Filter
from .needlet import coefficient_quad_degree, compute_coefficients, level_contributions, make_scheme
from .sphere_core import real_spherical_harmonic, unit_vectors

WENDLAND_CENTRES = np.array([[1.0, 0, 0], [-1.0, 0, 0], [0, 1.0, 0], [0, -1.0, 0], [0, 0, 1.0], [0, 0, -1.0]])


# --------------------------------------------------------------------------
# test functions


def franke(x) -> np.ndarray:
    """Franke's four-Gaussian test function restricted to S^2 (second term linear in y, z)."""
    x = np.asarray(x, dtype=float)
    a, b, c = 9.0 * x[..., 0], 9.0 * x[..., 1], 9.0 * x[..., 2]
    return (0.75 * np.exp(-((a - 2) ** 2) / 4 - (b - 2) ** 2 / 4 - (c - 2) ** 2 / 4)
            + 0.75 * np.exp(-((a + 1) ** 2) / 49 - (b + 1) / 10 - (c + 1) / 10)
            + 0.5 * np.exp(-((a - 7) ** 2) / 4 - (b - 3) ** 2 / 4 - (c - 5) ** 2 / 4)
            - 0.2 * np.exp(-((a - 4) ** 2) - (b - 7) ** 2 - (c - 5) ** 2))


def wendland_delta(k: int) -> float:
    """Equal-area scale 3(k+1) Gamma(k+1/2) / (2 Gamma(k+1))."""
    return 3.0 * (k + 1) * math.exp(math.lgamma(k + 0.5) - math.lgamma(k + 1)) / 2.0


def _wendland_tilde(k: int, r: np.ndarray) -> np.ndarray:
    u = np.maximum(1.0 - r, 0.0)
    if k == 0:
        return u**2
    if k == 1:
        return u**4 * (4 * r + 1)
    if k == 2:
        return u**6 * (35 * r**2 + 18 * r + 3) / 3
    if k == 3:
        return u**8 * (32 * r**3 + 25 * r**2 + 8 * r + 1)
    return u**10 * (429 * r**4 + 450 * r**3 + 210 * r**2 + 50 * r + 5) / 5


def wendland_phi(k: int, r):
    """Normalised Wendland function phi_k(r) = phi~_k(r / delta_k), r >= 0."""
    if k not in range(5):
        raise ParameterError(f"Wendland index must be in 0..4, got {k}")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ParameterError("r must be non-negative")
    val = _wendland_tilde(k, r / wendland_delta(k))
    return float(val) if val.ndim == 0 else val


def wendland_sum(k: int, x) -> np.ndarray:
    """f_k(x): six Wendland bumps centred at +-e_1, +-e_2, +-e_3 (Euclidean distance)."""
    x = np.asarray(x, dtype=float)
    dist = np.linalg.norm(x[..., None, :] - WENDLAND_CENTRES, axis=-1)
    return np.sum(wendland_phi(k, dist), axis=-1)


@dataclass(frozen=True)
class TestFunction:
    """A named test function; ``kind`` is franke, wendland, harmonic or custom."""

    __test__ = False  # not a pytest class

    kind: str
    k: int = 0
    ell: int = 0
    m: int = 1
    func: object = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("franke", "wendland", "harmonic", "custom"):
            raise ParameterError(f"unknown test function kind {self.kind!r}")
        if self.kind == "wendland" and self.k not in range(5):
            raise ParameterError("wendland index must be in 0..4")
        if self.kind == "custom" and not callable(self.func):
            raise ParameterError("custom test function needs a callable")

    @property
    def name(self) -> str:
        return {"franke": "franke", "wendland": f"wendland{self.k}",
                "harmonic": f"harmonic:{self.ell}:{self.m}", "custom": "custom"}[self.kind]

    def __call__(self, x):
        if self.kind == "franke":
            return franke(x)
        if self.kind == "wendland":
            return wendland_sum(self.k, x)
        if self.kind == "harmonic":
            return real_spherical_harmonic(self.ell, self.m, x)
        return self.func(x)


def parse_test_function(name: str) -> TestFunction:
    if name == "franke":
        return TestFunction("franke")
    if name.startswith("wendland") and name[8:].isdigit():
        return TestFunction("wendland", k=int(name[8:]))
    if name.startswith("harmonic:"):
        _, ell, m = name.split(":")
        return TestFunction("harmonic", ell=int(ell), m=int(m))
    raise ParameterError(f"unknown test function {name!r}")


# --------------------------------------------------------------------------
# L2 error


@functools.lru_cache(maxsize=4)
def _equal_area_cached(M: int) -> CubatureRule:
    return equal_area_points(M)


def l2_error(f, approx, M: int = 10**6, rule: CubatureRule | None = None) -> float:
    """Root-mean-square of ``f - approx`` over M equal-area points.

    ``f`` and ``approx`` are callables on (n, 3) arrays or precomputed values.
    """
    if rule is None:
        if M < 1:
            raise ParameterError("M must be >= 1")
        rule = _equal_area_cached(int(M))
    fv = f(rule.points) if callable(f) else np.asarray(f, dtype=float)
    av = approx(rule.points) if callable(approx) else np.asarray(approx, dtype=float)
    return math.sqrt(max(0.0, float(rule.weights @ (fv - av) ** 2)))


# --------------------------------------------------------------------------
# experiments


@dataclass
class RunConfig:
    J0: int = 3
    J: int = 5
    exact_source: str = "gl"          # "gl" or "design:<path template with {j}>"
    qmc_source: str = "spiral"        # "spiral" or "equalarea"
    qmc_size_factor: int = 1          # N_j = c * 2^(2(j+1))
    filter_kappa: int = 5
    coeff_degree: int | None = None   # default 3 * 2^J - 1
    l2_points: int = 10**5
    method: str = "harmonic"
    out: str | None = None

    def __post_init__(self):
        if not -1 <= self.J0 <= self.J:
            raise ParameterError(f"need J >= J0 >= -1, got J0={self.J0}, J={self.J}")
        if self.qmc_size_factor < 1 or self.l2_points < 1:
            raise ParameterError("point counts must be >= 1")
        if self.qmc_source not in ("spiral", "equalarea"):
            raise ParameterError(f"unknown qmc source {self.qmc_source!r}")
        if not (self.exact_source == "gl" or self.exact_source.startswith("design:")):
            raise ParameterError(f"exact source must be 'gl' or 'design:PATH', got {self.exact_source!r}")

    def qmc_size(self, j: int) -> int:
        return self.qmc_size_factor * 2 ** (2 * (j + 1))


@dataclass
class ErrorReport:
    config: dict
    function: str
    levels: list
    errors: list          # L2 error of V_j after adding level j
    sizes: list           # rule size per level
    kinds: list
    timings: dict = field(default_factory=dict)

    def rows(self) -> list[tuple]:
        out = []
        for j, e, n, kind in zip(self.levels, self.errors, self.sizes, self.kinds):
            out.append((j, "l2_error", e))
            out.append((j, "n_points", n))
            out.append((j, "exact_level", int(kind == "exact")))
        return out


def _exact_rule_factory(source: str):
    if source == "gl":
        return lambda j: needlet_rule_for_level(j, "gl_product")
    template = source.split(":", 1)[1]
    return lambda j: needlet_rule_for_level(j, "design_file", template.format(j=j))


def _qmc_rule_factory(cfg: RunConfig):
    make = bauer_spiral if cfg.qmc_source == "spiral" else equal_area_points
    return lambda j: make(cfg.qmc_size(j))


def run_experiment(cfg: RunConfig, f) -> ErrorReport:
    """Build the hybrid scheme, compute coefficients once and report cumulative L2 errors."""
    if not isinstance(f, TestFunction):
        f = TestFunction("custom", func=f)
    timings = {}
    t0 = time.perf_counter()
    exact = _exact_rule_factory(cfg.exact_source)
    qmc = _qmc_rule_factory(cfg)

    def exact_with_context(j):
        try:
            return exact(j)
        except Exception as exc:
            exc.args = (f"level {j}: {exc.args[0] if exc.args else exc}",) + exc.args[1:]
            raise

    scheme = make_scheme(cfg.J0, cfg.J, exact_with_context, qmc, Filter(cfg.filter_kappa))
    timings["build"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    degree = cfg.coeff_degree if cfg.coeff_degree is not None else coefficient_quad_degree(max(cfg.J, 0))
    quad = gl_product_rule(degree)
    coeffs = compute_coefficients(f, scheme, quad, method=cfg.method,
                                  allow_low_precision=cfg.coeff_degree is not None)
    timings["coefficients"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    rule = _equal_area_cached(int(cfg.l2_points))
    fv = f(rule.points)
    errors = []
    if scheme.levels:
        partial = np.cumsum(level_contributions(coeffs, scheme, rule.points, cfg.method), axis=0)
        errors = [l2_error(fv, row, rule=rule) for row in partial]
    timings["evaluation"] = time.perf_counter() - t0

    report = ErrorReport(asdict(cfg), f.name, [lv.j for lv in scheme.levels], errors,
                         scheme.sizes, [lv.kind for lv in scheme.levels], timings)
    if cfg.out:
        write_report_csv(report, cfg.out)
    return report


def format_report_csv(report: ErrorReport) -> str:
    """Fixed ``level,metric,value`` layout; config echoed in leading comments, no timings."""
    cfg = report.config
    lines = [f"# function={report.function}"]
    lines += [f"# {key}={cfg[key]}" for key in sorted(cfg) if key != "out"]
    lines.append("level,metric,value")
    for j, metric, value in report.rows():
        lines.append(f"{j},{metric},{value!r}")
    return "\n".join(lines) + "\n"


def write_report_csv(report: ErrorReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_report_csv(report))


def fit_convergence_order(levels, errors) -> float:
    """Least-squares beta in error ~ 2^(-beta J); non-positive errors are dropped."""
    lv = np.asarray(levels, dtype=float)
    err = np.asarray(errors, dtype=float)
    keep = np.isfinite(err) & (err > 0)
    if keep.sum() < 2 or np.ptp(lv[keep]) == 0:
        raise DegenerateFitError("need at least two usable error values at distinct levels")
    slope = np.polyfit(lv[keep], np.log2(err[keep]), 1)[0]
    return float(-slope)
