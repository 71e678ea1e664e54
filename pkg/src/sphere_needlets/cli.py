"""Command-line interface: ``sphere-needlets <command> [options]``.

Every command writes CSV (to ``--out`` or stdout).  Floats are written with
``repr`` so repeated runs are bitwise identical.  Library errors are printed
as ``error[<category>]: <message>`` with a category-specific exit code.
"""

from __future__ import annotations

import argparse
import io
import sys

import numpy as np

from . import bj_analysis as bja
from .cubature import (
    bauer_spiral,
    equal_area_points,
    exactness_defect,
    gl_product_rule,
    load_pointset,
    random_points,
)
from .errors import NumericalConsistencyError, ParameterError, SphereNeedletError
from .experiments import RunConfig, parse_test_function, run_experiment, format_report_csv
from .filters import Filter, verify_partition_of_unity
from .kernels import KernelSpec, SobolevParams, default_kernel_for, strength_estimate, worst_case_error

BJ_AGREEMENT = 1e-8
KERNEL_NAMES = {"cf": "cui_freeden", "dist": "distance", "gdist": "generalised_distance", "series": "series"}


def parse_points(spec: str, weight_mode: str = "equal"):
    """``spiral:N``, ``equalarea:N``, ``random:N[:seed]``, ``gl:T`` or ``file:PATH``."""
    kind, _, arg = spec.partition(":")
    if not arg:
        raise ParameterError(f"point spec {spec!r} needs the form kind:value")
    try:
        if kind == "spiral":
            return bauer_spiral(int(arg))
        if kind == "equalarea":
            return equal_area_points(int(arg))
        if kind == "random":
            n, _, seed = arg.partition(":")
            return random_points(int(n), int(seed or 0))
        if kind == "gl":
            return gl_product_rule(int(arg))
    except ValueError:
        raise ParameterError(f"bad integer in point spec {spec!r}") from None
    if kind == "file":
        return load_pointset(arg, weight_mode)
    raise ParameterError(f"unknown point source {kind!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ParameterError(f"bad number list {text!r}") from None


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header: str, rows) -> str:
    buf = io.StringIO()
    buf.write(header + "\n")
    for row in rows:
        buf.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")
    return buf.getvalue()


# --------------------------------------------------------------------------
# commands


def cmd_approx(args) -> int:
    cfg = RunConfig(J0=args.j0, J=args.j, exact_source=args.exact_source, qmc_source=args.qmc_source,
                    qmc_size_factor=args.qmc_size_factor, filter_kappa=args.filter_kappa,
                    coeff_degree=args.coeff_degree, l2_points=args.l2_points, method=args.method)
    if args.full_scale:
        cfg = RunConfig(J0=4, J=7, exact_source=cfg.exact_source, qmc_source=cfg.qmc_source,
                        qmc_size_factor=cfg.qmc_size_factor, filter_kappa=cfg.filter_kappa,
                        l2_points=10**6, method=cfg.method)
    report = run_experiment(cfg, parse_test_function(args.function))
    _emit(format_report_csv(report), args.out)
    return 0


def cmd_bj(args) -> int:
    filt = Filter(args.filter_kappa)
    methods = {"quad": ["quadrature"], "exact": ["exact_sum"], "both": ["quadrature", "exact_sum"]}[args.method]
    rows = []
    worst = 0.0
    for s in _float_list(args.s):
        for j in range(args.j_min, args.j_max + 1):
            req = bja.BjRequest(args.d, s, j, filt)
            vals = {m: bja.compute_bj(req, m).value for m in methods}
            env = bja.bj_asymptotic(args.d, s, j)
            for m in methods:
                rows.append((s, j, vals[m], env, m))
            if len(vals) == 2:
                worst = max(worst, abs(vals["quadrature"] - vals["exact_sum"]) / vals["exact_sum"])
    _emit(_csv("s,j,B_j,2^{j(s+d)},method", rows), args.out)
    if worst > BJ_AGREEMENT:
        raise NumericalConsistencyError(f"quadrature and exact sum differ by {worst:.2e} relative")
    return 0


def _kernel(name: str, s: float, d: int = 2) -> KernelSpec:
    if name not in KERNEL_NAMES:
        raise ParameterError(f"unknown kernel {name!r}")
    return KernelSpec(KERNEL_NAMES[name], SobolevParams(d, s))


def cmd_wce(args) -> int:
    rule = parse_points(args.points, args.weight_mode)
    k = _kernel(args.kernel, args.s)
    e = worst_case_error(rule, k)
    _emit(_csv("points,N,kernel,s,wce", [(args.points, len(rule), k.form, float(args.s), e)]), args.out)
    return 0


def cmd_strength(args) -> int:
    gens = {"spiral": bauer_spiral, "equalarea": equal_area_points, "random": random_points}
    if args.points not in gens:
        raise ParameterError(f"unknown generator {args.points!r}")
    n_list = [int(v) for v in _float_list(args.n_list)]
    if args.kernel:
        kernel_for = lambda s, d: _kernel(args.kernel, s, d)  # noqa: E731
    else:
        kernel_for = lambda s, d: default_kernel_for(s, d, args.series_degree)  # noqa: E731
    rows, strength = strength_estimate(gens[args.points], n_list, _float_list(args.s_grid),
                                       kernel_for=kernel_for, slack=args.slack)
    out = []
    for r in rows:
        for n, e in zip(n_list, r.wce):
            out.append((r.s, "wce", n, e))
        out.append((r.s, "slope", "", "nan" if r.slope is None else r.slope))
        out.append((r.s, "c_qmc", "", r.c_qmc))
    out.append(("", "strength", "", "none" if strength is None else float(strength)))
    _emit(_csv("s,metric,N,value", out), args.out)
    return 0


def cmd_exactness(args) -> int:
    rule = parse_points(args.points, args.weight_mode)
    defects = exactness_defect(rule, args.max_degree)
    rows = [(ell, float(v), "pass" if v <= args.tol else "fail") for ell, v in enumerate(defects)]
    _emit(_csv("degree,defect,status", rows), args.out)
    return 0


def cmd_filter_check(args) -> int:
    filt = Filter(args.kappa)
    t = np.geomspace(1.0, 1e6, args.samples)
    u = np.linspace(0.5, 1.0, args.samples)
    rows = [
        ("h(1/2)", float(filt(0.5))),
        ("h(1)", float(filt(1.0))),
        ("h(2)", float(filt(2.0))),
        ("identity_residual", float(np.max(np.abs(filt(u) ** 2 + filt(2 * u) ** 2 - 1.0)))),
        ("partition_residual", verify_partition_of_unity(filt, t)),
    ]
    _emit(_csv("check,value", rows), args.out)
    ok = rows[0][1] == 0.0 and rows[1][1] == 1.0 and rows[2][1] == 0.0 and rows[3][1] < 1e-12 and rows[4][1] < 1e-12
    if not ok:
        raise NumericalConsistencyError("filter checks failed")
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sphere-needlets", description="Hybrid needlet approximation toolkit on S^2.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("approx", help="hybrid needlet convergence run")
    a.add_argument("--function", default="franke", help="franke, wendland0..4 or harmonic:L:M")
    a.add_argument("--j0", type=int, default=3)
    a.add_argument("--j", type=int, default=5)
    a.add_argument("--exact-source", default="gl", help="gl or design:PATH (PATH may contain {j})")
    a.add_argument("--qmc-source", default="spiral", choices=["spiral", "equalarea"])
    a.add_argument("--qmc-size-factor", type=int, default=1)
    a.add_argument("--filter-kappa", type=int, default=5)
    a.add_argument("--coeff-degree", type=int, default=None)
    a.add_argument("--l2-points", type=int, default=10**5)
    a.add_argument("--method", default="harmonic", choices=["harmonic", "direct"])
    a.add_argument("--full-scale", action="store_true", help="J0=4, J=7, 10^6 L2 points (hours)")
    a.add_argument("--out")
    a.set_defaults(func=cmd_approx)

    b = sub.add_parser("bj", help="error-budget constants B_j")
    b.add_argument("--d", type=int, default=2)
    b.add_argument("--s", default="2,3", help="one value or a comma list")
    b.add_argument("--j-min", type=int, default=5)
    b.add_argument("--j-max", type=int, default=7)
    b.add_argument("--method", default="both", choices=["quad", "exact", "both"])
    b.add_argument("--filter-kappa", type=int, default=5)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bj)

    w = sub.add_parser("wce", help="worst-case error of a point set")
    w.add_argument("--kernel", default="dist", choices=sorted(KERNEL_NAMES))
    w.add_argument("--s", type=float, default=1.5)
    w.add_argument("--points", required=True)
    w.add_argument("--weight-mode", default="equal", choices=["equal", "in_file"])
    w.add_argument("--out")
    w.set_defaults(func=cmd_wce)

    s = sub.add_parser("strength", help="empirical QMC strength from wce slopes")
    s.add_argument("--points", default="spiral")
    s.add_argument("--s-grid", default="1.5,2,3")
    s.add_argument("--n-list", default="256,512,1024,2048")
    s.add_argument("--kernel", default=None, choices=sorted(KERNEL_NAMES))
    s.add_argument("--slack", type=float, default=0.1)
    s.add_argument("--series-degree", type=int, default=256,
                   help="truncation degree of the series kernel used where no closed form exists")
    s.add_argument("--out")
    s.set_defaults(func=cmd_strength)

    e = sub.add_parser("exactness", help="per-degree polynomial exactness defects")
    e.add_argument("--points", required=True)
    e.add_argument("--max-degree", type=int, required=True)
    e.add_argument("--weight-mode", default="equal", choices=["equal", "in_file"])
    e.add_argument("--tol", type=float, default=1e-10)
    e.add_argument("--out")
    e.set_defaults(func=cmd_exactness)

    f = sub.add_parser("filter-check", help="check the needlet window identities")
    f.add_argument("--kappa", type=int, default=5)
    f.add_argument("--samples", type=int, default=10**4)
    f.add_argument("--out")
    f.set_defaults(func=cmd_filter_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SphereNeedletError as exc:
        print(f"error[{exc.category}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return 7


if __name__ == "__main__":
    sys.exit(main())
