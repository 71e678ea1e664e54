import math

import numpy as np
import pytest

from conftest import random_unit
from sphere_needlets.cubature import gl_product_rule
from sphere_needlets.errors import DegenerateFitError, ParameterError, PrecisionViolationError
from sphere_needlets.experiments import (
    RunConfig,
    TestFunction,
    fit_convergence_order,
    format_report_csv,
    franke,
    l2_error,
    parse_test_function,
    run_experiment,
    wendland_delta,
    wendland_phi,
    wendland_sum,
)


def franke_oracle(x, y, z):
    # the printed four-term formula, written out term by term
    X, Y, Z = 9 * x, 9 * y, 9 * z
    return (0.75 * math.exp(-((X - 2) ** 2 + (Y - 2) ** 2 + (Z - 2) ** 2) / 4)
            + 0.75 * math.exp(-((X + 1) ** 2) / 49 - (Y + 1) / 10 - (Z + 1) / 10)
            + 0.5 * math.exp(-((X - 7) ** 2 + (Y - 3) ** 2 + (Z - 5) ** 2) / 4)
            - 0.2 * math.exp(-((X - 4) ** 2) - (Y - 7) ** 2 - (Z - 5) ** 2))


def test_franke_matches_printed_formula(rng):
    v = np.array([4.0, 7.0, 5.0]) / 9
    v /= np.linalg.norm(v)
    assert franke(v) == pytest.approx(franke_oracle(*v), rel=1e-14)
    for x in random_unit(rng, 20):
        assert franke(x) == pytest.approx(franke_oracle(*x), rel=1e-13, abs=1e-15)


def test_franke_bounded_and_continuous(rng):
    # the second term has linear y, z exponents; on S^2 they add at most 0.9 * sqrt(2)
    bound = 0.75 + 0.75 * math.exp(0.9 * math.sqrt(2) - 0.2) + 0.5 + 0.2
    x = random_unit(rng, 10**5)
    assert np.max(np.abs(franke(x))) <= bound
    p = np.array([0.0, 0.6, 0.8])
    q = np.array([1.0, 0.0, 0.0])
    gaps = [abs(franke(np.cos(e) * p + np.sin(e) * q) - franke(p)) for e in (1e-2, 1e-4, 1e-6)]
    assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 1e-4


def test_wendland_examples():
    assert wendland_phi(0, 0.0) == 1.0
    assert wendland_delta(0) == pytest.approx(3 * math.sqrt(math.pi) / 2, rel=1e-14)
    assert wendland_delta(0) == pytest.approx(2.65868, abs=1e-5)
    for k in range(5):
        ref = 3 * (k + 1) * math.gamma(k + 0.5) / (2 * math.gamma(k + 1))
        assert wendland_delta(k) == pytest.approx(ref, rel=1e-14)
    assert wendland_phi(2, wendland_delta(2) + 0.1) == 0.0
    with pytest.raises(ParameterError):
        wendland_phi(5, 0.1)


def test_wendland_continuous_at_support_edge():
    for k in range(5):
        d = wendland_delta(k)
        assert wendland_phi(k, d * (1 - 1e-6)) < 1e-10


def test_wendland_sum_at_axis():
    for k in range(5):
        expected = wendland_phi(k, 0.0) + 4 * wendland_phi(k, math.sqrt(2)) + wendland_phi(k, 2.0)
        assert wendland_sum(k, np.array([1.0, 0, 0])) == pytest.approx(expected, rel=1e-14)


def test_wendland_sum_symmetry(rng):
    x = random_unit(rng, 30)
    for k in (0, 3):
        base = wendland_sum(k, x)
        assert np.allclose(wendland_sum(k, x[:, [2, 0, 1]]), base, rtol=1e-14)
        assert np.allclose(wendland_sum(k, x * [-1, 1, -1]), base, rtol=1e-14)


def test_parse_test_function():
    assert parse_test_function("franke").kind == "franke"
    assert parse_test_function("wendland3").k == 3
    h = parse_test_function("harmonic:4:2")
    assert (h.ell, h.m) == (4, 2) and h.name == "harmonic:4:2"
    for bad in ("wendland7", "gauss"):
        with pytest.raises(ParameterError):
            parse_test_function(bad)


def test_l2_error_trivial_cases():
    assert l2_error(franke, franke, M=1000) == 0.0
    assert l2_error(franke, lambda x: franke(x) + 0.25, M=1000) == pytest.approx(0.25, rel=1e-13)
    rule = gl_product_rule(4)
    assert l2_error(np.zeros(len(rule)), np.full(len(rule), -3.0), rule=rule) == pytest.approx(3.0, rel=1e-14)


def test_l2_estimator_stable_under_halving():
    a = run_experiment(RunConfig(J0=4, J=4, l2_points=200_000), TestFunction("franke")).errors[-1]
    b = run_experiment(RunConfig(J0=4, J=4, l2_points=100_000), TestFunction("franke")).errors[-1]
    assert abs(a - b) / a < 0.01


def test_exact_scheme_errors_decrease():
    rep = run_experiment(RunConfig(J0=5, J=5, l2_points=20_000), TestFunction("franke"))
    assert rep.levels == list(range(6))
    assert all(b < a for a, b in zip(rep.errors, rep.errors[1:]))
    assert rep.kinds == ["exact"] * 6


def test_hybrid_report_layout():
    cfg = RunConfig(J0=2, J=4, l2_points=5000, qmc_size_factor=2)
    rep = run_experiment(cfg, TestFunction("wendland", k=2))
    assert rep.sizes[3:] == [2 * 4**4, 2 * 4**5]
    assert rep.kinds == ["exact"] * 3 + ["qmc"] * 2
    text = format_report_csv(rep)
    assert text.startswith("# function=wendland2\n")
    assert "level,metric,value\n" in text
    assert "4,n_points,2048" in text
    assert text == format_report_csv(run_experiment(cfg, TestFunction("wendland", k=2)))


def test_level_context_on_bad_design(tmp_path):
    rule = gl_product_rule(5)
    for j in range(4):
        with open(tmp_path / f"d{j}.txt", "w") as fh:
            for x in rule.points:
                fh.write(" ".join(repr(float(c)) for c in x) + "\n")
    cfg = RunConfig(J0=3, J=3, exact_source="design:" + str(tmp_path / "d{j}.txt"), l2_points=100)
    with pytest.raises(PrecisionViolationError, match=r"^level 1: .*d1\.txt"):
        run_experiment(cfg, TestFunction("franke"))


def test_config_validation():
    with pytest.raises(ParameterError):
        RunConfig(J0=4, J=3)
    with pytest.raises(ParameterError):
        RunConfig(qmc_source="sobol")
    with pytest.raises(ParameterError):
        RunConfig(l2_points=0)


def test_fit_convergence_order():
    J = np.arange(1, 7)
    assert fit_convergence_order(J, 2.0 ** (-2.0 * J)) == pytest.approx(2.0, abs=1e-10)
    assert fit_convergence_order([1, 2, 3], [0.5, 0.0, 0.125]) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DegenerateFitError):
        fit_convergence_order([1, 2], [0.1, -1.0])


def test_wendland1_order_at_desk_scale():
    rep = run_experiment(RunConfig(J0=3, J=5, qmc_size_factor=8, l2_points=100_000), TestFunction("wendland", k=1))
    beta = fit_convergence_order(rep.levels[1:], rep.errors[1:])
    assert 2.5 <= beta <= 5.0
