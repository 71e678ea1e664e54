import math

import numpy as np
import pytest
from scipy.special import eval_legendre

from conftest import random_unit
from sphere_needlets.cubature import gl_product_rule, needlet_rule_for_level
from sphere_needlets.errors import MismatchError, ParameterError, PrecisionViolationError
from sphere_needlets.experiments import franke
from sphere_needlets.filters import Filter
from sphere_needlets.needlet import (
    NeedletLevel,
    NeedletScheme,
    coefficient_quad_degree,
    compute_coefficients,
    evaluate_approximation,
    lambda_kernel,
    level_contributions,
    load_coefficients,
    localization_profile,
    make_scheme,
    needlet_value,
    required_precision,
    save_coefficients,
)
from sphere_needlets.sphere_core import harmonic_synthesis, real_spherical_harmonic

H = Filter()


def exact_scheme(J):
    return make_scheme(J, J, needlet_rule_for_level)


def quad_for(J):
    return gl_product_rule(coefficient_quad_degree(J))


def random_poly(rng, L):
    c = rng.standard_normal((L + 1) ** 2)
    return lambda x: harmonic_synthesis(c, x)


def test_precision_helpers():
    assert [required_precision(j) for j in range(4)] == [1, 3, 7, 15]
    assert coefficient_quad_degree(5) == 95


def test_lambda_one_is_three_t():
    t = np.linspace(-1, 1, 21)
    assert np.allclose(lambda_kernel(H, 1, t), 3 * t, atol=1e-14)


def test_lambda_matches_brute_legendre_sum():
    t = np.linspace(-1, 1, 17)
    for j in (2, 3, 5):
        ref = sum(H(ell / 2 ** (j - 1)) * (2 * ell + 1) * eval_legendre(ell, t) for ell in range(2**j))
        assert np.allclose(lambda_kernel(H, j, t), ref, atol=1e-11)
    at_one = sum(H(ell / 4) * (2 * ell + 1) for ell in range(3, 8))
    assert lambda_kernel(H, 3, 1.0) == pytest.approx(at_one, rel=1e-13) and at_one > 0
    with pytest.raises(ParameterError):
        lambda_kernel(H, 0, 0.5)


def test_needlet_value_examples():
    lv0 = NeedletLevel(0, gl_product_rule(1))
    x = np.array([[0.0, 0.6, 0.8], [1.0, 0.0, 0.0]])
    assert np.allclose(needlet_value(lv0, 0, x), math.sqrt(lv0.rule.weights[0]))
    lv1 = NeedletLevel(1, gl_product_rule(3))
    c = lv1.rule.points[2]
    w = lv1.rule.weights[2]
    assert needlet_value(lv1, 2, c[None, :])[0] == pytest.approx(3 * math.sqrt(w), rel=1e-14)
    perp = np.cross(c, [0.0, 0.0, 1.0])
    perp /= np.linalg.norm(perp)
    assert abs(needlet_value(lv1, 2, perp[None, :])[0]) < 1e-15
    with pytest.raises(IndexError):
        needlet_value(lv1, len(lv1.rule), c[None, :])


def test_constant_function():
    J = 3
    scheme = exact_scheme(J)
    co = compute_coefficients(lambda x: np.ones(len(x)), scheme, quad_for(J))
    assert np.allclose(co.values[0], np.sqrt(scheme.levels[0].rule.weights), atol=1e-14)
    for j in range(1, J + 1):
        assert np.max(np.abs(co.values[j])) < 1e-12
    x = random_unit(np.random.default_rng(1), 50)
    assert np.max(np.abs(evaluate_approximation(co, scheme, x) - 1.0)) < 1e-12


def test_band_orthogonality_for_y4():
    J = 4
    scheme = exact_scheme(J)
    for m in (1, 4, 9):
        co = compute_coefficients(lambda x: real_spherical_harmonic(4, m, x), scheme, quad_for(J))
        for j in range(J + 1):
            peak = np.max(np.abs(co.values[j]))
            # only level 3 has h(4 / 2^(j-1)) != 0
            if j == 3:
                assert peak > 1e-3
            else:
                assert peak < 1e-10


@pytest.mark.parametrize("J", [2, 3, 4])
def test_polynomial_reconstruction(J, rng):
    scheme = exact_scheme(J)
    x = random_unit(rng, 100)
    for _ in range(3):
        p = random_poly(rng, 2 ** (J - 1))
        for method in ("harmonic", "direct"):
            co = compute_coefficients(p, scheme, quad_for(J), method=method)
            for ev in ("harmonic", "direct"):
                err = np.max(np.abs(evaluate_approximation(co, scheme, x, method=ev) - p(x)))
                assert err < 1e-9


def test_direct_and_harmonic_coefficients_agree():
    J = 3
    scheme = exact_scheme(J)
    a = compute_coefficients(franke, scheme, quad_for(J), method="harmonic")
    b = compute_coefficients(franke, scheme, quad_for(J), method="direct")
    for va, vb in zip(a.values, b.values):
        assert np.max(np.abs(va - vb)) < 1e-13


def test_franke_coefficients_stable_under_refinement():
    J = 3
    scheme = exact_scheme(J)
    a = compute_coefficients(franke, scheme, gl_product_rule(128))
    b = compute_coefficients(franke, scheme, gl_product_rule(256))
    assert max(np.max(np.abs(va - vb)) for va, vb in zip(a.values, b.values)) < 1e-8


def test_linearity(rng):
    J = 3
    scheme = exact_scheme(J)
    q = quad_for(J)
    g = random_poly(rng, 6)
    alpha, beta = 0.7, -2.3
    x = random_unit(rng, 40)
    lhs = evaluate_approximation(compute_coefficients(lambda y: alpha * franke(y) + beta * g(y), scheme, q), scheme, x)
    rhs = (alpha * evaluate_approximation(compute_coefficients(franke, scheme, q), scheme, x)
           + beta * evaluate_approximation(compute_coefficients(g, scheme, q), scheme, x))
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_exact_and_qmc_kinds_bitwise_identical(rng):
    J = 3
    a = exact_scheme(J)
    b = make_scheme(1, J, needlet_rule_for_level, needlet_rule_for_level)
    assert [lv.kind for lv in b.levels] == ["exact", "exact", "qmc", "qmc"]
    x = random_unit(rng, 30)
    q = quad_for(J)
    va = evaluate_approximation(compute_coefficients(franke, a, q), a, x)
    vb = evaluate_approximation(compute_coefficients(franke, b, q), b, x)
    assert np.array_equal(va, vb)


def test_empty_scheme_is_zero(rng):
    scheme = make_scheme(-1, -1, needlet_rule_for_level)
    assert scheme.levels == ()
    co = compute_coefficients(franke, scheme, gl_product_rule(3))
    assert np.array_equal(evaluate_approximation(co, scheme, random_unit(rng, 7)), np.zeros(7))


def test_level_contributions_sum(rng):
    J = 3
    scheme = exact_scheme(J)
    co = compute_coefficients(franke, scheme, quad_for(J))
    x = random_unit(rng, 25)
    parts = level_contributions(co, scheme, x)
    assert parts.shape == (J + 1, 25)
    assert np.allclose(parts.sum(axis=0), evaluate_approximation(co, scheme, x, method="harmonic"), atol=1e-13)


def test_localization():
    lv = NeedletLevel(5, gl_product_rule(63))
    theta = np.linspace(0, np.pi, 201)
    prof = localization_profile(lv, 0, theta)
    assert np.argmax(prof) == 0
    assert prof[-1] / prof[0] < 1e-3
    assert np.allclose(localization_profile(lv, 0, -theta), prof, rtol=0, atol=1e-12)
    with pytest.raises(ParameterError):
        localization_profile(NeedletLevel(0, gl_product_rule(1)), 0, theta)


def test_precision_violations():
    with pytest.raises(PrecisionViolationError):
        NeedletScheme(3, 3, tuple(NeedletLevel(j, gl_product_rule(7)) for j in range(4)))
    scheme = exact_scheme(3)
    with pytest.raises(PrecisionViolationError):
        compute_coefficients(franke, scheme, gl_product_rule(10))
    co = compute_coefficients(franke, scheme, gl_product_rule(10), allow_low_precision=True)
    assert len(co.values) == 4


def test_scheme_structure_checks():
    with pytest.raises(ParameterError):
        make_scheme(1, 3, needlet_rule_for_level)
    with pytest.raises(ParameterError):
        NeedletScheme(2, 1, ())
    lv = [NeedletLevel(0, gl_product_rule(1)), NeedletLevel(1, gl_product_rule(3), "qmc")]
    with pytest.raises(ParameterError):
        NeedletScheme(1, 1, tuple(lv))


def test_save_load_roundtrip(tmp_path):
    J = 3
    scheme = exact_scheme(J)
    co = compute_coefficients(franke, scheme, quad_for(J))
    p = tmp_path / "coeffs.csv"
    save_coefficients(p, co, scheme)
    back, header = load_coefficients(p)
    assert all(np.array_equal(a, b) for a, b in zip(co.values, back.values))
    assert header["scheme"]["J"] == str(J) and header["scheme"]["J0"] == str(J)
    back.check(scheme)
    save_coefficients(tmp_path / "again.csv", back, scheme)
    assert (tmp_path / "again.csv").read_bytes() == p.read_bytes()


def test_load_rejects_bad_version(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("# sphere-needlets coefficients v99\nlevel,k,coefficient\n")
    with pytest.raises(ParameterError):
        load_coefficients(p)


def test_mismatch_detected(rng):
    co = compute_coefficients(franke, exact_scheme(3), quad_for(3))
    other = exact_scheme(2)
    with pytest.raises(MismatchError):
        evaluate_approximation(co, other, random_unit(rng, 3))
