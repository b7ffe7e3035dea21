import math

import numpy as np
import pytest
from scipy.integrate import quad

from bubbletower.models import (
    CUSTOM,
    SEMILINEAR_6D,
    SPHERE,
    YANG_MILLS,
    ModelError,
    check_assumptions,
    harmonic_virial,
    make_model,
    model_from_string,
    soliton,
    soliton_branches,
    soliton_energy,
    soliton_energy_quadrature,
    soliton_residuals,
)

PROBE = np.logspace(-3, 3, 601)


@pytest.fixture(scope="module")
def sphere1():
    return make_model(SPHERE, 1)


@pytest.fixture(scope="module")
def sphere2():
    return make_model(SPHERE, 2)


@pytest.fixture(scope="module")
def ym():
    return make_model(YANG_MILLS)


@pytest.fixture(scope="module")
def semi():
    return make_model(SEMILINEAR_6D)


def test_sphere_callbacks(sphere1):
    assert sphere1.g(np.asarray(math.pi / 2)) == pytest.approx(1.0, abs=1e-14)
    assert sphere1.f(np.asarray(math.pi / 2)) == pytest.approx(0.0, abs=1e-14)
    vac = np.asarray(sphere1.vacua)
    assert np.any(np.abs(vac - 0.0) < 1e-12)
    assert np.any(np.abs(vac - math.pi) < 1e-12)
    assert sphere1.vacuum_slope(0.0) == pytest.approx(1.0)
    assert sphere1.vacuum_slope(math.pi) == pytest.approx(-1.0)


def test_yang_mills_f_values(ym):
    assert ym.f(np.asarray(0.0)) == pytest.approx(0.0, abs=1e-15)
    assert ym.f(np.asarray(1.0)) == pytest.approx(0.0, abs=1e-12)
    # direct substitution into f = -2 psi (1 - psi^2)
    assert ym.f(np.asarray(0.5)) == pytest.approx(-0.75)


def test_sphere2_modulus_closed_form(sphere2):
    # oracle: adaptive quadrature of |g| = 2|sin|
    oracle, _ = quad(lambda y: 2.0 * abs(math.sin(y)), 0.0, math.pi)
    assert sphere2.G(np.asarray(math.pi)) == pytest.approx(oracle, rel=1e-10)
    assert sphere2.G(np.asarray(math.pi)) == pytest.approx(4.0, rel=1e-12)


def test_modulus_matches_quadrature_everywhere(sphere1, ym, semi):
    for model, hi in ((sphere1, 3 * math.pi), (ym, 2.0), (semi, 5.5)):
        for x in np.linspace(-hi, hi, 9):
            oracle, _ = quad(lambda y: abs(float(model.g(np.asarray(y)))), 0.0, x)
            assert float(model.G(np.asarray(x))) == pytest.approx(oracle, abs=1e-8)


def test_f_consistency_probe(sphere1, sphere2, ym, semi):
    for model, hi in ((sphere1, 6.0), (sphere2, 6.0), (ym, 2.5), (semi, 5.8)):
        x = np.linspace(-hi, hi, 10_000)
        res = np.abs(model.f(x) - model.g(x) * model.g_prime(x))
        scale = np.max(np.abs(model.f(x)))
        assert np.max(res) <= 1e-12 * scale


def test_semilinear_F_closed_form(semi):
    x = np.linspace(-5.0, 5.0, 101)
    assert np.allclose(semi.F(x), 2.0 * x**2 - np.abs(x) ** 3 / 3.0)
    # F' = f by finite differences
    h = 1e-6
    dF = (semi.F(x + h) - semi.F(x - h)) / (2 * h)
    assert np.max(np.abs(dF - semi.f(x))) < 1e-7


def test_soliton_values(sphere1, ym, semi):
    s = soliton(sphere1, (0, 1), 1.0)
    assert s.evaluate(np.asarray(0.0)) == pytest.approx(0.0)
    assert s.evaluate(np.asarray(1.0)) == pytest.approx(math.pi / 2)
    assert s.value_infinity == pytest.approx(math.pi)
    sy = soliton(ym, (1,), 1.0)
    assert sy.evaluate(np.asarray(0.0)) == pytest.approx(1.0)
    assert sy.evaluate(np.asarray(1.0)) == pytest.approx(0.0, abs=1e-15)
    assert sy.value_infinity == pytest.approx(-1.0)
    sw = soliton(semi, (1,), 1.0)
    assert sw.u_view(np.asarray(0.0)) == pytest.approx(576.0)  # 24^2


def test_soliton_scale_covariance(sphere1):
    s2 = soliton(sphere1, (0, 1), 2.0)
    s1 = soliton(sphere1, (0, 1), 1.0)
    r = np.linspace(0.1, 30, 57)
    assert np.allclose(s2.evaluate(r), s1.evaluate(r / 2.0))


def test_invalid_branch_and_scale(sphere1):
    with pytest.raises(ModelError):
        soliton(sphere1, (0, 2), 1.0)
    with pytest.raises(ModelError):
        soliton(sphere1, (0, 1), -1.0)


@pytest.mark.parametrize(
    "kind,k,branch,expected",
    [(SPHERE, 1, (0, 1), 4.0), (SPHERE, 2, (0, 1), 8.0), (SPHERE, 3, (0, 1), 12.0), (YANG_MILLS, 1, (1,), 8.0 / 3.0)],
)
def test_soliton_energy_closed_vs_quadrature(kind, k, branch, expected):
    model = make_model(kind, k)
    s = soliton(model, branch, 1.0)
    closed = soliton_energy(model, s)
    assert closed == pytest.approx(expected, rel=1e-12)
    assert soliton_energy_quadrature(model, s) == pytest.approx(closed, rel=1e-6)


def test_ym_energy_density_oracle(ym):
    # density of the instanton is 32 r^3 / (1+r^2)^4 against dr
    oracle, _ = quad(lambda r: 32.0 * r**3 / (1 + r * r) ** 4, 0.0, np.inf, limit=200)
    s = soliton(ym, (1,), 1.0)
    assert soliton_energy(ym, s) == pytest.approx(oracle, rel=1e-9)


def test_soliton_energy_rejects_semilinear(semi):
    with pytest.raises(ModelError):
        soliton_energy(semi, soliton(semi, (1,), 1.0))


@pytest.mark.parametrize("builder", [
    lambda: (make_model(SPHERE, 1), (0, 1)),
    lambda: (make_model(SPHERE, 1), (0, -1)),
    lambda: (make_model(SPHERE, 2), (0, 1)),
    lambda: (make_model(YANG_MILLS), (1,)),
    lambda: (make_model(YANG_MILLS), (-1,)),
    lambda: (make_model(SEMILINEAR_6D), (1,)),
])
def test_soliton_residuals_tiny(builder):
    model, branch = builder()
    s = soliton(model, branch, 1.0)
    ode, bog = soliton_residuals(s, PROBE)
    assert ode <= 1e-8
    assert bog <= 1e-8


def test_residuals_scale_invariant(sphere1):
    for lam in (0.01, 1.0, 100.0):
        s = soliton(sphere1, (0, 1), lam)
        ode, bog = soliton_residuals(s, PROBE)
        assert ode <= 1e-8 and bog <= 1e-8


def test_w_laplacian_identity():
    # -Delta W = W^2 in 6d: finite-difference oracle at several radii
    a = 1.0 / 24.0
    W = lambda r: 1.0 / (a + r * r) ** 2
    h = 1e-5
    for r in (0.05, 0.3, 1.0, 3.0):
        lap = (W(r + h) - 2 * W(r) + W(r - h)) / h**2 + 5.0 / r * (W(r + h) - W(r - h)) / (2 * h)
        assert -lap == pytest.approx(W(r) ** 2, rel=1e-3)


def test_harmonic_virial_zero(sphere1, sphere2, ym):
    for model, branch in ((sphere1, (0, 1)), (sphere2, (0, 1)), (ym, (1,))):
        val, norm = harmonic_virial(model, soliton(model, branch, 1.0))
        assert abs(val) <= 1e-6 * norm


def test_check_assumptions_sphere(sphere1):
    rep = check_assumptions(sphere1, (-4.0, 4.0))
    vals = sorted(row["vacuum"] for row in rep["vacua"])
    assert np.allclose(vals, [-math.pi, 0.0, math.pi], atol=1e-10)
    assert all(abs(abs(row["g_prime"]) - 1.0) < 1e-9 for row in rep["vacua"])
    assert all(abs(row["g_second"]) < 1e-9 for row in rep["vacua"])
    assert rep["all_ok"]


def test_check_assumptions_ym(ym):
    rep = check_assumptions(ym, (-2.0, 2.0))
    vals = sorted(row["vacuum"] for row in rep["vacua"])
    assert np.allclose(vals, [-1.0, 1.0], atol=1e-10)
    slopes = sorted(row["g_prime"] for row in rep["vacua"])
    assert np.allclose(slopes, [-2.0, 2.0], atol=1e-9)
    assert rep["a3_prime"]


def test_check_assumptions_tangential_custom():
    cust = make_model(
        CUSTOM,
        custom=dict(
            g=lambda x: np.asarray(x, dtype=float) ** 2,
            g_prime=lambda x: 2.0 * np.asarray(x, dtype=float),
            g_second=lambda x: np.full_like(np.asarray(x, dtype=float), 2.0),
        ),
        bracket=(-1.0, 1.0),
    )
    rep = check_assumptions(cust, (-1.0, 1.0))
    assert len(rep["vacua"]) == 1
    assert abs(rep["vacua"][0]["vacuum"]) < 1e-6
    assert not rep["a3_prime"]


def test_custom_inconsistent_f_rejected():
    with pytest.raises(ModelError):
        make_model(
            CUSTOM,
            custom=dict(
                g=lambda x: np.sin(np.asarray(x, dtype=float)),
                g_prime=lambda x: np.cos(np.asarray(x, dtype=float)),
                g_second=lambda x: -np.sin(np.asarray(x, dtype=float)),
                f=lambda x: 2.0 * np.sin(np.asarray(x, dtype=float)) * np.cos(np.asarray(x, dtype=float)),
            ),
        )


def test_vacuum_adjacency(sphere1, sphere2, ym):
    # no vacuum strictly between the endpoints of any soliton
    for model in (sphere1, sphere2, ym):
        for branch in soliton_branches(model):
            s = soliton(model, branch, 1.0)
            lo, hi = sorted((s.value_origin, s.value_infinity))
            strict = [v for v in model.vacua if lo + 1e-9 < v < hi - 1e-9]
            assert strict == []


def test_model_string_grammar():
    assert model_from_string("sphere:k=2").k == 2
    assert model_from_string("yang-mills").kind == YANG_MILLS
    assert model_from_string("semilinear6d").kind == SEMILINEAR_6D
    with pytest.raises(ModelError):
        model_from_string("sphere:k=zebra")
    with pytest.raises(ModelError):
        model_from_string("mystery-model")
