import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from bubbletower.data import soliton_state, vacuum_state
from bubbletower.grid import (
    FieldState,
    GridError,
    RadialGrid,
    energy,
    g_modulus_gap,
    h_norm,
    read_snapshot,
    resample,
    wavemap_energy,
    write_snapshot,
)
from bubbletower.models import SEMILINEAR_6D, SPHERE, YANG_MILLS, make_model, soliton


@pytest.fixture(scope="module")
def sphere1():
    return make_model(SPHERE, 1)


@pytest.fixture(scope="module")
def ym():
    return make_model(YANG_MILLS)


def test_grid_validation():
    with pytest.raises(GridError):
        RadialGrid(np.asarray([0.0, 1.0, 0.5, 2.0, 3.0, 4.0, 5.0, 6.0]))
    with pytest.raises(GridError):
        RadialGrid(np.linspace(1.0, 2.0, 32))  # must start at 0
    g = RadialGrid.graded(256, 10.0, 0.99)
    h = np.diff(g.nodes)
    assert np.all(np.diff(h) > 0)  # finer toward the origin
    with pytest.raises(GridError):
        RadialGrid.graded(256, 10.0, 0.5)


def test_soliton_energy_on_graded_grid(sphere1):
    grid = RadialGrid.graded(4096, 1e4, 0.997)
    st_ = soliton_state(sphere1, grid, (0, 1), 1.0)
    rep = energy(st_)
    assert rep.total == pytest.approx(4.0, rel=1e-4)
    assert rep.kinetic == 0.0
    assert rep.gradient > 0 and rep.potential > 0


def test_vacuum_energy_zero(sphere1):
    st_ = vacuum_state(sphere1, RadialGrid.uniform(512, 10.0))
    assert energy(st_).total == 0.0


def test_ym_half_energy_by_symmetry(ym):
    # the instanton density 32 r^3/(1+r^2)^4 integrates to 4/3 on (0,1)
    oracle, _ = quad(lambda r: 32.0 * r**3 / (1 + r * r) ** 4, 0.0, 1.0)
    grid = RadialGrid.graded(8192, 1e3, 0.9985)
    st_ = soliton_state(ym, grid, (1,), 1.0)
    assert energy(st_, 0.0, 1.0).total == pytest.approx(oracle, rel=1e-5)
    assert oracle == pytest.approx(4.0 / 3.0, rel=1e-10)


def test_energy_additive_over_windows(sphere1):
    grid = RadialGrid.uniform(2048, 50.0)
    st_ = soliton_state(sphere1, grid, (0, 1), 1.0)
    total = energy(st_).total
    parts = energy(st_, 0.0, 7.3).total + energy(st_, 7.3, 50.0).total
    assert parts == pytest.approx(total, rel=1e-12)


def test_quadrature_second_order(sphere1):
    errs = []
    for n in (512, 1024, 2048):
        grid = RadialGrid.uniform(n, 60.0)
        st_ = soliton_state(sphere1, grid, (0, 1), 1.0)
        tail = 4.0 / 60.0**2  # energy beyond rmax, same truncation for all
        errs.append(abs(energy(st_).total - 4.0 + tail))
    assert errs[0] / errs[1] >= 3.5
    assert errs[1] / errs[2] >= 3.5


def test_h_norm_closed_case(sphere1):
    grid = RadialGrid.uniform(2048, 4.0)
    st_ = FieldState(grid, grid.nodes.copy(), np.zeros_like(grid.nodes), 0.0, sphere1, 0.0, 4.0)
    # integrand (1 + r^2/r^2) r = 2r on (1,2): integral 3
    assert h_norm(st_, 1.0, 2.0, 0.0) == pytest.approx(3.0, rel=1e-12)


def test_h_norm_soliton_window_oracle(sphere1):
    grid = RadialGrid.graded(8192, 1e3, 0.9985)
    st_ = soliton_state(sphere1, grid, (0, 1), 1.0)

    def dens(r):
        q = 2.0 * math.atan(r)
        qp = 2.0 / (1 + r * r)
        return (qp * qp + (q - math.pi) ** 2 / (r * r)) * r

    oracle, _ = quad(dens, 1.0, 1e3, limit=300)
    assert h_norm(st_, 1.0, 1e3, math.pi) == pytest.approx(oracle, rel=1e-5)


def test_g_modulus_gap_soliton(sphere1):
    grid = RadialGrid.graded(4096, 1e4, 0.997)
    st_ = soliton_state(sphere1, grid, (0, 1), 1.0)
    gap = g_modulus_gap(st_, 1e-6, 1e4)
    assert gap == pytest.approx(2.0, rel=1e-3)
    assert gap <= energy(st_, 1e-6, 1e4).total


@settings(max_examples=100, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    w1=st.floats(0.05, 20.0),
    span=st.floats(0.1, 3.0),
)
def test_g_modulus_gap_bounded_by_energy(sphere1, seed, w1, span):
    """Random smooth states on random windows: |G(psi(r1)) - G(psi(r2))| <= E."""
    rng = np.random.default_rng(seed)
    grid = RadialGrid.uniform(1024, 40.0)
    r = grid.nodes
    psi = np.zeros_like(r)
    for _ in range(4):
        amp = rng.uniform(-1.5, 1.5)
        c = rng.uniform(0.5, 25.0)
        w = rng.uniform(0.3, 5.0)
        psi += amp * np.exp(-(((r - c) / w) ** 2))
    psi *= (1.0 - np.exp(-((r / 0.5) ** 2)))  # pin the origin
    psi[0] = 0.0
    st_ = FieldState(grid, psi, np.zeros_like(psi), 0.0, sphere1, 0.0, float(psi[-1]))
    r2 = min(w1 * (1.0 + span), 39.9)
    gap = g_modulus_gap(st_, w1, r2)
    e = wavemap_energy(st_, w1, r2).total
    assert gap <= e + 1e-9 * max(1.0, e)


def test_resample_identity(sphere1):
    grid = RadialGrid.uniform(512, 10.0)
    st_ = soliton_state(sphere1, grid, (0, 1), 1.0)
    st2 = resample(st_, RadialGrid(grid.nodes.copy()))
    assert np.array_equal(st2.psi, st_.psi)


def test_resample_refinement_energy_drift(sphere1):
    g1 = RadialGrid.graded(4096, 1e4, 0.997)
    st_ = soliton_state(sphere1, g1, (0, 1), 1.0)
    e1 = energy(st_).total
    up = resample(st_, RadialGrid.graded(8192, 1e4, 0.9985))
    assert abs(energy(up).total - e1) / e1 <= 1e-6
    down = resample(st_, RadialGrid.graded(2048, 1e4, 0.994))
    assert abs(energy(down).total - e1) / e1 <= 1e-3


def test_resample_fourth_order(sphere1):
    # interpolate a smooth profile onto shifted nodes and back; error ~ h^4
    errs = []
    for n in (256, 512, 1024):
        grid = RadialGrid.uniform(n, 10.0)
        st_ = soliton_state(sphere1, grid, (0, 1), 1.0)
        mid_nodes = np.concatenate([[0.0], 0.5 * (grid.nodes[:-1] + grid.nodes[1:]), [grid.nodes[-1]]])
        mid = resample(st_, RadialGrid(np.unique(mid_nodes)))
        s = soliton(sphere1, (0, 1), 1.0)
        errs.append(np.max(np.abs(mid.psi - s.evaluate(mid.grid.nodes))))
    assert errs[0] / errs[1] >= 12.0  # ~16x for 4th order
    assert errs[1] / errs[2] >= 12.0


def test_resample_rejects_extrapolation(sphere1):
    grid = RadialGrid.uniform(512, 10.0)
    st_ = soliton_state(sphere1, grid, (0, 1), 1.0)
    with pytest.raises(GridError):
        resample(st_, RadialGrid.uniform(512, 20.0))


def test_semilinear_native_energy_sign(ym):
    semi = make_model(SEMILINEAR_6D)
    grid = RadialGrid.graded(8192, 1e3, 0.9985)
    st_ = soliton_state(semi, grid, (1,), 1.0)
    rep = energy(st_)
    # E(W) = (1/6) int |grad W|^2 = 38.4 pi^3 in R^6
    assert rep.total == pytest.approx(38.4 * math.pi**3, rel=1e-4)
    assert rep.potential < 0 < rep.gradient


def test_snapshot_roundtrip(tmp_path, sphere1):
    grid = RadialGrid.uniform(512, 10.0)
    st_ = soliton_state(sphere1, grid, (0, 1), 0.37)
    path = tmp_path / "snap.csv"
    write_snapshot(st_, path)
    back = read_snapshot(path)
    assert np.array_equal(back.psi, st_.psi)
    assert np.array_equal(back.psit, st_.psit)
    assert np.array_equal(back.grid.nodes, grid.nodes)
    assert back.t == st_.t
    assert back.model.name == sphere1.name
