"""Explicit time evolution with blow-up detection and origin refinement.

The scheme is leapfrog (velocity-Verlet form) on (psi, psi_t) with the
symmetrized radial operator (r psi_r)_r / r evaluated with half-node
r-weights; second order in space and time.  The origin node is pinned at the
origin vacuum and the outer node is pinned at its initial value, with the
domain sized so the light cone never reaches it during a run.

Blow-up runs shrink toward the origin; a dyadic origin-anchored regrid keeps
the innermost scale resolved.  The stop rule is a gradient cap (or the dt
floor), and the blow-up time estimate extrapolates 1/sup|psi_r| to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import _core
from .grid import FieldState, GridError, RadialGrid, resample
from .models import CUSTOM, SEMILINEAR_6D, SPHERE, YANG_MILLS, ModelSpec

__all__ = [
    "SolveConfig",
    "BlowupReport",
    "SolverError",
    "NumericalBlowupError",
    "step",
    "evolve",
    "regrid",
    "concentration_scale",
    "conserved_energy",
]


class SolverError(ValueError):
    pass


class NumericalBlowupError(RuntimeError):
    """The scheme produced non-finite values (distinct from physical blow-up)."""


@dataclass(frozen=True)
class SolveConfig:
    cfl: float = 0.75
    t_end: float = 1.0
    snapshot_cadence: float = 0.0  # 0 -> t_end / 64
    refine_threshold: float = 64.0  # regrid when the half-height scale spans fewer cells
    max_refine_levels: int = 8
    blowup_gradient_cap: float = 0.0  # 0 -> 1e6 / rmax
    dt_min: float = 1e-12
    record_every: int = 16

    def __post_init__(self):
        if not (0.0 < self.cfl <= 0.9):
            raise SolverError("cfl must lie in (0, 0.9]")
        if self.dt_min <= 0.0:
            raise SolverError("dt_min must be positive")
        if self.max_refine_levels > 12:
            raise SolverError("max_refine_levels capped at 12")


@dataclass
class BlowupReport:
    detected: bool = False
    T_est: float = float("nan")
    scale_series: list = field(default_factory=list)  # (t, lambda) samples
    reason: str = "None"  # GradientCap | DtFloor | None
    refine_levels_used: int = 0
    refinement_exhausted: bool = False


def _model_code(model: ModelSpec) -> tuple[int, float, Callable | None]:
    if model.kind == SPHERE:
        return 0, float(model.k), None
    if model.kind == YANG_MILLS:
        return 1, 2.0, None
    if model.kind == SEMILINEAR_6D:
        return 2, 2.0, None
    return 3, 1.0, model.f


def _stiffness(model: ModelSpec) -> float:
    slopes = [abs(s) for s in model.vacua_slopes] or [1.0]
    return max(1.0, max(slopes))


def _grid_coefficients(grid: RadialGrid):
    r = grid.nodes
    n = r.size
    cm = np.zeros(n)
    cp = np.zeros(n)
    inv_r2 = np.zeros(n)
    h = np.diff(r)
    hbar = 0.5 * (h[:-1] + h[1:])
    ri = r[1:-1]
    cm[1:-1] = 0.5 * (r[:-2] + ri) / (ri * h[:-1] * hbar)
    cp[1:-1] = 0.5 * (ri + r[2:]) / (ri * h[1:] * hbar)
    inv_r2[1:-1] = 1.0 / ri**2
    return cm, cp, inv_r2


def _stable_dt(grid: RadialGrid, cfl: float, model: ModelSpec) -> float:
    return cfl * grid.min_spacing * min(1.0, 2.0 / _stiffness(model))


def conserved_energy(state: FieldState) -> float:
    """The energy preserved by the psi-equation flow.

    Wave maps: int (psi_t^2 + psi_r^2 + g^2/r^2) r dr.  Semilinear6d uses the
    psi-density with F(psi): int (psi_t^2/2 + psi_r^2/2 + F(psi)/r^2) r dr.
    """
    grid = state.grid
    w = grid.weights_rdr()
    r = grid.nodes
    psir = state.psi_r()
    if state.model.kind == SEMILINEAR_6D:
        dens = 0.5 * state.psit**2 + 0.5 * psir**2
        pot = np.zeros_like(r)
        pot[1:] = state.model.F(state.psi[1:]) / r[1:] ** 2
        pot[0] = 0.5 * state.model.f_prime(np.asarray(state.bv_origin)) * state.origin_slope() ** 2
        return float(np.sum((dens + pot) * w))
    dens = state.psit**2 + psir**2
    pot = np.zeros_like(r)
    pot[1:] = state.model.g(state.psi[1:]) ** 2 / r[1:] ** 2
    pot[0] = (float(state.model.g_prime(np.asarray(state.bv_origin))) * state.origin_slope()) ** 2
    return float(np.sum((dens + pot) * w))


# ---------------------------------------------------------------------------
# single step
# ---------------------------------------------------------------------------


def step(state: FieldState, dt: float) -> FieldState:
    """One leapfrog update; functional (returns a new snapshot)."""
    if dt <= 0 or dt > state.grid.min_spacing:
        raise SolverError(f"dt = {dt} violates the CFL bound h_min = {state.grid.min_spacing}")
    code, kk, f_custom = _model_code(state.model)
    cm, cp, inv_r2 = _grid_coefficients(state.grid)
    psi = state.psi.copy()
    psit = state.psit.copy()
    psit[0] = psit[-1] = 0.0
    accel = np.zeros_like(psi)
    _core.compute_accel(psi, accel, cm, cp, inv_r2, code, kk, f_custom)
    _core.leapfrog_run(psi, psit, accel, cm, cp, inv_r2, dt, 1, code, kk, f_custom)
    if not np.all(np.isfinite(psi)):
        raise NumericalBlowupError("non-finite field after step")
    return state.with_fields(psi=psi, psit=psit, t=state.t + dt)


# ---------------------------------------------------------------------------
# concentration scale
# ---------------------------------------------------------------------------


def _half_height_threshold(model: ModelSpec) -> float:
    # half of |Q_mid - Q(0)| for the innermost-compatible soliton family
    if model.kind == SPHERE:
        return math.pi / 4.0
    if model.kind == YANG_MILLS:
        return 0.5
    if model.kind == SEMILINEAR_6D:
        return 1.5  # psi-profile spans [0, 6]
    gap = model.vacuum_gap
    if not np.isfinite(gap):
        raise SolverError("custom model without vacuum gap has no half-height rule")
    return gap / 4.0


def concentration_scale(state: FieldState) -> tuple[float, bool]:
    """Half-height radius of the innermost feature; (R_max, False) if none."""
    r = state.grid.nodes
    d = np.abs(state.psi - state.psi[0])
    thr = _half_height_threshold(state.model)
    idx = np.nonzero(d >= thr)[0]
    if idx.size == 0:
        return state.grid.rmax, False
    i = int(idx[0])
    if i == 0:
        return float(r[0]), True
    # linear interpolation of the first crossing
    frac = (thr - d[i - 1]) / max(d[i] - d[i - 1], 1e-300)
    return float(r[i - 1] + frac * (r[i] - r[i - 1])), True


# ---------------------------------------------------------------------------
# regrid
# ---------------------------------------------------------------------------


def regrid(state: FieldState, level: int, max_levels: int = 12, pivot: float | None = None) -> FieldState:
    """Halve the spacing on [0, pivot]; pivot covers the gradient spike x4."""
    if level > max_levels:
        raise SolverError(f"refinement level {level} exceeds the cap {max_levels}")
    r = state.grid.nodes
    if pivot is None:
        psir = np.abs(state.psi_r())
        sup = float(np.max(psir))
        if sup <= 0:
            pivot = r[min(8, r.size - 1)]
        else:
            spike = np.nonzero(psir >= 0.05 * sup)[0]
            pivot = 4.0 * r[int(spike[-1])]
    pivot = min(pivot, state.grid.rmax / 2.0)
    j = int(np.searchsorted(r, pivot, side="right"))
    j = max(j, 2)
    fine = r[:j]
    mids = 0.5 * (fine[:-1] + fine[1:])
    nodes = np.sort(np.concatenate([r, mids]))
    return resample(state, RadialGrid(nodes, state.grid.spacing))


# ---------------------------------------------------------------------------
# evolution loop
# ---------------------------------------------------------------------------


def _estimate_blowup_time(ts: np.ndarray, sup_grads: np.ndarray, fallback: float) -> float:
    """Linear extrapolation of 1/sup|psi_r| to zero over the last 20 samples."""
    m = min(20, ts.size)
    if m < 3:
        return fallback
    t = ts[-m:]
    y = 1.0 / np.maximum(sup_grads[-m:], 1e-300)
    A = np.vstack([t, np.ones_like(t)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    if slope >= 0:
        return fallback
    t_star = -intercept / slope
    return float(max(t_star, fallback))


def _sup_abs_gradient(r: np.ndarray, psi: np.ndarray) -> float:
    centered = np.abs((psi[2:] - psi[:-2]) / (r[2:] - r[:-2]))
    first = abs((psi[1] - psi[0]) / (r[1] - r[0]))
    last = abs((psi[-1] - psi[-2]) / (r[-1] - r[-2]))
    return float(max(centered.max(initial=0.0), first, last))


def evolve(
    state: FieldState,
    cfg: SolveConfig,
    monitors: Iterable[Callable[[FieldState], None]] = (),
):
    """Advance to t_end or a blow-up stop.

    Returns (Trajectory, BlowupReport).  The trajectory records snapshots at
    the configured cadence (plus gradient-growth events and regrids) and the
    series energy, sup|psi_r|, concentration scale and dt at a fine cadence.
    """
    from .diagnostics import Trajectory  # local import; diagnostics owns the type

    code, kk, f_custom = _model_code(state.model)
    grid = state.grid
    cm, cp, inv_r2 = _grid_coefficients(grid)
    dt = _stable_dt(grid, cfg.cfl, state.model)
    cap = cfg.blowup_gradient_cap or 1e6 / grid.rmax
    cadence = cfg.snapshot_cadence or cfg.t_end / 64.0

    psi = state.psi.copy()
    psit = state.psit.copy()
    psit[0] = psit[-1] = 0.0
    accel = np.zeros_like(psi)
    _core.compute_accel(psi, accel, cm, cp, inv_r2, code, kk, f_custom)

    t = state.t
    report = BlowupReport()
    snapshots: list[FieldState] = []
    rec_t, rec_E, rec_grad, rec_scale, rec_dt = [], [], [], [], []

    def current() -> FieldState:
        return state.with_fields(psi=psi.copy(), psit=psit.copy(), t=t)

    def take_snapshot():
        snap = current()
        snapshots.append(snap)
        for mon in monitors:
            mon(snap)

    def record():
        snap_view = state.with_fields(psi=psi, psit=psit, t=t)
        rec_t.append(t)
        rec_E.append(conserved_energy(snap_view))
        rec_grad.append(_sup_abs_gradient(grid.nodes, psi))
        lam, found = concentration_scale(snap_view)
        rec_scale.append(lam if found else float("nan"))
        rec_dt.append(dt)

    record()
    take_snapshot()
    next_snap = t + cadence
    last_snap_grad = max(rec_grad[-1], 1e-300)
    level = 0

    while t < cfg.t_end - 1e-14:
        remaining = cfg.t_end - t
        n_full = int(remaining / dt + 1e-12)
        if n_full >= 1:
            nsteps = min(cfg.record_every, n_full)
            dt_step = dt
        else:
            # land exactly on t_end with one short (still stable) step
            nsteps = 1
            dt_step = remaining
        _core.leapfrog_run(psi, psit, accel, cm, cp, inv_r2, dt_step, nsteps, code, kk, f_custom)
        t += nsteps * dt_step

        if not np.all(np.isfinite(psi[:: max(1, psi.size // 512)])):
            if not np.all(np.isfinite(psi)):
                raise NumericalBlowupError(f"non-finite field at t = {t}")
        record()

        sup_grad = rec_grad[-1]
        if sup_grad > cap:
            report.detected = True
            report.reason = "GradientCap"
            break

        snap_due = t >= next_snap - 1e-12
        grad_event = sup_grad >= last_snap_grad * 2.0**0.25

        # refinement: keep the half-height scale covered by enough cells;
        # when the level cap is hit the run stops rather than under-resolve
        lam = rec_scale[-1]
        did_regrid = False
        if np.isfinite(lam) and lam < cfg.refine_threshold * (grid.nodes[1] - grid.nodes[0]):
            if level >= cfg.max_refine_levels:
                report.detected = True
                report.reason = "DtFloor"
                report.refinement_exhausted = True
                break
            level += 1
            snap_state = regrid(current(), level, cfg.max_refine_levels)
            grid = snap_state.grid
            state = snap_state
            psi = snap_state.psi.copy()
            psit = snap_state.psit.copy()
            accel = np.zeros_like(psi)
            cm, cp, inv_r2 = _grid_coefficients(grid)
            new_dt = _stable_dt(grid, cfg.cfl, state.model)
            if new_dt < cfg.dt_min:
                report.detected = True
                report.reason = "DtFloor"
                break
            dt = new_dt
            _core.compute_accel(psi, accel, cm, cp, inv_r2, code, kk, f_custom)
            did_regrid = True

        if snap_due or grad_event or did_regrid:
            take_snapshot()
            last_snap_grad = max(sup_grad, 1e-300)
            while next_snap <= t + 1e-12:
                next_snap += cadence

    if snapshots and snapshots[-1].t < t - 1e-15:
        take_snapshot()

    report.refine_levels_used = level
    ts = np.asarray(rec_t)
    grads = np.asarray(rec_grad)
    if report.detected:
        report.T_est = _estimate_blowup_time(ts, grads, fallback=t)
    scale_arr = np.asarray(rec_scale)
    report.scale_series = [(float(a), float(b)) for a, b in zip(rec_t, rec_scale)]

    series = {
        "energy": (ts.copy(), np.asarray(rec_E)),
        "sup_grad": (ts.copy(), grads),
        "scale": (ts.copy(), scale_arr),
        "dt": (ts.copy(), np.asarray(rec_dt)),
    }
    traj = Trajectory(
        snapshots=snapshots,
        series=series,
        T_ref=report.T_est if report.detected else cfg.t_end,
        mode="blowup" if report.detected else "global",
        model=state.model,
        detected=report.detected,
    )
    return traj, report
