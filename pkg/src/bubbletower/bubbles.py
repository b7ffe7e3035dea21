"""Decomposition of a snapshot into rescaled solitons plus residual.

The extractor walks inward from the outer vacuum: find the outermost radius
where the field still deviates from the current target value by the running
threshold, fit one member of the static family around that radius by
least squares in the windowed H norm, subtract it, re-anchor the target to
the extracted profile's origin value, and repeat.  Consecutive profiles
automatically satisfy the chain constraint Q_{j+1}(inf) = Q_j(0) because the
candidate set is restricted to branches landing on the current target.

Thresholds: the base threshold is a quarter of the smallest vacuum gap on
the state's range, and the per-round thresholds increase toward half of it.
Rejection and separation caps are engineering choices recorded in the
decomposition report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import FieldState, RadialGrid, radial_derivative
from .models import (
    SEMILINEAR_6D,
    ModelError,
    ModelSpec,
    SolitonSpec,
    S5_AREA,
    harmonic_virial,
    soliton,
    soliton_branches,
    soliton_energy,
)
from .grid import energy as grid_energy

__all__ = [
    "BubbleError",
    "DeltaSchedule",
    "ExtractedBubble",
    "BubbleDecomposition",
    "outer_scale",
    "fit_bubble",
    "decompose",
    "residual_norms",
    "annulus_virial_split",
    "energy_concentration_floor",
]


class BubbleError(ValueError):
    pass


@dataclass(frozen=True)
class DeltaSchedule:
    delta: float
    count: int = 8

    @classmethod
    def for_model(cls, model: ModelSpec, count: int = 8) -> "DeltaSchedule":
        gap = model.vacuum_gap
        if not np.isfinite(gap) or gap <= 0:
            raise BubbleError(f"model {model.name!r} has no usable vacuum gap")
        return cls(gap / 4.0, count)

    def threshold(self, j: int) -> float:
        # strictly increasing toward delta/2: delta_j = (delta/2)(1 - 2^-j)
        return 0.5 * self.delta * (1.0 - 2.0 ** (-j))


@dataclass(frozen=True)
class ExtractedBubble:
    spec: SolitonSpec
    scale: float
    fit_residual: float
    outer_radius: float


@dataclass
class BubbleDecomposition:
    state: FieldState
    bubbles: list[ExtractedBubble]
    residual0: np.ndarray
    residual1: np.ndarray
    exterior_value: float
    target_final: float
    scales_ratio: list[float] = field(default_factory=list)
    norms: dict = field(default_factory=dict)
    energy_budget: dict = field(default_factory=dict)
    rejections: list[str] = field(default_factory=list)

    @property
    def J(self) -> int:
        return len(self.bubbles)


# ---------------------------------------------------------------------------
# outer scale
# ---------------------------------------------------------------------------


def outer_scale(values: np.ndarray, grid: RadialGrid, target_value: float, delta: float):
    """Largest radius with |psi(r) - target| >= delta; None when empty."""
    if delta <= 0:
        raise BubbleError("threshold must be positive")
    d = np.abs(np.asarray(values) - target_value)
    idx = np.nonzero(d >= delta)[0]
    if idx.size == 0:
        return None
    i = int(idx[-1])
    r = grid.nodes
    if i == r.size - 1:
        return float(r[-1])
    # crossing of |psi - target| = delta between nodes i and i+1
    frac = (d[i] - delta) / max(d[i] - d[i + 1], 1e-300)
    return float(r[i] + frac * (r[i + 1] - r[i]))


# ---------------------------------------------------------------------------
# windowed fitting
# ---------------------------------------------------------------------------


def _window_h_norm(grid: RadialGrid, values: np.ndarray, r_a: float, r_b: float, model: ModelSpec) -> float:
    """Squared fit norm over the window: H for wave maps, the u-form
    gradient norm for semilinear6d (both weight the r -> 0 behavior)."""
    r = grid.nodes
    dv = radial_derivative(r, values)
    if model.kind == SEMILINEAR_6D:
        dens = np.zeros_like(r)
        dens[1:] = (dv[1:] - 2.0 * values[1:] / r[1:]) ** 2
    else:
        dens = np.zeros_like(r)
        dens[1:] = dv[1:] ** 2 + values[1:] ** 2 / r[1:] ** 2
        dens[0] = dv[0] ** 2
    return float(grid.window_quad_rdr(dens, r_a, r_b))


def _golden_minimize(fn, lo: float, hi: float, rel_tol: float = 1e-9, max_iter: int = 200):
    """Golden-section on [lo, hi] followed by one parabolic refinement."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
        if (b - a) < rel_tol * max(abs(a), abs(b), 1e-300):
            break
    x0, x1, x2 = a, 0.5 * (a + b), b
    f0, f1, f2 = fn(x0), fn(x1), fn(x2)
    denom = (x1 - x0) * (f1 - f2) - (x1 - x2) * (f1 - f0)
    if abs(denom) > 0:
        xq = x1 - 0.5 * ((x1 - x0) ** 2 * (f1 - f2) - (x1 - x2) ** 2 * (f1 - f0)) / denom
        if x0 < xq < x2 and fn(xq) < f1:
            return xq, fn(xq)
    return x1, f1


def fit_bubble(
    state_values: np.ndarray,
    grid: RadialGrid,
    model: ModelSpec,
    window: tuple[float, float],
    candidates,
    reject_threshold: float = 0.3,
):
    """Least-squares profile fit on a window.

    Minimizes the windowed norm of psi - Q(./lambda) over the scale (log-scale
    golden section seeded by a coarse scan) and over the candidate branches.
    Returns (SolitonSpec, scale, fit_residual, pre_norm) or None when no
    candidate beats reject_threshold * pre_norm; ties go to the smallest scale.
    """
    r_a, r_b = window
    if r_b <= r_a or r_a < 0:
        raise BubbleError("fit window is degenerate")
    if not candidates:
        raise BubbleError("no candidate branches supplied")
    r = grid.nodes
    target = None
    best = None
    for branch in sorted(candidates):
        s_unit = soliton(model, branch, 1.0)
        target = s_unit.value_infinity
        pre = math.sqrt(_window_h_norm(grid, state_values - target, r_a, r_b, model))

        def misfit_log(loglam, branch=branch):
            lam = math.exp(loglam)
            prof = soliton(model, branch, lam)
            d = state_values - prof.evaluate(r)
            return _window_h_norm(grid, d, r_a, r_b, model)

        lo = math.log(max(grid.min_spacing, 1e-12))
        hi = math.log(grid.rmax)
        scan = np.linspace(lo, hi, 96)
        vals = np.asarray([misfit_log(x) for x in scan])
        i0 = int(np.argmin(vals))
        a = scan[max(i0 - 1, 0)]
        b = scan[min(i0 + 1, scan.size - 1)]
        xstar, fstar = _golden_minimize(misfit_log, a, b, rel_tol=1e-10)
        lam = math.exp(xstar)
        resid = math.sqrt(max(fstar, 0.0))
        cand = (resid, lam, branch, pre)
        if best is None or resid < best[0] * (1.0 - 1e-12) or (
            abs(resid - best[0]) <= 1e-12 * max(resid, 1e-300) and lam < best[1]
        ):
            best = cand
    resid, lam, branch, pre = best
    if resid > reject_threshold * max(pre, 1e-300):
        return None
    return soliton(model, branch, lam), lam, resid, pre


# ---------------------------------------------------------------------------
# the extraction loop
# ---------------------------------------------------------------------------

_W_ENERGY_CACHE: dict[int, float] = {}


def _semilinear_bubble_energy(model: ModelSpec) -> float:
    """R^6 energy of the ground state (scale invariant), by quadrature."""
    if 0 not in _W_ENERGY_CACHE:
        s = np.linspace(-26.0, 26.0, 200_001)
        r = np.exp(s)
        a = 1.0 / 24.0
        wr = -4.0 * r / (a + r**2) ** 3
        w = 1.0 / (a + r**2) ** 2
        grad = np.trapezoid(wr**2 * r**6, s)  # int w_r^2 r^5 dr
        cubic = np.trapezoid(np.abs(w) ** 3 * r**6, s)
        _W_ENERGY_CACHE[0] = S5_AREA * (0.5 * grad - cubic / 3.0)
    return _W_ENERGY_CACHE[0]


def decompose(
    state: FieldState,
    schedule: DeltaSchedule | None = None,
    cap: int = 8,
    separation_cap: float = 1.0 / 8.0,
    reject_threshold: float = 0.3,
    window_span: float = 64.0,
) -> BubbleDecomposition:
    """Iterate outer_scale -> fit_bubble -> subtract until nothing is left."""
    model = state.model
    if schedule is None:
        schedule = DeltaSchedule.for_model(model, cap)
    grid = state.grid
    r = grid.nodes

    if model.kind == SEMILINEAR_6D:
        exterior = 0.0
    else:
        exterior = model.nearest_vacuum(float(state.psi[-1]))
    working = state.psi.astype(float).copy()
    target = exterior
    bubbles: list[ExtractedBubble] = []
    rejections: list[str] = []
    budget_ratios: list[float] = []
    e_total = grid_energy(state).total

    for j in range(1, cap + 1):
        delta_j = schedule.threshold(j)
        R = outer_scale(working, grid, target, delta_j)
        if R is None:
            break
        window = (max(R / window_span, r[1]), min(4.0 * R, grid.rmax))
        if model.kind == SEMILINEAR_6D:
            candidates = soliton_branches(model)
        else:
            candidates = soliton_branches(model, ascending_from=target)
        if not candidates:
            rejections.append(f"round {j}: no branch lands on target {target}")
            break
        shifted = working if model.kind == SEMILINEAR_6D else working
        fit = fit_bubble(shifted, grid, model, window, candidates, reject_threshold)
        if fit is None:
            rejections.append(f"round {j}: fit rejected on window {window}")
            break
        spec, lam, resid, pre = fit
        if bubbles and lam / bubbles[-1].scale > separation_cap:
            rejections.append(
                f"round {j}: scale {lam:.3g} too close to previous {bubbles[-1].scale:.3g}"
            )
            break
        prof = spec.evaluate(r)
        working = working - prof + spec.value_origin
        target = spec.value_origin
        bubbles.append(ExtractedBubble(spec, lam, resid, R))
        # discrete analogue of the energy bookkeeping after one extraction
        interim = FieldState(
            grid, _repin(working), state.psit, state.t, model, float(working[0]), target
        )
        budget_ratios.append(grid_energy(interim).total / e_total if e_total else float("nan"))

    residual0 = working - target
    residual0[0] = residual0[0] if abs(residual0[0]) > 0 else 0.0
    dec = BubbleDecomposition(
        state=state,
        bubbles=bubbles,
        residual0=residual0,
        residual1=state.psit.copy(),
        exterior_value=exterior,
        target_final=target,
        scales_ratio=[
            bubbles[i + 1].scale / bubbles[i].scale for i in range(len(bubbles) - 1)
        ],
        rejections=rejections,
    )
    dec.norms = residual_norms(dec)

    if model.kind == SEMILINEAR_6D:
        e_bubbles = len(bubbles) * _semilinear_bubble_energy(model)
    else:
        e_bubbles = sum(soliton_energy(model, b.spec) for b in bubbles)
    resid_state = FieldState(
        grid, _repin(residual0.copy()), state.psit, state.t, model,
        float(residual0[0]), 0.0,
    )
    e_resid = grid_energy(resid_state).total
    dec.energy_budget = {
        "total": e_total,
        "bubbles": e_bubbles,
        "residual": e_resid,
        "defect": e_total - e_bubbles - e_resid,
        "relative_defect": (e_total - e_bubbles - e_resid) / e_total if e_total else float("nan"),
        "extraction_ratios": budget_ratios,
    }
    return dec


def _repin(values: np.ndarray) -> np.ndarray:
    # FieldState pins psi[0] to its boundary value; keep arrays consistent
    return values


# ---------------------------------------------------------------------------
# norms of the residual
# ---------------------------------------------------------------------------


def residual_norms(dec: BubbleDecomposition) -> dict:
    grid = dec.state.grid
    r = grid.nodes
    b0, b1 = dec.residual0, dec.residual1
    db = radial_derivative(r, b0)
    dens_h = np.zeros_like(r)
    dens_h[1:] = db[1:] ** 2 + b0[1:] ** 2 / r[1:] ** 2
    dens_h[0] = db[0] ** 2
    h_sq = grid.window_quad_rdr(dens_h, 0.0, grid.rmax)
    l2_sq = grid.window_quad_rdr(b1**2, 0.0, grid.rmax)

    dyadic = []
    prev_scale = grid.rmax
    for b in dec.bubbles:
        beta = max((prev_scale / b.scale) ** 0.25, 2.0)
        lo = max(b.scale / beta, r[1])
        hi = min(beta * b.scale, grid.rmax)
        dyadic.append(
            {
                "scale": b.scale,
                "beta": beta,
                "annulus": [lo, hi],
                "h_norm_sq": float(grid.window_quad_rdr(dens_h, lo, hi)),
            }
        )
        prev_scale = b.scale

    return {
        "sup_residual": float(np.max(np.abs(b0))),
        "l2_rdr_b1_sq": float(l2_sq),
        "h_cross_l2_sq": float(h_sq + l2_sq),
        "dyadic": dyadic,
    }


# ---------------------------------------------------------------------------
# per-region virial split
# ---------------------------------------------------------------------------


def _virial_density(model: ModelSpec, grid: RadialGrid, values: np.ndarray) -> np.ndarray:
    r = grid.nodes
    dv = radial_derivative(r, values)
    fv = model.f(values)
    dens = np.zeros_like(r)
    dens[1:] = model.f_prime(values[1:]) * dv[1:] ** 2 + fv[1:] ** 2 / r[1:] ** 2
    fp0 = float(model.f_prime(np.asarray(values[0])))
    dens[0] = fp0 * dv[0] ** 2 + (fp0 * dv[0]) ** 2
    return dens


def annulus_virial_split(state: FieldState, dec: BubbleDecomposition) -> dict:
    """Evaluate int f'(psi) psi_r^2 + f(psi)^2/r^2 over the four region types
    and report the soliton-sum prediction next to the actual field."""
    model = state.model
    grid = state.grid
    r = grid.nodes
    dens_actual = _virial_density(model, grid, state.psi)

    soliton_sum = np.full_like(r, dec.exterior_value)
    for b in dec.bubbles:
        soliton_sum = soliton_sum + b.spec.evaluate(r) - b.spec.value_infinity
    dens_solitons = _virial_density(model, grid, soliton_sum)

    edges: list[tuple[str, float, float]] = []
    prev_scale = grid.rmax
    inner_edge = grid.rmax
    for i, b in enumerate(dec.bubbles):
        beta = max((prev_scale / b.scale) ** 0.25, 2.0)
        hi = min(beta * b.scale, grid.rmax)
        lo = max(b.scale / beta, 0.0)
        if i == 0:
            edges.append(("exterior", hi, grid.rmax))
        else:
            edges.append((f"gap_{i}", hi, inner_edge))
        edges.append((f"annulus_{i + 1}", lo, hi))
        inner_edge = lo
        prev_scale = b.scale
    edges.append(("core", 0.0, inner_edge))

    regions = {}
    for name, lo, hi in edges:
        if hi <= lo:
            regions[name] = {"window": [lo, hi], "actual": 0.0, "solitons": 0.0}
            continue
        regions[name] = {
            "window": [lo, hi],
            "actual": float(grid.window_quad_rdr(dens_actual, lo, hi)),
            "solitons": float(grid.window_quad_rdr(dens_solitons, lo, hi)),
        }

    per_bubble = []
    for b in dec.bubbles:
        val, norm = harmonic_virial(model, b.spec)
        per_bubble.append({"scale": b.scale, "virial": val, "normalizer": norm})

    total_actual = float(grid.window_quad_rdr(dens_actual, 0.0, grid.rmax))
    return {
        "regions": regions,
        "per_bubble_fullline": per_bubble,
        "total_actual": total_actual,
        "total_solitons": float(grid.window_quad_rdr(dens_solitons, 0.0, grid.rmax)),
        "difference": total_actual - float(grid.window_quad_rdr(dens_solitons, 0.0, grid.rmax)),
    }


# ---------------------------------------------------------------------------
# annulus energy floor
# ---------------------------------------------------------------------------


def energy_concentration_floor(state: FieldState, r0: float, gamma: float) -> dict:
    """Static annulus energy against the lower bound delta^2 / (4 C(gamma)).

    C(gamma) = 2 log(gamma) comes from the Cauchy-Schwarz oscillation bound
    |psi(r1) - psi(r2)| <= (int psi_r^2 r dr)^(1/2) (log r2/r1)^(1/2) over the
    annulus [r0/gamma, gamma r0].
    """
    if gamma <= 1.0:
        raise BubbleError("gamma must exceed 1")
    grid = state.grid
    r = grid.nodes
    lo, hi = r0 / gamma, min(gamma * r0, grid.rmax)
    from .grid import interpolate_values

    val = float(interpolate_values(r, state.psi, np.asarray([r0]))[0])
    vac = np.asarray(state.model.vacua)
    delta = float(np.min(np.abs(vac - val))) if vac.size else float("nan")
    dv = radial_derivative(r, state.psi)
    dens = np.zeros_like(r)
    dens[1:] = dv[1:] ** 2 + state.model.g(state.psi[1:]) ** 2 / r[1:] ** 2
    dens[0] = dv[0] ** 2
    annulus_energy = float(grid.window_quad_rdr(dens, lo, hi))
    floor = delta**2 / (8.0 * math.log(gamma))
    return {
        "annulus_energy": annulus_energy,
        "delta": delta,
        "floor": floor,
        "gamma": gamma,
        "holds": annulus_energy >= floor,
        "margin": annulus_energy / floor if floor > 0 else float("inf"),
    }
