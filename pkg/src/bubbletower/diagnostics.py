"""Runtime diagnostics over trajectories: null-coordinate densities, cone
flux, exterior self-similar window energies, virial time series and identity
residuals, and light-cone kinetic averages.

Conventions.  For blow-up trajectories the cone is r = T_ref - t with T_ref
the estimated blow-up time; global trajectories use windows anchored at
r ~ t.  All R^6 integrals for the semilinear model carry the |S^5| = pi^3
surface factor and are evaluated in the psi = r^2 u variable, which removes
the origin singularity of u.

The field entering the virial series stands in for "solution minus regular
part": it is the snapshot windowed by a C^2 cutoff in the interior of the
cone, where the two coincide up to the cutoff.  The regular part itself is
not constructible from a single run.
"""

from __future__ import annotations

import numpy as np

from dataclasses import dataclass

from .grid import FieldState, interpolate_values, radial_derivative
from .models import SEMILINEAR_6D, ModelSpec, S5_AREA

__all__ = [
    "DiagnosticsError",
    "Trajectory",
    "NullFields",
    "null_fields",
    "flux",
    "flux_identity_residual",
    "exterior_selfsimilar_energy",
    "virial_series",
    "virial_identity_residual",
    "pointwise_cone_bound",
    "lightcone_kinetic_series",
    "kinetic_time_average",
    "write_series",
    "read_series",
]


class DiagnosticsError(ValueError):
    pass


@dataclass
class Trajectory:
    """Time-ordered snapshots plus recorded diagnostic series."""

    snapshots: list[FieldState]
    series: dict[str, tuple[np.ndarray, np.ndarray]]
    T_ref: float
    mode: str  # "blowup" | "global"
    model: ModelSpec
    detected: bool = False

    def __post_init__(self):
        ts = self.times()
        if ts.size and np.any(np.diff(ts) <= 0):
            raise DiagnosticsError("snapshot times must be strictly increasing")

    def times(self) -> np.ndarray:
        return np.asarray([s.t for s in self.snapshots])

    def cone_radius(self, t: float) -> float:
        if self.mode == "blowup":
            return self.T_ref - t
        return t


@dataclass(frozen=True)
class NullFields:
    """Pointwise densities for one snapshot: e, m, L and the transported
    squares A2 = r(e+m), B2 = r(e-m), plus the observed ratio L^2 r^2/(A2 B2)."""

    r: np.ndarray
    e: np.ndarray
    m: np.ndarray
    L: np.ndarray
    A2: np.ndarray
    B2: np.ndarray
    bound_ratio: np.ndarray


def _density_F_over_r2(state: FieldState) -> np.ndarray:
    model = state.model
    r = state.grid.nodes
    out = np.empty_like(r)
    out[1:] = model.F(state.psi[1:]) / r[1:] ** 2
    # F(psi) ~ f'(l) (psi-l)^2 / 2 near a vacuum, psi - l ~ slope * r
    out[0] = 0.5 * float(model.f_prime(np.asarray(state.bv_origin))) * state.origin_slope() ** 2
    return out


def null_fields(state: FieldState) -> NullFields:
    """Densities of the psi-equation.  The wave-map analogue replaces the
    semilinear potential F by g^2/2, so re +- rm stay transported squares."""
    model = state.model
    r = state.grid.nodes
    psir = state.psi_r()
    psit = state.psit
    Fr2 = _density_F_over_r2(state)
    e = 0.5 * psir**2 + 0.5 * psit**2 + Fr2
    m = psit * psir
    f_over_r = np.empty_like(r)
    f_over_r[1:] = model.f(state.psi[1:]) / r[1:]
    f_over_r[0] = float(model.f_prime(np.asarray(state.bv_origin))) * state.origin_slope()
    L = -0.5 * psit**2 + 0.5 * psir**2 + Fr2 - 2.0 * f_over_r * psir
    A2 = r * (e + m)
    B2 = r * (e - m)
    denom = A2 * B2
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(denom > 0, L**2 * r**2 / np.where(denom > 0, denom, 1.0), np.nan)
    return NullFields(r, e, m, L, A2, B2, ratio)


# ---------------------------------------------------------------------------
# cone flux
# ---------------------------------------------------------------------------


def _em_at_radius(state: FieldState, rb: float) -> tuple[float, float]:
    nf = null_fields(state)
    e = float(interpolate_values(nf.r, nf.e, np.asarray([rb]))[0])
    m = float(interpolate_values(nf.r, nf.m, np.asarray([rb]))[0])
    return e, m


def flux(traj: Trajectory, t0: float, t1: float) -> float:
    """Energy crossing the cone boundary r = T_ref - t between t0 and t1."""
    if traj.mode != "blowup":
        raise DiagnosticsError("the cone flux needs a blow-up trajectory")
    sel = [s for s in traj.snapshots if t0 - 1e-12 <= s.t <= t1 + 1e-12]
    if len(sel) < 2:
        raise DiagnosticsError("need at least two snapshots inside [t0, t1]")
    vals = []
    for s in sel:
        rb = traj.cone_radius(s.t)
        if rb <= 0 or rb > s.grid.rmax:
            raise DiagnosticsError("cone exits the grid inside [t0, t1]")
        e, m = _em_at_radius(s, rb)
        vals.append(rb * (e - m))
    tt = np.asarray([s.t for s in sel])
    return float(np.trapezoid(np.asarray(vals), tt))


def _cone_energy(state: FieldState, rb: float) -> float:
    nf = null_fields(state)
    return state.grid.window_quad_rdr(nf.e, 0.0, min(rb, state.grid.rmax))


def flux_identity_residual(traj: Trajectory, t0: float, t1: float) -> float:
    """|E_cone(t0) - E_cone(t1) - Fl(t0; t1)|, the discretized cone balance."""
    s0 = min(traj.snapshots, key=lambda s: abs(s.t - t0))
    s1 = min(traj.snapshots, key=lambda s: abs(s.t - t1))
    e0 = _cone_energy(s0, traj.cone_radius(s0.t))
    e1 = _cone_energy(s1, traj.cone_radius(s1.t))
    return float(abs(e0 - e1 - flux(traj, s0.t, s1.t)))


# ---------------------------------------------------------------------------
# exterior self-similar window energy
# ---------------------------------------------------------------------------


def exterior_selfsimilar_energy(
    traj: Trajectory, lam: float, A: float = 0.0
) -> tuple[np.ndarray, np.ndarray, bool]:
    """Window energies per snapshot.

    Blow-up: int over [lam*(T-t), T-t] of (psi_t^2/2 + psi_r^2/2 + psi^2/r^2) r dr
    for the semilinear psi, or the full wave-map energy density for wave maps.
    Global: the window is [lam*t, t - A].  Returns (times, values, truncated).
    """
    if not (0.0 < lam < 1.0):
        raise DiagnosticsError("window ratio must lie in (0, 1)")
    times, vals = [], []
    truncated = False
    for s in traj.snapshots:
        if traj.mode == "blowup":
            rb = traj.T_ref - s.t
            r1, r2 = lam * rb, rb
        else:
            r1, r2 = lam * s.t, s.t - A
        h0 = s.grid.nodes[1] - s.grid.nodes[0]
        if r2 <= r1 or r2 - r1 < 4 * h0 or r2 > s.grid.rmax or r1 <= 0:
            truncated = True
            continue
        r = s.grid.nodes
        psir = s.psi_r()
        if s.model.kind == SEMILINEAR_6D:
            dens = 0.5 * s.psit**2 + 0.5 * psir**2
            ratio = np.zeros_like(r)
            ratio[1:] = s.psi[1:] ** 2 / r[1:] ** 2
            val = s.grid.window_quad_rdr(dens + ratio, r1, r2)
        else:
            pot = np.zeros_like(r)
            pot[1:] = s.model.g(s.psi[1:]) ** 2 / r[1:] ** 2
            val = s.grid.window_quad_rdr(s.psit**2 + psir**2 + pot, r1, r2)
        times.append(s.t)
        vals.append(val)
    return np.asarray(times), np.asarray(vals), truncated


# ---------------------------------------------------------------------------
# cutoffs
# ---------------------------------------------------------------------------


def _smooth_transition(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """C^2 quintic window: 1 for x <= lo, 0 for x >= hi."""
    s = np.clip((x - lo) / (hi - lo), 0.0, 1.0)
    return 1.0 - s**3 * (10.0 - 15.0 * s + 6.0 * s**2)


def _smooth_transition_deriv(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    s = np.clip((x - lo) / (hi - lo), 0.0, 1.0)
    return -(30.0 * s**2 * (1.0 - s) ** 2) / (hi - lo)


def _virial_density_origin(model: ModelSpec, value0: float, slope: float) -> float:
    """Origin limit of f'(a) a_r^2 + f(a)^2 / r^2 for a pinned at a vacuum."""
    fp = float(model.f_prime(np.asarray(value0)))
    # f(a)/r -> f'(l) * slope when |g'(l)| = 1 (slope vanishes otherwise)
    return fp * slope**2 + (fp * slope) ** 2


def _windowed_field(traj: Trajectory, s: FieldState):
    """Cutoff stand-in for 'solution minus regular part' on one snapshot.

    a == psi inside the window, a == nearest vacuum at the edge outside; the
    transition is a C^2 quintic over [0.9, 1.0] x window (blow-up) or the
    [1/2, 3/4] x t annulus (global).
    """
    if traj.mode == "blowup":
        rb = traj.T_ref - s.t
        lo, hi = 0.9 * rb, 1.0 * rb
    else:
        rb = 0.75 * s.t
        lo, hi = 0.5 * s.t, 0.75 * s.t
    r = s.grid.nodes
    if rb <= 8 * (r[1] - r[0]) or hi > s.grid.rmax:
        return None
    w = _smooth_transition(r, lo, hi)
    wr = _smooth_transition_deriv(r, lo, hi)
    edge_val = float(interpolate_values(r, s.psi, np.asarray([min(hi, s.grid.rmax)]))[0])
    l_ext = 0.0 if s.model.kind == SEMILINEAR_6D else s.model.nearest_vacuum(edge_val)
    a = l_ext + (s.psi - l_ext) * w
    ar = radial_derivative(r, s.psi) * w + (s.psi - l_ext) * wr
    at = s.psit * w
    return a, ar, at, l_ext, rb


def virial_series(traj: Trajectory) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(times, g, h): kinetic mass g(t) and the model's virial density h(t),
    both restricted to the interior window.

    Wave maps:  g = int a_t^2 r dr,  h = int (f'(a) a_r^2 + f(a)^2/r^2) r dr.
    Semilinear: g = pi^3 int a_t^2 r dr (that is int (u_t)^2 dx) and
    h = pi^3 int ((a_r - 2a/r)^2 - |a|^3/r^2) r dr  (= int |grad u|^2 - |u|^3 dx).
    """
    ts, gs, hs = [], [], []
    model = traj.model
    for s in traj.snapshots:
        fields = _windowed_field(traj, s)
        if fields is None:
            continue
        a, ar, at, l_ext, rb = fields
        r = s.grid.nodes
        upper = min(rb, s.grid.rmax)
        gval = s.grid.window_quad_rdr(at**2, 0.0, upper)
        if model.kind == SEMILINEAR_6D:
            gval *= S5_AREA
            grad_u = np.empty_like(r)
            grad_u[1:] = ar[1:] - 2.0 * a[1:] / r[1:]
            grad_u[0] = 0.0
            cubic = np.empty_like(r)
            cubic[1:] = np.abs(a[1:]) ** 3 / r[1:] ** 2
            cubic[0] = 0.0
            hval = S5_AREA * s.grid.window_quad_rdr(grad_u**2 - cubic, 0.0, upper)
        else:
            fp = model.f_prime(a)
            f2 = model.f(a) ** 2
            dens = np.empty_like(r)
            dens[1:] = fp[1:] * ar[1:] ** 2 + f2[1:] / r[1:] ** 2
            slope = (a[2] - a[0]) / (r[2] - r[0]) if abs(a[0] - a[1]) > 0 else 0.0
            dens[0] = _virial_density_origin(model, a[0], slope)
            hval = s.grid.window_quad_rdr(dens, 0.0, upper)
        ts.append(s.t)
        gs.append(gval)
        hs.append(hval)
    return np.asarray(ts), np.asarray(gs), np.asarray(hs)


# ---------------------------------------------------------------------------
# virial identity residuals
# ---------------------------------------------------------------------------


def _cutoff_inner(traj: Trajectory, s: FieldState):
    """Quintic eta(r/rb): 1 on [0, 1/2], 0 beyond 3/4 (the multiplier cutoff)."""
    rb = traj.cone_radius(s.t)
    r = s.grid.nodes
    if rb <= 8 * (r[1] - r[0]) or 0.75 * rb > s.grid.rmax:
        return None
    x = r / rb
    eta = _smooth_transition(x, 0.5, 0.75)
    etap = _smooth_transition_deriv(x, 0.5, 0.75)
    return eta, etap, rb


def _plain_quad(r: np.ndarray, vals: np.ndarray) -> float:
    """Trapezoid against dr (integrand already carries its r powers)."""
    return float(np.trapezoid(vals, r))


def _wavemap_virial_pieces(traj: Trajectory, s: FieldState):
    """(V, RHS) of d/dt int psi_t f(psi) eta(r/rb) r dr = RHS, all terms exact."""
    cut = _cutoff_inner(traj, s)
    if cut is None:
        return None
    eta, etap, rb = cut
    model = s.model
    r = s.grid.nodes
    psir = s.psi_r()
    fpsi = model.f(s.psi)
    V = s.grid.window_quad_rdr(s.psit * fpsi * eta, 0.0, s.grid.rmax)
    kin = s.grid.window_quad_rdr(s.psit**2 * model.f_prime(s.psi) * eta, 0.0, s.grid.rmax)
    dens = np.empty_like(r)
    dens[1:] = model.f_prime(s.psi[1:]) * psir[1:] ** 2 + fpsi[1:] ** 2 / r[1:] ** 2
    dens[0] = _virial_density_origin(model, s.psi[0], s.origin_slope())
    pot = s.grid.window_quad_rdr(dens * eta, 0.0, s.grid.rmax)
    # cutoff terms, supported on the transition annulus
    sgn = 1.0 if traj.mode == "blowup" else -1.0
    time_term = sgn / rb**2 * s.grid.window_quad_rdr(s.psit * fpsi * etap * r, 0.0, s.grid.rmax)
    space_term = -(1.0 / rb) * _plain_quad(r, r * psir * fpsi * etap)
    rhs = kin - pot + time_term + space_term
    return V, rhs


def _semilinear_virial_pieces(traj: Trajectory, s: FieldState, c: int):
    """(P_c, RHS) for the multiplier u_t (x.grad u + c u) phi(x/rb), in psi form."""
    cut = _cutoff_inner(traj, s)
    if cut is None:
        return None
    eta, etap, rb = cut
    r = s.grid.nodes
    psi, psit = s.psi, s.psit
    psir = s.psi_r()
    grad_u = np.empty_like(r)  # r^2 u_r = psi_r - 2 psi / r
    grad_u[1:] = psir[1:] - 2.0 * psi[1:] / r[1:]
    grad_u[0] = 0.0

    # u_t (x.grad u + c u) r^5 = [psi_t psi_r r + (c-2) psi psi_t] * r
    mult = psit * psir * r + (c - 2.0) * psi * psit
    P = S5_AREA * s.grid.window_quad_rdr(mult * eta, 0.0, s.grid.rmax)

    kin = S5_AREA * s.grid.window_quad_rdr(psit**2 * eta, 0.0, s.grid.rmax)
    grad = S5_AREA * s.grid.window_quad_rdr(grad_u**2 * eta, 0.0, s.grid.rmax)
    cubic_dens = np.zeros_like(r)
    cubic_dens[1:] = np.abs(psi[1:]) ** 3 / r[1:] ** 2
    cubic = S5_AREA * s.grid.window_quad_rdr(cubic_dens * eta, 0.0, s.grid.rmax)

    # exact cutoff terms: phi_r = eta'/rb, phi_t = sgn * eta' * r / rb^2
    sgn = 1.0 if traj.mode == "blowup" else -1.0
    edens = (0.5 * psit**2 + 0.5 * grad_u**2) * r**2 + np.abs(psi) ** 3 / 3.0
    uur = np.zeros_like(r)  # u u_r r^5 = psi psi_r - 2 psi^2 / r
    uur[1:] = psi[1:] * psir[1:] - 2.0 * psi[1:] ** 2 / r[1:]
    B1 = -(S5_AREA / rb) * _plain_quad(r, edens * etap)
    B2 = -(c * S5_AREA / rb) * _plain_quad(r, uur * etap)
    B3 = (S5_AREA * sgn / rb**2) * s.grid.window_quad_rdr(mult * etap * r, 0.0, s.grid.rmax)
    if c == 2:
        rhs = -kin + B1 + B2 + B3
    else:
        rhs = -grad + cubic + B1 + B2 + B3
    return P, rhs


def virial_identity_residual(traj: Trajectory, which: str = "WaveMap") -> tuple[np.ndarray, np.ndarray]:
    """|d/dt (multiplier functional) - RHS| per interior snapshot.

    which = "WaveMap" uses the multiplier psi_t f(psi) eta(r/rb);
    "Mult2u"/"Mult3u" use u_t (x . grad u + c u) with c = 2, 3 for the
    semilinear model.  The cutoff terms are evaluated exactly, so the
    residual measures only the discretization and decays at second order.
    """
    snaps = traj.snapshots
    if len(snaps) < 3:
        raise DiagnosticsError("need at least three snapshots to difference in time")
    if which == "WaveMap":
        pieces = [_wavemap_virial_pieces(traj, s) for s in snaps]
    elif which in ("Mult2u", "Mult3u"):
        if traj.model.kind != SEMILINEAR_6D:
            raise DiagnosticsError("u-multiplier identities need the semilinear model")
        pieces = [_semilinear_virial_pieces(traj, s, 2 if which == "Mult2u" else 3) for s in snaps]
    else:
        raise DiagnosticsError(f"unknown identity {which!r}")
    ts, res = [], []
    for i in range(1, len(snaps) - 1):
        if pieces[i - 1] is None or pieces[i] is None or pieces[i + 1] is None:
            continue
        dVdt = (pieces[i + 1][0] - pieces[i - 1][0]) / (snaps[i + 1].t - snaps[i - 1].t)
        ts.append(snaps[i].t)
        res.append(abs(dVdt - pieces[i][1]))
    return np.asarray(ts), np.asarray(res)


# ---------------------------------------------------------------------------
# pointwise cone bound and kinetic averages
# ---------------------------------------------------------------------------


def pointwise_cone_bound(traj: Trajectory, lam0: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """sup of r^2 |u| = |psi| over the near-cone annulus, per snapshot."""
    if traj.model.kind != SEMILINEAR_6D:
        raise DiagnosticsError("the r^2 u bound is a semilinear6d diagnostic")
    ts, vals = [], []
    for s in traj.snapshots:
        r = s.grid.nodes
        if traj.mode == "blowup":
            rb = traj.T_ref - s.t
            lo, hi = lam0 * rb, rb
        else:
            lo, hi = lam0 * s.t, s.grid.rmax
        if hi <= lo or hi > s.grid.rmax or lo <= 0:
            continue
        mask = (r >= lo) & (r <= hi)
        if not np.any(mask):
            continue
        ts.append(s.t)
        vals.append(float(np.max(np.abs(s.psi[mask]))))
    return np.asarray(ts), np.asarray(vals)


def lightcone_kinetic_series(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """k(t) = int_{r <= rb(t)} psi_t^2 r dr (with the pi^3 factor for R^6)."""
    ts, vals = [], []
    factor = S5_AREA if traj.model.kind == SEMILINEAR_6D else 1.0
    for s in traj.snapshots:
        rb = traj.cone_radius(s.t)
        if rb <= 0:
            continue
        ts.append(s.t)
        vals.append(factor * s.grid.window_quad_rdr(s.psit**2, 0.0, min(rb, s.grid.rmax)))
    return np.asarray(ts), np.asarray(vals)


def kinetic_time_average(traj: Trajectory, t: float, tau: float) -> float:
    """(1/tau) int_t^{t+tau} of the light-cone kinetic integral, by exact
    trapezoid prefix sums over the snapshot series."""
    ts, ks = lightcone_kinetic_series(traj)
    if tau <= 0:
        raise DiagnosticsError("tau must be positive")
    if t < ts[0] - 1e-12 or t + tau > ts[-1] + 1e-12:
        raise DiagnosticsError("average window outside the trajectory")
    prefix = np.concatenate([[0.0], np.cumsum(0.5 * (ks[1:] + ks[:-1]) * np.diff(ts))])

    def integral_to(x: float) -> float:
        i = int(np.clip(np.searchsorted(ts, x, side="right") - 1, 0, ts.size - 2))
        # linear interpolation of k inside the cell keeps the prefix exact
        dt = x - ts[i]
        kx = ks[i] + (ks[i + 1] - ks[i]) * dt / (ts[i + 1] - ts[i])
        return float(prefix[i] + 0.5 * (ks[i] + kx) * dt)

    return (integral_to(t + tau) - integral_to(t)) / tau


# ---------------------------------------------------------------------------
# series files
# ---------------------------------------------------------------------------


def write_series(path, name: str, times: np.ndarray, values: np.ndarray) -> None:
    with open(path, "w") as fh:
        fh.write(f"t,{name}\n")
        for t, v in zip(times, values):
            fh.write(f"{t:.17g},{v:.17g}\n")


def read_series(path) -> tuple[np.ndarray, np.ndarray]:
    ts, vs = [], []
    with open(path) as fh:
        header = fh.readline()
        if not header.lower().startswith("t,"):
            raise DiagnosticsError(f"{path} is not a series file")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            a, _, b = line.partition(",")
            ts.append(float(a))
            vs.append(float(b))
    return np.asarray(ts), np.asarray(vs)
