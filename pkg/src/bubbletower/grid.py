"""Radial grids, field snapshots, quadrature, and energy functionals.

Integrals are against the measure r dr on [0, R_max].  The quadrature is
composite trapezoid with exact r-weights per cell: the integrand is taken
linear on each cell and the product with r is integrated exactly, which keeps
second order accuracy and makes window integrals exactly additive over
adjacent windows.

The integrand g(psi)^2 / r^2 is regularized at the origin node with the
series value (g'(l) * psi_r(0+))^2, valid because psi - l ~ c r^{|g'(l)|}
for finite-energy fields pinned at a vacuum l.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .models import SEMILINEAR_6D, ModelSpec, S5_AREA, model_from_string

__all__ = [
    "GridError",
    "RadialGrid",
    "FieldState",
    "EnergyReport",
    "energy",
    "wavemap_energy",
    "h_norm",
    "g_modulus_gap",
    "resample",
    "interpolate_values",
    "radial_derivative",
    "write_snapshot",
    "read_snapshot",
]


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class RadialGrid:
    """Strictly increasing nodes r_0 = 0 < r_1 < ... < r_N = R_max."""

    nodes: np.ndarray
    spacing: str = "uniform"

    def __post_init__(self):
        r = np.asarray(self.nodes, dtype=float)
        if r.ndim != 1 or r.size < 8:
            raise GridError("grid needs at least 8 nodes")
        if r[0] != 0.0:
            raise GridError("grid must start at r = 0")
        if np.any(np.diff(r) <= 0):
            raise GridError("grid nodes must be strictly increasing")
        object.__setattr__(self, "nodes", r)

    @classmethod
    def uniform(cls, n: int, rmax: float) -> "RadialGrid":
        if rmax <= 0:
            raise GridError("R_max must be positive")
        return cls(np.linspace(0.0, rmax, n + 1), "uniform")

    @classmethod
    def graded(cls, n: int, rmax: float, ratio: float) -> "RadialGrid":
        """Geometrically graded toward the origin with cell ratio in (0.9, 1)."""
        if not (0.9 < ratio < 1.0):
            raise GridError("grading ratio must lie in (0.9, 1)")
        # spacing h_i proportional to ratio^(n - i), normalized to reach rmax
        w = ratio ** np.arange(n, 0, -1, dtype=float)
        nodes = np.concatenate([[0.0], np.cumsum(w)])
        nodes *= rmax / nodes[-1]
        return cls(nodes, f"graded:{ratio}")

    @property
    def n_cells(self) -> int:
        return self.nodes.size - 1

    @property
    def rmax(self) -> float:
        return float(self.nodes[-1])

    @property
    def min_spacing(self) -> float:
        return float(np.min(np.diff(self.nodes)))

    def weights_rdr(self) -> np.ndarray:
        """Node weights for int f(r) r dr over the whole grid (linear f per cell)."""
        r = self.nodes
        h = np.diff(r)
        w_left = h * (2.0 * r[:-1] + r[1:]) / 6.0
        w_right = h * (r[:-1] + 2.0 * r[1:]) / 6.0
        w = np.zeros_like(r)
        w[:-1] += w_left
        w[1:] += w_right
        return w

    def window_quad_rdr(self, values: np.ndarray, r1: float, r2: float) -> float:
        """int_{r1}^{r2} f(r) r dr with f linear on cells; exact cell clipping."""
        r = self.nodes
        if r1 < r[0] - 1e-15 or r2 > r[-1] * (1 + 1e-15) or r1 >= r2:
            raise GridError(f"window ({r1}, {r2}) outside grid [0, {r[-1]}]")
        v = np.asarray(values, dtype=float)
        i0 = max(int(np.searchsorted(r, r1, side="right") - 1), 0)
        i1 = min(int(np.searchsorted(r, r2, side="left")), r.size - 1)

        total = 0.0
        for i in range(i0, i1):
            a = max(r[i], r1)
            b = min(r[i + 1], r2)
            if b <= a:
                continue
            h = r[i + 1] - r[i]
            s = (v[i + 1] - v[i]) / h
            # integral of (v_i + s (r - r_i)) * r dr over [a, b]
            c0 = v[i] - s * r[i]
            total += c0 * (b**2 - a**2) / 2.0 + s * (b**3 - a**3) / 3.0
        return total

    def window_quad_rdr_full_cells(self, values: np.ndarray, i0: int, i1: int) -> float:
        """Same quadrature over whole cells [i0, i1] (node indices)."""
        r = self.nodes[i0 : i1 + 1]
        v = np.asarray(values, dtype=float)[i0 : i1 + 1]
        h = np.diff(r)
        w_left = h * (2.0 * r[:-1] + r[1:]) / 6.0
        w_right = h * (r[:-1] + 2.0 * r[1:]) / 6.0
        return float(np.sum(v[:-1] * w_left) + np.sum(v[1:] * w_right))


@dataclass(frozen=True)
class FieldState:
    """One snapshot (psi, psi_t) on a radial grid, pinned at vacua."""

    grid: RadialGrid
    psi: np.ndarray
    psit: np.ndarray
    t: float
    model: ModelSpec
    bv_origin: float
    bv_infinity: float

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=float)
        psit = np.asarray(self.psit, dtype=float)
        if psi.shape != self.grid.nodes.shape or psit.shape != self.grid.nodes.shape:
            raise GridError("field arrays must match the grid")
        if not (np.all(np.isfinite(psi)) and np.all(np.isfinite(psit))):
            raise GridError("field values must be finite")
        if abs(psi[0] - self.bv_origin) > 1e-12 * max(1.0, abs(self.bv_origin)):
            raise GridError("psi[0] must equal the origin boundary value")
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "psit", psit)

    def with_fields(self, psi=None, psit=None, t=None) -> "FieldState":
        return replace(
            self,
            psi=self.psi if psi is None else psi,
            psit=self.psit if psit is None else psit,
            t=self.t if t is None else t,
        )

    def psi_r(self) -> np.ndarray:
        return radial_derivative(self.grid.nodes, self.psi)

    def origin_slope(self) -> float:
        r, v = self.grid.nodes, self.psi
        h1, h2 = r[1] - r[0], r[2] - r[0]
        # one-sided second-order derivative at r = 0
        return float((v[1] - v[0]) * h2 / (h1 * (h2 - h1)) - (v[2] - v[0]) * h1 / (h2 * (h2 - h1)))


@dataclass(frozen=True)
class EnergyReport:
    total: float
    kinetic: float
    gradient: float
    potential: float
    window: tuple[float, float]


def radial_derivative(r: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Second-order centered derivative on a (possibly nonuniform) grid."""
    return np.gradient(v, r, edge_order=2)


def _potential_density(state: FieldState) -> np.ndarray:
    """g(psi)^2 / r^2 with the origin-limit value at r = 0."""
    model = state.model
    r = state.grid.nodes
    g2 = model.g(state.psi) ** 2
    out = np.empty_like(g2)
    out[1:] = g2[1:] / r[1:] ** 2
    slope = state.origin_slope()
    gp0 = model.g_prime(np.asarray(state.bv_origin))
    out[0] = float(gp0) ** 2 * slope**2
    return out


def wavemap_energy(state: FieldState, r1: float, r2: float) -> EnergyReport:
    """E = int (psi_t^2 + psi_r^2 + g(psi)^2/r^2) r dr over the window (no 1/2)."""
    grid = state.grid
    kin = grid.window_quad_rdr(state.psit**2, r1, r2)
    grad = grid.window_quad_rdr(state.psi_r() ** 2, r1, r2)
    pot = grid.window_quad_rdr(_potential_density(state), r1, r2)
    return EnergyReport(kin + grad + pot, kin, grad, pot, (r1, r2))


def _semilinear_native_energy(state: FieldState, r1: float, r2: float) -> EnergyReport:
    """R^6 energy of u = psi/r^2, computed directly from psi.

    int (u_t^2/2 + |grad u|^2/2 - |u|^3/3) dx
      = pi^3 * int (psi_t^2/2 + (psi_r - 2 psi/r)^2/2 - |psi|^3/(3 r^2)) r dr.
    """
    grid = state.grid
    r = grid.nodes
    psi, psit = state.psi, state.psit
    psir = state.psi_r()
    ur_scaled = np.empty_like(psi)
    ur_scaled[1:] = psir[1:] - 2.0 * psi[1:] / r[1:]
    ur_scaled[0] = 0.0  # r^2 u_r -> 0 for smooth u
    cubic = np.empty_like(psi)
    cubic[1:] = np.abs(psi[1:]) ** 3 / r[1:] ** 2
    cubic[0] = 0.0
    kin = 0.5 * S5_AREA * grid.window_quad_rdr(psit**2, r1, r2)
    grad = 0.5 * S5_AREA * grid.window_quad_rdr(ur_scaled**2, r1, r2)
    pot = -(S5_AREA / 3.0) * grid.window_quad_rdr(cubic, r1, r2)
    return EnergyReport(kin + grad + pot, kin, grad, pot, (r1, r2))


def energy(state: FieldState, r1: float = 0.0, r2: float | None = None) -> EnergyReport:
    """Energy over a window; the semilinear6d model reports the native R^6 value."""
    if r2 is None:
        r2 = state.grid.rmax
    if state.model.kind == SEMILINEAR_6D:
        return _semilinear_native_energy(state, r1, r2)
    return wavemap_energy(state, r1, r2)


def h_norm(state: FieldState, r1: float, r2: float, vacuum: float) -> float:
    """Squared H x L^2 norm of (psi - vacuum, psi_t) over the window."""
    grid = state.grid
    r = grid.nodes
    d = state.psi - vacuum
    ratio = np.empty_like(d)
    ratio[1:] = d[1:] ** 2 / r[1:] ** 2
    ratio[0] = state.origin_slope() ** 2 if abs(d[0]) < 1e-12 else d[0] ** 2 / max(r[1], 1e-300) ** 2
    kin = grid.window_quad_rdr(state.psit**2, r1, r2)
    grad = grid.window_quad_rdr(state.psi_r() ** 2, r1, r2)
    pot = grid.window_quad_rdr(ratio, r1, r2)
    return float(kin + grad + pot)


def g_modulus_gap(state: FieldState, r1: float, r2: float) -> float:
    """|G(psi(r1)) - G(psi(r2))|; bounded by the window's wave-map energy."""
    if r1 >= r2:
        raise GridError("need r1 < r2")
    v1 = interpolate_values(state.grid.nodes, state.psi, np.asarray([r1]))[0]
    v2 = interpolate_values(state.grid.nodes, state.psi, np.asarray([r2]))[0]
    G = state.model.G
    return float(abs(G(np.asarray(v2)) - G(np.asarray(v1))))


# ---------------------------------------------------------------------------
# resampling
# ---------------------------------------------------------------------------


def interpolate_values(r_src: np.ndarray, v_src: np.ndarray, r_dst: np.ndarray) -> np.ndarray:
    """Piecewise 4-point Lagrange interpolation, clamped to the bracketing
    node range so resampled profiles cannot overshoot (monotone-safe)."""
    r_dst = np.asarray(r_dst, dtype=float)
    if r_dst.min() < r_src[0] - 1e-12 or r_dst.max() > r_src[-1] * (1 + 1e-12):
        raise GridError("resample target extends beyond the source grid")
    n = r_src.size
    j = np.clip(np.searchsorted(r_src, r_dst, side="right") - 1, 0, n - 2)
    base = np.clip(j - 1, 0, n - 4)
    out = np.zeros_like(r_dst)
    for m in range(4):
        xm = r_src[base + m]
        lm = np.ones_like(r_dst)
        for p in range(4):
            if p == m:
                continue
            xp = r_src[base + p]
            lm *= (r_dst - xp) / (xm - xp)
        out += v_src[base + m] * lm
    lo = np.minimum(v_src[j], v_src[j + 1])
    hi = np.maximum(v_src[j], v_src[j + 1])
    return np.clip(out, lo, hi)


def resample(state: FieldState, grid2: RadialGrid) -> FieldState:
    """Move a snapshot to a new grid with 4th-order interpolation."""
    if np.array_equal(grid2.nodes, state.grid.nodes):
        return replace(state, grid=grid2)
    psi = interpolate_values(state.grid.nodes, state.psi, grid2.nodes)
    psit = interpolate_values(state.grid.nodes, state.psit, grid2.nodes)
    psi[0] = state.bv_origin
    return FieldState(grid2, psi, psit, state.t, state.model, state.bv_origin, state.bv_infinity)


# ---------------------------------------------------------------------------
# snapshot files
# ---------------------------------------------------------------------------


def write_snapshot(state: FieldState, path) -> None:
    """Text snapshot: header comments then CSV r,psi,psit at 17 significant digits."""
    buf = io.StringIO()
    buf.write(f"# model={state.model.name}\n")
    buf.write(f"# t={state.t:.17g}\n")
    buf.write(f"# k={state.model.k}\n")
    buf.write(f"# vacuum0={state.bv_origin:.17g}\n")
    buf.write(f"# vacuumInf={state.bv_infinity:.17g}\n")
    buf.write("r,psi,psit\n")
    for r, p, q in zip(state.grid.nodes, state.psi, state.psit):
        buf.write(f"{r:.17g},{p:.17g},{q:.17g}\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def read_snapshot(path, model: Optional[ModelSpec] = None) -> FieldState:
    header = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                header[key.strip()] = val.strip()
            elif line[0].isdigit() or line[0] in "+-.":
                parts = line.split(",")
                rows.append((float(parts[0]), float(parts[1]), float(parts[2])))
    if not rows:
        raise GridError(f"snapshot {path} holds no samples")
    data = np.asarray(rows, dtype=float)
    if model is None:
        model = model_from_string(header.get("model", ""))
    grid = RadialGrid(data[:, 0])
    return FieldState(
        grid,
        data[:, 1],
        data[:, 2],
        float(header.get("t", "0")),
        model,
        float(header.get("vacuum0", data[0, 1])),
        float(header.get("vacuumInf", data[-1, 1])),
    )
