"""Built-in initial data families.

Grammar used by the CLI: ``builtin:<family>[:key=value...]`` with families

* vacuum                     -- constant vacuum (origin vacuum of the model)
* soliton[:scale=..][:branch=..]  -- static profile
* ground-state[:scale=..]    -- semilinear6d alias for soliton
* degree1[:amp=..][:r0=..]   -- steepened connector between adjacent vacua;
  amp is the energy ratio E(data)/E(Q) >= 1
* pulse[:amp=..][:center=..][:width=..]  -- localized bump over a vacuum
"""

from __future__ import annotations

import math

import numpy as np

from .grid import FieldState, RadialGrid
from .models import SEMILINEAR_6D, SPHERE, ModelError, ModelSpec, soliton, soliton_branches

__all__ = ["vacuum_state", "soliton_state", "degree1_state", "pulse_state", "build_initial_data"]


def vacuum_state(model: ModelSpec, grid: RadialGrid, value: float | None = None, t: float = 0.0) -> FieldState:
    if value is None:
        value = model.nearest_vacuum(0.0) if model.kind != SEMILINEAR_6D else 0.0
    psi = np.full_like(grid.nodes, float(value))
    return FieldState(grid, psi, np.zeros_like(psi), t, model, float(value), float(value))


def soliton_state(model: ModelSpec, grid: RadialGrid, branch=None, scale: float = 1.0, t: float = 0.0) -> FieldState:
    if branch is None:
        branch = soliton_branches(model)[0]
    s = soliton(model, branch, scale)
    psi = s.evaluate(grid.nodes)
    psi[0] = s.value_origin
    return FieldState(grid, psi, np.zeros_like(psi), t, model, s.value_origin, s.value_infinity)


def _smoothstep(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    return x**3 * (10.0 - 15.0 * x + 6.0 * x**2)


def degree1_state(
    model: ModelSpec, grid: RadialGrid, amp: float = 1.05, r0: float = 1.0, vel: float = 0.0
) -> FieldState:
    """Connector 2*arctan((r/r0)^q) from vacuum 0 to pi (sphere models).

    The exponent q = k*(amp + sqrt(amp^2 - 1)) makes the static energy
    exactly amp * E(Q): the profile energy is 2q + 2k^2/q, minimized (= 4k)
    at q = k.  ``vel`` adds an ingoing boost psi_t = +vel * psi_r
    (psi(r, t) ~ psi_0(r + vel*t) at early times).
    """
    if model.kind != SPHERE:
        raise ModelError("degree1 data is defined for sphere models")
    if amp < 1.0:
        raise ModelError("degree-1 data cannot have energy below the soliton energy (amp >= 1)")
    if not (0.0 <= vel < 1.0):
        raise ModelError("boost speed must lie in [0, 1)")
    q = model.k * (amp + math.sqrt(amp * amp - 1.0))
    r = grid.nodes
    x = (r / r0) ** q
    psi = 2.0 * np.arctan(x)
    psi[0] = 0.0
    psit = np.zeros_like(psi)
    if vel:
        with np.errstate(divide="ignore", invalid="ignore"):
            dpsi = np.where(r > 0, 2.0 * q * x / np.maximum(r, grid.nodes[1]) / (1.0 + x**2), 0.0)
        dpsi[0] = 0.0
        psit = vel * dpsi
        psit[-1] = 0.0
    return FieldState(grid, psi, psit, 0.0, model, 0.0, math.pi)


def pulse_state(
    model: ModelSpec,
    grid: RadialGrid,
    amp: float = 0.1,
    center: float = 1.0,
    width: float = 0.25,
    vacuum: float | None = None,
) -> FieldState:
    """Small smooth bump over a vacuum; vanishes identically at the origin."""
    if vacuum is None:
        vacuum = model.nearest_vacuum(0.0) if model.kind != SEMILINEAR_6D else 0.0
    r = grid.nodes
    bump = amp * np.exp(-(((r - center) / width) ** 2)) * _smoothstep(r / (0.5 * center)) ** model.k
    psi = vacuum + bump
    psi[0] = vacuum
    return FieldState(grid, psi, np.zeros_like(psi), 0.0, model, float(vacuum), float(vacuum))


def build_initial_data(model: ModelSpec, grid: RadialGrid, spec: str) -> FieldState:
    """Parse ``builtin:<family>[:k=v...]`` into a snapshot."""
    if not spec.startswith("builtin:"):
        raise ModelError(f"unknown data spec {spec!r}")
    parts = spec[len("builtin:"):].split(":")
    family, opts = parts[0], {}
    for p in parts[1:]:
        key, _, val = p.partition("=")
        opts[key] = val
    if family == "vacuum":
        return vacuum_state(model, grid)
    if family in ("soliton", "ground-state"):
        scale = float(opts.get("scale", "1"))
        branch = None
        if "branch" in opts:
            branch = tuple(int(x) for x in opts["branch"].split(","))
        return soliton_state(model, grid, branch=branch, scale=scale)
    if family == "degree1":
        return degree1_state(
            model,
            grid,
            amp=float(opts.get("amp", "1.05")),
            r0=float(opts.get("r0", "1")),
            vel=float(opts.get("vel", "0")),
        )
    if family == "pulse":
        return pulse_state(
            model,
            grid,
            amp=float(opts.get("amp", "0.1")),
            center=float(opts.get("center", "1")),
            width=float(opts.get("width", "0.25")),
        )
    raise ModelError(f"unknown builtin data family {family!r}")
