"""Equation families for the radial critical wave lab.

Each model is a nonlinearity f = g*g' for the radial equation

    psi_tt - psi_rr - psi_r/r + f(psi)/r**2 = 0

together with its vacua (zeros of g), the modulus G(x) = int_0^x |g|,
and the closed-form static profiles (solitons) connecting adjacent
vacua.  Built-in families:

* ``sphere:k=<n>`` -- sphere-valued equivariant maps, g = k*sin(psi),
  solitons 2*arctan(r**k) + l*pi,
* ``yang-mills``   -- the radial 4d gauge reduction, f = -2*psi*(1-psi**2),
  instanton (1-r**2)/(1+r**2),
* ``semilinear6d`` -- the 6d focusing cubic-type equation, evolved in the
  psi = r**2 * u variable so it shares the same kernel; f = 4*psi - |psi|*psi,
  ground state W = 1/(1/24 + r**2)**2,
* custom callback triples (g, g', g'').

For yang-mills we take g(psi) = 1 - psi**2, which reproduces f = -2*psi*(1-psi**2)
exactly and gives the instanton r*Q_r = -g(Q); with the factor-1/2 variant
those two statements cannot both hold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ModelError",
    "ModelSpec",
    "SolitonSpec",
    "make_model",
    "model_from_string",
    "soliton",
    "soliton_branches",
    "soliton_energy",
    "soliton_energy_quadrature",
    "check_assumptions",
    "soliton_residuals",
    "harmonic_virial",
    "W_CORE",
    "SPHERE",
    "YANG_MILLS",
    "SEMILINEAR_6D",
    "CUSTOM",
]

# kind tags (also the wire names used by the CLI grammar)
SPHERE = "sphere"
YANG_MILLS = "yang-mills"
SEMILINEAR_6D = "semilinear6d"
CUSTOM = "custom"

# core parameter a in W = 1/(a + r^2)^2; -Delta W = W^2 in 6d forces a = 1/24
W_CORE = 1.0 / 24.0

# surface measure of the unit 5-sphere, used for R^6 integrals
S5_AREA = math.pi**3


class ModelError(ValueError):
    """Invalid model construction or use of an operation outside its domain."""


@dataclass(frozen=True)
class ModelSpec:
    """One equation family.  Immutable; all callbacks are pure and vectorized."""

    kind: str
    k: int
    g: Callable[[np.ndarray], np.ndarray]
    g_prime: Callable[[np.ndarray], np.ndarray]
    g_second: Callable[[np.ndarray], np.ndarray]
    f: Callable[[np.ndarray], np.ndarray]
    f_prime: Callable[[np.ndarray], np.ndarray]
    G: Callable[[np.ndarray], np.ndarray]
    vacua: tuple[float, ...]
    vacua_slopes: tuple[float, ...]
    name: str = ""
    # smallest gap between vacua relevant for extraction thresholds; for
    # semilinear6d (single vacuum) this is the span of the psi-profile.
    vacuum_gap: float = field(default=float("nan"))

    def F(self, x):
        """Potential F with F' = f (psi-equation energy density piece)."""
        if self.kind == SEMILINEAR_6D:
            x = np.asarray(x, dtype=float)
            return 2.0 * x**2 - np.abs(x) ** 3 / 3.0
        return 0.5 * self.g(np.asarray(x, dtype=float)) ** 2

    def nearest_vacuum(self, value: float) -> float:
        if not self.vacua:
            raise ModelError(f"model {self.name!r} has no enumerated vacua")
        vac = np.asarray(self.vacua)
        return float(vac[np.argmin(np.abs(vac - value))])

    def vacuum_slope(self, l: float) -> float:
        vac = np.asarray(self.vacua)
        i = int(np.argmin(np.abs(vac - l)))
        if abs(vac[i] - l) > 1e-9 * max(1.0, abs(l)):
            raise ModelError(f"{l} is not a vacuum of model {self.name!r}")
        return self.vacua_slopes[i]

    def __repr__(self):  # keep frozen dataclass repr readable
        return f"ModelSpec({self.name!r}, vacua={list(self.vacua)})"


@dataclass(frozen=True)
class SolitonSpec:
    """A member of the static family at a given scale.

    ``branch`` identifies the family member: for the sphere it is
    (offset_index, orientation); for yang-mills the overall sign; for
    semilinear6d the sign l in {+1,-1} of l * W.
    """

    model: ModelSpec
    branch: tuple
    scale: float
    value_origin: float
    value_infinity: float
    sign_bogomolny: int  # s with r Q_r = s * g(Q) (0 for semilinear6d: sign varies)

    def __call__(self, r):
        return self.evaluate(r)

    def evaluate(self, r):
        return _soliton_eval(self.model, self.branch, np.asarray(r, dtype=float) / self.scale)[0]

    def derivative(self, r):
        rho = np.asarray(r, dtype=float) / self.scale
        return _soliton_eval(self.model, self.branch, rho)[1] / self.scale

    def second_derivative(self, r):
        rho = np.asarray(r, dtype=float) / self.scale
        return _soliton_eval(self.model, self.branch, rho)[2] / self.scale**2

    def u_view(self, r):
        """Native u = psi / r**2 profile (semilinear6d only)."""
        if self.model.kind != SEMILINEAR_6D:
            raise ModelError("u_view is only defined for semilinear6d")
        sgn = self.branch[0]
        rho = np.asarray(r, dtype=float) / self.scale
        return sgn * (1.0 / self.scale**2) / (W_CORE + rho**2) ** 2


# ---------------------------------------------------------------------------
# closed-form profile evaluation
# ---------------------------------------------------------------------------


def _soliton_eval(model: ModelSpec, branch: tuple, rho: np.ndarray):
    """Return (Q, Q', Q'') of the unit-scale profile at rho."""
    if model.kind == SPHERE:
        ell, orient = branch
        k = model.k
        rk = rho**k
        den = 1.0 + rk**2
        q = orient * 2.0 * np.arctan(rk) + ell * math.pi
        with np.errstate(divide="ignore", invalid="ignore"):
            qp = orient * 2.0 * k * np.where(rho > 0, rk / rho, (1.0 if k == 1 else 0.0)) / den
            qpp = (
                orient
                * 2.0
                * k
                * np.where(rho > 0, rk / rho**2, 0.0)
                * ((k - 1.0) - (k + 1.0) * rk**2)
                / den**2
            )
        if k == 1:
            qp = orient * 2.0 / den
            qpp = orient * (-4.0) * rho / den**2
        return q, qp, qpp
    if model.kind == YANG_MILLS:
        (sgn,) = branch
        den = 1.0 + rho**2
        q = sgn * (1.0 - rho**2) / den
        qp = sgn * (-4.0) * rho / den**2
        qpp = sgn * (-4.0) * (1.0 - 3.0 * rho**2) / den**3
        return q, qp, qpp
    if model.kind == SEMILINEAR_6D:
        (sgn,) = branch
        a = W_CORE
        den = a + rho**2
        q = sgn * rho**2 / den**2
        qp = sgn * 2.0 * rho * (a - rho**2) / den**3
        qpp = sgn * (2.0 * a**2 - 16.0 * a * rho**2 + 6.0 * rho**4) / den**4
        return q, qp, qpp
    raise ModelError(f"no closed-form soliton family for model kind {model.kind!r}")


# ---------------------------------------------------------------------------
# vacuum enumeration
# ---------------------------------------------------------------------------


def _enumerate_vacua(g, g_prime, bracket, n_probe=8192, tol=1e-12):
    """Zeros of g in [bracket[0], bracket[1]] by sign-change bisection.

    Tangential zeros (no sign change, e.g. g = psi**2) are picked up from
    local minima of |g| that refine to machine-level zero.
    """
    lo, hi = bracket
    xs = np.linspace(lo, hi, n_probe)
    vals = g(xs)
    roots = []

    sign = np.sign(vals)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    for i in flips:
        a, b = xs[i], xs[i + 1]
        fa = vals[i]
        for _ in range(200):
            m = 0.5 * (a + b)
            fm = g(np.asarray(m))
            if fa * fm <= 0:
                b = m
            else:
                a, fa = m, fm
            if b - a < tol:
                break
        roots.append(0.5 * (a + b))

    # exact grid zeros and tangential zeros
    scale = max(float(np.max(np.abs(vals))), 1e-300)
    absv = np.abs(vals)
    interior = np.arange(1, n_probe - 1)
    local_min = interior[(absv[interior] <= absv[interior - 1]) & (absv[interior] <= absv[interior + 1])]
    for i in local_min:
        if absv[i] > 1e-4 * scale:
            continue
        a, b = xs[i - 1], xs[i + 1]
        for _ in range(200):
            m1 = a + (b - a) / 3.0
            m2 = b - (b - a) / 3.0
            if abs(g(np.asarray(m1))) < abs(g(np.asarray(m2))):
                b = m2
            else:
                a = m1
            if b - a < tol:
                break
        x0 = 0.5 * (a + b)
        if abs(g(np.asarray(x0))) <= 1e-10 * scale:
            roots.append(x0)

    # Newton polish to machine precision where the slope allows
    polished = []
    for x in roots:
        for _ in range(4):
            gx = float(g(np.asarray(x)))
            gpx = float(g_prime(np.asarray(x)))
            if abs(gpx) < 1e-8:
                break
            x = x - gx / gpx
        polished.append(float(x))
    polished.sort()
    merged: list[float] = []
    gap = (hi - lo) / n_probe
    for r in polished:
        if not merged or r - merged[-1] > gap:
            merged.append(r)
    return merged


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def _adaptive_simpson(fn, a, b, tol=1e-11, depth=48):
    fa, fm, fb = fn(a), fn(0.5 * (a + b)), fn(b)

    def rec(a, b, fa, fm, fb, whole, d):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = fn(lm), fn(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        if d <= 0 or abs(left + right - whole) < 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return rec(a, m, fa, flm, fm, left, d - 1) + rec(m, b, fm, frm, fb, right, d - 1)

    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return rec(a, b, fa, fm, fb, whole, depth)


def _sphere_G(k):
    def G(x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        n = np.floor(ax / math.pi)
        rem = ax - n * math.pi
        return np.sign(x) * k * (2.0 * n + 1.0 - np.cos(rem))

    return G


def _ym_G(x):
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    inner = ax - ax**3 / 3.0
    outer = ax**3 / 3.0 - ax + 4.0 / 3.0
    return np.sign(x) * np.where(ax <= 1.0, inner, outer)


def _semi_g(x):
    x = np.asarray(x, dtype=float)
    return x * np.sqrt(np.maximum(4.0 - 2.0 * np.abs(x) / 3.0, 0.0))


def _semi_g_prime(x):
    x = np.asarray(x, dtype=float)
    u = np.maximum(4.0 - 2.0 * np.abs(x) / 3.0, 1e-300)
    su = np.sqrt(u)
    return np.where(np.abs(x) < 6.0, su - np.abs(x) / (3.0 * su), 0.0)


def _semi_g_second(x):
    # central difference; the profile is C^1 with a |psi| kink in g'' at 0,
    # where the symmetric limit 0 is the sensible report value
    x = np.asarray(x, dtype=float)
    h = 1e-6
    return (_semi_g_prime(x + h) - _semi_g_prime(x - h)) / (2.0 * h)


def _semi_G(x):
    x = np.asarray(x, dtype=float)
    ax = np.minimum(np.abs(x), 6.0)
    u = 4.0 - 2.0 * ax / 3.0
    return np.sign(x) * (-6.0 * u**1.5 + 0.9 * u**2.5 + 19.2)


def make_model(
    kind: str,
    k: int = 1,
    *,
    bracket: tuple[float, float] | None = None,
    custom: Optional[dict] = None,
    name: str | None = None,
) -> ModelSpec:
    """Build a ModelSpec for one of the built-in families or a custom triple.

    ``custom`` supplies vectorized callables g, g_prime, g_second and
    optionally f, f_prime; f defaults to g*g' and is cross-checked against
    it on a probe grid (relative residual 1e-8).
    """
    if kind == SPHERE:
        if k < 1 or int(k) != k:
            raise ModelError("sphere model needs an integer equivariance index k >= 1")
        k = int(k)
        g = lambda x: k * np.sin(np.asarray(x, dtype=float))
        gp = lambda x: k * np.cos(np.asarray(x, dtype=float))
        gpp = lambda x: -k * np.sin(np.asarray(x, dtype=float))
        f = lambda x: k**2 * np.sin(np.asarray(x, dtype=float)) * np.cos(np.asarray(x, dtype=float))
        fp = lambda x: k**2 * np.cos(2.0 * np.asarray(x, dtype=float))
        G = _sphere_G(k)
        br = bracket or (-4.0 * math.pi - 0.5, 4.0 * math.pi + 0.5)
        vac = _enumerate_vacua(g, gp, br)
        spec = ModelSpec(
            kind, k, g, gp, gpp, f, fp, G,
            tuple(vac), tuple(float(gp(np.asarray(v))) for v in vac),
            name=name or f"sphere:k={k}", vacuum_gap=math.pi,
        )
    elif kind == YANG_MILLS:
        g = lambda x: 1.0 - np.asarray(x, dtype=float) ** 2
        gp = lambda x: -2.0 * np.asarray(x, dtype=float)
        gpp = lambda x: np.full_like(np.asarray(x, dtype=float), -2.0)
        f = lambda x: -2.0 * np.asarray(x, dtype=float) * (1.0 - np.asarray(x, dtype=float) ** 2)
        fp = lambda x: -2.0 + 6.0 * np.asarray(x, dtype=float) ** 2
        br = bracket or (-2.5, 2.5)
        vac = _enumerate_vacua(g, gp, br)
        spec = ModelSpec(
            kind, 2, g, gp, gpp, f, fp, _ym_G,
            tuple(vac), tuple(float(gp(np.asarray(v))) for v in vac),
            name=name or "yang-mills", vacuum_gap=2.0,
        )
    elif kind == SEMILINEAR_6D:
        f = lambda x: 4.0 * np.asarray(x, dtype=float) - np.abs(np.asarray(x, dtype=float)) * np.asarray(x, dtype=float)
        fp = lambda x: 4.0 - 2.0 * np.abs(np.asarray(x, dtype=float))
        br = bracket or (-5.9, 5.9)
        br = (max(br[0], -5.9), min(br[1], 5.9))
        vac = _enumerate_vacua(_semi_g, _semi_g_prime, br)
        # the span of the psi-profile (F vanishes at 6) plays the role of the
        # vacuum gap for extraction thresholds
        spec = ModelSpec(
            kind, 2, _semi_g, _semi_g_prime, _semi_g_second, f, fp, _semi_G,
            tuple(vac), tuple(float(_semi_g_prime(np.asarray(v))) for v in vac),
            name=name or "semilinear6d", vacuum_gap=6.0,
        )
    elif kind == CUSTOM:
        if not custom or not all(key in custom for key in ("g", "g_prime", "g_second")):
            raise ModelError("custom model needs callables g, g_prime, g_second")
        g, gp, gpp = custom["g"], custom["g_prime"], custom["g_second"]
        f = custom.get("f") or (lambda x: g(np.asarray(x, dtype=float)) * gp(np.asarray(x, dtype=float)))
        fp = custom.get("f_prime") or (
            lambda x: gp(np.asarray(x, dtype=float)) ** 2
            + g(np.asarray(x, dtype=float)) * gpp(np.asarray(x, dtype=float))
        )
        Gfun = custom.get("G") or (
            lambda x: np.vectorize(
                lambda y: math.copysign(_adaptive_simpson(lambda s: abs(float(g(np.asarray(s)))), 0.0, abs(y)), y)
            )(np.asarray(x, dtype=float))
        )
        br = bracket or (-4.0, 4.0)
        probe = np.linspace(br[0], br[1], 10_001)
        res = np.abs(f(probe) - g(probe) * gp(probe))
        scale = max(float(np.max(np.abs(f(probe)))), 1e-300)
        if float(np.max(res)) > 1e-8 * scale:
            raise ModelError(
                f"custom model inconsistent: max |f - g*g'| = {float(np.max(res)):.3e} "
                f"(relative {float(np.max(res)) / scale:.3e})"
            )
        vac = _enumerate_vacua(g, gp, br)
        gap = float(np.min(np.diff(vac))) if len(vac) >= 2 else float("nan")
        spec = ModelSpec(
            kind, int(custom.get("k", 1)), g, gp, gpp, f, fp, Gfun,
            tuple(vac), tuple(float(gp(np.asarray(v))) for v in vac),
            name=name or "custom", vacuum_gap=gap,
        )
    else:
        raise ModelError(f"unknown model kind {kind!r}")
    return spec


def model_from_string(text: str, custom_loader=None) -> ModelSpec:
    """Parse the CLI model grammar: sphere:k=<int> | yang-mills | semilinear6d | custom:<path>."""
    text = text.strip()
    if text.startswith("sphere"):
        k = 1
        if ":" in text:
            head, _, tail = text.partition(":")
            if not tail.startswith("k="):
                raise ModelError(f"bad sphere spec {text!r}; expected sphere:k=<int>")
            try:
                k = int(tail[2:])
            except ValueError as exc:
                raise ModelError(f"bad equivariance index in {text!r}") from exc
        return make_model(SPHERE, k, name=f"sphere:k={k}")
    if text == YANG_MILLS:
        return make_model(YANG_MILLS)
    if text == SEMILINEAR_6D:
        return make_model(SEMILINEAR_6D)
    if text.startswith("custom:"):
        path = text[len("custom:"):]
        if custom_loader is None:
            raise ModelError("custom model string given but no manifest loader available")
        return custom_loader(path)
    raise ModelError(f"unknown model string {text!r}")


# ---------------------------------------------------------------------------
# soliton constructors and checks
# ---------------------------------------------------------------------------


def soliton_branches(model: ModelSpec, ascending_from: float | None = None):
    """Enumerate valid branch tuples.  With ``ascending_from`` set, only
    branches whose value at infinity equals that vacuum are returned (the
    chain-constraint candidate set used by the extractor)."""
    branches = []
    if model.kind == SPHERE:
        for ell in range(-4, 5):
            for orient in (+1, -1):
                q_inf = ell * math.pi + orient * math.pi
                if ascending_from is None or abs(q_inf - ascending_from) < 1e-9:
                    branches.append((ell, orient))
    elif model.kind == YANG_MILLS:
        for sgn in (+1, -1):
            if ascending_from is None or abs(-sgn - ascending_from) < 1e-9:
                branches.append((sgn,))
    elif model.kind == SEMILINEAR_6D:
        branches = [(+1,), (-1,)]
    else:
        raise ModelError(f"model {model.name!r} has no soliton family")
    return branches


def soliton(model: ModelSpec, branch, scale: float = 1.0) -> SolitonSpec:
    if scale <= 0:
        raise ModelError("soliton scale must be positive")
    branch = tuple(branch) if isinstance(branch, (tuple, list)) else (branch,)
    if branch not in soliton_branches(model):
        raise ModelError(f"invalid soliton branch {branch!r} for model {model.name!r}")
    if model.kind == SPHERE:
        ell, orient = branch
        v0, vinf = ell * math.pi, ell * math.pi + orient * math.pi
        sign = 1 if ell % 2 == 0 else -1  # r Q_r = (-1)^ell g(Q)
    elif model.kind == YANG_MILLS:
        (sgn,) = branch
        v0, vinf = float(sgn), float(-sgn)
        sign = -sgn
    else:  # semilinear6d: psi-profile returns to the same vacuum
        v0, vinf = 0.0, 0.0
        sign = 0
    return SolitonSpec(model, branch, float(scale), v0, vinf, sign)


def soliton_energy(model: ModelSpec, s: SolitonSpec) -> float:
    """Closed-form static energy 2*(G(Q(inf)) - G(Q(0))) for wave-map models."""
    if model.kind == SEMILINEAR_6D:
        raise ModelError("semilinear6d uses the grid energy functional, not the G formula")
    return float(2.0 * abs(model.G(np.asarray(s.value_infinity)) - model.G(np.asarray(s.value_origin))))


def soliton_residuals(s: SolitonSpec, probe) -> tuple[float, float]:
    """Sup-norm residuals of the static equation and the first-order relation.

    ODE: |r^2 (Q'' + Q'/r) - f(Q)|.  First-order: the monotone families
    satisfy r*Q_r = +/- g(Q) with a single global sign; the semilinear6d
    psi-profile satisfies |r*psi_r| = |g(psi)| with a sign that flips at the
    peak, so there the sign is minimized pointwise.
    """
    r = np.asarray(probe, dtype=float)
    if np.any(r <= 0):
        raise ModelError("probe radii must be strictly positive")
    model = s.model
    q = s.evaluate(r)
    qp = s.derivative(r)
    qpp = s.second_derivative(r)
    ode = float(np.max(np.abs(r**2 * (qpp + qp / r) - model.f(q))))
    rqp = r * qp
    gq = model.g(q)
    if model.kind == SEMILINEAR_6D:
        bog = float(np.max(np.minimum(np.abs(rqp - gq), np.abs(rqp + gq))))
    else:
        bog = float(min(np.max(np.abs(rqp - gq)), np.max(np.abs(rqp + gq))))
    return ode, bog


def soliton_energy_quadrature(model: ModelSpec, s: SolitonSpec, n: int = 200_001) -> float:
    """Static energy int (Q_r^2 + g(Q)^2/r^2) r dr by log-substitution
    trapezoid; the integrand decays exponentially in log r both ways."""
    if model.kind == SEMILINEAR_6D:
        raise ModelError("semilinear6d energies live in the grid module")
    srange = np.linspace(math.log(s.scale) - 26.0, math.log(s.scale) + 26.0, n)
    r = np.exp(srange)
    qp = s.derivative(r)
    gq = model.g(s.evaluate(r))
    return float(np.trapezoid(qp**2 * r**2 + gq**2, srange))


def harmonic_virial(model: ModelSpec, s: SolitonSpec, n: int = 200_001) -> tuple[float, float]:
    """Quadrature of int (f'(Q) Q_r^2 + f(Q)^2/r^2) r dr over (0, inf).

    Returns (value, normalizer) with normalizer = int |f'(Q)| Q_r^2 r dr.
    Uses the substitution r = exp(s); the integrand decays exponentially in s
    both ways, so the trapezoid rule converges fast.
    """
    srange = np.linspace(math.log(s.scale) - 26.0, math.log(s.scale) + 26.0, n)
    r = np.exp(srange)
    q = s.evaluate(r)
    qp = s.derivative(r)
    fq = model.f(q)
    fpq = model.f_prime(q)
    # r dr = r^2 ds
    val = np.trapezoid((fpq * qp**2 + (fq / r) ** 2) * r**2, srange)
    norm = np.trapezoid(np.abs(fpq) * qp**2 * r**2, srange)
    return float(val), float(norm)


# ---------------------------------------------------------------------------
# assumption report
# ---------------------------------------------------------------------------


def check_assumptions(model: ModelSpec, bracket: tuple[float, float] = (-8.0, 8.0)) -> dict:
    """Report the vacuum-structure assumptions on g over a finite bracket.

    Checks: growth of the modulus G toward the bracket ends (A1 probe),
    discreteness / multiplicity of the vacuum set (A2), and integer slopes
    |g'(l)| >= 1 with g''(l) = 0 whenever |g'(l)| = 1 ((A3)').
    """
    lo, hi = bracket
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ModelError("assumption bracket must be finite and increasing")
    vac = [v for v in _enumerate_vacua(model.g, model.g_prime, (lo, hi)) ]
    rows = []
    a3_ok = True
    for v in vac:
        gp = float(model.g_prime(np.asarray(v)))
        gpp = float(model.g_second(np.asarray(v)))
        k = abs(gp)
        integer_slope = abs(k - round(k)) < 1e-6 and round(k) >= 1
        flat_ok = (abs(abs(gp) - 1.0) > 1e-6) or (abs(gpp) < 1e-6)
        ok = integer_slope and flat_ok
        a3_ok = a3_ok and ok
        rows.append({"vacuum": v, "g_prime": gp, "g_second": gpp, "a3_ok": ok})

    # (A1) growth probe: G strictly increases from mid-bracket to the ends
    xs = np.array([hi / 2.0, hi])
    xs_neg = np.array([lo / 2.0, lo])
    Gv = model.G(xs)
    Gn = model.G(xs_neg)
    a1_ok = bool(Gv[1] > Gv[0] + 1e-12) and bool(Gn[1] < Gn[0] - 1e-12)

    gaps = np.diff(vac) if len(vac) >= 2 else np.array([])
    a2_ok = len(vac) >= 2 and (gaps.size == 0 or float(np.min(gaps)) > 1e-6)

    return {
        "model": model.name,
        "bracket": [lo, hi],
        "vacua": rows,
        "a1_growth": a1_ok,
        "a2_discrete": a2_ok,
        "min_vacuum_gap": float(np.min(gaps)) if gaps.size else float("nan"),
        "a3_prime": a3_ok,
        "all_ok": a1_ok and a2_ok and a3_ok,
    }
