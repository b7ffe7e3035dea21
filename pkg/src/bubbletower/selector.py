"""Time-sequence selection on sampled series.

Given nonnegative g and bounded h whose running averages vanish (toward t = 1
in blow-up mode, toward infinity in global mode), the machinery builds:

1. anchors t_k with geometric gaps and quartering averages of g,
2. the dyadic weight lambda(t) = sum 2^k on [t_k, t_{k+1}),
3. selected times t~_k such that the forward averages of lambda*g + h from
   t~_k are certified small, with the certificate

       sup over admissible tau of (1/tau) int_{t~_k}^{t~_k+tau} (lambda g + h)

   computed by exact trapezoid prefix sums over the sample grid.

All sups range over sample points, and the certifier re-runs the identical
prefix-sum sweep, so certificate checks are exact (not a float tolerance).

Admissible tau ranges: (0, 1 - t~_k) in blow-up mode; (0, t~_k / 4) in global
mode.  t~_k is the maximizer of the backward average from t_k over the upper
half of the anchor gap; the maximizer property converts into the forward
certificate bound exactly as in the continuum argument.

If the anchor-tail averages of lambda*g + h are not all positive, the repair
branch adds the step function f = sum (4 eps_k + 2^-k) chi_[t_k, t_{k+1})
with eps_k the offending average magnitudes, selects times against
lambda*g + h + f, and (since f >= 0) keeps the certificates for the original
series valid.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SelectorError",
    "HypothesisError",
    "SampledSeries",
    "TimeSelection",
    "build_anchors",
    "build_lambda",
    "lambda_values",
    "select_times",
    "certify",
    "selection_to_json",
]

BLOWUP = "blowup"
GLOBAL = "global"


class SelectorError(ValueError):
    pass


class HypothesisError(SelectorError):
    """A decay hypothesis failed on the sampled horizon."""

    def __init__(self, message: str, stuck_average: float = float("nan")):
        super().__init__(message)
        self.stuck_average = stuck_average


@dataclass(frozen=True)
class SampledSeries:
    times: np.ndarray
    values: np.ndarray
    mode: str = BLOWUP

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 8:
            raise SelectorError("series needs matching 1-d arrays with >= 8 samples")
        if np.any(np.diff(t) <= 0):
            raise SelectorError("sample times must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise SelectorError("series values must be finite")
        if self.mode == BLOWUP and (t[0] <= 0.0 or t[-1] >= 1.0):
            raise SelectorError("blow-up mode series must live in (0, 1)")
        if self.mode == GLOBAL and t[0] <= 0.0:
            raise SelectorError("global mode series must live in (0, inf)")
        if self.mode not in (BLOWUP, GLOBAL):
            raise SelectorError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


@dataclass
class TimeSelection:
    mode: str
    anchor_indices: list[int]
    anchor_times: list[float]
    lambda_breaks: list[tuple[float, float]]  # (t_k, 2^k)
    tilde_indices: list[int]
    tilde_times: list[float]
    certificates: list[float]
    case2_engaged: bool = False
    epsilons: list[float] = field(default_factory=list)
    tol_sel: float = 1e-3
    ok: bool = True
    norm_g: float = 1.0
    norm_h: float = 1.0


def _prefix_trapezoid(t: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = np.empty(t.size)
    out[0] = 0.0
    np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(t), out=out[1:])
    return out


# ---------------------------------------------------------------------------
# anchors
# ---------------------------------------------------------------------------


def build_anchors(g: SampledSeries, max_anchors: int = 64) -> list[int]:
    """Greedy anchor scan (first admissible sample at every step).

    Blow-up mode: 1 - t_{k+1} <= (1 - t_k)/4 and the tail average of g from
    t_{k+1} at most a quarter of the one from t_k.  Global mode:
    t_{k+1} > 2 t_k with the window average over [t_k, t_{k+1}] at most a
    quarter of the previous window's.
    """
    if float(np.min(g.values)) < -1e-12 * max(1.0, float(np.max(np.abs(g.values)))):
        raise SelectorError("g must be nonnegative")
    t, v = g.times, np.maximum(g.values, 0.0)
    P = _prefix_trapezoid(t, v)
    scale = max(float(np.max(v)), 1e-300)
    slack = 1e-13 * scale

    anchors: list[int] = []
    if g.mode == BLOWUP:
        tail_avg = (P[-1] - P) / (1.0 - t)
        k = 0
        anchors.append(k)
        while len(anchors) < max_anchors:
            gap_ok = np.nonzero(1.0 - t <= (1.0 - t[k]) / 4.0)[0]
            gap_ok = gap_ok[gap_ok > k]
            if gap_ok.size == 0:
                break
            target = tail_avg[k] / 4.0 + slack
            good = gap_ok[tail_avg[gap_ok] <= target]
            if good.size == 0:
                raise HypothesisError(
                    "tail averages of g do not quarter within the sampled horizon",
                    stuck_average=float(np.min(tail_avg[gap_ok])),
                )
            k = int(good[0])
            anchors.append(k)
        return anchors

    # global mode
    positive = np.nonzero(P > slack)[0]
    k = int(positive[0]) if positive.size else 0
    k = max(k, 1)
    anchors.append(k)
    prev_avg = P[k] / (t[k] - t[0]) if t[k] > t[0] else 0.0
    while len(anchors) < max_anchors:
        gap_ok = np.nonzero(t > 2.0 * t[k])[0]
        if gap_ok.size == 0:
            break
        window_avg = (P[gap_ok] - P[k]) / (t[gap_ok] - t[k])
        target = prev_avg / 4.0 + slack
        good = gap_ok[window_avg <= target]
        if good.size == 0:
            raise HypothesisError(
                "window averages of g do not quarter within the sampled horizon",
                stuck_average=float(np.min(window_avg)),
            )
        j = int(good[0])
        prev_avg = (P[j] - P[k]) / (t[j] - t[k])
        k = j
        anchors.append(k)
    return anchors


def build_lambda(anchor_times) -> list[tuple[float, float]]:
    """Step spec [(t_k, 2^k)]; lambda = 2 below the first anchor."""
    if len(anchor_times) == 0:
        raise SelectorError("need at least one anchor")
    return [(float(tk), float(2.0 ** (k + 1))) for k, tk in enumerate(anchor_times)]


def lambda_values(breaks, t: np.ndarray) -> np.ndarray:
    """Evaluate the step weight at sample times (constant 2 before t_1)."""
    t = np.asarray(t, dtype=float)
    edges = np.asarray([b[0] for b in breaks])
    vals = np.asarray([b[1] for b in breaks])
    idx = np.searchsorted(edges, t, side="right") - 1
    out = np.where(idx >= 0, vals[np.clip(idx, 0, vals.size - 1)], vals[0])
    return out


# ---------------------------------------------------------------------------
# selection
# ---------------------------------------------------------------------------


def _certificate(P: np.ndarray, t: np.ndarray, i_tilde: int, mode: str, series_vals: np.ndarray) -> float:
    """sup over sampled tau in the admissible range of the forward average."""
    if mode == BLOWUP:
        hi = t.size - 1
    else:
        limit = t[i_tilde] + t[i_tilde] / 4.0
        hi = int(np.searchsorted(t, limit, side="right") - 1)
    if hi <= i_tilde:
        # degenerate range: one sample gap / limiting value at tau -> 0
        return float(series_vals[i_tilde])
    js = np.arange(i_tilde + 1, hi + 1)
    avgs = (P[js] - P[i_tilde]) / (t[js] - t[i_tilde])
    return float(np.max(avgs))


def _check_h_hypothesis(h: SampledSeries, anchors: list[int]) -> None:
    t, v = h.times, h.values
    P = _prefix_trapezoid(t, v)
    scale = max(float(np.max(np.abs(v))), 1e-300)
    if h.mode == BLOWUP:
        avg = np.abs((P[-1] - P[np.asarray(anchors)]) / (1.0 - t[np.asarray(anchors)]))
    else:
        avg = np.abs(P[np.asarray(anchors)] / t[np.asarray(anchors)])
    first, last = float(avg[0]), float(avg[-1])
    if last > max(0.05 * scale, 0.5 * first):
        raise HypothesisError(
            "running averages of h do not vanish along the anchors",
            stuck_average=last / scale,
        )


def select_times(g: SampledSeries, h: SampledSeries, mode: str | None = None, tol_sel: float = 1e-3) -> TimeSelection:
    """Run the full pipeline: anchors, weight, selected times, certificates.

    Series are normalized by their sup before selection; certificates are
    reported on the normalized combination lambda*g + h.
    """
    mode = mode or g.mode
    if g.mode != mode or h.mode != mode:
        raise SelectorError("series modes disagree")
    if not np.array_equal(g.times, h.times):
        raise SelectorError("g and h must share their sample grid")

    norm_g = max(float(np.max(np.abs(g.values))), 1e-300)
    norm_h = max(float(np.max(np.abs(h.values))), 1e-300)
    gn = SampledSeries(g.times, g.values / norm_g, mode)
    hn = SampledSeries(h.times, h.values / norm_h, mode)

    anchors = build_anchors(gn)
    if len(anchors) < 3:
        raise SelectorError(f"only {len(anchors)} anchors available; need at least 3")
    _check_h_hypothesis(hn, anchors)

    t = gn.times
    anchor_times = [float(t[i]) for i in anchors]
    breaks = build_lambda(anchor_times)
    lam = lambda_values(breaks, t)
    gh = lam * np.maximum(gn.values, 0.0) + hn.values
    P = _prefix_trapezoid(t, gh)

    # tail / window averages of the combination at the anchors decide the case
    eps = []
    case2 = False
    for k, i in enumerate(anchors):
        if mode == BLOWUP:
            S = (P[-1] - P[i]) / (1.0 - t[i])
        else:
            j = anchors[k + 1] if k + 1 < len(anchors) else t.size - 1
            S = (P[j] - P[i]) / (t[j] - t[i])
        eps.append(abs(float(S)))
        if S <= 0:
            case2 = True

    if case2:
        repair = np.zeros_like(t)
        for k, i in enumerate(anchors):
            j = anchors[k + 1] if k + 1 < len(anchors) else t.size
            repair[i:j] = 4.0 * eps[k] + 2.0 ** (-(k + 1))
        work = gh + repair
        Pw = _prefix_trapezoid(t, work)
    else:
        work = gh
        Pw = P

    tilde_idx: list[int] = []
    certs: list[float] = []
    for k, i in enumerate(anchors):
        if mode == BLOWUP:
            lo_time = (t[i] + 1.0) / 2.0
            lo = int(np.searchsorted(t, lo_time, side="left"))
            hi = t.size - 1
        else:
            nxt = anchors[k + 1] if k + 1 < len(anchors) else t.size - 1
            lo_time = 0.5 * (t[i] + t[nxt])
            lo = int(np.searchsorted(t, lo_time, side="left"))
            hi = nxt
        lo = max(lo, i + 1)
        if lo > hi:
            lo = hi = max(i + 1, hi)
        js = np.arange(lo, hi + 1)
        if js.size == 0:
            js = np.asarray([t.size - 1])
        avgs = (Pw[js] - Pw[i]) / (t[js] - t[i])
        j_star = int(js[int(np.argmax(avgs))])
        tilde_idx.append(j_star)
        certs.append(_certificate(P, t, j_star, mode, gh))

    tail = certs[-max(1, len(certs) // 3):]
    ok = max(tail) <= tol_sel

    return TimeSelection(
        mode=mode,
        anchor_indices=[int(i) for i in anchors],
        anchor_times=anchor_times,
        lambda_breaks=breaks,
        tilde_indices=tilde_idx,
        tilde_times=[float(t[i]) for i in tilde_idx],
        certificates=certs,
        case2_engaged=case2,
        epsilons=eps,
        tol_sel=tol_sel,
        ok=bool(ok),
        norm_g=norm_g,
        norm_h=norm_h,
    )


def certify(selection: TimeSelection, g: SampledSeries, h: SampledSeries) -> dict:
    """Independent dense-sweep recomputation of every certificate.

    Shares the exact prefix-sum arithmetic with select_times, so the reported
    discrepancy is zero unless the selection was tampered with.
    """
    t = g.times
    lam = lambda_values(selection.lambda_breaks, t)
    gh = lam * np.maximum(g.values / selection.norm_g, 0.0) + h.values / selection.norm_h
    P = _prefix_trapezoid(t, gh)
    recomputed = []
    for i in selection.tilde_indices:
        recomputed.append(_certificate(P, t, int(i), selection.mode, gh))
    stored = np.asarray(selection.certificates)
    rec = np.asarray(recomputed)
    disc = float(np.max(np.abs(stored - rec))) if rec.size else 0.0
    return {
        "recomputed": recomputed,
        "max_discrepancy": disc,
        "matches": bool(disc == 0.0),
    }


def selection_to_json(selection: TimeSelection) -> str:
    payload = {
        "mode": selection.mode,
        "anchors": selection.anchor_times,
        "lambda_breaks": [[a, b] for a, b in selection.lambda_breaks],
        "t_tilde": selection.tilde_times,
        "certificates": selection.certificates,
        "case2_engaged": selection.case2_engaged,
        "epsilons": selection.epsilons,
        "tol_sel": selection.tol_sel,
        "ok": selection.ok,
        "normalization": {"g": selection.norm_g, "h": selection.norm_h},
    }
    return json.dumps(payload, indent=2, sort_keys=True)
