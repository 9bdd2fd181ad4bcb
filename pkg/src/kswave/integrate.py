"""Adaptive integration of the planar system, in s and in graph form.

Two complementary drivers live here.  `integrate` advances (w, v) in the
wave coordinate s with an embedded Dormand-Prince 5(4) pair, locating
termination events (slope blow-up, equilibrium capture, flux-boundary
arrival, vanishing w, span exhaustion) to root-finding accuracy.  It also
carries I(s) = integral of v ds, from which the signal S is reconstructed
later as S = S0 * exp(I - I0).

`integrate_graph_W` advances the same orbit as a graph W(v), which stays
regular where the s-parametrization degenerates: near the flux boundary
the slope becomes vertical in s, while in the graph form a substitution
v = v_edge -/+ q^m (m = p/(p-1)) makes the equation regular all the way
to the boundary.  `reconstruct_s_from_v` then recovers s and I along a
graph leg by quadrature of ds = gamma/(lam - gamma*v^2 - W) dv.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import (
    AnchorMismatch,
    DenominatorVanished,
    DomainError,
    Inconclusive,
    SignChange,
    StepSizeUnderflow,
)
from .flux import boundary_exponent, make_boundary_factor, make_g
from .phase import Equilibrium, ModelParams, make_rhs
from .phase import equilibria as _phase_equilibria

# termination kinds
V_BLOW_UP_PLUS = "VBlowUpPlus"
V_BLOW_UP_MINUS = "VBlowUpMinus"
CONVERGED = "ConvergedToEquilibrium"
FLUX_BOUNDARY_LOW = "FluxBoundaryLow"
FLUX_BOUNDARY_HIGH = "FluxBoundaryHigh"
W_VANISHED = "WVanished"
MAX_SPAN = "MaxSpan"
BOUNDED = "Bounded"
GRAPH_END = "GraphEnd"

FORWARD = "forward"
BACKWARD = "backward"
BOTH = "both"


@dataclass(frozen=True)
class Controls:
    """Integration tolerances and termination thresholds."""

    rtol: float = 1e-10
    atol: float = 1e-12
    h_max: float = 10.0           # cap on step size
    s_max: float = 1e3            # span bound |s - s0|
    max_steps: int = 1_000_000
    v_max: float = 1e6            # |v| at which the run counts as blown up
    w_min: float = 1e-12          # w level treated as vanished; 0 disables
    eq_tol: float = 1e-9          # equilibrium capture ball, relative
    eq_dwell: float = 5.0         # span to sit in the ball; inf disables
    boundary_eps_rel: float = 1e-9  # flux-boundary standoff, relative to c
    denom_eps: float = 1e-10      # graph-denominator floor


@dataclass(frozen=True)
class EventSpec:
    """Terminal zero-crossing event for `integrate`.

    `fn(s, w, v)` is evaluated at accepted samples; a sign change in the
    requested direction (+1: rising, -1: falling, 0: either) triggers the
    event, which is then located by root finding along the step.
    """

    fn: Callable[[float, float, float], float]
    kind: str
    direction: int = 0


@dataclass(frozen=True)
class TerminationEvent:
    kind: str
    s: float
    w: float
    v: float
    equilibrium_index: int | None = None


@dataclass
class Trajectory:
    """Sampled orbit with s ascending regardless of integration direction.

    `integral` holds I(s) = integral of v ds measured from the run anchor.
    `termination` describes the end the integration reached: the s[-1] end
    for forward runs, the s[0] end for backward runs; merged trajectories
    (direction "both") carry both, with `termination_start` at the s[0]
    end.  `s_minus`/`s_plus` are the profile edges implied by the
    termination (None when a side is undetermined; +-inf for ends that
    extend to infinity).
    """

    s: np.ndarray
    w: np.ndarray
    v: np.ndarray
    integral: np.ndarray
    direction: str
    termination: TerminationEvent | None
    termination_start: TerminationEvent | None = None
    s_minus: float | None = None
    s_plus: float | None = None

    def end_events(self) -> tuple[TerminationEvent | None, TerminationEvent | None]:
        """Events at (s[0] end, s[-1] end)."""
        if self.direction == BACKWARD:
            return self.termination, None
        return self.termination_start, self.termination


# Dormand-Prince 5(4) tableau (FSAL: the 7th stage row equals b)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 10.0


def _dp54_step(f, y, k1, h):
    """One step of size h from state y=(w, v, I) with cached k1 = f(y).

    Returns (y5, k7, err) where y5 is the 5th-order result, k7 = f(y5)
    (FSAL), and err the embedded error estimate per component.
    """
    k = [k1]
    y5 = y
    for i in range(1, 7):
        w, v, ii = y
        for a, kj in zip(_A[i], k):
            if a != 0.0:
                w += h * a * kj[0]
                v += h * a * kj[1]
                ii += h * a * kj[2]
        fw, fv = f(w, v)
        k.append((fw, fv, v))
        if i == 6:
            y5 = (w, v, ii)
    err = tuple(
        h * sum(_E[j] * k[j][c] for j in range(7)) for c in range(3)
    )
    return y5, k[6], err


# w decays and grows over hundreds of orders of magnitude and enters the
# reconstructed density through an exponential of its running integral, so
# its step-error control must stay relative at any magnitude; the floor
# only guards against an exact-zero scale.
_W_ATOL_FLOOR = 1e-290


def _err_norm(err, y, y5, rtol, atol):
    acc = 0.0
    for c in range(3):
        sc = (_W_ATOL_FLOOR if c == 0 else atol) + rtol * max(
            abs(y[c]), abs(y5[c])
        )
        acc += (err[c] / sc) ** 2
    return math.sqrt(acc / 3.0)


def _h_floor(s: float) -> float:
    return 16.0 * np.finfo(float).eps * max(1.0, abs(s))


def _initial_h(f, y, k1, sgn, ctr: Controls) -> float:
    sc = tuple(ctr.atol + ctr.rtol * abs(c) for c in y)
    d0 = math.sqrt(sum((y[c] / sc[c]) ** 2 for c in range(3)) / 3.0)
    d1 = math.sqrt(sum((k1[c] / sc[c]) ** 2 for c in range(3)) / 3.0)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, ctr.h_max, ctr.s_max)
    f1 = None
    for _ in range(80):
        try:
            y1 = tuple(y[c] + sgn * h0 * k1[c] for c in range(3))
            f1 = f(y1[0], y1[1]) + (y1[1],)
            break
        except DomainError:
            h0 *= 0.25
    if f1 is None:
        raise StepSizeUnderflow("cannot take even an initial trial step")
    d2 = (
        math.sqrt(sum(((f1[c] - k1[c]) / sc[c]) ** 2 for c in range(3)) / 3.0) / h0
    )
    dm = max(d1, d2)
    h1 = (0.01 / dm) ** 0.2 if dm > 1e-15 else max(1e-6, h0 * 1e-3)
    return max(min(100.0 * h0, h1, ctr.h_max, ctr.s_max), 1e3 * _h_floor(0.0))


def _crossed(e_prev: float, e_new: float, direction: int) -> bool:
    if direction > 0:
        return e_prev < 0.0 <= e_new
    if direction < 0:
        return e_prev > 0.0 >= e_new
    return (e_prev < 0.0 <= e_new) or (e_prev > 0.0 >= e_new)


def integrate(
    p: ModelParams,
    w0: float,
    v0: float,
    direction: str = FORWARD,
    controls: Controls | None = None,
    s0: float = 0.0,
    extra_events: Sequence[EventSpec] = (),
    eq_list: Sequence[Equilibrium] | None = None,
) -> Trajectory:
    """Advance (w, v) from (w0, v0) at s0 until a termination event.

    `direction` is "forward" (s increasing) or "backward".  `extra_events`
    are checked before the built-in ones and win ties.  `eq_list` lets the
    caller reuse a precomputed equilibrium list across many runs.
    """
    ctr = controls or Controls()
    if direction not in (FORWARD, BACKWARD):
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")
    if w0 < 0.0:
        raise ValueError("w0 must be nonnegative")
    sgn = 1.0 if direction == FORWARD else -1.0
    f = make_rhs(p)

    events: list[EventSpec] = list(extra_events)
    if p.limiter.saturated:
        lo, hi = p.slope_domain
        eps_v = ctr.boundary_eps_rel * p.limiter.c / p.a
        events.append(
            EventSpec(fn=lambda s, w, v: v - (hi - eps_v), kind=FLUX_BOUNDARY_HIGH, direction=+1)
        )
        events.append(
            EventSpec(fn=lambda s, w, v: v - (lo + eps_v), kind=FLUX_BOUNDARY_LOW, direction=-1)
        )
    if ctr.w_min > 0.0 and w0 > ctr.w_min:
        events.append(
            EventSpec(fn=lambda s, w, v: w - ctr.w_min, kind=W_VANISHED, direction=-1)
        )
    events.append(EventSpec(fn=lambda s, w, v: v - ctr.v_max, kind=V_BLOW_UP_PLUS, direction=+1))
    events.append(EventSpec(fn=lambda s, w, v: v + ctr.v_max, kind=V_BLOW_UP_MINUS, direction=-1))

    eqs = list(eq_list) if eq_list is not None else _phase_equilibria(p)
    eq_data = [
        (e.w, e.v, ctr.eq_tol * (1.0 + math.hypot(e.w, e.v))) for e in eqs
    ]

    def eq_ball(w: float, v: float) -> int | None:
        for idx, (we, ve, rad) in enumerate(eq_data):
            if math.hypot(w - we, v - ve) <= rad:
                return idx
        return None

    s = s0
    y = (w0, v0, 0.0)
    k1 = f(w0, v0) + (v0,)
    ss, ws, vs, iis = [s], [w0], [v0], [0.0]
    e_prev = [ev.fn(s, w0, v0) for ev in events]
    dwell_idx = eq_ball(w0, v0)
    dwell_s = s
    target = s0 + sgn * ctr.s_max

    term: TerminationEvent | None = None
    h = _initial_h(f, y, k1, sgn, ctr)
    err_old = 1e-4
    just_rejected = False

    steps = 0
    while True:
        steps += 1
        if steps > ctr.max_steps:
            raise Inconclusive(
                f"step budget {ctr.max_steps} exhausted at s = {s!r} (|v| = {abs(y[1])!r})"
            )
        remaining = abs(target - s)
        if remaining <= _h_floor(s):
            term = TerminationEvent(kind=MAX_SPAN, s=s, w=y[0], v=y[1])
            break
        # Stretch up to 1% so float drift in `remaining` cannot leave a
        # sliver step that lands a duplicate sample on the target.
        landing = 1.01 * h >= remaining
        h_try = remaining if landing else h

        try:
            y5, k7, err_vec = _dp54_step(f, y, k1, sgn * h_try)
        except DomainError:
            h = 0.5 * h_try
            just_rejected = True
            if h < _h_floor(s):
                idx = _near_flux_boundary(p, y[1], ctr)
                if idx is not None:
                    term = TerminationEvent(kind=idx, s=s, w=y[0], v=y[1])
                    break
                raise StepSizeUnderflow(
                    f"step size underflow at s = {s!r}, state ({y[0]!r}, {y[1]!r})"
                )
            continue

        err = _err_norm(err_vec, y, y5, ctr.rtol, ctr.atol)
        if err > 1.0:
            h = h_try * max(_FAC_MIN, _SAFETY * err ** -0.2)
            just_rejected = True
            if h < _h_floor(s):
                raise StepSizeUnderflow(
                    f"step size underflow at s = {s!r}, state ({y[0]!r}, {y[1]!r})"
                )
            continue

        s_new = s + sgn * h_try
        # --- event detection along this accepted step ---
        e_new = [ev.fn(s_new, y5[0], y5[1]) for ev in events]
        best: tuple[float, int] | None = None
        for i, ev in enumerate(events):
            if _crossed(e_prev[i], e_new[i], ev.direction):
                theta = _locate_event(f, y, k1, sgn * h_try, s, events[i], e_new[i])
                if best is None or theta < best[0]:
                    best = (theta, i)
        if best is not None:
            theta, i = best
            if theta >= 1.0:
                y_ev, s_ev = y5, s_new
            else:
                y_ev = _dp54_step(f, y, k1, sgn * h_try * theta)[0]
                s_ev = s + sgn * h_try * theta
            ss.append(s_ev), ws.append(y_ev[0]), vs.append(y_ev[1]), iis.append(y_ev[2])
            term = TerminationEvent(kind=events[i].kind, s=s_ev, w=y_ev[0], v=y_ev[1])
            break

        ss.append(s_new), ws.append(y5[0]), vs.append(y5[1]), iis.append(y5[2])
        s, y, k1, e_prev = s_new, y5, k7, e_new

        # --- equilibrium dwell ---
        idx = eq_ball(y[0], y[1])
        if idx != dwell_idx:
            dwell_idx, dwell_s = idx, s
        elif idx is not None and abs(s - dwell_s) >= ctr.eq_dwell:
            term = TerminationEvent(
                kind=CONVERGED, s=s, w=y[0], v=y[1], equilibrium_index=idx
            )
            break

        if landing:
            term = TerminationEvent(kind=MAX_SPAN, s=s, w=y[0], v=y[1])
            break

        # --- PI step-size controller ---
        if err == 0.0:
            fac = _FAC_MAX
        else:
            fac = _SAFETY * err ** -0.17 * err_old ** 0.04
        fac = min(1.0 if just_rejected else _FAC_MAX, max(_FAC_MIN, fac))
        h = min(h_try * fac, ctr.h_max)
        err_old = max(err, 1e-4)
        just_rejected = False

    if term.kind == MAX_SPAN and _looks_bounded(ws, vs):
        term = replace(term, kind=BOUNDED)

    return _assemble(p, f, ss, ws, vs, iis, direction, term, ctr)


def _near_flux_boundary(p: ModelParams, v: float, ctr: Controls) -> str | None:
    if not p.limiter.saturated:
        return None
    lo, hi = p.slope_domain
    eps_v = ctr.boundary_eps_rel * p.limiter.c / p.a
    if abs(v - lo) <= 1e3 * eps_v:
        return FLUX_BOUNDARY_LOW
    if abs(v - hi) <= 1e3 * eps_v:
        return FLUX_BOUNDARY_HIGH
    return None


def _locate_event(f, y, k1, h_signed, s_base, ev: EventSpec, e_end: float) -> float:
    """Fraction theta in (0, 1] at which ev.fn crosses zero along the step."""
    if e_end == 0.0:
        return 1.0

    def phi(theta: float) -> float:
        if theta <= 0.0:
            return ev.fn(s_base, y[0], y[1])
        if theta >= 1.0:
            return e_end
        try:
            yt = _dp54_step(f, y, k1, h_signed * theta)[0]
        except DomainError:
            return e_end
        return ev.fn(s_base + h_signed * theta, yt[0], yt[1])

    return float(brentq(phi, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps))


def _looks_bounded(ws: list, vs: list) -> bool:
    n = len(ws)
    if n < 8:
        return False
    half = n // 2

    def amp(xs):
        early = max(abs(x) for x in xs[:half])
        late = max(abs(x) for x in xs[half:])
        return late <= 1.05 * max(early, 1e-30)

    return amp(ws) and amp(vs)


def _assemble(p, f, ss, ws, vs, iis, direction, term, ctr) -> Trajectory:
    s = np.asarray(ss)
    w = np.asarray(ws)
    v = np.asarray(vs)
    ii = np.asarray(iis)
    if direction == BACKWARD:
        s, w, v, ii = s[::-1].copy(), w[::-1].copy(), v[::-1].copy(), ii[::-1].copy()
    if len(s) > 1:
        # An event located at the far tip of a step can land within float
        # noise of the accepted sample; keep the later (event) sample so
        # downstream difference quotients never divide by a noise gap.
        keep = np.ones(len(s), dtype=bool)
        keep[:-1] = np.diff(s) > 16.0 * np.finfo(float).eps * np.maximum(1.0, np.abs(s[:-1]))
        if not keep.all():
            s, w, v, ii = s[keep], w[keep], v[keep], ii[keep]

    s_minus = s_plus = None
    edge = None
    if term.kind in (V_BLOW_UP_PLUS, V_BLOW_UP_MINUS):
        # near blow-up v' ~ -v^2, so the asymptote sits at s - 1/v + O(|v|^-3)
        edge = term.s - 1.0 / term.v
    elif term.kind in (CONVERGED, W_VANISHED):
        edge = math.inf if direction == FORWARD else -math.inf
    elif term.kind in (FLUX_BOUNDARY_LOW, FLUX_BOUNDARY_HIGH):
        lo, hi = p.slope_domain
        v_edge = lo if term.kind == FLUX_BOUNDARY_LOW else hi
        try:
            dv = f(term.w, term.v)[1]
        except DomainError:
            dv = 0.0
        edge = term.s + ((v_edge - term.v) / dv if dv != 0.0 else 0.0)
    if edge is not None:
        if direction == FORWARD:
            s_plus = edge
        else:
            s_minus = edge

    return Trajectory(
        s=s,
        w=w,
        v=v,
        integral=ii,
        direction=direction,
        termination=term,
        s_minus=s_minus,
        s_plus=s_plus,
    )


def merge_trajectories(pieces: Sequence[Trajectory], rel_tol: float = 1e-6) -> Trajectory:
    """Chain trajectories whose endpoint states coincide into one.

    Pieces are given in ascending-s order; piece k's last sample must match
    piece k+1's first sample in (w, v) to within rel_tol (AnchorMismatch
    otherwise).  s and I of later pieces are shifted to agree at the seams;
    the merged run inherits its end events and edges from the outer pieces.
    """
    if not pieces:
        raise ValueError("nothing to merge")
    if len(pieces) == 1:
        return pieces[0]
    s = list(pieces[0].s)
    w = list(pieces[0].w)
    v = list(pieces[0].v)
    ii = list(pieces[0].integral)
    last_shift_s = 0.0
    for piece in pieces[1:]:
        dw = abs(piece.w[0] - w[-1])
        dv = abs(piece.v[0] - v[-1])
        if dw > rel_tol * (1.0 + abs(w[-1])) or dv > rel_tol * (1.0 + abs(v[-1])):
            raise AnchorMismatch(
                f"seam mismatch: ({w[-1]!r}, {v[-1]!r}) vs ({piece.w[0]!r}, {piece.v[0]!r})"
            )
        shift_s = s[-1] - piece.s[0]
        shift_i = ii[-1] - piece.integral[0]
        last_shift_s = shift_s
        s.extend(piece.s[1:] + shift_s)
        w.extend(piece.w[1:])
        v.extend(piece.v[1:])
        ii.extend(piece.integral[1:] + shift_i)

    first, last = pieces[0], pieces[-1]
    low_ev = first.end_events()[0]
    high_ev = last.end_events()[1]
    if high_ev is not None:
        high_ev = replace(high_ev, s=high_ev.s + last_shift_s)
    s_plus = last.s_plus
    if s_plus is not None and math.isfinite(s_plus):
        s_plus += last_shift_s
    return Trajectory(
        s=np.asarray(s),
        w=np.asarray(w),
        v=np.asarray(v),
        integral=np.asarray(ii),
        direction=BOTH,
        termination=high_ev,
        termination_start=low_ev,
        s_minus=first.s_minus,
        s_plus=s_plus,
    )


def shift_trajectory(traj: Trajectory, delta: float) -> Trajectory:
    """Translate the wave coordinate by delta (waves are defined only up
    to translation); states are untouched, events and edges move along."""

    def ev(e: TerminationEvent | None) -> TerminationEvent | None:
        return None if e is None else replace(e, s=e.s + delta)

    def edge(x: float | None) -> float | None:
        if x is None or not math.isfinite(x):
            return x
        return x + delta

    return replace(
        traj,
        s=traj.s + delta,
        termination=ev(traj.termination),
        termination_start=ev(traj.termination_start),
        s_minus=edge(traj.s_minus),
        s_plus=edge(traj.s_plus),
    )


# --------------------------------------------------------------------------
# graph form W(v)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryZone:
    """q-parametrization data for a graph leg ending on the flux boundary."""

    v_edge: float   # boundary value of v
    side: int       # +1: upper edge of the slope domain, -1: lower
    m: float        # substitution exponent p/(p-1)


@dataclass
class GraphSolution:
    """Orbit as a graph W(v) along a monotone-v leg, anchor to target.

    Arrays are in path order (from the anchor toward the target).  When
    `boundary` is set, the leg was integrated in the regularized variable
    q with v = v_edge - side * q^m, and `q` holds the matching samples
    (ending at q = 0 on the boundary itself).
    """

    v: np.ndarray
    W: np.ndarray
    mode: str                     # "W" or "Y" (reciprocal) integration
    boundary: BoundaryZone | None = None
    q: np.ndarray | None = None

    def __post_init__(self) -> None:
        x, y = (self.q, self.W) if self.boundary is not None else (self.v, self.W)
        if x[0] > x[-1]:
            self._interp = PchipInterpolator(x[::-1], y[::-1], extrapolate=False)
        else:
            self._interp = PchipInterpolator(x, y, extrapolate=False)

    def W_at(self, v):
        """Interpolated W on the leg (in q near a boundary, else in v)."""
        if self.boundary is None:
            return self._interp(v)
        b = self.boundary
        q = np.maximum(b.side * (b.v_edge - np.asarray(v)), 0.0) ** (1.0 / b.m)
        return self._interp(q)


def integrate_graph_W(
    p: ModelParams,
    v_anchor: float,
    W_anchor: float,
    v_target: float,
    controls: Controls | None = None,
    n_samples: int = 2049,
) -> GraphSolution:
    """Integrate dW/dv = gamma*W*(g(a*v - sigma) - v)/(lam - W - gamma*v^2).

    Monotone-v legs only.  When W_anchor > lam the reciprocal Y = 1/W is
    integrated instead (the denominator then stays one-signed in Y form).
    When v_target is a flux-boundary edge, the whole leg runs in the
    regularized variable q, reaching the boundary exactly at q = 0.
    Raises DenominatorVanished if lam - W - gamma*v^2 approaches zero.
    """
    ctr = controls or Controls()
    if v_target == v_anchor:
        raise ValueError("v_target must differ from v_anchor")
    if not W_anchor > 0.0:
        raise ValueError("W_anchor must be positive")
    lim = p.limiter
    g = make_g(lim)
    a, sigma, gamma, lam = p.a, p.sigma, p.gamma, p.lam
    lo, hi = p.slope_domain
    if not lo < v_anchor < hi:
        raise DomainError(f"v_anchor = {v_anchor!r} outside the slope domain")

    use_y = W_anchor > lam
    boundary: BoundaryZone | None = None
    if lim.saturated:
        eps_v = ctr.boundary_eps_rel * lim.c / a
        if abs(v_target - hi) <= eps_v:
            boundary = BoundaryZone(v_edge=hi, side=+1, m=boundary_exponent(lim))
        elif abs(v_target - lo) <= eps_v:
            boundary = BoundaryZone(v_edge=lo, side=-1, m=boundary_exponent(lim))
    if boundary is None and not (lo < v_target < hi) and lim.saturated:
        raise DomainError(f"v_target = {v_target!r} outside the slope domain")

    denom_floor = ctr.denom_eps * max(
        1.0, lam, gamma * max(v_anchor * v_anchor, v_target * v_target)
    )
    # the guard is signed with the anchor's denominator sign: a pinch shows
    # up as a one-way crossing the solver cannot step over unnoticed
    dsign = math.copysign(1.0, lam - W_anchor - gamma * v_anchor * v_anchor)
    ysign = math.copysign(
        1.0, 1.0 - (1.0 / W_anchor) * (lam - gamma * v_anchor * v_anchor)
    )

    if boundary is None:
        # plain v as the independent variable
        if use_y:

            def rhs_ode(v, y):
                num = gamma * y[0] * y[0] * (g(a * v - sigma) - v)
                den = 1.0 - y[0] * (lam - gamma * v * v)
                return [num / den]

            def den_event(v, y):
                return (1.0 - y[0] * (lam - gamma * v * v)) * ysign - ctr.denom_eps

            y0 = [1.0 / W_anchor]
        else:

            def rhs_ode(v, y):
                den = lam - y[0] - gamma * v * v
                return [gamma * y[0] * (g(a * v - sigma) - v) / den]

            def den_event(v, y):
                return (lam - y[0] - gamma * v * v) * dsign - denom_floor

            y0 = [W_anchor]
        t0, t1 = v_anchor, v_target
    else:
        side, m, v_edge = boundary.side, boundary.m, boundary.v_edge
        factor = make_boundary_factor(lim, a, side)

        def v_of_q(q):
            return v_edge - side * q**m

        def pt(q):
            return factor(q) - q ** (m - 1.0) * v_of_q(q)

        if use_y:

            def rhs_ode(q, y):
                v = v_of_q(q)
                num = -side * m * gamma * y[0] * y[0] * pt(q)
                den = 1.0 - y[0] * (lam - gamma * v * v)
                return [num / den]

            def den_event(q, y):
                v = v_of_q(q)
                return (1.0 - y[0] * (lam - gamma * v * v)) * ysign - ctr.denom_eps

            y0 = [1.0 / W_anchor]
        else:

            def rhs_ode(q, y):
                v = v_of_q(q)
                den = lam - y[0] - gamma * v * v
                return [-side * m * gamma * y[0] * pt(q) / den]

            def den_event(q, y):
                v = v_of_q(q)
                return (lam - y[0] - gamma * v * v) * dsign - denom_floor

            y0 = [W_anchor]
        t0 = (side * (v_edge - v_anchor)) ** (1.0 / m)
        t1 = 0.0

    den_event.terminal = True
    sol = solve_ivp(
        rhs_ode,
        (t0, t1),
        y0,
        method="DOP853",
        rtol=max(ctr.rtol, 1e-13),
        atol=ctr.atol,
        events=[den_event],
        dense_output=True,
    )
    if sol.t_events[0].size > 0:
        t_hit = float(sol.t_events[0][0])
        raise DenominatorVanished(
            f"lam - W - gamma*v^2 reached the floor at independent variable {t_hit!r}"
        )
    if not sol.success:
        raise Inconclusive(f"graph integration failed: {sol.message}")

    ts = np.linspace(t0, t1, n_samples)
    yy = sol.sol(ts)[0]
    W = 1.0 / yy if use_y else yy
    if boundary is None:
        return GraphSolution(v=ts, W=W, mode="Y" if use_y else "W")
    v_samples = boundary.v_edge - boundary.side * ts**boundary.m
    return GraphSolution(
        v=v_samples, W=W, mode="Y" if use_y else "W", boundary=boundary, q=ts
    )


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(7)


def reconstruct_s_from_v(
    p: ModelParams,
    sol: GraphSolution,
    v_start: float | None = None,
    v_end: float | None = None,
    s_start: float = 0.0,
) -> Trajectory:
    """Recover s and I = integral of v ds along a graph leg by quadrature.

    ds = gamma / (lam - W - gamma*v^2) dv is integrated with 7-point
    Gauss-Legendre on each sample interval (in q on boundary legs, where
    the parametrization stays regular).  Raises SignChange if the
    denominator changes sign inside the leg, which would fold s back.
    """
    gamma, lam = p.gamma, p.lam
    b = sol.boundary
    if b is None:
        x = np.asarray(sol.v, dtype=float)

        def v_of_x(xx):
            return xx

        def dv_dx(xx):
            return np.ones_like(xx)

    else:
        x = np.asarray(sol.q, dtype=float)

        def v_of_x(xx):
            return b.v_edge - b.side * xx**b.m

        def dv_dx(xx):
            return -b.side * b.m * xx ** (b.m - 1.0)

    # trim to the requested v-range; integration runs v_start -> v_end
    if v_start is not None or v_end is not None:

        def x_of_v(vq: float) -> float:
            if b is None:
                return float(vq)
            return float(max(b.side * (b.v_edge - vq), 0.0)) ** (1.0 / b.m)

        xa = x_of_v(v_start) if v_start is not None else float(x[0])
        xb = x_of_v(v_end) if v_end is not None else float(x[-1])
        lo_x, hi_x = (xa, xb) if xa <= xb else (xb, xa)
        inner = np.sort(x[(x > lo_x) & (x < hi_x)])
        if xa > xb:
            inner = inner[::-1]
        x = np.concatenate([[xa], inner, [xb]])
        # drop near-duplicate nodes at the splice points
        mask = np.ones(len(x), dtype=bool)
        mask[1:] = np.abs(np.diff(x)) > 1e-15 * (1.0 + np.abs(x[1:]))
        x = x[mask]

    interp = sol._interp
    s_vals = [s_start]
    i_vals = [0.0]
    den_sign = 0.0
    for k in range(len(x) - 1):
        xa, xb = x[k], x[k + 1]
        mid = 0.5 * (xa + xb)
        half = 0.5 * (xb - xa)
        nodes = mid + half * _GL_NODES
        vv = v_of_x(nodes)
        Wv = interp(np.abs(nodes)) if b is not None else interp(nodes)
        den = lam - Wv - gamma * vv * vv
        if den_sign == 0.0:
            den_sign = math.copysign(1.0, den[0])
        if np.any(den * den_sign <= 0.0):
            raise SignChange("lam - W - gamma*v^2 changes sign along the leg")
        ds_dx = gamma / den * dv_dx(nodes)
        s_vals.append(s_vals[-1] + half * float(np.dot(_GL_WEIGHTS, ds_dx)))
        i_vals.append(i_vals[-1] + half * float(np.dot(_GL_WEIGHTS, vv * ds_dx)))

    s = np.asarray(s_vals)
    w_arr = np.asarray(interp(np.abs(x)) if b is not None else interp(x), dtype=float)
    v_arr = np.asarray(v_of_x(x), dtype=float)
    ii = np.asarray(i_vals)

    lo_kind = hi_kind = GRAPH_END
    if b is not None:
        edge_kind = FLUX_BOUNDARY_HIGH if b.side > 0 else FLUX_BOUNDARY_LOW
        if x[-1] == 0.0:
            hi_kind = edge_kind
        if x[0] == 0.0:
            lo_kind = edge_kind

    if s[-1] < s[0]:
        s, w_arr, v_arr, ii = s[::-1].copy(), w_arr[::-1].copy(), v_arr[::-1].copy(), ii[::-1].copy()
        lo_kind, hi_kind = hi_kind, lo_kind

    term_lo = TerminationEvent(kind=lo_kind, s=float(s[0]), w=float(w_arr[0]), v=float(v_arr[0]))
    term_hi = TerminationEvent(kind=hi_kind, s=float(s[-1]), w=float(w_arr[-1]), v=float(v_arr[-1]))
    return Trajectory(
        s=s,
        w=w_arr,
        v=v_arr,
        integral=ii,
        direction=BOTH,
        termination=term_hi,
        termination_start=term_lo,
        s_minus=float(s[0]) if lo_kind != GRAPH_END else None,
        s_plus=float(s[-1]) if hi_kind != GRAPH_END else None,
    )
