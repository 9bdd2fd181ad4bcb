"""Integrator: exact-solution oracles, events, termination taxonomy, graph form."""

from __future__ import annotations

import math

import numpy as np
import pytest

from kswave.errors import AnchorMismatch, DenominatorVanished, Inconclusive
from kswave.flux import LINEAR, RELATIVISTIC, FluxLimiter
from kswave.integrate import (
    BACKWARD,
    BOTH,
    BOUNDED,
    CONVERGED,
    FLUX_BOUNDARY_LOW,
    FORWARD,
    MAX_SPAN,
    V_BLOW_UP_PLUS,
    W_VANISHED,
    Controls,
    EventSpec,
    GraphSolution,
    Trajectory,
    integrate,
    integrate_graph_W,
    merge_trajectories,
    reconstruct_s_from_v,
)
from kswave.phase import ModelParams, equilibria


def lp(a, sigma, gamma=1.0, lam=1.0):
    return ModelParams(a=a, sigma=sigma, gamma=gamma, lam=lam)


# With w identically zero and gamma = lam = 1, the slope equation is the
# Riccati v' = 1 - v^2, whose blowing-up branch is v(s) = coth(s - s_minus).
COTH_P = lp(0.5, 0.3)


class TestCothOracle:
    def test_backward_blowup_and_edge_extrapolation(self):
        v0 = 1.0 / math.tanh(1.0)
        traj = integrate(COTH_P, 0.0, v0, direction=BACKWARD, s0=1.0)
        assert traj.termination.kind == V_BLOW_UP_PLUS
        assert traj.termination.v == pytest.approx(1e6, rel=1e-9)
        # the asymptote sits at s = 0; the extrapolation residue acoth(v) - 1/v
        # is O(v^-3), so the error is the integrator's phase error alone
        assert traj.s_minus == pytest.approx(0.0, abs=1e-9)
        assert traj.s_plus is None
        assert traj.direction == BACKWARD
        # samples ascend in s even though integration ran backward
        assert np.all(np.diff(traj.s) > 0)
        # v(s) = coth(s) on every sample; near the asymptote a phase error
        # delta-s inflates the pointwise relative error by |v| * delta-s
        for s, v in zip(traj.s, traj.v):
            assert v == pytest.approx(1.0 / math.tanh(s), rel=1e-8 + 1e-9 * abs(v))

    def test_integral_of_v_closed_form(self):
        # I(s) = ln sinh(s) - ln sinh(1), measured from the anchor s0 = 1
        v0 = 1.0 / math.tanh(1.0)
        traj = integrate(COTH_P, 0.0, v0, direction=BACKWARD, s0=1.0)
        for s, v, ii in zip(traj.s, traj.v, traj.integral):
            exact = math.log(math.sinh(s)) - math.log(math.sinh(1.0))
            # dI/ds = v, so a phase error delta-s costs |v| * delta-s in I
            assert ii == pytest.approx(exact, rel=1e-8, abs=1e-8 + 1e-9 * abs(v))

    def test_forward_converges_to_axis_equilibrium(self):
        v0 = 1.0 / math.tanh(1.0)
        eqs = equilibria(COTH_P)
        traj = integrate(COTH_P, 0.0, v0, direction=FORWARD, s0=1.0, eq_list=eqs)
        assert traj.termination.kind == CONVERGED
        idx = traj.termination.equilibrium_index
        assert eqs[idx].w == 0.0
        assert eqs[idx].v == pytest.approx(1.0)
        assert traj.s_plus == math.inf
        assert traj.s_minus is None

    def test_custom_event_location(self):
        # start at v = 2 (s0 = 0 means s_minus = -atanh(1/2)); v = 1.2 is hit
        # at s = atanh(1/1.2) - atanh(1/2)
        probe = EventSpec(fn=lambda s, w, v: v - 1.2, kind="Probe", direction=-1)
        traj = integrate(COTH_P, 0.0, 2.0, direction=FORWARD, extra_events=[probe])
        assert traj.termination.kind == "Probe"
        s_exact = math.atanh(1.0 / 1.2) - math.atanh(0.5)
        assert traj.termination.s == pytest.approx(s_exact, abs=1e-9)
        assert traj.termination.v == pytest.approx(1.2, abs=1e-10)
        assert traj.s[-1] == traj.termination.s
        assert traj.v[-1] == traj.termination.v

    def test_tolerance_refinement_stability(self):
        v0 = 1.0 / math.tanh(1.0)
        edges = []
        for rtol in (1e-10, 1e-12):
            traj = integrate(
                COTH_P, 0.0, v0, direction=BACKWARD, s0=1.0,
                controls=Controls(rtol=rtol, atol=1e-14),
            )
            edges.append(traj.s_minus)
        assert abs(edges[0] - edges[1]) <= 1e-10


class TestExponentialW:
    def test_a_equal_one_exact_decay(self):
        # for a = 1 the w-equation is exactly w' = -sigma * w, whatever v does
        p = lp(1.0, 0.8)
        ctr = Controls(s_max=5.0, eq_dwell=math.inf, w_min=0.0)
        traj = integrate(p, 0.5, 0.3, direction=FORWARD, controls=ctr)
        assert traj.termination.kind in (MAX_SPAN, BOUNDED)
        assert traj.s[-1] == pytest.approx(5.0, abs=1e-12)
        for s, w in zip(traj.s, traj.w):
            assert w == pytest.approx(0.5 * math.exp(-0.8 * s), rel=1e-8)
        assert traj.s_minus is None and traj.s_plus is None


class TestTerminationKinds:
    def test_w_vanished(self):
        p = lp(0.5, 1.0)
        ctr = Controls(eq_dwell=math.inf)
        traj = integrate(p, 0.1, 1.3, direction=FORWARD, controls=ctr)
        assert traj.termination.kind == W_VANISHED
        assert traj.termination.w == pytest.approx(1e-12, rel=1e-6)
        assert traj.s_plus == math.inf

    def test_converged_beats_vanishing_when_w_min_disabled(self):
        p = lp(0.5, 1.0)
        eqs = equilibria(p)
        ctr = Controls(w_min=0.0)
        traj = integrate(p, 0.1, 1.3, direction=FORWARD, controls=ctr, eq_list=eqs)
        assert traj.termination.kind == CONVERGED
        e = eqs[traj.termination.equilibrium_index]
        assert (e.w, e.v) == (0.0, pytest.approx(1.0))

    def test_bounded_spiral(self):
        # interior stable focus: the orbit spirals inward, never escaping
        p = lp(2.0, 0.5)
        ctr = Controls(eq_dwell=math.inf, w_min=0.0, s_max=60.0)
        traj = integrate(p, 0.8, 0.45, direction=FORWARD, controls=ctr)
        assert traj.termination.kind == BOUNDED

    def test_flux_boundary_arrival(self):
        p = ModelParams(a=1.0, sigma=0.1, limiter=FluxLimiter(RELATIVISTIC))
        traj = integrate(p, 2.0, 0.5, direction=FORWARD)
        assert traj.termination.kind == FLUX_BOUNDARY_LOW
        lo, hi = p.slope_domain
        eps_v = 1e-9 * p.limiter.c / p.a
        assert traj.termination.v == pytest.approx(lo + eps_v, abs=1e-12)
        assert traj.termination.w > 0.0
        assert traj.s_plus is not None and math.isfinite(traj.s_plus)
        assert traj.s_plus >= traj.s[-1]
        assert np.all(np.diff(traj.v) < 0)  # v runs monotonically to the edge

    def test_step_budget_exhaustion_raises(self):
        with pytest.raises(Inconclusive):
            integrate(COTH_P, 0.0, 2.0, controls=Controls(max_steps=5))

    def test_input_validation(self):
        with pytest.raises(ValueError):
            integrate(COTH_P, -1.0, 0.5)
        with pytest.raises(ValueError):
            integrate(COTH_P, 0.1, 0.5, direction="sideways")


class TestMerge:
    def test_three_way_seam_alignment(self):
        v0 = 1.0 / math.tanh(1.0)
        ctr_b = Controls(s_max=0.5, eq_dwell=math.inf)
        ctr_f = Controls(s_max=2.0, eq_dwell=math.inf)
        back = integrate(COTH_P, 0.0, v0, direction=BACKWARD, s0=1.0, controls=ctr_b)
        fwd = integrate(COTH_P, 0.0, v0, direction=FORWARD, s0=1.0, controls=ctr_f)
        merged = merge_trajectories([back, fwd])
        assert merged.direction == BOTH
        assert len(merged.s) == len(back.s) + len(fwd.s) - 1
        assert np.all(np.diff(merged.s) > 0)
        assert merged.termination.kind in (MAX_SPAN, BOUNDED)
        assert merged.termination_start.kind in (MAX_SPAN, BOUNDED)
        # I is continuous across the seam and matches the closed form globally
        i_span = merged.integral[-1] - merged.integral[0]
        exact = math.log(math.sinh(3.0)) - math.log(math.sinh(0.5))
        assert i_span == pytest.approx(exact, rel=1e-8)

    def test_seam_mismatch_raises(self):
        v0 = 1.0 / math.tanh(1.0)
        ctr = Controls(s_max=0.5, eq_dwell=math.inf)
        back = integrate(COTH_P, 0.0, v0, direction=BACKWARD, s0=1.0, controls=ctr)
        other = integrate(COTH_P, 0.5, v0, direction=FORWARD, s0=1.0, controls=ctr)
        with pytest.raises(AnchorMismatch):
            merge_trajectories([back, other])


class TestGraphForm:
    def test_constant_W_quadrature_oracle(self):
        # W = lam makes lam - W - gamma v^2 = -v^2: s(2) - s(1) = -1/2 and
        # I(2) - I(1) = -ln 2
        p = lp(1.0, 0.5)
        sol = GraphSolution(v=np.linspace(1.0, 2.0, 101), W=np.full(101, 1.0), mode="W")
        traj = reconstruct_s_from_v(p, sol, s_start=0.0)
        assert traj.s[0] == pytest.approx(-0.5, abs=1e-12)
        assert traj.s[-1] == 0.0
        assert traj.v[0] == pytest.approx(2.0)  # flipped to ascending s
        assert traj.integral[0] - traj.integral[-1] == pytest.approx(
            -math.log(2.0), abs=1e-12
        )

    def test_constant_W_subrange(self):
        p = lp(1.0, 0.5)
        sol = GraphSolution(v=np.linspace(1.0, 2.0, 101), W=np.full(101, 1.0), mode="W")
        traj = reconstruct_s_from_v(p, sol, v_start=1.2, v_end=1.8, s_start=0.0)
        assert traj.s[0] == pytest.approx(1.0 / 1.8 - 1.0 / 1.2, abs=1e-12)
        assert max(abs(traj.v[0]), abs(traj.v[-1])) == pytest.approx(1.8)

    def test_graph_matches_s_integration_through_boundary(self):
        # the same saturated leg computed in s and as a graph must agree
        p = ModelParams(a=1.0, sigma=0.1, limiter=FluxLimiter(RELATIVISTIC))
        traj = integrate(p, 2.0, 0.5, direction=FORWARD)
        lo, _ = p.slope_domain
        sol = integrate_graph_W(p, v_anchor=0.5, W_anchor=2.0, v_target=lo)
        assert sol.mode == "Y"  # W_anchor > lam forces the reciprocal form
        assert sol.boundary is not None and sol.boundary.side == -1
        wk = sol.W_at(traj.v)
        rel = np.abs(wk - traj.w) / np.maximum(1.0, np.abs(traj.w))
        assert float(np.nanmax(rel)) <= 1e-6
        # W extends continuously to the boundary itself
        assert math.isfinite(float(sol.W_at(lo)))

    def test_reconstructed_s_matches_trajectory(self):
        p = ModelParams(a=1.0, sigma=0.1, limiter=FluxLimiter(RELATIVISTIC))
        traj = integrate(p, 2.0, 0.5, direction=FORWARD)
        lo, _ = p.slope_domain
        sol = integrate_graph_W(p, v_anchor=0.5, W_anchor=2.0, v_target=lo)
        rec = reconstruct_s_from_v(p, sol, s_start=0.0)
        # compare s at actual trajectory samples mid-leg: the dense rec grid
        # keeps its own interpolation error well under the tolerance
        for k in range(len(traj.s)):
            if not -0.7 < traj.v[k] < 0.3:
                continue
            s_rec = float(np.interp(traj.v[k], rec.v[::-1], rec.s[::-1]))
            assert s_rec == pytest.approx(traj.s[k], abs=1e-6)
        # the boundary end is a finite edge of the leg
        assert rec.termination_start.kind == FLUX_BOUNDARY_LOW or (
            rec.termination.kind == FLUX_BOUNDARY_LOW
        )

    def test_w_mode_below_branch(self):
        p = lp(0.5, 0.3)
        sol = integrate_graph_W(p, v_anchor=0.0, W_anchor=0.3, v_target=0.5)
        assert sol.mode == "W"
        assert sol.boundary is None
        assert math.isfinite(float(sol.W_at(0.25)))

    def test_denominator_vanishing_raises(self):
        # past v = v_star the parabola lam - gamma*v^2 turns negative while
        # W stays positive, so lam - W - gamma*v^2 must pinch to zero
        p = lp(1.0, 0.5)
        with pytest.raises(DenominatorVanished):
            integrate_graph_W(p, v_anchor=0.9, W_anchor=0.05, v_target=1.2)

    def test_anchor_validation(self):
        p = ModelParams(a=1.0, sigma=0.1, limiter=FluxLimiter(RELATIVISTIC))
        from kswave.errors import DomainError

        with pytest.raises(DomainError):
            integrate_graph_W(p, v_anchor=-2.0, W_anchor=1.0, v_target=0.0)
        with pytest.raises(ValueError):
            integrate_graph_W(p, v_anchor=0.5, W_anchor=1.0, v_target=0.5)
        with pytest.raises(ValueError):
            integrate_graph_W(p, v_anchor=0.5, W_anchor=0.0, v_target=0.2)


def test_end_events_orientation():
    v0 = 1.0 / math.tanh(1.0)
    back = integrate(COTH_P, 0.0, v0, direction=BACKWARD, s0=1.0)
    lo_ev, hi_ev = back.end_events()
    assert lo_ev is back.termination and hi_ev is None
    fwd = integrate(COTH_P, 0.0, 2.0, direction=FORWARD, controls=Controls(s_max=1.0, eq_dwell=math.inf))
    lo_ev, hi_ev = fwd.end_events()
    assert lo_ev is None and hi_ev is fwd.termination
