"""Tests for the shooting classifier, threshold search, and critical orbit."""

from __future__ import annotations

import math
from types import SimpleNamespace

import numpy as np
import pytest

from kswave.errors import DegenerateError, NoDichotomy, RegimeViolation, SeedEscaped
from kswave.integrate import (
    BACKWARD,
    CONVERGED,
    FORWARD,
    V_BLOW_UP_MINUS,
    V_BLOW_UP_PLUS,
    Controls,
)
from kswave.phase import ModelParams, equilibria
from kswave import shooting
from kswave.shooting import (
    CONVERGES_TO,
    ENTERS_PARABOLA,
    ESCAPES_ABOVE,
    ESCAPES_BELOW,
    REGIME_BACKWARD,
    REGIME_FORWARD,
    ShotOutcome,
    classify_trajectory,
    find_w0_star,
    threshold_trajectory,
    trace_stable_manifold,
)


def lp(a: float, sigma: float, **kw) -> ModelParams:
    return ModelParams(a=a, sigma=sigma, **kw)


# Fixed parameter sets, one per linear regime case.
P_A = lp(0.5, 0.3)  # interior saddle at positive density
P_B = lp(0.5, 0.75)
P_C = lp(1.0, 0.5)
P_D = lp(2.0, 0.5)
P_E = lp(2.0, 1.5)


@pytest.fixture(scope="module")
def thr_c():
    return find_w0_star(P_C, 2.0)


@pytest.fixture(scope="module")
def thr_a_fwd():
    return find_w0_star(P_A, 2.0)


@pytest.fixture(scope="module")
def thr_a_back():
    return find_w0_star(P_A, -2.0)


class TestClassify:
    def test_sub_critical_enters_parabola(self):
        out = classify_trajectory(P_C, 0.01, 2.0)
        assert out.cls == ENTERS_PARABOLA
        assert out.w0 == 0.01 and out.v0 == 2.0
        # Deciding event sits where the orbit dips just under the parabola.
        term = out.trajectory.termination
        p_val = P_C.lam - P_C.gamma * term.v**2
        assert term.w < p_val
        assert term.w == pytest.approx(p_val, abs=1e-4)

    def test_super_critical_escapes_below(self):
        out = classify_trajectory(P_C, 10.0, 2.0)
        assert out.cls == ESCAPES_BELOW
        assert out.trajectory.termination.v == pytest.approx(
            -P_C.v_star - 1e-4 * (1 + P_C.v_star), abs=1e-9
        )

    def test_no_stop_at_parabola_converges(self):
        out = classify_trajectory(P_C, 0.01, 2.0, stop_at_parabola=False)
        assert out.cls == CONVERGES_TO
        assert out.equilibrium_index is not None
        term = out.trajectory.termination
        assert math.hypot(term.w, term.v - P_C.v_star) < 1e-6

    def test_backward_regime_classes(self):
        out_lo = classify_trajectory(P_A, 0.05, -2.0)
        assert out_lo.cls in (ENTERS_PARABOLA, CONVERGES_TO)
        out_hi = classify_trajectory(P_A, 20.0, -2.0)
        assert out_hi.cls == ESCAPES_ABOVE
        assert out_hi.trajectory.direction == BACKWARD

    def test_regime_violations(self):
        with pytest.raises(RegimeViolation):
            classify_trajectory(P_C, 1.0, 0.5)  # |v0| <= v_star
        with pytest.raises(RegimeViolation):
            classify_trajectory(P_B, 1.0, -2.0)  # backward needs case A
        with pytest.raises(ValueError):
            classify_trajectory(P_C, -1.0, 2.0)  # w0 must be positive

    def test_degenerate_sigma(self):
        p = lp(0.5, 0.5)  # sigma == sigma_star for a = 0.5
        with pytest.raises(DegenerateError):
            classify_trajectory(p, 1.0, 2.0)


class TestManifold:
    def test_stable_manifold_reaches_v0(self):
        man = trace_stable_manifold(P_C, equilibria(P_C)[0], v_stop=2.0)
        assert man.direction == BACKWARD
        assert np.all(np.diff(man.s) > 0)
        term = man.termination
        assert term.v == pytest.approx(2.0, abs=1e-9)
        assert term.w > 0
        # Seed end hugs the saddle.
        assert math.hypot(man.w[-1], man.v[-1] + P_C.v_star) < 1e-6

    def test_unstable_manifold_forward(self):
        saddle = [e for e in equilibria(P_A) if e.w > 0][0]
        man = trace_stable_manifold(P_A, saddle, v_stop=-2.0, manifold="unstable")
        assert man.direction == FORWARD
        assert man.termination.v == pytest.approx(-2.0, abs=1e-9)
        assert math.hypot(man.w[0] - saddle.w, man.v[0] - saddle.v) < 1e-6

    def test_seed_scale_refinement(self, thr_c):
        """Halving-by-ten the seed offset moves the crossing by O(seed**2)."""
        saddle = equilibria(P_C)[0]
        w_coarse = trace_stable_manifold(
            P_C, saddle, v_stop=2.0, seed_scale=1e-6
        ).termination.w
        w_fine = trace_stable_manifold(
            P_C, saddle, v_stop=2.0, seed_scale=1e-7
        ).termination.w
        assert abs(w_coarse - w_fine) < 1e-8 * thr_c.w0_star
        assert abs(w_fine - thr_c.w0_star) < 1e-6 * thr_c.w0_star

    def test_seed_escaped_when_unreachable(self):
        # The stable manifold of (0, -v_star) climbs toward large v; it
        # never reaches v = -5 on either branch.
        with pytest.raises(SeedEscaped):
            trace_stable_manifold(P_C, equilibria(P_C)[0], v_stop=-5.0)

    def test_rejects_non_saddle(self):
        node = [e for e in equilibria(P_C) if e.v > 0][0]
        with pytest.raises(ValueError):
            trace_stable_manifold(P_C, node, v_stop=2.0)
        with pytest.raises(ValueError):
            trace_stable_manifold(P_C, equilibria(P_C)[0], v_stop=2.0, manifold="bogus")


class TestFindThreshold:
    def test_case_c_cross_validated(self, thr_c):
        r = thr_c
        assert r.method == "Both"
        assert r.regime == REGIME_FORWARD
        assert r.saddle == (0.0, -P_C.v_star)
        assert r.classifier_tol <= 2e-10
        assert r.bracket[0] <= r.w0_star <= r.bracket[1]
        assert r.manifold_estimate is not None
        assert abs(r.w0_star - r.manifold_estimate) <= 1e-6 * r.w0_star

    def test_forward_case_a_uses_interior_saddle(self, thr_a_fwd):
        r = thr_a_fwd
        assert r.method == "Both"
        assert r.saddle[0] > 0  # interior saddle, not the axis
        assert abs(r.w0_star - r.manifold_estimate) <= 1e-6 * r.w0_star

    def test_backward_case_a(self, thr_a_back):
        r = thr_a_back
        assert r.regime == REGIME_BACKWARD
        assert r.method == "Both"
        assert r.saddle[0] > 0
        assert abs(r.w0_star - r.manifold_estimate) <= 1e-6 * r.w0_star

    @pytest.mark.parametrize("p", [P_B, P_D, P_E], ids=["B", "D", "E"])
    def test_other_cases_cross_validated(self, p):
        r = find_w0_star(p, 2.0 * p.v_star)
        assert r.method == "Both"
        assert r.saddle == (0.0, -p.v_star)
        assert abs(r.w0_star - r.manifold_estimate) <= 1e-6 * r.w0_star

    def test_sides_classify_correctly(self, thr_c):
        rng = np.random.default_rng(7)
        w0s = thr_c.w0_star * np.exp(rng.uniform(-np.log(50), np.log(50), size=20))
        for w0 in w0s:
            if abs(w0 - thr_c.w0_star) < 1e-8 * thr_c.w0_star:
                continue
            out = classify_trajectory(P_C, float(w0), 2.0)
            if w0 < thr_c.w0_star:
                assert out.cls in (ENTERS_PARABOLA, CONVERGES_TO), w0
            else:
                assert out.cls == ESCAPES_BELOW, w0

    def test_near_threshold_sides(self, thr_c):
        w = thr_c.w0_star
        assert classify_trajectory(P_C, w * (1 - 1e-6), 2.0).cls == ENTERS_PARABOLA
        assert classify_trajectory(P_C, w * (1 + 1e-6), 2.0).cls == ESCAPES_BELOW

    def test_method_variants(self, thr_c):
        rb = find_w0_star(P_C, 2.0, method="bisection")
        assert rb.method == "Bisection" and rb.manifold_estimate is None
        assert abs(rb.w0_star - thr_c.w0_star) <= 1e-9 * thr_c.w0_star
        rm = find_w0_star(P_C, 2.0, method="manifold")
        assert rm.method == "Manifold" and rm.classifier_tol == 0.0
        assert abs(rm.w0_star - thr_c.w0_star) <= 1e-6 * thr_c.w0_star
        with pytest.raises(ValueError):
            find_w0_star(P_C, 2.0, method="newton")

    def test_bracket_hint(self, thr_c):
        w = thr_c.w0_star
        r = find_w0_star(P_C, 2.0, bracket_hint=(0.9 * w, 1.1 * w), method="bisection")
        assert abs(r.w0_star - w) <= 1e-9 * w
        with pytest.raises(ValueError):
            find_w0_star(P_C, 2.0, bracket_hint=(2.0, 1.0))

    def test_no_dichotomy(self, monkeypatch):
        fake_sub = lambda *a, **k: SimpleNamespace(cls=ENTERS_PARABOLA)
        monkeypatch.setattr(shooting, "classify_trajectory", fake_sub)
        with pytest.raises(NoDichotomy):
            find_w0_star(P_C, 2.0, method="bisection")
        fake_super = lambda *a, **k: SimpleNamespace(cls=ESCAPES_BELOW)
        monkeypatch.setattr(shooting, "classify_trajectory", fake_super)
        with pytest.raises(NoDichotomy):
            find_w0_star(P_C, 2.0, method="bisection")

    def test_degenerate_and_regime_errors(self):
        with pytest.raises(DegenerateError):
            find_w0_star(lp(0.5, 0.5), 2.0)
        with pytest.raises(RegimeViolation):
            find_w0_star(P_B, -2.0)  # backward shooting outside case A
        with pytest.raises(RegimeViolation):
            find_w0_star(P_C, 0.3)  # v0 inside the slow strip


class TestThresholdTrajectory:
    def test_forward_merge_shape(self, thr_c):
        traj = threshold_trajectory(P_C, 2.0, result=thr_c)
        assert traj.termination_start.kind == V_BLOW_UP_PLUS
        assert traj.termination.kind == CONVERGED
        assert np.all(np.diff(traj.s) > 0)
        assert np.isfinite(traj.s_minus) and traj.s_plus == math.inf
        assert np.all(traj.w > 0)
        # v decreases monotonically along the critical orbit (tiny dwell
        # wobble near the saddle allowed).
        assert np.all(np.diff(traj.v) < 1e-8)
        # The launch state appears as a seam sample.
        i0 = int(np.argmin(np.abs(traj.s)))
        assert traj.v[i0] == pytest.approx(2.0, abs=1e-12)
        assert traj.w[i0] == pytest.approx(thr_c.w0_star, rel=1e-12)
        # Tail settles onto the saddle.
        assert math.hypot(traj.w[-1], traj.v[-1] + P_C.v_star) < 1e-5

    def test_forward_case_a_tail_at_interior_saddle(self, thr_a_fwd):
        traj = threshold_trajectory(P_A, 2.0, result=thr_a_fwd)
        assert traj.termination.kind == CONVERGED
        sw, sv = thr_a_fwd.saddle
        assert math.hypot(traj.w[-1] - sw, traj.v[-1] - sv) < 1e-5

    def test_backward_merge_shape(self, thr_a_back):
        traj = threshold_trajectory(P_A, -2.0, result=thr_a_back)
        assert traj.termination_start.kind == CONVERGED
        assert traj.termination.kind == V_BLOW_UP_MINUS
        assert traj.s_minus == -math.inf and np.isfinite(traj.s_plus)
        assert np.all(np.diff(traj.s) > 0)
        sw, sv = thr_a_back.saddle
        assert math.hypot(traj.w[0] - sw, traj.v[0] - sv) < 1e-5

    def test_computes_result_when_omitted(self):
        traj = threshold_trajectory(P_C, 2.0)
        assert traj.termination.kind == CONVERGED
