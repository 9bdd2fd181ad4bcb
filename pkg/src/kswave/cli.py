"""Command-line frontend: configuration ingestion and result serialization.

Subcommands
-----------
* ``equilibria`` - rest points of the planar system with labels and spectra.
* ``portrait``   - integrate a grid of seed points; one CSV per orbit plus
  an index JSON annotated with the regime case.
* ``shoot``      - locate the critical launch density for a launch slope.
* ``profile``    - build one wave profile (u, S): taxonomy waves by launch
  point, or a saturated front when ``--branch`` is given.
* ``sweep``      - tabulate regime case, threshold, and profile types over
  a parameter grid, optionally spot-checking the classifier with random
  launches.

Configuration comes from a JSON file (``--config``) overridden by flags;
flags win.  Outputs are JSON (sorted keys) and CSV (full round-trip float
repr), so identical configuration and seed produce identical bytes.

Exit codes: 0 success; 2 configuration error (bad flags or values,
degenerate parameter point, empty grid); 3 numerical failure during a
computation.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .errors import DegenerateError, KswaveError, StepSizeUnderflow
from .flux import LARSON, LINEAR, RELATIVISTIC
from .integrate import (
    Controls,
    Trajectory,
    integrate_graph_W,
    merge_trajectories,
    reconstruct_s_from_v,
)
from .phase import ModelParams, equilibria, params_from_config, regime_case
from .profiles import (
    WaveProfile,
    classify_profile,
    endpoint_slopes,
    farfield_coefficients,
    predicted_types,
    reconstruct,
    saturated_front,
    wave_trajectory,
)
from .shooting import (
    ThresholdResult,
    _is_subcritical,
    _regime_for,
    classify_trajectory,
    find_w0_star,
    threshold_trajectory,
)

# Fraction of the profile maximum under which an end counts as vacuum,
# making the zero-density far-field continuation applicable there.
_VACUUM_FRACTION = 0.05


class ConfigError(ValueError):
    """Bad flag/config values; reported with exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    """Validated inputs of one CLI invocation."""

    command: str  # subcommand name
    params: ModelParams  # model parameters
    controls: Controls  # integration tolerances
    out: Path | None  # output directory (None: print only)
    seed: int  # RNG seed for randomized sweeps
    options: dict  # command-specific options, already merged


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _json_bytes(obj) -> bytes:
    return (json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n").encode()


def _csv_bytes(header: list[str], columns: list[np.ndarray]) -> bytes:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(repr(float(x)) for x in row))
    return ("\n".join(lines) + "\n").encode()


def _write(path: Path, data: bytes) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc


# --------------------------------------------------------------------------
# argument parsing and config assembly
# --------------------------------------------------------------------------


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}") from exc


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    grp = common.add_argument_group("model and run options")
    grp.add_argument("--config", help="JSON config file; flags override its keys")
    grp.add_argument("--out", help="output directory for emitted files")
    grp.add_argument("--rtol", type=float, help="relative integration tolerance")
    grp.add_argument("--atol", type=float, help="absolute integration tolerance")
    grp.add_argument("--a", type=float, help="sensitivity exponent a")
    grp.add_argument("--sigma", type=float, help="wave speed sigma")
    grp.add_argument("--gamma", type=float, help="signal diffusivity gamma")
    grp.add_argument("--lambda", dest="lam", type=float, help="signal decay rate lambda")
    grp.add_argument(
        "--limiter",
        choices=[LINEAR, RELATIVISTIC, LARSON],
        help="flux limiter kind",
    )
    grp.add_argument("--mu", type=float, help="flux mobility mu")
    grp.add_argument("--c", type=float, help="flux saturation bound c")
    grp.add_argument("--p", type=float, help="flux saturation exponent p (larson)")
    grp.add_argument("--seed", type=int, help="RNG seed for randomized checks")

    parser = argparse.ArgumentParser(
        prog="kswave",
        description="Traveling-wave solver for log-sensitivity chemotaxis models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("equilibria", parents=[common], help="list rest points with labels")

    por = sub.add_parser("portrait", parents=[common], help="integrate a grid of seeds")
    por.add_argument("--w-grid", type=_float_list, help="comma-separated launch densities")
    por.add_argument("--v-grid", type=_float_list, help="comma-separated launch slopes")

    sho = sub.add_parser("shoot", parents=[common], help="locate the critical launch density")
    sho.add_argument("--v0", type=float, help="launch slope")
    sho.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"),
                     help="initial density bracket hint")
    sho.add_argument("--method", choices=["bisection", "manifold", "both"],
                     help="threshold location method (default both)")

    pro = sub.add_parser("profile", parents=[common], help="build one wave profile")
    pro.add_argument("--w0", type=float, help="launch density ratio u0/S0")
    pro.add_argument("--v0", type=float, help="launch slope")
    pro.add_argument("--s0", type=float, help="anchor coordinate (default 0)")
    pro.add_argument("--S0", type=float, help="signal normalization at s0 (default 1)")
    pro.add_argument("--u0", type=float, help="optional density at s0; must equal w0*S0")
    pro.add_argument("--w0-star", dest="w0_star", type=float,
                     help="precomputed critical density (skips the threshold solve)")
    pro.add_argument("--branch", choices=["above", "below"],
                     help="build a saturated front on this branch instead")

    swe = sub.add_parser("sweep", parents=[common], help="tabulate a parameter grid")
    swe.add_argument("--a-values", type=_float_list, help="comma-separated a values")
    swe.add_argument("--sigma-factors", type=_float_list,
                     help="sigma as multiples of the case-splitting speed")
    swe.add_argument("--v0-factor", type=float,
                     help="launch slope as a multiple of the wave speed bound (default 2)")
    swe.add_argument("--check-samples", type=int,
                     help="random classifier checks per grid point (default 0)")
    swe.add_argument("--workers", type=int, help="worker processes (default 1)")
    return parser


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return cfg


def _merged(args: argparse.Namespace, cfg: dict, key: str, default=None, attr=None):
    val = getattr(args, attr if attr is not None else key, None)
    if val is None:
        val = cfg.get(key, default)
    return val


def _model_dict(args: argparse.Namespace, cfg: dict, require_point: bool = True) -> dict:
    d: dict = {}
    for key, attr in (("a", "a"), ("sigma", "sigma"), ("gamma", "gamma"), ("lambda", "lam")):
        val = _merged(args, cfg, key, attr=attr)
        if val is not None:
            d[key] = val
    lim = cfg.get("limiter")
    lim_cfg: dict = dict(lim) if isinstance(lim, dict) else {}
    if isinstance(lim, str):
        lim_cfg = {"kind": lim}
    for key, attr in (("kind", "limiter"), ("mu", "mu"), ("c", "c"), ("p", "p")):
        val = getattr(args, attr, None)
        if val is None:
            val = cfg.get(key) if key != "kind" else None
        if val is not None:
            lim_cfg[key] = val
    if lim_cfg:
        d["limiter"] = lim_cfg
    if require_point:
        if "a" not in d or "sigma" not in d:
            raise ConfigError("the model needs --a and --sigma (flags or config keys)")
    else:
        # Sweeps take a and sigma from the grid; the base model only
        # contributes gamma, lambda, and the limiter.
        d.setdefault("a", 1.0)
        d.setdefault("sigma", 1.0)
    return d


def _build_config(args: argparse.Namespace) -> RunConfig:
    cfg = _load_config_file(args.config)
    try:
        params = params_from_config(
            _model_dict(args, cfg, require_point=args.command != "sweep")
        )
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"invalid model parameters: {exc}") from exc

    controls = Controls()
    extra = cfg.get("controls", {})
    if not isinstance(extra, dict):
        raise ConfigError("config key 'controls' must be an object")
    try:
        controls = replace(controls, **extra)
    except TypeError as exc:
        raise ConfigError(f"unknown controls key: {exc}") from exc
    rtol = _merged(args, cfg, "rtol")
    atol = _merged(args, cfg, "atol")
    if rtol is not None:
        controls = replace(controls, rtol=float(rtol))
    if atol is not None:
        controls = replace(controls, atol=float(atol))
    if controls.rtol <= 0.0 or controls.atol < 0.0:
        raise ConfigError("tolerances must satisfy rtol > 0 and atol >= 0")

    out = _merged(args, cfg, "out")
    seed = int(_merged(args, cfg, "seed", default=0) or 0)
    if seed < 0:
        raise ConfigError("--seed must be non-negative")

    builder = _OPTION_BUILDERS[args.command]
    try:
        options = builder(args, cfg, params)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(
        command=args.command,
        params=params,
        controls=controls,
        out=None if out is None else Path(out),
        seed=seed,
        options=options,
    )


def _require_nondegenerate(params: ModelParams) -> None:
    try:
        regime_case(params)
    except DegenerateError as exc:
        raise ConfigError(
            f"threshold commands need sigma away from the case-splitting "
            f"value: {exc}"
        ) from exc


def _require_outside_wave_speeds(params: ModelParams, v0: float) -> None:
    if abs(v0) <= params.v_star:
        raise ConfigError(
            f"launch slope v0 = {v0!r} must satisfy |v0| > {params.v_star!r}"
        )


def _options_equilibria(args, cfg, params) -> dict:
    return {}


def _options_portrait(args, cfg, params) -> dict:
    w_grid = _merged(args, cfg, "w_grid")
    v_grid = _merged(args, cfg, "v_grid")
    if not w_grid or not v_grid:
        raise ConfigError("portrait needs non-empty --w-grid and --v-grid")
    w_grid = [float(x) for x in w_grid]
    v_grid = [float(x) for x in v_grid]
    if any(w <= 0.0 for w in w_grid):
        raise ConfigError("--w-grid entries must be positive densities")
    return {"w_grid": w_grid, "v_grid": v_grid}


def _options_shoot(args, cfg, params) -> dict:
    _require_nondegenerate(params)
    v0 = _merged(args, cfg, "v0")
    if v0 is None:
        raise ConfigError("shoot needs --v0")
    v0 = float(v0)
    _require_outside_wave_speeds(params, v0)
    bracket = _merged(args, cfg, "bracket")
    if bracket is not None:
        bracket = tuple(float(b) for b in bracket)
        if len(bracket) != 2 or not 0.0 < bracket[0] < bracket[1]:
            raise ConfigError("--bracket needs 0 < LO < HI")
    method = str(_merged(args, cfg, "method", default="both"))
    if method not in ("bisection", "manifold", "both"):
        raise ConfigError(f"unknown method {method!r}")
    return {"v0": v0, "bracket": bracket, "method": method}


def _options_profile(args, cfg, params) -> dict:
    w0 = _merged(args, cfg, "w0")
    v0 = _merged(args, cfg, "v0")
    if w0 is None or v0 is None:
        raise ConfigError("profile needs --w0 and --v0")
    w0, v0 = float(w0), float(v0)
    if w0 <= 0.0:
        raise ConfigError("--w0 must be positive")
    s0 = float(_merged(args, cfg, "s0", default=0.0))
    S0 = float(_merged(args, cfg, "S0", default=1.0))
    if S0 <= 0.0:
        raise ConfigError("--S0 must be positive")
    u0 = _merged(args, cfg, "u0")
    branch = _merged(args, cfg, "branch")
    if branch is not None:
        branch = str(branch)
        if branch not in ("above", "below"):
            raise ConfigError("--branch must be above or below")
        if u0 is not None:
            raise ConfigError("--u0 is not meaningful for saturated fronts")
        # Constraints decidable from the parameters alone are config errors;
        # violations discovered while tracing the front exit 3 instead.
        if not params.limiter.saturated:
            raise ConfigError("saturated fronts need a saturating --limiter")
        lo, hi = params.slope_domain
        if not lo < v0 < hi:
            raise ConfigError(
                f"front anchor slope v0 = {v0!r} outside the admissible "
                f"range ({lo!r}, {hi!r})"
            )
        if branch == "above" and not w0 > params.lam:
            raise ConfigError(
                f"above-branch fronts need --w0 > lambda = {params.lam!r}"
            )
        if branch == "below":
            if not (lo > -params.v_star and hi < params.v_star):
                raise ConfigError(
                    f"below-branch fronts need the slope range ({lo!r}, {hi!r}) "
                    f"strictly inside (-{params.v_star!r}, {params.v_star!r})"
                )
            if not w0 < params.lam - params.gamma * v0 * v0:
                raise ConfigError(
                    "below-branch fronts need --w0 under the balance parabola "
                    f"({params.lam - params.gamma * v0 * v0!r} at v0 = {v0!r})"
                )
    else:
        _require_nondegenerate(params)
        _require_outside_wave_speeds(params, v0)
    w0_star = _merged(args, cfg, "w0_star")
    return {
        "w0": w0,
        "v0": v0,
        "s0": s0,
        "S0": S0,
        "u0": None if u0 is None else float(u0),
        "branch": branch,
        "w0_star": None if w0_star is None else float(w0_star),
    }


def _options_sweep(args, cfg, params) -> dict:
    a_values = _merged(args, cfg, "a_values")
    sigma_factors = _merged(args, cfg, "sigma_factors")
    if not a_values or not sigma_factors:
        raise ConfigError("sweep needs non-empty --a-values and --sigma-factors")
    a_values = [float(x) for x in a_values]
    sigma_factors = [float(x) for x in sigma_factors]
    if any(a <= 0.0 for a in a_values):
        raise ConfigError("--a-values must be positive")
    if any(f <= 0.0 for f in sigma_factors):
        raise ConfigError("--sigma-factors must be positive")
    if any(abs(f - 1.0) <= 1e-9 for f in sigma_factors):
        raise ConfigError(
            "--sigma-factors must stay away from 1.0: sigma equal to the "
            "case-splitting value is degenerate for threshold work"
        )
    v0_factor = float(_merged(args, cfg, "v0_factor", default=2.0))
    if v0_factor <= 1.0:
        raise ConfigError("--v0-factor must exceed 1 (launch outside the wave speeds)")
    check_samples = int(_merged(args, cfg, "check_samples", default=0) or 0)
    if check_samples < 0:
        raise ConfigError("--check-samples must be non-negative")
    workers = int(_merged(args, cfg, "workers", default=1) or 1)
    if workers < 1:
        raise ConfigError("--workers must be at least 1")
    return {
        "a_values": a_values,
        "sigma_factors": sigma_factors,
        "v0_factor": v0_factor,
        "check_samples": check_samples,
        "workers": workers,
    }


_OPTION_BUILDERS = {
    "equilibria": _options_equilibria,
    "portrait": _options_portrait,
    "shoot": _options_shoot,
    "profile": _options_profile,
    "sweep": _options_sweep,
}


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_equilibria(cfg: RunConfig) -> int:
    records = [asdict(eq) for eq in equilibria(cfg.params)]
    report = {"params": cfg.params.to_dict(), "equilibria": records}
    data = _json_bytes(report)
    sys.stdout.write(data.decode())
    if cfg.out is not None:
        _write(cfg.out / "equilibria.json", data)
    return 0


def _graph_fallback(p: ModelParams, w0: float, v0: float, ctr: Controls) -> Trajectory:
    """Re-run a seed that underflowed in s as a graph W(v) orbit."""
    lo, hi = p.slope_domain
    pieces = []
    for target in (hi, lo):
        sol = integrate_graph_W(p, v0, w0, target, controls=ctr)
        pieces.append(reconstruct_s_from_v(p, sol))
    pieces.sort(key=lambda t: float(t.s[0]))
    return merge_trajectories(pieces)


def cmd_portrait(cfg: RunConfig) -> int:
    p, ctr = cfg.params, cfg.controls
    eqs = equilibria(p)
    try:
        case = regime_case(p)
    except DegenerateError:
        case = "Degenerate"
    seeds = list(itertools.product(cfg.options["w_grid"], cfg.options["v_grid"]))
    records = []
    outdir = (cfg.out or Path(".")) / "portrait"
    for i, (w0, v0) in enumerate(seeds):
        try:
            traj = wave_trajectory(p, w0, v0, controls=ctr, eq_list=eqs)
        except StepSizeUnderflow:
            if not p.limiter.saturated:
                raise
            traj = _graph_fallback(p, w0, v0, ctr)
        name = f"seed_{i:03d}.csv"
        _write(
            outdir / name,
            _csv_bytes(["s", "w", "v", "I"], [traj.s, traj.w, traj.v, traj.integral]),
        )
        low_ev, high_ev = traj.end_events()
        records.append(
            {
                "file": name,
                "w0": w0,
                "v0": v0,
                "terminations": {
                    "backward": None if low_ev is None else low_ev.kind,
                    "forward": None if high_ev is None else high_ev.kind,
                },
                "s_minus": traj.s_minus,
                "s_plus": traj.s_plus,
            }
        )
    index = {"params": p.to_dict(), "case": case, "seeds": records}
    _write(outdir / "index.json", _json_bytes(index))
    sys.stdout.write(f"portrait: {len(records)} orbits in {outdir} (case {case})\n")
    return 0


def cmd_shoot(cfg: RunConfig) -> int:
    opt = cfg.options
    result = find_w0_star(
        cfg.params,
        opt["v0"],
        bracket_hint=opt["bracket"],
        method=opt["method"],
        controls=cfg.controls,
    )
    report = {"params": cfg.params.to_dict(), **asdict(result)}
    data = _json_bytes(report)
    sys.stdout.write(data.decode())
    if cfg.out is not None:
        _write(cfg.out / "threshold.json", data)
    return 0


def _continuations(p: ModelParams, prof: WaveProfile) -> dict:
    """Far-field coefficients beyond the sampled tail, per infinite end.

    Only an infinite end where the density has vanished admits the
    zero-density continuation; past a finite sharp edge the signal
    continues as identically zero (a slope jump, not a smooth solution),
    so no coefficients are reported there.
    """
    out = {"at_s_minus": None, "at_s_plus": None}
    u_max = float(np.max(prof.u))
    ends = (
        ("at_s_minus", prof.s_minus, 0),
        ("at_s_plus", prof.s_plus, -1),
    )
    for key, edge, idx in ends:
        if edge is None or math.isfinite(edge):
            continue
        if float(prof.u[idx]) <= _VACUUM_FRACTION * u_max:
            out[key] = farfield_coefficients(
                p,
                float(prof.S[idx]),
                float(prof.S[idx] * prof.v[idx]),
                float(prof.s[idx]),
            )
    return out


def cmd_profile(cfg: RunConfig) -> int:
    p, ctr, opt = cfg.params, cfg.controls, cfg.options
    w0, v0 = opt["w0"], opt["v0"]
    if opt["branch"] is not None:
        prof = saturated_front(
            p, v0, w0, branch=opt["branch"], s0=opt["s0"], S0=opt["S0"], controls=ctr
        )
        w0_star = None
        types = (prof.u_type, prof.S_type)
        slopes = None  # the density does not vanish at a flux boundary
    else:
        if opt["w0_star"] is not None:
            thr = ThresholdResult(
                v0=v0,
                w0_star=opt["w0_star"],
                method="supplied",
                bracket=(opt["w0_star"], opt["w0_star"]),
                classifier_tol=0.0,
                manifold_estimate=None,
                regime=_regime_for(p, v0),
                saddle=None,
            )
        else:
            thr = find_w0_star(p, v0, controls=ctr)
        w0_star = thr.w0_star
        critical = abs(w0 - w0_star) <= 1e-9 * w0_star
        if critical:
            traj = threshold_trajectory(p, v0, result=thr, controls=ctr)
        else:
            traj = wave_trajectory(p, w0, v0, controls=ctr, eq_list=equilibria(p))
        prof = reconstruct(p, traj, s0=opt["s0"], S0=opt["S0"], u0=opt["u0"])
        types = classify_profile(prof, p, w0_star)
        prof.u_type, prof.S_type = types
        try:
            slopes = endpoint_slopes(prof, p)
        except (ValueError, KswaveError):
            slopes = None
    prof.endpoint_slopes = slopes

    meta = {
        "params": p.to_dict(),
        "anchors": prof.anchors,
        "w0_star": w0_star,
        "s_minus": prof.s_minus,
        "s_plus": prof.s_plus,
        "u_type": types[0],
        "S_type": types[1],
        "end_limits": prof.end_limits,
        "endpoint_slopes": slopes,
        "continuation_coefficients": _continuations(p, prof),
    }
    outdir = cfg.out or Path(".")
    _write(outdir / "profile.csv", _csv_bytes(["s", "u", "S"], [prof.s, prof.u, prof.S]))
    _write(outdir / "profile_meta.json", _json_bytes(meta))
    def _edge(x) -> str:
        return "None" if x is None else repr(float(x))

    sys.stdout.write(
        f"profile: types ({types[0]}, {types[1]}), "
        f"edges ({_edge(prof.s_minus)}, {_edge(prof.s_plus)}), "
        f"{len(prof.s)} samples in {outdir}\n"
    )
    return 0


def _sweep_point(job: dict) -> dict:
    p = params_from_config(job["model"])
    ctr = Controls(rtol=job["rtol"], atol=job["atol"])
    row: dict = {"a": p.a, "sigma": p.sigma}
    try:
        row["case"] = regime_case(p)
    except DegenerateError:
        row["case"] = "Degenerate"
    v0 = job["v0_factor"] * p.v_star
    row["v0"] = v0
    try:
        thr = find_w0_star(p, v0, controls=ctr)
    except KswaveError as exc:
        row.update(w0_star=None, method=None, types=None,
                   error=f"{type(exc).__name__}: {exc}")
        return row
    row.update(w0_star=thr.w0_star, method=thr.method, error=None)

    def types_for(w0: float):
        try:
            return list(predicted_types(p, v0, w0, thr.w0_star))
        except KswaveError:
            return None

    row["types"] = {
        "super": types_for(2.0 * thr.w0_star),
        "critical": types_for(thr.w0_star),
        "sub": types_for(0.5 * thr.w0_star),
    }

    n = job["check_samples"]
    if n > 0:
        rng = np.random.default_rng(job["seed"] * 100003 + job["index"])
        correct = 0
        for _ in range(n):
            w0 = thr.w0_star * math.exp(rng.uniform(-math.log(4.0), math.log(4.0)))
            while abs(w0 - thr.w0_star) <= 1e-8 * thr.w0_star:
                w0 = thr.w0_star * math.exp(rng.uniform(-math.log(4.0), math.log(4.0)))
            try:
                shot = classify_trajectory(p, w0, v0, controls=ctr)
                ok = _is_subcritical(shot.cls) == (w0 < thr.w0_star)
            except KswaveError:
                ok = False
            correct += int(ok)
        row["checks"] = {"n": n, "correct": correct}
    return row


def cmd_sweep(cfg: RunConfig) -> int:
    p, opt = cfg.params, cfg.options
    jobs = []
    base = cfg.params.to_dict()
    for i, (a, f) in enumerate(
        itertools.product(opt["a_values"], opt["sigma_factors"])
    ):
        probe = replace(p, a=a, sigma=p.sigma)  # sigma placeholder; replaced next
        # sigma_star collapses to 0 at a = 1; fall back to the wave speed
        # bound so the factor grid still spans distinct regimes there.
        ref = probe.sigma_star if probe.sigma_star > 0.0 else probe.v_star
        model = dict(base, a=a, sigma=f * ref)
        jobs.append(
            {
                "model": model,
                "v0_factor": opt["v0_factor"],
                "check_samples": opt["check_samples"],
                "seed": cfg.seed,
                "index": i,
                "rtol": cfg.controls.rtol,
                "atol": cfg.controls.atol,
            }
        )
    if opt["workers"] == 1:
        rows = [_sweep_point(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=opt["workers"]) as pool:
            rows = list(pool.map(_sweep_point, jobs))

    report = {
        "seed": cfg.seed,
        "v0_factor": opt["v0_factor"],
        "points": rows,
    }
    data = _json_bytes(report)
    if cfg.out is not None:
        _write(cfg.out / "sweep.json", data)
    for row in rows:
        w0s = row.get("w0_star")
        types = row.get("types") or {}
        sys.stdout.write(
            f"a={row['a']:g} sigma={row['sigma']:.6g} case={row['case']} "
            f"w0_star={'-' if w0s is None else format(w0s, '.12g')} "
            f"types_sub={types.get('sub')}\n"
        )
    return 0


_DISPATCH = {
    "equilibria": cmd_equilibria,
    "portrait": cmd_portrait,
    "shoot": cmd_shoot,
    "profile": cmd_profile,
    "sweep": cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags and 0 on --help; keep its verdict.
        return int(exc.code or 0)
    try:
        cfg = _build_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return _DISPATCH[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (KswaveError, FloatingPointError) as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
