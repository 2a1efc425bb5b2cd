"""Scenario layer: JSON configuration, initial-curve generators, experiment
presets and file output.

A scenario is one run of one scheme on one metric from one initial curve.
Configurations are plain JSON; parsing validates every cross-field
constraint and reports violations with the offending field path.  Output is
plot-tool-neutral CSV plus a metadata JSON that round-trips back into an
equivalent configuration.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .assembly import NewtonConfig, SchemeState, assemble_initial_Q
from .curve import (
    Axis,
    BoundaryKind,
    Clamped,
    Dirichlet,
    Navier,
    PolygonalCurve,
    SlideX1,
    SlideX2,
)
from .errors import ConfigError, GeneratorError
from .flow import Adaptive, RunResult, RunStatus, Scheme, Snapshot, Uniform, run
from .lift import lift_for_metric
from .metrics import (
    Angenent,
    Catenoid,
    ConformalMetric,
    Cone,
    Disk,
    Mercator,
    PhaseField,
    PowerLaw,
    Quartic,
    QuarticAsym,
    Torus,
)
from .quadrature import MassLumped, default_gauss

__all__ = [
    "ScenarioConfig",
    "parse_config",
    "config_to_dict",
    "build_metric",
    "generate_initial",
    "initial_state",
    "run_scenario",
    "preset_config",
    "PRESETS",
]


# -- configuration ------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario description; every field is JSON-representable."""

    scheme: str                      # "A" | "Cstar" | "Q"
    metric: dict
    initial: dict
    quadrature: str = "lumped"       # "lumped" | "gauss"
    J: int = 256
    step: dict = field(default_factory=lambda: {"kind": "uniform", "dt": 1e-4})
    t_end: float = 0.5
    snapshot_times: tuple = ()
    boundary: dict | None = None
    check_assumptions: bool = True
    seed: int = 0
    steady_tol: float = 1e-7
    newton: dict = field(default_factory=lambda: {"tol": 1e-10, "max_iter": 20})
    output_dir: str = "out"


_TOP_FIELDS = {
    "scheme", "metric", "initial", "quadrature", "J", "step", "t_end",
    "snapshot_times", "boundary", "check_assumptions", "seed", "steady_tol",
    "newton", "output_dir",
}


def _fail(path: str, msg: str):
    raise ConfigError(f"{path}: {msg}")


def _need(d: dict, key: str, path: str):
    if key not in d:
        _fail(f"{path}.{key}" if path else key, "missing required field")
    return d[key]


def _as_float(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(path, f"expected a number, got {v!r}")
    return float(v)


def _as_int(v, path: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(path, f"expected an integer, got {v!r}")
    return int(v)


def _as_point(v, path: str):
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        _fail(path, f"expected a 2-vector, got {v!r}")
    return [_as_float(v[0], path + "[0]"), _as_float(v[1], path + "[1]")]


def build_metric(spec: dict, path: str = "metric") -> ConformalMetric:
    if not isinstance(spec, dict):
        _fail(path, "expected an object with a 'family' field")
    family = _need(spec, "family", path)
    try:
        if family == "powerlaw":
            return PowerLaw(mu=_as_float(_need(spec, "mu", path), path + ".mu"))
        if family == "disk":
            return Disk(alpha=_as_float(_need(spec, "alpha", path), path + ".alpha"))
        if family == "mercator":
            return Mercator()
        if family == "catenoid":
            return Catenoid()
        if family == "torus":
            return Torus(s=_as_float(_need(spec, "s", path), path + ".s"))
        if family == "angenent":
            return Angenent(n=_as_int(_need(spec, "n", path), path + ".n"))
        if family == "cone":
            return Cone(b=_as_float(_need(spec, "b", path), path + ".b"))
        if family == "phasefield":
            return PhaseField(psi=_build_potential(_need(spec, "potential", path),
                                                   path + ".potential"))
    except ConfigError:
        raise
    except ValueError as exc:
        _fail(path, str(exc))
    _fail(path + ".family", f"unknown metric family {family!r}")


def _build_potential(spec: dict, path: str):
    kind = _need(spec, "kind", path)
    try:
        if kind == "quartic":
            return Quartic(
                s12=_as_float(_need(spec, "s12", path), path + ".s12"),
                s13=_as_float(_need(spec, "s13", path), path + ".s13"),
                s23=_as_float(_need(spec, "s23", path), path + ".s23"),
                s123=_as_float(spec.get("s123", 0.0), path + ".s123"),
            )
        if kind == "quartic_asym":
            return QuarticAsym(
                s12=_as_float(_need(spec, "s12", path), path + ".s12"),
                s13=_as_float(_need(spec, "s13", path), path + ".s13"),
                s23=_as_float(_need(spec, "s23", path), path + ".s23"),
                sh123=_as_float(spec.get("sh123", 0.0), path + ".sh123"),
                sh231=_as_float(spec.get("sh231", 0.0), path + ".sh231"),
                sh312=_as_float(spec.get("sh312", 0.0), path + ".sh312"),
            )
    except ConfigError:
        raise
    except ValueError as exc:
        _fail(path, str(exc))
    _fail(path + ".kind", f"unknown potential kind {kind!r}")


_BC_KINDS = {"axis", "dirichlet", "clamped", "navier", "slide_x1", "slide_x2"}


def _build_bc(spec: dict, path: str) -> BoundaryKind:
    kind = _need(spec, "kind", path)
    if kind not in _BC_KINDS:
        _fail(path + ".kind", f"unknown boundary kind {kind!r}")
    if kind == "axis":
        return Axis()
    if kind == "dirichlet":
        return Dirichlet()
    if kind == "navier":
        return Navier()
    if kind == "slide_x1":
        return SlideX1()
    if kind == "slide_x2":
        return SlideX2()
    if "zeta" in spec:
        z = _as_point(spec["zeta"], path + ".zeta")
    elif "angle_deg" in spec:
        a = math.radians(_as_float(spec["angle_deg"], path + ".angle_deg"))
        z = [math.cos(a), math.sin(a)]
    else:
        _fail(path, "clamped boundary needs 'zeta' or 'angle_deg'")
    try:
        return Clamped(zeta=(z[0], z[1]))
    except ValueError as exc:
        _fail(path + ".zeta", str(exc))


def parse_config(source) -> ScenarioConfig:
    """Parse and validate a configuration (JSON text, dict, or file path)."""
    if isinstance(source, (str, bytes)):
        try:
            raw = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
    elif isinstance(source, dict):
        raw = source
    else:
        raise ConfigError(f"unsupported config source {type(source).__name__}")
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object")
    unknown = set(raw) - _TOP_FIELDS
    if unknown:
        _fail(sorted(unknown)[0], "unknown field")

    scheme = _need(raw, "scheme", "")
    if scheme not in ("A", "Cstar", "Q"):
        _fail("scheme", f"must be one of A, Cstar, Q; got {scheme!r}")
    metric_spec = _canon(_need(raw, "metric", ""))
    m = build_metric(metric_spec)
    initial = _canon(_need(raw, "initial", ""))
    if not isinstance(initial, dict) or "kind" not in initial:
        _fail("initial", "expected an object with a 'kind' field")

    quadrature = raw.get("quadrature", "gauss" if scheme == "Q" else "lumped")
    if quadrature not in ("lumped", "gauss"):
        _fail("quadrature", f"must be 'lumped' or 'gauss'; got {quadrature!r}")
    J = _as_int(raw.get("J", 256), "J")
    if J < 3:
        _fail("J", "needs at least 3 elements")
    step = _canon(raw.get("step", {"kind": "uniform", "dt": 1e-4}))
    _build_policy(step)  # validate
    t_end = _as_float(raw.get("t_end", 0.5), "t_end")
    if t_end <= 0.0:
        _fail("t_end", "must be positive")
    snaps = raw.get("snapshot_times", [])
    if not isinstance(snaps, (list, tuple)):
        _fail("snapshot_times", "expected a list of times")
    snapshot_times = tuple(
        _as_float(s, f"snapshot_times[{i}]") for i, s in enumerate(snaps)
    )
    boundary = raw.get("boundary")
    bcs = None
    if boundary is not None:
        boundary = _canon(boundary)
        if set(boundary) != {"start", "end"}:
            _fail("boundary", "needs exactly the fields 'start' and 'end'")
        bcs = (
            _build_bc(boundary["start"], "boundary.start"),
            _build_bc(boundary["end"], "boundary.end"),
        )
    check = raw.get("check_assumptions", True)
    if not isinstance(check, bool):
        _fail("check_assumptions", "expected a boolean")
    seed = _as_int(raw.get("seed", 0), "seed")
    steady_tol = _as_float(raw.get("steady_tol", 1e-7), "steady_tol")
    if steady_tol <= 0.0:
        _fail("steady_tol", "must be positive")
    newton = _canon(raw.get("newton", {"tol": 1e-10, "max_iter": 20}))
    try:
        NewtonConfig(tol=_as_float(_need(newton, "tol", "newton"), "newton.tol"),
                     max_iter=_as_int(_need(newton, "max_iter", "newton"),
                                      "newton.max_iter"))
    except ValueError as exc:
        _fail("newton", str(exc))
    output_dir = raw.get("output_dir", "out")
    if not isinstance(output_dir, str):
        _fail("output_dir", "expected a string")

    cfg = ScenarioConfig(
        scheme=scheme,
        metric=metric_spec,
        initial=initial,
        quadrature=quadrature,
        J=J,
        step=step,
        t_end=t_end,
        snapshot_times=snapshot_times,
        boundary=boundary,
        check_assumptions=check,
        seed=seed,
        steady_tol=steady_tol,
        newton=newton,
        output_dir=output_dir,
    )
    _cross_validate(cfg, m, bcs)
    return cfg


def _canon(v):
    """Deep-copy JSON data with tuples normalised to lists."""
    if isinstance(v, dict):
        return {k: _canon(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_canon(x) for x in v]
    return v


def _build_policy(step: dict):
    kind = _need(step, "kind", "step")
    try:
        if kind == "uniform":
            return Uniform(dt=_as_float(_need(step, "dt", "step"), "step.dt"))
        if kind == "adaptive":
            return Adaptive(
                dt_min=_as_float(_need(step, "dt_min", "step"), "step.dt_min"),
                dt_max=_as_float(_need(step, "dt_max", "step"), "step.dt_max"),
                growth=_as_float(step.get("growth", 1.1), "step.growth"),
            )
    except ConfigError:
        raise
    except ValueError as exc:
        _fail("step", str(exc))
    _fail("step.kind", f"unknown step policy {kind!r}")


def _cross_validate(cfg: ScenarioConfig, m: ConformalMetric, bcs):
    if cfg.scheme == "Cstar" and not m.split_supported:
        _fail("scheme", "Cstar requires a convexity splitting, which this "
                        "metric family does not provide")
    if bcs is not None and any(isinstance(b, Axis) for b in bcs):
        if not m.axis_supported:
            _fail("boundary", "degenerate-axis endpoints are not supported "
                              "by this metric family")
        if cfg.scheme == "Q" and cfg.quadrature != "gauss":
            _fail("quadrature", "scheme Q with axis endpoints requires the "
                                "gauss rule (the weight vanishes on the axis)")
    if cfg.scheme in ("A", "Cstar") and cfg.quadrature != "lumped":
        _fail("quadrature", f"scheme {cfg.scheme} is mass-lumped")
    # the generator spec is validated by constructing it once at small J
    curve = generate_initial(cfg.initial, max(4, min(cfg.J, 16)), bcs, cfg.seed, m)
    del curve


def config_to_dict(cfg: ScenarioConfig) -> dict:
    return {
        "scheme": cfg.scheme,
        "metric": _canon(cfg.metric),
        "initial": _canon(cfg.initial),
        "quadrature": cfg.quadrature,
        "J": cfg.J,
        "step": _canon(cfg.step),
        "t_end": cfg.t_end,
        "snapshot_times": list(cfg.snapshot_times),
        "boundary": _canon(cfg.boundary) if cfg.boundary is not None else None,
        "check_assumptions": cfg.check_assumptions,
        "seed": cfg.seed,
        "steady_tol": cfg.steady_tol,
        "newton": _canon(cfg.newton),
        "output_dir": cfg.output_dir,
    }


# -- initial-curve generators -------------------------------------------------


def _resample_closed(points: np.ndarray, J: int) -> np.ndarray:
    """Resample a dense closed polyline to J nodes, uniform in arclength."""
    d = np.diff(np.vstack([points, points[:1]]), axis=0)
    seg = np.linalg.norm(d, axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    targets = total * np.arange(J) / J
    ext = np.vstack([points, points[:1]])
    out = np.empty((J, 2))
    for c in range(2):
        out[:, c] = np.interp(targets, s, ext[:, c])
    return out


def _resample_open(points: np.ndarray, J: int) -> np.ndarray:
    d = np.diff(points, axis=0)
    seg = np.linalg.norm(d, axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    targets = s[-1] * np.arange(J + 1) / J
    out = np.empty((J + 1, 2))
    for c in range(2):
        out[:, c] = np.interp(targets, s, points[:, c])
    return out


def _ensure_ccw(nodes: np.ndarray) -> np.ndarray:
    x, y = nodes[:, 0], nodes[:, 1]
    area2 = np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    return nodes[::-1].copy() if area2 < 0.0 else nodes


def _gen_nodes(spec: dict, J: int, closed: bool, seed: int) -> np.ndarray:
    kind = spec.get("kind")
    if kind == "circle":
        c = np.asarray(spec.get("center", [0.0, 0.0]), dtype=float)
        r = float(spec.get("radius", 1.0))
        wind = int(spec.get("winding", 1))
        if not closed:
            raise GeneratorError("circle generates closed curves only")
        if r <= 0.0 or wind < 1:
            raise GeneratorError("circle needs radius > 0 and winding >= 1")
        th = 2.0 * np.pi * wind * np.arange(J) / J
        return np.stack([c[0] + r * np.cos(th), c[1] + r * np.sin(th)], axis=1)
    if kind == "semicircle":
        r = float(spec.get("radius", 1.0))
        if closed:
            raise GeneratorError("semicircle generates open curves only")
        if r <= 0.0:
            raise GeneratorError("semicircle needs radius > 0")
        phi = np.pi * np.arange(J + 1) / J
        return np.stack([r * np.sin(phi), r * np.cos(phi)], axis=1)
    if kind == "segment":
        p0 = np.asarray(spec["p0"], dtype=float)
        p1 = np.asarray(spec["p1"], dtype=float)
        if closed:
            raise GeneratorError("segment generates open curves only")
        lam = np.arange(J + 1)[:, None] / J
        return (1.0 - lam) * p0[None, :] + lam * p1[None, :]
    if kind == "arc":
        c = np.asarray(spec.get("center", [0.0, 0.0]), dtype=float)
        r = float(spec["radius"])
        a0 = math.radians(float(spec["angle0_deg"]))
        a1 = math.radians(float(spec["angle1_deg"]))
        if closed:
            raise GeneratorError("arc generates open curves only")
        phi = a0 + (a1 - a0) * np.arange(J + 1) / J
        return np.stack([c[0] + r * np.cos(phi), c[1] + r * np.sin(phi)], axis=1)
    if kind == "cigar":
        if not closed:
            raise GeneratorError("cigar generates closed curves only")
        length = float(spec.get("length", 2.0))
        width = float(spec.get("width", 1.0))
        if not 0.0 < width <= length:
            raise GeneratorError("cigar needs 0 < width <= length")
        c = np.asarray(spec.get("center", [0.0, 0.0]), dtype=float)
        ang = math.radians(float(spec.get("angle_deg", 0.0)))
        a = 0.5 * (length - width)
        r = 0.5 * width
        dense = []
        t = np.linspace(-0.5 * np.pi, 0.5 * np.pi, 200)
        dense.append(np.stack([a + r * np.cos(t), r * np.sin(t)], axis=1))
        dense.append(np.stack([np.linspace(a, -a, 200), np.full(200, r)], axis=1))
        t = np.linspace(0.5 * np.pi, 1.5 * np.pi, 200)
        dense.append(np.stack([-a + r * np.cos(t), r * np.sin(t)], axis=1))
        dense.append(np.stack([np.linspace(-a, a, 200), np.full(200, -r)], axis=1))
        pts = np.vstack(dense)
        R = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]])
        return _resample_closed(pts @ R.T + c, J)
    if kind == "hermite":
        if closed:
            raise GeneratorError("hermite generates open curves only")
        p0 = np.asarray(spec["p0"], dtype=float)
        p1 = np.asarray(spec["p1"], dtype=float)
        a0 = math.radians(float(spec["angle0_deg"]))
        a1 = math.radians(float(spec["angle1_deg"]))
        scale = float(spec.get("scale", np.linalg.norm(p1 - p0)))
        m0 = scale * np.array([math.cos(a0), math.sin(a0)])
        m1 = scale * np.array([math.cos(a1), math.sin(a1)])
        t = np.linspace(0.0, 1.0, 400)[:, None]
        dense = ((2 * t ** 3 - 3 * t ** 2 + 1) * p0[None, :]
                 + (t ** 3 - 2 * t ** 2 + t) * m0[None, :]
                 + (-2 * t ** 3 + 3 * t ** 2) * p1[None, :]
                 + (t ** 3 - t ** 2) * m1[None, :])
        return _resample_open(dense, J)
    if kind == "polyline":
        pts = np.asarray(spec["points"], dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise GeneratorError("polyline needs an (N, 2) point list")
        return _resample_closed(pts, J) if closed else _resample_open(pts, J)
    if kind == "epicycle":
        if not closed:
            raise GeneratorError("epicycle generates closed curves only")
        c = np.asarray(spec.get("center", [0.0, 0.0]), dtype=float)
        R = float(spec.get("radius", 1.0))
        a = float(spec.get("amplitude", 0.3))
        mlobe = int(spec.get("lobes", 8))
        th = 2.0 * np.pi * np.arange(4096) / 4096
        dense = np.stack(
            [c[0] + R * np.cos(th) + a * np.cos(mlobe * th),
             c[1] + R * np.sin(th) + a * np.sin(mlobe * th)], axis=1)
        # resample by arclength: the trochoid slows down near the loop tips
        return _resample_closed(dense, J)
    if kind == "epicycle_arc":
        if closed:
            raise GeneratorError("epicycle_arc generates open curves only")
        R = float(spec.get("radius", 2.0))
        a = float(spec.get("amplitude", 0.5))
        b = float(spec.get("wobble", 0.0))
        mlobe = int(spec.get("lobes", 4))
        if not 0.0 <= a < R:
            raise GeneratorError("epicycle_arc needs 0 <= amplitude < radius")
        phi = np.pi * np.arange(4096) / 4095
        # radial perturbation keeps the interior strictly off the x2-axis;
        # a nonzero angular wobble makes the polar angle non-monotone, which
        # produces self-intersections (use an even lobe count so the angle
        # stays inside (0, pi) and the endpoints remain exactly on the axis)
        r = R + a * np.cos(mlobe * phi)
        th = phi + b * np.sin(mlobe * phi)
        dense = np.stack([r * np.sin(th), r * np.cos(th)], axis=1)
        return _resample_open(dense, J)
    if kind == "torus_loop":
        if not closed:
            raise GeneratorError("torus_loop generates closed curves only")
        p = float(spec.get("period", 2.0 * np.pi))
        x20 = float(spec.get("x2", 0.0))
        amp = float(spec.get("amplitude", 0.0))
        axis = int(spec.get("axis", 1))
        th = np.arange(J) / J
        along = p * th
        across = x20 + amp * np.sin(2.0 * np.pi * th)
        if axis == 1:
            return np.stack([along, across], axis=1)
        return np.stack([across, along], axis=1)
    if kind == "perturb":
        base = _gen_nodes(spec["base"], J, closed, seed)
        amp = float(spec.get("amplitude", 0.0))
        mode = spec.get("mode", "shift_e1")
        if mode == "shift_e1":
            base = base + np.array([amp, 0.0])
        elif mode == "shift_e2":
            base = base + np.array([0.0, amp])
        elif mode == "noise":
            rng = np.random.default_rng(seed)
            base = base + amp * rng.standard_normal(base.shape)
        else:
            raise GeneratorError(f"unknown perturbation mode {mode!r}")
        return base
    raise GeneratorError(f"unknown initial-curve kind {spec.get('kind')!r}")


def generate_initial(
    spec: dict,
    J: int,
    bcs: tuple[BoundaryKind, BoundaryKind] | None,
    seed: int = 0,
    m: ConformalMetric | None = None,
) -> PolygonalCurve:
    """Build the initial polygon: J elements, normalized orientation, wrap
    cell taken from the metric, endpoint consistency enforced."""
    closed = bcs is None
    nodes = _gen_nodes(spec, J, closed, seed)
    if closed:
        nodes = _ensure_ccw(nodes)
    else:
        for idx, bc in ((0, bcs[0]), (-1, bcs[1])):
            if isinstance(bc, Axis) and abs(nodes[idx, 0]) > 1e-9:
                raise GeneratorError(
                    "axis endpoint requested but the generated curve does not "
                    f"meet the axis (x1 = {nodes[idx, 0]:.3e})"
                )
    wrap = m.wrap_cell() if m is not None else None
    kwargs = {"wrap": wrap} if wrap is not None else {}
    if closed:
        return PolygonalCurve(nodes, closed=True, **kwargs)
    return PolygonalCurve(nodes, closed=False, bc0=bcs[0], bc1=bcs[1], **kwargs)


# -- running ------------------------------------------------------------------


def _build_objects(cfg: ScenarioConfig):
    m = build_metric(cfg.metric)
    bcs = None
    if cfg.boundary is not None:
        bcs = (
            _build_bc(cfg.boundary["start"], "boundary.start"),
            _build_bc(cfg.boundary["end"], "boundary.end"),
        )
    curve = generate_initial(cfg.initial, cfg.J, bcs, cfg.seed, m)
    policy = _build_policy(cfg.step)
    rule = default_gauss() if cfg.quadrature == "gauss" else MassLumped()
    newton = NewtonConfig(tol=float(cfg.newton["tol"]),
                          max_iter=int(cfg.newton["max_iter"]))
    return m, curve, policy, rule, newton


def initial_state(cfg: ScenarioConfig, m: ConformalMetric,
                  curve: PolygonalCurve) -> SchemeState:
    if cfg.scheme == "Q":
        kappa_g, Y = assemble_initial_Q(curve, m)
        return SchemeState(curve=curve, kappa_g=kappa_g, Y_g=Y)
    return SchemeState(curve=curve)


def _fmt(v: float) -> str:
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return repr(float(v))


def _write_snapshots(path: Path, result: RunResult):
    has_kg = any(s.state.kappa_g is not None for s in result.snapshots)
    header = "t,j,x1,x2,kappa_g" if has_kg else "t,j,x1,x2"
    lines = [header]
    for snap in result.snapshots:
        nodes = snap.state.curve.nodes
        kg = snap.state.kappa_g
        for j in range(nodes.shape[0]):
            row = [_fmt(snap.t), str(j), _fmt(nodes[j, 0]), _fmt(nodes[j, 1])]
            if has_kg:
                row.append(_fmt(kg[j]) if kg is not None else "nan")
            lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def _write_energy(path: Path, result: RunResult):
    lines = ["t,L_g,W_g"]
    for t, L, W in result.energy:
        lines.append(f"{_fmt(t)},{_fmt(L)},{_fmt(W)}")
    path.write_text("\n".join(lines) + "\n")


def _write_lifted(path: Path, result: RunResult, kind: str, lift_map):
    header = "t,j,X,Y,Z" if kind == "surface" else "t,j,u1,u2,u3"
    lines = [header]
    for snap in result.snapshots:
        lifted = lift_map(snap.state.curve.nodes)
        for j in range(lifted.shape[0]):
            lines.append(",".join(
                [_fmt(snap.t), str(j)] + [_fmt(v) for v in lifted[j]]))
    path.write_text("\n".join(lines) + "\n")


_EXIT_CODES = {
    RunStatus.COMPLETED: 0,
    RunStatus.STEADY_STATE: 0,
    RunStatus.NEWTON_DIVERGED: 3,
    RunStatus.DOMAIN_EXIT: 3,
    RunStatus.ASSUMPTION_VIOLATED: 4,
}


def run_scenario(cfg: ScenarioConfig, output_dir: str | Path | None = None,
                 ) -> tuple[int, RunResult]:
    """Run one scenario and write its output files.

    Returns (exit_code, result): 0 for Completed/SteadyState, 3 for flow
    breakdown, 4 for a violated rank assumption.  Configuration problems
    raise ConfigError (exit code 2 at the command line).
    """
    m, curve, policy, rule, newton = _build_objects(cfg)
    state = initial_state(cfg, m, curve)
    snapshot_times = cfg.snapshot_times or (0.0, cfg.t_end)
    result = run(
        Scheme(cfg.scheme),
        state,
        m,
        policy,
        cfg.t_end,
        rule=rule,
        newton=newton,
        snapshot_times=snapshot_times,
        steady_tol=cfg.steady_tol,
        check_assumptions=cfg.check_assumptions,
    )
    if not any(abs(s.t - result.t_stop) < 1e-12 for s in result.snapshots):
        result.snapshots.append(Snapshot(t=result.t_stop, state=result.final))

    out = Path(output_dir) if output_dir is not None else Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_snapshots(out / "snapshots.csv", result)
    _write_energy(out / "energy.csv", result)
    kind, lift_map = lift_for_metric(m)
    if kind is not None:
        name = "lifted.csv" if kind == "surface" else "simplex.csv"
        _write_lifted(out / name, result, kind, lift_map)
    meta = {
        "config": config_to_dict(cfg),
        "status": result.status.value,
        "t_stop": result.t_stop,
        "message": result.message,
        "steps": int(result.energy.shape[0]) - 1,
        "assumption_checks": {
            "enabled": cfg.check_assumptions,
            "violation": result.message
            if result.status is RunStatus.ASSUMPTION_VIOLATED else None,
        },
        "version": __version__,
    }
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return _EXIT_CODES[result.status], result


# -- presets ------------------------------------------------------------------


def _deg(v):  # unit vector from degrees, rounded for JSON cleanliness
    a = math.radians(v)
    return [math.cos(a), math.sin(a)]


PRESETS: dict[str, dict] = {
    # curvature flow of convex "cigar" curves in power-law metrics
    "cf_mu1_cigars": {
        "scheme": "A",
        "metric": {"family": "powerlaw", "mu": 1.0},
        "initial": {"kind": "cigar", "length": 2.4, "width": 0.8,
                    "center": [1.5, 0.0], "angle_deg": 90.0},
        "t_end": 0.1,
        "snapshot_times": [0.0, 0.025, 0.05, 0.075, 0.1],
    },
    "cf_muneg1_cigars": {
        "scheme": "A",
        "metric": {"family": "powerlaw", "mu": -1.0},
        "initial": {"kind": "cigar", "length": 2.4, "width": 0.8,
                    "center": [1.5, 0.0], "angle_deg": 90.0},
        "t_end": 0.1,
        "snapshot_times": [0.0, 0.025, 0.05, 0.075, 0.1],
    },
    # curvature flow of a semicircle attached to the degenerate axis
    "cf_axis_semicircle": {
        "scheme": "A",
        "metric": {"family": "powerlaw", "mu": -1.0},
        "initial": {"kind": "semicircle", "radius": 1.0},
        "boundary": {"start": {"kind": "axis"}, "end": {"kind": "axis"}},
        "t_end": 0.05,
        "snapshot_times": [0.0, 0.0125, 0.025, 0.0375, 0.05],
    },
    # geodesic relaxation with fixed / sliding endpoints
    "cf_dirichlet": {
        "scheme": "A",
        "metric": {"family": "powerlaw", "mu": 1.0},
        "initial": {"kind": "arc", "center": [3.0, 0.0],
                    "radius": math.sqrt(5.0),
                    "angle0_deg": 206.56505117707798,
                    "angle1_deg": 153.43494882292202},
        "boundary": {"start": {"kind": "dirichlet"}, "end": {"kind": "dirichlet"}},
        "step": {"kind": "adaptive", "dt_min": 1e-4, "dt_max": 1e-2},
        "t_end": 20.0,
        "steady_tol": 1e-6,
    },
    "cf_free": {
        "scheme": "A",
        "metric": {"family": "powerlaw", "mu": 1.0},
        "initial": {"kind": "arc", "center": [3.0, 0.0],
                    "radius": math.sqrt(5.0),
                    "angle0_deg": 206.56505117707798,
                    "angle1_deg": 153.43494882292202},
        "boundary": {"start": {"kind": "slide_x1"}, "end": {"kind": "slide_x1"}},
        "t_end": 0.08,
    },
    "hyperbolic_geodesic": {
        "scheme": "A",
        "metric": {"family": "powerlaw", "mu": 1.0},
        "initial": {"kind": "arc", "center": [3.0, 0.0],
                    "radius": math.sqrt(5.0),
                    "angle0_deg": 206.56505117707798,
                    "angle1_deg": 153.43494882292202},
        "boundary": {"start": {"kind": "dirichlet"}, "end": {"kind": "dirichlet"}},
        "step": {"kind": "adaptive", "dt_min": 1e-4, "dt_max": 1e-2},
        "t_end": 20.0,
        "steady_tol": 1e-6,
    },
    # elastic flow with Navier / clamped endpoints
    "ef_navier": {
        "scheme": "Q",
        "metric": {"family": "powerlaw", "mu": -1.0},
        "initial": {"kind": "arc", "center": [2.0, -0.5773502691896257],
                    "radius": 1.1547005383792515,
                    "angle0_deg": 150.0, "angle1_deg": 30.0},
        "boundary": {"start": {"kind": "navier"}, "end": {"kind": "navier"}},
        "step": {"kind": "adaptive", "dt_min": 1e-6, "dt_max": 1e-3},
        "t_end": 1.0,
        "snapshot_times": [0.0, 0.25, 0.5, 1.0],
    },
    # clamped tangents zeta = (sin(theta), cos(theta)) with theta = 210 deg at
    # the start and 150 deg at the end; the sign convention is -tangent = zeta
    # at the start and +tangent = zeta at the end.  The initial arc below has
    # end tangents at 60 and -60 degrees, matching the clamp exactly.
    "ef_clamped": {
        "scheme": "Q",
        "metric": {"family": "powerlaw", "mu": -1.0},
        "initial": {"kind": "arc", "center": [2.0, -0.5773502691896257],
                    "radius": 1.1547005383792515,
                    "angle0_deg": 150.0, "angle1_deg": 30.0},
        "boundary": {
            "start": {"kind": "clamped",
                      "zeta": [-0.5, -0.8660254037844387]},
            "end": {"kind": "clamped",
                    "zeta": [0.5, -0.8660254037844387]},
        },
        # vertex quadrature keeps the weakly determined tangential part of
        # Y_g well behaved at the free clamped endpoints; small steps amplify
        # the initial-data transient (Y ~ dX/dt), hence the uniform 1e-3 step
        "quadrature": "lumped",
        "step": {"kind": "uniform", "dt": 1e-3},
        "t_end": 20.0,
        "steady_tol": 1e-6,
    },
    # Clifford-torus geodesics
    "torus_geodesic_fixed_ends": {
        "scheme": "Cstar",
        "metric": {"family": "torus", "s": 1.0},
        "initial": {"kind": "polyline",
                    "points": [[0.0, 0.5], [0.9, 1.7], [2.0, 2.5]]},
        "boundary": {"start": {"kind": "dirichlet"}, "end": {"kind": "dirichlet"}},
        "step": {"kind": "adaptive", "dt_min": 1e-4, "dt_max": 1e-2},
        "t_end": 20.0,
        "steady_tol": 1e-6,
    },
    "torus_nonhomotopic": {
        "scheme": "Cstar",
        "metric": {"family": "torus", "s": 1.0},
        "initial": {"kind": "torus_loop", "period": 2.0 * np.pi, "x2": 2.0,
                    "amplitude": 0.4, "axis": 1},
        "step": {"kind": "adaptive", "dt_min": 1e-4, "dt_max": 1e-2},
        "t_end": 40.0,
        # the limit geodesic is a straight coordinate line, which the
        # vertex-normal rank check flags by design; the steady trigger
        # stops the run well before the algebra degenerates
        "steady_tol": 1e-4,
        "check_assumptions": False,
    },
    # elastic flow to the Angenent torus (and higher-dimensional analogues)
    "angenent_torus": {
        "scheme": "Q",
        "metric": {"family": "angenent", "n": 2},
        "initial": {"kind": "circle", "center": [2.0, 0.0], "radius": 0.68},
        "t_end": 1.0,
        "snapshot_times": [0.0, 0.1, 0.25, 0.5, 1.0],
    },
    "angenent_torus_n3": {
        "scheme": "Q",
        "metric": {"family": "angenent", "n": 3},
        "initial": {"kind": "circle", "center": [2.0, 0.0], "radius": 0.6},
        "t_end": 0.5,
        "snapshot_times": [0.0, 0.1, 0.25, 0.5],
    },
    "angenent_torus_n4": {
        "scheme": "Q",
        "metric": {"family": "angenent", "n": 4},
        "initial": {"kind": "circle", "center": [2.4, 0.0], "radius": 0.55},
        "t_end": 0.5,
        "snapshot_times": [0.0, 0.1, 0.25, 0.5],
    },
    # instability of the Angenent torus under curvature flow
    "angenent_shifted_plus": {
        "scheme": "A",
        "metric": {"family": "angenent", "n": 2},
        "initial": {"kind": "perturb", "mode": "shift_e1", "amplitude": 0.05,
                    "base": {"kind": "circle", "center": [2.0, 0.0],
                             "radius": 0.68}},
        "t_end": 0.5,
        "snapshot_times": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
    },
    "angenent_shifted_minus": {
        "scheme": "A",
        "metric": {"family": "angenent", "n": 2},
        "initial": {"kind": "perturb", "mode": "shift_e1", "amplitude": -0.05,
                    "base": {"kind": "circle", "center": [2.0, 0.0],
                             "radius": 0.68}},
        "t_end": 0.5,
        "snapshot_times": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
    },
    # stationary self-shrinker spheres (generating semicircles)
    "sphere_selfshrinker": {
        "scheme": "Q",
        "metric": {"family": "angenent", "n": 2},
        "initial": {"kind": "semicircle", "radius": 2.0},
        "boundary": {"start": {"kind": "axis"}, "end": {"kind": "axis"}},
        "quadrature": "gauss",
        "t_end": 0.1,
        "snapshot_times": [0.0, 0.05, 0.1],
    },
    "sphere_selfshrinker_n3": {
        "scheme": "Q",
        "metric": {"family": "angenent", "n": 3},
        "initial": {"kind": "semicircle", "radius": math.sqrt(6.0)},
        "boundary": {"start": {"kind": "axis"}, "end": {"kind": "axis"}},
        "quadrature": "gauss",
        "t_end": 0.1,
        "snapshot_times": [0.0, 0.05, 0.1],
    },
    # non-embedded initial data
    "nonembedded_7x": {
        "scheme": "Q",
        "metric": {"family": "angenent", "n": 2},
        # amplitude 0.5 keeps the 7 inner loops disjoint (7 self-crossings);
        # the tighter loop tips need the smaller step for stability
        "initial": {"kind": "epicycle", "center": [2.5, 0.0], "radius": 1.0,
                    "amplitude": 0.5, "lobes": 8},
        "step": {"kind": "uniform", "dt": 5e-7},
        "t_end": 0.01,
        "snapshot_times": [0.0, 0.005, 0.01],
    },
    "nonembedded_genus0": {
        "scheme": "Q",
        "metric": {"family": "angenent", "n": 2},
        "initial": {"kind": "epicycle_arc", "radius": 2.0, "amplitude": 0.2,
                    "wobble": 0.4, "lobes": 6},
        "boundary": {"start": {"kind": "axis"}, "end": {"kind": "axis"}},
        "quadrature": "gauss",
        "step": {"kind": "uniform", "dt": 1e-6},
        "t_end": 0.01,
        "snapshot_times": [0.0, 0.005, 0.01],
    },
    "dk17_n3": {
        "scheme": "Q",
        "metric": {"family": "angenent", "n": 3},
        "initial": {"kind": "epicycle", "center": [3.0, 0.0], "radius": 1.0,
                    "amplitude": 0.5, "lobes": 8},
        "step": {"kind": "uniform", "dt": 1e-6},
        "t_end": 0.01,
        "snapshot_times": [0.0, 0.005, 0.01],
    },
    # flows on the cone
    "cone_shrink": {
        "scheme": "A",
        "metric": {"family": "cone", "b": 0.5},
        "initial": {"kind": "circle", "center": [0.0, 0.0], "radius": 2.0},
        "step": {"kind": "uniform", "dt": 1e-3},
        "t_end": 1.0,
        "snapshot_times": [0.0, 0.5, 1.0],
    },
    "cone_cme": {
        "scheme": "A",
        "metric": {"family": "cone", "b": 0.5},
        "initial": {"kind": "torus_loop", "period": 2.0 * np.pi, "x2": -0.3,
                    "amplitude": 1.7, "axis": 2},
        "step": {"kind": "uniform", "dt": 1e-3},
        "t_end": 1.5,
        "snapshot_times": [0.0, 0.25, 0.5, 0.75],
    },
    "cone_elastic": {
        "scheme": "Q",
        "metric": {"family": "cone", "b": 0.5},
        "initial": {"kind": "torus_loop", "period": 2.0 * np.pi, "x2": 0.5,
                    "amplitude": 0.4, "axis": 2},
        "step": {"kind": "adaptive", "dt_min": 1e-4, "dt_max": 1e-2},
        "t_end": 10.0,
        "snapshot_times": [0.0, 1.0, 5.0, 10.0],
    },
    # Gibbs-simplex interface profiles
    "gibbs_469": {
        "scheme": "A",
        "metric": {"family": "phasefield",
                   "potential": {"kind": "quartic", "s12": 4.0, "s13": 6.0,
                                 "s23": 9.0, "s123": 0.0}},
        "initial": {"kind": "arc", "center": [-math.sqrt(0.5), 0.0],
                    "radius": math.sqrt(0.5), "angle0_deg": 0.0,
                    "angle1_deg": -180.0},
        "boundary": {"start": {"kind": "dirichlet"}, "end": {"kind": "dirichlet"}},
        # the geodesic is reached by t ~ 0.08; afterwards the vertices
        # adjacent to the degenerate pure-phase endpoints enter a
        # persistent tangential dither, so the run stops at the end of
        # the decay phase
        "step": {"kind": "uniform", "dt": 1e-3},
        "t_end": 0.08,
    },
    "gibbs_edges": {
        "scheme": "A",
        "metric": {"family": "phasefield",
                   "potential": {"kind": "quartic_asym", "s12": 1.0, "s13": 1.0,
                                 "s23": 1.0, "sh123": 1.0, "sh231": 1.0,
                                 "sh312": 1.0}},
        "initial": {"kind": "arc", "center": [-math.sqrt(0.5), 0.0],
                    "radius": math.sqrt(0.5), "angle0_deg": 0.0,
                    "angle1_deg": -180.0},
        "boundary": {"start": {"kind": "dirichlet"}, "end": {"kind": "dirichlet"}},
        "step": {"kind": "adaptive", "dt_min": 1e-5, "dt_max": 1e-3},
        "t_end": 10.0,
        "steady_tol": 1e-5,
    },
}

for _s123 in (10, 100, 1000):
    # path between the midpoints of the 1-3 and 2-3 simplex edges, bowed
    # through the interior past the triple point; growing the triple-well
    # coefficient pulls it onto the edge pair meeting at the third vertex
    PRESETS[f"gibbs_sigma123_{_s123}"] = {
        "scheme": "A",
        "metric": {"family": "phasefield",
                   "potential": {"kind": "quartic", "s12": 1.0, "s13": 1.0,
                                 "s23": 1.0, "s123": float(_s123)}},
        "initial": {"kind": "arc",
                    "center": [-math.sqrt(0.5), -1.0 / math.sqrt(6.0)],
                    "radius": 1.0 / math.sqrt(6.0),
                    "angle0_deg": -30.0, "angle1_deg": -150.0},
        "boundary": {"start": {"kind": "dirichlet"}, "end": {"kind": "dirichlet"}},
        "step": {"kind": "uniform", "dt": 5e-5},
        "t_end": 0.2,
    }


def preset_config(name: str, overrides: dict | None = None) -> ScenarioConfig:
    """Expand a named preset (with optional dotted-path overrides) into a
    validated configuration."""
    if name not in PRESETS:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    raw = _canon(PRESETS[name])
    raw.setdefault("output_dir", f"out/{name}")
    if overrides and any(k.startswith("step.") for k in overrides):
        # dotted overrides into the implicit default step policy
        raw.setdefault("step", {"kind": "uniform", "dt": 1e-4})
    for key, value in (overrides or {}).items():
        _apply_override(raw, key, value)
    return parse_config(raw)


def _apply_override(raw: dict, dotted: str, value):
    parts = dotted.split(".")
    node = raw
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override path {dotted!r} crosses a non-object")
    node[parts[-1]] = value
