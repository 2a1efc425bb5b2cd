"""Command-line entry point.

Subcommands:
  run     --config FILE [--output DIR]      run one scenario from JSON
  preset  NAME [--override key=val ...]     run a named experiment preset
  sweep   --dir DIR [--jobs N]              run every *.json config in DIR
  check                                      self-test: derivative and
                                             quadrature oracles

Exit codes: 0 success (completed or steady state), 2 configuration error,
3 flow breakdown (Newton divergence / domain exit), 4 rank-assumption
violation.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, GeneratorError
from .metrics import (
    Angenent,
    Catenoid,
    Cone,
    Disk,
    Mercator,
    PhaseField,
    PowerLaw,
    Quartic,
    Torus,
)
from .quadrature import default_gauss
from .scenario import PRESETS, parse_config, preset_config, run_scenario

__all__ = ["main"]


def _parse_override(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise ConfigError(f"override {text!r} must have the form key=value")
    key, _, raw = text.partition("=")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw  # bare string
    return key, value


def _cmd_run(args) -> int:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    cfg = parse_config(text)
    code, result = run_scenario(cfg, args.output)
    print(f"status: {result.status.value} (t = {result.t_stop:g})")
    if result.message:
        print(f"detail: {result.message}")
    return code


def _cmd_preset(args) -> int:
    overrides = dict(_parse_override(o) for o in args.override or [])
    cfg = preset_config(args.name, overrides)
    code, result = run_scenario(cfg, args.output)
    print(f"{args.name}: {result.status.value} (t = {result.t_stop:g})")
    if result.message:
        print(f"detail: {result.message}")
    return code


def _run_one_config(path: Path) -> tuple[str, int, str]:
    try:
        cfg = parse_config(path.read_text())
        out = path.parent / path.stem
        code, result = run_scenario(cfg, out)
        return path.name, code, result.status.value
    except (ConfigError, GeneratorError) as exc:
        return path.name, 2, f"config error: {exc}"


def _cmd_sweep(args) -> int:
    configs = sorted(Path(args.dir).glob("*.json"))
    if not configs:
        print(f"no *.json configs in {args.dir}", file=sys.stderr)
        return 2
    worst = 0
    with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
        for name, code, status in pool.map(_run_one_config, configs):
            print(f"{name}: {status} (exit {code})")
            worst = max(worst, code)
    return worst


def _check_metric_derivatives() -> int:
    """Finite-difference spot check of every metric family's derivatives."""
    rng = np.random.default_rng(7)
    cases = [
        (PowerLaw(mu=1.0), lambda n: np.column_stack(
            [rng.uniform(0.2, 3.0, n), rng.uniform(-3.0, 3.0, n)])),
        (PowerLaw(mu=-1.0), lambda n: np.column_stack(
            [rng.uniform(0.2, 3.0, n), rng.uniform(-3.0, 3.0, n)])),
        (Disk(alpha=1.0), lambda n: 0.9 * _disk_points(rng, n)),
        (Mercator(), lambda n: rng.normal(0.0, 1.5, (n, 2))),
        (Catenoid(), lambda n: rng.normal(0.0, 1.5, (n, 2))),
        (Torus(s=1.0), lambda n: rng.uniform(-3.0, 3.0, (n, 2))),
        (Angenent(n=2), lambda n: np.column_stack(
            [rng.uniform(0.3, 3.0, n), rng.uniform(-2.0, 2.0, n)])),
        (Cone(b=0.5), lambda n: rng.uniform(-2.0, 2.0, (n, 2))),
        (PhaseField(psi=Quartic(4.0, 6.0, 9.0, 1.0)), lambda n: rng.uniform(
            -1.2, 0.4, (n, 2))),
    ]
    h = 1e-6
    worst = 0.0
    for m, sample in cases:
        z = sample(200)
        g = m.weight(z)
        keep = g > 1e-6
        z = z[keep]
        sg = lambda p: np.sqrt(m.weight(p))  # noqa: E731
        fd = np.stack(
            [(sg(z + [h, 0]) - sg(z - [h, 0])) / (2 * h),
             (sg(z + [0, h]) - sg(z - [0, h])) / (2 * h)], axis=1)
        scale = np.maximum(1.0, np.abs(fd).max(axis=1, keepdims=True))
        err = np.abs(m.grad_half(z) - fd) / scale
        worst = max(worst, float(err.max()))
    print(f"metric derivative check: max rel. deviation {worst:.2e}")
    return 0 if worst < 1e-5 else 1


def _disk_points(rng, n):
    th = rng.uniform(0.0, 2 * np.pi, n)
    r = np.sqrt(rng.uniform(0.0, 1.0, n))
    return np.column_stack([r * np.cos(th), r * np.sin(th)])


def _check_quadrature() -> int:
    rule = default_gauss()
    worst = 0.0
    for k in range(6):
        val = rule.integrate_reference(lambda rho: rho ** k)
        worst = max(worst, abs(val - 1.0 / (k + 1)))
    print(f"quadrature exactness check: max deviation {worst:.2e}")
    return 0 if worst < 1e-13 else 1


def _cmd_check(_args) -> int:
    return max(_check_metric_derivatives(), _check_quadrature())


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="riemflow",
        description="Finite-element curvature and elastic flow of curves in "
                    "conformally flat Riemannian 2-manifolds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario from a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--output", default=None)
    p_run.set_defaults(func=_cmd_run)

    p_preset = sub.add_parser("preset", help="run a named experiment preset")
    p_preset.add_argument("name", choices=sorted(PRESETS))
    p_preset.add_argument("--override", action="append", metavar="KEY=VALUE")
    p_preset.add_argument("--output", default=None)
    p_preset.set_defaults(func=_cmd_preset)

    p_sweep = sub.add_parser("sweep", help="run every *.json config in a directory")
    p_sweep.add_argument("--dir", required=True)
    p_sweep.add_argument("--jobs", type=int, default=None)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_check = sub.add_parser("check", help="run built-in self tests")
    p_check.set_defaults(func=_cmd_check)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GeneratorError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
