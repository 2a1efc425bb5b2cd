"""Time-integration driver: stepping policies, energy monitoring, steady-state
and breakdown detection.

A run never raises for flow breakdowns; it returns a RunResult whose status
records how the evolution ended.  Breaking down (Newton divergence, the curve
leaving the coordinate domain, a rank assumption failing) is a legitimate
outcome of these flows, not an implementation error.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .assembly import NewtonConfig, SchemeState, step_A, step_Cstar, step_Q
from .curve import discrete_elastic_energy, discrete_length
from .errors import (
    AssumptionViolated,
    DegenerateElement,
    DegenerateError,
    DomainError,
    NewtonDiverged,
    SolveError,
)
from .metrics import ConformalMetric

__all__ = [
    "Uniform",
    "Adaptive",
    "StepPolicy",
    "Scheme",
    "RunStatus",
    "Snapshot",
    "RunResult",
    "detect_steady",
    "run",
    "DEFAULT_STEADY_TOL",
]

DEFAULT_STEADY_TOL = 1e-7


@dataclass(frozen=True)
class Uniform:
    """Constant time step."""

    dt: float

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError("Uniform.dt must be positive")


@dataclass(frozen=True)
class Adaptive:
    """Geometric ramp dt_0 = dt_min, dt_{m+1} = min(growth*dt_m, dt_max).

    After a failed step the ramp restarts from dt_min; a second failure at
    dt_min aborts the run.
    """

    dt_min: float
    dt_max: float
    growth: float = 1.1

    def __post_init__(self):
        if not 0.0 < self.dt_min <= self.dt_max:
            raise ValueError("Adaptive needs 0 < dt_min <= dt_max")
        if not 1.0 < self.growth <= 2.0:
            raise ValueError("Adaptive.growth must lie in (1, 2]")


StepPolicy = Uniform | Adaptive


class Scheme(enum.Enum):
    """The three time-stepping schemes."""

    A = "A"          # linear, mass-lumped curvature flow
    CSTAR = "Cstar"  # nonlinear convexity-split curvature flow (stable)
    Q = "Q"          # linear elastic flow with full quadrature


class RunStatus(enum.Enum):
    COMPLETED = "completed"
    STEADY_STATE = "steady_state"
    NEWTON_DIVERGED = "newton_diverged"
    DOMAIN_EXIT = "domain_exit"
    ASSUMPTION_VIOLATED = "assumption_violated"

    @property
    def ok(self) -> bool:
        return self in (RunStatus.COMPLETED, RunStatus.STEADY_STATE)


@dataclass(frozen=True)
class Snapshot:
    t: float
    state: SchemeState


@dataclass
class RunResult:
    """Outcome of a run: final state, snapshots, per-step energies, status."""

    status: RunStatus
    t_stop: float
    final: SchemeState
    snapshots: list[Snapshot] = field(default_factory=list)
    energy: np.ndarray = field(default_factory=lambda: np.empty((0, 3)))
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status.ok


def detect_steady(
    state_prev: SchemeState,
    state_next: SchemeState,
    dt: float,
    tol: float = DEFAULT_STEADY_TOL,
) -> bool:
    """True iff the maximum vertex displacement is at most tol*dt."""
    disp = np.max(np.abs(state_next.curve.nodes - state_prev.curve.nodes))
    return bool(disp <= tol * dt)


def _energies(state: SchemeState, m: ConformalMetric, rule) -> tuple[float, float]:
    L = discrete_length(state.curve, m)
    if state.kappa_g is not None:
        W = discrete_elastic_energy(state.kappa_g, state.curve, m, rule)
    else:
        W = float("nan")
    return L, W


def _step_once(
    scheme: Scheme,
    state: SchemeState,
    m: ConformalMetric,
    dt: float,
    rule,
    newton: NewtonConfig,
    check_assumptions: bool,
) -> SchemeState:
    if scheme is Scheme.A:
        return step_A(state, m, dt, check_assumptions=check_assumptions)
    if scheme is Scheme.CSTAR:
        return step_Cstar(
            state, m, dt, newton=newton, check_assumptions=check_assumptions
        )
    return step_Q(state, m, dt, rule, check_assumptions=check_assumptions)


def run(
    scheme: Scheme,
    initial: SchemeState,
    m: ConformalMetric,
    policy: StepPolicy,
    t_end: float,
    *,
    rule=None,
    newton: NewtonConfig | None = None,
    snapshot_times: tuple[float, ...] = (),
    steady_tol: float = DEFAULT_STEADY_TOL,
    check_assumptions: bool = True,
    check_every: int = 1,
    hooks=None,
    cancel=None,
) -> RunResult:
    """Iterate the chosen step operation until t_end, steady state or breakdown.

    Snapshot times are hit exactly by shortening the step that would cross
    them; energies are recorded after every accepted step with the scheme's
    own quadrature.  hooks, if given, is called as hooks(state) after every
    accepted step; cancel, if given, is polled each step and stops the run
    (status COMPLETED at the current time) when it returns True.
    """
    newton = newton or NewtonConfig()
    state = initial
    t_eps = 1e-12 * max(1.0, abs(t_end))

    stops = sorted({float(s) for s in snapshot_times if initial.t < s <= t_end})
    snapshots: list[Snapshot] = []
    if any(abs(s - initial.t) <= t_eps for s in snapshot_times):
        snapshots.append(Snapshot(t=initial.t, state=initial))

    energy_rows: list[tuple[float, float, float]] = []
    L, W = _energies(state, m, rule)
    energy_rows.append((state.t, L, W))

    if isinstance(policy, Uniform):
        dt_nom = policy.dt
    else:
        dt_nom = policy.dt_min
    retried = False

    def result(status: RunStatus, message: str = "") -> RunResult:
        return RunResult(
            status=status,
            t_stop=state.t,
            final=state,
            snapshots=snapshots,
            energy=np.array(energy_rows) if energy_rows else np.empty((0, 3)),
            message=message,
        )

    step_no = 0
    while state.t < t_end - t_eps:
        if cancel is not None and cancel():
            return result(RunStatus.COMPLETED, "cancelled")
        dt = min(dt_nom, t_end - state.t)
        while stops and stops[0] <= state.t + t_eps:
            stops.pop(0)
        if stops:
            dt = min(dt, stops[0] - state.t)
        check = check_assumptions and (step_no % max(1, check_every) == 0)
        try:
            new_state = _step_once(scheme, state, m, dt, rule, newton, check)
        except AssumptionViolated as exc:
            return result(RunStatus.ASSUMPTION_VIOLATED, str(exc))
        except (DomainError, DegenerateError, DegenerateElement) as exc:
            return result(RunStatus.DOMAIN_EXIT, str(exc))
        except (NewtonDiverged, SolveError) as exc:
            if isinstance(policy, Adaptive) and not retried:
                retried = True
                dt_nom = policy.dt_min
                continue
            return result(RunStatus.NEWTON_DIVERGED, str(exc))
        retried = False
        step_no += 1

        try:
            L, W = _energies(new_state, m, rule)
        except (DomainError, DegenerateError, DegenerateElement) as exc:
            # the step itself succeeded but left a degenerate polygon
            # (typical at extinction); report it as leaving the domain
            return result(RunStatus.DOMAIN_EXIT, str(exc))
        energy_rows.append((new_state.t, L, W))
        if stops and abs(new_state.t - stops[0]) <= t_eps:
            snapshots.append(Snapshot(t=new_state.t, state=new_state))
            stops.pop(0)
        if hooks is not None:
            hooks(new_state)

        steady = detect_steady(state, new_state, dt, steady_tol)
        state = new_state
        if steady:
            return result(RunStatus.STEADY_STATE)
        if isinstance(policy, Adaptive):
            dt_nom = min(policy.growth * dt_nom, policy.dt_max)

    return result(RunStatus.COMPLETED)
