"""Shared fixtures: the metric catalogue with in-domain point samplers, and
small curve builders used across the suites."""

from __future__ import annotations

import numpy as np
import pytest

from riemflow.curve import (
    Axis,
    Clamped,
    Dirichlet,
    Navier,
    PolygonalCurve,
    SlideX1,
    SlideX2,
)
from riemflow.metrics import (
    Angenent,
    Catenoid,
    Cone,
    Disk,
    Mercator,
    PhaseField,
    PowerLaw,
    Quartic,
    QuarticAsym,
    Torus,
)


def _disk_points(rng, n, alpha=1.0, rmax=0.9):
    th = rng.uniform(0.0, 2.0 * np.pi, n)
    r = rmax / np.sqrt(alpha) * np.sqrt(rng.uniform(0.0, 1.0, n))
    return np.column_stack([r * np.cos(th), r * np.sin(th)])


def _half_plane(rng, n, lo=0.2, hi=3.0):
    return np.column_stack([rng.uniform(lo, hi, n), rng.uniform(-3.0, 3.0, n)])


def _plane(rng, n, s=1.5):
    return rng.normal(0.0, s, (n, 2))


def _phase_points(rng, n, m):
    """Points where the phase-field weight is bounded away from zero."""
    pts = rng.uniform(-1.6, 0.4, (4 * n, 2))
    pts = pts[m.weight(pts) > 1e-3]
    if pts.shape[0] < n:  # pragma: no cover - sampler is generous
        raise RuntimeError("phase-field sampler starved")
    return pts[:n]


QUARTIC = Quartic(4.0, 6.0, 9.0, 1.0)
QUARTIC_ASYM = QuarticAsym(1.0, 1.0, 1.0, 1.0, 1.0, 1.0)

# One entry per metric family of the catalogue (plus parameter variants that
# exercise different code branches).  sampler(rng, n) -> (n, 2) in-domain
# points with the weight bounded away from zero.
METRIC_CASES = [
    ("powerlaw_mu1", PowerLaw(mu=1.0), _half_plane),
    ("powerlaw_muneg1", PowerLaw(mu=-1.0), _half_plane),
    ("disk_hyperbolic", Disk(alpha=1.0), lambda rng, n: _disk_points(rng, n)),
    ("mercator", Mercator(), _plane),
    ("catenoid", Catenoid(), _plane),
    ("torus_s1", Torus(s=1.0), lambda rng, n: rng.uniform(-3.0, 3.0, (n, 2))),
    ("angenent_n2", Angenent(n=2),
     lambda rng, n: np.column_stack([rng.uniform(0.3, 3.0, n),
                                     rng.uniform(-2.0, 2.0, n)])),
    ("angenent_n3", Angenent(n=3),
     lambda rng, n: np.column_stack([rng.uniform(0.3, 3.0, n),
                                     rng.uniform(-2.0, 2.0, n)])),
    ("cone_b05", Cone(b=0.5), lambda rng, n: rng.uniform(-2.0, 2.0, (n, 2))),
    ("phasefield_quartic", PhaseField(psi=QUARTIC),
     lambda rng, n: _phase_points(rng, n, PhaseField(psi=QUARTIC))),
    ("phasefield_asym", PhaseField(psi=QUARTIC_ASYM),
     lambda rng, n: _phase_points(rng, n, PhaseField(psi=QUARTIC_ASYM))),
]

METRIC_IDS = [c[0] for c in METRIC_CASES]


@pytest.fixture(params=METRIC_CASES, ids=METRIC_IDS)
def metric_case(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)


# -- curve builders ------------------------------------------------------------


def regular_polygon(J, radius=1.0, center=(0.0, 0.0)):
    th = 2.0 * np.pi * np.arange(J) / J
    nodes = np.stack([center[0] + radius * np.cos(th),
                      center[1] + radius * np.sin(th)], axis=1)
    return PolygonalCurve(nodes, closed=True)


def unit_square():
    nodes = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    return PolygonalCurve(nodes, closed=True)


def semicircle(J, radius=2.0, bc=None):
    phi = np.pi * np.arange(J + 1) / J
    nodes = np.stack([radius * np.sin(phi), radius * np.cos(phi)], axis=1)
    bc = bc or Axis()
    return PolygonalCurve(nodes, closed=False, bc0=bc, bc1=bc)


def open_segment(p0, p1, J, bc0, bc1):
    lam = np.arange(J + 1)[:, None] / J
    nodes = (1.0 - lam) * np.asarray(p0, float) + lam * np.asarray(p1, float)
    return PolygonalCurve(nodes, closed=False, bc0=bc0, bc1=bc1)


BOUNDARY_KINDS = {
    "axis": Axis(),
    "dirichlet": Dirichlet(),
    "clamped": Clamped(zeta=(0.0, 1.0)),
    "navier": Navier(),
    "slide_x1": SlideX1(),
    "slide_x2": SlideX2(),
}
