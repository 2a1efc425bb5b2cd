"""Polygonal curves, boundary-condition taxonomy and per-step geometry.

A curve is a list of nodes on a uniform parameter mesh with h = 1/J.
Throughout the package h cancels against |X_rho| = chord/h, so the
geometry cache stores chord lengths and all assembled quantities use them
directly.

Orientation convention: perp is the clockwise rotation v -> (v2, -v1) and
the element normal is nu = -tau^perp = (-tau2, tau1).  Counter-clockwise
closed curves then have positive Euclidean curvature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateElement
from .metrics import ConformalMetric, WrapCell

__all__ = [
    "Axis",
    "Dirichlet",
    "Clamped",
    "Navier",
    "SlideX1",
    "SlideX2",
    "BoundaryKind",
    "PolygonalCurve",
    "CurveGeometry",
    "DofMap",
    "geometry",
    "dof_map",
    "discrete_length",
    "discrete_elastic_energy",
]


@dataclass(frozen=True)
class Axis:
    """Endpoint on the degenerate axis x1 = 0: x_t.e1 = 0 and x_rho.e2 = 0."""


@dataclass(frozen=True)
class Dirichlet:
    """Endpoint fixed in place."""


@dataclass(frozen=True)
class Clamped:
    """Endpoint fixed with prescribed unit tangent direction zeta."""

    zeta: tuple[float, float]

    def __post_init__(self):
        z = np.asarray(self.zeta, dtype=float)
        if z.shape != (2,) or abs(np.linalg.norm(z) - 1.0) > 1e-12:
            raise ValueError("Clamped.zeta must be a unit 2-vector")
        object.__setattr__(self, "zeta", (float(z[0]), float(z[1])))

    @property
    def zeta_vec(self) -> np.ndarray:
        return np.asarray(self.zeta, dtype=float)


@dataclass(frozen=True)
class Navier:
    """Endpoint fixed in place with zero geodesic curvature."""


@dataclass(frozen=True)
class SlideX1:
    """Endpoint sliding along a line x1 = const (e1-velocity frozen)."""


@dataclass(frozen=True)
class SlideX2:
    """Endpoint sliding along a line x2 = const (e2-velocity frozen)."""


BoundaryKind = Axis | Dirichlet | Clamped | Navier | SlideX1 | SlideX2


@dataclass(frozen=True)
class PolygonalCurve:
    """Nodes on the uniform parameter mesh, open or closed.

    Open curves store J+1 nodes and carry a boundary kind per endpoint;
    closed curves store J nodes (the closing element is implicit).
    """

    nodes: np.ndarray
    closed: bool = True
    bc0: BoundaryKind | None = None
    bc1: BoundaryKind | None = None
    wrap: WrapCell = WrapCell()

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise ValueError("nodes must be an (N, 2) array")
        if not np.all(np.isfinite(nodes)):
            raise ValueError("node coordinates must be finite")
        if self.closed:
            if self.bc0 is not None or self.bc1 is not None:
                raise ValueError("closed curves carry no endpoint conditions")
            if nodes.shape[0] < 3:
                raise ValueError("closed curves need J >= 3 nodes")
        else:
            if self.bc0 is None or self.bc1 is None:
                raise ValueError("open curves need both endpoint conditions")
            if nodes.shape[0] < 4:
                raise ValueError("open curves need J >= 3 elements")
            # the axis constraint x1 = 0 is enforced exactly
            if isinstance(self.bc0, Axis):
                nodes[0, 0] = 0.0
            if isinstance(self.bc1, Axis):
                nodes[-1, 0] = 0.0
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elem(self) -> int:
        return self.n_nodes if self.closed else self.n_nodes - 1

    @property
    def J(self) -> int:
        return self.n_elem

    def elements(self) -> tuple[np.ndarray, np.ndarray]:
        """Index arrays (a, b) of the element endpoints."""
        n = self.n_nodes
        a = np.arange(self.n_elem)
        b = (a + 1) % n if self.closed else a + 1
        return a, b

    def endpoint_kinds(self) -> dict[int, BoundaryKind]:
        if self.closed:
            return {}
        return {0: self.bc0, self.n_nodes - 1: self.bc1}

    def with_nodes(self, nodes: np.ndarray) -> "PolygonalCurve":
        return PolygonalCurve(
            nodes=nodes, closed=self.closed, bc0=self.bc0, bc1=self.bc1, wrap=self.wrap
        )


def wrap_diffs(curve: PolygonalCurve) -> np.ndarray:
    """Per-element difference vectors with nearest-representative wrapping.

    Elements whose wrapped span reaches half a period are rejected: the
    representative is then ambiguous.
    """
    a, b = curve.elements()
    d = curve.nodes[b] - curve.nodes[a]
    for i, p in enumerate(curve.wrap.periods):
        if p is None:
            continue
        d[:, i] -= p * np.round(d[:, i] / p)
        if np.any(np.abs(d[:, i]) > 0.5 * p * (1.0 - 1e-9)):
            raise DegenerateElement(
                f"element spans half the x{i + 1}-period; representative ambiguous"
            )
    return d


@dataclass(frozen=True)
class CurveGeometry:
    """Immutable per-step cache of element and vertex geometry.

    q is the Euclidean chord length per element; tau, nu are unit element
    vectors; omega is the mass-lumped vertex normal; mass is the vertex
    weight (half-sum of adjacent chord lengths).
    """

    curve: PolygonalCurve
    d: np.ndarray
    q: np.ndarray
    tau: np.ndarray
    nu: np.ndarray
    omega: np.ndarray
    mass: np.ndarray

    @property
    def a(self) -> np.ndarray:
        return self.curve.elements()[0]

    @property
    def b(self) -> np.ndarray:
        return self.curve.elements()[1]

    def elem_points(self, alpha: np.ndarray) -> np.ndarray:
        """Physical positions of in-element points, shape (n_elem, K, 2).

        alpha = 1 is the element's first endpoint.  Uses the wrapped
        representative of the second endpoint.
        """
        alpha = np.asarray(alpha, dtype=float)
        start = self.curve.nodes[self.a]
        return start[:, None, :] + (1.0 - alpha)[None, :, None] * self.d[:, None, :]

    def vertex_values(self, f_vertex: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """One-sided element-endpoint samples (f_a, f_b) of vertex data."""
        return f_vertex[self.a], f_vertex[self.b]


def geometry(curve: PolygonalCurve) -> CurveGeometry:
    """Build the geometric cache; raises DegenerateElement on zero chords."""
    d = wrap_diffs(curve)
    q = np.linalg.norm(d, axis=1)
    if np.any(q < 1e-14):
        raise DegenerateElement("element with (numerically) zero chord length")
    tau = d / q[:, None]
    nu = np.stack([-tau[:, 1], tau[:, 0]], axis=1)

    n = curve.n_nodes
    a, b = curve.elements()
    mass = np.zeros(n)
    np.add.at(mass, a, 0.5 * q)
    np.add.at(mass, b, 0.5 * q)

    wnu = np.zeros((n, 2))
    np.add.at(wnu, a, q[:, None] * nu)
    np.add.at(wnu, b, q[:, None] * nu)
    omega = wnu / (2.0 * mass[:, None])

    return CurveGeometry(curve=curve, d=d, q=q, tau=tau, nu=nu, omega=omega, mass=mass)


@dataclass(frozen=True)
class DofMap:
    """Per-vertex elimination masks for the three unknown fields.

    x_fixed marks frozen components of the position update (the test and
    trial space for delta X); kappa_fixed marks scalar curvature dofs
    pinned to zero; y_fixed marks frozen components of the curvature
    vector Y_g.
    """

    x_fixed: np.ndarray
    kappa_fixed: np.ndarray
    y_fixed: np.ndarray

    @property
    def x_free(self) -> np.ndarray:
        return ~self.x_fixed

    @property
    def kappa_free(self) -> np.ndarray:
        return ~self.kappa_fixed

    @property
    def y_free(self) -> np.ndarray:
        return ~self.y_fixed


def dof_map(curve: PolygonalCurve) -> DofMap:
    n = curve.n_nodes
    x_fixed = np.zeros((n, 2), dtype=bool)
    kappa_fixed = np.zeros(n, dtype=bool)
    y_fixed = np.zeros((n, 2), dtype=bool)
    for idx, kind in curve.endpoint_kinds().items():
        if isinstance(kind, (Dirichlet, Clamped, Navier)):
            x_fixed[idx, :] = True
        elif isinstance(kind, (Axis, SlideX1)):
            x_fixed[idx, 0] = True
        elif isinstance(kind, SlideX2):
            x_fixed[idx, 1] = True
        if isinstance(kind, Axis):
            kappa_fixed[idx] = True
            y_fixed[idx, 0] = True
        elif isinstance(kind, Navier):
            y_fixed[idx, :] = True
    return DofMap(x_fixed=x_fixed, kappa_fixed=kappa_fixed, y_fixed=y_fixed)


def discrete_length(curve: PolygonalCurve, m: ConformalMetric) -> float:
    """L_g of the polygon: sum over elements of (q/2)(g^(1/2)(a)+g^(1/2)(b))."""
    geo = geometry(curve)
    sg = m.sqrt_weight(curve.nodes)
    fa, fb = geo.vertex_values(sg)
    return float(0.5 * np.sum(geo.q * (fa + fb)))


def discrete_elastic_energy(
    kappa_g: np.ndarray,
    curve: PolygonalCurve,
    m: ConformalMetric,
    rule=None,
) -> float:
    """(1/2)(kappa_g^2, |X_rho|_g) with the given quadrature.

    rule None or MassLumped-like uses vertex lumping; a Gauss rule samples
    the piecewise-linear kappa_g and the metric at interior points.
    """
    geo = geometry(curve)
    kappa_g = np.asarray(kappa_g, dtype=float)
    if rule is None or getattr(rule, "name", "lumped") == "lumped":
        sg = m.sqrt_weight(curve.nodes)
        fa, fb = geo.vertex_values(sg * kappa_g ** 2)
        return float(0.25 * np.sum(geo.q * (fa + fb)))
    P = geo.elem_points(rule.alpha)
    sg = m.sqrt_weight(P)
    ka, kb = geo.vertex_values(kappa_g)
    kP = rule.alpha[None, :] * ka[:, None] + (1.0 - rule.alpha)[None, :] * kb[:, None]
    return float(0.5 * np.sum(geo.q[:, None] * rule.w[None, :] * sg * kP ** 2))
