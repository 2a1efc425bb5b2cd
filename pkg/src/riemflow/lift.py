"""Conformal parameterisations lifting planar coordinate curves onto the
surfaces they represent, and the affine map onto the Gibbs simplex.

Each lift Phi satisfies the conformality contract

    |d1 Phi|^2 = |d2 Phi|^2 = g,   d1 Phi . d2 Phi = 0,

with g the matching metric weight; this is the defining (and tested)
property of the formulas below.
"""

from __future__ import annotations

import numpy as np

from .metrics import (
    GNS_U,
    GNS_U0,
    Catenoid,
    ConformalMetric,
    Cone,
    Mercator,
    PhaseField,
    Torus,
)

__all__ = [
    "lift_sphere",
    "lift_catenoid",
    "lift_cone",
    "lift_torus",
    "simplex_map",
    "lift_for_metric",
]


def _as_points(z) -> tuple[np.ndarray, bool]:
    z = np.asarray(z, dtype=float)
    single = z.ndim == 1
    return np.atleast_2d(z), single


def _pack(cols, single):
    out = np.stack(cols, axis=-1)
    return out[0] if single else out


def lift_sphere(z) -> np.ndarray:
    """Inverse Mercator chart onto the unit sphere; (0, theta) is the equator."""
    z, single = _as_points(z)
    sech = 1.0 / np.cosh(z[:, 0])
    return _pack(
        [sech * np.cos(z[:, 1]), sech * np.sin(z[:, 1]), np.tanh(z[:, 0])], single
    )


def lift_catenoid(z) -> np.ndarray:
    """Standard catenoid chart; (0, theta) is the neck circle of radius 1."""
    z, single = _as_points(z)
    r = np.cosh(z[:, 0])
    return _pack([r * np.cos(z[:, 1]), r * np.sin(z[:, 1]), z[:, 0]], single)


def lift_cone(b: float, z) -> np.ndarray:
    """Chart onto the cone of slope parameter b in (0, 1); z2 is 2*pi-periodic."""
    z, single = _as_points(z)
    beta = b / np.sqrt(1.0 - b * b)
    env = np.exp(b * z[:, 0])
    return _pack(
        [env * beta * np.cos(z[:, 1]), env * beta * np.sin(z[:, 1]), env], single
    )


def lift_torus(s: float, z) -> np.ndarray:
    """Chart onto the torus with radii (sqrt(1+s^2), 1); x2 = 0 is the outer
    equator.  theta = z1/s runs along the large circle; the small angle phi
    is the Gudermann-type reparameterisation of z2 that makes the chart
    conformal."""
    z, single = _as_points(z)
    R = np.sqrt(1.0 + s * s)
    theta = z[:, 0] / s
    k = np.sqrt((R + 1.0) / (R - 1.0))
    phi = 2.0 * np.arctan2(k * np.sin(0.5 * z[:, 1]), np.cos(0.5 * z[:, 1]))
    rho = R + np.cos(phi)
    return _pack([rho * np.cos(theta), rho * np.sin(theta), np.sin(phi)], single)


def simplex_map(z, u0: np.ndarray | None = None, U: np.ndarray | None = None):
    """Affine map u0 + U z onto the Gibbs simplex; (0,0) is the first pure phase."""
    z, single = _as_points(z)
    u0 = GNS_U0 if u0 is None else np.asarray(u0, dtype=float)
    U = GNS_U if U is None else np.asarray(U, dtype=float)
    out = u0[None, :] + z @ U.T
    return out[0] if single else out


def lift_for_metric(m: ConformalMetric):
    """(kind, map) for the metric's surface representation, or (None, None).

    kind is "surface" (3d coordinates) or "simplex" (phase fractions).
    """
    if isinstance(m, Mercator):
        return "surface", lift_sphere
    if isinstance(m, Catenoid):
        return "surface", lift_catenoid
    if isinstance(m, Cone):
        return "surface", lambda z: lift_cone(m.b, z)
    if isinstance(m, Torus):
        return "surface", lambda z: lift_torus(m.s, z)
    if isinstance(m, PhaseField):
        return "simplex", lambda z: simplex_map(z, m.u0, m.U)
    return None, None
