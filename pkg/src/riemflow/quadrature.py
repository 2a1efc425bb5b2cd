"""Discrete inner products on the uniform parameter mesh.

Two rules are used by the schemes: mass lumping (vertex trapezoid with
one-sided limits, so piecewise-constant element data is allowed) and a
per-element Gauss rule that is exact for polynomials up to degree five.

The parameter mesh is uniform with h = 1/J and h always cancels against
|X_rho| = chord/h, so every evaluator here takes chord lengths directly
and never sees h.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["MassLumped", "Gauss", "default_gauss", "inner_lumped", "inner_gauss"]


@dataclass(frozen=True)
class MassLumped:
    """Vertex trapezoid rule with one-sided limits at the vertices."""

    name: str = "lumped"


@dataclass(frozen=True)
class Gauss:
    """Per-element rule with points alpha in [0, 1] and weights summing to 1.

    A point with coordinate alpha evaluates at alpha*q_{j-1} + (1-alpha)*q_j,
    i.e. alpha = 1 is the left endpoint of the element.
    """

    alpha: np.ndarray
    w: np.ndarray
    name: str = field(default="gauss", compare=False)

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if alpha.ndim != 1 or w.shape != alpha.shape:
            raise ValueError("alpha and w must be 1d arrays of equal length")
        if np.any((alpha < 0.0) | (alpha > 1.0)) or np.any(w <= 0.0):
            raise ValueError("alpha must lie in [0,1], weights must be positive")
        if len(np.unique(alpha)) != len(alpha):
            raise ValueError("alpha values must be distinct")
        if abs(w.sum() - 1.0) > 1e-13:
            raise ValueError("weights must sum to 1")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "w", w)

    def integrate_reference(self, f) -> float:
        """Integral of f over [0, 1] (single element, rho = 1 - alpha)."""
        return float(np.dot(self.w, f(1.0 - self.alpha)))


def default_gauss() -> Gauss:
    """3-point Gauss-Legendre on [0, 1], exact up to degree 5."""
    r = np.sqrt(3.0 / 5.0)
    alpha = np.array([(1.0 - r) / 2.0, 0.5, (1.0 + r) / 2.0])
    w = np.array([5.0, 8.0, 5.0]) / 18.0
    return Gauss(alpha=alpha, w=w)


def inner_lumped(q: np.ndarray, f_left: np.ndarray, f_right: np.ndarray) -> float:
    """Mass-lumped inner product from per-element one-sided vertex samples.

    q[j] is the chord length of element j; f_left[j], f_right[j] are the
    integrand limits at the element's first and second endpoint taken from
    inside the element.  Returns sum_j (q_j/2)(f_left[j] + f_right[j]).
    """
    return float(0.5 * np.sum(q * (f_left + f_right)))


def inner_gauss(rule: Gauss, q: np.ndarray, f_points: np.ndarray) -> float:
    """Gauss inner product from samples f_points with shape (n_elem, K)."""
    return float(np.sum(q[:, None] * rule.w[None, :] * f_points))
