"""Conformal metric families g(z) * (Euclidean inner product) on a domain H.

Every family exposes the derivative quantities the time-stepping schemes
need: the weight g, half-log gradient (1/2) grad ln g, the gradient and
Hessian of g^(1/2), the half-log Hessian (1/2) D^2 ln g, the Gaussian
curvature, and (where available) the convexity splitting
g^(1/2) = g^(1/2)_+ + g^(1/2)_-.

All evaluators are vectorized: ``z`` may have shape (2,) or (..., 2) and
the result keeps the leading shape.  Quantities that stay bounded on the
degenerate axis x1 = 0 (for the power-law family with mu <= -1 and the
Angenent family) are provided in fused form (grad_half, hess_half);
half_grad_log raises DegenerateError where g vanishes so that no caller
can accidentally form a 0 * inf product there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, DomainError, UnsupportedBoundary, UnsupportedSplit

__all__ = [
    "ConformalMetric",
    "PowerLaw",
    "Disk",
    "Mercator",
    "Catenoid",
    "Torus",
    "Angenent",
    "Cone",
    "PhaseField",
    "Quartic",
    "QuarticAsym",
    "WrapCell",
    "GNS_U0",
    "GNS_U",
]

TWO_PI = 2.0 * np.pi

# Affine chart of the Gibbs simplex: u = GNS_U0 + GNS_U @ z maps the plane
# into the plane {u1 + u2 + u3 = 1}, with f(0,0) = e1, f(-sqrt2, 0) = e2
# and f(-sqrt2, -sqrt(3/2)) = e3.
GNS_U0 = np.array([1.0, 0.0, 0.0])
GNS_U = np.array(
    [
        [2.0 ** -0.5, 6.0 ** -0.5],
        [-(2.0 ** -0.5), 6.0 ** -0.5],
        [0.0, -((2.0 / 3.0) ** 0.5)],
    ]
)


@dataclass(frozen=True)
class WrapCell:
    """Periodic identifications of the chart, when the surface demands them."""

    period1: float | None = None
    period2: float | None = None

    def __post_init__(self):
        for p in (self.period1, self.period2):
            if p is not None and not p > 0.0:
                raise ValueError("wrap periods must be positive")

    @property
    def periods(self) -> tuple[float | None, float | None]:
        return (self.period1, self.period2)


def _as_points(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != 2:
        raise ValueError("points must have trailing dimension 2")
    if not np.all(np.isfinite(z)):
        raise DomainError("non-finite point coordinates")
    return z


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., :, None] * b[..., None, :]


def _e1_outer(coeff: np.ndarray) -> np.ndarray:
    out = np.zeros(coeff.shape + (2, 2))
    out[..., 0, 0] = coeff
    return out


def _e2_outer(coeff: np.ndarray) -> np.ndarray:
    out = np.zeros(coeff.shape + (2, 2))
    out[..., 1, 1] = coeff
    return out


class ConformalMetric:
    """Base class; subclasses implement the per-family formulas."""

    split_supported: bool = False
    axis_supported: bool = False

    # -- domain ---------------------------------------------------------

    def domain_contains(self, z) -> np.ndarray | bool:
        raise NotImplementedError

    def wrap_cell(self) -> WrapCell:
        return WrapCell()

    def check_domain(self, z, allow_axis: bool = False) -> np.ndarray:
        """Validate membership in H; axis points x1 = 0 pass if allowed."""
        z = _as_points(z)
        ok = np.asarray(self.domain_contains(z))
        if allow_axis and self.axis_supported:
            ok = ok | (z[..., 0] == 0.0)
        if not np.all(ok):
            raise DomainError(f"point outside metric domain: {z[~ok][:1]}")
        return z

    # -- derivative quantities -------------------------------------------

    def weight(self, z) -> np.ndarray:
        z = self.check_domain(z, allow_axis=True)
        return self._weight(z)

    def sqrt_weight(self, z) -> np.ndarray:
        return np.sqrt(self.weight(z))

    def half_grad_log(self, z) -> np.ndarray:
        """(1/2) grad ln g.  Raises DegenerateError where g vanishes."""
        z = self.check_domain(z, allow_axis=True)
        if np.any(self._weight(z) == 0.0):
            raise DegenerateError("half_grad_log evaluated where g = 0; use the fused grad_half")
        return self._half_grad_log(z)

    def grad_half(self, z) -> np.ndarray:
        """grad g^(1/2), in fused (axis-safe) form."""
        z = self.check_domain(z, allow_axis=True)
        return self._grad_half(z)

    def half_hess_log(self, z) -> np.ndarray:
        """(1/2) D^2 ln g as a (..., 2, 2) symmetric matrix."""
        z = self.check_domain(z, allow_axis=True)
        if np.any(self._weight(z) == 0.0):
            raise DegenerateError("half_hess_log evaluated where g = 0")
        return self._half_hess_log(z)

    def hess_half(self, z) -> np.ndarray:
        """D^2 g^(1/2), fused (axis-safe) form; used by Newton Jacobians."""
        z = self.check_domain(z, allow_axis=True)
        return self._hess_half(z)

    def gauss_curvature(self, z) -> np.ndarray:
        z = self.check_domain(z)
        return self._gauss_curvature(z)

    # -- convexity splitting ----------------------------------------------

    def grad_half_minus(self, z) -> np.ndarray:
        raise UnsupportedSplit(f"no convexity splitting for {type(self).__name__}")

    def hess_half_minus(self, z) -> np.ndarray:
        raise UnsupportedSplit(f"no convexity splitting for {type(self).__name__}")

    def split_grad(self, z_new, z_old) -> np.ndarray:
        """grad g^(1/2)_+(z_new) + grad g^(1/2)_-(z_old)."""
        z_new = self.check_domain(z_new, allow_axis=True)
        z_old = self.check_domain(z_old, allow_axis=True)
        return (
            self.grad_half(z_new)
            - self.grad_half_minus(z_new)
            + self.grad_half_minus(z_old)
        )

    def hess_half_plus(self, z) -> np.ndarray:
        return self.hess_half(z) - self.hess_half_minus(z)

    # -- degenerate axis ---------------------------------------------------

    def degenerate_axis_data(self, kappa, X, omega):
        """Axis-vertex branch of the K operator; only for axis-capable metrics."""
        raise UnsupportedBoundary(
            f"{type(self).__name__} does not extend by zero to the x2-axis"
        )

    # -- hooks -------------------------------------------------------------

    def _weight(self, z):
        raise NotImplementedError

    def _half_grad_log(self, z):
        raise NotImplementedError

    def _grad_half(self, z):
        raise NotImplementedError

    def _half_hess_log(self, z):
        raise NotImplementedError

    def _hess_half(self, z):
        raise NotImplementedError

    def _gauss_curvature(self, z):
        raise NotImplementedError


@dataclass(frozen=True)
class PowerLaw(ConformalMetric):
    """g(z) = x1^(-2 mu) on the half-plane (mu = 0: Euclidean plane)."""

    mu: float = 0.0

    @property
    def split_supported(self) -> bool:  # type: ignore[override]
        return True

    @property
    def axis_supported(self) -> bool:  # type: ignore[override]
        return self.mu <= -1.0

    def domain_contains(self, z):
        z = _as_points(z)
        if self.mu == 0.0:
            return np.ones(z.shape[:-1], dtype=bool)
        return z[..., 0] > 0.0

    def _weight(self, z):
        x = z[..., 0]
        if self.mu == 0.0:
            return np.ones_like(x)
        with np.errstate(divide="ignore"):
            return np.power(x, -2.0 * self.mu)

    def _half_grad_log(self, z):
        out = np.zeros_like(z)
        if self.mu != 0.0:
            out[..., 0] = -self.mu / z[..., 0]
        return out

    def _grad_half(self, z):
        out = np.zeros_like(z)
        if self.mu != 0.0:
            out[..., 0] = -self.mu * np.power(z[..., 0], -(self.mu + 1.0))
        return out

    def _half_hess_log(self, z):
        if self.mu == 0.0:
            return np.zeros(z.shape[:-1] + (2, 2))
        return _e1_outer(self.mu / z[..., 0] ** 2)

    def _hess_half(self, z):
        if self.mu == 0.0:
            return np.zeros(z.shape[:-1] + (2, 2))
        return _e1_outer(self.mu * (self.mu + 1.0) * np.power(z[..., 0], -(self.mu + 2.0)))

    def _gauss_curvature(self, z):
        return -self.mu * np.power(z[..., 0], 2.0 * (self.mu - 1.0))

    def grad_half_minus(self, z):
        return np.zeros_like(_as_points(z))

    def hess_half_minus(self, z):
        z = _as_points(z)
        return np.zeros(z.shape[:-1] + (2, 2))

    def degenerate_axis_data(self, kappa, X, omega):
        if self.mu > -1.0:
            raise UnsupportedBoundary("axis endpoints need mu <= -1")
        return (1.0 - self.mu) * np.asarray(kappa, dtype=float)


@dataclass(frozen=True)
class Disk(ConformalMetric):
    """g(z) = 4 / (1 - alpha |z|^2)^2 (alpha = 1: hyperbolic disk)."""

    alpha: float = 1.0
    split_supported = True

    def domain_contains(self, z):
        z = _as_points(z)
        if self.alpha <= 0.0:
            return np.ones(z.shape[:-1], dtype=bool)
        return np.einsum("...i,...i->...", z, z) < 1.0 / self.alpha

    def _denom(self, z):
        return 1.0 - self.alpha * np.einsum("...i,...i->...", z, z)

    def _weight(self, z):
        return 4.0 / self._denom(z) ** 2

    def _half_grad_log(self, z):
        return (2.0 * self.alpha / self._denom(z))[..., None] * z

    def _grad_half(self, z):
        return (4.0 * self.alpha / self._denom(z) ** 2)[..., None] * z

    def _half_hess_log(self, z):
        d = self._denom(z)
        eye = np.broadcast_to(np.eye(2), z.shape[:-1] + (2, 2))
        return (2.0 * self.alpha / d)[..., None, None] * eye + (
            4.0 * self.alpha ** 2 / d ** 2
        )[..., None, None] * _outer(z, z)

    def _hess_half(self, z):
        d = self._denom(z)
        eye = np.broadcast_to(np.eye(2), z.shape[:-1] + (2, 2))
        return (4.0 * self.alpha / d ** 2)[..., None, None] * eye + (
            16.0 * self.alpha ** 2 / d ** 3
        )[..., None, None] * _outer(z, z)

    def _gauss_curvature(self, z):
        return np.full(z.shape[:-1], -self.alpha)

    def grad_half_minus(self, z):
        return 4.0 * min(0.0, self.alpha) * _as_points(z)

    def hess_half_minus(self, z):
        z = _as_points(z)
        eye = np.broadcast_to(np.eye(2), z.shape[:-1] + (2, 2))
        return 4.0 * min(0.0, self.alpha) * eye


@dataclass(frozen=True)
class Mercator(ConformalMetric):
    """g(z) = cosh^(-2)(x1): conformal chart of the unit sphere."""

    split_supported = True

    def domain_contains(self, z):
        z = _as_points(z)
        return np.ones(z.shape[:-1], dtype=bool)

    def _weight(self, z):
        return np.cosh(z[..., 0]) ** -2

    def _half_grad_log(self, z):
        out = np.zeros_like(z)
        out[..., 0] = -np.tanh(z[..., 0])
        return out

    def _grad_half(self, z):
        out = np.zeros_like(z)
        x = z[..., 0]
        out[..., 0] = -np.tanh(x) / np.cosh(x)
        return out

    def _half_hess_log(self, z):
        return _e1_outer(-np.cosh(z[..., 0]) ** -2)

    def _hess_half(self, z):
        x = z[..., 0]
        sech = 1.0 / np.cosh(x)
        return _e1_outer(sech * (np.tanh(x) ** 2 - sech ** 2))

    def _gauss_curvature(self, z):
        return np.ones(z.shape[:-1])

    def grad_half_minus(self, z):
        z = _as_points(z)
        out = np.zeros_like(z)
        out[..., 0] = -z[..., 0]
        return out

    def hess_half_minus(self, z):
        z = _as_points(z)
        return _e1_outer(-np.ones(z.shape[:-1]))


@dataclass(frozen=True)
class Catenoid(ConformalMetric):
    """g(z) = cosh^2(x1): conformal chart of the catenoid."""

    split_supported = True

    def domain_contains(self, z):
        z = _as_points(z)
        return np.ones(z.shape[:-1], dtype=bool)

    def wrap_cell(self):
        return WrapCell(period2=TWO_PI)

    def _weight(self, z):
        return np.cosh(z[..., 0]) ** 2

    def _half_grad_log(self, z):
        out = np.zeros_like(z)
        out[..., 0] = np.tanh(z[..., 0])
        return out

    def _grad_half(self, z):
        out = np.zeros_like(z)
        out[..., 0] = np.sinh(z[..., 0])
        return out

    def _half_hess_log(self, z):
        return _e1_outer(np.cosh(z[..., 0]) ** -2)

    def _hess_half(self, z):
        return _e1_outer(np.cosh(z[..., 0]))

    def _gauss_curvature(self, z):
        return -np.cosh(z[..., 0]) ** -4

    def grad_half_minus(self, z):
        return np.zeros_like(_as_points(z))

    def hess_half_minus(self, z):
        z = _as_points(z)
        return np.zeros(z.shape[:-1] + (2, 2))


@dataclass(frozen=True)
class Torus(ConformalMetric):
    """g(z) = s^2 (sqrt(s^2+1) - cos x2)^(-2): torus with radii sqrt(1+s^2), 1."""

    s: float = 1.0
    split_supported = True

    def __post_init__(self):
        if not self.s > 0.0:
            raise ValueError("Torus.s must be positive")

    @property
    def c(self) -> float:
        return np.sqrt(self.s ** 2 + 1.0)

    def domain_contains(self, z):
        z = _as_points(z)
        return np.ones(z.shape[:-1], dtype=bool)

    def wrap_cell(self):
        return WrapCell(period1=TWO_PI * self.s, period2=TWO_PI)

    def _den(self, z):
        return self.c - np.cos(z[..., 1])

    def _weight(self, z):
        return self.s ** 2 / self._den(z) ** 2

    def _half_grad_log(self, z):
        out = np.zeros_like(z)
        out[..., 1] = -np.sin(z[..., 1]) / self._den(z)
        return out

    def _grad_half(self, z):
        out = np.zeros_like(z)
        out[..., 1] = -self.s * np.sin(z[..., 1]) / self._den(z) ** 2
        return out

    def _half_hess_log(self, z):
        y = z[..., 1]
        return _e2_outer((1.0 - self.c * np.cos(y)) / self._den(z) ** 2)

    def _hess_half(self, z):
        y = z[..., 1]
        d = self._den(z)
        return _e2_outer(-self.s * (np.cos(y) * d - 2.0 * np.sin(y) ** 2) / d ** 3)

    def _gauss_curvature(self, z):
        return (self.c * np.cos(z[..., 1]) - 1.0) / self.s ** 2

    def grad_half_minus(self, z):
        z = _as_points(z)
        out = np.zeros_like(z)
        out[..., 1] = -self.s * z[..., 1] / (self.c - 1.0) ** 2
        return out

    def hess_half_minus(self, z):
        z = _as_points(z)
        return _e2_outer(np.full(z.shape[:-1], -self.s / (self.c - 1.0) ** 2))


@dataclass(frozen=True)
class Angenent(ConformalMetric):
    """g(z) = x1^(2(n-1)) exp(-|z|^2/2) on the half-plane.

    Geodesics generate axisymmetric self-shrinkers for mean curvature flow
    in R^(n+1).  The convexity splitting is available for n = 2 only, with
    the shift constant R = 1.29.
    """

    n: int = 2
    axis_supported = True

    SPLIT_R = 1.29

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("Angenent.n must be an integer >= 2")

    @property
    def split_supported(self) -> bool:  # type: ignore[override]
        return self.n == 2

    def domain_contains(self, z):
        z = _as_points(z)
        return z[..., 0] > 0.0

    def _weight(self, z):
        x = z[..., 0]
        r2 = np.einsum("...i,...i->...", z, z)
        return np.power(x, 2 * (self.n - 1)) * np.exp(-0.5 * r2)

    def _half_grad_log(self, z):
        out = -0.5 * z
        out[..., 0] += (self.n - 1) / z[..., 0]
        return out

    def _grad_half(self, z):
        x, y = z[..., 0], z[..., 1]
        env = np.exp(-0.25 * np.einsum("...i,...i->...", z, z))
        out = np.empty_like(z)
        out[..., 0] = env * np.power(x, self.n - 2) * (self.n - 1.0 - 0.5 * x ** 2)
        out[..., 1] = -0.5 * env * np.power(x, self.n - 1) * y
        return out

    def _half_hess_log(self, z):
        x = z[..., 0]
        out = np.zeros(z.shape[:-1] + (2, 2))
        out[..., 0, 0] = -(self.n - 1) / x ** 2 - 0.5
        out[..., 1, 1] = -0.5
        return out

    def _hess_half(self, z):
        n = self.n
        x, y = z[..., 0], z[..., 1]
        env = np.exp(-0.25 * np.einsum("...i,...i->...", z, z))
        core = self.n - 1.0 - 0.5 * x ** 2
        out = np.empty(z.shape[:-1] + (2, 2))
        if n == 2:
            d11 = env * (-1.5 * x + 0.25 * x ** 3)
        else:
            # x^(n-3) is safe at the axis only for n >= 3
            d11 = env * (
                (n - 2) * np.power(x, n - 3) * core
                - 0.5 * np.power(x, n - 2) * x * core
                - np.power(x, n - 1)
            )
        d12 = -0.5 * y * env * np.power(x, n - 2) * core
        d22 = -0.5 * env * np.power(x, n - 1) * (1.0 - 0.5 * y ** 2)
        out[..., 0, 0] = d11
        out[..., 0, 1] = d12
        out[..., 1, 0] = d12
        out[..., 1, 1] = d22
        return out

    def _gauss_curvature(self, z):
        x = z[..., 0]
        r2 = np.einsum("...i,...i->...", z, z)
        return np.power(x, -2 * self.n) * (self.n - 1.0 + x ** 2) * np.exp(0.5 * r2)

    def grad_half_minus(self, z):
        if self.n != 2:
            raise UnsupportedSplit("Angenent splitting only available for n = 2")
        return -self.SPLIT_R * _as_points(z)

    def hess_half_minus(self, z):
        if self.n != 2:
            raise UnsupportedSplit("Angenent splitting only available for n = 2")
        z = _as_points(z)
        eye = np.broadcast_to(np.eye(2), z.shape[:-1] + (2, 2))
        return -self.SPLIT_R * eye

    def degenerate_axis_data(self, kappa, X, omega):
        X = np.asarray(X, dtype=float)
        omega = np.asarray(omega, dtype=float)
        return self.n * np.asarray(kappa, dtype=float) + 0.5 * X[..., 1] * omega[..., 1]


@dataclass(frozen=True)
class Cone(ConformalMetric):
    """g(z) = b^2/(1-b^2) exp(2 b x1): right circular cone without the apex."""

    b: float = 0.5
    split_supported = True

    def __post_init__(self):
        if not 0.0 < self.b < 1.0:
            raise ValueError("Cone.b must lie in (0, 1)")

    def domain_contains(self, z):
        z = _as_points(z)
        return np.ones(z.shape[:-1], dtype=bool)

    def wrap_cell(self):
        return WrapCell(period2=TWO_PI)

    def _weight(self, z):
        b = self.b
        return b ** 2 / (1.0 - b ** 2) * np.exp(2.0 * b * z[..., 0])

    def _half_grad_log(self, z):
        out = np.zeros_like(z)
        out[..., 0] = self.b
        return out

    def _grad_half(self, z):
        b = self.b
        out = np.zeros_like(z)
        out[..., 0] = b ** 2 / np.sqrt(1.0 - b ** 2) * np.exp(b * z[..., 0])
        return out

    def _half_hess_log(self, z):
        return np.zeros(z.shape[:-1] + (2, 2))

    def _hess_half(self, z):
        b = self.b
        return _e1_outer(b ** 3 / np.sqrt(1.0 - b ** 2) * np.exp(b * z[..., 0]))

    def _gauss_curvature(self, z):
        return np.zeros(z.shape[:-1])

    def grad_half_minus(self, z):
        return np.zeros_like(_as_points(z))

    def hess_half_minus(self, z):
        z = _as_points(z)
        return np.zeros(z.shape[:-1] + (2, 2))


# -- multi-well potentials for the phase-field metric ----------------------


@dataclass(frozen=True)
class Quartic:
    """sigma_12 u1^2 u2^2 + sigma_13 u1^2 u3^2 + sigma_23 u2^2 u3^2
    + sigma_123 u1^2 u2^2 u3^2."""

    s12: float
    s13: float
    s23: float
    s123: float = 0.0

    def __post_init__(self):
        if min(self.s12, self.s13, self.s23) <= 0.0 or self.s123 < 0.0:
            raise ValueError("pairwise coefficients must be positive, s123 >= 0")

    def value(self, u):
        u1, u2, u3 = u[..., 0], u[..., 1], u[..., 2]
        return (
            self.s12 * u1 ** 2 * u2 ** 2
            + self.s13 * u1 ** 2 * u3 ** 2
            + self.s23 * u2 ** 2 * u3 ** 2
            + self.s123 * u1 ** 2 * u2 ** 2 * u3 ** 2
        )

    def grad(self, u):
        u1, u2, u3 = u[..., 0], u[..., 1], u[..., 2]
        out = np.empty_like(u)
        out[..., 0] = 2 * u1 * (self.s12 * u2 ** 2 + self.s13 * u3 ** 2 + self.s123 * u2 ** 2 * u3 ** 2)
        out[..., 1] = 2 * u2 * (self.s12 * u1 ** 2 + self.s23 * u3 ** 2 + self.s123 * u1 ** 2 * u3 ** 2)
        out[..., 2] = 2 * u3 * (self.s13 * u1 ** 2 + self.s23 * u2 ** 2 + self.s123 * u1 ** 2 * u2 ** 2)
        return out

    def hess(self, u):
        u1, u2, u3 = u[..., 0], u[..., 1], u[..., 2]
        out = np.empty(u.shape[:-1] + (3, 3))
        out[..., 0, 0] = 2 * (self.s12 * u2 ** 2 + self.s13 * u3 ** 2 + self.s123 * u2 ** 2 * u3 ** 2)
        out[..., 1, 1] = 2 * (self.s12 * u1 ** 2 + self.s23 * u3 ** 2 + self.s123 * u1 ** 2 * u3 ** 2)
        out[..., 2, 2] = 2 * (self.s13 * u1 ** 2 + self.s23 * u2 ** 2 + self.s123 * u1 ** 2 * u2 ** 2)
        out[..., 0, 1] = out[..., 1, 0] = 4 * u1 * u2 * (self.s12 + self.s123 * u3 ** 2)
        out[..., 0, 2] = out[..., 2, 0] = 4 * u1 * u3 * (self.s13 + self.s123 * u2 ** 2)
        out[..., 1, 2] = out[..., 2, 1] = 4 * u2 * u3 * (self.s23 + self.s123 * u1 ** 2)
        return out


@dataclass(frozen=True)
class QuarticAsym:
    """Quartic pairwise wells plus the asymmetric triple terms
    sh123 u1 u2 u3^2 + sh231 u2 u3 u1^2 + sh312 u3 u1 u2^2."""

    s12: float
    s13: float
    s23: float
    sh123: float = 0.0
    sh231: float = 0.0
    sh312: float = 0.0

    def __post_init__(self):
        if min(self.s12, self.s13, self.s23) <= 0.0:
            raise ValueError("pairwise coefficients must be positive")
        if min(self.sh123, self.sh231, self.sh312) < 0.0:
            raise ValueError("triple coefficients must be nonnegative")

    def _pairwise(self):
        return Quartic(self.s12, self.s13, self.s23, 0.0)

    def value(self, u):
        u1, u2, u3 = u[..., 0], u[..., 1], u[..., 2]
        return (
            self._pairwise().value(u)
            + self.sh123 * u1 * u2 * u3 ** 2
            + self.sh231 * u2 * u3 * u1 ** 2
            + self.sh312 * u3 * u1 * u2 ** 2
        )

    def grad(self, u):
        u1, u2, u3 = u[..., 0], u[..., 1], u[..., 2]
        out = self._pairwise().grad(u)
        out[..., 0] += self.sh123 * u2 * u3 ** 2 + 2 * self.sh231 * u1 * u2 * u3 + self.sh312 * u3 * u2 ** 2
        out[..., 1] += self.sh123 * u1 * u3 ** 2 + self.sh231 * u3 * u1 ** 2 + 2 * self.sh312 * u1 * u2 * u3
        out[..., 2] += 2 * self.sh123 * u1 * u2 * u3 + self.sh231 * u2 * u1 ** 2 + self.sh312 * u1 * u2 ** 2
        return out

    def hess(self, u):
        u1, u2, u3 = u[..., 0], u[..., 1], u[..., 2]
        out = self._pairwise().hess(u)
        out[..., 0, 0] += 2 * self.sh231 * u2 * u3
        out[..., 1, 1] += 2 * self.sh312 * u1 * u3
        out[..., 2, 2] += 2 * self.sh123 * u1 * u2
        d01 = self.sh123 * u3 ** 2 + 2 * self.sh231 * u1 * u3 + 2 * self.sh312 * u2 * u3
        d02 = 2 * self.sh123 * u2 * u3 + 2 * self.sh231 * u1 * u2 + self.sh312 * u2 ** 2
        d12 = 2 * self.sh123 * u1 * u3 + self.sh231 * u1 ** 2 + 2 * self.sh312 * u1 * u2
        out[..., 0, 1] += d01
        out[..., 1, 0] += d01
        out[..., 0, 2] += d02
        out[..., 2, 0] += d02
        out[..., 1, 2] += d12
        out[..., 2, 1] += d12
        return out


@dataclass(frozen=True)
class PhaseField(ConformalMetric):
    """g(z) = Psi(u0 + U z): Ginzburg-Landau interface-profile metric.

    The weight vanishes at the pure-phase preimages, so derivative
    quantities built on ln g are undefined exactly there; callers keep
    those points at fixed (Dirichlet) endpoints.
    """

    psi: Quartic | QuarticAsym
    u0: np.ndarray = field(default_factory=lambda: GNS_U0.copy())
    U: np.ndarray = field(default_factory=lambda: GNS_U.copy())

    def __post_init__(self):
        u0 = np.asarray(self.u0, dtype=float).reshape(3)
        U = np.asarray(self.U, dtype=float).reshape(3, 2)
        if np.max(np.abs(U.T @ U - np.eye(2))) > 1e-12:
            raise ValueError("PhaseField.U must have orthonormal columns")
        object.__setattr__(self, "u0", u0)
        object.__setattr__(self, "U", U)

    def domain_contains(self, z):
        z = _as_points(z)
        return np.ones(z.shape[:-1], dtype=bool)

    def to_simplex(self, z):
        z = _as_points(z)
        return self.u0 + z @ self.U.T

    def _weight(self, z):
        return self.psi.value(self.to_simplex(z))

    def _grad_g(self, z):
        return self.psi.grad(self.to_simplex(z)) @ self.U

    def _hess_g(self, z):
        H = self.psi.hess(self.to_simplex(z))
        return np.einsum("ia,...ij,jb->...ab", self.U, H, self.U)

    def _half_grad_log(self, z):
        return self._grad_g(z) / (2.0 * self._weight(z))[..., None]

    def _grad_half(self, z):
        return self._grad_g(z) / (2.0 * np.sqrt(self._weight(z)))[..., None]

    def _half_hess_log(self, z):
        g = self._weight(z)
        dg = self._grad_g(z)
        return self._hess_g(z) / (2.0 * g)[..., None, None] - _outer(dg, dg) / (
            2.0 * g ** 2
        )[..., None, None]

    def _hess_half(self, z):
        g = self._weight(z)
        dg = self._grad_g(z)
        return self._hess_g(z) / (2.0 * np.sqrt(g))[..., None, None] - _outer(dg, dg) / (
            4.0 * g ** 1.5
        )[..., None, None]

    def _gauss_curvature(self, z):
        hhl = self._half_hess_log(z)
        return -(hhl[..., 0, 0] + hhl[..., 1, 1]) / self._weight(z)
