"""Per-time-step algebraic systems for the three evolution schemes.

Schemes implemented on a polygonal curve with uniform parameter mesh:

* step_A: linear curvature-flow scheme with the mass-lumped inner product
  and the vertex operator that blends Euclidean curvature with the metric
  gradient (including its degenerate-axis branch).
* step_Cstar: nonlinear curvature-flow scheme with convexity splitting of
  g^(1/2); unconditionally stable, solved by Newton iteration with an
  analytic Jacobian.
* step_Q: linear elastic-flow scheme with unknowns (X, kappa_g, Y_g) and a
  configurable quadrature rule.

All systems are assembled in raw dof space (2 position dofs, 1 curvature
dof and, for the elastic scheme, 2 curvature-vector dofs per vertex), then
reduced by dropping constrained rows and columns; every boundary
constraint is homogeneous in the unknowns, so no inhomogeneous lift is
needed.  The reduced sparse systems are solved with a direct factorisation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .curve import (
    Clamped,
    CurveGeometry,
    DofMap,
    PolygonalCurve,
    dof_map,
    geometry,
)
from .errors import (
    AssumptionViolated,
    DegenerateElement,
    DegenerateError,
    DomainError,
    NewtonDiverged,
    SolveError,
)
from .metrics import ConformalMetric
from .quadrature import Gauss, MassLumped

__all__ = [
    "SchemeState",
    "NewtonConfig",
    "step_A",
    "step_Cstar",
    "step_Q",
    "assemble_initial_Q",
    "check_assumption_A",
    "check_assumption_B",
    "check_assumption_C",
]

RANK_TOL = 1e-10
DEGENERATE_G = 1e-13


@dataclass(frozen=True)
class SchemeState:
    """Unknowns carried between steps."""

    curve: PolygonalCurve
    t: float = 0.0
    step: int = 0
    kappa: np.ndarray | None = None
    kappa_g: np.ndarray | None = None
    Y_g: np.ndarray | None = None


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-10
    max_iter: int = 20

    def __post_init__(self):
        if self.tol <= 0.0 or self.max_iter < 1:
            raise ValueError("NewtonConfig needs tol > 0 and max_iter >= 1")


# -- quadrature plumbing ----------------------------------------------------


def _rule_points(rule) -> tuple[np.ndarray, np.ndarray]:
    """(alpha, w) arrays; mass lumping is the endpoint rule with one-sided
    element evaluation, which the element-wise sampling below realises."""
    if rule is None or isinstance(rule, MassLumped):
        return np.array([1.0, 0.0]), np.array([0.5, 0.5])
    if isinstance(rule, Gauss):
        return rule.alpha, rule.w
    raise TypeError(f"unsupported quadrature rule: {rule!r}")


class _QuadData:
    """Per-(element, quadrature point) samples used by the elastic scheme."""

    def __init__(self, geo: CurveGeometry, m: ConformalMetric, rule):
        alpha, w = _rule_points(rule)
        self.alpha = alpha
        self.w = w
        self.geo = geo
        P = geo.elem_points(alpha)
        self.P = P
        self.g = m.weight(P)
        self.sg = np.sqrt(self.g)
        self.gh = m.grad_half(P)
        if np.any(self.g == 0.0):
            raise DegenerateError(
                "metric weight vanishes at a quadrature point; "
                "use interior quadrature points (Gauss) near the axis"
            )
        self.hgl = m.half_grad_log(P)
        self.hhl = m.half_hess_log(P)
        # phi[t]: hat-function value of the element's t-th node at the points
        self.phi = np.stack([alpha[None, :] * np.ones((len(geo.q), 1)),
                             (1.0 - alpha)[None, :] * np.ones((len(geo.q), 1))])
        self.sigma = np.array([-1.0, 1.0])
        self.wq = w[None, :] * geo.q[:, None]

    def interp_vertex(self, f_vertex: np.ndarray) -> np.ndarray:
        """Sample a vertex field at the quadrature points, shape (J, K, ...)."""
        fa, fb = self.geo.vertex_values(f_vertex)
        al = self.alpha
        if f_vertex.ndim == 1:
            return al[None, :] * fa[:, None] + (1.0 - al)[None, :] * fb[:, None]
        return (
            al[None, :, None] * fa[:, None, :]
            + (1.0 - al)[None, :, None] * fb[:, None, :]
        )


# -- sparse assembly plumbing -----------------------------------------------


class _Triplets:
    def __init__(self):
        self.rows: list[np.ndarray] = []
        self.cols: list[np.ndarray] = []
        self.vals: list[np.ndarray] = []

    def add(self, rows, cols, vals):
        self.rows.append(np.asarray(rows).ravel())
        self.cols.append(np.asarray(cols).ravel())
        self.vals.append(np.asarray(vals, dtype=float).ravel())

    def matrix(self, shape) -> sp.csc_matrix:
        rows = np.concatenate(self.rows) if self.rows else np.zeros(0, dtype=int)
        cols = np.concatenate(self.cols) if self.cols else np.zeros(0, dtype=int)
        vals = np.concatenate(self.vals) if self.vals else np.zeros(0)
        return sp.coo_matrix((vals, (rows, cols)), shape=shape).tocsc()


def _reduction(free_flat: np.ndarray) -> tuple[np.ndarray, int]:
    """Raw-to-reduced index map (-1 at constrained dofs) and free count."""
    idx = -np.ones(free_flat.size, dtype=int)
    n_free = int(free_flat.sum())
    idx[free_flat] = np.arange(n_free)
    return idx, n_free


def _solve(matrix: sp.csc_matrix, rhs: np.ndarray) -> np.ndarray:
    if matrix.shape[0] != rhs.size:
        raise SolveError("system dimensions are inconsistent")
    try:
        sol = spla.spsolve(matrix, rhs)
    except Exception as exc:  # scipy raises several types on singularity
        raise SolveError(f"direct solve failed: {exc}") from exc
    if not np.all(np.isfinite(sol)):
        raise SolveError("singular reduced matrix (non-finite solution)")
    return np.asarray(sol)


# -- assumption checks --------------------------------------------------------


def _axis_vertex_mask(curve: PolygonalCurve) -> np.ndarray:
    from .curve import Axis

    mask = np.zeros(curve.n_nodes, dtype=bool)
    for idx, kind in curve.endpoint_kinds().items():
        if isinstance(kind, Axis):
            mask[idx] = True
    return mask


def check_assumption_A(geo: CurveGeometry) -> None:
    """Rank-2 span of the vertex normals away from the degenerate axis."""
    mask = ~_axis_vertex_mask(geo.curve)
    omega = geo.omega[mask]
    if omega.shape[0] < 2:
        raise AssumptionViolated("fewer than two off-axis vertex normals")
    s = np.linalg.svd(omega, compute_uv=False)
    if s[1] <= RANK_TOL:
        raise AssumptionViolated(
            f"vertex normals span a degenerate direction (sigma2 = {s[1]:.2e})"
        )


def check_assumption_B(qd: _QuadData) -> None:
    """Rank-2 span of the weighted-normal functionals of the elastic scheme."""
    geo = qd.geo
    n = geo.curve.n_nodes
    z = np.zeros((n, 2))
    for t, nodes in enumerate((geo.a, geo.b)):
        contrib = (qd.wq * qd.g * qd.phi[t])[:, :, None] * geo.nu[:, None, :]
        np.add.at(z, nodes, contrib.sum(axis=1))
    s = np.linalg.svd(z, compute_uv=False)
    if s[1] <= RANK_TOL:
        raise AssumptionViolated(
            f"weighted normal functionals degenerate (sigma2 = {s[1]:.2e})"
        )


def check_assumption_C(qd: _QuadData, dm: DofMap) -> None:
    """Injectivity of Y -> (stiffness rows, weighted-normal rows).

    Needed for uniqueness only when clamped endpoints are present.  The
    check builds the two coupling blocks explicitly and verifies full
    column rank on the free Y dofs.
    """
    geo = qd.geo
    n = geo.curve.n_nodes
    a, b = geo.a, geo.b
    trip = _Triplets()
    # (Z_s, chi_s |X_rho|_g) block over all position test dofs
    coeff = (qd.wq * qd.sg).sum(axis=1) / geo.q ** 2 * geo.q  # = sbar/q
    for t, tn in enumerate((a, b)):
        for u, un in enumerate((a, b)):
            val = coeff * qd.sigma[t] * qd.sigma[u]
            for c in range(2):
                trip.add(2 * tn + c, 2 * un + c, val)
    A1 = trip.matrix((2 * n, 2 * n))
    trip2 = _Triplets()
    # (g^(1/2) Z, chi nu |X_rho|_g) block over scalar test dofs
    for t, tn in enumerate((a, b)):
        for u, un in enumerate((a, b)):
            val = (qd.wq * qd.g * qd.phi[t] * qd.phi[u])[:, :, None] * geo.nu[:, None, :]
            for e in range(2):
                trip2.add(
                    np.repeat(tn, len(qd.alpha)),
                    np.repeat(2 * un + e, len(qd.alpha)),
                    val[:, :, e],
                )
    A2 = trip2.matrix((n, 2 * n))
    xfree = dm.x_free.ravel()
    yfree = dm.y_free.ravel()
    block = sp.vstack([A1[xfree][:, yfree], A2[:, yfree]]).toarray()
    s = np.linalg.svd(block, compute_uv=False)
    scale = s[0] if s[0] > 0 else 1.0
    if s[-1] <= 1e-10 * scale:
        raise AssumptionViolated(
            f"clamped uniqueness map rank-deficient (sigma_min/sigma_max = {s[-1] / scale:.2e})"
        )


# -- shared vertex-level pieces ----------------------------------------------


def _stiffness_triplets(trip: _Triplets, geo: CurveGeometry, s_elem: np.ndarray,
                        row_base: int, col_base: int) -> None:
    """Exact element stiffness sum_j s_j (dU . d eta)/q_j on position dofs."""
    a, b = geo.a, geo.b
    val = s_elem / geo.q
    for c in range(2):
        trip.add(row_base + 2 * b + c, col_base + 2 * b + c, val)
        trip.add(row_base + 2 * a + c, col_base + 2 * a + c, val)
        trip.add(row_base + 2 * b + c, col_base + 2 * a + c, -val)
        trip.add(row_base + 2 * a + c, col_base + 2 * b + c, -val)


def _stiffness_apply(geo: CurveGeometry, s_elem: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Action of the element stiffness on given element differences d."""
    n = geo.curve.n_nodes
    out = np.zeros((n, 2))
    contrib = (s_elem / geo.q)[:, None] * d
    np.add.at(out, geo.b, contrib)
    np.add.at(out, geo.a, -contrib)
    return out


def _curvature_operator(
    m: ConformalMetric,
    curve: PolygonalCurve,
    geo: CurveGeometry,
    g_vertex: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coefficients (lam, const, degenerate) of the vertex operator.

    At a vertex the operator applied to kappa reads lam*kappa + const;
    away from the axis lam = 1 and const = -omega . (1/2 grad ln g).
    Degenerate marks fully fixed vertices with vanishing weight, where the
    curvature dof decouples and is pinned to zero.
    """
    n = curve.n_nodes
    axis = _axis_vertex_mask(curve)
    lam = np.ones(n)
    const = np.zeros(n)
    degenerate = np.zeros(n, dtype=bool)
    dm = dof_map(curve)
    interior = ~axis
    g_ok = g_vertex > DEGENERATE_G
    use = interior & g_ok
    if np.any(use):
        hgl = m.half_grad_log(curve.nodes[use])
        const[use] = -np.einsum("ij,ij->i", geo.omega[use], hgl)
    bad = interior & ~g_ok
    if np.any(bad):
        fixed = dm.x_fixed.all(axis=1)
        if not np.all(fixed[bad]):
            raise DegenerateError(
                "metric weight vanishes at a free vertex; curvature operator undefined"
            )
        degenerate[bad] = True
    for idx in np.nonzero(axis)[0]:
        # affine axis branch: value = data(kappa=1)*k + data(kappa=0)
        c0 = m.degenerate_axis_data(0.0, curve.nodes[idx], geo.omega[idx])
        c1 = m.degenerate_axis_data(1.0, curve.nodes[idx], geo.omega[idx])
        lam[idx] = c1 - c0
        const[idx] = c0
    return lam, const, degenerate


def _finish_nodes(curve: PolygonalCurve, new_nodes: np.ndarray,
                  m: ConformalMetric) -> PolygonalCurve:
    """Re-pin axis endpoints and validate domain membership."""
    new_nodes = np.array(new_nodes, dtype=float)
    axis = _axis_vertex_mask(curve)
    new_nodes[axis, 0] = 0.0
    m.check_domain(new_nodes, allow_axis=True)
    return curve.with_nodes(new_nodes)


# -- scheme A ----------------------------------------------------------------


def step_A(
    state: SchemeState,
    m: ConformalMetric,
    dt: float,
    check_assumptions: bool = True,
) -> SchemeState:
    """One step of the linear mass-lumped curvature-flow scheme.

    Unknowns are the position update (in the constrained velocity space)
    and the curvature scalar at every vertex; the curvature equation uses
    the exact element stiffness, the velocity equation is fully lumped.
    """
    curve = state.curve
    geo = geometry(curve)
    if check_assumptions:
        check_assumption_A(geo)
    n = curve.n_nodes
    dm = dof_map(curve)
    g_v = m.weight(curve.nodes)
    lam, const, degen = _curvature_operator(m, curve, geo, g_v)
    M = geo.mass
    axis = _axis_vertex_mask(curve)

    xidx, nx = _reduction(dm.x_free.ravel())
    # unknown vector [delta X reduced | kappa (all vertices)]
    ndof = nx + n
    trip = _Triplets()
    rhs = np.zeros(ndof)

    # curvature equation rows (tests in the velocity space)
    raw = _Triplets()
    _stiffness_triplets(raw, geo, np.ones(geo.q.size), 0, 0)
    Kfull = raw.matrix((2 * n, 2 * n))
    xfree = dm.x_free.ravel()
    Kred = Kfull[xfree][:, xfree].tocoo()
    trip.add(Kred.row, Kred.col, Kred.data)
    # lumped pairing M_i omega_i kappa_i on the same rows
    lump = (M[:, None] * geo.omega).ravel()[xfree]
    rows = np.arange(2 * n)[xfree]
    trip.add(np.arange(nx), nx + rows // 2, lump)
    # right-hand side: minus stiffness applied to the current nodes
    lap = _stiffness_apply(geo, np.ones(geo.q.size), geo.d)
    rhs[:nx] = -lap.ravel()[xfree]

    # velocity equation rows (tests at every vertex)
    for i in range(n):
        row = nx + i
        if degen[i]:
            trip.add([row], [nx + i], [1.0])
            continue
        trip.add([row], [nx + i], [-M[i] * lam[i]])
        rhs[row] = M[i] * const[i]
        if axis[i] or g_v[i] <= DEGENERATE_G:
            continue
        for c in range(2):
            j = xidx[2 * i + c]
            if j >= 0:
                trip.add([row], [j], [M[i] * g_v[i] * geo.omega[i, c] / dt])

    sol = _solve(trip.matrix((ndof, ndof)), rhs)
    dX = np.zeros(2 * n)
    dX[xfree] = sol[:nx]
    kappa = sol[nx:]
    new_curve = _finish_nodes(curve, curve.nodes + dX.reshape(n, 2), m)
    return SchemeState(
        curve=new_curve, t=state.t + dt, step=state.step + 1, kappa=kappa
    )


# -- scheme C* ----------------------------------------------------------------


def step_Cstar(
    state: SchemeState,
    m: ConformalMetric,
    dt: float,
    newton: NewtonConfig | None = None,
    check_assumptions: bool = True,
) -> SchemeState:
    """One step of the nonlinear convexity-split curvature-flow scheme.

    Newton iteration on (delta X, kappa_g) with an analytic Jacobian; the
    only nonlinearity is the split-gradient term, which is evaluated at
    the new positions with the new element lengths.
    """
    newton = newton or NewtonConfig()
    curve = state.curve
    geo = geometry(curve)
    if check_assumptions:
        check_assumption_A(geo)
    n = curve.n_nodes
    dm = dof_map(curve)
    axis = _axis_vertex_mask(curve)
    g_v = m.weight(curve.nodes)
    sg_v = np.sqrt(g_v)
    M = geo.mass
    a, b = geo.a, geo.b
    s_elem = 0.5 * (sg_v[a] + sg_v[b])

    xfree = dm.x_free.ravel()
    xidx, nx = _reduction(xfree)
    kfree = ~axis
    kidx, nk = _reduction(kfree)
    ndof = nx + nk

    ghm = m.grad_half_minus(curve.nodes)

    def residual(dX: np.ndarray, kappa: np.ndarray):
        new_nodes = curve.nodes + dX
        axis_nodes = new_nodes.copy()
        axis_nodes[axis, 0] = 0.0
        new_curve = curve.with_nodes(axis_nodes)
        new_geo = geometry(new_curve)
        F = m.grad_half(axis_nodes) - m.grad_half_minus(axis_nodes) + ghm
        r_curv = (M * g_v * kappa)[:, None] * geo.omega
        r_curv += new_geo.mass[:, None] * F
        r_curv += _stiffness_apply(geo, s_elem, new_geo.d)
        r_vel = M * (g_v * np.einsum("ij,ij->i", dX, geo.omega) / dt - sg_v * kappa)
        res = np.concatenate([r_curv.ravel()[xfree], r_vel[kfree]])
        return res, new_curve, new_geo, F

    def jacobian(new_geo: CurveGeometry, F: np.ndarray) -> sp.csc_matrix:
        trip = _Triplets()
        raw = _Triplets()
        _stiffness_triplets(raw, geo, s_elem, 0, 0)
        # split-gradient coupling: local Hessian plus length sensitivity
        hp = m.hess_half(new_geo.curve.nodes) - m.hess_half_minus(new_geo.curve.nodes)
        for i in range(n):
            for c in range(2):
                for e in range(2):
                    raw.add([2 * i + c], [2 * i + e], [new_geo.mass[i] * hp[i, c, e]])
        tau_new = new_geo.tau
        for t, tn in enumerate((a, b)):
            for u, un in enumerate((a, b)):
                sgn = 0.5 * (1.0 if u == 1 else -1.0)
                for c in range(2):
                    for e in range(2):
                        raw.add(2 * tn + c, 2 * un + e, sgn * F[tn, c] * tau_new[:, e])
        Kxx = raw.matrix((2 * n, 2 * n))[xfree][:, xfree].tocoo()
        trip.add(Kxx.row, Kxx.col, Kxx.data)
        # d r_curv / d kappa
        lump = (M[:, None] * g_v[:, None] * geo.omega).ravel()
        rows = np.arange(2 * n)
        keep = xfree & np.repeat(kfree, 2)
        trip.add(xidx[rows[keep]], nx + kidx[rows[keep] // 2], lump[keep])
        # velocity rows
        for i in np.nonzero(kfree)[0]:
            row = nx + kidx[i]
            trip.add([row], [row], [-M[i] * sg_v[i]])
            for c in range(2):
                j = xidx[2 * i + c]
                if j >= 0:
                    trip.add([row], [j], [M[i] * g_v[i] * geo.omega[i, c] / dt])
        return trip.matrix((ndof, ndof))

    dX = np.zeros((n, 2))
    kappa = np.zeros(n)
    try:
        for it in range(newton.max_iter):
            res, new_curve, new_geo, F = residual(dX, kappa)
            if np.max(np.abs(res)) <= newton.tol:
                break
            J = jacobian(new_geo, F)
            delta = _solve(J, -res)
            upd = np.zeros(2 * n)
            upd[xfree] = delta[:nx]
            dX = dX + upd.reshape(n, 2)
            dk = np.zeros(n)
            dk[kfree] = delta[nx:]
            kappa = kappa + dk
        else:
            raise NewtonDiverged(
                f"no convergence in {newton.max_iter} iterations "
                f"(residual {np.max(np.abs(res)):.2e})"
            )
    except (DomainError, DegenerateError, DegenerateElement) as exc:
        raise NewtonDiverged(f"iterate left the admissible set: {exc}") from exc

    new_curve = _finish_nodes(curve, curve.nodes + dX, m)
    return SchemeState(
        curve=new_curve, t=state.t + dt, step=state.step + 1, kappa_g=kappa
    )


# -- scheme Q ------------------------------------------------------------------


def _emit_rank1(trip, rows_t, cols_u, coeff, A_t, B_u):
    trip.add(rows_t, cols_u, coeff * A_t * B_u)


def step_Q(
    state: SchemeState,
    m: ConformalMetric,
    dt: float,
    rule=None,
    check_assumptions: bool = True,
    check_clamped: bool = False,
) -> SchemeState:
    """One step of the linear elastic-flow scheme.

    Unknowns are the position update, the geodesic-curvature scalar at
    every vertex and the curvature vector Y_g in its constrained space;
    the explicit right-hand side carries all metric-coupling terms at the
    old time level.
    """
    curve = state.curve
    if state.kappa_g is None or state.Y_g is None:
        raise ValueError("elastic scheme needs kappa_g and Y_g in the state")
    geo = geometry(curve)
    qd = _QuadData(geo, m, rule)
    if check_assumptions:
        check_assumption_A(geo)
        check_assumption_B(qd)
    dm = dof_map(curve)
    if check_clamped and any(
        isinstance(k, Clamped) for k in curve.endpoint_kinds().values()
    ):
        check_assumption_C(qd, dm)

    n = curve.n_nodes
    a, b = geo.a, geo.b
    K = len(qd.alpha)
    wq = qd.wq
    xfree = dm.x_free.ravel()
    yfree = dm.y_free.ravel()
    xidx, nx = _reduction(xfree)
    yidx, ny = _reduction(yfree)
    ndof = nx + n + ny
    OFF_K = nx
    OFF_Y = nx + n

    omega_P = qd.interp_vertex(geo.omega)
    kap_P = qd.interp_vertex(state.kappa_g)
    Y_P = qd.interp_vertex(state.Y_g)
    Ya, Yb = geo.vertex_values(state.Y_g)
    dY = Yb - Ya
    Ys_tau = np.einsum("jc,jc->j", dY, geo.tau) / geo.q

    trip = _Triplets()
    rhs = np.zeros(ndof)
    rhs_x_raw = np.zeros(2 * n)
    rhs_y_raw = np.zeros(2 * n)

    node_of = (a, b)

    # ---- left-hand side -------------------------------------------------
    # velocity mass term (g dX/dt . omega)(chi . omega)
    c_mass = wq * qd.sg * qd.g / dt
    for t in range(2):
        for u in range(2):
            base = c_mass * qd.phi[t] * qd.phi[u]
            for c in range(2):
                for e in range(2):
                    val = base * omega_P[:, :, c] * omega_P[:, :, e]
                    rows = xidx[2 * np.repeat(node_of[t], K) + c]
                    cols = xidx[2 * np.repeat(node_of[u], K) + e]
                    keep = (rows >= 0) & (cols >= 0)
                    trip.add(rows[keep], cols[keep], val.ravel()[keep])
    # -(Y^{m+1}_s, chi_s): diagonal in components
    sbar = (qd.w[None, :] * qd.sg).sum(axis=1)
    c_stiff = sbar / geo.q
    for t in range(2):
        for u in range(2):
            val = -c_stiff * qd.sigma[t] * qd.sigma[u]
            for c in range(2):
                rows = xidx[2 * node_of[t] + c]
                cols = yidx[2 * node_of[u] + c]
                keep = (rows >= 0) & (cols >= 0)
                trip.add(rows[keep], OFF_Y + cols[keep], val[keep])
    # eq (b): (kappa^{m+1}, chi) - (g^(1/2) Y^{m+1} . nu, chi)
    c_b1 = wq * qd.sg
    c_b2 = wq * qd.g
    for t in range(2):
        for u in range(2):
            base = (c_b1 * qd.phi[t] * qd.phi[u]).ravel()
            rows = OFF_K + np.repeat(node_of[t], K)
            cols = OFF_K + np.repeat(node_of[u], K)
            trip.add(rows, cols, base)
            base2 = c_b2 * qd.phi[t] * qd.phi[u]
            for e in range(2):
                val = -(base2 * geo.nu[:, None, e]).ravel()
                cols_y = yidx[2 * np.repeat(node_of[u], K) + e]
                keep = cols_y >= 0
                trip.add(rows[keep], OFF_Y + cols_y[keep], val[keep])
    # eq (c): (g^(1/2) kappa^{m+1} nu, eta) + (X^{m+1}_s, eta_s) + fused log-grad term
    for t in range(2):
        for u in range(2):
            base = c_b2 * qd.phi[t] * qd.phi[u]
            for c in range(2):
                val = (base * geo.nu[:, None, c]).ravel()
                rows = yidx[2 * np.repeat(node_of[t], K) + c]
                cols = OFF_K + np.repeat(node_of[u], K)
                keep = rows >= 0
                trip.add(OFF_Y + rows[keep], cols[keep], val[keep])
            sval = c_stiff * qd.sigma[t] * qd.sigma[u]
            for c in range(2):
                rows = yidx[2 * node_of[t] + c]
                cols = xidx[2 * node_of[u] + c]
                keep = (rows >= 0) & (cols >= 0)
                trip.add(OFF_Y + rows[keep], cols[keep], sval[keep])
    # X^m part of (X^{m+1}_s, eta_s) moves to the right-hand side
    lapd = _stiffness_apply(geo, sbar, geo.d)
    rhs_y_raw -= lapd.ravel()
    # (grad g^(1/2), eta |X_rho|): the fused form of (1/2)(grad ln g, eta |X_rho|_g)
    for t in range(2):
        for c in range(2):
            val = (wq * qd.phi[t] * qd.gh[:, :, c]).sum(axis=1)
            np.add.at(rhs_y_raw, 2 * node_of[t] + c, -val)
    # clamped boundary source
    for idx, kind in curve.endpoint_kinds().items():
        if isinstance(kind, Clamped):
            sg_p = float(m.sqrt_weight(curve.nodes[idx]))
            rhs_y_raw[2 * idx : 2 * idx + 2] += sg_p * kind.zeta_vec

    # ---- explicit right-hand side of the velocity equation ---------------
    # -(Y^m_s . tau)(chi_s . tau)
    for t in range(2):
        val = -sbar * Ys_tau * qd.sigma[t]
        for c in range(2):
            np.add.at(rhs_x_raw, 2 * node_of[t] + c, val * geo.tau[:, c])
    # -(1/2)(kappa^2 - Y . grad ln g)[chi_s . tau + (1/2) chi . grad ln g]
    Bq = kap_P ** 2 - 2.0 * np.einsum("jkc,jkc->jk", Y_P, qd.hgl)
    for t in range(2):
        tang = (wq * qd.sg * Bq).sum(axis=1) * qd.sigma[t] / geo.q
        for c in range(2):
            np.add.at(rhs_x_raw, 2 * node_of[t] + c, -0.5 * tang * geo.tau[:, c])
            nval = (wq * qd.sg * Bq * qd.phi[t] * qd.hgl[:, :, c]).sum(axis=1)
            np.add.at(rhs_x_raw, 2 * node_of[t] + c, -0.5 * nval)
    # +(1/2)((D^2 ln g) Y, chi)
    HY = np.einsum("jkce,jke->jkc", qd.hhl, Y_P)
    for t in range(2):
        for c in range(2):
            val = (wq * qd.sg * qd.phi[t] * HY[:, :, c]).sum(axis=1)
            np.add.at(rhs_x_raw, 2 * node_of[t] + c, val)
    # +(g^(1/2) kappa Y . nu + (1/2) Y_s . tau, chi . grad ln g)
    Cq = qd.sg * kap_P * np.einsum("jkc,jc->jk", Y_P, geo.nu) + 0.5 * Ys_tau[:, None]
    for t in range(2):
        for c in range(2):
            val = (wq * qd.sg * Cq * qd.phi[t] * 2.0 * qd.hgl[:, :, c]).sum(axis=1)
            np.add.at(rhs_x_raw, 2 * node_of[t] + c, val)
    # +(g^(1/2) kappa, chi_s . Y^perp) with perp the clockwise rotation
    Yperp = np.stack([Y_P[:, :, 1], -Y_P[:, :, 0]], axis=-1)
    for t in range(2):
        for c in range(2):
            val = (wq * qd.g * kap_P * Yperp[:, :, c]).sum(axis=1) * qd.sigma[t] / geo.q
            np.add.at(rhs_x_raw, 2 * node_of[t] + c, val)

    rhs[:nx] = rhs_x_raw[xfree]
    rhs[OFF_Y:] = rhs_y_raw[yfree]

    sol = _solve(trip.matrix((ndof, ndof)), rhs)
    dX = np.zeros(2 * n)
    dX[xfree] = sol[:nx]
    kappa_g = sol[OFF_K:OFF_Y]
    Y = np.zeros(2 * n)
    Y[yfree] = sol[OFF_Y:]
    new_curve = _finish_nodes(curve, curve.nodes + dX.reshape(n, 2), m)
    return SchemeState(
        curve=new_curve,
        t=state.t + dt,
        step=state.step + 1,
        kappa_g=kappa_g,
        Y_g=Y.reshape(n, 2),
    )


def assemble_initial_Q(
    curve: PolygonalCurve, m: ConformalMetric
) -> tuple[np.ndarray, np.ndarray]:
    """Initial curvature data (kappa_g0, Y_g0) for the elastic scheme.

    The curvature vector solves the lumped vector identity against the
    exact element stiffness (a diagonal system); the scalar and the
    curvature vector are then read off through the vertex normal, with
    both set to zero at degenerate-axis endpoints.
    """
    geo = geometry(curve)
    M = geo.mass
    kvec = -_stiffness_apply(geo, np.ones(geo.q.size), geo.d) / M[:, None]
    om2 = np.einsum("ij,ij->i", geo.omega, geo.omega)
    if np.any(np.sqrt(om2) < 1e-12):
        raise DegenerateError("vanishing vertex normal in the initial data")
    kappa = np.einsum("ij,ij->i", kvec, geo.omega) / om2
    g_v = m.weight(curve.nodes)
    lam, const, degen = _curvature_operator(m, curve, geo, g_v)
    kappa_g = lam * kappa + const
    axis = _axis_vertex_mask(curve)
    kappa_g[axis] = 0.0
    kappa_g[degen] = 0.0
    # the vertex operator approximates g^(1/2) kappa_g; rescale to the
    # geodesic curvature proper away from the degenerate points
    off_axis = ~axis & ~degen
    kappa_g[off_axis] /= np.sqrt(g_v[off_axis])
    Y = np.zeros((curve.n_nodes, 2))
    off = ~axis & ~degen
    Y[off] = (kappa_g[off] / (np.sqrt(g_v[off]) * om2[off]))[:, None] * geo.omega[off]
    dm = dof_map(curve)
    Y[dm.y_fixed] = 0.0
    return kappa_g, Y
