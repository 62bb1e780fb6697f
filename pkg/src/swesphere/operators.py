"""Discrete inner products, projections, and mimetic differential operators.

Scalar fields are arrays of nodal values, shape (N, P, P); vector fields
hold Cartesian 3-vectors per node, shape (N, P, P, 3), kept tangent to the
sphere.  Storing Cartesian components makes k x u, dot products and the
mass-flux orthogonality F . (k x u) = 0 exact at nodes; covariant and
contravariant components are formed on demand through the stored metric.

Under GLL collocation the projection wrappers inside the divergence are
identities, so the operators reduce to differentiation-matrix sweeps along
tensor lines combined with the metric:

    grad  phi = phi_xi g^1 + phi_eta g^2
    div   w   = (1/J) ((J w^1)_xi + (J w^2)_eta),     w^a = w . g^a
    curl  w   = (1/J) ((w_2)_xi  - (w_1)_eta),        w_a = w . g_a
    curl (phi k) = (1/J) (phi_eta g_1 - phi_xi g_2)

With the right-handed panel frames these satisfy, at round-off: the element
summation-by-parts identity, div(curl(phi k)) = 0, curl(grad phi) = 0, the
pointwise identity curl(phi k) = -Pi_V(k x grad phi), and the boundary
tangential summation-by-parts identity.  The test suite exercises each one.

All functions are pure; they never mutate mesh or field inputs.
"""
from __future__ import annotations

import numpy as np

from .geometry import Mesh

__all__ = [
    "inner_scalar",
    "inner_vector",
    "project_scalar",
    "project_vector",
    "d_grad",
    "d_div",
    "d_curl_vec",
    "d_curl_scalar",
    "edge_traces",
    "edge_average",
    "edge_jump",
    "element_side_values",
    "boundary_integral",
    "evaluate_scalar",
]


def _check_scalar(f: np.ndarray, mesh: Mesh) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    p = mesh.nodes_per_side
    if f.shape != (mesh.nelem, p, p):
        raise ValueError(f"scalar field shape {f.shape} does not match mesh")
    return f


def _check_vector(w: np.ndarray, mesh: Mesh) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    p = mesh.nodes_per_side
    if w.shape != (mesh.nelem, p, p, 3):
        raise ValueError(f"vector field shape {w.shape} does not match mesh")
    return w


def deriv_xi(f: np.ndarray, mesh: Mesh) -> np.ndarray:
    """d/dxi along tensor lines; exact for nodal polynomial data."""
    if f.ndim == 4:
        return np.einsum("ik,qkjc->qijc", mesh.diff, f)
    return np.matmul(mesh.diff, f)


def deriv_eta(f: np.ndarray, mesh: Mesh) -> np.ndarray:
    """d/deta along tensor lines."""
    if f.ndim == 4:
        return np.einsum("jk,qikc->qijc", mesh.diff, f)
    return np.matmul(f, mesh.diff.T)


def inner_scalar(f: np.ndarray, g: np.ndarray, mesh: Mesh) -> float:
    """Discrete L2 inner product  sum_q sum_ij w_i w_j J_ij f_ij g_ij."""
    f = _check_scalar(f, mesh)
    g = _check_scalar(g, mesh)
    return float(np.einsum("qij,qij,qij->", mesh.wj, f, g))


def inner_vector(f: np.ndarray, g: np.ndarray, mesh: Mesh) -> float:
    """Discrete L2 inner product with the pointwise dot of two vector fields."""
    f = _check_vector(f, mesh)
    g = _check_vector(g, mesh)
    return float(np.einsum("qij,qijc,qijc->", mesh.wj, f, g))


def project_scalar(b, mesh: Mesh) -> np.ndarray:
    """Nodal projection into the discontinuous scalar space.

    ``b`` is either a callable of Cartesian positions (vectorized over a
    trailing length-3 axis) or an existing nodal array, which passes through
    unchanged (projection is idempotent under collocation).
    """
    if callable(b):
        return np.asarray(b(mesh.x), dtype=float)
    return _check_scalar(b, mesh)


def project_vector(b, mesh: Mesh, tol: float = 1e-10) -> np.ndarray:
    """Nodal projection of a tangent vector field.

    Rejects inputs whose normal component exceeds ``tol`` times the field
    magnitude, then removes the round-off normal residual so the stored
    field is tangent to machine precision.
    """
    w = np.asarray(b(mesh.x), dtype=float) if callable(b) else _check_vector(b, mesh)
    radial = np.einsum("qijc,qijc->qij", w, mesh.k)
    scale = max(float(np.max(np.abs(w))), 1e-300)
    if float(np.max(np.abs(radial))) > tol * scale:
        raise ValueError("vector field is not tangent to the sphere")
    return w - radial[..., None] * mesh.k


def d_grad(phi: np.ndarray, mesh: Mesh) -> np.ndarray:
    """Surface gradient; tangent by construction."""
    phi = _check_scalar(phi, mesh)
    return (
        deriv_xi(phi, mesh)[..., None] * mesh.gup1
        + deriv_eta(phi, mesh)[..., None] * mesh.gup2
    )


def d_div(w: np.ndarray, mesh: Mesh) -> np.ndarray:
    """Surface divergence of a tangent vector field."""
    w = _check_vector(w, mesh)
    f1 = mesh.jac * np.einsum("qijc,qijc->qij", w, mesh.gup1)
    f2 = mesh.jac * np.einsum("qijc,qijc->qij", w, mesh.gup2)
    return (deriv_xi(f1, mesh) + deriv_eta(f2, mesh)) / mesh.jac


def d_curl_vec(w: np.ndarray, mesh: Mesh) -> np.ndarray:
    """k-component of the surface curl of a tangent vector field."""
    w = _check_vector(w, mesh)
    c1 = np.einsum("qijc,qijc->qij", w, mesh.g1)
    c2 = np.einsum("qijc,qijc->qij", w, mesh.g2)
    return (deriv_xi(c2, mesh) - deriv_eta(c1, mesh)) / mesh.jac


def d_curl_scalar(phi: np.ndarray, mesh: Mesh) -> np.ndarray:
    """curl(phi k): rotated gradient, equal to -Pi_V(k x grad phi) nodewise."""
    phi = _check_scalar(phi, mesh)
    return (
        deriv_eta(phi, mesh)[..., None] * mesh.g1
        - deriv_xi(phi, mesh)[..., None] * mesh.g2
    ) / mesh.jac[..., None]


def edge_traces(field: np.ndarray, mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
    """Boundary traces of a field on the two sides of every edge.

    Returns (plus, minus) arrays of shape (E, P) or (E, P, 3), with minus
    values permuted into plus-side node order.  Raw values are exchanged
    with no sign flip; components against a particular frame are taken by
    the caller after the exchange.
    """
    field = np.asarray(field, dtype=float)
    flat = field.reshape(mesh.nelem * mesh.nodes_per_side**2, *field.shape[3:])
    return flat[mesh.idx_p], flat[mesh.idx_m]


def edge_average(plus: np.ndarray, minus: np.ndarray) -> np.ndarray:
    """{{a}} = (a+ + a-) / 2."""
    return 0.5 * (plus + minus)


def edge_jump(plus: np.ndarray, minus: np.ndarray) -> np.ndarray:
    """[[a]] = a+ - a-, with "+" the canonical (lower element index) side."""
    return plus - minus


def element_side_values(field: np.ndarray, mesh: Mesh, q: int) -> np.ndarray:
    """Trace of element q's own field on its 4 sides, shape (4, P[, 3])."""
    field = np.asarray(field, dtype=float)
    out = []
    for s in range(4):
        si, sj = mesh.side_nodes(s)
        out.append(field[q, si, sj])
    return np.stack(out)


def boundary_integral(mesh: Mesh, q: int, integrand: np.ndarray) -> float:
    """GLL boundary quadrature of element q:  sum_sides sum_j w_j scale_j v_j.

    ``integrand`` holds the already-formed scalar integrand (for instance
    phi (w . n)) at the 4 x P boundary nodes in side order, using the
    element's own frames.
    """
    integrand = np.asarray(integrand, dtype=float)
    if integrand.shape != (4, mesh.nodes_per_side):
        raise ValueError("integrand must have shape (4, P)")
    return float(np.sum(mesh.rule.weights[None, :] * mesh.scales[q] * integrand))


def evaluate_scalar(field: np.ndarray, mesh: Mesh, points: np.ndarray) -> np.ndarray:
    """Evaluate a nodal scalar field at arbitrary points on the sphere.

    Inverts the equiangular map analytically (panel from the dominant axis
    projection, then angles), then sums the tensor Lagrange basis.  Used by
    diagnostics that need values off the GLL grid.
    """
    from .geometry import PANEL_AXES
    from .quadrature import lagrange_eval

    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    unit = pts / np.linalg.norm(pts, axis=1)[:, None]
    proj = unit @ PANEL_AXES[:, 0, :].T
    panel = np.argmax(proj, axis=1)
    out = np.empty(len(pts))
    p = mesh.nodes_per_side
    for ip, (u, pa) in enumerate(zip(unit, panel)):
        a_ax, b_ax, c_ax = PANEL_AXES[pa]
        da = float(u @ a_ax)
        s = np.arctan(float(u @ b_ax) / da) / (0.25 * np.pi)
        t = np.arctan(float(u @ c_ax) / da) / (0.25 * np.pi)
        ex = min(max(int(np.floor((s + 1.0) * 0.5 * mesh.n)), 0), mesh.n - 1)
        ey = min(max(int(np.floor((t + 1.0) * 0.5 * mesh.n)), 0), mesh.n - 1)
        xi = mesh.n * (s + 1.0) - 2.0 * ex - 1.0
        eta = mesh.n * (t + 1.0) - 2.0 * ey - 1.0
        q = pa * mesh.n**2 + ey * mesh.n + ex
        li = np.array([lagrange_eval(mesh.rule, i, xi) for i in range(p)])
        lj = np.array([lagrange_eval(mesh.rule, j, eta) for j in range(p)])
        out[ip] = li @ field[q] @ lj
    return out.reshape(np.asarray(points).shape[:-1])
