import numpy as np
import pytest

from swesphere import (
    boundary_integral,
    build_mesh,
    d_curl_scalar,
    d_curl_vec,
    d_div,
    d_grad,
    edge_average,
    edge_jump,
    edge_traces,
    evaluate_scalar,
    inner_scalar,
    inner_vector,
    project_scalar,
    project_vector,
)
from swesphere.operators import deriv_eta, deriv_xi, element_side_values
from swesphere.quadrature import gll_rule, lagrange_eval


def random_scalar(mesh, rng):
    p = mesh.nodes_per_side
    return rng.standard_normal((mesh.nelem, p, p))


def random_tangent(mesh, rng):
    p = mesh.nodes_per_side
    w = rng.standard_normal((mesh.nelem, p, p, 3))
    radial = np.einsum("qijc,qijc->qij", w, mesh.k)
    return w - radial[..., None] * mesh.k


def element_inner_scalar(mesh, f, g):
    return np.einsum("qij,qij,qij->q", mesh.wj, f, g)


def element_inner_vector(mesh, f, g):
    return np.einsum("qij,qijc,qijc->q", mesh.wj, f, g)


def boundary_flux_sum(mesh, phi, w):
    """Per-element <phi w, n> over all four sides, own frames."""
    out = np.zeros(mesh.nelem)
    for q in range(mesh.nelem):
        vals = np.empty((4, mesh.nodes_per_side))
        for s in range(4):
            si, sj = mesh.side_nodes(s)
            vals[s] = phi[q, si, sj] * np.einsum(
                "pc,pc->p", w[q, si, sj], mesh.normals[q, s]
            )
        out[q] = boundary_integral(mesh, q, vals)
    return out


# ---------------------------------------------------------------- inner products


def test_inner_products_trivial(mesh33):
    one = np.ones((mesh33.nelem, 4, 4))
    zero = np.zeros_like(one)
    area = inner_scalar(one, one, mesh33)
    assert abs(area - mesh33.area()) < 1e-12
    assert inner_scalar(one, zero, mesh33) == 0.0
    # unit tangent field integrates to the area as well
    t = mesh33.g1 / np.linalg.norm(mesh33.g1, axis=-1)[..., None]
    assert abs(inner_vector(t, t, mesh33) - area) < 1e-11 * area
    # orthogonal tangent fields
    t2 = np.cross(mesh33.k, t)
    assert abs(inner_vector(t, t2, mesh33)) < 1e-12 * area


def test_inner_product_shape_mismatch(mesh33, mesh22):
    f = np.ones((mesh22.nelem, 4, 4))
    with pytest.raises(ValueError):
        inner_scalar(f, f, mesh33)


def test_inner_scalar_dense_quadrature_oracle(rng):
    # The discrete sum equals the exact integral of the order-(m, m)
    # interpolant of the product f * g * J, evaluated here with a dense
    # Gauss-Legendre rule on the reference square.
    mesh = build_mesh(1, 3)
    p = mesh.nodes_per_side
    f = random_scalar(mesh, rng)
    g = random_scalar(mesh, rng)
    xg, wg = np.polynomial.legendre.leggauss(2 * p + 6)
    rule = mesh.rule
    li = np.array([lagrange_eval(rule, i, xg) for i in range(p)])  # (p, ng)
    for q in range(mesh.nelem):
        prod = f[q] * g[q] * mesh.jac[q]
        dense = np.einsum("ij,ia,jb->ab", prod, li, li)
        oracle = float(wg @ dense @ wg)
        discrete = float(np.einsum("ij,ij->", mesh.wj[q], f[q] * g[q]))
        assert abs(discrete - oracle) <= 1e-12 * max(1.0, abs(oracle))


def test_inner_vector_dense_quadrature_oracle(rng):
    mesh = build_mesh(1, 3)
    p = mesh.nodes_per_side
    f = random_tangent(mesh, rng)
    g = random_tangent(mesh, rng)
    xg, wg = np.polynomial.legendre.leggauss(2 * p + 6)
    li = np.array([lagrange_eval(mesh.rule, i, xg) for i in range(p)])
    q = 2
    prod = np.einsum("ijc,ijc->ij", f[q], g[q]) * mesh.jac[q]
    dense = np.einsum("ij,ia,jb->ab", prod, li, li)
    oracle = float(wg @ dense @ wg)
    discrete = float(element_inner_vector(mesh, f, g)[q])
    assert abs(discrete - oracle) <= 1e-12 * max(1.0, abs(oracle))


# ------------------------------------------------------------------- projections


def test_project_scalar_idempotent_and_constant(mesh33):
    f = project_scalar(lambda x: x[..., 0] * x[..., 2], mesh33)
    assert np.array_equal(project_scalar(f, mesh33), f)
    c = project_scalar(lambda x: np.full(x.shape[:-1], 3.25), mesh33)
    assert np.all(c == 3.25)


def test_project_scalar_preserves_inner_products(mesh33, rng):
    # <gamma, b> and <gamma, Pi(b)> are the identical collocated sums.
    gamma = random_scalar(mesh33, rng)
    b = lambda x: np.cos(x[..., 0]) + x[..., 1] ** 3
    bh = project_scalar(b, mesh33)
    assert inner_scalar(gamma, bh, mesh33) == inner_scalar(
        gamma, project_scalar(bh, mesh33), mesh33
    )


def test_project_vector_tangency(mesh33):
    omega = np.array([0.2, -0.4, 1.0])
    u = project_vector(lambda x: np.cross(omega, x), mesh33)
    assert np.max(np.abs(np.einsum("qijc,qijc->qij", u, mesh33.k))) <= 1e-13
    # idempotent
    assert np.max(np.abs(project_vector(u, mesh33) - u)) <= 1e-15
    with pytest.raises(ValueError):
        project_vector(lambda x: x, mesh33)  # radial field


# ------------------------------------------------------------ operator oracles


def test_grad_of_constant_vanishes(mesh33):
    c = np.full((mesh33.nelem, 4, 4), 7.5)
    g = d_grad(c, mesh33)
    assert np.max(np.abs(g)) <= 1e-13 * np.max(np.abs(mesh33.gup1)) * 7.5


def test_grad_matches_symbolic_derivative_oracle(mesh22):
    # Differentiate the interpolant exactly with numpy's polynomial algebra
    # and combine with the same metric; this checks the barycentric
    # differentiation path end to end.
    mesh = mesh22
    p = mesh.nodes_per_side
    phi = project_scalar(lambda x: x[..., 1], mesh)
    from numpy.polynomial import polynomial as npoly

    lag_der = np.zeros((p, p))
    for jfun in range(p):
        roots = np.delete(mesh.rule.nodes, jfun)
        coeffs = npoly.polyfromroots(roots)
        coeffs /= npoly.polyval(mesh.rule.nodes[jfun], coeffs)
        dcoeffs = npoly.polyder(coeffs)
        lag_der[:, jfun] = npoly.polyval(mesh.rule.nodes, dcoeffs)
    dxi = np.einsum("ik,qkj->qij", lag_der, phi)
    deta = np.einsum("jk,qik->qij", lag_der, phi)
    oracle = dxi[..., None] * mesh.gup1 + deta[..., None] * mesh.gup2
    got = d_grad(phi, mesh)
    assert np.max(np.abs(got - oracle)) <= 1e-11 * np.max(np.abs(oracle))


def test_div_of_zero_and_curl(mesh33, rng):
    zero = np.zeros((mesh33.nelem, 4, 4, 3))
    assert np.max(np.abs(d_div(zero, mesh33))) == 0.0
    # div curl cancellation, elementwise, random fields
    for _ in range(20):
        phi = random_scalar(mesh33, rng)
        res = d_div(d_curl_scalar(phi, mesh33), mesh33)
        scale = np.max(np.abs(phi)) / mesh33.dx**2
        assert np.max(np.abs(res)) <= 1e-11 * scale


def test_element_sbp_identity(mesh33, rng):
    # <grad phi, w>_q + <phi, div w>_q = <phi w, n>_dq on every element.
    for _ in range(20):
        phi = random_scalar(mesh33, rng)
        w = random_tangent(mesh33, rng)
        lhs = element_inner_vector(mesh33, d_grad(phi, mesh33), w)
        lhs += element_inner_scalar(mesh33, phi, d_div(w, mesh33))
        rhs = boundary_flux_sum(mesh33, phi, w)
        scale = np.abs(lhs) + np.abs(rhs) + 1e-30
        assert np.max(np.abs(lhs - rhs) / scale) <= 1e-11


def test_curl_of_gradient_vanishes(mesh33, rng):
    for _ in range(20):
        phi = random_scalar(mesh33, rng)
        res = d_curl_vec(d_grad(phi, mesh33), mesh33)
        scale = np.max(np.abs(phi)) / mesh33.dx**2
        assert np.max(np.abs(res)) <= 1e-11 * scale


def test_curl_solid_body_rotation():
    # u = Omega x r has surface curl 2 Omega . k; the equiangular metric is
    # smooth so the nodal residual drops spectrally with order.
    omega = np.array([0.3, -0.1, 0.9])
    errs = []
    for m in (3, 5, 7, 9):
        mesh = build_mesh(2, m)
        u = project_vector(lambda x: np.cross(omega, x), mesh)
        curl = d_curl_vec(u, mesh)
        exact = 2.0 * np.einsum("c,qijc->qij", omega, mesh.k)
        errs.append(np.max(np.abs(curl - exact)))
    for e_coarse, e_fine in zip(errs, errs[1:]):
        assert e_fine < 0.1 * e_coarse
    assert errs[-1] < 1e-5


def test_curl_scalar_identities(mesh33, rng):
    c = np.full((mesh33.nelem, 4, 4), 2.0)
    assert np.max(np.abs(d_curl_scalar(c, mesh33))) <= 1e-13 / mesh33.dx
    for _ in range(20):
        phi = random_scalar(mesh33, rng)
        lhs = d_curl_scalar(phi, mesh33)
        rhs = -np.cross(mesh33.k, d_grad(phi, mesh33))
        scale = np.max(np.abs(lhs)) + 1e-30
        assert np.max(np.abs(lhs - rhs)) <= 1e-11 * scale


def test_boundary_tangential_sbp(mesh33, rng):
    # <phi grad gamma + gamma grad phi, t>_dq = 0 elementwise: the 1D GLL
    # rule integrates the degree 2m-1 tangential derivative exactly and the
    # corner contributions telescope around the closed boundary.
    for _ in range(20):
        phi = random_scalar(mesh33, rng)
        gam = random_scalar(mesh33, rng)
        gphi = d_grad(phi, mesh33)
        ggam = d_grad(gam, mesh33)
        scale_ref = np.max(np.abs(phi)) * np.max(np.abs(gam)) / mesh33.dx
        for q in range(mesh33.nelem):
            vals = np.empty((4, mesh33.nodes_per_side))
            for s in range(4):
                si, sj = mesh33.side_nodes(s)
                t = mesh33.tangents[q, s]
                vals[s] = phi[q, si, sj] * np.einsum("pc,pc->p", ggam[q, si, sj], t)
                vals[s] += gam[q, si, sj] * np.einsum("pc,pc->p", gphi[q, si, sj], t)
            assert abs(boundary_integral(mesh33, q, vals)) <= 1e-11 * scale_ref


def test_side_length_converges_to_great_arc():
    # Every coordinate line is a great-circle arc; integrating 1 over a side
    # must approach radius * angle between the endpoint directions.
    errs = []
    for n in (1, 2, 4):
        mesh = build_mesh(n, 3)
        q, s = 0, 0  # a cube-edge segment, present at every n
        si, sj = mesh.side_nodes(s)
        ends = mesh.x[q, si, sj][[0, -1]]
        angle = np.arccos(np.clip(ends[0] @ ends[1] / mesh.radius**2, -1, 1))
        arc = mesh.radius * angle
        indicator = np.zeros((4, mesh.nodes_per_side))
        indicator[s] = 1.0
        length = boundary_integral(mesh, q, indicator)
        errs.append(abs(length - arc) / arc)
    assert errs[1] < errs[0] and errs[2] < errs[1]
    assert errs[2] < 1e-6


def test_edge_trace_helpers(mesh33, rng):
    # constant-vs-zero field: averages 1/2, jumps +/-1
    f = np.zeros((mesh33.nelem, 4, 4))
    f[0] = 1.0
    tp, tm = edge_traces(f, mesh33)
    touching = (tp == 1.0) | (tm == 1.0)
    assert np.all(edge_average(tp, tm)[touching] == 0.5)
    assert set(np.unique(edge_jump(tp, tm)[touching])) <= {-1.0, 1.0}
    # product rule for jumps: {{a}}[[b]] + [[a]]{{b}} = [[ab]]
    a = random_scalar(mesh33, rng)
    b = random_scalar(mesh33, rng)
    ap, am = edge_traces(a, mesh33)
    bp, bm = edge_traces(b, mesh33)
    abp, abm = edge_traces(a * b, mesh33)
    lhs = edge_average(ap, am) * edge_jump(bp, bm) + edge_jump(ap, am) * edge_average(bp, bm)
    np.testing.assert_allclose(lhs, edge_jump(abp, abm), atol=1e-13 * np.abs(lhs).max())


def test_evaluate_scalar_reproduces_interpolant(mesh22, rng):
    fn = lambda x: np.sin(x[..., 0] + 0.3) * x[..., 2]
    f = project_scalar(fn, mesh22)
    pts = rng.standard_normal((40, 3))
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    got = evaluate_scalar(f, mesh22, pts)
    # order-3 interpolation of a smooth function on a coarse mesh
    assert np.max(np.abs(got - fn(pts))) < 5e-3
    # nodal points reproduce nodal values
    got_nodes = evaluate_scalar(f, mesh22, mesh22.x[5].reshape(-1, 3))
    np.testing.assert_allclose(got_nodes, f[5].reshape(-1), atol=1e-12)


def test_element_side_values(mesh22):
    f = project_scalar(lambda x: x[..., 0], mesh22)
    vals = element_side_values(f, mesh22, 3)
    si, sj = mesh22.side_nodes(2)
    assert np.array_equal(vals[2], f[3, si, sj])
