"""Equiangular cubed-sphere mesh with analytic metric terms.

The sphere is tiled by six gnomonic panels.  A panel point at local angles
(alpha, beta) = (pi/4) (s, t), with (s, t) in [-1, 1]^2, is

    x = a (A + tan(alpha) B + tan(beta) C) / delta,
    delta = sqrt(1 + tan(alpha)^2 + tan(beta)^2),

where ``A`` is the outward panel-center direction and (B, C, A) is a
right-handed orthonormal triple (frozen table ``PANEL_AXES`` below).  The
right-handed choice makes g1 x g2 point along the outward surface normal k
on every panel, which the curl/tangent sign conventions rely on.

Each panel is split into n x n quadrilateral elements; element (ex, ey)
covers the (s, t) cell [-1 + 2 ex / n, -1 + 2 (ex+1) / n] x [...], and the
element-local reference coordinates (xi, eta) in [-1, 1]^2 map affinely
into that cell.  Covariant vectors g1 = dx/dxi, g2 = dx/deta are evaluated
from the closed-form map derivatives, never by numerical differencing, so
the metric duality g^a . g_b = delta holds at round-off.

Every coordinate line is the central projection of a straight line on the
cube, hence a great-circle arc; in particular adjacent panels trace shared
edges with the same angular parameter, so element boundaries are conforming
with coincident GLL nodes everywhere, including the 12 cube edges.  The 8
cube corners are vertices where three elements meet; boundary quadrature is
evaluated side by side, so corners never enter any edge integral twice.

After the metric is computed, the positions of linked boundary nodes are
snapped bitwise to a single representative per coincident-node class.
Sampling a continuous function at the nodes then yields element traces with
exactly zero jump, which the discrete steady-balance property needs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quadrature import QuadRule, diff_matrix, gll_rule

__all__ = ["PANEL_AXES", "EdgeLink", "Mesh", "equiangular_map", "build_mesh", "boundary_frames"]

# Frozen panel layout, rows = (A, B, C).  Panels 0-3 ring the equator with
# centers at longitudes 0, 90, 180, 270 degrees; panel 4 is the north cap,
# panel 5 the south cap.  Each (B, C, A) triple is right-handed.
PANEL_AXES = np.array(
    [
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        [[0, 1, 0], [-1, 0, 0], [0, 0, 1]],
        [[-1, 0, 0], [0, -1, 0], [0, 0, 1]],
        [[0, -1, 0], [1, 0, 0], [0, 0, 1]],
        [[0, 0, 1], [0, 1, 0], [-1, 0, 0]],
        [[0, 0, -1], [0, 1, 0], [1, 0, 0]],
    ],
    dtype=float,
)

# Side numbering: 0: xi = -1, 1: xi = +1, 2: eta = -1, 3: eta = +1.
# Along a side, nodes are ordered by the free index (eta for sides 0/1,
# xi for sides 2/3).
N_SIDES = 4


def equiangular_map(panel: int, s, t, radius: float) -> np.ndarray:
    """Map panel-wide coordinates (s, t) in [-1, 1]^2 to the sphere.

    Local angles are (alpha, beta) = (pi/4)(s, t).  Adjacent panels agree
    pointwise along shared edges at matching parameters.
    """
    if not 0 <= panel <= 5:
        raise ValueError(f"panel index must be in 0..5, got {panel}")
    a_ax, b_ax, c_ax = PANEL_AXES[panel]
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    big_x = np.tan(0.25 * np.pi * s)
    big_y = np.tan(0.25 * np.pi * t)
    delta = np.sqrt(1.0 + big_x * big_x + big_y * big_y)
    direction = (
        a_ax
        + big_x[..., None] * b_ax
        + big_y[..., None] * c_ax
    )
    return radius * direction / delta[..., None]


@dataclass(frozen=True)
class EdgeLink:
    """Oriented link between two coincident element sides.

    The "plus" side is the canonical owner (lower element index).  ``perm``
    maps plus-side node position j to the minus side's local node index, so
    minus-side traces reordered by ``perm`` line up with plus-side nodes.
    ``reversed`` records whether the two sides traverse the shared arc in
    opposite directions.
    """

    elem_plus: int
    side_plus: int
    elem_minus: int
    side_minus: int
    perm: np.ndarray
    reversed: bool


@dataclass
class Mesh:
    """Cubed-sphere mesh: 6 n^2 elements of order m with per-node metric.

    Node arrays are indexed [elem, i, j(, component)] with i the xi index
    and j the eta index.  All arrays are read-only after construction, so
    concurrent reads are safe.
    """

    n: int
    order: int
    radius: float
    rule: QuadRule
    diff: np.ndarray          # (P, P) nodal differentiation matrix
    panel: np.ndarray         # (N,) panel of each element
    x: np.ndarray             # (N, P, P, 3) node positions
    g1: np.ndarray            # (N, P, P, 3) covariant dx/dxi
    g2: np.ndarray            # (N, P, P, 3) covariant dx/deta
    gup1: np.ndarray          # (N, P, P, 3) contravariant
    gup2: np.ndarray
    k: np.ndarray             # (N, P, P, 3) outward unit normal
    jac: np.ndarray           # (N, P, P) surface Jacobian |g1 x g2|
    wj: np.ndarray            # (N, P, P) quadrature mass w_i w_j J
    normals: np.ndarray       # (N, 4, P, 3) outward side normals
    tangents: np.ndarray      # (N, 4, P, 3) side tangents, t = k x n
    scales: np.ndarray        # (N, 4, P) edge quadrature scale |g_edge|
    edges: list[EdgeLink]
    # Vectorized edge tables (all aligned to plus-side node order):
    idx_p: np.ndarray         # (E, P) flat node index of plus-side nodes
    idx_m: np.ndarray         # (E, P) flat node index of matched minus nodes
    n_e: np.ndarray           # (E, P, 3) canonical edge normal (plus side's)
    t_e: np.ndarray           # (E, P, 3) canonical edge tangent
    wscale_e: np.ndarray      # (E, P) canonical w * scale edge quadrature
    n_own_m: np.ndarray       # (E, P, 3) minus side's own normal
    t_own_m: np.ndarray       # (E, P, 3) minus side's own tangent
    lift_p: np.ndarray        # (E, P) wscale_e / (node mass) on plus side
    liftnum_m: np.ndarray     # (E, P) wscale_e / (node mass) on minus side
    liftown_m: np.ndarray     # (E, P) own w * scale / (node mass) on minus side
    _lonlat: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    @property
    def nelem(self) -> int:
        return self.x.shape[0]

    @property
    def nodes_per_side(self) -> int:
        return self.order + 1

    @property
    def dx(self) -> float:
        """Element spacing: panel angular width over elements per edge."""
        return self.radius * (0.5 * np.pi) / self.n

    def area(self) -> float:
        return float(np.sum(self.wj))

    def lonlat(self) -> tuple[np.ndarray, np.ndarray]:
        """Node longitudes/latitudes in radians, shapes (N, P, P)."""
        if self._lonlat is None:
            lon = np.arctan2(self.x[..., 1], self.x[..., 0])
            lat = np.arcsin(np.clip(self.x[..., 2] / self.radius, -1.0, 1.0))
            self._lonlat = (lon, lat)
        return self._lonlat

    def side_nodes(self, side: int) -> tuple[np.ndarray, np.ndarray]:
        """(i, j) index arrays of the P nodes on ``side``, in side order."""
        p = self.nodes_per_side
        rng = np.arange(p)
        m = p - 1
        if side == 0:
            return np.zeros(p, dtype=int), rng
        if side == 1:
            return np.full(p, m, dtype=int), rng
        if side == 2:
            return rng, np.zeros(p, dtype=int)
        if side == 3:
            return rng, np.full(p, m, dtype=int)
        raise ValueError(f"side must be 0..3, got {side}")

    def summary(self) -> str:
        """Plain-text mesh dump for debugging."""
        area = self.area()
        exact = 4.0 * np.pi * self.radius**2
        lines = [
            f"cubed-sphere mesh: n={self.n} per panel edge, order m={self.order}, "
            f"radius={self.radius:g}",
            f"elements: {self.nelem}   edges: {len(self.edges)}   "
            f"nodes: {self.nelem * self.nodes_per_side**2}",
            f"area: {area:.17g}  (relative error vs 4 pi a^2: "
            f"{abs(area - exact) / exact:.3e})",
            f"jacobian range: [{self.jac.min():.6g}, {self.jac.max():.6g}]",
        ]
        return "\n".join(lines)


def _panel_block(panel: int, n: int, rule: QuadRule, radius: float):
    """Positions and analytic metric for the n^2 elements of one panel."""
    p = rule.order + 1
    a_ax, b_ax, c_ax = PANEL_AXES[panel]
    ex, ey = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    ex = ex.T.ravel()  # element id within panel = ey * n + ex
    ey = ey.T.ravel()
    # Panel-wide coordinates of each node; (2 ex + 1 + xi) / n - 1 reproduces
    # shared cell boundaries bitwise between in-panel neighbours.
    s = (2.0 * ex[:, None, None] + 1.0 + rule.nodes[None, :, None]) / n - 1.0
    t = (2.0 * ey[:, None, None] + 1.0 + rule.nodes[None, None, :]) / n - 1.0
    s = np.broadcast_to(s, (n * n, p, p))
    t = np.broadcast_to(t, (n * n, p, p))

    big_x = np.tan(0.25 * np.pi * s)
    big_y = np.tan(0.25 * np.pi * t)
    delta2 = 1.0 + big_x**2 + big_y**2
    delta = np.sqrt(delta2)

    direction = (
        a_ax
        + big_x[..., None] * b_ax
        + big_y[..., None] * c_ax
    )
    x = radius * direction / delta[..., None]
    k = direction / delta[..., None]

    inv_d3 = radius / (delta2 * delta)
    dxdbx = inv_d3[..., None] * (
        -big_x[..., None] * a_ax
        + (1.0 + big_y**2)[..., None] * b_ax
        - (big_x * big_y)[..., None] * c_ax
    )
    dxdby = inv_d3[..., None] * (
        -big_y[..., None] * a_ax
        - (big_x * big_y)[..., None] * b_ax
        + (1.0 + big_x**2)[..., None] * c_ax
    )
    # d(big_x)/dxi = (pi / 4n) sec^2(alpha)
    fac = 0.25 * np.pi / n
    g1 = fac * (1.0 + big_x**2)[..., None] * dxdbx
    g2 = fac * (1.0 + big_y**2)[..., None] * dxdby
    return x, g1, g2, k


def _match_sides(x: np.ndarray, radius: float, n: int, order: int):
    """Pair element sides into edges by matching shared corner positions."""
    nelem = x.shape[0]
    p = order + 1
    m = order
    side_idx = [
        (np.zeros(p, dtype=int), np.arange(p)),
        (np.full(p, m, dtype=int), np.arange(p)),
        (np.arange(p), np.zeros(p, dtype=int)),
        (np.arange(p), np.full(p, m, dtype=int)),
    ]

    def corner_key(pos):
        return tuple(np.round(pos / radius, 8))

    bucket: dict[tuple, list[tuple[int, int]]] = {}
    for q in range(nelem):
        for s in range(N_SIDES):
            si, sj = side_idx[s]
            c0 = corner_key(x[q, si[0], sj[0]])
            c1 = corner_key(x[q, si[-1], sj[-1]])
            key = tuple(sorted((c0, c1)))
            bucket.setdefault(key, []).append((q, s))

    edges: list[EdgeLink] = []
    for key, sides in sorted(bucket.items()):
        if len(sides) != 2:
            raise RuntimeError(
                f"mesh connectivity failure: side group of size {len(sides)}"
            )
        (qa, sa), (qb, sb) = sorted(sides)
        sia, sja = side_idx[sa]
        sib, sjb = side_idx[sb]
        xa = x[qa, sia, sja]
        xb = x[qb, sib, sjb]
        fwd = np.linalg.norm(xa - xb, axis=1).max()
        rev = np.linalg.norm(xa - xb[::-1], axis=1).max()
        is_rev = rev < fwd
        if min(fwd, rev) > 1e-10 * radius:
            raise RuntimeError("linked boundary nodes do not coincide")
        perm = np.arange(p)[::-1] if is_rev else np.arange(p)
        edges.append(EdgeLink(qa, sa, qb, sb, perm.copy(), bool(is_rev)))
    return edges, side_idx


def _snap_shared_nodes(x: np.ndarray, edges, side_idx, p: int) -> None:
    """Force coincident boundary nodes to one bitwise-identical position.

    Union-find over all matched node pairs; each class (including the
    three-way cube corners) is set to its lowest-flat-index representative.
    """
    nflat = x.shape[0] * p * p
    parent = np.arange(nflat)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    def flat(q, si, sj):
        return q * p * p + si * p + sj

    for e in edges:
        sia, sja = side_idx[e.side_plus]
        sib, sjb = side_idx[e.side_minus]
        for jpos in range(p):
            ip = flat(e.elem_plus, sia[jpos], sja[jpos])
            im = flat(e.elem_minus, sib[e.perm[jpos]], sjb[e.perm[jpos]])
            union(ip, im)

    xf = x.reshape(nflat, 3)
    for i in range(nflat):
        r = find(i)
        if r != i:
            xf[i] = xf[r]


def build_mesh(n: int, order: int, radius: float = 1.0) -> Mesh:
    """Build the equiangular cubed-sphere mesh: 6 n^2 elements of order m.

    Metric terms come from the closed-form map derivatives.  Edge links are
    derived deterministically by geometric matching of side corners, which
    covers the 12 cube edges and 8 corners without orientation tables.
    """
    if n < 1:
        raise ValueError(f"panel resolution must be >= 1, got {n}")
    if order < 1:
        raise ValueError(f"polynomial order must be >= 1, got {order}")
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")

    rule = gll_rule(order)
    dmat = diff_matrix(rule)
    p = order + 1
    nelem = 6 * n * n

    x = np.empty((nelem, p, p, 3))
    g1 = np.empty_like(x)
    g2 = np.empty_like(x)
    k = np.empty_like(x)
    panel = np.repeat(np.arange(6), n * n)
    for pa in range(6):
        blk = slice(pa * n * n, (pa + 1) * n * n)
        x[blk], g1[blk], g2[blk], k[blk] = _panel_block(pa, n, rule, radius)

    cr = np.cross(g1, g2)
    jac = np.linalg.norm(cr, axis=-1)
    if np.any(np.einsum("qijc,qijc->qij", cr, k) <= 0.0):
        raise RuntimeError("panel orientation is not right-handed")
    gup1 = np.cross(g2, k) / jac[..., None]
    gup2 = np.cross(k, g1) / jac[..., None]

    w2 = np.outer(rule.weights, rule.weights)
    wj = w2[None, :, :] * jac

    # Per-side outward normals, tangents t = k x n, and edge scales:
    # |g2| on the xi = +/-1 sides, |g1| on the eta = +/-1 sides.
    edges, side_idx = _match_sides(x, radius, n, order)
    _snap_shared_nodes(x, edges, side_idx, p)

    normals = np.empty((nelem, N_SIDES, p, 3))
    tangents = np.empty_like(normals)
    scales = np.empty((nelem, N_SIDES, p))
    sign_n = [-1.0, 1.0, -1.0, 1.0]
    for s in range(N_SIDES):
        si, sj = side_idx[s]
        if s in (0, 1):
            nvec, tvec = gup1[:, si, sj], g2[:, si, sj]
            sgn_t = sign_n[s]
        else:
            nvec, tvec = gup2[:, si, sj], g1[:, si, sj]
            sgn_t = -sign_n[s]
        tlen = np.linalg.norm(tvec, axis=-1)
        normals[:, s] = sign_n[s] * nvec / np.linalg.norm(nvec, axis=-1)[..., None]
        tangents[:, s] = sgn_t * tvec / tlen[..., None]
        scales[:, s] = tlen

    # Vectorized edge tables in plus-side node order.  Numerical-flux terms
    # use the canonical (plus side's) w*scale and frame on both sides, so
    # edge sums cancel pairwise in global budgets; own-trace terms keep the
    # owning side's frame.
    ne = len(edges)
    idx_p = np.empty((ne, p), dtype=int)
    idx_m = np.empty((ne, p), dtype=int)
    for ie, e in enumerate(edges):
        sia, sja = side_idx[e.side_plus]
        sib, sjb = side_idx[e.side_minus]
        idx_p[ie] = e.elem_plus * p * p + sia * p + sja
        idx_m[ie] = (
            e.elem_minus * p * p + sib[e.perm] * p + sjb[e.perm]
        )
    ep = np.array([e.elem_plus for e in edges])
    sp = np.array([e.side_plus for e in edges])
    em = np.array([e.elem_minus for e in edges])
    sm = np.array([e.side_minus for e in edges])
    permm = np.stack([e.perm for e in edges])

    n_e = normals[ep, sp]
    t_e = tangents[ep, sp]
    scale_e = scales[ep, sp]
    take = np.arange(ne)[:, None]
    n_own_m = normals[em, sm][take, permm]
    t_own_m = tangents[em, sm][take, permm]
    scale_own_m = scales[em, sm][take, permm]

    w_side = rule.weights[None, :]
    wscale_e = w_side * scale_e
    wscale_own_m = w_side * scale_own_m
    # Node mass at a side node is w_perp * w_free * J; lift factors divide
    # the side quadrature contribution by it.
    w_perp = rule.weights[0]
    jflat = jac.reshape(-1)
    mass_p = w_perp * w_side * jflat[idx_p]
    mass_m = w_perp * w_side * jflat[idx_m]
    lift_p = wscale_e / mass_p
    liftnum_m = wscale_e / mass_m
    liftown_m = wscale_own_m / mass_m

    mesh = Mesh(
        n=n,
        order=order,
        radius=radius,
        rule=rule,
        diff=dmat,
        panel=panel,
        x=x,
        g1=g1,
        g2=g2,
        gup1=gup1,
        gup2=gup2,
        k=k,
        jac=jac,
        wj=wj,
        normals=normals,
        tangents=tangents,
        scales=scales,
        edges=edges,
        idx_p=idx_p,
        idx_m=idx_m,
        n_e=n_e,
        t_e=t_e,
        wscale_e=wscale_e,
        n_own_m=n_own_m,
        t_own_m=t_own_m,
        lift_p=lift_p,
        liftnum_m=liftnum_m,
        liftown_m=liftown_m,
    )
    return mesh


def boundary_frames(mesh: Mesh) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-boundary-node (normal, tangent, scale) arrays, shapes (N, 4, P, ...).

    Normals point outward (+/- g^a / |g^a| per side), tangents complete the
    right-handed frame t = k x n, and scale is the boundary quadrature arc
    factor (|g2| on xi sides, |g1| on eta sides).
    """
    return mesh.normals, mesh.tangents, mesh.scales
