"""Semi-discrete rotating shallow water right-hand sides.

The scheme advances the vector-invariant pair

    u_t = -(omega k x u + grad G + g grad b) - lift((Ghat - G) n)
    D_t = -div(D u)                          - lift((Fhat - F) . n)

with potential G = |u|^2 / 2 + g D, mass flux F = D u, and the diagnosed
absolute vorticity omega solving, for every nodal test function phi,

    <phi, omega> = <curl(phi k), u> + <phi, f> + <phi, {{u}} . t>_boundary.

Under GLL collocation the mass matrix is diagonal, so the vorticity solve is
a pointwise division and the boundary terms become lifts that touch boundary
nodes only.  The numerical fluxes

    Ghat       = {{G}} + alpha [[F]] . n+
    Fhat . n+  = {{F}} . n+ + beta [[G]]

are single valued by construction: each edge computes them once from its two
traces, so the mass flowing out of one element enters its neighbour exactly
and the global mass and absolute vorticity integrals are conserved to
round-off.  alpha = beta = 0 conserves the discrete energy semi-discretely;
alpha, beta >= 0 dissipate it at the rate

    dE/dt = -sum_edges w*scale (alpha ([[F]] . n)^2 + beta [[G]]^2),

which ``energy_rate`` evaluates both ways for verification.  The dissipative
setting uses alpha = max(c+/D+, c-/D-) / 2 with c = |u| + sqrt(g D), the
fastest wave speed on either side.

Nonpositive (or non-finite) depth aborts with ``FlaggedStateError`` rather
than clipping: the scheme has no positivity limiter and silent clipping
would corrupt the conservation accounting.

All right-hand sides are pure functions of immutable inputs; element volume
work and edge flux work are data parallel.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Mesh
from .operators import d_curl_scalar, d_div, d_grad, deriv_eta, deriv_xi

__all__ = [
    "State",
    "PhysConfig",
    "FluxConfig",
    "FlaggedStateError",
    "potential_G",
    "mass_flux_F",
    "wave_speed",
    "flux_Ghat",
    "flux_Fhat_n",
    "alpha_rusanov",
    "compute_vorticity",
    "rhs_nonlinear",
    "rhs_linear",
    "rhs",
    "edge_flux_values",
    "energy_rate",
    "entropy_hessian_eigs",
    "subcritical",
]


class FlaggedStateError(RuntimeError):
    """Raised when the depth field is nonpositive or non-finite."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


@dataclass
class State:
    """Prognostic pair: tangent velocity u (m/s) and depth D (m)."""

    u: np.ndarray  # (N, P, P, 3)
    D: np.ndarray  # (N, P, P)

    def copy(self) -> "State":
        return State(self.u.copy(), self.D.copy())


@dataclass(frozen=True)
class PhysConfig:
    """Physical constants and equation mode.

    ``f`` is the nodal Coriolis field (a plain float broadcasts).  ``b`` is
    optional bottom topography, entering only as the momentum forcing
    -g grad b.  In linear mode the equations are linearized about depth
    ``H`` at rest and ``D`` holds the (sign-indefinite) perturbation.
    """

    g: float
    f: np.ndarray | float
    b: np.ndarray | None = None
    mode: str = "nonlinear"
    H: float | None = None

    def __post_init__(self):
        if self.g <= 0:
            raise ValueError("g must be positive")
        if self.mode not in ("nonlinear", "linear"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "linear" and (self.H is None or self.H <= 0):
            raise ValueError("linear mode requires a positive mean depth H")


@dataclass(frozen=True)
class FluxConfig:
    """Numerical flux parameters; alpha, beta >= 0 is the stability region."""

    alpha_mode: str = "centered"  # "centered" (alpha = 0) or "rusanov"
    beta: float = 0.0

    def __post_init__(self):
        if self.alpha_mode not in ("centered", "rusanov"):
            raise ValueError(f"unknown alpha_mode {self.alpha_mode!r}")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")


CONSERVING = FluxConfig("centered", 0.0)
DISSIPATIVE = FluxConfig("rusanov", 0.0)


def _check_depth(D: np.ndarray, time: float | None = None) -> None:
    if not np.all(np.isfinite(D)):
        raise FlaggedStateError("depth field is not finite", time)
    dmin = float(D.min())
    if dmin <= 0.0:
        raise FlaggedStateError(f"nonpositive depth (min D = {dmin:g})", time)


def potential_G(state: State, cfg: PhysConfig) -> np.ndarray:
    """G = |u|^2 / 2 + g D.  Topography is separate forcing, never in G."""
    return 0.5 * np.einsum("qijc,qijc->qij", state.u, state.u) + cfg.g * state.D


def mass_flux_F(state: State) -> np.ndarray:
    """F = D u, tangent like u."""
    return state.D[..., None] * state.u


def wave_speed(state: State, cfg: PhysConfig) -> np.ndarray:
    """Fastest gravity wave speed |u| + sqrt(g D) per node.

    Linear mode uses the mean depth H: the perturbation depth carries no
    wave speed and may be negative.
    """
    speed = np.linalg.norm(state.u, axis=-1)
    depth = cfg.H if cfg.mode == "linear" else state.D
    return speed + np.sqrt(cfg.g * depth)


def flux_Ghat(g_plus, g_minus, f_jump_n, alpha):
    """Potential flux Ghat = {{G}} + alpha [[F]] . n+ (single valued)."""
    return 0.5 * (g_plus + g_minus) + alpha * f_jump_n


def flux_Fhat_n(f_plus_n, f_minus_n, g_jump, beta):
    """Normal mass flux Fhat . n+ = {{F}} . n+ + beta [[G]] (single valued)."""
    return 0.5 * (f_plus_n + f_minus_n) + beta * g_jump


def alpha_rusanov(u_plus, d_plus, u_minus, d_minus, g):
    """Dissipation coefficient max(c+/D+, c-/D-) / 2 with c = |u| + sqrt(gD).

    Symmetric in the two sides, so both compute the same value.  In the
    linearized regime this reduces to the classical Rusanov coefficient.
    """
    d_plus = np.asarray(d_plus, dtype=float)
    d_minus = np.asarray(d_minus, dtype=float)
    if np.any(d_plus <= 0) or np.any(d_minus <= 0):
        raise FlaggedStateError("nonpositive depth in flux evaluation")
    c_plus = np.linalg.norm(np.atleast_2d(u_plus), axis=-1).reshape(d_plus.shape) + np.sqrt(g * d_plus)
    c_minus = np.linalg.norm(np.atleast_2d(u_minus), axis=-1).reshape(d_minus.shape) + np.sqrt(g * d_minus)
    return 0.5 * np.maximum(c_plus / d_plus, c_minus / d_minus)


def _vorticity_from_traces(u, f, mesh: Mesh, u_plus, u_minus) -> np.ndarray:
    """Absolute vorticity solve given precomputed velocity edge traces."""
    cov1 = np.einsum("qijc,qijc->qij", u, mesh.g1)
    cov2 = np.einsum("qijc,qijc->qij", u, mesh.g2)
    omega = (deriv_xi(cov2, mesh) - deriv_eta(cov1, mesh)) / mesh.jac
    omega = omega + f
    u_avg = 0.5 * (u_plus + u_minus)
    # Boundary lift of ({{u}} - u) . t.  The single-valued average rides the
    # canonical edge frame (so edge sums cancel pairwise in the global
    # integral); each side's own trace keeps its own frame.
    flat = omega.reshape(-1)
    lift_plus = mesh.lift_p * np.einsum(
        "epc,epc->ep", u_avg - u_plus, mesh.t_e
    )
    lift_minus = -mesh.liftnum_m * np.einsum("epc,epc->ep", u_avg, mesh.t_e)
    lift_minus -= mesh.liftown_m * np.einsum("epc,epc->ep", u_minus, mesh.t_own_m)
    np.add.at(flat, mesh.idx_p, lift_plus)
    np.add.at(flat, mesh.idx_m, lift_minus)
    return omega


def compute_vorticity(u: np.ndarray, f, mesh: Mesh) -> np.ndarray:
    """Diagnose absolute vorticity omega = f + curl u + tangential lift.

    The boundary term exchanges raw Cartesian velocity vectors and dots the
    average with each side's tangent, which makes the global integral
    <1, omega - f> cancel pairwise over edges for any velocity field.
    """
    flat = u.reshape(-1, 3)
    return _vorticity_from_traces(u, f, mesh, flat[mesh.idx_p], flat[mesh.idx_m])


def _edge_alpha(fluxcfg: FluxConfig, cfg: PhysConfig, u_p, u_m, d_p, d_m):
    if fluxcfg.alpha_mode == "centered":
        return 0.0
    if cfg.mode == "linear":
        return 0.5 * np.sqrt(cfg.g * cfg.H) / cfg.H
    return alpha_rusanov(u_p, d_p, u_m, d_m, cfg.g)


def edge_flux_values(state: State, cfg: PhysConfig, fluxcfg: FluxConfig, mesh: Mesh):
    """Single-valued edge fluxes and jump terms, in plus-side node order.

    Returns (Ghat, Fhat_n, G_plus, G_minus, Fn_plus, Fn_minus, f_jump_n,
    g_jump), each of shape (E, P).  ``Fhat_n`` is measured along the
    canonical edge normal n+.  Exposed for the conservation and energy
    diagnostics, which re-derive the dissipation rate from these values.
    """
    uf = state.u.reshape(-1, 3)
    df = state.D.reshape(-1)
    u_p, u_m = uf[mesh.idx_p], uf[mesh.idx_m]
    d_p, d_m = df[mesh.idx_p], df[mesh.idx_m]
    if cfg.mode == "linear":
        g_p, g_m = cfg.g * d_p, cfg.g * d_m
        f_p, f_m = cfg.H * u_p, cfg.H * u_m
    else:
        g_p = 0.5 * np.einsum("epc,epc->ep", u_p, u_p) + cfg.g * d_p
        g_m = 0.5 * np.einsum("epc,epc->ep", u_m, u_m) + cfg.g * d_m
        f_p, f_m = d_p[..., None] * u_p, d_m[..., None] * u_m
    fn_p = np.einsum("epc,epc->ep", f_p, mesh.n_e)
    fn_m = np.einsum("epc,epc->ep", f_m, mesh.n_e)
    f_jump_n = fn_p - fn_m
    g_jump = g_p - g_m
    alpha = _edge_alpha(fluxcfg, cfg, u_p, u_m, d_p, d_m)
    ghat = flux_Ghat(g_p, g_m, f_jump_n, alpha)
    fhat_n = flux_Fhat_n(fn_p, fn_m, g_jump, fluxcfg.beta)
    return ghat, fhat_n, g_p, g_m, fn_p, fn_m, f_jump_n, g_jump


def _apply_flux_lifts(du, dD, mesh: Mesh, ghat, fhat_n, g_p, g_m, f_p_own_n, f_m_own_n):
    """Subtract the boundary lifts of (Ghat - G) n and (Fhat - F) . n.

    Numerical-flux parts use the canonical edge frame and w*scale on both
    sides (so they cancel bitwise in global budgets); own-trace parts use
    the owning side's frame.  ``f_*_own_n`` are the sides' own-normal mass
    flux components.
    """
    duf = du.reshape(-1, 3)
    ddf = dD.reshape(-1)
    np.add.at(
        duf,
        mesh.idx_p,
        -(mesh.lift_p * (ghat - g_p))[..., None] * mesh.n_e,
    )
    np.add.at(
        duf,
        mesh.idx_m,
        (mesh.liftnum_m * ghat)[..., None] * mesh.n_e
        + (mesh.liftown_m * g_m)[..., None] * mesh.n_own_m,
    )
    np.add.at(ddf, mesh.idx_p, -mesh.lift_p * (fhat_n - f_p_own_n))
    np.add.at(ddf, mesh.idx_m, mesh.liftnum_m * fhat_n + mesh.liftown_m * f_m_own_n)


def rhs_nonlinear(
    state: State, cfg: PhysConfig, fluxcfg: FluxConfig, mesh: Mesh
) -> tuple[np.ndarray, np.ndarray]:
    """Tendencies (du/dt, dD/dt) of the nonlinear vector-invariant system."""
    _check_depth(state.D)
    uf = state.u.reshape(-1, 3)
    df = state.D.reshape(-1)
    u_p, u_m = uf[mesh.idx_p], uf[mesh.idx_m]

    omega = _vorticity_from_traces(state.u, cfg.f, mesh, u_p, u_m)
    big_g = potential_G(state, cfg)
    flux = mass_flux_F(state)

    du = -(omega[..., None] * np.cross(mesh.k, state.u) + d_grad(big_g, mesh))
    if cfg.b is not None:
        du -= cfg.g * d_grad(cfg.b, mesh)
    dD = -d_div(flux, mesh)

    d_p, d_m = df[mesh.idx_p], df[mesh.idx_m]
    g_flat = big_g.reshape(-1)
    g_p, g_m = g_flat[mesh.idx_p], g_flat[mesh.idx_m]
    f_p, f_m = d_p[..., None] * u_p, d_m[..., None] * u_m
    fn_p = np.einsum("epc,epc->ep", f_p, mesh.n_e)
    fn_m = np.einsum("epc,epc->ep", f_m, mesh.n_e)
    alpha = _edge_alpha(fluxcfg, cfg, u_p, u_m, d_p, d_m)
    ghat = flux_Ghat(g_p, g_m, fn_p - fn_m, alpha)
    fhat_n = flux_Fhat_n(fn_p, fn_m, g_p - g_m, fluxcfg.beta)

    f_m_own_n = np.einsum("epc,epc->ep", f_m, mesh.n_own_m)
    _apply_flux_lifts(du, dD, mesh, ghat, fhat_n, g_p, g_m, fn_p, f_m_own_n)
    return du, dD


def rhs_linear(
    state: State, cfg: PhysConfig, fluxcfg: FluxConfig, mesh: Mesh
) -> tuple[np.ndarray, np.ndarray]:
    """Tendencies of the system linearized about rest depth H.

    Same flux structure as the nonlinear system with G -> g D and
    F -> H u; the dissipative coefficient reduces to the Rusanov value
    sqrt(g H) / (2 H).
    """
    if cfg.mode != "linear":
        raise ValueError("rhs_linear requires a linear-mode PhysConfig")
    u, d = state.u, state.D
    du = -(
        np.asarray(cfg.f)[..., None] * np.cross(mesh.k, u)
        + cfg.g * d_grad(d, mesh)
    )
    dD = -cfg.H * d_div(u, mesh)

    ghat, fhat_n, g_p, g_m, fn_p, _, _, _ = edge_flux_values(state, cfg, fluxcfg, mesh)
    uf = u.reshape(-1, 3)
    f_m_own_n = cfg.H * np.einsum("epc,epc->ep", uf[mesh.idx_m], mesh.n_own_m)
    _apply_flux_lifts(du, dD, mesh, ghat, fhat_n, g_p, g_m, fn_p, f_m_own_n)
    return du, dD


def rhs(state: State, cfg: PhysConfig, fluxcfg: FluxConfig, mesh: Mesh):
    """Mode dispatch: the linear or nonlinear right-hand side."""
    if cfg.mode == "linear":
        return rhs_linear(state, cfg, fluxcfg, mesh)
    return rhs_nonlinear(state, cfg, fluxcfg, mesh)


def energy_rate(state: State, cfg: PhysConfig, fluxcfg: FluxConfig, mesh: Mesh):
    """Global energy rate, evaluated two independent ways.

    Returns (rate, -dissipation) where ``rate`` pairs the tendencies with
    the energy gradient, sum_q <F, du/dt> + <G, dD/dt> (linear mode:
    <H u, du/dt> + <g D, dD/dt>), and ``dissipation`` is the edge sum
    sum w*scale (alpha ([[F]] . n)^2 + beta [[G]]^2).  The two agree to
    round-off; with centered fluxes both vanish.
    """
    du, dD = rhs(state, cfg, fluxcfg, mesh)
    if cfg.mode == "linear":
        fvec = cfg.H * state.u
        gsc = cfg.g * state.D
    else:
        fvec = mass_flux_F(state)
        gsc = potential_G(state, cfg)
    rate = float(
        np.einsum("qij,qijc,qijc->", mesh.wj, fvec, du)
        + np.einsum("qij,qij,qij->", mesh.wj, gsc, dD)
    )
    uf = state.u.reshape(-1, 3)
    df = state.D.reshape(-1)
    u_p, u_m = uf[mesh.idx_p], uf[mesh.idx_m]
    d_p, d_m = df[mesh.idx_p], df[mesh.idx_m]
    _, _, _, _, _, _, f_jump_n, g_jump = edge_flux_values(state, cfg, fluxcfg, mesh)
    alpha = _edge_alpha(fluxcfg, cfg, u_p, u_m, d_p, d_m)
    dissipation = float(
        np.sum(mesh.wscale_e * (alpha * f_jump_n**2 + fluxcfg.beta * g_jump**2))
    )
    return rate, -dissipation


def entropy_hessian_eigs(u, D: float, g: float) -> np.ndarray:
    """Eigenvalues of the 4x4 energy Hessian in (u, v, w, D), ascending.

    The characteristic polynomial factors as
    (D - lam)^2 (lam^2 - (D + g) lam + D g - |u|^2), so the spectrum is
    {D, D} plus the quadratic's roots; all four are positive exactly when
    the flow is subcritical, |u| < sqrt(g D).  Inputs are nondimensional.
    """
    if D <= 0:
        raise ValueError("depth must be positive")
    s = float(np.dot(u, u))
    half_tr = 0.5 * (D + g)
    disc = np.sqrt(0.25 * (D - g) ** 2 + s)
    lam_lo = half_tr - disc
    lam_hi = half_tr + disc
    return np.array([lam_lo, D, D, lam_hi])


def subcritical(u: np.ndarray, D: np.ndarray, g: float) -> np.ndarray:
    """Vectorized subcriticality flag |u|^2 < g D (strict at equality)."""
    u = np.asarray(u, dtype=float)
    speed2 = np.einsum("...c,...c->...", u, u)
    return speed2 < g * np.asarray(D)
