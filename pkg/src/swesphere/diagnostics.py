"""Conserved-quantity budgets, error norms, and convergence orders.

Budgets are global discrete integrals of the running state:

    mass               <1, D>
    absolute vorticity <1, omega>,  omega from the DG vorticity solve
    energy             <D u, u>/2 + <g D, D>/2
    potential enstrophy <omega / D, omega>/2

Signed totals can be near zero (total absolute vorticity always is, and the
linear-mode perturbation mass is as well), so drifts are normalized by the
L1 sizes <1, |D|> and <1, |omega|> at the reference time; for ordinary
positive-depth runs the mass normalization coincides with the total mass.

Linear-mode runs hold a sign-indefinite perturbation depth, so the energy
switches to the quadratic form H <u, u>/2 + g <D, D>/2 and the potential
enstrophy (which divides by D) is reported as zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Mesh
from .operators import inner_scalar, inner_vector, project_scalar, project_vector
from .swe import PhysConfig, State, compute_vorticity

__all__ = [
    "BudgetRecord",
    "budgets",
    "l2_error_scalar",
    "l2_error_vector",
    "state_errors",
    "convergence_order",
    "least_squares_order",
]


@dataclass(frozen=True)
class BudgetRecord:
    """Global budgets at one instant, plus relative drifts versus a reference."""

    t: float
    mass: float
    vorticity: float
    energy: float
    enstrophy: float
    vorticity_scale: float
    mass_scale: float
    mass_drift: float = 0.0
    vorticity_drift: float = 0.0
    energy_drift: float = 0.0
    enstrophy_drift: float = 0.0

    CSV_HEADER = (
        "t,mass,vorticity,energy,enstrophy,"
        "mass_drift,vorticity_drift,energy_drift,enstrophy_drift"
    )

    def csv_row(self) -> str:
        vals = (
            self.t,
            self.mass,
            self.vorticity,
            self.energy,
            self.enstrophy,
            self.mass_drift,
            self.vorticity_drift,
            self.energy_drift,
            self.enstrophy_drift,
        )
        return ",".join(f"{v:.17g}" for v in vals)


def _relative_drift(value: float, ref: float, scale: float | None = None) -> float:
    denom = abs(ref) if scale is None else scale
    if denom == 0.0:
        return value - ref
    return (value - ref) / denom


def budgets(
    state: State,
    cfg: PhysConfig,
    mesh: Mesh,
    t: float = 0.0,
    reference: BudgetRecord | None = None,
) -> BudgetRecord:
    """Evaluate the global budgets; drifts are relative to ``reference``."""
    one = np.ones_like(state.D)
    omega = compute_vorticity(state.u, cfg.f, mesh)
    mass = inner_scalar(one, state.D, mesh)
    mass_scale = inner_scalar(one, np.abs(state.D), mesh)
    vorticity = inner_scalar(one, omega, mesh)
    vort_scale = inner_scalar(one, np.abs(omega), mesh)
    if cfg.mode == "linear":
        energy = 0.5 * cfg.H * inner_vector(state.u, state.u, mesh)
        energy += 0.5 * cfg.g * inner_scalar(state.D, state.D, mesh)
        enstrophy = 0.0
    else:
        if np.any(state.D <= 0):
            raise ValueError("budgets require positive depth")
        energy = 0.5 * inner_vector(state.D[..., None] * state.u, state.u, mesh)
        energy += 0.5 * cfg.g * inner_scalar(state.D, state.D, mesh)
        enstrophy = 0.5 * inner_scalar(omega / state.D, omega, mesh)
    if not all(map(math.isfinite, (mass, vorticity, energy, enstrophy))):
        raise ValueError("budget integrals are not finite")
    rec = BudgetRecord(
        t=t,
        mass=mass,
        vorticity=vorticity,
        energy=energy,
        enstrophy=enstrophy,
        vorticity_scale=vort_scale,
        mass_scale=mass_scale,
    )
    if reference is None:
        return rec
    return BudgetRecord(
        t=t,
        mass=mass,
        vorticity=vorticity,
        energy=energy,
        enstrophy=enstrophy,
        vorticity_scale=vort_scale,
        mass_scale=mass_scale,
        mass_drift=_relative_drift(mass, reference.mass, reference.mass_scale),
        vorticity_drift=_relative_drift(
            vorticity, reference.vorticity, reference.vorticity_scale
        ),
        energy_drift=_relative_drift(energy, reference.energy),
        enstrophy_drift=_relative_drift(enstrophy, reference.enstrophy),
    )


def l2_error_scalar(field: np.ndarray, reference, mesh: Mesh) -> float:
    """Normalized L2 error sqrt(<e, e> / <ref, ref>) at the nodes."""
    ref = project_scalar(reference, mesh)
    err = field - ref
    denom = inner_scalar(ref, ref, mesh)
    if denom == 0.0:
        return float(np.sqrt(inner_scalar(err, err, mesh)))
    return float(np.sqrt(inner_scalar(err, err, mesh) / denom))


def l2_error_vector(field: np.ndarray, reference, mesh: Mesh) -> float:
    ref = project_vector(reference, mesh) if callable(reference) else reference
    err = field - ref
    denom = inner_vector(ref, ref, mesh)
    if denom == 0.0:
        return float(np.sqrt(inner_vector(err, err, mesh)))
    return float(np.sqrt(inner_vector(err, err, mesh) / denom))


def state_errors(state: State, ref_u, ref_d, mesh: Mesh) -> tuple[float, float]:
    """(velocity, depth) normalized L2 errors against reference fields."""
    return (
        l2_error_vector(state.u, ref_u, mesh),
        l2_error_scalar(state.D, ref_d, mesh),
    )


def convergence_order(pairs) -> list[float]:
    """Per-interval orders log(e_k / e_{k+1}) / log(h_k / h_{k+1}).

    ``pairs`` is a sequence of (h, error) tuples, finest last.
    """
    pairs = list(pairs)
    orders = []
    for (h0, e0), (h1, e1) in zip(pairs, pairs[1:]):
        if e0 == e1:
            orders.append(0.0)
        else:
            orders.append(float(np.log(e0 / e1) / np.log(h0 / h1)))
    return orders


def least_squares_order(pairs) -> float:
    """Slope of log(error) against log(h) over the whole series."""
    pairs = list(pairs)
    h = np.log([p[0] for p in pairs])
    e = np.log([p[1] for p in pairs])
    slope, _ = np.polyfit(h, e, 1)
    return float(slope)
