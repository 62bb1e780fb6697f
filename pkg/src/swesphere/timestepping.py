"""Strong-stability-preserving RK3 integration with CFL-adaptive steps.

The three-stage scheme is a convex combination of forward Euler steps,

    s1 = s + dt L(s)
    s2 = 3/4 s + 1/4 (s1 + dt L(s1))
    s  = 1/3 s + 2/3 (s2 + dt L(s2)),

so entropy bounds satisfied by an Euler step carry over.  The adaptive step
follows the CFL rule  dt = cfl * dx / (c_max (2 p + 1))  with c_max the
fastest nodal wave speed, dx the element spacing a (pi/2) / n, and p the
polynomial order; it is recomputed every step because the fastest wave speed
moves materially in turbulent runs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Mesh
from .swe import FlaggedStateError, FluxConfig, PhysConfig, State, rhs, wave_speed

__all__ = ["TimeControls", "ssp_rk3_step", "adaptive_dt", "integrate"]


@dataclass(frozen=True)
class TimeControls:
    """Step-size and callback policy for a run.

    Exactly one of the adaptive CFL number and ``fixed_dt`` governs the step
    size.  Observers are invoked every ``observe_every`` accepted steps, and
    always at t = 0 and at the (exactly hit) final time.
    """

    t_end: float
    cfl: float = 0.8
    fixed_dt: float | None = None
    observe_every: int = 1

    def __post_init__(self):
        if self.t_end < 0:
            raise ValueError("t_end must be >= 0")
        if self.fixed_dt is None and self.cfl <= 0:
            raise ValueError("cfl must be positive in adaptive mode")
        if self.fixed_dt is not None and self.fixed_dt <= 0:
            raise ValueError("fixed_dt must be positive")
        if self.observe_every < 1:
            raise ValueError("observe_every must be >= 1")


def ssp_rk3_step(state: State, dt: float, rhs_fn) -> State:
    """One Shu-Osher SSP-RK3 step of the (u, D) pair."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    u, d = state.u, state.D
    du, dd = rhs_fn(State(u, d))
    u1 = u + dt * du
    d1 = d + dt * dd
    du, dd = rhs_fn(State(u1, d1))
    u2 = 0.75 * u + 0.25 * (u1 + dt * du)
    d2 = 0.75 * d + 0.25 * (d1 + dt * dd)
    du, dd = rhs_fn(State(u2, d2))
    return State(
        (u + 2.0 * (u2 + dt * du)) / 3.0,
        (d + 2.0 * (d2 + dt * dd)) / 3.0,
    )


def adaptive_dt(state: State, mesh: Mesh, controls: TimeControls, order: int, cfg: PhysConfig) -> float:
    """CFL-limited step  dt = cfl * dx / (c_max (2 p + 1))."""
    c_max = float(np.max(wave_speed(state, cfg)))
    if c_max <= 0.0:
        if controls.fixed_dt is not None:
            return controls.fixed_dt
        raise ValueError("wave speed vanished; supply fixed_dt")
    return controls.cfl * mesh.dx / (c_max * (2 * order + 1))


def integrate(
    state: State,
    cfg: PhysConfig,
    fluxcfg: FluxConfig,
    controls: TimeControls,
    mesh: Mesh,
    observers=(),
) -> tuple[State, list]:
    """Advance to ``controls.t_end``; the last step is truncated to land on it.

    Observers are callables ``(t, step, state)``; non-None return values are
    collected into the observation log in call order.  Flagged-state aborts
    propagate with the failing time attached.  Deterministic for fixed
    inputs: identical runs produce identical states and logs.
    """
    state = state.copy()
    log: list = []
    t = 0.0
    step = 0

    def observe():
        for obs in observers:
            value = obs(t, step, state)
            if value is not None:
                log.append(value)

    def rhs_fn(s: State):
        return rhs(s, cfg, fluxcfg, mesh)

    observe()
    while t < controls.t_end:
        if controls.fixed_dt is not None:
            dt = controls.fixed_dt
        else:
            dt = adaptive_dt(state, mesh, controls, mesh.order, cfg)
        last = t + dt >= controls.t_end
        if last:
            dt = controls.t_end - t  # land exactly on t_end
        try:
            state = ssp_rk3_step(state, dt, rhs_fn)
        except FlaggedStateError as err:
            err.time = t
            raise
        t = controls.t_end if last else t + dt
        step += 1
        if step % controls.observe_every == 0 or t >= controls.t_end:
            observe()
    return state, log
