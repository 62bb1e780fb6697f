"""Command-line driver: configuration, run orchestration, and sweeps.

A run is described by a manifest, assembled from an optional plain-text
``key = value`` config file (UTF-8, ``#`` comments) overridden by CLI flags.
Unknown keys are rejected; ``cfl`` and ``dt`` are mutually exclusive.  The
resolved manifest is echoed verbatim into the output directory, which is
sufficient to reproduce the run exactly: identical manifests produce
bit-identical budget files.

Each run writes:

``manifest.txt``   the resolved configuration, one key = value per line
``budgets.csv``    t, mass, vorticity, energy, enstrophy and relative
                   drifts, one row per observation cadence
``snap_*.txt``     columnar node snapshots (element, i, j, lon, lat, D,
                   u, v, w, omega) at the snapshot cadence, if enabled
``summary.txt``    wall-clock time and final drifts

Exit codes: 0 success, 2 configuration error, 3 flagged-state abort (the
depth lost positivity), 1 other failures.
"""
from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .diagnostics import BudgetRecord, budgets, convergence_order, state_errors
from .geometry import build_mesh
from .swe import CONSERVING, DISSIPATIVE, FlaggedStateError, PhysConfig, State, compute_vorticity
from .testcases import get_case, init_galewsky
from .timestepping import TimeControls, integrate

__all__ = ["RunManifest", "parse_config", "run", "convergence_harness", "main"]

FLUX_MODES = {"conserving": CONSERVING, "dissipative": DISSIPATIVE}


@dataclass
class RunManifest:
    """Validated description of one run."""

    testcase: str
    n: int
    order: int = 3
    flux: str = "conserving"
    cfl: float | None = None
    dt: float | None = None
    days: float | None = None
    out: str = "runs/out"
    snapshot_every: int = 0
    linear: bool = False
    perturbed: bool = True
    seed: int = 0

    def validate(self) -> "RunManifest":
        get_case(self.testcase)
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.flux not in FLUX_MODES:
            raise ValueError(f"flux must be one of {sorted(FLUX_MODES)}")
        if self.cfl is not None and self.dt is not None:
            raise ValueError("cfl and dt are mutually exclusive")
        if self.cfl is not None and self.cfl <= 0:
            raise ValueError("cfl must be positive")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.days is not None and self.days < 0:
            raise ValueError("days must be >= 0")
        if self.snapshot_every < 0:
            raise ValueError("snapshot_every must be >= 0")
        return self

    def echo(self) -> str:
        lines = [f"{f.name} = {getattr(self, f.name)}" for f in fields(self)]
        return "\n".join(lines) + "\n"


_BOOL_KEYS = {"linear", "perturbed"}
_INT_KEYS = {"n", "order", "snapshot_every", "seed"}
_FLOAT_KEYS = {"cfl", "dt", "days"}
_STR_KEYS = {"testcase", "flux", "out"}
_ALL_KEYS = _BOOL_KEYS | _INT_KEYS | _FLOAT_KEYS | _STR_KEYS


def _coerce(key: str, raw: str):
    if key in _BOOL_KEYS:
        low = raw.strip().lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ValueError(f"cannot parse boolean {key} = {raw!r}")
    if key in _INT_KEYS:
        return int(raw)
    if key in _FLOAT_KEYS:
        return float(raw)
    return raw.strip()


def _read_config_file(path: str | Path) -> dict:
    values = {}
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _ALL_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw)
    return values


def _build_argparser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swesphere",
        description=(
            "Energy-stable DG shallow water solver on the cubed sphere. "
            "Flags override config-file values."
        ),
    )
    parser.add_argument("config", nargs="?", help="key = value config file")
    parser.add_argument("--testcase", choices=["geostrophic", "tc2", "tc5", "tc6", "galewsky"])
    parser.add_argument("--n", type=int, help="elements per panel edge (6 n^2 total)")
    parser.add_argument("--order", type=int, help="polynomial order (default 3)")
    parser.add_argument("--flux", choices=sorted(FLUX_MODES))
    parser.add_argument("--cfl", type=float, help="adaptive CFL number (default 0.8)")
    parser.add_argument("--dt", type=float, help="fixed step in seconds (excludes --cfl)")
    parser.add_argument(
        "--days",
        type=float,
        help="run length in days (in time units for the nondimensional geostrophic case)",
    )
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--snapshot-every", type=int, dest="snapshot_every",
                        help="steps between snapshots/budget rows (0 = budgets every 10 steps, no snapshots)")
    parser.add_argument("--linear", action="store_true", default=None,
                        help="force linear mode (H = mean depth) on a nonlinear case")
    parser.add_argument("--perturbed", action="store_true", default=None,
                        help="apply the Galewsky depth perturbation (default)")
    parser.add_argument("--unperturbed", action="store_true", default=None,
                        help="disable the Galewsky depth perturbation")
    return parser


def parse_config(argv: list[str]) -> RunManifest:
    """Manifest from a config file and/or flags; flags win."""
    args = _build_argparser().parse_args(argv)
    values: dict = {}
    if args.config:
        values.update(_read_config_file(args.config))
    for key in _ALL_KEYS:
        got = getattr(args, key, None)
        if got is not None:
            values[key] = got
    if args.unperturbed:
        values["perturbed"] = False
    missing = {"testcase", "n"} - set(values)
    if missing:
        raise ValueError(f"missing required keys: {sorted(missing)}")
    return RunManifest(**values).validate()


def _write_snapshot(path: Path, mesh, state: State, cfg: PhysConfig) -> None:
    omega = compute_vorticity(state.u, cfg.f, mesh)
    lon, lat = mesh.lonlat()
    p = mesh.nodes_per_side
    with path.open("w", encoding="utf-8") as fh:
        fh.write("element i j lon lat D u v w omega\n")
        for q in range(mesh.nelem):
            for i in range(p):
                for j in range(p):
                    u3 = state.u[q, i, j]
                    fh.write(
                        f"{q} {i} {j} "
                        f"{lon[q, i, j]:.17g} {lat[q, i, j]:.17g} "
                        f"{state.D[q, i, j]:.17g} "
                        f"{u3[0]:.17g} {u3[1]:.17g} {u3[2]:.17g} "
                        f"{omega[q, i, j]:.17g}\n"
                    )


def run(manifest: RunManifest) -> dict:
    """Execute one run; returns a summary dict (raises on failure)."""
    manifest.validate()
    case = get_case(manifest.testcase)
    outdir = Path(manifest.out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "manifest.txt").write_text(manifest.echo(), encoding="utf-8")

    mesh = build_mesh(manifest.n, manifest.order, case.radius)
    if manifest.testcase == "galewsky":
        state, cfg = init_galewsky(mesh, perturbed=manifest.perturbed)
    else:
        state, cfg = case.build(mesh)
    if manifest.linear and cfg.mode != "linear":
        h_mean = float(
            np.einsum("qij,qij->", mesh.wj, state.D) / mesh.area()
        )
        cfg = PhysConfig(g=cfg.g, f=cfg.f, b=cfg.b, mode="linear", H=h_mean)
    fluxcfg = FLUX_MODES[manifest.flux]

    days = case.default_days if manifest.days is None else manifest.days
    controls = TimeControls(
        t_end=days * case.time_unit,
        cfl=0.8 if manifest.cfl is None else manifest.cfl,
        fixed_dt=manifest.dt,
        observe_every=manifest.snapshot_every or 10,
    )

    reference_budget = budgets(state, cfg, mesh, t=0.0)
    budget_rows: list[BudgetRecord] = []

    def budget_observer(t, step, st):
        rec = budgets(st, cfg, mesh, t=t, reference=reference_budget)
        budget_rows.append(rec)

    def snapshot_observer(t, step, st):
        if manifest.snapshot_every:
            _write_snapshot(outdir / f"snap_{step:08d}.txt", mesh, st, cfg)

    started = time.perf_counter()
    final, _ = integrate(
        state,
        cfg,
        fluxcfg,
        controls,
        mesh,
        observers=[budget_observer, snapshot_observer],
    )
    elapsed = time.perf_counter() - started

    (outdir / "budgets.csv").write_text(
        BudgetRecord.CSV_HEADER
        + "\n"
        + "\n".join(rec.csv_row() for rec in budget_rows)
        + "\n",
        encoding="utf-8",
    )

    last = budget_rows[-1]
    summary = {
        "testcase": manifest.testcase,
        "elements": mesh.nelem,
        "steps_observed": len(budget_rows) - 1,
        "wall_seconds": elapsed,
        "mass_drift": last.mass_drift,
        "vorticity_drift": last.vorticity_drift,
        "energy_drift": last.energy_drift,
        "enstrophy_drift": last.enstrophy_drift,
    }
    if case.reference is not None:
        wind_fn, depth_fn = case.reference(controls.t_end)
        err_u, err_d = state_errors(final, wind_fn, depth_fn, mesh)
        summary["l2_error_u"] = err_u
        summary["l2_error_D"] = err_d
    (outdir / "summary.txt").write_text(
        "".join(f"{k} = {v}\n" for k, v in summary.items()), encoding="utf-8"
    )
    return summary


def convergence_harness(base: RunManifest, resolutions: list[int]) -> list[dict]:
    """Run a resolution sweep and emit an (n, error, order) table.

    Requires a test case with an analytic reference.  Outputs
    ``convergence.csv`` and ``convergence.txt`` under the base output
    directory; a sub-run failure aborts but preserves the partial table.
    """
    case = get_case(base.testcase)
    if case.reference is None:
        raise ValueError(f"test case {base.testcase!r} has no reference solution")
    outdir = Path(base.out)
    outdir.mkdir(parents=True, exist_ok=True)
    rows: list[dict] = []
    try:
        for n in resolutions:
            sub = RunManifest(
                **{
                    **{f.name: getattr(base, f.name) for f in fields(base)},
                    "n": n,
                    "out": str(outdir / f"n{n:03d}"),
                }
            )
            summary = run(sub)
            rows.append(
                {"n": n, "h": 1.0 / n, "error_D": summary["l2_error_D"], "error_u": summary["l2_error_u"]}
            )
    finally:
        if rows:
            orders = convergence_order([(r["h"], r["error_D"]) for r in rows])
            for row, order in zip(rows[1:], orders):
                row["order"] = order
            header = "n,h,error_D,error_u,order"
            lines = [header]
            for row in rows:
                lines.append(
                    f"{row['n']},{row['h']:.17g},{row['error_D']:.17g},"
                    f"{row['error_u']:.17g},{row.get('order', float('nan')):.6g}"
                )
            (outdir / "convergence.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
            text = ["  n        error(D)        error(u)    order"]
            for row in rows:
                text.append(
                    f"{row['n']:3d}  {row['error_D']:14.6e}  {row['error_u']:14.6e}"
                    + (f"  {row['order']:7.3f}" if "order" in row else "      --")
                )
            (outdir / "convergence.txt").write_text("\n".join(text) + "\n", encoding="utf-8")
    return rows


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        manifest = parse_config(argv)
    except (ValueError, OSError, KeyError) as err:
        print(f"swesphere: configuration error: {err}", file=sys.stderr)
        return 2
    try:
        summary = run(manifest)
    except FlaggedStateError as err:
        when = "" if err.time is None else f" at t = {err.time:g} s"
        print(f"swesphere: aborted{when}: {err}", file=sys.stderr)
        return 3
    except Exception as err:  # noqa: BLE001 - CLI boundary
        print(f"swesphere: error: {err}", file=sys.stderr)
        return 1
    for key, value in summary.items():
        print(f"{key} = {value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
