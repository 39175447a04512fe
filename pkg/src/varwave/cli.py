"""Batch driver: ``varwave run|convergence|compare CONFIG``.

CONFIG is a path or the name of a bundled scenario (``varwave list`` shows
them).  Exit codes: 0 success, 2 configuration error, 3 solver error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from varwave import config as cfgmod
from varwave.charmap import build_boundary
from varwave.config import ConfigError, RunConfig
from varwave.diagnostics import (
    EnergyReport,
    default_rect,
    energy_trace,
    l1_distance,
    lambda_residual,
    translation_modulus,
)
from varwave.goursat import CharGrid, SolverConfig, SolverError, check_pq_closed, integrate
from varwave.inverse_map import (
    PhysicalFrame,
    TimeOutOfRange,
    XTField,
    commutator_residual,
    integrate_xt,
    sample_frame,
)
from varwave.oracle import BlowupDetected, dalembert, upwind_rs
from varwave.wavefield import InitialData, SpeedFamily, make_data, riemann_invariants

EXIT_CONFIG, EXIT_SOLVER = 2, 3
FMT = "%.17g"


@dataclass
class RunResult:
    grid: CharGrid
    xt: XTField
    data: InitialData
    fam: SpeedFamily
    energy: EnergyReport
    frames: list[PhysicalFrame]
    report: dict


def build_data(cfg: RunConfig) -> tuple[SpeedFamily, InitialData]:
    fam = SpeedFamily(cfg.family, cfg.speed_params)
    return fam, make_data(cfg.kind, cfg.data_params, cfg.support, cfg.dx, fam)


def validate(cfg: RunConfig) -> None:
    """Semantic checks that need the library (family parameters, data,
    the h <= eps^3/4 coupling); raised as ConfigError."""
    try:
        build_data(cfg)
        for h, eps in cfg.rows():
            SolverConfig(M=cfg.M, h=h, mode=cfg.mode, epsilon=eps, corrector_iters=cfg.corrector_iters)
    except ValueError as exc:
        raise ConfigError(cfg.source, 0, str(exc)) from None


def _finite(v: float) -> float | None:
    return float(v) if math.isfinite(v) else None


def execute(cfg: RunConfig, h: float, eps: float, mode: str | None = None) -> RunResult:
    """Run every stage for one (h, eps) and collect the scalar diagnostics."""
    fam, data = build_data(cfg)
    curve = build_boundary(riemann_invariants(data, fam), data)
    mode = mode or cfg.mode
    scfg = SolverConfig(M=cfg.M, h=h, mode=mode, epsilon=eps if mode == "regularized" else 0.0,
                        corrector_iters=cfg.corrector_iters)
    grid = integrate(curve, fam, scfg)
    xt = integrate_xt(grid)
    energy = energy_trace(grid, xt, cfg.taus)
    frames = [sample_frame(grid, xt, tau, cfg.samples) for tau in cfg.taus]

    E0 = curve.E0
    drift = float(np.max(np.abs(energy.totals - E0))) if len(cfg.taus) else 0.0
    drift_rel = drift / E0 if E0 > 0 else drift
    violations = energy.monotone_violations()
    if mode != "conservative" and len(cfg.taus) > 1:
        violations += int(np.sum(np.diff(energy.energies) > 1e-3 * E0))
    act = grid.active
    try:
        comm = commutator_residual(grid)
        pqc = check_pq_closed(grid)
    except ValueError:
        comm = pqc = 0.0
    report = {
        "mode": mode,
        "h": h,
        "epsilon": scfg.epsilon,
        "E0": E0,
        "energy_drift_rel": drift_rel,
        "lambda_max": lambda_residual(grid)[0],
        "commutator_max": comm,
        "pq_closed_max": pqc,
        "pq_min": float(min(grid.p[act].min(), grid.q[act].min())),
        "pq_max": float(max(grid.p[act].max(), grid.q[act].max())),
        "monotone_violations": violations,
    }
    return RunResult(grid, xt, data, fam, energy, frames, report)


def oracle_distance(res: RunResult, taus) -> float:
    """Largest L-inf gap between the frames and the (t, x) reference over the
    taus the reference reaches (d'Alembert for constant speed, upwind
    otherwise at spacing h)."""
    fam, data = res.fam, res.data
    frames = {f.tau: f for f in res.frames}
    taus = [float(t) for t in taus if float(t) in frames]
    if not taus:
        return math.nan
    if fam.family == "constant":
        return max(float(np.max(np.abs(frames[t].us - dalembert(data, fam.c0, t, frames[t].xs)))) for t in taus)
    worst, reached = 0.0, False
    for t in taus:
        try:
            ref = upwind_rs(data, fam, t, dx=res.grid.h)
        except BlowupDetected:
            break
        fr = frames[t]
        worst = max(worst, float(np.max(np.abs(fr.us - np.interp(fr.xs, ref.x, ref.u)))))
        reached = True
    return worst if reached else math.nan


# -- writers ------------------------------------------------------------------


def write_grid(path: Path, res: RunResult) -> None:
    g, xt = res.grid, res.xt
    J, I = np.nonzero(g.active)  # row-major: Y first, then X
    cols = [g.X[I], g.Y[J]] + [f[J, I] for f in (g.u, g.w, g.z, g.p, g.q, xt.x, xt.t)]
    np.savetxt(path, np.column_stack(cols), fmt=FMT, delimiter=",",
               header="X,Y,u,w,z,p,q,x,t", comments="")


def write_frames(path: Path, frames) -> None:
    rows = [np.column_stack([np.full(f.xs.shape, f.tau), f.xs, f.us, f.Rs, f.Ss]) for f in frames]
    arr = np.vstack(rows) if rows else np.zeros((0, 5))
    # '%.17g' renders the sentinel as 'inf'
    np.savetxt(path, arr, fmt=FMT, delimiter=",", header="tau,x,u,R,S", comments="")


def write_energy(path: Path, rep: EnergyReport) -> None:
    arr = np.column_stack([rep.taus, rep.energies, rep.totals, rep.sing_w, rep.sing_z])
    np.savetxt(path, arr.reshape(-1, 5), fmt=FMT, delimiter=",",
               header="tau,energy_ac,energy_total,sing_w,sing_z", comments="")


def write_json(path: Path, obj: dict) -> None:
    clean = {k: (_finite(v) if isinstance(v, float) else v) for k, v in obj.items()}
    path.write_text(json.dumps(clean, indent=2, sort_keys=True) + "\n")


def write_table(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None or (isinstance(v, float) and math.isnan(v)) else
                        (FMT % v if isinstance(v, float) else v) for v in row])


# -- commands -----------------------------------------------------------------


def _out_dir(cfg: RunConfig, override: str | None) -> Path:
    out = Path(override or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _solver_failure(out: Path, exc: Exception, **extra) -> int:
    write_json(out / "report.json", {"status": "error", "error": type(exc).__name__,
                                     "message": str(exc), **extra})
    print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return EXIT_SOLVER


def cmd_run(cfg: RunConfig, out_dir: str | None = None) -> int:
    """Single run: grid.csv, frames.csv, energy.csv and report.json."""
    out = _out_dir(cfg, out_dir)
    h, eps = cfg.rows()[0]
    try:
        res = execute(cfg, h, eps)
    except (SolverError, TimeOutOfRange, ValueError) as exc:
        return _solver_failure(out, exc)
    write_grid(out / "grid.csv", res)
    write_frames(out / "frames.csv", res.frames)
    write_energy(out / "energy.csv", res.energy)
    write_json(out / "report.json", {"status": "ok", **res.report})
    return 0


CONV_METRICS = ("linf_vs_oracle", "lambda_max", "commutator_max", "pq_closed_max", "energy_drift")


def _order(prev, cur, h_prev, h_cur):
    if prev is None or not (prev > 0 and cur > 0) or h_prev == h_cur:
        return None
    return math.log(prev / cur) / math.log(h_prev / h_cur)


def cmd_convergence(cfg: RunConfig, out_dir: str | None = None) -> int:
    """One run per (h, eps) row.  Orders are log(e_prev/e)/log(h_prev/h),
    i.e. the log2 of successive ratios when h halves; the translation
    modulus columns use shifts of 1 and 4 spacings of the first row's h."""
    out = _out_dir(cfg, out_dir)
    rows = cfg.rows()
    spacing = max(h for h, _ in rows)
    shifts = [(spacing, 0.0), (0.0, spacing), (4 * spacing, 4 * spacing)]
    header = (["h", "eps", *CONV_METRICS] + [f"order_{m}" for m in CONV_METRICS]
              + ["tm_shift_x", "tm_shift_y", "tm_shift_diag", "l1_to_prev", "pq_min", "pq_max"])
    table, prev, prev_grid, rect = [], None, None, None
    for h, eps in rows:
        try:
            res = execute(cfg, h, eps)
        except (SolverError, TimeOutOfRange, ValueError) as exc:
            return _solver_failure(out, exc, h=h, epsilon=eps)
        vals = {
            "linf_vs_oracle": oracle_distance(res, cfg.taus),
            "lambda_max": res.report["lambda_max"],
            "commutator_max": res.report["commutator_max"],
            "pq_closed_max": res.report["pq_closed_max"],
            "energy_drift": res.report["energy_drift_rel"],
        }
        orders = [_order(prev[0][m], vals[m], prev[1], h) if prev else None for m in CONV_METRICS]
        if rect is None:
            rect = default_rect(res.grid, 4 * spacing + 2 * spacing)
        tm = translation_modulus([res.grid], shifts, [eps], rect, spacing).l1[0]
        l1 = l1_distance(prev_grid, res.grid, rect, spacing) if prev_grid is not None else None
        table.append([h, eps, *(vals[m] for m in CONV_METRICS), *orders, *map(float, tm), l1,
                      res.report["pq_min"], res.report["pq_max"]])
        prev, prev_grid = (vals, h), res.grid
        del res
    write_table(out / "convergence.csv", header, table)
    return 0


def frame_l2(f1: PhysicalFrame, f2: PhysicalFrame, n: int) -> float:
    """L2 distance between two frames on the overlap of their x-ranges."""
    lo, hi = max(f1.xs[0], f2.xs[0]), min(f1.xs[-1], f2.xs[-1])
    if hi <= lo:
        return math.nan
    xs = np.linspace(lo, hi, n)
    d = np.interp(xs, f1.xs, f1.us) - np.interp(xs, f2.xs, f2.us)
    return float(np.sqrt(np.trapezoid(d * d, xs)))


def cmd_compare(cfg: RunConfig, out_dir: str | None = None) -> int:
    """Conservative against dissipative-sharp on the same data: compare.csv."""
    out = _out_dir(cfg, out_dir)
    h = cfg.hs[0] if cfg.hs else cfg.rows()[0][0]
    runs = {}
    for mode in ("conservative", "dissipative-sharp"):
        try:
            runs[mode] = execute(cfg, h, 0.0, mode=mode)
        except (SolverError, TimeOutOfRange, ValueError) as exc:
            return _solver_failure(out, exc, mode=mode)
    c, d = runs["conservative"], runs["dissipative-sharp"]
    header = ["tau", "energy_conservative", "energy_dissipative", "sing_w_conservative",
              "sing_z_conservative", "sing_w_dissipative", "sing_z_dissipative", "l2_distance"]
    rows = []
    for k, tau in enumerate(cfg.taus):
        rows.append([float(tau), c.energy.energies[k], d.energy.energies[k], c.energy.sing_w[k],
                     c.energy.sing_z[k], d.energy.sing_w[k], d.energy.sing_z[k],
                     frame_l2(c.frames[k], d.frames[k], cfg.samples)])
    write_table(out / "compare.csv", header, rows)
    return 0


COMMANDS = {"run": cmd_run, "convergence": cmd_convergence, "compare": cmd_compare}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="varwave", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__.splitlines()[0] if fn.__doc__ else None)
        p.add_argument("config", help="config file or bundled scenario name")
        p.add_argument("-o", "--out", help="output directory (overrides output.dir)")
    sub.add_parser("list", help="list bundled scenarios")
    args = ap.parse_args(argv)

    if args.command == "list":
        print("\n".join(cfgmod.scenario_names()))
        return 0
    try:
        cfg = cfgmod.load(args.config)
        validate(cfg)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return COMMANDS[args.command](cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
