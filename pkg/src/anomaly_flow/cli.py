"""Command-line front end.

    anomaly verify|symbol|flow-fuyau|flow-torus --config cfg.json [--seed N] [--out DIR]

Exit codes: 0 success, 1 verification failure, 2 flow halt (breakdown),
3 input error.  Monitor CSVs carry 17 significant digits so regressions
are diff-able; snapshots use the ANMF binary format; a summary JSON records
the halt reason and final monitor values.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import config as cfgmod
from . import flow as flowmod
from . import linearize, sampling, verify
from .errors import AnomalyFlowError, ConfigError
from .snapshot import KIND_PSI22, KIND_SCALAR_REAL, write_snapshot

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_FLOW_HALT = 2
EXIT_INPUT_ERROR = 3


def _fmt(x: float) -> str:
    return f"{x:.17e}"


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def run_verify(cfg: cfgmod.RunConfig) -> int:
    results = verify.run_all(cfg.seed)
    rows = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(
            f"{status}  {r.name:40s} trials={r.trials:5d} "
            f"max_residual={r.max_residual:.3e} tol={r.tolerance:.1e} {r.detail}"
        )
        rows.append(
            [r.name, str(r.trials), _fmt(r.max_residual), _fmt(r.tolerance), status, r.detail]
        )
    path = os.path.join(cfg.out_dir, "verify_report.csv")
    _write_csv(path, ["identity", "trials", "max_residual", "tolerance", "status", "detail"], rows)
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"FAILED identities: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VERIFY_FAIL
    print(f"all {len(results)} identity suites passed; report: {path}")
    return EXIT_OK


def run_symbol(cfg: cfgmod.RunConfig) -> int:
    spec = cfg.raw.get("symbol", {})
    omega = cfgmod.parse_omega_point(spec.get("omega"))
    r = cfgmod.parse_curvature(spec.get("curvature"), seed=cfg.seed, omega=omega)
    abs_omega = float(spec.get("abs_omega", 1.0))
    alphas = [float(a) for a in spec.get("alpha_list", [0.0])]
    n_dirs = int(spec.get("n_dirs", 16))
    xis = sampling.unit_covectors(n_dirs, cfg.seed)
    rows = []
    for alpha in alphas:
        worst = None
        margin = np.inf
        for xi in xis:
            rep = linearize.restricted_symbol(xi, omega, abs_omega, r, alpha)
            if worst is None or rep.min_real_part < worst.min_real_part:
                worst = rep
            norm = linearize.proposition_norm(xi, omega, abs_omega, r, alpha)
            margin = min(margin, linearize.xi_norm_sq(xi, omega) - norm)
        rows.append(
            [
                _fmt(alpha),
                _fmt(worst.min_real_part),
                str(worst.elliptic).lower(),
                _fmt(margin),
                str(worst.kernel_dim),
            ]
        )
        print(
            f"alpha'={alpha:g}: min Re = {worst.min_real_part:.6e}, "
            f"elliptic={worst.elliptic}, norm margin={margin:.6e}"
        )
    path = os.path.join(cfg.out_dir, "symbol_report.csv")
    _write_csv(
        path,
        ["alpha_prime", "min_real_part", "elliptic", "proposition_norm_margin", "kernel_dim"],
        rows,
    )
    print(f"report: {path}")
    return EXIT_OK


def _flow_outputs(cfg, grid, hist, monitor_names, kind, label):
    mon_path = os.path.join(cfg.out_dir, "monitors.csv")
    header = ["step", "t", "dt"] + list(monitor_names)
    rows = [
        [str(s), _fmt(t), _fmt(dt)] + [_fmt(hist.monitors[m][i]) for m in monitor_names]
        for i, (s, t, dt) in enumerate(zip(hist.steps, hist.times, hist.dts))
    ]
    _write_csv(mon_path, header, rows)
    final_snap = os.path.join(cfg.out_dir, f"{label}_final.anmf")
    write_snapshot(final_snap, grid, hist.final_payload, kind)
    summary = {
        "steps": len(hist.steps),
        "final_t": hist.final_t,
        "halt": None if hist.halt is None else {
            "reason": hist.halt.reason,
            "step": hist.halt.step,
            "t": hist.halt.t,
        },
        "final_monitors": {m: (hist.monitors[m][-1] if hist.monitors[m] else None)
                           for m in monitor_names},
        "monitor_csv": mon_path,
        "final_snapshot": final_snap,
    }
    if hist.halt is not None:
        halt_snap = os.path.join(cfg.out_dir, f"{label}_halt.anmf")
        write_snapshot(halt_snap, grid, hist.halt.snapshot, kind)
        summary["halt"]["snapshot"] = halt_snap
    with open(os.path.join(cfg.out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
    print(f"monitors: {mon_path}")
    print(f"summary: {os.path.join(cfg.out_dir, 'summary.json')}")
    if hist.halt is not None:
        print(f"flow halted: {hist.halt.reason} at t={hist.halt.t:.6g}", file=sys.stderr)
        return EXIT_FLOW_HALT
    return EXIT_OK


def _snapshot_writer(cfg, grid, kind, label):
    if cfg.snapshot_interval <= 0:
        return None

    def on_step(step, t, dt, payload, row):
        if step % cfg.snapshot_interval == 0:
            path = os.path.join(cfg.out_dir, f"{label}_{step:06d}.anmf")
            write_snapshot(path, grid, payload, kind)

    return on_step


def run_flow_fuyau(cfg: cfgmod.RunConfig) -> int:
    spec = cfg.raw.get("fuyau", {})
    grid = cfgmod.parse_grid(cfg.raw.get("grid", {"complex_dims": 2, "points_per_dim": 16}))
    prob = flowmod.FuYauProblem(
        grid,
        float(spec.get("alpha_prime", 0.0)),
        cfgmod.materialize_scalar(grid, spec.get("f"), "f"),
        cfgmod.materialize_scalar(grid, spec.get("mu"), "mu"),
    )
    u0 = None
    if "u0" in spec:
        u0 = cfgmod.materialize_scalar(grid, spec["u0"], "u0")
    ctrl = cfgmod.parse_dt_control(cfg.raw.get("time"))
    t_final = float(cfg.raw.get("time", {}).get("t_final", 1.0))
    hist = flowmod.fu_yau_run(
        prob, t_final, ctrl, u0=u0, on_step=_snapshot_writer(cfg, grid, KIND_SCALAR_REAL, "u")
    )
    return _flow_outputs(cfg, grid, hist, flowmod.FUYAU_MONITORS, KIND_SCALAR_REAL, "u")


def run_flow_torus(cfg: cfgmod.RunConfig) -> int:
    spec = cfg.raw.get("torus", {})
    grid = cfgmod.parse_grid(cfg.raw.get("grid", {"complex_dims": 1, "points_per_dim": 64}))
    alpha = float(spec.get("alpha_prime", 0.0))
    abs_omega = float(spec.get("abs_omega", 1.0))
    seed = int(spec.get("fixture_seed", cfg.seed))
    amplitude = float(spec.get("amplitude", 0.05))
    kmax = int(spec.get("kmax", 3))
    if spec.get("stationary"):
        prob = flowmod.make_stationary_torus_problem(
            grid, abs_omega, alpha, seed, amplitude=amplitude, kmax=kmax
        )
    else:
        omega0 = flowmod.make_balanced_omega0(
            grid, abs_omega, seed,
            base_scale=float(spec.get("base_scale", 2.0)),
            amplitude=amplitude, kmax=kmax,
        )
        phi0 = np.zeros(grid.shape + (3, 3), dtype=complex)
        prob = flowmod.TorusProblem(grid, alpha, abs_omega, phi0, omega0)
    ctrl = cfgmod.parse_dt_control(cfg.raw.get("time"))
    t_final = float(cfg.raw.get("time", {}).get("t_final", 1.0))
    hist = flowmod.torus_run(
        prob, t_final, ctrl, on_step=_snapshot_writer(cfg, grid, KIND_PSI22, "psi")
    )
    return _flow_outputs(cfg, grid, hist, flowmod.TORUS_MONITORS, KIND_PSI22, "psi")


_RUNNERS = {
    "verify": run_verify,
    "symbol": run_symbol,
    "flow-fuyau": run_flow_fuyau,
    "flow-torus": run_flow_torus,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="anomaly",
        description="Flows of Hermitian (2,2)-forms: verification, symbol analysis, evolution",
    )
    parser.add_argument("command", choices=sorted(_RUNNERS))
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--out", default=None, help="override output directory")
    args = parser.parse_args(argv)
    try:
        cfg = cfgmod.load_config(args.config)
        if cfg.command != args.command:
            raise ConfigError(
                f"config command {cfg.command!r} does not match CLI command {args.command!r}"
            )
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.out_dir = args.out
        os.makedirs(cfg.out_dir, exist_ok=True)
        return _RUNNERS[cfg.command](cfg)
    except (ConfigError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except AnomalyFlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
