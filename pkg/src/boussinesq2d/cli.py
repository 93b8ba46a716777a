"""Command line entry points."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .config import ExperimentConfig
from .errors import BlowUpError, ConfigError, CorruptCheckpointError

log = logging.getLogger("boussinesq2d")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from exc


def _load(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    if getattr(args, "output_dir", None):
        cfg = cfg.replace(output_dir=args.output_dir)
    return cfg


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, default=float) + "\n")


def cmd_run(args) -> int:
    from .experiment import run_experiment

    cfg = _load(args)
    res = run_experiment(cfg, resume=args.resume)
    print(f"steps={res.steps} t={res.state.t:.6g} records={len(res.records)} output={res.output_dir}")
    print(f"energy_balance_residual={res.energy_residual:.3e}")
    return 0


def cmd_taylor(args) -> int:
    from .studies import taylor_check
    from .dynamics import taylor_time_derivatives
    from .synthesis import initial_state

    cfg = _load(args)
    state = initial_state(cfg)
    td = taylor_time_derivatives(state, args.order, cfg.mode_cutoff)
    report = {"order": args.order, "derivatives": td.report(), "finite_difference": []}
    for row in td.report():
        print(f"j={row['j']} |d_t^j u|_H1={row['u_h1']:.6e} |d_t^j rho|_L2={row['rho_l2']:.6e} "
              f"div_defect={row['u_divergence_defect']:.2e}")
    for cmp in taylor_check(state, args.order, args.h, cfg.mode_cutoff):
        report["finite_difference"].append(vars(cmp))
        print(f"j={cmp.order} fd_rel_error u={cmp.u_rel_error:.2e} rho={cmp.rho_rel_error:.2e}")
    _write_json(Path(cfg.output_dir) / "taylor_check.json", report)
    return 0


def cmd_commutator(args) -> int:
    from .studies import commutator_study

    cfg = _load(args)
    study = commutator_study(cfg.n, args.s, args.trials, cfg.seed, cfg.s_u, cfg.s_rho)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "commutator.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["trial", "n", "s", "residual", "bound", "ratio"])
        w.writeheader()
        for s, entry in study.items():
            for row in entry["rows"]:
                w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    stable = True
    for s, entry in study.items():
        ratio = max(entry["n"], entry["2n"]) / min(entry["n"], entry["2n"])
        stable &= ratio < 2.0
        print(f"s={s:g} C*(n={cfg.n})={entry['n']:.4e} C*(n={2 * cfg.n})={entry['2n']:.4e} change={ratio:.3f}")
    return 0 if stable else 1


def cmd_trajectories(args) -> int:
    from .studies import trajectory_study
    from .synthesis import initial_state

    cfg = _load(args)
    rep = trajectory_study(initial_state(cfg), args.seeds, cfg.t_end, cfg.dt, method=args.method,
                           mode_cutoff=cfg.mode_cutoff)
    _write_json(Path(cfg.output_dir) / "trajectories.json", vars(rep))
    print(f"seeds={rep.seeds} t={rep.t:.6g} transport_error={rep.transport_error:.3e} "
          f"jacobian=[{rep.jacobian_min:.8f}, {rep.jacobian_max:.8f}] int_grad_u_inf={rep.grad_u_inf_integral:.6e}")
    return 0


def cmd_steady(args) -> int:
    from .experiment import run_experiment

    cfg = _load(args)
    res = run_experiment(cfg)
    vd = res.verdict.get("steady_state")
    if vd is None:
        print("not enough late snapshots for a verdict", file=sys.stderr)
        return 1
    print(f"converged={vd['converged']} consistent={vd['consistent']} rho_cauchy_l2={vd['rho_cauchy_l2']:.3e} "
          f"buoy_solenoidal_final={vd['buoy_solenoidal_final']:.3e} norm_gap={vd['norm_preservation_gap']:.3e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="boussinesq2d", description="Pseudo-spectral 2D viscous Boussinesq experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="JSON experiment configuration")
        sp.add_argument("--output-dir", help="override the configured output directory")

    sp = sub.add_parser("run", help="run an experiment")
    common(sp)
    sp.add_argument("--resume", help="checkpoint to continue from")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("taylor-check", help="time derivatives at t=0 by recursion vs finite differences")
    common(sp)
    sp.add_argument("--order", type=int, choices=range(1, 5), required=True)
    sp.add_argument("--h", type=float, default=1e-3, help="finite-difference step")
    sp.set_defaults(func=cmd_taylor)

    sp = sub.add_parser("commutator-study", help="commutator residual/bound ratios under resolution doubling")
    common(sp)
    sp.add_argument("--s", type=_float_list, required=True, help="exponents, e.g. '0.25,0.5,1.5'")
    sp.add_argument("--trials", type=int, required=True)
    sp.set_defaults(func=cmd_commutator)

    sp = sub.add_parser("trajectories", help="flow map transport and Jacobian check")
    common(sp)
    sp.add_argument("--seeds", type=int, required=True)
    sp.add_argument("--method", choices=("interp", "direct"), default="interp")
    sp.set_defaults(func=cmd_trajectories)

    sp = sub.add_parser("steady-state", help="long run and steady-state verdict")
    common(sp)
    sp.set_defaults(func=cmd_steady)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, CorruptCheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BlowUpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
