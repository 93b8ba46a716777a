"""End-to-end runs: stepping, CSV emission, checkpoints, verdict and manifest files."""
from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .checkpoint import load_checkpoint, save_checkpoint
from .config import ExperimentConfig
from .diagnostics import (
    DiagnosticsRecord,
    EnergyBudget,
    conservation_report,
    gronwall_check,
    snapshot,
    steady_state_equivalence,
)
from .dynamics import SimState, Stepper
from .errors import BlowUpError, ConfigError
from .synthesis import initial_state

log = logging.getLogger(__name__)

CSV_NAME = "diagnostics.csv"
VERDICT_NAME = "verdict.json"
MANIFEST_NAME = "manifest.json"
MAX_LATE_STATES = 32


def format_row(values) -> str:
    return ",".join("%.17g" % v for v in values)


def read_csv(path) -> list[DiagnosticsRecord]:
    lines = Path(path).read_text().splitlines()
    if not lines:
        return []
    cols = lines[0].split(",")
    if cols != DiagnosticsRecord.columns():
        raise ValueError(f"{path}: unexpected header")
    return [DiagnosticsRecord(*map(float, ln.split(","))) for ln in lines[1:] if ln]


@dataclass
class RunResult:
    state: SimState
    records: list
    verdict: dict
    output_dir: Path
    steps: int
    energy_residual: float = 0.0
    late_states: list = field(default_factory=list)


def _late_subset(states: list, limit: int = MAX_LATE_STATES) -> list:
    if len(states) <= limit:
        return states
    idx = np.unique(np.linspace(0, len(states) - 1, limit).round().astype(int))
    return [states[i] for i in idx]


def build_verdict(config: ExperimentConfig, records, late_states, energy_res: float) -> dict:
    out: dict = {"records": len(records), "energy_balance_residual": energy_res}
    if records:
        out["conservation"] = conservation_report(records).drift
    if len(records) >= 3:
        gv = gronwall_check(records)
        out["gronwall"] = {
            "constant": gv.constant,
            "constant_coarse": gv.constant_coarse,
            "stable": gv.stable,
            "envelope_holds": gv.envelope_holds,
            "passed": gv.passed,
        }
    if len(late_states) >= 2:
        vd = steady_state_equivalence(records, late_states, config.converged_threshold)
        out["steady_state"] = vd.to_dict()
    return out


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(type(o))


def _dump(path: Path, obj) -> None:
    def fix(v):
        if isinstance(v, float) and not math.isfinite(v):
            return str(v)
        if isinstance(v, dict):
            return {k: fix(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [fix(x) for x in v]
        return v

    path.write_text(json.dumps(fix(obj), indent=2, default=_json_default) + "\n")


def run_experiment(config: ExperimentConfig, resume=None, write: bool = True, keep_late: bool = True) -> RunResult:
    """Step the configured initial data to ``t_end`` and write the run artifacts.

    Snapshots are taken at every step index divisible by ``snapshot_every``
    and at the final step. With ``resume`` the run continues from a
    checkpoint; previously written CSV rows before the resume time are kept.
    Times are derived from step indices so resumed and uninterrupted runs
    see identical clocks.
    """
    if not isinstance(config, ExperimentConfig):
        raise ConfigError("run_experiment needs an ExperimentConfig")
    wall0 = time.perf_counter()
    out = Path(config.output_dir)
    if write:
        out.mkdir(parents=True, exist_ok=True)
    nsteps = config.nsteps
    if resume is not None:
        state = load_checkpoint(resume)
        if state.grid.n != config.n:
            raise ConfigError(f"checkpoint has n={state.grid.n}, config has n={config.n}")
        i0 = int(round(state.t / config.dt))
        if abs(i0 * config.dt - state.t) > 1e-9 * max(1.0, state.t):
            raise ConfigError(f"checkpoint time {state.t} is not a multiple of dt={config.dt}")
    else:
        state = initial_state(config)
        i0 = 0
    stepper = Stepper(state.grid, config.nu, config.dt, config.mode_cutoff)
    budget = EnergyBudget(state.grid, config.nu, config.dt)
    late_start = config.t_end * (1.0 - config.late_fraction)

    csv_path = out / CSV_NAME
    header = ",".join(DiagnosticsRecord.columns())
    kept: list[str] = []
    if resume is not None and csv_path.exists():
        for rec, line in zip(read_csv(csv_path), csv_path.read_text().splitlines()[1:]):
            if rec.t < state.t - 1e-9 * config.dt:
                kept.append(line)
    fh = None
    if write:
        fh = open(csv_path, "w")
        fh.write(header + "\n")
        for line in kept:
            fh.write(line + "\n")

    records: list[DiagnosticsRecord] = []
    late: list[SimState] = []

    def observe(i: int, st: SimState):
        if nsteps == 0:
            return
        if i % config.snapshot_every == 0 or i == nsteps:
            rec = snapshot(st, config)
            records.append(rec)
            if fh is not None:
                fh.write(format_row(rec.values()) + "\n")
            if keep_late and st.t >= late_start - 1e-12:
                late.append(st)

    y = stepper.to_half(state)
    i = i0
    last_good = state
    try:
        observe(i, state)
        if i < nsteps:
            budget.push(state.t, y)
        while i < nsteps:
            y = stepper.advance_half(y, i * config.dt)
            i += 1
            cur = stepper.from_half(y, i * config.dt, config.nu)
            budget.push(cur.t, y)
            observe(i, cur)
            last_good = cur
            if write and config.checkpoint_every and i % config.checkpoint_every == 0:
                save_checkpoint(cur, out / f"checkpoint_{i:08d}.bsq", config.seed)
                save_checkpoint(cur, out / "checkpoint_latest.bsq", config.seed)
    except BlowUpError:
        if write:
            save_checkpoint(last_good, out / "checkpoint_latest.bsq", config.seed)
            fh.close()
        log.error("blow-up after t=%s; last good state flushed", last_good.t)
        raise
    if fh is not None:
        fh.close()
    final = stepper.from_half(y, i * config.dt, config.nu) if i > i0 else state

    budget.finish()
    energy_res = budget.max_relative()
    late = _late_subset(late)
    verdict = build_verdict(config, records, late, energy_res)
    if write:
        if config.checkpoint_every and i > i0:
            save_checkpoint(final, out / "checkpoint_latest.bsq", config.seed)
        _dump(out / VERDICT_NAME, verdict)
        _dump(
            out / MANIFEST_NAME,
            {
                "config": config.to_dict(),
                "steps": i - i0,
                "start_step": i0,
                "resumed_from": None if resume is None else str(resume),
                "final_time": final.t,
                "kernel_backend": kernels.BACKEND,
                "wall_time_s": time.perf_counter() - wall0,
            },
        )
    return RunResult(final, records, verdict, out, i - i0, energy_res, late)
