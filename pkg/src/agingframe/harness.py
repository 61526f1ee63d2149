"""Run commands: deterministic evaluation, optimization, Monte Carlo
validation, comparison-table reproduction and parameter sweeps.

Each command returns a :class:`RunReport` whose numbers are reproducible from
the echoed configuration and seed; ``write_report`` serializes the report as
JSON plus schema-stable CSV tables (and figures next to them).
"""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bundled import SweepSpec, table_blocks
from .channelsim import observe_pilot, sample_trajectory
from .deteq import DetEqResult, FixedPointConfig, LayoutEvaluator
from .errors import InvalidScenarioError
from .estimator import lmmse_estimate
from .framelayout import FrameLayout
from .optimizer import OptimizerConfig, opt_resource
from .receiver import SinrContext, conditional_mean, instantaneous_se, \
    instantaneous_sinr
from .scenario import Scenario, scenario_to_dict

LN2 = float(np.log(2.0))

CSV_SCHEMAS = {
    "slots": ["slot", "kind", "se_nats", "se_bits"],
    "candidates": ["layout", "frames", "pp_max", "pd_max", "ase_nats", "error"],
    "montecarlo": ["slot", "mc_mean", "mc_std", "deterministic", "rel_gap"],
    "table": ["block", "layout", "frames", "ase_nats", "ase_bits",
              "ase_reported", "reference_ase", "rel_dev", "is_argmax",
              "expected_argmax", "error"],
    "sweep": ["value", "ase_nats", "layout", "frames", "pp_max", "pd_max"],
    "trajectories": ["slot", "user", "antenna", "re", "im"],
}


@dataclass
class RunReport:
    command: str
    config: dict
    results: dict
    diagnostics: dict = field(default_factory=dict)
    ok: bool = True
    wall_clock_s: float = 0.0
    version: str = __version__

    def to_dict(self) -> dict:
        return {"command": self.command, "config": self.config,
                "results": self.results, "diagnostics": self.diagnostics,
                "ok": self.ok, "wall_clock_s": self.wall_clock_s,
                "version": self.version}


def _se_out(se_nats: float, units: str) -> float:
    return se_nats / LN2 if units == "bits" else se_nats


def write_csv(path, schema_name: str, rows):
    columns = CSV_SCHEMAS[schema_name]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow({c: row.get(c, "") for c in columns})


def write_report(report: RunReport, out_dir, plots: bool = True):
    """Write report JSON, CSV tables and figures into ``out_dir``."""
    import json

    from . import plotting

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / f"{report.command}_report.json", "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, default=_json_default)
        fh.write("\n")
    tables = report.results.get("tables", {})
    for name, (schema, rows) in tables.items():
        write_csv(out / f"{name}.csv", schema, rows)
    if not plots:
        return
    units = report.config.get("se_units", "nats")
    if "slots" in tables:
        rows = tables["slots"][1]
        plotting.render_slot_se(
            [r["slot"] for r in rows],
            [_se_out(r["se_nats"], units) for r in rows],
            [r["slot"] for r in rows if r["kind"] == "pilot"],
            out / "slots.png", units)
    if "montecarlo" in tables:
        rows = tables["montecarlo"][1]
        plotting.render_montecarlo(
            [r["slot"] for r in rows], [r["mc_mean"] for r in rows],
            [r["mc_std"] for r in rows], [r["deterministic"] for r in rows],
            out / "montecarlo.png", units)
    if "sweep" in tables:
        rows = tables["sweep"][1]
        plotting.render_sweep([r["value"] for r in rows],
                              [_se_out(r["ase_nats"], units) for r in rows],
                              report.config.get("parameter", "value"),
                              out / "sweep.png", units)
    if "candidates" in tables:
        plotting.render_candidates(tables["candidates"][1],
                                   out / "candidates.png", "nats")
    if "table" in tables:
        plotting.render_table_blocks(tables["table"][1], out / "table.png")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, FrameLayout):
        return str(obj)
    return str(obj)


# ---------------------------------------------------------------------------
# deterministic evaluation
# ---------------------------------------------------------------------------

def _slot_rows(result: DetEqResult):
    rows = []
    for slot in range(1, result.layout.horizon + 1):
        kind = "pilot" if result.layout.is_pilot(slot) else "data"
        se = float(result.se_per_slot[slot - 1])
        rows.append({"slot": slot, "kind": kind, "se_nats": se,
                     "se_bits": se / LN2})
    return rows


def cmd_deteq(scenario: Scenario, layout: FrameLayout,
              fp_config: FixedPointConfig | None = None) -> RunReport:
    """Per-slot deterministic SE and ASE for one layout."""
    start = time.perf_counter()
    result = LayoutEvaluator(scenario, layout, fp_config).evaluate()
    units = scenario.se_units
    report = RunReport(
        command="deteq",
        config={**scenario_to_dict(scenario), "layout": str(layout)},
        results={
            "ase_nats": result.ase,
            "ase": _se_out(result.ase, units),
            "sigma_d2": result.sigma_d2,
            "tables": {"slots": ("slots", _slot_rows(result))},
        },
        diagnostics={"fp_iterations": result.fp_iterations,
                     "fp_residual": result.fp_residual})
    report.wall_clock_s = time.perf_counter() - start
    return report


# ---------------------------------------------------------------------------
# optimization
# ---------------------------------------------------------------------------

def cmd_optimize(scenario: Scenario, cfg: OptimizerConfig | None = None,
                 fp_config: FixedPointConfig | None = None) -> RunReport:
    """Exhaustive frame search with per-candidate power optimization."""
    start = time.perf_counter()
    cfg = cfg or OptimizerConfig()
    result = opt_resource(scenario, cfg, fp_config)
    cand_rows = [{"layout": str(e.layout), "frames": e.layout.frame_count,
                  "pp_max": e.pp_max, "pd_max": e.pd_max, "ase_nats": e.ase,
                  "error": e.error or ""} for e in result.candidates]
    units = scenario.se_units
    report = RunReport(
        command="optimize",
        config={**scenario_to_dict(scenario),
                "q_max": cfg.q_max, "m_max": cfg.m_max,
                "fixed_powers": cfg.fixed_powers},
        results={
            "layout": str(result.layout),
            "frame_count": result.frame_count,
            "pp_max": result.pp_max,
            "pd_max": result.pd_max,
            "ase_nats": result.ase,
            "ase": _se_out(result.ase, units),
            "tables": {"candidates": ("candidates", cand_rows)},
        })
    report.wall_clock_s = time.perf_counter() - start
    return report


# ---------------------------------------------------------------------------
# Monte Carlo validation
# ---------------------------------------------------------------------------

def simulate_instantaneous_se(scenario: Scenario, layout: FrameLayout,
                              trials: int, seed: int | None = None,
                              fp_config: FixedPointConfig | None = None):
    """Instantaneous SE per (trial, data slot) through the full chain.

    Full chain: sample trajectories, observe pilots, estimate, condition,
    combine, score.  Returns ``(se_matrix, slot_stats, evaluator)`` with
    ``se_matrix`` of shape (trials, #data slots), in nats.
    """
    seed = scenario.seed if seed is None else seed
    evaluator = LayoutEvaluator(scenario, layout, fp_config)
    slot_stats, weights, sigma_d2 = evaluator.all_slot_statistics()
    n_users = scenario.n_users
    horizon = layout.horizon
    tau_p = scenario.pilot_length
    se = np.empty((trials, len(slot_stats)))
    for trial in range(trials):
        trajectories = []
        pilot_obs = []
        for k in range(n_users):
            cov = evaluator.covs[k]
            traj = sample_trajectory(cov, horizon, seed, trial, k)
            gain = evaluator._gains[k]
            obs = observe_pilot(traj, layout, gain.alpha, gain.pilot_power,
                                gain.sigma_p2, tau_p, seed, trial, k)
            trajectories.append(traj)
            pilot_obs.append(obs)
        for j, stats in enumerate(slot_stats):
            z_list = []
            q_list = []
            for k in range(n_users):
                kern_i = stats.kernels_slot[k]
                kern_p = stats.kernels_anchor[k]
                stack_i = np.concatenate(
                    [pilot_obs[k][s] for s in kern_i.window.slots])
                stack_p = np.concatenate(
                    [pilot_obs[k][s] for s in kern_p.window.slots])
                est_i = lmmse_estimate(kern_i, stack_i)
                est_p = lmmse_estimate(kern_p, stack_p)
                z = conditional_mean(stats.moments[k], est_i.vector,
                                     est_p.vector)
                z_list.append(z)
                q_list.append(stats.moments[k].residual_cov)
            ctx = SinrContext(cond_means=z_list, residual_covs=q_list,
                              weights=weights, noise_var=sigma_d2)
            se[trial, j] = instantaneous_se(instantaneous_sinr(ctx))
    return se, slot_stats, evaluator


def cmd_montecarlo(scenario: Scenario, layout: FrameLayout, trials: int,
                   seed: int | None = None,
                   fp_config: FixedPointConfig | None = None) -> RunReport:
    """Monte Carlo mean/std of the instantaneous SE versus the deterministic
    equivalent, with the relative gap per data slot."""
    start = time.perf_counter()
    if trials < 1:
        raise InvalidScenarioError("trials must be >= 1")
    se, slot_stats, _ = simulate_instantaneous_se(scenario, layout, trials,
                                                  seed, fp_config)
    mc_mean = se.mean(axis=0)
    mc_std = se.std(axis=0)
    det = np.array([s.se for s in slot_stats])
    with np.errstate(divide="ignore", invalid="ignore"):
        gap = np.where(det > 0, np.abs(mc_mean - det) / det, 0.0)
    rows = [{"slot": s.slot, "mc_mean": float(mc_mean[j]),
             "mc_std": float(mc_std[j]), "deterministic": float(det[j]),
             "rel_gap": float(gap[j])}
            for j, s in enumerate(slot_stats)]
    ase_mc = float(np.sum(mc_mean) / layout.horizon)
    ase_det = float(np.sum(det) / layout.horizon)
    decay = {}
    if layout.horizon >= 2:
        from .corrmodel import decay_check
        for k in range(scenario.n_users):
            rep = decay_check(scenario.covariance_set(k, layout.horizon))
            decay[f"user{k}"] = {"max_radius": rep.max_radius,
                                 "violations": rep.violations}
    report = RunReport(
        command="montecarlo",
        config={**scenario_to_dict(scenario), "layout": str(layout),
                "trials": trials,
                "seed": scenario.seed if seed is None else seed},
        results={
            "ase_mc_nats": ase_mc,
            "ase_det_nats": ase_det,
            "ase_rel_gap": abs(ase_mc - ase_det) / ase_det if ase_det else 0.0,
            "max_slot_rel_gap": float(np.max(gap)) if len(rows) else 0.0,
            "tables": {"montecarlo": ("montecarlo", rows)},
        },
        diagnostics={"decay": decay})
    report.wall_clock_s = time.perf_counter() - start
    return report


# ---------------------------------------------------------------------------
# comparison table
# ---------------------------------------------------------------------------

def cmd_table1(fp_config: FixedPointConfig | None = None) -> RunReport:
    """Reproduce the bundled comparison-table grid and check each block's
    argmax against the reference bold row.

    Reported values are given in the log base that best matches the
    reference magnitudes per block (recorded in the rows); the argmax check
    is base-independent.
    """
    start = time.perf_counter()
    rows = []
    mismatches = []
    for block in table_blocks():
        ases = []
        errors = []
        for layout in block.layouts:
            try:
                result = LayoutEvaluator(block.scenario, layout,
                                         fp_config).evaluate()
                ases.append(result.ase)
                errors.append("")
            except InvalidScenarioError as exc:
                ases.append(np.nan)
                errors.append(str(exc))
        ases = np.array(ases)
        ref = np.array(block.reference_ase)
        valid = ~np.isnan(ases)
        # pick nats or bits per block for the informational value comparison
        dev_nats = np.mean(np.abs(ases[valid] - ref[valid]) / ref[valid])
        dev_bits = np.mean(np.abs(ases[valid] / LN2 - ref[valid]) / ref[valid])
        use_bits = dev_bits < dev_nats
        reported = ases / LN2 if use_bits else ases
        argmax = int(np.nanargmax(ases))
        ok = argmax == block.bold_index
        if not ok:
            mismatches.append(block.name)
        for j, layout in enumerate(block.layouts):
            rows.append({
                "block": block.name, "layout": str(layout),
                "frames": layout.frame_count,
                "ase_nats": float(ases[j]),
                "ase_bits": float(ases[j] / LN2),
                "ase_reported": float(reported[j]),
                "reference_ase": float(ref[j]),
                "rel_dev": float(abs(reported[j] - ref[j]) / ref[j])
                if valid[j] else float("nan"),
                "is_argmax": j == argmax,
                "expected_argmax": j == block.bold_index,
                "error": errors[j],
            })
    report = RunReport(
        command="table1",
        config={"blocks": [b.name for b in table_blocks()],
                "assumptions": "tau_p=1, sigma_p2=1e-4, f_c=1000, "
                               "noise from SNR column"},
        results={
            "argmax_ok": not mismatches,
            "mismatched_blocks": mismatches,
            "block_notes": {b.name: b.notes for b in table_blocks()
                            if b.notes},
            "tables": {"table": ("table", rows)},
        },
        ok=not mismatches)
    report.wall_clock_s = time.perf_counter() - start
    return report


# ---------------------------------------------------------------------------
# parameter sweeps
# ---------------------------------------------------------------------------

SWEEP_PARAMETERS = ("fd1", "kf1", "snr", "rp", "pl2", "fd2", "rp2")


def apply_sweep_value(scenario: Scenario, parameter: str, value: float) -> Scenario:
    """Scenario copy with one sweepable scalar replaced."""
    if parameter not in SWEEP_PARAMETERS:
        raise InvalidScenarioError(
            f"parameter {parameter!r} is not sweepable {SWEEP_PARAMETERS}")
    scen = scenario.copy()
    if parameter == "fd1":
        scen.users[0].doppler = _const(value)
    elif parameter == "kf1":
        scen.users[0].rician_factor = _const(value)
    elif parameter == "snr":
        if scen.snr_db is None:
            raise InvalidScenarioError("scenario does not use snr_db")
        scen.snr_db = value
    elif parameter == "rp":
        # tagged user: re-split the fixed budget at ratio Pp/Pd = value
        budget = scen.users[0].pp_max + scen.users[0].pd_max
        scen.users[0].pp_max = budget * value / (1.0 + value)
        scen.users[0].pd_max = budget / (1.0 + value)
    elif parameter == "pl2":
        _need_interferer(scen)
        scen.users[1].path_loss_db = value
    elif parameter == "fd2":
        _need_interferer(scen)
        scen.users[1].doppler = _const(value)
    elif parameter == "rp2":
        # interferer: data power stays, pilot power scales with the ratio,
        # so total interference power is invariant and only the split between
        # combiner-known and residual interference moves
        _need_interferer(scen)
        scen.users[1].pp_max = value * scen.users[1].pd_max
    return scen


def _const(value):
    from .schedules import constant
    return constant(float(value))


def _need_interferer(scen):
    if scen.n_users < 2:
        raise InvalidScenarioError("sweep parameter needs a second user")


def cmd_sweep(scenario: Scenario, parameter: str, values,
              cfg: OptimizerConfig | None = None,
              fp_config: FixedPointConfig | None = None) -> RunReport:
    """(parameter, ASE, q*, M*) rows across a sweep grid."""
    start = time.perf_counter()
    cfg = cfg or OptimizerConfig(q_max=24, m_max=1, fixed_powers=True)
    rows = []
    for value in values:
        scen = apply_sweep_value(scenario, parameter, value)
        result = opt_resource(scen, cfg, fp_config)
        rows.append({"value": float(value), "ase_nats": result.ase,
                     "layout": str(result.layout),
                     "frames": result.frame_count,
                     "pp_max": result.pp_max, "pd_max": result.pd_max})
    report = RunReport(
        command="sweep",
        config={**scenario_to_dict(scenario), "parameter": parameter,
                "values": [float(v) for v in values],
                "q_max": cfg.q_max, "m_max": cfg.m_max,
                "fixed_powers": cfg.fixed_powers},
        results={
            "layout_constant": len({r["layout"] for r in rows}) == 1,
            "tables": {"sweep": ("sweep", rows)},
        })
    report.wall_clock_s = time.perf_counter() - start
    return report


def run_sweep_spec(spec: SweepSpec,
                   fp_config: FixedPointConfig | None = None) -> RunReport:
    cfg = OptimizerConfig(q_max=spec.q_max, m_max=spec.m_max,
                          fixed_powers=spec.fixed_powers)
    return cmd_sweep(spec.scenario, spec.parameter, spec.values, cfg, fp_config)
