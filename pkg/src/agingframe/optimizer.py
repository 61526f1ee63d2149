"""Exhaustive frame enumeration with projected-gradient power optimization.

Candidates are all frame-size vectors with M in [1, M_max] and per-frame
sizes in [2, ceil(q_max / M)].  For each candidate the pilot/data power split
is optimized by projected gradient ascent on the deterministic ASE (central
finite differences, backtracking step halving), and the best candidate wins
with deterministic tie-breaking: fewer frames first, then lexicographically
smaller sizes.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import itertools
import math
import os

import numpy as np

from .deteq import FixedPointConfig, LayoutEvaluator
from .errors import AgingFrameError, SolverError
from .framelayout import FrameLayout, build_layout
from .scenario import Scenario

THREADS_ENV = "AGING_THREADS"


def max_workers() -> int:
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    return os.cpu_count() or 1


def parallel_map(fn, items):
    """Ordered map over items, threaded when AGING_THREADS allows."""
    items = list(items)
    workers = min(max_workers(), len(items)) or 1
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class OptimizerConfig:
    q_max: int = 12
    m_max: int = 4
    tol: float = 1e-6
    maxiter: int = 200
    step_fraction: float = 0.05        # mu_w = step_fraction * P_tot
    fd_rel_step: float = 1e-4
    power_floor_fraction: float = 1e-6  # floor = fraction * P_tot
    total_budget_bound: bool = False    # sum(q) <= q_max instead of per-frame
    fixed_powers: bool = False
    literal_ascent: bool = False        # fixed step, no backtracking

    def __post_init__(self):
        if self.q_max < 2:
            raise ValueError("q_max must be >= 2")
        if self.m_max < 1:
            raise ValueError("m_max must be >= 1")
        if self.tol <= 0 or self.maxiter < 1:
            raise ValueError("tol and maxiter must be positive")


@dataclass
class CandidateLogEntry:
    layout: FrameLayout
    pp_max: float
    pd_max: float
    ase: float
    iterations: int
    error: str | None = None


@dataclass
class OptResult:
    layout: FrameLayout
    frame_count: int
    pp_max: float
    pd_max: float
    ase: float
    candidates: list = field(default_factory=list)

    @property
    def frame_sizes(self):
        return self.layout.frame_sizes


def enumerate_layouts(cfg: OptimizerConfig):
    """All candidate layouts for the configured bounds, deterministic order."""
    layouts = []
    for m in range(1, cfg.m_max + 1):
        if cfg.total_budget_bound:
            for sizes in _compositions(cfg.q_max, m):
                layouts.append(build_layout(sizes))
            continue
        bound = math.ceil(cfg.q_max / m)
        if bound < 2:
            continue
        for sizes in itertools.product(range(2, bound + 1), repeat=m):
            layouts.append(build_layout(sizes))
    return layouts


def _compositions(total: int, m: int):
    """Size-m frame vectors with entries >= 2 and sum <= total, sorted."""
    if 2 * m > total:
        return
    for sizes in itertools.product(range(2, total - 2 * (m - 1) + 1), repeat=m):
        if sum(sizes) <= total:
            yield sizes


def project_powers(w, p_tot: float, floor: float = 0.0) -> np.ndarray:
    """Euclidean projection onto {x : x >= floor, sum(x) <= p_tot}.

    Exact for the two-dimensional pilot/data split: clamp to the floor, shift
    the excess equally off the budget face, re-clamp, and pin the partner
    coordinate when one sits at the floor.
    """
    x = np.maximum(np.asarray(w, dtype=float), floor)
    excess = x.sum() - p_tot
    if excess <= 0:
        return x
    x = x - excess / x.size
    if np.all(x >= floor):
        return x
    # some coordinate fell below the floor: pin it, give the rest the budget
    x = np.maximum(x, floor)
    free = x > floor
    n_free = int(np.count_nonzero(free))
    if n_free:
        budget = p_tot - floor * (x.size - n_free)
        x[free] = np.maximum(budget / n_free, floor) if n_free > 1 else \
            max(budget, floor)
    return x


@dataclass
class PowerAscentResult:
    w: np.ndarray
    ase: float
    iterations: int
    trace: list
    all_feasible: bool


def optimize_powers(objective, w0, p_tot: float,
                    cfg: OptimizerConfig) -> PowerAscentResult:
    """Projected gradient ascent on ASE over w = [Pp_max, Pd_max].

    Terminates when the step change or the objective change drops to ``tol``
    or after ``maxiter`` iterations.  Unless ``literal_ascent`` is set, a step
    that would decrease the objective halves the step size instead.
    """
    floor = cfg.power_floor_fraction * p_tot
    w = project_powers(np.asarray(w0, dtype=float), p_tot, floor)
    f = objective(w)
    mu = cfg.step_fraction * p_tot
    trace = [(w.copy(), f)]
    feasible = _is_feasible(w, p_tot, floor)
    iterations = 0
    for _ in range(cfg.maxiter):
        iterations += 1
        grad = _fd_gradient(objective, w, cfg, floor)
        w_new = project_powers(w + mu * grad, p_tot, floor)
        f_new = objective(w_new)
        if not cfg.literal_ascent:
            while f_new < f and mu > 1e-12 * p_tot:
                mu *= 0.5
                w_new = project_powers(w + mu * grad, p_tot, floor)
                f_new = objective(w_new)
            if f_new < f:
                break             # no ascent at any step size: stay put
        feasible = feasible and _is_feasible(w_new, p_tot, floor)
        step = float(np.linalg.norm(w_new - w))
        delta = abs(f_new - f)
        w, f = w_new, f_new
        trace.append((w.copy(), f))
        if step <= cfg.tol or delta <= cfg.tol:
            break
    return PowerAscentResult(w=w, ase=f, iterations=iterations, trace=trace,
                             all_feasible=feasible)


def _is_feasible(w, p_tot, floor):
    return bool(np.all(w >= floor - 1e-15) and w.sum() <= p_tot + 1e-12)


def _fd_gradient(objective, w, cfg: OptimizerConfig, floor: float):
    grad = np.zeros_like(w)
    for i in range(w.size):
        h = cfg.fd_rel_step * max(abs(w[i]), 10 * floor, 1e-12)
        up = w.copy()
        up[i] += h
        down = w.copy()
        down[i] = max(down[i] - h, floor)
        denom = up[i] - down[i]
        grad[i] = (objective(up) - objective(down)) / denom
    return grad


def opt_resource(scenario: Scenario, cfg: OptimizerConfig | None = None,
                 fp_config: FixedPointConfig | None = None) -> OptResult:
    """Search all frame counts/sizes, optimizing powers per candidate.

    Deterministic given scenario and config: candidates are evaluated in a
    fixed order and ties resolve to fewer frames, then smaller sizes.
    """
    cfg = cfg or OptimizerConfig()
    p_tot = scenario.total_budget()
    layouts = enumerate_layouts(cfg)
    if not layouts:
        raise AgingFrameError("no feasible layouts under the configured bounds")

    def evaluate(layout: FrameLayout) -> CandidateLogEntry:
        try:
            evaluator = LayoutEvaluator(scenario, layout, fp_config)
            if cfg.fixed_powers:
                result = evaluator.evaluate()
                return CandidateLogEntry(layout=layout,
                                         pp_max=scenario.tagged.pp_max,
                                         pd_max=scenario.tagged.pd_max,
                                         ase=result.ase, iterations=0)
            w0 = np.array([0.5, 0.5]) * p_tot

            def objective(w):
                return evaluator.evaluate(w[0], w[1]).ase

            ascent = optimize_powers(objective, w0, p_tot, cfg)
            return CandidateLogEntry(layout=layout, pp_max=float(ascent.w[0]),
                                     pd_max=float(ascent.w[1]), ase=ascent.ase,
                                     iterations=ascent.iterations)
        except (AgingFrameError, SolverError, np.linalg.LinAlgError) as exc:
            return CandidateLogEntry(layout=layout, pp_max=np.nan,
                                     pd_max=np.nan, ase=-np.inf,
                                     iterations=0, error=str(exc))

    # sorted by (M, sizes) so the first strict maximum realizes the tie-break
    layouts.sort(key=lambda lay: (lay.frame_count, lay.frame_sizes))
    log = parallel_map(evaluate, layouts)
    best = None
    for entry in log:
        if entry.error is not None:
            continue
        if best is None or entry.ase > best.ase + 1e-12:
            best = entry
    if best is None:
        errors = "; ".join(f"{e.layout}: {e.error}" for e in log[:5])
        raise AgingFrameError(f"every candidate failed: {errors}")
    return OptResult(layout=best.layout, frame_count=best.layout.frame_count,
                     pp_max=best.pp_max, pd_max=best.pd_max, ase=best.ase,
                     candidates=log)
