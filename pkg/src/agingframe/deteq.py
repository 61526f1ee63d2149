"""Deterministic-equivalent spectral efficiency and its layout average.

For each data slot the interferers' conditional second moments enter a small
Stieltjes-type fixed point (one unknown per interferer); its solution plugs
into a single trace to give the deterministic per-slot spectral efficiency.
Averaging over all slots of the layout (pilot slots contribute zero, so pilot
overhead penalizes the average) yields the objective optimized by the frame
search.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corrmodel import multi_step_transition
from .errors import SolverError
from .estimator import PilotGainConfig, kernel_for_window, pilot_window
from .framelayout import FrameLayout, split_powers
from .receiver import conditional_moments
from .scenario import Scenario


# ---------------------------------------------------------------------------
# fixed point
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FixedPointConfig:
    tolerance: float = 1e-9
    max_iterations: int = 500
    damping: float = 1.0

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must be in (0, 1]")


@dataclass
class FixedPointDiagnostics:
    iterations: int = 0
    residual: float = 0.0
    residual_history: list = field(default_factory=list)
    damped: bool = False


def interference_floor(residual_covs, weights) -> np.ndarray:
    """S = sum_k w_k Q_k over all users (statistics only)."""
    s = None
    for w, q in zip(weights, residual_covs):
        term = w * q
        s = term if s is None else s + term
    return s


def solve_fixed_point(mean_moments, floor: np.ndarray, noise_var: float,
                      weights, cfg: FixedPointConfig | None = None,
                      literal: bool = False, m0=None):
    """Solve the interference fixed point for users k = 2..K.

    ``mean_moments``/``weights`` list the interferers' R_z and w = alpha^2 P_d
    (length K-1).  The default map absorbs the weights into the moments on
    both sides; ``literal=True`` keeps the unweighted moments inside the
    fixed point for comparison.  Returns ``(m, diagnostics)``.
    """
    cfg = cfg or FixedPointConfig()
    n_unknowns = len(mean_moments)
    diag = FixedPointDiagnostics()
    if n_unknowns == 0:
        return np.zeros(0), diag
    n = floor.shape[0]
    terms = [w * r for w, r in zip(weights, mean_moments)] if not literal \
        else [np.asarray(r) for r in mean_moments]
    base = floor + noise_var * np.eye(n, dtype=complex)
    m = np.zeros(n_unknowns) if m0 is None else np.asarray(m0, dtype=float).copy()
    damping = cfg.damping
    prev_res = np.inf
    worse_count = 0
    for it in range(1, cfg.max_iterations + 1):
        d = base.copy()
        for mk, term in zip(m, terms):
            d += term / (1.0 + mk)
        d_inv = np.linalg.solve(d, np.eye(n, dtype=complex))
        m_new = np.array([float(np.real(np.sum(term * d_inv.T)))
                          for term in terms])
        res = float(np.max(np.abs(m_new - m))) if n_unknowns else 0.0
        diag.residual_history.append(res)
        if res > prev_res:
            worse_count += 1
            if worse_count >= 2 and damping > 0.5:
                damping = 0.5       # oscillation: engage damping
                diag.damped = True
                worse_count = 0
        else:
            worse_count = 0
        prev_res = res
        m = (1.0 - damping) * m + damping * m_new
        diag.iterations = it
        diag.residual = res
        if res <= cfg.tolerance:
            return m, diag
    raise SolverError(
        f"fixed point did not converge within {cfg.max_iterations} iterations "
        f"(residual {diag.residual:.3e})", diag.residual_history)


def deterministic_sinr(tagged_moment: np.ndarray, tagged_weight: float,
                       interferer_moments, interferer_weights, m: np.ndarray,
                       floor: np.ndarray, noise_var: float) -> float:
    """Deterministic SINR <w1 R_z1, D^{-1}> with the solved fixed point."""
    n = floor.shape[0]
    d = floor + noise_var * np.eye(n, dtype=complex)
    for w, r, mk in zip(interferer_weights, interferer_moments, m):
        d += (w * r) / (1.0 + mk)
    x = np.linalg.solve(d, tagged_weight * tagged_moment)
    return float(max(np.real(np.trace(x)), 0.0))


def deterministic_se(gamma: float) -> float:
    return float(np.log1p(gamma))


# ---------------------------------------------------------------------------
# per-layout evaluation
# ---------------------------------------------------------------------------

@dataclass
class SlotStatistics:
    """Power-resolved statistics of one data slot (all users)."""

    slot: int
    anchor: int
    kernels_slot: list          # per-user EstimationKernel at the data slot
    kernels_anchor: list        # per-user EstimationKernel at the anchor
    moments: list               # per-user ConditionalMoments
    weights: np.ndarray
    floor: np.ndarray
    m: np.ndarray
    gamma: float
    se: float
    fp_diag: FixedPointDiagnostics | None = None


@dataclass
class DetEqResult:
    layout: FrameLayout
    se_per_slot: np.ndarray     # horizon entries, zeros at pilot slots
    ase: float
    sigma_d2: float
    weights: np.ndarray
    fp_iterations: int
    fp_residual: float
    pp_max: float
    pd_max: float
    m_per_slot: dict = field(default_factory=dict)  # slot -> (K-1,) solution

    @property
    def data_slots(self):
        return self.layout.data_slots


class LayoutEvaluator:
    """Caches layout/scenario statistics and evaluates ASE per power split.

    All power-independent quantities (covariances, window Gram factorizations,
    cross-covariance rows, transition chains) are prepared once; each call to
    :meth:`evaluate` only re-weights the regularized inverses.
    """

    def __init__(self, scenario: Scenario, layout: FrameLayout,
                 fp_config: FixedPointConfig | None = None):
        self.scenario = scenario
        self.layout = layout
        self.fp_config = fp_config or FixedPointConfig()
        self.wave = scenario.wave()
        horizon = layout.horizon
        scenario.validate_horizon(horizon)
        self.covs = [scenario.covariance_set(k, horizon)
                     for k in range(scenario.n_users)]
        self._windows = {m: pilot_window(layout, m,
                                         scenario.pilot_window_rule)
                         for m in range(1, layout.frame_count + 1)}
        # per-user gain configs; pilot power filled in per evaluation
        self._gains = [PilotGainConfig(alpha=u.alpha, pilot_power=0.0,
                                       sigma_p2=u.sigma_p2,
                                       tau_p=self.wave.pilot_length)
                       for u in scenario.users]
        # kernels per (user, slot); anchor transitions per (user, data slot)
        self._kernels = []
        self._transitions = []
        for k, cov in enumerate(self.covs):
            kernels = {}
            transitions = {}
            for i in range(1, horizon + 1):
                frame = layout.frame_of(i)
                kernels[i] = kernel_for_window(self._windows[frame], i, cov,
                                               self._gains[k])
            for i in layout.data_slots:
                transitions[i] = multi_step_transition(self.anchor_of(i), i,
                                                       cov)
            self._kernels.append(kernels)
            self._transitions.append(transitions)

    # -- helpers -------------------------------------------------------------

    def anchor_of(self, slot: int) -> int:
        """Earlier slot whose estimate is stacked with the current one."""
        if self.scenario.anchor_rule == "previous_slot":
            return slot - 1
        return self.layout.pilot_slot_of_frame(self.layout.frame_of(slot))

    def _set_powers(self, pp_max: float, pd_max: float):
        """Update per-user pilot powers and return per-user data weights."""
        m_frames = self.layout.frame_count
        n_data = self.layout.n_data_slots
        weights = np.empty(self.scenario.n_users)
        for k, user in enumerate(self.scenario.users):
            pp = pp_max if k == 0 else user.pp_max
            pd = pd_max if k == 0 else user.pd_max
            self._gains[k].pilot_power = pp / m_frames
            weights[k] = user.alpha ** 2 * (pd / n_data)
        return weights

    def slot_statistics(self, slot: int, weights: np.ndarray,
                        sigma_d2: float) -> SlotStatistics:
        """Solve one data slot's moments and fixed point."""
        anchor = self.anchor_of(slot)
        kernels_slot = [self._kernels[k][slot]
                        for k in range(self.scenario.n_users)]
        kernels_anchor = [self._kernels[k][anchor]
                          for k in range(self.scenario.n_users)]
        moments = []
        for k, cov in enumerate(self.covs):
            moments.append(conditional_moments(
                mean_slot=cov.mean(slot), mean_anchor=cov.mean(anchor),
                channel_cov=cov.autocov(slot),
                est_cov_slot=kernels_slot[k].covariance(),
                est_cov_anchor=kernels_anchor[k].covariance(),
                transition=self._transitions[k][slot]))
        floor = interference_floor([mo.residual_cov for mo in moments], weights)
        literal = self.scenario.fixed_point_variant == "literal"
        m, diag = solve_fixed_point(
            [mo.mean_moment for mo in moments[1:]], floor, sigma_d2,
            weights[1:], self.fp_config, literal=literal)
        gamma = deterministic_sinr(moments[0].mean_moment, weights[0],
                                   [mo.mean_moment for mo in moments[1:]],
                                   weights[1:], m, floor, sigma_d2)
        se = deterministic_se(gamma)
        return SlotStatistics(slot=slot, anchor=anchor,
                              kernels_slot=kernels_slot,
                              kernels_anchor=kernels_anchor,
                              moments=moments, weights=weights, floor=floor,
                              m=m, gamma=gamma, se=se, fp_diag=diag)

    # -- public API ----------------------------------------------------------

    def evaluate(self, pp_max: float | None = None,
                 pd_max: float | None = None) -> DetEqResult:
        """Deterministic per-slot SE and ASE for one power split."""
        tagged = self.scenario.tagged
        pp_max = tagged.pp_max if pp_max is None else pp_max
        pd_max = tagged.pd_max if pd_max is None else pd_max
        split_powers(self.layout, pp_max, pd_max)   # validates the layout
        weights = self._set_powers(pp_max, pd_max)
        sigma_d2 = self.scenario.resolve_noise(self.layout)
        horizon = self.layout.horizon
        se = np.zeros(horizon)
        fp_iters = 0
        fp_res = 0.0
        m_per_slot = {}
        for slot in self.layout.data_slots:
            stats = self.slot_statistics(slot, weights, sigma_d2)
            se[slot - 1] = stats.se
            m_per_slot[slot] = stats.m
            fp_iters = max(fp_iters, stats.fp_diag.iterations)
            fp_res = max(fp_res, stats.fp_diag.residual)
        ase = float(np.sum(se) / horizon)
        return DetEqResult(layout=self.layout, se_per_slot=se, ase=ase,
                           sigma_d2=sigma_d2, weights=weights,
                           fp_iterations=fp_iters, fp_residual=fp_res,
                           pp_max=pp_max, pd_max=pd_max,
                           m_per_slot=m_per_slot)

    def all_slot_statistics(self, pp_max: float | None = None,
                            pd_max: float | None = None):
        """Per-data-slot statistics (for the Monte Carlo chain)."""
        tagged = self.scenario.tagged
        pp_max = tagged.pp_max if pp_max is None else pp_max
        pd_max = tagged.pd_max if pd_max is None else pd_max
        weights = self._set_powers(pp_max, pd_max)
        sigma_d2 = self.scenario.resolve_noise(self.layout)
        return ([self.slot_statistics(s, weights, sigma_d2)
                 for s in self.layout.data_slots], weights, sigma_d2)


def ase(layout: FrameLayout, scenario: Scenario, pp_max: float | None = None,
        pd_max: float | None = None,
        fp_config: FixedPointConfig | None = None) -> DetEqResult:
    """Convenience wrapper: evaluate one layout end to end."""
    return LayoutEvaluator(scenario, layout, fp_config).evaluate(pp_max, pd_max)
