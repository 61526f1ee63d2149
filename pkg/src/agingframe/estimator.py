"""LMMSE channel estimation from the pilots of neighboring frames.

For a slot in frame m the estimator stacks the pilot observations of frames
m-1, m, m+1 (clipped to the layout and extended on the available side so
three pilots are used whenever the layout has three frames).  The estimate is
the standard LMMSE map built from the cross-covariances between the target
slot and the window's pilot slots, regularized by the pilot noise level.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corrmodel import CovarianceSet, hermitianize
from .errors import MisuseError
from .framelayout import FrameLayout


@dataclass(frozen=True)
class PilotWindow:
    """Pilot slots used to estimate the channel inside frame m."""

    frame: int
    frames: tuple
    slots: tuple

    @property
    def size(self) -> int:
        return len(self.slots)


def pilot_window(layout: FrameLayout, m: int,
                 rule: str = "extend") -> PilotWindow:
    """Pilot frames used to estimate inside frame m.

    ``rule="extend"`` (default): the nearest three frames, clipped to the
    layout and extended on the available side, so three pilots are used
    whenever the layout has three frames (M = 2 gives both pilots, M = 1 the
    single one).  ``rule="clip"``: frames {m-1, m, m+1} clipped without
    extension, so edge frames see only two pilots.
    """
    m_total = layout.frame_count
    if not 1 <= m <= m_total:
        raise MisuseError(f"frame {m} outside [1, {m_total}]")
    if rule == "extend":
        if m_total >= 3:
            lo = min(max(m - 1, 1), m_total - 2)
            frames = (lo, lo + 1, lo + 2)
        else:
            frames = tuple(range(1, m_total + 1))
    elif rule == "clip":
        frames = tuple(f for f in (m - 1, m, m + 1) if 1 <= f <= m_total)
    else:
        raise MisuseError(f"unknown pilot window rule {rule!r}")
    slots = tuple(layout.pilot_slot_of_frame(f) for f in frames)
    return PilotWindow(frame=m, frames=frames, slots=slots)


@dataclass
class PilotGainConfig:
    """Link parameters entering the pilot regularizer."""

    alpha: float
    pilot_power: float
    sigma_p2: float
    tau_p: int = 1

    @property
    def no_pilot_info(self) -> bool:
        return self.pilot_power == 0.0 or self.alpha == 0.0

    @property
    def regularizer(self) -> float:
        """c = sigma_p^2 / (alpha^2 P_p tau_p); infinite without pilot power."""
        if self.no_pilot_info:
            return np.inf
        return self.sigma_p2 / (self.alpha ** 2 * self.pilot_power * self.tau_p)


@dataclass
class EstimationKernel:
    """Precomputed LMMSE building blocks for one (frame, slot) pair.

    ``e`` holds the row of cross-covariances C(i, p_j) between the target
    slot and the window pilots; ``m_mat`` the Gram matrix C(p_j, p_k).  The
    eigendecomposition of ``m_mat`` makes the regularized inverse cheap to
    re-evaluate when the pilot power (hence ``c``) changes.
    """

    slot: int
    window: PilotWindow
    e: np.ndarray               # (N, p*N)
    m_mat: np.ndarray           # (p*N, p*N) Hermitian PSD
    eigvals: np.ndarray
    eigvecs: np.ndarray
    eu: np.ndarray              # e @ eigvecs
    mean_stack: np.ndarray      # stacked pilot-slot means (p*N,)
    mean_slot: np.ndarray       # mean at the target slot (N,)
    cfg: PilotGainConfig
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_antennas(self) -> int:
        return self.e.shape[0]

    def gain(self) -> np.ndarray:
        """W = E (M + cI)^{-1}, mapping condensed pilot deviations to the
        centered estimate.  Zero when there is no pilot information."""
        if self.cfg.no_pilot_info:
            return np.zeros_like(self.e)
        c = self.cfg.regularizer
        # single-entry memo: the hot paths re-query one c many times
        cached = self._cache.get("gain")
        if cached is None or cached[0] != c:
            value = (self.eu / (self.eigvals + c)) @ self.eigvecs.conj().T
            self._cache["gain"] = (c, value)
            return value
        return cached[1]

    def covariance(self) -> np.ndarray:
        """Covariance of the estimate, E (M + cI)^{-1} E^H."""
        if self.cfg.no_pilot_info:
            n = self.n_antennas
            return np.zeros((n, n), dtype=complex)
        c = self.cfg.regularizer
        cached = self._cache.get("cov")
        if cached is None or cached[0] != c:
            value = hermitianize(
                (self.eu / (self.eigvals + c)) @ self.eu.conj().T)
            self._cache["cov"] = (c, value)
            return value
        return cached[1]


@dataclass
class ChannelEstimate:
    vector: np.ndarray
    covariance: np.ndarray
    slot: int


def build_kernel(layout: FrameLayout, m: int, i: int, cov: CovarianceSet,
                 cfg: PilotGainConfig) -> EstimationKernel:
    """Assemble the estimation kernel for slot i using frame m's window."""
    if layout.frame_of(i) != m:
        raise MisuseError(f"slot {i} is not in frame {m}")
    window = pilot_window(layout, m)
    return kernel_for_window(window, i, cov, cfg)


def kernel_for_window(window: PilotWindow, i: int, cov: CovarianceSet,
                      cfg: PilotGainConfig) -> EstimationKernel:
    n = cov.n_antennas
    p = window.size
    e = np.hstack([cov.cross(i, pj) for pj in window.slots])
    m_mat = np.empty((p * n, p * n), dtype=complex)
    for j, pj in enumerate(window.slots):
        for k, pk in enumerate(window.slots):
            m_mat[j * n:(j + 1) * n, k * n:(k + 1) * n] = cov.cross(pj, pk)
    m_mat = hermitianize(m_mat)
    w, v = np.linalg.eigh(m_mat)
    w = np.clip(w, 0.0, None)
    mean_stack = np.concatenate([cov.mean(pj) for pj in window.slots])
    return EstimationKernel(slot=i, window=window, e=e, m_mat=m_mat,
                            eigvals=w, eigvecs=v, eu=e @ v,
                            mean_stack=mean_stack, mean_slot=cov.mean(i),
                            cfg=cfg)


def condense_pilots(kernel: EstimationKernel, y_stack: np.ndarray) -> np.ndarray:
    """Despread the stacked raw pilot observations.

    Returns u = S^H y / (alpha sqrt(P_p) tau_p), a (p*N,) vector equal to the
    stacked pilot-slot channels plus white noise of variance c per entry.
    """
    cfg = kernel.cfg
    n = kernel.n_antennas
    p = kernel.window.size
    tau = cfg.tau_p
    if y_stack.shape != (p * tau * n,):
        raise MisuseError(
            f"observation stack has shape {y_stack.shape}, expected "
            f"({p * tau * n},)")
    # unit-modulus pilot sequence of ones: despreading is a per-antenna sum
    blocks = y_stack.reshape(p * n, tau)
    denom = cfg.alpha * np.sqrt(cfg.pilot_power) * tau
    return blocks.sum(axis=1) / denom


def lmmse_estimate(kernel: EstimationKernel, y_stack: np.ndarray) -> ChannelEstimate:
    """LMMSE estimate of the channel at the kernel's slot.

    Without pilot information the estimate collapses to the prior mean.
    """
    if kernel.cfg.no_pilot_info:
        n = kernel.n_antennas
        return ChannelEstimate(vector=kernel.mean_slot.copy(),
                               covariance=np.zeros((n, n), dtype=complex),
                               slot=kernel.slot)
    u = condense_pilots(kernel, y_stack)
    centered = kernel.gain() @ (u - kernel.mean_stack)
    return ChannelEstimate(vector=kernel.mean_slot + centered,
                           covariance=kernel.covariance(), slot=kernel.slot)


def estimate_covariance(kernel: EstimationKernel) -> np.ndarray:
    """Covariance of the LMMSE estimate (zero without pilot information)."""
    return kernel.covariance()
