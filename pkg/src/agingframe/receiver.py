"""Aging-aware MMSE combining and instantaneous SINR.

The receiver conditions the channel at a data slot on two estimates: the one
interpolated at the slot itself and the one at an earlier anchor slot
(by default the frame's own pilot slot), propagated forward through the
autoregressive transition chain.  The conditional mean/covariance feed both
the combiner and the spectral-efficiency expressions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .corrmodel import hermitianize, multi_step_transition  # noqa: F401  (re-export)
from .errors import MisuseError, NumericalError

_PINV_RCOND = 1e-12


@dataclass
class ConditionalMoments:
    """Gain, residual covariance and second moment of the conditional mean."""

    gain: np.ndarray            # Psi, (N, 2N)
    residual_cov: np.ndarray    # Q, (N, N) Hermitian PSD
    mean_moment: np.ndarray     # R_z = E[z z^H], (N, N)
    mean_slot: np.ndarray       # prior mean at the data slot
    mean_anchor: np.ndarray     # prior mean at the anchor slot
    gain_singular: bool = False

    @property
    def n_antennas(self) -> int:
        return self.residual_cov.shape[0]


def conditional_moments(mean_slot: np.ndarray, mean_anchor: np.ndarray,
                        channel_cov: np.ndarray, est_cov_slot: np.ndarray,
                        est_cov_anchor: np.ndarray,
                        transition: np.ndarray) -> ConditionalMoments:
    """Joint-Gaussian conditioning of h(i) on the stacked estimate pair.

    ``transition`` is the multi-step propagator from the anchor slot to the
    data slot.  A singular stack covariance (perfectly redundant estimates)
    falls back to the pseudo-inverse and is flagged.
    """
    n = channel_cov.shape[0]
    propagated = transition @ est_cov_anchor
    cross = np.hstack([est_cov_slot, propagated])          # Cov(h, zeta)
    stack_cov = np.block([[est_cov_slot, propagated],
                          [propagated.conj().T, est_cov_anchor]])
    stack_cov = hermitianize(stack_cov)
    w, v = np.linalg.eigh(stack_cov)
    wmax = float(w[-1]) if w.size else 0.0
    singular = wmax <= 0.0 or float(w[0]) < _PINV_RCOND * wmax
    if wmax <= 0.0:
        gain = np.zeros((n, 2 * n), dtype=complex)
    else:
        inv_w = np.where(w > _PINV_RCOND * wmax, 1.0 / np.maximum(w, 1e-300), 0.0)
        gain = ((cross @ v) * inv_w) @ v.conj().T
    explained = gain @ cross.conj().T                      # Psi Cov(zeta, h)
    q = hermitianize(channel_cov - explained)
    # clamp the tiny negative roundoff the pseudo-inverse can leave behind
    qw, qv = np.linalg.eigh(q)
    scale = max(1.0, float(np.max(np.abs(qw)))) if qw.size else 1.0
    if qw.size and qw[0] < -1e-9 * scale:
        raise NumericalError(
            f"conditional residual covariance has eigenvalue {qw[0]:.3e}")
    q = (qv * np.clip(qw, 0.0, None)) @ qv.conj().T
    r_z = hermitianize(np.outer(mean_slot, mean_slot.conj()) + explained)
    return ConditionalMoments(gain=gain, residual_cov=q, mean_moment=r_z,
                              mean_slot=mean_slot, mean_anchor=mean_anchor,
                              gain_singular=singular)


def conditional_mean(moments: ConditionalMoments, est_slot: np.ndarray,
                     est_anchor: np.ndarray) -> np.ndarray:
    """Conditional mean z = mean + Psi (zeta - E[zeta]) for one realization."""
    centered = np.concatenate([est_slot - moments.mean_slot,
                               est_anchor - moments.mean_anchor])
    return moments.mean_slot + moments.gain @ centered


@dataclass
class SinrContext:
    """Everything needed to combine and score one data slot.

    ``weights[k] = alpha_k^2 P_{d,k}``; user 0 is the tagged user.
    """

    cond_means: list            # per-user conditional means z_k
    residual_covs: list         # per-user Q_k
    weights: np.ndarray
    noise_var: float

    @property
    def n_antennas(self) -> int:
        return self.cond_means[0].shape[0]

    def signal_matrix(self) -> np.ndarray:
        """F = sum_k w_k (Q_k + z_k z_k^H) + sigma_d^2 I."""
        n = self.n_antennas
        f = self.noise_var * np.eye(n, dtype=complex)
        for w, z, q in zip(self.weights, self.cond_means, self.residual_covs):
            if w == 0.0:
                continue
            f += w * (q + np.outer(z, z.conj()))
        return hermitianize(f)

    def interference_matrix(self) -> np.ndarray:
        """F1 = F - w_1 z_1 z_1^H (everything but the tagged signal)."""
        f1 = self.signal_matrix() - self.weights[0] * np.outer(
            self.cond_means[0], self.cond_means[0].conj())
        return hermitianize(f1)


def mmse_combiner(ctx: SinrContext) -> np.ndarray:
    """Optimal combining row vector g = alpha_1 sqrt(P_d) z_1^H F^{-1}."""
    f = ctx.signal_matrix()
    z1 = ctx.cond_means[0]
    try:
        sol = np.linalg.solve(f, z1)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"signal matrix is singular: {exc}") from exc
    return np.sqrt(ctx.weights[0]) * sol.conj()


def instantaneous_sinr(ctx: SinrContext) -> float:
    """SINR of the tagged user's data symbol under MMSE combining.

    Computed as w_1 z_1^H F1^{-1} z_1 with a single Hermitian solve; equal to
    the x/(1-x) form of the F-based quadratic by the rank-one update identity.
    """
    w1 = ctx.weights[0]
    if w1 == 0.0:
        return 0.0
    z1 = ctx.cond_means[0]
    f1 = ctx.interference_matrix()
    try:
        factor = sla.cho_factor(f1, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"interference-plus-noise matrix not positive definite: {exc}"
        ) from exc
    gamma = w1 * np.real(z1.conj() @ sla.cho_solve(factor, z1,
                                                   check_finite=False))
    return float(max(gamma, 0.0))


def instantaneous_se(gamma: float) -> float:
    """Spectral efficiency log(1 + gamma) in nats."""
    if gamma < 0:
        raise MisuseError(f"negative SINR {gamma}")
    return float(np.log1p(gamma))
