"""Seeded Monte Carlo generation of channel trajectories and observations.

Randomness is derived with ``numpy.random.SeedSequence`` spawn keys of the
form ``(trial, user, stream)`` on top of the Philox counter-based generator,
so every trial draws from its own substream and results are bit-exact
regardless of how trials are scheduled across workers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corrmodel import CovarianceSet, UserStatModel, WaveConfig, ula_response
from .errors import MisuseError
from .framelayout import FrameLayout

# stream ids inside one (trial, user)
STREAM_TRAJECTORY = 0
STREAM_PILOT_NOISE = 1
STREAM_DATA = 2
STREAM_SCATTER = 3


def substream(seed: int, trial: int = 0, user: int = 0,
              stream: int = STREAM_TRAJECTORY,
              slot: int = 0) -> np.random.Generator:
    """Independent generator for one (trial, user, stream[, slot]) key."""
    ss = np.random.SeedSequence(entropy=seed,
                                spawn_key=(trial, user, stream, slot))
    return np.random.Generator(np.random.Philox(ss))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) samples: real/imaginary parts are N(0, 1/2) each."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) \
        / np.sqrt(2.0)


@dataclass
class ChannelTrajectory:
    """Per-slot channel vectors h(t) = mean(t) + centered(t), 1-based slots."""

    values: np.ndarray          # (horizon, N) complex
    seed: int
    trial: int
    user: int

    @property
    def horizon(self) -> int:
        return self.values.shape[0]

    def at(self, t: int) -> np.ndarray:
        return self.values[t - 1]


def sample_trajectory(cov: CovarianceSet, horizon: int, seed: int,
                      trial: int = 0, user: int = 0) -> ChannelTrajectory:
    """Draw one channel trajectory from the autoregressive recursion.

    The centered part starts at CN(0, C(1)) and evolves as
    ``x(t+1) = A(t) x(t) + xi(t+1)`` with ``xi ~ CN(0, Theta(t+1))``; the LoS
    mean is added per slot.
    """
    rng = substream(seed, trial, user, STREAM_TRAJECTORY)
    n = cov.n_antennas
    values = np.empty((horizon, n), dtype=complex)
    x = cov.psd_sqrt_autocov(1) @ complex_normal(rng, n)
    values[0] = cov.mean(1) + x
    for t in range(1, horizon):
        xi = cov.psd_sqrt_innovation(t) @ complex_normal(rng, n)
        x = cov.transition(t) @ x + xi
        values[t] = cov.mean(t + 1) + x
    return ChannelTrajectory(values=values, seed=seed, trial=trial, user=user)


def sample_ensemble(cov: CovarianceSet, horizon: int, n_samples: int,
                    seed: int, user: int = 0) -> np.ndarray:
    """Vectorized batch of trajectories for ensemble statistics.

    Returns an array of shape (n_samples, horizon, N).  Uses a single
    substream; intended for moment checks, not for reproducible per-trial
    pipelines.
    """
    rng = substream(seed, 0, user, STREAM_TRAJECTORY)
    n = cov.n_antennas
    out = np.empty((n_samples, horizon, n), dtype=complex)
    x = complex_normal(rng, (n_samples, n)) @ cov.psd_sqrt_autocov(1).T
    out[:, 0, :] = cov.mean(1) + x
    for t in range(1, horizon):
        xi = complex_normal(rng, (n_samples, n)) @ cov.psd_sqrt_innovation(t).T
        x = x @ cov.transition(t).T + xi
        out[:, t, :] = cov.mean(t + 1) + x
    return out


def scatterer_oracle(user: UserStatModel, wave: WaveConfig, scatterer_count: int,
                     horizon: int, seed: int, trial: int = 0,
                     user_index: int = 0) -> ChannelTrajectory:
    """Sum-of-scatterers realization of the normalized centered channel.

    Each of the ``s`` scatterers keeps a fixed angle pair and uniform phase;
    its Doppler is the schedule value scaled by the cosine of the angle
    between heading and departure direction.  Used to validate the closed-form
    correlations, not as a simulation path.
    """
    if scatterer_count < 1:
        raise MisuseError("scatterer_count must be >= 1")
    rng = substream(seed, trial, user_index, STREAM_SCATTER)
    aod = _draw_angles(rng, user.aod_dist, scatterer_count)
    aoa = _draw_angles(rng, user.aoa_dist, scatterer_count)
    beta = rng.uniform(-np.pi, np.pi, scatterer_count)
    n = wave.antenna_count
    steering = np.empty((scatterer_count, n), dtype=complex)
    for i in range(scatterer_count):
        steering[i] = ula_response(aoa[i], wave)
    values = np.empty((horizon, n), dtype=complex)
    scale = wave.doppler_scale
    norm = 1.0 / np.sqrt(scatterer_count * n)
    for t in range(1, horizon + 1):
        fd = user.doppler(t)
        heading = user.heading(t)
        phase = 2.0 * np.pi * fd * t * scale * np.cos(heading - aod) + beta
        values[t - 1] = norm * (np.exp(1j * phase) @ steering)
    return ChannelTrajectory(values=values, seed=seed, trial=trial,
                             user=user_index)


def scatterer_ensemble(user: UserStatModel, wave: WaveConfig,
                       scatterer_count: int, horizon: int, n_samples: int,
                       seed: int) -> np.ndarray:
    """Vectorized batch of scatterer-sum realizations, shape (n, horizon, N)."""
    rng = substream(seed, 0, 0, STREAM_SCATTER)
    n = wave.antenna_count
    aod = _draw_angles(rng, user.aod_dist, (n_samples, scatterer_count))
    aoa = _draw_angles(rng, user.aoa_dist, (n_samples, scatterer_count))
    beta = rng.uniform(-np.pi, np.pi, (n_samples, scatterer_count))
    k = np.arange(n)
    spatial_phase = 2.0 * np.pi * wave.antenna_spacing * np.cos(
        wave.array_orientation - aoa)
    steering = np.exp(1j * spatial_phase[..., None] * k)   # (n, s, N)
    out = np.empty((n_samples, horizon, n), dtype=complex)
    norm = 1.0 / np.sqrt(scatterer_count * n)
    scale = wave.doppler_scale
    for t in range(1, horizon + 1):
        fd = user.doppler(t)
        heading = user.heading(t)
        phase = 2.0 * np.pi * fd * t * scale * np.cos(heading - aod) + beta
        out[:, t - 1, :] = norm * np.einsum(
            "ns,nsk->nk", np.exp(1j * phase), steering)
    return out


def _draw_angles(rng, dist, shape):
    if dist.kappa == 0.0:
        return rng.uniform(-np.pi, np.pi, shape)
    return rng.vonmises(dist.central_angle, dist.kappa, shape)


# ---------------------------------------------------------------------------
# observations
# ---------------------------------------------------------------------------

def pilot_sequence(tau_p: int) -> np.ndarray:
    """Unit-modulus pilot sequence of length tau_p."""
    return np.ones(tau_p, dtype=complex)


def pilot_stacking_matrix(tau_p: int, n: int) -> np.ndarray:
    """S_bar = I_N (kron) s, satisfying S_bar^H S_bar = tau_p I_N."""
    return np.kron(np.eye(n, dtype=complex), pilot_sequence(tau_p)[:, None])


@dataclass
class ObservationSet:
    """Stacked pilot observations and per-slot data observations."""

    pilot: dict                 # slot -> (tau_p * N,) complex vector
    data: dict                  # slot -> (N,) complex vector
    symbols: dict               # slot -> per-user transmitted symbols


def observe_pilot(trajectory: ChannelTrajectory, layout: FrameLayout,
                  alpha: float, pilot_power: float, sigma_p2: float,
                  tau_p: int, seed: int, trial: int = 0,
                  user: int = 0) -> dict:
    """Received pilot vectors y_p(i) = alpha sqrt(P_p) S_bar h(i) + noise.

    Returns ``{pilot slot -> stacked observation}``; raises on non-pilot use.
    """
    rng = substream(seed, trial, user, STREAM_PILOT_NOISE)
    n = trajectory.values.shape[1]
    s_bar = pilot_stacking_matrix(tau_p, n)
    gain = alpha * np.sqrt(pilot_power)
    out = {}
    for slot in layout.pilot_slots:
        noise = np.sqrt(sigma_p2) * complex_normal(rng, tau_p * n) \
            if sigma_p2 > 0 else np.zeros(tau_p * n, dtype=complex)
        out[slot] = gain * (s_bar @ trajectory.at(slot)) + noise
    return out


def observe_data(trajectories, layout: FrameLayout, slot: int, alphas,
                 data_powers, sigma_d2: float, seed: int, trial: int = 0,
                 constellation: str = "qpsk"):
    """Received data vector at one data slot plus the transmitted symbols.

    ``trajectories``, ``alphas`` and ``data_powers`` are per-user sequences;
    symbols are zero-mean unit-variance (QPSK by default, optionally a
    Gaussian codebook).
    """
    if layout.is_pilot(slot):
        raise MisuseError(f"slot {slot} is a pilot slot, not a data slot")
    rng = substream(seed, trial, 0, STREAM_DATA, slot)
    n = trajectories[0].values.shape[1]
    y = np.zeros(n, dtype=complex)
    symbols = np.empty(len(trajectories), dtype=complex)
    for k, (traj, alpha, p_d) in enumerate(zip(trajectories, alphas, data_powers)):
        x = _draw_symbol(rng, constellation)
        symbols[k] = x
        y += alpha * np.sqrt(p_d) * traj.at(slot) * x
    if sigma_d2 > 0:
        y += np.sqrt(sigma_d2) * complex_normal(rng, n)
    return y, symbols


def _draw_symbol(rng, constellation: str) -> complex:
    if constellation == "qpsk":
        re = rng.choice((-1.0, 1.0))
        im = rng.choice((-1.0, 1.0))
        return (re + 1j * im) / np.sqrt(2.0)
    if constellation == "gaussian":
        return complex(complex_normal(rng, ()))
    raise MisuseError(f"unknown constellation {constellation!r}")


def trajectory_rows(trajectory: ChannelTrajectory):
    """Debug-dump rows: (slot, user, antenna, re, im)."""
    rows = []
    for t in range(1, trajectory.horizon + 1):
        h = trajectory.at(t)
        for antenna, value in enumerate(h):
            rows.append({"slot": t, "user": trajectory.user,
                         "antenna": antenna, "re": float(value.real),
                         "im": float(value.imag)})
    return rows
