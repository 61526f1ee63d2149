"""Shared fixtures and independent test oracles.

The oracles deliberately avoid the library's computational paths: angular
correlations are integrated numerically from their defining expectations, and
LMMSE/conditioning checks go through dense joint-covariance algebra.
"""
import numpy as np
import pytest
from scipy import integrate, special

from agingframe.channelsim import pilot_stacking_matrix
from agingframe.corrmodel import (AngularDistribution, UserStatModel,
                                  WaveConfig, build_covariance_set)
from agingframe.schedules import ParamSchedule, constant


# ---------------------------------------------------------------------------
# quadrature oracle for the angular expectations
# ---------------------------------------------------------------------------

def angle_cf_quad(w, dist: AngularDistribution, psi: float) -> complex:
    """E[exp(j w cos(psi - theta))] by adaptive quadrature of the density."""
    kappa = dist.kappa
    theta_c = dist.central_angle

    def integrand(theta):
        density = np.exp(kappa * np.cos(theta - theta_c)) \
            / (2.0 * np.pi * special.iv(0, kappa))
        return np.exp(1j * w * np.cos(psi - theta)) * density

    re, _ = integrate.quad(lambda t: integrand(t).real, -np.pi, np.pi,
                           limit=400)
    im, _ = integrate.quad(lambda t: integrand(t).imag, -np.pi, np.pi,
                           limit=400)
    return re + 1j * im


def temporal_corr_quad(t1, t2, user: UserStatModel, wave: WaveConfig) -> complex:
    """Quadrature evaluation of the temporal correlation expectation."""
    scale = wave.doppler_scale
    w = 2.0 * np.pi * (t1 * user.doppler(t1) - t2 * user.doppler(t2)) * scale
    heading = user.heading(t1)
    return angle_cf_quad(w, user.aod_dist, heading)


def spatial_corr_quad(k, l, user: UserStatModel, wave: WaveConfig) -> complex:
    w = 2.0 * np.pi * wave.antenna_spacing * (k - l)
    return angle_cf_quad(w, user.aoa_dist, wave.array_orientation)


# ---------------------------------------------------------------------------
# dense joint-Gaussian oracles
# ---------------------------------------------------------------------------

def stacked_pilot_cov(cov, window_slots):
    """Mean and covariance of the stacked pilot-slot channels."""
    n = cov.n_antennas
    p = len(window_slots)
    mean = np.concatenate([cov.mean(s) for s in window_slots])
    sigma = np.empty((p * n, p * n), dtype=complex)
    for j, sj in enumerate(window_slots):
        for k, sk in enumerate(window_slots):
            sigma[j * n:(j + 1) * n, k * n:(k + 1) * n] = cov.cross(sj, sk)
    return mean, sigma


def lmmse_bruteforce(cov, window_slots, i, alpha, pilot_power, sigma_p2,
                     tau_p, y_stack):
    """Textbook LMMSE on the raw observation stack (unreduced inverse)."""
    n = cov.n_antennas
    p = len(window_slots)
    mean_p, sigma_p = stacked_pilot_cov(cov, window_slots)
    s_tilde = np.kron(np.eye(p, dtype=complex),
                      pilot_stacking_matrix(tau_p, n))
    gain = alpha * np.sqrt(pilot_power)
    cross_hp = np.hstack([cov.cross(i, s) for s in window_slots])
    cov_hy = gain * cross_hp @ s_tilde.conj().T
    cov_y = gain ** 2 * s_tilde @ sigma_p @ s_tilde.conj().T \
        + sigma_p2 * np.eye(p * tau_p * n, dtype=complex)
    centered = y_stack - gain * s_tilde @ mean_p
    return cov.mean(i) + cov_hy @ np.linalg.solve(cov_y, centered)


def draw_joint_pilot_channel(cov, window_slots, i, rng, n_draws):
    """Samples of (h(i), stacked pilot-slot channels) from the model law."""
    n = cov.n_antennas
    slots = [i] + list(window_slots)
    dim = len(slots) * n
    mean = np.concatenate([cov.mean(s) for s in slots])
    sigma = np.empty((dim, dim), dtype=complex)
    for a, sa in enumerate(slots):
        for b, sb in enumerate(slots):
            sigma[a * n:(a + 1) * n, b * n:(b + 1) * n] = cov.cross(sa, sb)
    w, v = np.linalg.eigh(0.5 * (sigma + sigma.conj().T))
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    z = (rng.standard_normal((n_draws, dim))
         + 1j * rng.standard_normal((n_draws, dim))) / np.sqrt(2.0)
    samples = z @ root.T + mean
    return samples[:, :n], samples[:, n:]


# ---------------------------------------------------------------------------
# ready-made models
# ---------------------------------------------------------------------------

@pytest.fixture
def wave4():
    return WaveConfig(antenna_count=4)


@pytest.fixture
def jakes_user():
    """Stationary uniform-angle user, f_d = 100 (carrier 1000)."""
    return UserStatModel(doppler=constant(100.0))


@pytest.fixture
def rician_user():
    return UserStatModel(doppler=constant(100.0),
                         rician_factor=constant(1.0),
                         los_doppler=constant(80.0), los_phase=0.3,
                         los_aoa=0.5)


def make_cov(user, wave, horizon, spatial="identity"):
    return build_covariance_set(user, wave, horizon, spatial)


def vm_user(kappa_aod, kappa_aoa, theta_c=0.4, heading=0.7, doppler=100.0,
            variance=None):
    kw = {}
    if variance is not None:
        kw["nlos_variance"] = variance
    return UserStatModel(
        doppler=constant(doppler),
        aod_dist=AngularDistribution("von_mises", kappa_aod, theta_c),
        aoa_dist=AngularDistribution("von_mises", kappa_aoa, -0.2),
        heading=constant(heading), **kw)


def decaying_user(a=10.0):
    return UserStatModel(doppler=constant(100.0),
                         nlos_variance=ParamSchedule("reciprocal", a))
