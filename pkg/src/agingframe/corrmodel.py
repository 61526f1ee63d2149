"""First- and second-order statistics of the aging Rician channel.

This module builds everything the rest of the pipeline consumes: temporal and
spatial correlation coefficients (von Mises / uniform angle distributions,
with the Jakes model as the uniform special case), time-varying auto- and
cross-covariance matrices, the one-step state-transition matrices and
innovation covariances of the induced first-order autoregression, and the
line-of-sight mean vector.

Correlation conventions
-----------------------
The Doppler schedule is interpreted as a maximum Doppler shift and enters the
temporal correlation through the accumulated phase ``phi(t) = t * f_d(t) / f_c``
("carrier" normalization, one slot per symbol).  Setting
``doppler_normalization="raw"`` drops the carrier division.  For constant
Doppler and uniform angles this reduces to the familiar
``rho(tau) = J0(2*pi*f_d*tau/f_c)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bessel import complex_bessel_j0
from .errors import InvalidScenarioError, NumericalError
from .schedules import ParamSchedule, constant

SPEED_OF_LIGHT = 3e8

# Eigenvalue repair: values in [-PSD_TOL*scale, 0) are roundoff and clamped,
# anything more negative is a modeling bug and raises.
PSD_TOL = 1e-10


# ---------------------------------------------------------------------------
# configuration types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WaveConfig:
    """Carrier, array geometry and pilot length."""

    antenna_count: int
    carrier_frequency: float = 1000.0
    antenna_spacing: float = 0.5  # in wavelengths
    array_orientation: float = 0.0
    pilot_length: int = 1
    doppler_normalization: str = "carrier"  # "carrier" | "raw"

    def __post_init__(self):
        if self.antenna_count < 1:
            raise InvalidScenarioError("antenna_count must be >= 1")
        if self.pilot_length < 1:
            raise InvalidScenarioError("pilot_length must be >= 1")
        if self.antenna_spacing <= 0:
            raise InvalidScenarioError("antenna_spacing must be > 0")
        if self.carrier_frequency <= 0:
            raise InvalidScenarioError("carrier_frequency must be > 0")
        if self.doppler_normalization not in ("carrier", "raw"):
            raise InvalidScenarioError(
                f"doppler_normalization must be 'carrier' or 'raw', "
                f"got {self.doppler_normalization!r}")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def doppler_scale(self) -> float:
        """Multiplier applied to f_d * t inside correlation arguments."""
        if self.doppler_normalization == "carrier":
            return 1.0 / self.carrier_frequency
        return 1.0


@dataclass(frozen=True)
class AngularDistribution:
    """Angle-of-arrival / departure distribution (uniform or von Mises)."""

    kind: str = "uniform"
    concentration: float = 0.0
    central_angle: float = 0.0

    def __post_init__(self):
        if self.kind not in ("uniform", "von_mises"):
            raise InvalidScenarioError(f"unknown angular distribution {self.kind!r}")
        if self.concentration < 0:
            raise InvalidScenarioError("concentration must be >= 0")

    @property
    def kappa(self) -> float:
        """Effective concentration; a uniform distribution behaves as kappa=0."""
        return 0.0 if self.kind == "uniform" else self.concentration


@dataclass(frozen=True)
class UserStatModel:
    """Per-user physical parameters as slot-indexed schedules."""

    doppler: ParamSchedule = field(default_factory=lambda: constant(0.0))
    rician_factor: ParamSchedule = field(default_factory=lambda: constant(0.0))
    nlos_variance: ParamSchedule = field(default_factory=lambda: constant(1.0))
    path_loss_db: float = 0.0
    aoa_dist: AngularDistribution = field(default_factory=AngularDistribution)
    aod_dist: AngularDistribution = field(default_factory=AngularDistribution)
    speed: ParamSchedule | None = None      # scatterer oracle only
    heading: ParamSchedule = field(default_factory=lambda: constant(0.0))
    los_phase: float = 0.0
    los_aoa: float = 0.0
    los_doppler: ParamSchedule | None = None  # defaults to `doppler`

    @property
    def alpha(self) -> float:
        """Large-scale amplitude gain, 10^(-PL/20); PL in dB attenuates."""
        return 10.0 ** (-self.path_loss_db / 20.0)

    def los_doppler_schedule(self) -> ParamSchedule:
        return self.los_doppler if self.los_doppler is not None else self.doppler


# ---------------------------------------------------------------------------
# correlation coefficients
# ---------------------------------------------------------------------------

def _von_mises_cf(w: float, kappa: float, delta: float) -> complex:
    """E[exp(j*w*cos(psi - theta))] for theta ~ vonMises(theta_c, kappa).

    ``delta = psi - theta_c``.  Equals J0(w) for kappa = 0 (uniform angles).
    """
    if kappa == 0.0:
        return complex_bessel_j0(abs(w))
    arg = complex(kappa * kappa - w * w, 0.0) + 2j * w * kappa * np.cos(delta)
    root = np.sqrt(arg)
    return complex_bessel_j0(1j * root) / complex_bessel_j0(1j * kappa)


def doppler_phase(t: float, user: UserStatModel, wave: WaveConfig) -> float:
    """Accumulated normalized Doppler phase t * f_d(t) * scale."""
    return t * user.doppler(t) * wave.doppler_scale


def temporal_correlation(t1: float, t2: float, user: UserStatModel,
                         wave: WaveConfig) -> complex:
    """Temporal correlation coefficient between slots t1 and t2.

    Satisfies rho(t, t) = 1 and rho(t2, t1) = conj(rho(t1, t2)) exactly.
    """
    if t1 == t2:
        return 1.0 + 0.0j
    if t1 > t2:
        return np.conj(temporal_correlation(t2, t1, user, wave))
    w = 2.0 * np.pi * (doppler_phase(t1, user, wave) - doppler_phase(t2, user, wave))
    kappa = user.aod_dist.kappa
    if kappa == 0.0:
        return _von_mises_cf(w, 0.0, 0.0)
    heading = user.heading.constant_value()
    delta = heading - user.aod_dist.central_angle
    return _von_mises_cf(w, kappa, delta)


def spatial_correlation(k: int, l: int, user: UserStatModel,
                        wave: WaveConfig) -> complex:
    """Spatial correlation between antennas k and l of the ULA."""
    mu = k - l
    if mu == 0:
        return 1.0 + 0.0j
    if mu < 0:
        return np.conj(spatial_correlation(l, k, user, wave))
    w = 2.0 * np.pi * wave.antenna_spacing * mu
    kappa = user.aoa_dist.kappa
    delta = wave.array_orientation - user.aoa_dist.central_angle
    return _von_mises_cf(w, kappa, delta)


def spatial_correlation_matrix(user: UserStatModel, wave: WaveConfig) -> np.ndarray:
    """Hermitian Toeplitz matrix [rho_spatial(k - l)]."""
    n = wave.antenna_count
    first_col = np.array([spatial_correlation(k, 0, user, wave) for k in range(n)])
    r = np.empty((n, n), dtype=complex)
    for k in range(n):
        for l in range(n):
            mu = k - l
            r[k, l] = first_col[mu] if mu >= 0 else np.conj(first_col[-mu])
    return r


# ---------------------------------------------------------------------------
# linear-algebra helpers
# ---------------------------------------------------------------------------

def hermitianize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def psd_floor(m: np.ndarray, tol: float = PSD_TOL) -> np.ndarray:
    """Clamp roundoff-negative eigenvalues to zero.

    Eigenvalues below ``-tol * scale`` indicate a modeling bug rather than
    roundoff and raise :class:`NumericalError`.
    """
    m = hermitianize(np.asarray(m, dtype=complex))
    w, v = np.linalg.eigh(m)
    scale = max(1.0, float(w[-1])) if w.size else 1.0
    if w.size and w[0] < -tol * scale:
        raise NumericalError(
            f"matrix is not PSD: min eigenvalue {w[0]:.3e} "
            f"(tolerance {-tol * scale:.3e})")
    w = np.clip(w, 0.0, None)
    return (v * w) @ v.conj().T


def psd_sqrt(m: np.ndarray, tol: float = PSD_TOL) -> np.ndarray:
    """Hermitian square root of a PSD matrix (eigenvalue based)."""
    m = hermitianize(np.asarray(m, dtype=complex))
    w, v = np.linalg.eigh(m)
    scale = max(1.0, float(w[-1])) if w.size else 1.0
    if w.size and w[0] < -tol * scale:
        raise NumericalError(
            f"matrix is not PSD: min eigenvalue {w[0]:.3e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def _solve_hermitian(c: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve c @ x = rhs for Hermitian PSD c with eigenvalue flooring."""
    c = hermitianize(c)
    w, v = np.linalg.eigh(c)
    wmax = float(w[-1]) if w.size else 0.0
    if wmax <= 0.0:
        raise NumericalError(
            "covariance matrix is singular after flooring (zero matrix); "
            "condition number is infinite")
    scale = max(1.0, wmax)
    if w[0] < -PSD_TOL * scale:
        raise NumericalError(
            f"covariance matrix has eigenvalue {w[0]:.3e} below the PSD "
            f"tolerance; condition estimate {wmax / abs(w[0]):.3e}")
    floor = 1e-14 * wmax
    w = np.maximum(w, floor)
    return (v * (1.0 / w)) @ (v.conj().T @ rhs)


# ---------------------------------------------------------------------------
# covariance set
# ---------------------------------------------------------------------------

@dataclass
class CovarianceSet:
    """Precomputed channel statistics over a slot horizon.

    Slots are 1-based; index ``t`` maps to array position ``t - 1``.
    """

    user: UserStatModel
    wave: WaveConfig
    horizon: int
    spatial: np.ndarray            # time-invariant spatial factor R
    sig2: np.ndarray               # per-slot NLoS variance sigma_h^2(t)
    means: np.ndarray              # (horizon, N) LoS mean vectors
    _cross_cache: dict = field(default_factory=dict, repr=False)
    _sqrt_cache: dict = field(default_factory=dict, repr=False)
    _ar_cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_antennas(self) -> int:
        return self.wave.antenna_count

    def _check_slot(self, t: int):
        if not 1 <= t <= self.horizon:
            raise InvalidScenarioError(
                f"slot {t} outside horizon [1, {self.horizon}]")

    def mean(self, t: int) -> np.ndarray:
        self._check_slot(t)
        return self.means[t - 1]

    def autocov(self, t: int) -> np.ndarray:
        self._check_slot(t)
        return self.sig2[t - 1] * self.spatial

    def cross(self, t1: int, t2: int) -> np.ndarray:
        """Cross-covariance C(t1, t2) = E[(h(t1)-mean)(h(t2)-mean)^H]."""
        self._check_slot(t1)
        self._check_slot(t2)
        if t1 == t2:
            return self.autocov(t1)
        if t1 > t2:
            return self.cross(t2, t1).conj().T
        key = (t1, t2)
        rho = self._cross_cache.get(key)
        if rho is None:
            rho = temporal_correlation(t1, t2, self.user, self.wave)
            self._cross_cache[key] = rho
        scale = rho * np.sqrt(self.sig2[t1 - 1] * self.sig2[t2 - 1])
        return scale * self.spatial

    def transition(self, t: int) -> np.ndarray:
        key = ("A", t)
        if key not in self._ar_cache:
            self._ar_cache[key] = ar_transition(t, self)
        return self._ar_cache[key]

    def innovation_cov(self, t: int) -> np.ndarray:
        key = ("Theta", t)
        if key not in self._ar_cache:
            self._ar_cache[key] = ar_noise_cov(t, self)
        return self._ar_cache[key]

    def psd_sqrt_autocov(self, t: int) -> np.ndarray:
        key = ("auto", t)
        if key not in self._sqrt_cache:
            self._sqrt_cache[key] = psd_sqrt(self.autocov(t))
        return self._sqrt_cache[key]

    def psd_sqrt_innovation(self, t: int) -> np.ndarray:
        key = ("innov", t)
        if key not in self._sqrt_cache:
            self._sqrt_cache[key] = psd_sqrt(self.innovation_cov(t))
        return self._sqrt_cache[key]


def ula_response(theta: float, wave: WaveConfig) -> np.ndarray:
    """Uniform-linear-array response vector a(theta)."""
    k = np.arange(wave.antenna_count)
    phase = 2.0 * np.pi * wave.antenna_spacing * np.cos(
        wave.array_orientation - theta)
    return np.exp(1j * phase * k)


def los_mean(t: int, user: UserStatModel, wave: WaveConfig) -> np.ndarray:
    """Line-of-sight mean vector at slot t.

    Per-antenna LoS power over NLoS power equals the Rician factor K_f(t).
    """
    kf = user.rician_factor(t)
    s2 = user.nlos_variance(t)
    if kf < 0 or s2 < 0:
        raise InvalidScenarioError(
            f"negative Rician factor or variance at slot {t}: K={kf}, s2={s2}")
    amp = np.sqrt(kf * s2)
    if amp == 0.0:
        return np.zeros(wave.antenna_count, dtype=complex)
    f0 = user.los_doppler_schedule()(t)
    phase = 2.0 * np.pi * f0 * t * wave.doppler_scale + user.los_phase
    return amp * np.exp(1j * phase) * ula_response(user.los_aoa, wave)


def build_covariance_set(user: UserStatModel, wave: WaveConfig, horizon: int,
                         spatial_model: str = "identity") -> CovarianceSet:
    """Assemble the covariance set for one user over ``horizon`` slots.

    ``spatial_model`` selects the time-invariant spatial factor: "identity"
    (the default used by all bundled scenarios) or "ula" (the Hermitian
    Toeplitz matrix built from the angular distribution of arrival).
    """
    if horizon < 1:
        raise InvalidScenarioError("horizon must be >= 1")
    if spatial_model == "identity":
        spatial = np.eye(wave.antenna_count, dtype=complex)
    elif spatial_model == "ula":
        spatial = psd_floor(spatial_correlation_matrix(user, wave))
    else:
        raise InvalidScenarioError(f"unknown spatial model {spatial_model!r}")
    sig2 = np.empty(horizon)
    means = np.empty((horizon, wave.antenna_count), dtype=complex)
    for t in range(1, horizon + 1):
        s2 = user.nlos_variance(t)
        if s2 < 0:
            raise InvalidScenarioError(f"negative NLoS variance at slot {t}")
        sig2[t - 1] = s2
        means[t - 1] = los_mean(t, user, wave)
    return CovarianceSet(user=user, wave=wave, horizon=horizon,
                         spatial=spatial, sig2=sig2, means=means)


# ---------------------------------------------------------------------------
# autoregressive representation
# ---------------------------------------------------------------------------

def ar_transition(t: int, cov: CovarianceSet) -> np.ndarray:
    """One-step state transition A(t) = C(t+1, t) C(t)^{-1}.

    A zero covariance at slot t (no scattered component) yields A = 0.
    """
    c_t = cov.autocov(t)
    if not np.any(c_t):
        return np.zeros_like(c_t)
    # A = C(t+1,t) C(t)^{-1}  computed as  (C(t)^{-1} C(t,t+1))^H
    x = _solve_hermitian(c_t, cov.cross(t, t + 1))
    return x.conj().T


def ar_noise_cov(t: int, cov: CovarianceSet) -> np.ndarray:
    """Innovation covariance Theta(t+1) = C(t+1) - C(t+1,t) C(t)^{-1} C(t,t+1)."""
    c_next = cov.autocov(t + 1)
    c_t = cov.autocov(t)
    if not np.any(c_t):
        return psd_floor(c_next)
    c_fwd = cov.cross(t + 1, t)
    x = _solve_hermitian(c_t, cov.cross(t, t + 1))
    theta = c_next - c_fwd @ x
    return psd_floor(theta)


def multi_step_transition(t_from: int, t_to: int, cov: CovarianceSet) -> np.ndarray:
    """Propagator A(t_from -> t_to) = A(t_to - 1) ... A(t_from).

    Chains the one-step transitions so that, under the autoregression,
    Cov(h(t_to), h(t_from)) = A(t_from -> t_to) C(t_from).
    """
    if t_to < t_from:
        raise InvalidScenarioError("t_to must be >= t_from")
    a = np.eye(cov.n_antennas, dtype=complex)
    for t in range(t_from, t_to):
        a = cov.transition(t) @ a
    return a


# ---------------------------------------------------------------------------
# decay diagnostics
# ---------------------------------------------------------------------------

@dataclass
class DecayReport:
    radii: np.ndarray
    max_radius: float
    violations: list

    @property
    def passed(self) -> bool:
        return not self.violations


def correlation_step_matrix(t: int, cov: CovarianceSet) -> np.ndarray:
    """Normalized one-step correlation C(t+1)^{-1/2} C(t+1,t) C(t)^{-1/2}."""
    s_next = cov.psd_sqrt_autocov(t + 1)
    s_t = cov.psd_sqrt_autocov(t)
    inv_next = _solve_hermitian(s_next, np.eye(cov.n_antennas, dtype=complex))
    inv_t = _solve_hermitian(s_t, np.eye(cov.n_antennas, dtype=complex))
    return inv_next @ cov.cross(t + 1, t) @ inv_t


def decay_check(cov: CovarianceSet, horizon: int | None = None) -> DecayReport:
    """Spectral radius of every one-step correlation matrix.

    A radius >= 1 at any step means correlation does not decay with lag and
    the autoregressive representation is invalid there.
    """
    horizon = horizon or cov.horizon
    if horizon < 2:
        raise InvalidScenarioError("decay check needs a horizon of at least 2")
    radii = np.empty(horizon - 1)
    violations = []
    for t in range(1, horizon):
        if not np.any(cov.autocov(t)) or not np.any(cov.autocov(t + 1)):
            radii[t - 1] = 0.0
            continue
        p = correlation_step_matrix(t, cov)
        radius = float(np.max(np.abs(np.linalg.eigvals(p))))
        radii[t - 1] = radius
        if radius >= 1.0 - 1e-12:
            violations.append(t)
    return DecayReport(radii=radii, max_radius=float(np.max(radii)),
                       violations=violations)
