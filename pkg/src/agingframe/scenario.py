"""Scenario configuration: users, wave parameters, noise and run flags.

A scenario is the single source of truth for a run.  It serializes to JSON
with explicit schedule objects (e.g. ``{"form": "linear", "a": 0.1}`` for a
``0.1 t`` entry) so that symbolic, time-varying table entries round-trip
unambiguously.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
import json

from .corrmodel import (AngularDistribution, UserStatModel, WaveConfig,
                        build_covariance_set)
from .errors import InvalidScenarioError
from .framelayout import FrameLayout
from .schedules import ParamSchedule, constant


@dataclass
class UserConfig:
    """Physical and power parameters of one user (user 0 is tagged)."""

    doppler: ParamSchedule = field(default_factory=lambda: constant(0.0))
    rician_factor: ParamSchedule = field(default_factory=lambda: constant(0.0))
    nlos_variance: ParamSchedule = field(default_factory=lambda: constant(1.0))
    path_loss_db: float = 0.0
    pp_max: float = 1.0
    pd_max: float = 1.0
    sigma_p2: float = 1e-4
    aoa: AngularDistribution = field(default_factory=AngularDistribution)
    aod: AngularDistribution = field(default_factory=AngularDistribution)
    heading: ParamSchedule = field(default_factory=lambda: constant(0.0))
    los_phase: float = 0.0
    los_aoa: float = 0.0
    los_doppler: ParamSchedule | None = None

    def stat_model(self) -> UserStatModel:
        return UserStatModel(
            doppler=self.doppler, rician_factor=self.rician_factor,
            nlos_variance=self.nlos_variance, path_loss_db=self.path_loss_db,
            aoa_dist=self.aoa, aod_dist=self.aod, heading=self.heading,
            los_phase=self.los_phase, los_aoa=self.los_aoa,
            los_doppler=self.los_doppler)

    @property
    def alpha(self) -> float:
        return 10.0 ** (-self.path_loss_db / 20.0)


@dataclass
class Scenario:
    """Full run configuration.

    Exactly one of ``sigma_d2`` / ``snr_db`` must be given.  With ``snr_db``
    the data noise derives from SNR = 10 log10(P_d / sigma_d^2) - PL_1; the
    reference power P_d is the tagged user's per-data-slot power of the
    evaluated layout (``snr_power_basis="per_slot"``) or the raw data budget
    (``"budget"``).
    """

    users: list = field(default_factory=list)
    antenna_count: int = 20
    carrier_frequency: float = 1000.0
    antenna_spacing: float = 0.5
    array_orientation: float = 0.0
    pilot_length: int = 1
    sigma_d2: float | None = None
    snr_db: float | None = None
    p_tot: float | None = None
    seed: int = 0
    doppler_normalization: str = "carrier"
    spatial_model: str = "identity"
    fixed_point_variant: str = "weighted"   # "weighted" | "literal"
    snr_power_basis: str = "per_slot"       # "per_slot" | "budget"
    se_units: str = "nats"                  # reporting only
    constellation: str = "qpsk"
    pilot_window_rule: str = "extend"       # "extend" | "clip"
    anchor_rule: str = "frame_pilot"        # "frame_pilot" | "previous_slot"
    _cov_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.validate()

    # -- validation ---------------------------------------------------------

    def validate(self):
        if not self.users:
            raise InvalidScenarioError("users: need at least one user")
        if (self.sigma_d2 is None) == (self.snr_db is None):
            raise InvalidScenarioError(
                "noise: provide exactly one of sigma_d2 or snr_db")
        if self.sigma_d2 is not None and self.sigma_d2 < 0:
            raise InvalidScenarioError("sigma_d2: must be >= 0")
        if self.fixed_point_variant not in ("weighted", "literal"):
            raise InvalidScenarioError(
                f"fixed_point_variant: unknown value {self.fixed_point_variant!r}")
        if self.snr_power_basis not in ("per_slot", "budget"):
            raise InvalidScenarioError(
                f"snr_power_basis: unknown value {self.snr_power_basis!r}")
        if self.se_units not in ("nats", "bits"):
            raise InvalidScenarioError(f"se_units: unknown value {self.se_units!r}")
        if self.pilot_window_rule not in ("extend", "clip"):
            raise InvalidScenarioError(
                f"pilot_window_rule: unknown value {self.pilot_window_rule!r}")
        if self.anchor_rule not in ("frame_pilot", "previous_slot"):
            raise InvalidScenarioError(
                f"anchor_rule: unknown value {self.anchor_rule!r}")
        for k, user in enumerate(self.users):
            if user.pp_max < 0 or user.pd_max < 0:
                raise InvalidScenarioError(f"users[{k}]: negative power budget")
            if user.sigma_p2 < 0:
                raise InvalidScenarioError(f"users[{k}].sigma_p2: must be >= 0")
            if user.path_loss_db < 0:
                raise InvalidScenarioError(
                    f"users[{k}].path_loss_db: must be >= 0 (attenuation)")

    def validate_horizon(self, horizon: int):
        """Check every schedule is evaluable and nonnegative over the horizon."""
        for k, user in enumerate(self.users):
            for t in range(1, horizon + 1):
                if user.rician_factor(t) < 0:
                    raise InvalidScenarioError(
                        f"users[{k}].rician_factor: negative at slot {t}")
                if user.nlos_variance(t) < 0:
                    raise InvalidScenarioError(
                        f"users[{k}].nlos_variance: negative at slot {t}")

    # -- derived objects ----------------------------------------------------

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def tagged(self) -> UserConfig:
        return self.users[0]

    def wave(self) -> WaveConfig:
        return WaveConfig(antenna_count=self.antenna_count,
                          carrier_frequency=self.carrier_frequency,
                          antenna_spacing=self.antenna_spacing,
                          array_orientation=self.array_orientation,
                          pilot_length=self.pilot_length,
                          doppler_normalization=self.doppler_normalization)

    def covariance_set(self, user_index: int, horizon: int):
        key = (user_index, horizon, self.spatial_model)
        if key not in self._cov_cache:
            self._cov_cache[key] = build_covariance_set(
                self.users[user_index].stat_model(), self.wave(), horizon,
                self.spatial_model)
        return self._cov_cache[key]

    def total_budget(self) -> float:
        if self.p_tot is not None:
            return self.p_tot
        return self.tagged.pp_max + self.tagged.pd_max

    def resolve_noise(self, layout: FrameLayout) -> float:
        """Data-noise variance, explicit or derived from the SNR definition."""
        if self.sigma_d2 is not None:
            return self.sigma_d2
        if self.snr_power_basis == "per_slot":
            p_ref = self.tagged.pd_max / layout.n_data_slots
        else:
            p_ref = self.tagged.pd_max
        pl1 = self.tagged.path_loss_db
        return p_ref * 10.0 ** (-(self.snr_db + pl1) / 10.0)

    def with_overrides(self, **kwargs) -> "Scenario":
        """Copy with selected top-level fields replaced."""
        d = scenario_to_dict(self)
        d.update(kwargs)
        return scenario_from_dict(d)

    def copy(self) -> "Scenario":
        return scenario_from_dict(scenario_to_dict(self))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

_SCHEDULE_FIELDS = ("doppler", "rician_factor", "nlos_variance", "heading",
                    "los_doppler")
_ANGLE_FIELDS = ("aoa", "aod")


def _user_to_dict(user: UserConfig) -> dict:
    d = {}
    for f in fields(UserConfig):
        value = getattr(user, f.name)
        if value is None:
            continue
        if f.name in _SCHEDULE_FIELDS:
            d[f.name] = value.to_dict()
        elif f.name in _ANGLE_FIELDS:
            d[f.name] = {"kind": value.kind,
                         "concentration": value.concentration,
                         "central_angle": value.central_angle}
        else:
            d[f.name] = value
    return d


def _user_from_dict(d: dict, path: str) -> UserConfig:
    kwargs = {}
    known = {f.name for f in fields(UserConfig)}
    for key, value in d.items():
        if key not in known:
            raise InvalidScenarioError(f"{path}.{key}: unknown field")
        if key in _SCHEDULE_FIELDS:
            try:
                kwargs[key] = ParamSchedule.from_value(value)
            except Exception as exc:
                raise InvalidScenarioError(f"{path}.{key}: {exc}") from exc
        elif key in _ANGLE_FIELDS:
            kwargs[key] = AngularDistribution(
                kind=value.get("kind", "uniform"),
                concentration=float(value.get("concentration", 0.0)),
                central_angle=float(value.get("central_angle", 0.0)))
        else:
            kwargs[key] = value
    return UserConfig(**kwargs)


def scenario_to_dict(scenario: Scenario) -> dict:
    d = {}
    for f in fields(Scenario):
        if f.name.startswith("_"):
            continue
        value = getattr(scenario, f.name)
        if f.name == "users":
            d["users"] = [_user_to_dict(u) for u in value]
        elif value is not None:
            d[f.name] = value
    return d


def scenario_from_dict(d: dict) -> Scenario:
    known = {f.name for f in fields(Scenario) if not f.name.startswith("_")}
    kwargs = {}
    for key, value in d.items():
        if key not in known:
            raise InvalidScenarioError(f"{key}: unknown field")
        if key == "users":
            if not isinstance(value, list):
                raise InvalidScenarioError("users: expected a list")
            kwargs["users"] = [_user_from_dict(u, f"users[{i}]")
                               for i, u in enumerate(value)]
        else:
            kwargs[key] = value
    return Scenario(**kwargs)


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidScenarioError(f"invalid JSON in {path}: {exc}") from exc
    return scenario_from_dict(data)


def save_scenario(scenario: Scenario, path):
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=2, sort_keys=True)
        fh.write("\n")
