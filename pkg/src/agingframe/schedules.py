"""Slot-indexed parameter schedules.

Scenario quantities such as Doppler frequency, Rician K factor and NLoS
variance may change from slot to slot.  A :class:`ParamSchedule` captures the
small family of closed forms needed for that: constants, linear/affine ramps
and reciprocal decays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidScenarioError

# Forms understood by ParamSchedule.  "reciprocal_affine" (a / (b - t)) is the
# mirror of "reciprocal" for quantities that blow up toward the end of the
# horizon; both reject the slots where the denominator vanishes.
FORMS = ("constant", "linear", "affine", "reciprocal", "reciprocal_affine")


class ScheduleError(InvalidScenarioError):
    """Raised when a schedule cannot be evaluated at a requested slot."""


@dataclass(frozen=True)
class ParamSchedule:
    """A scalar parameter as a function of the (1-based) slot index.

    form:
        constant            -> a
        linear              -> a * t
        affine              -> a * (b - t)
        reciprocal          -> a / t          (t = 0 rejected)
        reciprocal_affine   -> a / (b - t)    (denominator floored at 1e-6)
    """

    form: str = "constant"
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if self.form not in FORMS:
            raise ScheduleError(f"unknown schedule form {self.form!r}")

    def __call__(self, t: float) -> float:
        if not np.isfinite(t):
            raise ScheduleError(f"non-finite slot index {t!r}")
        if self.form == "constant":
            return self.a
        if self.form == "linear":
            return self.a * t
        if self.form == "affine":
            return self.a * (self.b - t)
        if self.form == "reciprocal":
            if t == 0:
                raise ScheduleError("reciprocal schedule undefined at t = 0")
            return self.a / t
        # reciprocal_affine
        den = self.b - t
        if den <= 0:
            raise ScheduleError(
                f"reciprocal_affine schedule a/({self.b} - t) undefined at "
                f"slot {t}")
        return self.a / den

    @property
    def is_constant(self) -> bool:
        return self.form == "constant" or self.a == 0.0

    def constant_value(self) -> float:
        """Value of a constant schedule; raises for time-varying forms."""
        if not self.is_constant:
            raise ScheduleError(f"schedule {self} is not constant")
        return self(1)

    def to_dict(self) -> dict:
        d = {"form": self.form, "a": self.a}
        if self.form in ("affine", "reciprocal_affine"):
            d["b"] = self.b
        return d

    @classmethod
    def from_value(cls, value) -> "ParamSchedule":
        """Build from a bare number or a ``{"form": ..., "a": ...}`` mapping."""
        if isinstance(value, ParamSchedule):
            return value
        if isinstance(value, (int, float)):
            return cls("constant", float(value))
        if isinstance(value, dict):
            form = value.get("form", "constant")
            return cls(form, float(value.get("a", 0.0)), float(value.get("b", 0.0)))
        raise ScheduleError(f"cannot build schedule from {value!r}")


def constant(value: float) -> ParamSchedule:
    return ParamSchedule("constant", float(value))
