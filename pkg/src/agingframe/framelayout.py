"""Multi-frame slot structure and pilot/data power splitting.

A layout is a vector of frame sizes ``q = [q_1, ..., q_M]``.  The first slot
of every frame carries pilots, the remaining ``q_m - 1`` slots carry data.
Slots are 1-based; frame m occupies slots ``delta_{m-1} .. delta_m - 1`` with
``delta_m = sum(q_1..q_m) + 1`` and ``delta_0 = 1``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidLayoutError


@dataclass(frozen=True)
class FrameLayout:
    frame_sizes: tuple
    boundaries: tuple          # (delta_0, ..., delta_M)
    pilot_slots: tuple         # first slot of each frame
    data_slots: tuple
    frame_of_slot: tuple       # frame index (1-based) per slot, horizon entries

    @property
    def frame_count(self) -> int:
        return len(self.frame_sizes)

    @property
    def horizon(self) -> int:
        return self.boundaries[-1] - 1

    @property
    def n_data_slots(self) -> int:
        return len(self.data_slots)

    def is_pilot(self, slot: int) -> bool:
        return slot in self.pilot_slots

    def frame_of(self, slot: int) -> int:
        if not 1 <= slot <= self.horizon:
            raise InvalidLayoutError(f"slot {slot} outside horizon {self.horizon}")
        return self.frame_of_slot[slot - 1]

    def pilot_slot_of_frame(self, m: int) -> int:
        if not 1 <= m <= self.frame_count:
            raise InvalidLayoutError(f"frame {m} outside [1, {self.frame_count}]")
        return self.boundaries[m - 1]

    def frame_slots(self, m: int) -> range:
        return range(self.boundaries[m - 1], self.boundaries[m])

    def __str__(self):
        return "[" + ",".join(str(q) for q in self.frame_sizes) + "]"


def build_layout(frame_sizes) -> FrameLayout:
    """Construct and classify a multi-frame layout.

    Every frame must have at least 2 slots (one pilot plus one data slot).
    """
    q = tuple(int(v) for v in frame_sizes)
    if not q:
        raise InvalidLayoutError("layout needs at least one frame")
    if any(v < 2 for v in q):
        raise InvalidLayoutError(
            f"every frame needs a pilot and at least one data slot, got {q}")
    boundaries = [1]
    for size in q:
        boundaries.append(boundaries[-1] + size)
    pilots = tuple(boundaries[:-1])
    horizon = boundaries[-1] - 1
    frame_of = []
    for m, size in enumerate(q, start=1):
        frame_of.extend([m] * size)
    data = tuple(s for s in range(1, horizon + 1) if s not in pilots)
    return FrameLayout(frame_sizes=q, boundaries=tuple(boundaries),
                       pilot_slots=pilots, data_slots=data,
                       frame_of_slot=tuple(frame_of))


def parse_layout(text: str) -> FrameLayout:
    """Parse a comma-separated layout literal such as "3,3,3,2"."""
    try:
        sizes = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise InvalidLayoutError(f"cannot parse layout {text!r}") from exc
    return build_layout(sizes)


@dataclass(frozen=True)
class PowerBudget:
    pp_max: float              # total pilot power
    pd_max: float              # total data power
    pilot_power: float         # per pilot slot, pp_max / M
    data_power: float          # per data slot, pd_max / (#data slots)
    p_tot: float | None = None

    @property
    def degenerate(self) -> bool:
        return self.pilot_power == 0.0 or self.data_power == 0.0


def split_powers(layout: FrameLayout, pp_max: float, pd_max: float,
                 p_tot: float | None = None) -> PowerBudget:
    """Split the pilot/data budgets evenly over pilot and data slots."""
    if pp_max < 0 or pd_max < 0:
        raise InvalidLayoutError("power budgets must be nonnegative")
    if p_tot is not None and pp_max + pd_max > p_tot + 1e-12:
        raise InvalidLayoutError(
            f"pp_max + pd_max = {pp_max + pd_max} exceeds budget {p_tot}")
    n_data = layout.n_data_slots
    if n_data == 0:
        raise InvalidLayoutError("layout has no data slots")
    return PowerBudget(pp_max=pp_max, pd_max=pd_max,
                       pilot_power=pp_max / layout.frame_count,
                       data_power=pd_max / n_data, p_tot=p_tot)
