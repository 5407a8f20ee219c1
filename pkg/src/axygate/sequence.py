"""AXY pulse schedules, their modulation functions and injected pulse errors."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, InvalidParameterError, ScheduleInfeasibleError
from .physics import QubitParams

AXY_PHASES_X = (np.pi / 6, np.pi / 2, 0.0, np.pi / 2, np.pi / 6)
AXY_PHASES_Y = tuple(p + np.pi / 2 for p in AXY_PHASES_X)

# Adjacent pulses may touch but not overlap; absorbs float round-off in centers.
_OVERLAP_SLACK = 1e-15


@dataclass(frozen=True)
class Pulse:
    center: float
    duration: float
    phase: float
    angle: float = np.pi
    channel: int = 0

    def __post_init__(self):
        if self.duration < 0:
            raise InvalidParameterError(f"pulse duration must be >= 0, got {self.duration}")
        if self.center - self.duration / 2 < -_OVERLAP_SLACK:
            raise InvalidParameterError(f"pulse at {self.center} starts before t=0")

    @property
    def start(self) -> float:
        return self.center - self.duration / 2

    @property
    def end(self) -> float:
        return self.center + self.duration / 2


@dataclass(frozen=True)
class AxyParams:
    tau: float
    tau_a: float
    tau_b: float
    m: int
    r: int = 0
    block_phases_x: tuple = AXY_PHASES_X
    block_phases_y: tuple = AXY_PHASES_Y

    def __post_init__(self):
        if not (0 < self.tau_a < self.tau_b < self.tau / 2):
            raise InvalidParameterError(
                f"need 0 < tau_a < tau_b < tau/2, got tau_a={self.tau_a}, "
                f"tau_b={self.tau_b}, tau={self.tau}")
        if self.m < 2 or self.m % 2:
            raise InvalidParameterError(f"block count m must be even and positive, got {self.m}")
        if len(self.block_phases_x) != 5 or len(self.block_phases_y) != 5:
            raise InvalidParameterError("AXY blocks carry exactly five phases")

    @property
    def gate_time(self) -> float:
        return self.m * self.tau

    def block_offsets(self) -> np.ndarray:
        return np.array([self.tau_a, self.tau_b, self.tau / 2,
                         self.tau - self.tau_b, self.tau - self.tau_a])


@dataclass(frozen=True)
class PulseSchedule:
    pulses: tuple[Pulse, ...]
    total_time: float
    params: AxyParams | None = field(default=None, compare=False)

    def __post_init__(self):
        ordered = sorted(self.pulses, key=lambda p: (p.center, p.channel))
        object.__setattr__(self, "pulses", tuple(ordered))
        check_overlaps(self.pulses)
        if self.pulses and self.pulses[-1].end > self.total_time * (1 + 1e-12):
            raise InvalidParameterError("pulse extends beyond total_time")

    def channels(self) -> list[int]:
        return sorted({p.channel for p in self.pulses})

    def on_channel(self, channel: int) -> list[Pulse]:
        return [p for p in self.pulses if p.channel == channel]

    def flip_times(self, channel: int) -> np.ndarray:
        """Pulse centers on one channel, where the modulation function changes sign."""
        return np.array([p.center for p in self.pulses if p.channel == channel])

    def with_pulses(self, pulses: Iterable[Pulse]) -> "PulseSchedule":
        return PulseSchedule(tuple(pulses), self.total_time, self.params)


def check_overlaps(pulses: Sequence[Pulse]) -> None:
    by_channel: dict[int, list[Pulse]] = {}
    for p in pulses:
        by_channel.setdefault(p.channel, []).append(p)
    for ch, ps in by_channel.items():
        ps = sorted(ps, key=lambda p: p.center)
        for a, b in zip(ps, ps[1:]):
            if a.center == b.center:
                raise ScheduleInfeasibleError(
                    f"two pulses share center {a.center:.9g} s on channel {ch}", (a, b))
            if b.start < a.end - _OVERLAP_SLACK * max(1.0, a.end):
                raise ScheduleInfeasibleError(
                    f"pulses at {a.center:.9g} s and {b.center:.9g} s overlap on channel {ch} "
                    f"(durations {a.duration:.3g} s, {b.duration:.3g} s)", (a, b))


def build_axy(params: AxyParams, qubits: QubitParams,
              channels: Sequence[int] = (0, 1)) -> PulseSchedule:
    """Concatenate m alternating X/Y blocks of five pi pulses on every channel."""
    offsets = params.block_offsets()
    pulses = []
    for ch in channels:
        t_p = np.pi / qubits.rabi_freq[ch]
        for i in range(params.m):
            phases = params.block_phases_x if i % 2 == 0 else params.block_phases_y
            for off, ph in zip(offsets, phases):
                pulses.append(Pulse(i * params.tau + off, t_p, float(ph), np.pi, ch))
    return PulseSchedule(tuple(pulses), params.gate_time, params)


def modulation_function(schedule: PulseSchedule, channel: int, t):
    """Sign f(t) = +/-1 of the toggling-frame spin operator, flipping at pulse centers."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > schedule.total_time):
        raise DomainError(f"t must lie in [0, {schedule.total_time}]")
    flips = schedule.flip_times(channel)
    n = np.searchsorted(flips, t_arr, side="left")
    f = 1 - 2 * (n % 2)
    return int(f) if f.ndim == 0 else f


def apply_area_error(schedule: PulseSchedule, eps: float) -> PulseSchedule:
    """Every rotation angle becomes pi*(1 + eps); timings untouched."""
    if eps <= -1:
        raise InvalidParameterError(f"area error must exceed -1, got {eps}")
    return schedule.with_pulses(replace(p, angle=np.pi * (1 + eps)) for p in schedule.pulses)


def apply_timing_error(schedule: PulseSchedule, eps: float) -> PulseSchedule:
    """Rabi frequency scaled by (1 + eps) with pulse time recalibrated; centers fixed."""
    if eps <= -1:
        raise InvalidParameterError(f"timing error must exceed -1, got {eps}")
    return schedule.with_pulses(replace(p, duration=p.duration / (1 + eps))
                                for p in schedule.pulses)


def schedule_to_dict(schedule: PulseSchedule) -> dict:
    params = schedule.params
    header = None
    if params is not None:
        header = {"tau_s": params.tau, "tau_a_s": params.tau_a, "tau_b_s": params.tau_b,
                  "m": params.m, "r": params.r}
    records = [{"center_s": p.center, "duration_s": p.duration, "phase_rad": p.phase,
                "angle_rad": p.angle, "channel": p.channel} for p in schedule.pulses]
    return {"header": header, "pulses": records}


def schedule_from_dict(data: dict) -> PulseSchedule:
    pulses = tuple(Pulse(r["center_s"], r["duration_s"], r["phase_rad"], r["angle_rad"],
                         int(r["channel"])) for r in data["pulses"])
    h = data.get("header")
    params = None
    if h is not None:
        params = AxyParams(h["tau_s"], h["tau_a_s"], h["tau_b_s"], int(h["m"]), int(h["r"]))
        total = params.gate_time
    else:
        total = max((p.end for p in pulses), default=0.0)
    return PulseSchedule(pulses, total, params)
