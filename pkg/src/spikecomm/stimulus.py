"""Square-pulse drive waveforms and driving protocols.

A pulse on ``[t1, t2]`` is the smooth step

    V(t) = a_max * (tanh(beta*(t - t1)) + tanh(beta*(t2 - t)))

which sits at ``2*a_max`` on the plateau and vanishes far outside it.
Protocols drive one neuron at a time, pulses separated by a fixed gap.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from spikecomm.calibration import amax_for_target_isi
from spikecomm.errors import ParameterError, ParseError
from spikecomm.graph import LabeledGraph
from spikecomm.network import NeuronParams

PULSE_WIDTH = 200.0
PULSE_GAP = 800.0
T_START = 1000.0
BETA = 1.0
A_MAX = amax_for_target_isi(NeuronParams(), 21.0)

# tanh saturates to exactly +-1 in double precision beyond |x| ~ 19.1, so a
# pulse contributes exactly zero once it is this many 1/beta outside [t1, t2].
TAIL_WIDTHS = 20.0


@dataclass(frozen=True)
class SquarePulse:
    target: int
    t1: float
    t2: float
    a_max: float = A_MAX
    beta: float = BETA

    def __post_init__(self):
        if not self.t2 > self.t1:
            raise ParameterError(f"pulse needs t2 > t1, got [{self.t1}, {self.t2}]")
        if not self.beta > 0 or not self.a_max > 0:
            raise ParameterError("pulse beta and a_max must be > 0")

    @property
    def width(self) -> float:
        return self.t2 - self.t1

    def support(self) -> tuple[float, float]:
        """Interval outside which the waveform is exactly zero."""
        pad = TAIL_WIDTHS / self.beta
        return self.t1 - pad, self.t2 + pad


def pulse_value(p: SquarePulse, t):
    """Drive potential (V) of pulse ``p`` at time(s) ``t`` (ms)."""
    t = np.asarray(t, dtype=float)
    v = p.a_max * (np.tanh(p.beta * (t - p.t1)) + np.tanh(p.beta * (p.t2 - t)))
    return float(v) if v.ndim == 0 else v


@dataclass(frozen=True)
class DriveSchedule:
    """Time-ordered, non-overlapping pulses. ``gap`` separates consecutive pulses."""

    pulses: tuple
    total_duration: float
    gap: float

    def __post_init__(self):
        pulses = tuple(self.pulses)
        object.__setattr__(self, "pulses", pulses)
        if self.gap < 0:
            raise ParameterError("gap must be >= 0")
        for prev, nxt in zip(pulses, pulses[1:]):
            if not np.isclose(nxt.t1 - prev.t2, self.gap):
                raise ParameterError(
                    f"pulses must be spaced by gap={self.gap}: got {nxt.t1 - prev.t2} "
                    f"between t={prev.t2} and t={nxt.t1}"
                )
        if pulses and self.total_duration < pulses[-1].t2 + self.gap - 1e-9:
            raise ParameterError("total_duration must cover the last pulse plus one gap")

    @property
    def targets(self) -> list[int]:
        return [p.target for p in self.pulses]

    def drive_at(self, neuron: int, t):
        """Summed drive on ``neuron`` at time(s) ``t``."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for p in self.pulses:
            if p.target == neuron:
                out = out + pulse_value(p, t)
        return float(out) if out.ndim == 0 else out


def _schedule(order: Sequence[int], t_start, t_A, gap, a_max, beta) -> DriveSchedule:
    if t_A <= 0:
        raise ParameterError("pulse width must be > 0")
    if gap < 0:
        raise ParameterError("gap must be >= 0")
    period = t_A + gap
    pulses = tuple(
        SquarePulse(int(v), t_start + k * period, t_start + k * period + t_A, a_max, beta)
        for k, v in enumerate(order)
    )
    # quiet lead-in mirrored after the final gap
    duration = 2 * t_start + len(pulses) * period
    return DriveSchedule(pulses, duration, gap)


def community_ordered_schedule(
    g: LabeledGraph,
    communities: Sequence[int],
    t_start: float = T_START,
    t_A: float = PULSE_WIDTH,
    gap: float = PULSE_GAP,
    a_max: float = A_MAX,
    beta: float = BETA,
) -> DriveSchedule:
    """Drive each listed community in turn, members in ascending id order.

    Pulse ``k`` spans ``[t_start + k*(t_A + gap), ... + t_A]``. The schedule
    ends ``t_start`` after the last gap, so three 32-neuron communities with
    the default timing fill 98 s.
    """
    members = g.communities()
    order: list[int] = []
    for c in communities:
        if not 0 <= c < len(members):
            raise ParameterError(f"unknown community id {c}")
        order.extend(members[c])
    return _schedule(order, t_start, t_A, gap, a_max, beta)


def random_permutation_schedule(
    g: LabeledGraph,
    seed: int = 0,
    t_start: float = T_START,
    t_A: float = PULSE_WIDTH,
    gap: float = PULSE_GAP,
    a_max: float = A_MAX,
    beta: float = BETA,
) -> DriveSchedule:
    """Drive every neuron exactly once in a seeded uniformly random order."""
    order = np.random.default_rng(seed).permutation(g.n)
    return _schedule(order.tolist(), t_start, t_A, gap, a_max, beta)


def schedule_to_csv(schedule: DriveSchedule) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["target", "t1_ms", "t2_ms", "a_max", "beta"])
    for p in schedule.pulses:
        w.writerow([p.target, repr(p.t1), repr(p.t2), repr(p.a_max), repr(p.beta)])
    return buf.getvalue()


def schedule_from_csv(text: str, gap: float | None = None, total_duration: float | None = None) -> DriveSchedule:
    """Inverse of :func:`schedule_to_csv`. ``gap`` is inferred from the first two pulses if omitted."""
    pulses = []
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if header != ["target", "t1_ms", "t2_ms", "a_max", "beta"]:
        raise ParseError(f"schedule line 1: unexpected header {header!r}")
    for lineno, row in enumerate(rows, start=2):
        if not row:
            continue
        try:
            pulses.append(SquarePulse(int(row[0]), float(row[1]), float(row[2]), float(row[3]), float(row[4])))
        except (ValueError, IndexError, ParameterError) as exc:
            raise ParseError(f"schedule line {lineno}: {exc}") from None
    if gap is None:
        gap = pulses[1].t1 - pulses[0].t2 if len(pulses) > 1 else PULSE_GAP
    if total_duration is None:
        total_duration = pulses[-1].t2 + gap if pulses else 0.0
    return DriveSchedule(tuple(pulses), total_duration, gap)
