"""Clock-driven integration of a LIF network under a drive schedule.

Each step of width ``dt`` (starting at time ``t``) updates every
non-refractory neuron by

1. exact exponential relaxation toward ``v_rest + V_ext(t)`` over ``dt``,
2. adding the weights of every spike fired in the previous step,
3. firing if ``v >= v_th``: the spike is stamped ``t + dt``, ``v`` resets and
   the neuron ignores all input for ``t_refract``.

Refractory neurons are clamped at ``v_reset``. Spikes are delivered with a
one-step delay.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from spikecomm.errors import NumericFault, ParameterError, ParseError
from spikecomm.network import SpikingNetwork
from spikecomm.stimulus import DriveSchedule, pulse_value

_TIME_DECIMALS = 9


@dataclass(frozen=True)
class SimulationConfig:
    """``duration=None`` runs to the schedule's ``total_duration``.

    ``v_init`` overrides the starting potential (scalar or per neuron);
    the default is ``v_rest``.
    """

    dt: float = 0.1
    duration: float | None = None
    record_potentials: bool = False
    potential_floor: float | None = None
    v_init: float | Sequence[float] | None = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError(f"dt must be > 0, got {self.dt}")
        if self.duration is not None and self.duration < 0:
            raise ParameterError("duration must be >= 0")


@dataclass(frozen=True, eq=False)
class SpikeData:
    """Per-neuron sorted spike times (ms) over ``[0, duration]``."""

    n: int
    trains: tuple
    duration: float

    def __post_init__(self):
        trains = tuple(np.asarray(t, dtype=float) for t in self.trains)
        if len(trains) != self.n:
            raise ParameterError(f"expected {self.n} trains, got {len(trains)}")
        for i, t in enumerate(trains):
            if t.size and (np.any(np.diff(t) <= 0) or t[0] < 0 or t[-1] > self.duration):
                raise ParameterError(f"train {i} not strictly increasing within [0, duration]")
            t.flags.writeable = False
        object.__setattr__(self, "trains", trains)

    def __eq__(self, other):
        if not isinstance(other, SpikeData):
            return NotImplemented
        return (
            self.n == other.n
            and self.duration == other.duration
            and all(np.array_equal(a, b) for a, b in zip(self.trains, other.trains))
        )

    def counts(self) -> np.ndarray:
        return np.array([t.size for t in self.trains], dtype=int)

    @property
    def total_spikes(self) -> int:
        return int(self.counts().sum())

    def events(self) -> tuple[np.ndarray, np.ndarray]:
        """``(neuron, time)`` arrays sorted by time then neuron."""
        if self.total_spikes == 0:
            return np.zeros(0, dtype=int), np.zeros(0)
        neurons = np.concatenate([np.full(t.size, i) for i, t in enumerate(self.trains)])
        times = np.concatenate(self.trains)
        order = np.lexsort((neurons, times))
        return neurons[order], times[order]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["neuron", "time_ms"])
        for i, t in zip(*self.events()):
            w.writerow([int(i), repr(float(t))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, n: int, duration: float) -> "SpikeData":
        rows = csv.reader(io.StringIO(text))
        header = next(rows, None)
        if header != ["neuron", "time_ms"]:
            raise ParseError(f"spike line 1: unexpected header {header!r}")
        per: list[list[float]] = [[] for _ in range(n)]
        for lineno, row in enumerate(rows, start=2):
            if not row:
                continue
            try:
                i, t = int(row[0]), float(row[1])
            except (ValueError, IndexError):
                raise ParseError(f"spike line {lineno}: malformed row {row!r}") from None
            if not 0 <= i < n:
                raise ParseError(f"spike line {lineno}: neuron {i} out of range [0, {n})")
            per[i].append(t)
        try:
            return cls(n, tuple(sorted(p) for p in per), duration)
        except ParameterError as exc:
            raise ParseError(f"spike data: {exc}") from None


@dataclass(frozen=True, eq=False)
class MembraneTrace:
    neuron: int
    times: np.ndarray
    potentials: np.ndarray


def traces_to_csv(traces: Sequence[MembraneTrace]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["neuron", "time_ms", "potential_v"])
    for tr in traces:
        for t, v in zip(tr.times, tr.potentials):
            w.writerow([tr.neuron, repr(float(t)), repr(float(v))])
    return buf.getvalue()


@numba.njit(cache=True)
def _integrate(
    weights, decay, v_rest, v_th, v_reset, refr_steps, floor, has_floor, v, n_steps,
    seg_target, seg_start, seg_end, seg_off, seg_vals,
    rec_ids, rec_buf, spk_neuron, spk_step,
):  # fmt: skip
    n = v.shape[0]
    refr = np.zeros(n, dtype=np.int64)
    ext = np.zeros(n)
    syn = np.zeros(n)
    fired = np.empty(n, dtype=np.int64)
    n_fired = 0
    active = np.empty(seg_target.shape[0], dtype=np.int64)
    n_active = 0
    next_seg = 0
    n_spk = 0
    cap = spk_neuron.shape[0]
    for k in range(rec_ids.shape[0]):
        rec_buf[k, 0] = v[rec_ids[k]]
    for s in range(n_steps):
        # drive: activate segments starting here, drop finished ones
        while next_seg < seg_target.shape[0] and seg_start[next_seg] <= s:
            active[n_active] = next_seg
            n_active += 1
            next_seg += 1
        a = 0
        while a < n_active:
            g = active[a]
            if seg_end[g] <= s:
                n_active -= 1
                active[a] = active[n_active]
            else:
                ext[seg_target[g]] += seg_vals[seg_off[g] + s - seg_start[g]]
                a += 1
        # synaptic input from spikes of the previous step
        had_input = n_fired > 0
        for q in range(n_fired):
            row = weights[fired[q]]
            for i in range(n):
                syn[i] += row[i]
        n_fired = 0
        for i in range(n):
            if refr[i] > 0:
                refr[i] -= 1
                v[i] = v_reset
                continue
            target = v_rest + ext[i]
            vi = target + (v[i] - target) * decay + syn[i]
            if has_floor and vi < floor:
                vi = floor
            if not math.isfinite(vi):
                return n_spk, 1, i, s
            if vi >= v_th:
                if n_spk == cap:
                    return n_spk, 2, i, s
                spk_neuron[n_spk] = i
                spk_step[n_spk] = s
                n_spk += 1
                fired[n_fired] = i
                n_fired += 1
                vi = v_reset
                refr[i] = refr_steps
            v[i] = vi
        for a in range(n_active):
            ext[seg_target[active[a]]] = 0.0
        if had_input:
            syn[:] = 0.0
        for k in range(rec_ids.shape[0]):
            rec_buf[k, s + 1] = v[rec_ids[k]]
    return n_spk, 0, -1, -1


def _drive_segments(schedule: DriveSchedule, dt: float, n_steps: int):
    targets, starts, ends, offs, chunks = [], [], [], [], []
    off = 0
    for p in sorted(schedule.pulses, key=lambda p: p.t1):
        lo, hi = p.support()
        s0 = max(0, int(math.floor(lo / dt)))
        s1 = min(n_steps, int(math.ceil(hi / dt)) + 1)
        if s1 <= s0:
            continue
        vals = pulse_value(p, np.arange(s0, s1) * dt)
        targets.append(p.target)
        starts.append(s0)
        ends.append(s1)
        offs.append(off)
        chunks.append(np.atleast_1d(vals))
        off += s1 - s0
    as_int = lambda xs: np.array(xs, dtype=np.int64)  # noqa: E731
    vals = np.concatenate(chunks) if chunks else np.zeros(0)
    return as_int(targets), as_int(starts), as_int(ends), as_int(offs), vals


def _run(net: SpikingNetwork, schedule: DriveSchedule, cfg: SimulationConfig, record_ids):
    p = net.params
    for pulse in schedule.pulses:
        if not 0 <= pulse.target < net.n:
            raise ParameterError(f"schedule targets neuron {pulse.target} but network has n={net.n}")
    dt = cfg.dt
    if p.t_refract > 0 and dt > p.t_refract / 2:
        raise ParameterError(f"dt={dt} exceeds t_refract/2={p.t_refract / 2}")
    if dt > p.tau / 50:
        warnings.warn(f"dt={dt} ms is coarse relative to tau={p.tau} ms", RuntimeWarning, stacklevel=3)
    duration = schedule.total_duration if cfg.duration is None else cfg.duration
    n_steps = int(round(duration / dt))
    refr_steps = int(round(p.t_refract / dt))
    if abs(refr_steps * dt - p.t_refract) > 1e-9 * max(1.0, p.t_refract):
        warnings.warn("t_refract is not a multiple of dt; rounded to the nearest step", RuntimeWarning, stacklevel=3)

    v = np.full(net.n, p.v_rest, dtype=float)
    if cfg.v_init is not None:
        v[:] = np.asarray(cfg.v_init, dtype=float)
    rec_ids = np.asarray(record_ids, dtype=np.int64)
    if np.any((rec_ids < 0) | (rec_ids >= net.n)):
        raise ParameterError("recorded neuron id out of range")
    rec_buf = np.zeros((rec_ids.size, n_steps + 1))
    segs = _drive_segments(schedule, dt, n_steps)
    weights = np.ascontiguousarray(net.weights)
    floor = 0.0 if cfg.potential_floor is None else float(cfg.potential_floor)

    cap = max(1024, min(net.n * (n_steps // (refr_steps + 1) + 1), 1 << 20))
    while True:
        spk_neuron = np.empty(cap, dtype=np.int64)
        spk_step = np.empty(cap, dtype=np.int64)
        v_run = v.copy()
        n_spk, status, bad_i, bad_s = _integrate(
            weights, math.exp(-dt / p.tau), p.v_rest, p.v_th, p.v_reset, refr_steps,
            floor, cfg.potential_floor is not None, v_run, n_steps, *segs,
            rec_ids, rec_buf, spk_neuron, spk_step,
        )  # fmt: skip
        if status != 2:
            break
        cap *= 4
    if status == 1:
        raise NumericFault(f"non-finite potential on neuron {bad_i} at t={bad_s * dt} ms")

    times = np.round((spk_step[:n_spk] + 1) * dt, _TIME_DECIMALS)
    neurons = spk_neuron[:n_spk]
    trains = tuple(times[neurons == i] for i in range(net.n))
    spikes = SpikeData(net.n, trains, float(duration))
    t_axis = np.round(np.arange(n_steps + 1) * dt, _TIME_DECIMALS)
    traces = [MembraneTrace(int(i), t_axis, rec_buf[k]) for k, i in enumerate(rec_ids)]
    return spikes, traces


def run_simulation(net: SpikingNetwork, schedule: DriveSchedule, cfg: SimulationConfig | None = None) -> SpikeData:
    """Integrate ``net`` under ``schedule`` and return the spike trains."""
    spikes, _ = _run(net, schedule, cfg or SimulationConfig(), [])
    return spikes


def record_membrane(
    net: SpikingNetwork,
    schedule: DriveSchedule,
    cfg: SimulationConfig | None,
    neuron_ids: Sequence[int],
) -> list[MembraneTrace]:
    """Same dynamics as :func:`run_simulation`, sampling potentials after every step."""
    _, traces = _run(net, schedule, cfg or SimulationConfig(), list(neuron_ids))
    return traces


def simulate_with_traces(net, schedule, cfg, neuron_ids):
    """Spikes and traces from a single run."""
    return _run(net, schedule, cfg or SimulationConfig(), list(neuron_ids))
