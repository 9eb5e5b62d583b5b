"""Spike-train decoding: binary codes, Hamming similarity and bipolar states.

Binary decoding splits ``[t_origin, duration]`` into bins of width ``dt``
(half-open, the final bin also closed on the right) and sets a bit when a
neuron spikes at least once in the bin. Two codes are compared with the
normalised Hamming similarity ``1 - h/L``. The weighted variant multiplies
that by the number of occupied bins in each code.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from spikecomm.errors import ParameterError
from spikecomm.simulator import SpikeData
from spikecomm.stimulus import DriveSchedule

Variant = Literal["plain", "weighted"]


@dataclass(frozen=True, eq=False)
class BinaryCodeMatrix:
    codes: np.ndarray
    bin_width: float
    t_origin: float

    @property
    def n_bins(self) -> int:
        return self.codes.shape[1]


@dataclass(frozen=True, eq=False)
class ComparisonMatrix:
    values: np.ndarray
    variant: str
    bin_width: float

    def to_csv(self) -> str:
        n = self.values.shape[0]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["neuron", *range(n)])
        for i in range(n):
            w.writerow([i, *(repr(float(x)) for x in self.values[i])])
        return buf.getvalue()


def binarize(spikes: SpikeData, bin_width: float, t_origin: float = 0.0) -> BinaryCodeMatrix:
    """One bit per bin: 1 iff the neuron fired at least once inside it."""
    if not bin_width > 0:
        raise ParameterError(f"bin width must be > 0, got {bin_width}")
    span = spikes.duration - t_origin
    if span <= 0:
        raise ParameterError("t_origin must precede the end of the recording")
    if bin_width >= span:
        warnings.warn(f"bin width {bin_width} ms covers the whole recording: single bin", RuntimeWarning, stacklevel=2)
    n_bins = max(1, math.ceil(span / bin_width))
    codes = np.zeros((spikes.n, n_bins), dtype=np.uint8)
    for i, t in enumerate(spikes.trains):
        t = t[t >= t_origin]
        if t.size:
            k = np.minimum(np.floor((t - t_origin) / bin_width).astype(np.int64), n_bins - 1)
            codes[i, k] = 1
    return BinaryCodeMatrix(codes, float(bin_width), float(t_origin))


def _rows(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if x.shape != y.shape or x.ndim != 1:
        raise ParameterError(f"code length mismatch: {x.shape} vs {y.shape}")
    return x, y


def hamming_plain(x, y) -> float:
    """``1 - h(x, y)/L``, or 0 when either code has no occupied bin."""
    x, y = _rows(x, y)
    if not x.any() or not y.any():
        return 0.0
    h = int(np.count_nonzero(x != y))
    return 1.0 - h / x.size


def hamming_weighted(x, y) -> float:
    """``(1 - h/L) * ones(x) * ones(y)``; favours pairs that both fire often."""
    x, y = _rows(x, y)
    if x.size == 0:
        return 0.0
    h = int(np.count_nonzero(x != y))
    # integer numerator keeps the value exactly symmetric in (x, y)
    return (x.size - h) * int(x.sum()) * int(y.sum()) / x.size


def comparison_matrix(codes: BinaryCodeMatrix, variant: Variant = "plain") -> ComparisonMatrix:
    """All-pairs similarity, vectorised through the code Gram matrix."""
    if variant not in ("plain", "weighted"):
        raise ParameterError(f"unknown metric variant {variant!r}")
    x = codes.codes.astype(np.int64)
    n_bins = x.shape[1]
    ones = x.sum(axis=1)
    shared = x @ x.T
    h = ones[:, None] + ones[None, :] - 2 * shared
    sim = 1.0 - h / n_bins
    if variant == "plain":
        silent = ones == 0
        sim[silent, :] = 0.0
        sim[:, silent] = 0.0
    else:
        sim = (n_bins - h) * ones[:, None] * ones[None, :] / n_bins
    return ComparisonMatrix(sim, variant, codes.bin_width)


def _check_windows(windows) -> list[tuple[float, float]]:
    wins = [(float(a), float(b)) for a, b in windows]
    for a, b in wins:
        if not b > a:
            raise ParameterError(f"window [{a}, {b}) is empty")
    ordered = sorted(wins)
    for (a0, b0), (a1, b1) in zip(ordered, ordered[1:]):
        if a1 < b0:
            raise ParameterError(f"windows [{a0}, {b0}) and [{a1}, {b1}) overlap")
    return wins


def window_spike_counts(spikes: SpikeData, windows: Sequence[tuple[float, float]]) -> np.ndarray:
    """``counts[i, w]`` = spikes of neuron ``i`` in window ``w``.

    Windows are half-open ``[start, end)``; a window ending at the recording's
    duration also includes a spike stamped exactly at the end.
    """
    wins = _check_windows(windows)
    counts = np.zeros((spikes.n, len(wins)), dtype=np.int64)
    for w, (a, b) in enumerate(wins):
        side = "right" if b >= spikes.duration else "left"
        for i, t in enumerate(spikes.trains):
            counts[i, w] = np.searchsorted(t, b, side=side) - np.searchsorted(t, a, side="left")
    return counts


@dataclass(frozen=True, eq=False)
class BipolarStateTable:
    windows: tuple
    states: np.ndarray
    counts: np.ndarray
    f_0: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["neuron", "window_index", "count", "state"])
        for i in range(self.counts.shape[0]):
            for k in range(self.counts.shape[1]):
                w.writerow([i, k, int(self.counts[i, k]), int(self.states[i, k])])
        return buf.getvalue()


def bipolar_decode(counts, f_0: float, windows: Sequence[tuple[float, float]] = ()) -> BipolarStateTable:
    """+1 where the window count reaches ``f_0``, -1 elsewhere."""
    if not f_0 > 0:
        raise ParameterError(f"f_0 must be > 0, got {f_0}")
    counts = np.asarray(counts)
    states = np.where(counts >= f_0, 1, -1).astype(np.int8)
    return BipolarStateTable(tuple(windows), states, counts, float(f_0))


def epoch_windows(schedule: DriveSchedule, labels: Sequence[int]) -> list[tuple[float, float]]:
    """One window per run of consecutive pulses targeting the same community.

    A window runs from the first pulse onset to one full period after the
    last onset, so community-ordered driving of 32-neuron blocks with
    1000 ms periods starting at 1 s gives ``[1000, 33000)``, ``[33000, 65000)``...
    """
    wins: list[tuple[float, float]] = []
    current = None
    for p in schedule.pulses:
        c = labels[p.target]
        end = p.t2 + schedule.gap
        if current is not None and c == current:
            wins[-1] = (wins[-1][0], end)
        else:
            wins.append((p.t1, end))
            current = c
    return wins


def _as_values(matrix) -> np.ndarray:
    return matrix.values if isinstance(matrix, ComparisonMatrix) else np.asarray(matrix, dtype=float)


def mean_similarity(matrix, labels: Sequence[int], source: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-community mean and std of ``matrix[i, source]`` over members ``i != source``.

    Communities with no eligible member yield ``nan``.
    """
    values = _as_values(matrix)
    labels = np.asarray(labels)
    k = int(labels.max()) + 1
    col = values[:, source]
    means = np.full(k, np.nan)
    stds = np.full(k, np.nan)
    others = np.arange(labels.size) != source
    for c in range(k):
        sel = col[(labels == c) & others]
        if sel.size:
            means[c], stds[c] = _mean_std(sel)
    return means, stds


def _mean_std(x: np.ndarray) -> tuple[float, float]:
    # correctly rounded sums keep results independent of summation order
    mu = math.fsum(x) / x.size
    return mu, math.sqrt(math.fsum((x - mu) ** 2) / x.size)


def source_margin(means: np.ndarray, own: int) -> float:
    """Same-community mean minus the best cross-community mean."""
    cross = np.delete(means, own)
    cross = cross[~np.isnan(cross)]
    if cross.size == 0:
        return math.inf
    return float(means[own] - cross.max())


@dataclass(frozen=True, eq=False)
class SeparabilitySweep:
    """``means[b, n, m]``: pooled similarity of sources in community ``n`` to targets in ``m``."""

    bin_widths: tuple
    sources: tuple
    means: np.ndarray
    stds: np.ndarray
    source_margins: np.ndarray

    @property
    def margins(self) -> np.ndarray:
        """Worst source margin for each bin width."""
        return self.source_margins.min(axis=1)

    def community_margins(self, labels) -> np.ndarray:
        """``[b, n]``: worst margin over the sources lying in community ``n``."""
        labels = np.asarray(labels)
        src_comm = labels[list(self.sources)]
        out = np.full((len(self.bin_widths), self.means.shape[1]), np.nan)
        for c in np.unique(src_comm):
            out[:, c] = self.source_margins[:, src_comm == c].min(axis=1)
        return out

    def standardized_margins(self) -> np.ndarray:
        """``[b, n]``: pooled margin of community ``n`` in units of the combined spread.

        Divides the same-community minus best cross-community mean by the
        root-sum-square of the two standard deviations.
        """
        out = np.full(self.means.shape[:2], np.nan)
        for b in range(self.means.shape[0]):
            for n in range(self.means.shape[1]):
                row = self.means[b, n]
                if np.isnan(row[n]):
                    continue
                cross = np.where(np.arange(row.size) == n, -np.inf, np.nan_to_num(row, nan=-np.inf))
                m = int(np.argmax(cross))
                spread = math.hypot(self.stds[b, n, n], self.stds[b, n, m])
                out[b, n] = (row[n] - row[m]) / spread if spread > 0 else math.inf
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_width_ms", "source_community", "target_community", "mean", "std"])
        for b, bw in enumerate(self.bin_widths):
            for n in range(self.means.shape[1]):
                for m in range(self.means.shape[2]):
                    if not np.isnan(self.means[b, n, m]):
                        w.writerow([repr(float(bw)), n, m, repr(float(self.means[b, n, m])), repr(float(self.stds[b, n, m]))])
        return buf.getvalue()


def separability_sweep(
    spikes: SpikeData,
    labels: Sequence[int],
    bin_widths: Sequence[float],
    sources: Sequence[int] | None = None,
    t_origin: float = 0.0,
    active_isi: float | None = None,
    pulse_width: float | None = None,
) -> SeparabilitySweep:
    """Rebuild the plain comparison matrix at each bin width and summarise it.

    ``sources`` defaults to the lowest-id member of every community. With
    randomly ordered driving, bin widths outside ``(active_isi, pulse_width)``
    blur neighbouring drives together or split single responses; a warning
    is issued when those bounds are supplied and violated.
    """
    labels = np.asarray(labels)
    k = int(labels.max()) + 1
    if sources is None:
        sources = [int(np.flatnonzero(labels == c)[0]) for c in range(k)]
    sources = tuple(int(s) for s in sources)
    for bw in bin_widths:
        if (active_isi is not None and bw <= active_isi) or (pulse_width is not None and bw >= pulse_width):
            warnings.warn(f"bin width {bw} ms outside the recommended (active ISI, pulse width) range", RuntimeWarning, stacklevel=2)

    means = np.full((len(bin_widths), k, k), np.nan)
    stds = np.full_like(means, np.nan)
    margins = np.zeros((len(bin_widths), len(sources)))
    idx = np.arange(labels.size)
    for b, bw in enumerate(bin_widths):
        values = comparison_matrix(binarize(spikes, bw, t_origin), "plain").values
        for s_i, s in enumerate(sources):
            m_s, _ = mean_similarity(values, labels, s)
            margins[b, s_i] = source_margin(m_s, int(labels[s]))
        for n in range(k):
            src = [s for s in sources if labels[s] == n]
            if not src:
                continue
            for m in range(k):
                pooled = np.concatenate([values[(labels == m) & (idx != s), s] for s in src])
                if pooled.size:
                    means[b, n, m], stds[b, n, m] = _mean_std(pooled)
    return SeparabilitySweep(tuple(float(b) for b in bin_widths), sources, means, stds, margins)


def reconstruct_from_seeds(matrix, seeds: Sequence[int], theta: float = 0.0) -> np.ndarray:
    """Assign each neuron to its most similar seed, or -1 below ``theta``.

    Labels are seed indices. Ties go to the lowest seed index; every seed
    keeps its own label.
    """
    seeds = [int(s) for s in seeds]
    if len(set(seeds)) != len(seeds):
        raise ParameterError("seeds must be distinct")
    values = _as_values(matrix)
    sims = values[:, seeds]
    best = np.argmax(sims, axis=1)
    best_val = sims[np.arange(values.shape[0]), best]
    pred = np.where(best_val >= theta, best, -1)
    pred[seeds] = np.arange(len(seeds))
    return pred


def pairwise_precision_recall(pred, truth, mask=None) -> tuple[float, float]:
    """Pair-counting precision and recall of a labelling.

    A pair counts as predicted-together only if both members are assigned
    (label >= 0) and share a label. ``mask`` restricts scoring to a vertex
    subset. Returns ``nan`` for an empty denominator.
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    keep = np.ones(pred.size, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    p, t = pred[keep], truth[keep]
    iu, ju = np.triu_indices(p.size, k=1)
    same_pred = (p[iu] == p[ju]) & (p[iu] >= 0)
    same_true = t[iu] == t[ju]
    tp = np.count_nonzero(same_pred & same_true)
    n_pred, n_true = np.count_nonzero(same_pred), np.count_nonzero(same_true)
    precision = tp / n_pred if n_pred else math.nan
    recall = tp / n_true if n_true else math.nan
    return precision, recall
