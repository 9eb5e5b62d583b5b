"""Naive reference implementations used as independent oracles in tests."""

import math


def binarize(trains, duration, bin_width, t_origin=0.0):
    n_bins = max(1, math.ceil((duration - t_origin) / bin_width))
    rows = []
    for train in trains:
        row = []
        for k in range(n_bins):
            lo = t_origin + k * bin_width
            hi = t_origin + (k + 1) * bin_width
            last = k == n_bins - 1
            row.append(int(any(lo <= t < hi or (last and t >= hi) for t in train)))
        rows.append(row)
    return rows


def hamming_distance(x, y):
    return sum(1 for a, b in zip(x, y) if a != b)


def hamming_plain(x, y):
    if sum(x) == 0 or sum(y) == 0:
        return 0.0
    return 1.0 - hamming_distance(x, y) / len(x)


def hamming_weighted(x, y):
    return (len(x) - hamming_distance(x, y)) * sum(x) * sum(y) / len(x)


def comparison_matrix(rows, variant):
    f = hamming_plain if variant == "plain" else hamming_weighted
    return [[f(rows[i], rows[j]) for j in range(len(rows))] for i in range(len(rows))]


def window_counts(trains, duration, windows):
    out = []
    for train in trains:
        row = []
        for a, b in windows:
            closed = b >= duration
            row.append(sum(1 for t in train if a <= t and (t < b or (closed and t <= b))))
        out.append(row)
    return out


def mean_similarity(matrix, labels, source):
    k = max(labels) + 1
    means, stds = [], []
    for c in range(k):
        vals = [matrix[i][source] for i in range(len(labels)) if labels[i] == c and i != source]
        if not vals:
            means.append(math.nan)
            stds.append(math.nan)
            continue
        mu = math.fsum(vals) / len(vals)
        means.append(mu)
        stds.append(math.sqrt(math.fsum((v - mu) ** 2 for v in vals) / len(vals)))
    return means, stds


def intervals_overlap(intervals):
    for i in range(len(intervals)):
        for j in range(i + 1, len(intervals)):
            a0, a1 = intervals[i]
            b0, b1 = intervals[j]
            if a0 < b1 and b0 < a1:
                return True
    return False
