"""Otsu's between-class variance criterion on an integer histogram.

Scores are compared as exact rationals, so genuine ties are detected as
ties instead of being decided by rounding noise.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateHistogramError


def between_class_scores(hist):
    """Exact ``sigma_B^2`` (up to a constant) for every split of ``hist``.

    Split ``k`` puts bins ``[0, k)`` in the low class. Returns a list of
    ``(numerator, denominator)`` Python ints for k = 1 .. len(hist)-1.
    """
    hist = [int(c) for c in hist]
    idx_sum = [i * c for i, c in enumerate(hist)]
    n_tot, s_tot = sum(hist), sum(idx_sum)
    n0 = s0 = 0
    scores = []
    for k in range(1, len(hist)):
        n0 += hist[k - 1]
        s0 += idx_sum[k - 1]
        n1, s1 = n_tot - n0, s_tot - s0
        if n0 == 0 or n1 == 0:
            scores.append((0, 1))
        else:
            # w0 w1 (mu0 - mu1)^2 with the N^2 factor dropped
            scores.append(((n0 * s1 - n1 * s0) ** 2, n0 * n1))
    return scores


def otsu_split(hist) -> int:
    """Index ``k`` of the best split, low class = bins ``[0, k)``.

    When several splits share the maximum score, the first run of
    consecutive maximizers is taken and its middle element returned
    (lower middle for even runs). On a histogram with empty bins between
    two modes this lands halfway across the gap rather than hugging the
    lower mode.
    """
    hist = np.asarray(hist)
    if np.count_nonzero(hist) < 2:
        raise DegenerateHistogramError("histogram has fewer than two occupied levels")
    scores = between_class_scores(hist)
    best_num, best_den = scores[0]
    winners = [1]
    for k, (num, den) in enumerate(scores[1:], start=2):
        lhs, rhs = num * best_den, best_num * den
        if lhs > rhs:
            best_num, best_den = num, den
            winners = [k]
        elif lhs == rhs:
            winners.append(k)
    run_end = 1
    while run_end < len(winners) and winners[run_end] == winners[run_end - 1] + 1:
        run_end += 1
    return winners[(run_end - 1) // 2]
