"""Independent oracles shared by the test suite.

Everything here deliberately avoids the library's code paths: entropies
are evaluated in 50-digit arithmetic, chains are plain Python loops, and
the feasible-polytope sampler is a separate numpy implementation.
"""

from __future__ import annotations

import math

import numpy as np
from mpmath import mp, mpf, log

mp.dps = 50


def mp_log2(x):
    return log(x) / log(2)


def mp_entropy(values) -> float:
    """High-precision base-2 entropy, returned as a float."""
    total = mpf(0)
    for v in values:
        v = mpf(repr(float(v)))
        if v > 0:
            total -= v * mp_log2(v)
    return float(total)


def mp_max_entropy(n, m, pi) -> float:
    """High-precision closed form for the maximum entropy."""
    pi = mpf(repr(float(pi)))
    total = (1 - pi) * mp_log2(mpf(m) / (1 - pi))
    if pi > 0:
        total += pi * mp_log2(mpf(n - m) / pi)
    return float(total)


def chain_probability(probs, order) -> float:
    """Without-replacement chain product, plain Python floats."""
    remaining = 1.0
    out = 1.0
    for idx in order:
        out *= probs[idx] / remaining
        remaining -= probs[idx]
    return out


def feasible_batch(
    n: int, m: int, pi: float, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Batch of sorted distributions with head mass 1-pi and tail mass pi.

    Independent reimplementation of the blend-to-flat construction: head
    and tail segments are sorted Dirichlet draws scaled to their masses;
    junction violations are repaired by blending toward the flat point,
    which preserves segment sums and sortedness.
    """
    head = np.sort(rng.dirichlet(np.ones(m), size=count), axis=1)[:, ::-1] * (1.0 - pi)
    if m == n:
        return head
    if pi <= 0.0:
        tail = np.zeros((count, n - m))
    else:
        tail = np.sort(rng.dirichlet(np.ones(n - m), size=count), axis=1)[:, ::-1] * pi
    flat_head = (1.0 - pi) / m
    flat_tail = pi / (n - m)
    overlap = tail[:, 0] - head[:, -1]
    gap = flat_head - flat_tail
    denom = gap + np.maximum(overlap, 0.0)
    lam = np.where(overlap > 0.0, np.where(denom > 0.0, gap / np.maximum(denom, 1e-300), 0.0), 1.0)
    head = lam[:, None] * head + (1.0 - lam[:, None]) * flat_head
    tail = lam[:, None] * tail + (1.0 - lam[:, None]) * flat_tail
    return np.concatenate([head, tail], axis=1)


def batch_entropy(rows: np.ndarray) -> np.ndarray:
    """Row-wise entropy with plain numpy (independent of the library)."""
    safe = np.where(rows > 1e-300, rows, 1.0)
    return -(np.where(rows > 1e-300, rows * np.log2(safe), 0.0)).sum(axis=1)


def branch_head_entropy(p_hat: float, m: int, pi: float) -> float:
    """Literal head closed form: (m-1) repeats plus the balancing entry."""
    rest = (1.0 - pi) - (m - 1) * p_hat
    out = 0.0
    if p_hat > 0:
        out += -(m - 1) * p_hat * math.log2(p_hat)
    if rest > 1e-15:
        out += -rest * math.log2(rest)
    return out


def branch_tail_entropy(p_hat: float, n: int, m: int, pi: float) -> float:
    """Literal branch table for the tail entropy.

    Branch c (c full slots of p_hat) applies on (pi/(c+1), pi/c]; the left
    endpoint pi/(n-m) is the uniform-tail branch.
    """
    slots = n - m
    if abs(p_hat - pi / slots) < 1e-11:
        return -slots * p_hat * math.log2(p_hat)
    for c in range(slots - 1, 0, -1):
        if pi / (c + 1) < p_hat <= pi / c + 1e-15:
            rest = pi - c * p_hat
            out = -c * p_hat * math.log2(p_hat)
            if rest > 1e-11:
                out += -rest * math.log2(rest)
            return out
    return -pi * math.log2(pi) if pi > 0 else 0.0  # p_hat > pi: single remainder
