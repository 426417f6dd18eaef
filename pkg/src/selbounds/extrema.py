"""Extremal-entropy distributions under head/tail mass constraints.

Given a shape ``(n, m, pi)`` the feasible set is every sorted distribution
whose first ``m`` entries sum to ``1 - pi`` and last ``n - m`` sum to
``pi``.  Over that polytope:

- The entropy *maximum* is attained by flattening each segment to its mean
  (head entries ``(1-pi)/m``, tail entries ``pi/(n-m)``).
- The entropy *minimum* is attained by concentrating mass.  Fixing the
  repeated probability ``p_hat`` shared by the last ``m - 1`` head entries
  and the leading tail entries pins down the whole distribution:

      head =  [(1-pi) - (m-1)*p_hat,  p_hat * (m-1)]
      tail =  [p_hat * floor(pi/p_hat),  pi mod p_hat,  0...]

  The resulting entropy curve ``H(p_hat)`` over
  ``[pi/(n-m), (1-pi)/m]`` is piecewise concave, so its minimum sits at a
  junction between concave pieces or at the right endpoint.  Those finitely
  many ``p_hat`` values form the candidate set, and the minimization is an
  exact discrete search.

The number of interior junctions is
``ceil((n - m - n*pi)/(1 - pi))`` clamped to ``[0, n - m]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOLERANCE,
    ZERO_FLOOR,
    SortedDistribution,
    SystemShape,
    entropy,
    entropy_bits,
)
from .errors import BadConfigError, BadMError, BadPHatError, InfeasibleError

#: Remainders within this of 0 (or of a full p_hat slot) are snapped, so
#: float drift in pi/p_hat never creates a spurious extra tail slot.
REMAINDER_SNAP = 1e-12


def max_entropy_distribution(shape: SystemShape) -> SortedDistribution:
    """Flat-head/flat-tail distribution attaining the entropy maximum."""
    n, m = shape.n, shape.m
    if m == n:
        return SortedDistribution(np.full(n, 1.0 / n))
    head = np.full(m, shape.head_mean)
    tail = np.full(n - m, shape.tail_mean)
    return SortedDistribution(np.concatenate([head, tail]))


def max_entropy_value(n: int, m: int, pi: float) -> float:
    """Closed form for the maximum entropy at shape (n, m, pi)."""
    value = (1.0 - pi) * math.log2(m / (1.0 - pi))
    if pi > ZERO_FLOOR:
        value += pi * math.log2((n - m) / pi)
    return max(value, 0.0)


def max_entropy(shape: SystemShape) -> float:
    """Maximum entropy in bits over the feasible polytope.

    Equals ``entropy(max_entropy_distribution(shape))``, evaluated in
    closed form: ``(1-pi)*log2(m/(1-pi)) + pi*log2((n-m)/pi)``.
    """
    return max_entropy_value(shape.n, shape.m, shape.pi)


def min_entropy_m1(n: int, pi: float) -> SortedDistribution:
    """Minimum-entropy distribution for a single selected slot (m = 1).

    The optimum is a staircase: as many full copies of ``1 - pi`` as fit,
    one remainder entry, then zeros.
    """
    shape = SystemShape(n, 1, pi)  # validates and snaps pi
    pi = shape.pi
    if pi < REMAINDER_SNAP:
        probs = np.zeros(n)
        probs[0] = 1.0
        return SortedDistribution(probs)
    step = 1.0 - pi
    copies = min(int(1.0 / step + REMAINDER_SNAP), n)
    remainder = 1.0 - copies * step
    if remainder < REMAINDER_SNAP:
        remainder = 0.0
    probs = np.zeros(n)
    probs[:copies] = step
    if remainder > 0.0:
        probs[copies] = remainder
    return SortedDistribution(probs)


def _index_bound(n: int, m: int, pi: float) -> int:
    """Number of interior junction candidates for shape (n, m, pi)."""
    if 1.0 - pi <= 0.0:
        return 0
    y = math.ceil((n - m - n * pi) / (1.0 - pi) - REMAINDER_SNAP)
    return max(0, min(y, n - m))


def candidate_set(shape: SystemShape, tol: float = DEFAULT_TOLERANCE) -> np.ndarray:
    """Discrete p_hat values among which the entropy minimum must lie.

    Emits ``pi/(n-m-j+1)`` for ``j = 1..y`` plus the right endpoint
    ``(1-pi)/m``, deduplicated within ``tol``; values are ascending and lie
    inside ``[pi/(n-m), (1-pi)/m]``.
    """
    n, m, pi = shape.n, shape.m, shape.pi
    if m < 2:
        raise BadMError("candidate_set requires m >= 2; m = 1 uses the staircase")
    if pi <= ZERO_FLOOR:
        raise InfeasibleError("candidate_set requires pi > 0 (pi = 0 is degenerate)")
    y = _index_bound(n, m, pi)
    lo = pi / (n - m)
    hi = (1.0 - pi) / m
    raw = [pi / (n - m - j + 1) for j in range(1, y + 1)]
    raw.append(hi)
    merged: list[float] = []
    for value in raw:  # already ascending: denominators shrink
        value = min(max(value, lo), hi)
        if not merged or value > merged[-1] + tol:
            merged.append(value)
    return np.asarray(merged)


def _tail_split(pi: float, p_hat: float) -> tuple[int, float]:
    """Split tail mass pi into full p_hat slots plus a snapped remainder."""
    if pi < REMAINDER_SNAP:
        return 0, 0.0
    copies = int(pi / p_hat)
    remainder = pi - copies * p_hat
    if remainder < REMAINDER_SNAP:
        remainder = 0.0
    elif remainder > p_hat - REMAINDER_SNAP:
        copies += 1
        remainder = 0.0
    return copies, remainder


def assemble_min_candidate(
    shape: SystemShape, p_hat: float, tol: float = DEFAULT_TOLERANCE
) -> SortedDistribution:
    """Candidate minimum-entropy distribution for a given p_hat.

    Head: one balancing entry ``(1-pi) - (m-1)*p_hat`` followed by
    ``m - 1`` copies of ``p_hat``.  Tail: full ``p_hat`` slots, the
    remainder ``pi mod p_hat``, then zeros.
    """
    n, m, pi = shape.n, shape.m, shape.pi
    if m == n:
        raise BadMError("no tail segment exists when m == n")
    lo = pi / (n - m)
    hi = (1.0 - pi) / m
    if not lo - tol <= p_hat <= hi + tol:
        raise BadPHatError(
            f"p_hat={p_hat!r} outside [{lo!r}, {hi!r}] for shape "
            f"(n={n}, m={m}, pi={pi!r})"
        )
    p_hat = min(max(p_hat, lo), hi)
    probs = np.zeros(n)
    probs[0] = (1.0 - pi) - (m - 1) * p_hat
    probs[1:m] = p_hat
    if p_hat > ZERO_FLOOR:
        copies, remainder = _tail_split(pi, p_hat)
        probs[m : m + copies] = p_hat
        if remainder > 0.0:
            probs[m + copies] = remainder
    return SortedDistribution(probs)


@dataclass(frozen=True)
class CandidateEvaluation:
    """One candidate p_hat with its assembled distribution and entropy."""

    p_hat: float
    entropy_bits: float
    distribution: SortedDistribution


@dataclass(frozen=True)
class MinEntropyResult:
    """Outcome of the discrete minimum-entropy search."""

    shape: SystemShape
    index_bound: int
    candidates: tuple[CandidateEvaluation, ...]
    argmin_index: int
    min_entropy_bits: float

    @property
    def argmin_distribution(self) -> SortedDistribution:
        return self.candidates[self.argmin_index].distribution


def min_entropy(shape: SystemShape, tol: float = DEFAULT_TOLERANCE) -> MinEntropyResult:
    """Exact minimum entropy over the feasible polytope.

    ``pi = 0`` short-circuits to a point mass (entropy 0); ``m = 1`` uses
    the staircase; otherwise every candidate p_hat is assembled and the
    lowest-index argmin is returned.
    """
    n, m, pi = shape.n, shape.m, shape.pi
    y = _index_bound(n, m, pi)
    if pi < REMAINDER_SNAP:
        probs = np.zeros(n)
        probs[0] = 1.0
        dist = SortedDistribution(probs)
        cand = CandidateEvaluation(0.0, 0.0, dist)
        return MinEntropyResult(shape, y, (cand,), 0, 0.0)
    if m == 1:
        dist = min_entropy_m1(n, pi)
        bits = entropy(dist)
        cand = CandidateEvaluation(1.0 - pi, bits, dist)
        return MinEntropyResult(shape, y, (cand,), 0, bits)
    evaluations = []
    for p_hat in candidate_set(shape, tol):
        dist = assemble_min_candidate(shape, float(p_hat), tol)
        evaluations.append(CandidateEvaluation(float(p_hat), entropy(dist), dist))
    bits = np.asarray([c.entropy_bits for c in evaluations])
    argmin = int(np.argmin(bits))
    return MinEntropyResult(
        shape, y, tuple(evaluations), argmin, float(bits[argmin])
    )


def _fe(x: np.ndarray) -> np.ndarray:
    """Elementwise -x*log2(x) with 0*log2(0) = 0 and negatives clipped."""
    x = np.maximum(x, 0.0)
    safe = np.where(x > ZERO_FLOOR, x, 1.0)
    return np.where(x > ZERO_FLOOR, -x * np.log2(safe), 0.0)


def min_entropy_values(n: int, m: int, pis: np.ndarray) -> np.ndarray:
    """Vectorized minimum-entropy values for many tail masses at once.

    Closed-form evaluation of the candidate entropies (no distributions are
    materialized); agrees with :func:`min_entropy` within tolerance, which
    the test suite checks by assembling.  Used by grid scans that invert
    the minimum-entropy curve.
    """
    pis = np.clip(np.asarray(pis, dtype=float), 0.0, (n - m) / n)
    out = np.zeros(pis.shape)
    if m == n:
        return out
    active = pis >= REMAINDER_SNAP
    if not active.any():
        return out
    pa = pis[active]
    # Right endpoint: m head copies of the head mean plus the tail split.
    ph = (1.0 - pa) / m
    ratio = pa / ph
    copies = np.floor(ratio).astype(np.int64)
    rem = pa - copies * ph
    snap_up = rem > ph - REMAINDER_SNAP
    copies = copies + snap_up
    rem = np.where(snap_up | (rem < REMAINDER_SNAP), 0.0, rem)
    best = (m + copies) * _fe(ph) + _fe(rem)
    # Junction rows, chunked so the (pi x j) matrix stays bounded.
    js = np.arange(1, n - m + 1)
    slots = (n - m - js + 1).astype(float)
    block = max(1, (1 << 22) // max(len(js), 1))
    for start in range(0, pa.size, block):
        chunk = pa[start : start + block, None]
        ph_j = chunk / slots[None, :]
        head_rest = (1.0 - chunk) - (m - 1) * ph_j
        vals = (n - js)[None, :] * _fe(ph_j) + _fe(head_rest)
        hi = (1.0 - chunk) / m
        vals = np.where(ph_j <= hi + REMAINDER_SNAP, vals, np.inf)
        best[start : start + block] = np.minimum(
            best[start : start + block], vals.min(axis=1)
        )
    out[active] = np.maximum(best, 0.0)
    return out


def min_entropy_value(n: int, m: int, pi: float) -> float:
    """Scalar convenience wrapper over :func:`min_entropy_values`."""
    return float(min_entropy_values(n, m, np.asarray([pi]))[0])


@dataclass(frozen=True)
class CurveSample:
    """One point of the entropy-vs-p_hat curve."""

    p_hat: float
    entropy_bits: float
    segment_index: int
    is_junction: bool


def piecewise_curve(
    shape: SystemShape, samples: int, tol: float = DEFAULT_TOLERANCE
) -> list[CurveSample]:
    """Sample the piecewise-concave curve H(p_hat) over its full interval.

    Emits ``samples`` uniform points merged with the candidate junctions
    (flagged ``is_junction``); each point is assembled and its entropy
    evaluated, so branch bookkeeping can never disagree with the
    construction.  ``segment_index`` counts how many full tail slots have
    been given up relative to the uniform-tail left endpoint.
    """
    n, m, pi = shape.n, shape.m, shape.pi
    if m < 2:
        raise BadMError("piecewise_curve requires m >= 2")
    if pi <= ZERO_FLOOR:
        raise InfeasibleError("piecewise_curve requires pi > 0")
    if samples < 2:
        raise BadConfigError(f"samples must be >= 2, got {samples}")
    junctions = candidate_set(shape, tol)
    lo = pi / (n - m)
    hi = (1.0 - pi) / m
    grid = np.linspace(lo, hi, samples)
    keep = np.abs(grid[:, None] - junctions[None, :]).min(axis=1) > 1e-12
    points = np.concatenate([junctions, grid[keep]])
    flags = np.concatenate(
        [np.ones(junctions.size, bool), np.zeros(int(keep.sum()), bool)]
    )
    order = np.argsort(points, kind="stable")
    out = []
    for p_hat, flag in zip(points[order], flags[order]):
        p_hat = float(min(max(p_hat, lo), hi))
        dist = assemble_min_candidate(shape, p_hat, tol)
        copies, _ = _tail_split(pi, p_hat)
        out.append(
            CurveSample(p_hat, entropy_bits(dist.probs), (n - m) - copies, bool(flag))
        )
    return out
