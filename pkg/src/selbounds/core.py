"""Validated probability distributions, entropy, and feasibility geometry.

Conventions used throughout the package:

- A *selection system* has ``n`` objects, of which the ``m`` most probable
  are selected.  Distributions are stored sorted in non-increasing order,
  so the selected set is always the first ``m`` entries.
- ``pi`` denotes the total mass of the ``n - m`` unselected entries (the
  error probability of the optimal selection); ``1 - pi`` is the merit
  probability.
- All entropies are base-2 and ``0 * log2(0)`` counts as exactly ``0``.
- A sorted distribution with head mass ``1 - pi`` and tail mass ``pi``
  exists iff the head mean dominates the tail mean:
  ``(1 - pi)/m >= pi/(n - m)``, i.e. ``pi <= (n - m)/n``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    AllZeroError,
    BadMError,
    InfeasibleError,
    InvalidEntryError,
    TooLargeError,
)

#: Default tolerance for normalization / ordering / bound comparisons.
DEFAULT_TOLERANCE = 1e-9

#: Probabilities below this are treated as exact zeros when computing
#: entropy, so float dust never contributes -x*log2(x) noise.
ZERO_FLOOR = 1e-15

_DEFAULT_MAX_STATES = 10_000_000


def max_states() -> int:
    """Configured cap on the number of states (``SELBOUNDS_MAX_STATES``)."""
    return int(os.environ.get("SELBOUNDS_MAX_STATES", _DEFAULT_MAX_STATES))


def validate_counts(n: int, m: int) -> None:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise BadMError(f"n must be an integer, got {n!r}")
    if not isinstance(m, (int, np.integer)) or isinstance(m, bool):
        raise BadMError(f"m must be an integer, got {m!r}")
    if n < 1:
        raise BadMError(f"n must satisfy n >= 1, got {n}")
    if not 1 <= m <= n:
        raise BadMError(f"m must satisfy 1 <= m <= n={n}, got {m}")


def entropy_bits(probs: np.ndarray) -> float:
    """Base-2 entropy of a probability vector, assumed already valid."""
    p = np.asarray(probs, dtype=float)
    p = p[p > ZERO_FLOOR]
    if p.size == 0:
        return 0.0
    return float(max(-(p * np.log2(p)).sum(), 0.0))


def entropy_bits_rows(probs: np.ndarray) -> np.ndarray:
    """Row-wise base-2 entropy for a 2-D array of probability vectors."""
    p = np.asarray(probs, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > ZERO_FLOOR, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return np.maximum(terms.sum(axis=-1), 0.0)


@dataclass(frozen=True)
class SortedDistribution:
    """A probability vector sorted in non-increasing order.

    ``original_index[i]`` is the position the i-th sorted entry occupied in
    the caller's input, so the original ordering can always be recovered.
    Instances are immutable (arrays are made read-only) and safe to share
    across workers.
    """

    probs: np.ndarray
    original_index: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size < 1:
            raise InvalidEntryError("probs must be a non-empty 1-D vector")
        if probs.size > max_states():
            raise TooLargeError(
                f"{probs.size} states exceeds the configured cap {max_states()}"
            )
        if not np.isfinite(probs).all():
            raise InvalidEntryError("probs contains NaN or infinite entries")
        if (probs < -1e-12).any():
            raise InvalidEntryError("probs contains negative entries")
        probs = np.where(probs < 0.0, 0.0, probs)
        if abs(float(probs.sum()) - 1.0) > DEFAULT_TOLERANCE:
            raise InvalidEntryError(
                f"probs sums to {float(probs.sum())!r}, expected 1 within "
                f"{DEFAULT_TOLERANCE}"
            )
        if (np.diff(probs) > 1e-12).any():
            raise InvalidEntryError("probs must be sorted in non-increasing order")
        index = self.original_index
        if index is None:
            index = np.arange(probs.size)
        index = np.asarray(index)
        if index.shape != probs.shape:
            raise InvalidEntryError("original_index must match probs in length")
        index = index.astype(np.int64)
        probs.setflags(write=False)
        index.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "original_index", index)

    @property
    def n(self) -> int:
        return int(self.probs.size)

    def restore_input_order(self) -> np.ndarray:
        """Normalized probabilities back in the caller's original order."""
        out = np.empty_like(self.probs)
        out[self.original_index] = self.probs
        return out


def make_distribution(raw, tol: float = DEFAULT_TOLERANCE) -> SortedDistribution:
    """Normalize raw non-negative scores and sort them descending.

    The sort is stable, so equal scores keep their input order and the
    resulting permutation is deterministic.

    Raises:
        InvalidEntryError: any entry is negative, NaN or infinite.
        AllZeroError: no entry is strictly positive.
    """
    weights = np.asarray(raw, dtype=float)
    if weights.ndim != 1 or weights.size < 1:
        raise InvalidEntryError("raw weights must be a non-empty 1-D vector")
    if not np.isfinite(weights).all():
        raise InvalidEntryError("raw weights contain NaN or infinite entries")
    if (weights < 0).any():
        raise InvalidEntryError("raw weights contain negative entries")
    total = float(weights.sum())
    if total <= 0.0:
        raise AllZeroError("raw weights carry no positive mass")
    probs = weights / total
    order = np.argsort(-probs, kind="stable")
    return SortedDistribution(probs[order], order)


def entropy(dist: SortedDistribution) -> float:
    """Base-2 entropy in bits; zero entries contribute exactly zero."""
    return entropy_bits(dist.probs)


def tail_probability(dist: SortedDistribution, m: int) -> float:
    """Mass of the n - m smallest entries.

    This equals the error probability of the optimal strategy that selects
    the ``m`` most probable objects and requires one of them to perform.
    """
    validate_counts(dist.n, m)
    return float(dist.probs[m:].sum())


def feasible_pi_range(n: int, m: int) -> tuple[float, float]:
    """Interval of tail masses achievable by any sorted distribution.

    The head mean must dominate the tail mean, which caps the tail mass at
    ``(n - m)/n``; ``m == n`` forces it to zero.
    """
    validate_counts(n, m)
    return (0.0, (n - m) / n)


@dataclass(frozen=True)
class SystemShape:
    """The triple (n objects, m selected, tail mass pi), validated.

    Values within :data:`DEFAULT_TOLERANCE` of the feasible interval
    ``[0, (n-m)/n]`` are snapped onto it; anything further out raises
    :class:`InfeasibleError`.
    """

    n: int
    m: int
    pi: float

    def __post_init__(self) -> None:
        validate_counts(self.n, self.m)
        pi = float(self.pi)
        if not np.isfinite(pi):
            raise InfeasibleError(f"pi must be finite, got {pi!r}")
        top = (self.n - self.m) / self.n
        if pi < -DEFAULT_TOLERANCE or pi > top + DEFAULT_TOLERANCE:
            raise InfeasibleError(
                f"pi={pi!r} outside the feasible interval [0, {top!r}] "
                f"for n={self.n}, m={self.m}"
            )
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "pi", min(max(pi, 0.0), top))

    @property
    def pi_max(self) -> float:
        """Feasibility boundary (n - m)/n."""
        return (self.n - self.m) / self.n

    @property
    def head_mean(self) -> float:
        return (1.0 - self.pi) / self.m

    @property
    def tail_mean(self) -> float:
        return self.pi / (self.n - self.m) if self.m < self.n else 0.0


def parse_weights(text: str) -> np.ndarray:
    """Parse a weights document: JSON array, or one value per line.

    Line format ignores blank lines and ``#`` comments (full-line or
    trailing).
    """
    stripped = text.strip()
    if stripped.startswith("["):
        try:
            values = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise InvalidEntryError(f"invalid JSON weights array: {exc}") from exc
        if not isinstance(values, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
        ):
            raise InvalidEntryError("JSON weights must be an array of numbers")
        return np.asarray(values, dtype=float)
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        payload = line.split("#", 1)[0].strip()
        if not payload:
            continue
        try:
            values.append(float(payload))
        except ValueError as exc:
            raise InvalidEntryError(
                f"line {lineno}: cannot parse weight {payload!r}"
            ) from exc
    if not values:
        raise InvalidEntryError("weights document contains no values")
    return np.asarray(values, dtype=float)


def read_weights(path) -> np.ndarray:
    """Read raw weights from a file (see :func:`parse_weights`)."""
    return parse_weights(Path(path).read_text(encoding="utf-8"))
