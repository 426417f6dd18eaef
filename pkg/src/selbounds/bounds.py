"""Bounds on error/merit probability of the optimal selection given entropy.

Two families of bounds are provided for a system with ``n`` objects,
``m`` selected and entropy ``h`` bits:

*Analytic closed forms.*  The lower bound inverts a relaxation of the
maximum-entropy curve and is only informative when ``m < n/2`` (for
``m >= n/2`` it degenerates to 0).  The upper bound composes the
junction-indexed relaxations of the minimum-entropy curve with the
``1 - h/log2(m)`` entry and takes their maximum.  Both are clamped into
the feasible interval ``[0, (n-m)/n]``; the unclamped values are kept for
transparency.

*Tight numeric bounds.*  The exact extremal curves are inverted
numerically: the lower bound bisects the strictly increasing maximum
entropy ``H_max(pi)``; the upper bound scans a grid of the exact discrete
minimum ``H_min(pi)`` and refines the crossing by bisection.  The upper
inversion is heuristic-tight: monotonicity of ``H_min`` is unproven, and
the grid scan is what covers a hypothetical non-monotone stretch.

Merit-probability bounds are exact complements of the opposite error
bounds, clamped into ``[m/n, 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOLERANCE,
    SortedDistribution,
    SystemShape,
    validate_counts,
    entropy,
    tail_probability,
)
from .errors import BadEntropyError, BadKError
from .transform import transform_repeated, transform_unique
from .extrema import (
    _index_bound,
    max_entropy_value,
    min_entropy_value,
    min_entropy_values,
)

_INVERSION_EPS = 1e-12


def _check_entropy(n: int, h: float, tol: float) -> float:
    h = float(h)
    if not math.isfinite(h):
        raise BadEntropyError(f"entropy must be finite, got {h!r}")
    top = math.log2(n)
    if h < -tol or h > top + tol:
        raise BadEntropyError(
            f"entropy {h!r} outside [0, log2({n})={top!r}] (tolerance {tol})"
        )
    return min(max(h, 0.0), top)


def entropy_lower_bound(shape: SystemShape, tol: float = DEFAULT_TOLERANCE) -> float:
    """Closed-form floor under the exact minimum entropy.

    Minimum over ``(n-j)*pi/(n-m-j+1) * log2(n*(n-m-j+1)/(n-m))`` for
    ``j = 1..y`` plus ``(n-y)*(1-pi)/m * log2(m)`` (the latter only when
    ``m >= 2``, since ``log2(1) = 0`` makes it vacuous).  Degenerates to 0
    when ``pi = 0``.
    """
    n, m, pi = shape.n, shape.m, shape.pi
    if pi <= tol:
        return 0.0
    y = _index_bound(n, m, pi)
    entries = []
    if y >= 1:
        js = np.arange(1, y + 1)
        slots = n - m - js + 1
        vals = ((n - js) * pi / slots) * np.log2(n * slots / (n - m))
        entries.extend(vals.tolist())
    if m >= 2:
        entries.append(((n - y) * (1.0 - pi) / m) * math.log2(m))
    if not entries:
        return 0.0
    return max(min(entries), 0.0)


def pi_lower_bound(
    n: int, m: int, h: float, tol: float = DEFAULT_TOLERANCE
) -> float:
    """Analytic lower bound on the tail mass at entropy h (clamped)."""
    validate_counts(n, m)
    h = _check_entropy(n, h, tol)
    raw = _pi_lower_raw(n, m, h)
    return min(max(raw, 0.0), (n - m) / n)


def _pi_lower_raw(n: int, m: int, h: float) -> float:
    if 2 * m >= n:
        return 0.0
    return (h - 1.0 - math.log2(m)) / math.log2(n / m - 1.0)


def pi_upper_bound(
    n: int, m: int, h: float, tol: float = DEFAULT_TOLERANCE
) -> float:
    """Analytic upper bound on the tail mass at entropy h (clamped).

    The junction entries run over every ``j = 1..n-m`` (a superset of the
    shape-dependent junction count, which depends on the unknown tail mass;
    maximizing over the superset is still valid).
    """
    validate_counts(n, m)
    h = _check_entropy(n, h, tol)
    raw = _pi_upper_raw(n, m, h)
    return min(max(raw, pi_lower_bound(n, m, h, tol)), (n - m) / n)


def _pi_upper_raw(n: int, m: int, h: float) -> float:
    entries = []
    if m < n:
        js = np.arange(1, n - m + 1)
        slots = (n - m - js + 1).astype(float)
        vals = h * slots / ((n - js) * np.log2(n * slots / (n - m)))
        entries.append(float(vals.max()))
    if m >= 2:
        entries.append(1.0 - h / math.log2(m))
    if not entries:
        return 0.0
    return max(entries)


def flawed_pi_lower_bound(n: int, m: int, h: float) -> float:
    """Uncorrected lower-bound formula, for comparison reporting only.

    Applies ``(h - 1 - log2(m)) / log2(n/m - 1)`` unconditionally; for
    ``m >= n/2`` the denominator is non-positive and the value is
    meaningless (NaN when the denominator vanishes).  Never used in any
    validity claim.
    """
    validate_counts(n, m)
    ratio = n / m - 1.0
    if ratio <= 0.0:
        return math.nan
    den = math.log2(ratio)
    if den == 0.0:
        return math.nan
    return (float(h) - 1.0 - math.log2(m)) / den


class TightInverter:
    """Numeric inversion of the exact extremal-entropy curves for (n, m).

    Caches a grid of the discrete minimum entropy so repeated queries at
    the same shape (as in sweeps) stay cheap.
    """

    def __init__(self, n: int, m: int, grid: int = 4096):
        validate_counts(n, m)
        if grid < 2:
            grid = 2
        self.n = int(n)
        self.m = int(m)
        self.grid = int(grid)
        self.pi_top = (n - m) / n
        self._grid_pis = np.linspace(0.0, self.pi_top, self.grid)
        self._grid_hmin = min_entropy_values(self.n, self.m, self._grid_pis)

    def lower(self, h: float) -> float:
        """Least tail mass whose maximum entropy reaches h."""
        n, m = self.n, self.m
        if m == n or h <= math.log2(m) + _INVERSION_EPS:
            return 0.0
        if h >= math.log2(n) - _INVERSION_EPS:
            return self.pi_top
        lo, hi = 0.0, self.pi_top
        while hi - lo > _INVERSION_EPS:
            mid = 0.5 * (lo + hi)
            if max_entropy_value(n, m, mid) < h:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def upper(self, h: float) -> float:
        """Greatest tail mass whose minimum entropy stays at or below h."""
        n, m = self.n, self.m
        if m == n:
            return 0.0
        if h <= _INVERSION_EPS:  # any positive tail forces positive entropy
            return 0.0
        ok = self._grid_hmin <= h + _INVERSION_EPS
        idx = int(np.nonzero(ok)[0][-1])  # index 0 always qualifies (H_min(0)=0)
        if idx == self.grid - 1:
            return self.pi_top
        lo, hi = float(self._grid_pis[idx]), float(self._grid_pis[idx + 1])
        while hi - lo > _INVERSION_EPS:
            mid = 0.5 * (lo + hi)
            if min_entropy_value(n, m, mid) <= h + _INVERSION_EPS:
                lo = mid
            else:
                hi = mid
        return lo


def pi_bounds_tight(
    n: int,
    m: int,
    h: float,
    grid: int = 4096,
    tol: float = DEFAULT_TOLERANCE,
    inverter: TightInverter | None = None,
) -> tuple[float, float]:
    """Tight numeric (lower, upper) bounds on the tail mass at entropy h."""
    validate_counts(n, m)
    h = _check_entropy(n, h, tol)
    if inverter is None:
        inverter = TightInverter(n, m, grid)
    return inverter.lower(h), inverter.upper(h)


def merit_bounds_k1(
    n: int, m: int, h: float, tol: float = DEFAULT_TOLERANCE
) -> tuple[float, float]:
    """Merit-probability bounds: complements of the error bounds.

    The upper bound equals the closed form
    ``(log2(n-m) - h + 1) / log2(n/m - 1)`` whenever ``m < n/2``.
    """
    lb = 1.0 - pi_upper_bound(n, m, h, tol)
    ub = 1.0 - pi_lower_bound(n, m, h, tol)
    floor = m / n
    return min(max(lb, floor), 1.0), min(max(ub, floor), 1.0)


@dataclass(frozen=True)
class BoundReport:
    """Analytic and tight bounds for one (n, m, entropy) query.

    ``mode`` is ``direct`` for plain queries and ``unique``/``repeated``
    when the system was first transformed for a requirement ``k > 1``;
    ``n``/``m``/``entropy_bits`` then describe the transformed system.
    ``clamped`` records which analytic values were pulled back into the
    feasible interval; the raw values are preserved alongside.
    """

    n: int
    m: int
    k: int
    mode: str
    entropy_bits: float
    pi_lb_analytic: float
    pi_ub_analytic: float
    pi_lb_tight: float
    pi_ub_tight: float
    pi_lb_raw: float
    pi_ub_raw: float
    psi_lb: float
    psi_ub: float
    clamped: tuple[str, ...]
    flawed_lb: float | None = None
    pi_observed: float | None = None
    selection_mismatch: bool | None = None

    def to_dict(self) -> dict:
        pi: dict = {
            "lb_analytic": self.pi_lb_analytic,
            "ub_analytic": self.pi_ub_analytic,
            "lb_tight": self.pi_lb_tight,
            "ub_tight": self.pi_ub_tight,
            "lb_raw": self.pi_lb_raw,
            "ub_raw": self.pi_ub_raw,
        }
        if self.flawed_lb is not None:
            pi["lb_flawed"] = self.flawed_lb
        out = {
            "n": self.n,
            "m": self.m,
            "k": self.k,
            "mode": self.mode,
            "entropy_bits": self.entropy_bits,
            "pi": pi,
            "psi": {"lb": self.psi_lb, "ub": self.psi_ub},
            "clamped": list(self.clamped),
        }
        if self.pi_observed is not None:
            out["pi_observed"] = self.pi_observed
        if self.selection_mismatch is not None:
            out["selection_mismatch"] = self.selection_mismatch
        return out


def build_report(
    n: int,
    m: int,
    entropy_bits: float,
    k: int = 1,
    mode: str = "direct",
    include_flawed: bool = False,
    tight_grid: int = 4096,
    tol: float = DEFAULT_TOLERANCE,
    inverter: TightInverter | None = None,
    pi_observed: float | None = None,
    selection_mismatch: bool | None = None,
) -> BoundReport:
    """Assemble a full bound report for one (n, m, entropy) query."""
    validate_counts(n, m)
    h = _check_entropy(n, entropy_bits, tol)
    top = (n - m) / n
    lb_raw = _pi_lower_raw(n, m, h)
    ub_raw = _pi_upper_raw(n, m, h)
    clamped = []
    lb = lb_raw
    if lb < 0.0:
        lb = 0.0
        if lb_raw < 0.0:
            clamped.append("pi_lb_analytic_at_floor")
    if lb > top:
        lb = top
        clamped.append("pi_lb_analytic_at_ceiling")
    ub = ub_raw
    if ub > top:
        ub = top
        clamped.append("pi_ub_analytic_at_ceiling")
    if ub < lb:
        ub = lb
        clamped.append("pi_ub_analytic_at_floor")
    lb_tight, ub_tight = pi_bounds_tight(n, m, h, tight_grid, tol, inverter)
    psi_lb = min(max(1.0 - ub, m / n), 1.0)
    psi_ub = min(max(1.0 - lb, m / n), 1.0)
    return BoundReport(
        n=int(n),
        m=int(m),
        k=int(k),
        mode=mode,
        entropy_bits=h,
        pi_lb_analytic=lb,
        pi_ub_analytic=ub,
        pi_lb_tight=lb_tight,
        pi_ub_tight=ub_tight,
        pi_lb_raw=lb_raw,
        pi_ub_raw=ub_raw,
        psi_lb=psi_lb,
        psi_ub=psi_ub,
        clamped=tuple(clamped),
        flawed_lb=flawed_pi_lower_bound(n, m, h) if include_flawed else None,
        pi_observed=pi_observed,
        selection_mismatch=selection_mismatch,
    )


def bounds_for_k(
    dist: SortedDistribution,
    m: int,
    k: int,
    mode: str,
    include_flawed: bool = False,
    tight_grid: int = 4096,
    tol: float = DEFAULT_TOLERANCE,
    max_composites: int | None = None,
) -> BoundReport:
    """Bounds for a requirement of k performing objects among the m selected.

    Transforms the system into its k-combination (``unique``) or
    k-multiset (``repeated``) equivalent, measures the transformed entropy,
    and applies the direct bounds at the transformed size.  The report's
    ``pi_observed`` carries the transformed sorted tail mass (the optimal
    strategy's exact error probability in the transformed system).
    """
    if mode not in ("unique", "repeated"):
        raise BadKError(f"mode must be 'unique' or 'repeated', got {mode!r}")
    kwargs = {} if max_composites is None else {"max_composites": max_composites}
    if mode == "unique":
        ts = transform_unique(dist, m, k, **kwargs)
    else:
        ts = transform_repeated(dist, m, k, **kwargs)
    h_prime = entropy(ts.dist)
    return build_report(
        ts.n_prime,
        ts.m_prime,
        h_prime,
        k=k,
        mode=mode,
        include_flawed=include_flawed,
        tight_grid=tight_grid,
        tol=tol,
        pi_observed=tail_probability(ts.dist, ts.m_prime),
        selection_mismatch=ts.selection_mismatch,
    )
