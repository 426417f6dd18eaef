"""Independent validators and the Monte Carlo bound-verification harness.

The sweep harness samples random distributions per shape, evaluates the
analytic and tight bounds at the observed entropy, and flags any record
whose observed tail mass escapes the analytic interval.  Violations are
data, never aborts.  The randomized polytope search and the exhaustive
transform enumeration give independent pressure on the closed-form
machinery they double-check.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bounds import TightInverter, pi_lower_bound, pi_upper_bound
from .core import (
    DEFAULT_TOLERANCE,
    ZERO_FLOOR,
    SortedDistribution,
    SystemShape,
    entropy,
    entropy_bits,
    make_distribution,
    tail_probability,
)
from .errors import BadConfigError, NumericFailureError, TooLargeError
from .rng import derive_rng
from .transform import transform_repeated, transform_unique

#: The eight (n, m) verification configurations used for the published
#: scatter experiments; 100 scenarios each reproduces that methodology.
REFERENCE_SWEEP_SHAPES: tuple[tuple[int, int], ...] = (
    (20, 6),
    (30, 20),
    (50, 15),
    (100, 60),
    (200, 40),
    (500, 300),
    (1000, 400),
    (1500, 1000),
)

_SAMPLER_KINDS = ("dirichlet_symmetric", "spiky")

#: CSV column order for sweep records (stable interface).
SWEEP_CSV_HEADER = (
    "scenario_id,n,m,entropy_bits,pi_observed,"
    "pi_lb_analytic,pi_ub_analytic,pi_lb_tight,pi_ub_tight,violation"
)


@dataclass(frozen=True)
class SamplerSpec:
    """Distribution family used to draw sweep scenarios."""

    kind: str = "dirichlet_symmetric"
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in _SAMPLER_KINDS:
            raise BadConfigError(
                f"sampler must be one of {_SAMPLER_KINDS}, got {self.kind!r}"
            )
        if not (self.alpha > 0.0 and math.isfinite(self.alpha)):
            raise BadConfigError(f"alpha must be positive, got {self.alpha!r}")
        if self.kind == "spiky" and self.alpha >= 1.0:
            raise BadConfigError("spiky sampler requires alpha < 1")


@dataclass(frozen=True)
class SweepConfig:
    shapes: tuple[tuple[int, int], ...]
    scenarios_per_shape: int = 100
    seed: int = 0
    sampler: SamplerSpec = field(default_factory=SamplerSpec)

    def __post_init__(self) -> None:
        if not self.shapes:
            raise BadConfigError("sweep needs at least one (n, m) shape")
        shapes = []
        for pair in self.shapes:
            n, m = int(pair[0]), int(pair[1])
            if not 1 <= m <= n:
                raise BadConfigError(f"shape ({n}, {m}) violates 1 <= m <= n")
            shapes.append((n, m))
        if self.scenarios_per_shape < 1:
            raise BadConfigError("scenarios_per_shape must be >= 1")
        object.__setattr__(self, "shapes", tuple(shapes))


@dataclass(frozen=True)
class SweepRecord:
    scenario_id: int
    n: int
    m: int
    entropy_bits: float
    pi_observed: float
    pi_lb_analytic: float
    pi_ub_analytic: float
    pi_lb_tight: float
    pi_ub_tight: float
    violation: bool


def reference_sweep_config(seed: int = 42, scenarios: int = 100) -> SweepConfig:
    """The built-in verification preset over the eight reference shapes."""
    return SweepConfig(REFERENCE_SWEEP_SHAPES, scenarios, seed, SamplerSpec())


def parse_sweep_config(text: str) -> SweepConfig:
    """Parse the flat key=value sweep format.

    Keys: ``shapes`` (required, e.g. ``20:6,30:20``), ``scenarios_per_shape``,
    ``seed``, ``sampler`` (``dirichlet_symmetric`` or ``spiky``), ``alpha``.
    Unknown keys are errors.
    """
    fields: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        payload = line.split("#", 1)[0].strip()
        if not payload:
            continue
        if "=" not in payload:
            raise BadConfigError(f"line {lineno}: expected key=value, got {payload!r}")
        key, value = (part.strip() for part in payload.split("=", 1))
        if key in fields:
            raise BadConfigError(f"line {lineno}: duplicate key {key!r}")
        fields[key] = value
    known = {"shapes", "scenarios_per_shape", "seed", "sampler", "alpha"}
    unknown = set(fields) - known
    if unknown:
        raise BadConfigError(f"unknown config keys: {sorted(unknown)}")
    if "shapes" not in fields:
        raise BadConfigError("missing required config key 'shapes'")
    shapes = []
    for token in fields["shapes"].split(","):
        token = token.strip()
        if not token:
            continue
        parts = token.split(":")
        if len(parts) != 2:
            raise BadConfigError(f"shape {token!r} must look like N:M")
        try:
            shapes.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise BadConfigError(f"shape {token!r} must be integers N:M") from exc
    kind = fields.get("sampler", "dirichlet_symmetric")
    alpha_default = 0.2 if kind == "spiky" else 1.0
    try:
        alpha = float(fields.get("alpha", alpha_default))
        scenarios = int(fields.get("scenarios_per_shape", 100))
        seed = int(fields.get("seed", 0))
    except ValueError as exc:
        raise BadConfigError(f"malformed numeric config value: {exc}") from exc
    return SweepConfig(tuple(shapes), scenarios, seed, SamplerSpec(kind, alpha))


def sample_distribution(
    n: int, sampler: SamplerSpec, rng: np.random.Generator
) -> SortedDistribution:
    """Draw n weights from the sampler family, normalize, sort descending."""
    for _ in range(64):
        weights = rng.standard_gamma(sampler.alpha, size=n)
        if float(weights.sum()) > 0.0:
            return make_distribution(weights)
    raise NumericFailureError("sampler kept producing all-zero weight vectors")


def sample_feasible(shape: SystemShape, rng: np.random.Generator) -> SortedDistribution:
    """Random distribution satisfying the shape's head/tail constraints.

    Head and tail are drawn independently and sorted; if the junction
    ordering fails, both are blended toward the flat (maximum entropy)
    point, which preserves segment sums and sortedness.
    """
    n, m, pi = shape.n, shape.m, shape.pi
    head = np.sort(rng.dirichlet(np.ones(m)))[::-1] * (1.0 - pi)
    if m == n:
        return SortedDistribution(head)
    if pi <= ZERO_FLOOR:
        tail = np.zeros(n - m)
    else:
        tail = np.sort(rng.dirichlet(np.ones(n - m)))[::-1] * pi
    if tail.size and head[-1] < tail[0]:
        flat_gap = shape.head_mean - shape.tail_mean
        overlap = tail[0] - head[-1]
        lam = flat_gap / (flat_gap + overlap) if flat_gap + overlap > 0 else 0.0
        head = lam * head + (1.0 - lam) * shape.head_mean
        tail = lam * tail + (1.0 - lam) * shape.tail_mean
    return SortedDistribution(np.concatenate([head, tail]))


def _nan_record(scenario_id: int, n: int, m: int) -> SweepRecord:
    nan = float("nan")
    return SweepRecord(scenario_id, n, m, nan, nan, nan, nan, nan, nan, True)


def _sweep_shape(
    config: SweepConfig, shape_index: int, tol: float
) -> list[SweepRecord]:
    n, m = config.shapes[shape_index]
    inverter = TightInverter(n, m)
    top = math.log2(n)
    out = []
    for scenario_id in range(config.scenarios_per_shape):
        rng = derive_rng(config.seed, shape_index, scenario_id)
        try:
            dist = sample_distribution(n, config.sampler, rng)
            h = entropy(dist)
            pi_obs = tail_probability(dist, m)
            h_c = min(max(h, 0.0), top)
            lb = pi_lower_bound(n, m, h_c, tol)
            ub = pi_upper_bound(n, m, h_c, tol)
            lt = inverter.lower(h_c)
            ut = inverter.upper(h_c)
            violation = not (lb - tol <= pi_obs <= ub + tol)
            out.append(
                SweepRecord(scenario_id, n, m, h, pi_obs, lb, ub, lt, ut, violation)
            )
        except Exception:  # failures are data; the sweep never aborts
            out.append(_nan_record(scenario_id, n, m))
    return out


def run_sweep(
    config: SweepConfig, threads: int = 1, tol: float = DEFAULT_TOLERANCE
) -> tuple[list[SweepRecord], dict]:
    """Execute the sweep; returns (records sorted by shape/scenario, summary)."""
    indices = range(len(config.shapes))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda i: _sweep_shape(config, i, tol), indices))
    else:
        chunks = [_sweep_shape(config, i, tol) for i in indices]
    records = [rec for chunk in chunks for rec in chunk]
    return records, summarize(records)


def _gap_block(gaps_by_regime: dict[str, list[float]]) -> dict:
    block = {}
    for regime in ("m_lt_half", "m_ge_half"):
        gaps = gaps_by_regime.get(regime, [])
        finite = [g for g in gaps if math.isfinite(g)]
        block[regime] = {
            "records": len(gaps),
            "mean": float(np.mean(finite)) if finite else None,
            "median": float(np.median(finite)) if finite else None,
        }
    return block


def summarize(records: list[SweepRecord]) -> dict:
    """Aggregate violation counts and bound-gap statistics.

    Gaps are reported separately for the wide-selection regime
    (``m >= n/2``, where the analytic bounds are tightest) and the narrow
    one, and per shape.
    """
    analytic: dict[str, list[float]] = {"m_lt_half": [], "m_ge_half": []}
    tight: dict[str, list[float]] = {"m_lt_half": [], "m_ge_half": []}
    per_shape: dict[tuple[int, int], dict[str, list[float]]] = {}
    violations = 0
    failures = 0
    for rec in records:
        regime = "m_ge_half" if 2 * rec.m >= rec.n else "m_lt_half"
        if rec.violation:
            violations += 1
        if not math.isfinite(rec.entropy_bits):
            failures += 1
            continue
        ga = rec.pi_ub_analytic - rec.pi_lb_analytic
        gt = rec.pi_ub_tight - rec.pi_lb_tight
        analytic[regime].append(ga)
        tight[regime].append(gt)
        bucket = per_shape.setdefault((rec.n, rec.m), {"analytic": [], "tight": []})
        bucket["analytic"].append(ga)
        bucket["tight"].append(gt)
    shapes_out = []
    for (n, m), bucket in sorted(per_shape.items()):
        shapes_out.append(
            {
                "n": n,
                "m": m,
                "regime": "m_ge_half" if 2 * m >= n else "m_lt_half",
                "mean_gap_analytic": float(np.mean(bucket["analytic"])),
                "median_gap_analytic": float(np.median(bucket["analytic"])),
                "mean_gap_tight": float(np.mean(bucket["tight"])),
                "median_gap_tight": float(np.median(bucket["tight"])),
            }
        )
    return {
        "total": len(records),
        "violations": violations,
        "failures": failures,
        "gap_stats": {
            "analytic": _gap_block(analytic),
            "tight": _gap_block(tight),
            "per_shape": shapes_out,
        },
    }


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".12g")


def records_to_csv(records: list[SweepRecord]) -> str:
    """Render sweep records as CSV (stable header, 12 significant digits)."""
    lines = [SWEEP_CSV_HEADER]
    for r in records:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    r.scenario_id,
                    r.n,
                    r.m,
                    r.entropy_bits,
                    r.pi_observed,
                    r.pi_lb_analytic,
                    r.pi_ub_analytic,
                    r.pi_lb_tight,
                    r.pi_ub_tight,
                    r.violation,
                )
            )
        )
    return "\n".join(lines) + "\n"


def _two_level_extreme_points(n: int, m: int, pi: float):
    """Yield the feasible profiles with at most two positive value levels.

    Entropy is strictly concave, so its minimum over the constraint
    polytope sits at an extreme point; extreme points leave at most two of
    the chain constraints (p_i >= p_{i+1}, p_n >= 0) slack, which forces a
    profile of v1 on a prefix, v2 on a middle block, zeros after.  Solving
    the two segment-sum equations per block split enumerates them all.
    """
    head_mass = 1.0 - pi
    for b in range(1, n + 1):
        for a in range(0, b + 1):
            h1 = min(a, m)
            h2 = max(0, min(b, m) - a)
            t1 = max(0, a - m)
            t2 = max(0, b - max(a, m))
            det = h1 * t2 - h2 * t1
            if abs(det) > 1e-12:
                v1 = (head_mass * t2 - h2 * pi) / det
                v2 = (h1 * pi - t1 * head_mass) / det
            elif t1 == 0 and t2 == 0:
                if pi > 1e-12 or h1 + h2 == 0:
                    continue
                if h2 == 0:
                    v1, v2 = head_mass / h1, 0.0
                elif h1 == 0:
                    v1, v2 = 0.0, head_mass / h2
                else:
                    continue  # underdetermined edge; endpoints covered elsewhere
            elif h1 == 0 and t1 == 0:
                v1 = 0.0
                v2 = head_mass / h2 if h2 else 0.0
                if abs(t2 * v2 - pi) > 1e-9:
                    continue
            else:
                continue  # parallel constraints: an edge, not a vertex
            if v1 < -1e-12 or v2 < -1e-12 or (a >= 1 and v1 < v2 - 1e-12):
                continue
            v1, v2 = max(v1, 0.0), max(v2, 0.0)
            if abs(h1 * v1 + h2 * v2 - head_mass) > 1e-9:
                continue
            if abs(t1 * v1 + t2 * v2 - pi) > 1e-9:
                continue
            yield a, b, v1, v2


def _extreme_point_scan(n: int, m: int, pi: float) -> float:
    best = math.inf
    for a, b, v1, v2 in _two_level_extreme_points(n, m, pi):
        total = 0.0
        if v1 > ZERO_FLOOR:
            total -= a * v1 * math.log2(v1)
        if v2 > ZERO_FLOOR:
            total -= (b - a) * v2 * math.log2(v2)
        best = min(best, total)
    return best


def oracle_min_entropy(
    shape: SystemShape,
    restarts: int = 100,
    iters: int = 5000,
    rng: np.random.Generator | None = None,
) -> float:
    """Polytope search for low entropy; never returns below the true min.

    Two independent pressures are combined: an exhaustive scan of the
    polytope's extreme points (at most two positive value levels, see
    :func:`_two_level_extreme_points`) and a multi-restart greedy descent
    that repeatedly transfers the largest allowed mass from a smaller onto
    a larger same-segment entry (each transfer strictly lowers entropy).
    Every point evaluated is feasible, so the best entropy found
    upper-bounds the exact minimum.
    """
    if rng is None:
        rng = derive_rng(0)
    n, m = shape.n, shape.m
    segments = [(0, m)]
    if m < n:
        segments.append((m, n))
    best = _extreme_point_scan(n, m, shape.pi)
    for _ in range(max(1, restarts)):
        probs = np.array(sample_feasible(shape, rng).probs)
        for _ in range(max(1, iters)):
            moves = []
            for lo, hi in segments:
                for i in range(lo, hi):
                    room_up = (1.0 - probs[i]) if i == 0 else probs[i - 1] - probs[i]
                    if room_up <= 1e-12:
                        continue
                    for j in range(i + 1, hi):
                        room_down = probs[j] - (probs[j + 1] if j + 1 < n else 0.0)
                        delta = min(room_up, room_down)
                        if delta > 1e-12:
                            moves.append((i, j, delta))
            if not moves:
                break
            i, j, delta = moves[int(rng.integers(len(moves)))]
            probs[i] += delta
            probs[j] -= delta
        best = min(best, entropy_bits(probs))
    return best


def oracle_transform_check(
    n: int,
    k: int,
    trials: int,
    rng: np.random.Generator | None = None,
) -> dict:
    """Compare both transforms against total enumeration of ordered tuples.

    For random distributions, every ordered k-tuple (with and without
    replacement) is evaluated by a plain chain/product loop and grouped
    into composites; the grouped masses must match the transform outputs.
    """
    if n > 6 or k > 3:
        raise TooLargeError("total enumeration is capped at n <= 6, k <= 3")
    if rng is None:
        rng = derive_rng(0)
    sampler = SamplerSpec()
    max_dev_unique = 0.0
    max_dev_repeated = 0.0
    for _ in range(max(1, trials)):
        dist = sample_distribution(n, sampler, rng)
        p = np.asarray(dist.probs)

        grouped: dict[tuple, float] = {}
        for perm in itertools.permutations(range(n), k):
            remaining = 1.0
            chain = 1.0
            for idx in perm:
                chain *= p[idx] / remaining
                remaining -= p[idx]
            key = tuple(sorted(perm))
            grouped[key] = grouped.get(key, 0.0) + chain
        ts = transform_unique(dist, n, k)
        for row, prob in zip(ts.composite_members, ts.dist.probs):
            dev = abs(grouped[tuple(int(v) for v in row)] - float(prob))
            max_dev_unique = max(max_dev_unique, dev)

        grouped.clear()
        for tup in itertools.product(range(n), repeat=k):
            value = 1.0
            for idx in tup:
                value *= p[idx]
            key = tuple(sorted(tup))
            grouped[key] = grouped.get(key, 0.0) + value
        tr = transform_repeated(dist, n, k)
        for row, prob in zip(tr.composite_members, tr.dist.probs):
            dev = abs(grouped[tuple(int(v) for v in row)] - float(prob))
            max_dev_repeated = max(max_dev_repeated, dev)
    return {
        "n": n,
        "k": k,
        "trials": trials,
        "max_abs_deviation_unique": max_dev_unique,
        "max_abs_deviation_repeated": max_dev_repeated,
    }
