"""Moments of the image measure, series-coefficient combinatorics,
box-counting dimension, and divergence between smoothing orders.

Integration against the image measure reduces to exhaustive averaging
over residue classes (exact uniform weights), which is reproducible and
carries a rigorous error bound from the map's Lipschitz modulus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .complex_map import MapParams, PlaneMap, character_table, delta_lower, residue_digit_matrix

__all__ = [
    "MomentResult",
    "DimensionEstimate",
    "MeasureReport",
    "moment",
    "tuple_coefficient",
    "moment_series",
    "box_dimension",
    "box_counts",
    "metric_divergence",
    "divergence_bound",
    "character_order_gap",
    "measure_consistency",
]


@dataclass(frozen=True)
class MomentResult:
    L: int
    Lbar: int
    value: complex
    depth: int
    error_bound: float

    def __post_init__(self) -> None:
        if self.L < 0 or self.Lbar < 0 or self.error_bound < 0:
            raise ValueError("degrees and error bound must be nonnegative")


def moment(params: MapParams, L: int, Lbar: int, depth: int) -> MomentResult:
    """Average of value^L conj(value)^Lbar over all depth-level residues.

    The average is the exact uniform-measure integral of the sampled
    step function; the error bound propagates the ball-diameter Lipschitz
    modulus and the series tail through the monomial on the disk of
    radius contraction_radius.
    """
    if L == 0 and Lbar == 0:
        return MomentResult(0, 0, 1.0 + 0.0j, depth, 0.0)
    vals = PlaneMap(params).values_on_residues(depth)
    z = np.ones_like(vals)
    if L:
        z = vals**L
    if Lbar:
        z = z * np.conj(vals) ** Lbar
    value = complex(z.mean())
    a = abs(params.s)
    point_err = 2.0 * a**depth / (1.0 - a) + params.tail_bound
    r = params.contraction_radius
    bound = (L + Lbar) * r ** (L + Lbar - 1) * point_err
    return MomentResult(L, Lbar, value, depth, bound)


def _padic_integer(q: Fraction, p: int) -> bool:
    return q.denominator % p != 0 if q.denominator > 1 else True


def tuple_coefficient(
    p: int, L: int, Lbar: int, n: int, nbar: int, cutoff: int | None = None
) -> tuple[int, bool]:
    """Count of ordered index tuples behind the (n, nbar) series term.

    Enumerates tuples (n_1..n_L) summing to n and (m_1..m_Lbar) summing
    to nbar whose character product integrates to one, i.e. whose
    combined frequency sum_k p^(-n_k-1) - sum_k p^(-m_k-1) has no p in
    its denominator.  Returns (count, exhaustive); the flag drops when a
    cutoff clips the index range.
    """
    bound_n = n if cutoff is None else min(n, cutoff)
    bound_m = nbar if cutoff is None else min(nbar, cutoff)
    exhaustive = cutoff is None or (cutoff >= n and cutoff >= nbar)

    def compositions(total: int, parts: int, bound: int):
        if parts == 0:
            if total == 0:
                yield ()
            return
        for head in range(min(total, bound) + 1):
            for rest in compositions(total - head, parts - 1, bound):
                yield (head,) + rest

    count = 0
    for tup in compositions(n, L, bound_n):
        base = sum(Fraction(1, p ** (k + 1)) for k in tup)
        for tdn in compositions(nbar, Lbar, bound_m):
            q = base - sum(Fraction(1, p ** (k + 1)) for k in tdn)
            if _padic_integer(q, p):
                count += 1
    return count, exhaustive


def moment_series(params: MapParams, L: int, Lbar: int, cutoff: int) -> complex:
    """Partial sum of the coefficient expansion, for cross-validation."""
    s, sb = params.s, params.s.conjugate()
    total = 0.0 + 0.0j
    for n in range(cutoff + 1):
        for nbar in range(cutoff + 1):
            c, _ = tuple_coefficient(params.p, L, Lbar, n, nbar)
            if c:
                total += c * s**n * sb**nbar
    return total


# ---------------------------------------------------------------------------
# box counting


@dataclass(frozen=True)
class DimensionEstimate:
    slope: float
    scale_window: tuple[float, float]
    r2: float
    point_count: int

    def __post_init__(self) -> None:
        if not math.isfinite(self.slope):
            raise ValueError("slope must be finite")
        if self.scale_window[0] >= self.scale_window[1]:
            raise ValueError("scale window must be increasing")


def _as_points(cloud) -> np.ndarray:
    pts = getattr(cloud, "points", cloud)
    if callable(pts):
        pts = pts()
    pts = np.asarray(pts)
    if np.iscomplexobj(pts):
        pts = np.column_stack([pts.real, pts.imag])
    if pts.ndim != 2:
        raise ValueError("expected an (n, d) coordinate array")
    return pts.astype(np.float64)


def box_counts(points: np.ndarray, eps: float) -> int:
    """Occupied cells of the grid of pitch eps anchored at the bounding corner."""
    pts = _as_points(points)
    corner = pts.min(axis=0)
    idx = np.floor((pts - corner) / eps).astype(np.int64)
    key = np.zeros(len(idx), dtype=np.int64)
    base = int(idx.max()) + 2
    for d in range(idx.shape[1]):
        key = key * base + idx[:, d]
    return len(np.unique(key))


def box_dimension(
    cloud,
    n_scales: int = 12,
    base: float = 2.0,
    saturation: float = 0.25,
) -> DimensionEstimate:
    """Least-squares slope of log N(eps) against log(1/eps).

    The ladder starts at a quarter of the diameter and descends
    geometrically; the extreme octaves are dropped, as are scales where
    the count approaches the raw point count (grid resolving individual
    samples rather than structure).
    """
    pts = _as_points(cloud)
    if len(pts) < 16:
        raise ValueError("too few points for a dimension estimate")
    span = pts.max(axis=0) - pts.min(axis=0)
    diam = float(np.max(span))
    if diam <= 0:
        raise ValueError("degenerate cloud: zero diameter")
    eps0 = diam / 4.0
    scales = eps0 * base ** (-np.arange(n_scales, dtype=np.float64))
    counts = np.array([box_counts(pts, e) for e in scales], dtype=np.float64)
    keep = counts <= saturation * len(pts)
    keep[0] = False
    last = np.nonzero(keep)[0]
    if len(last):
        keep[last[-1]] = False
    if keep.sum() < 3:
        raise ValueError("degenerate scale window after trimming")
    xs = np.log(1.0 / scales[keep])
    ys = np.log(counts[keep])
    slope, intercept = np.polyfit(xs, ys, 1)
    fitted = slope * xs + intercept
    ss_res = float(np.sum((ys - fitted) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    kept_scales = scales[keep]
    return DimensionEstimate(
        slope=float(slope),
        scale_window=(float(kept_scales.min()), float(kept_scales.max())),
        r2=r2,
        point_count=len(pts),
    )


# ---------------------------------------------------------------------------
# divergence between smoothing orders


def divergence_bound(params_m: MapParams, params_inf: MapParams) -> float:
    """Analytic ceiling for the divergence of the two image pseudometrics,
    using the certified separation lower bounds in the denominator."""
    if params_m.p != params_inf.p or params_m.s != params_inf.s:
        raise ValueError("orders must share p and s")
    if params_inf.m != math.inf or params_m.m == math.inf:
        raise ValueError("expected one finite and one infinite order")
    lo_m = delta_lower(params_m.p, params_m.s)
    lo_inf = delta_lower(params_inf.p, params_inf.s)
    if lo_m + lo_inf <= 0:
        raise ValueError("bound needs certified separation (|s| below threshold)")
    a = abs(params_m.s)
    return 4.0 * math.pi * params_m.p ** (-int(params_m.m)) / ((1.0 - a) * (lo_m + lo_inf))


def metric_divergence(
    params_m: MapParams,
    params_inf: MapParams,
    n_samples: int = 256,
    sample_depth: int = 14,
    seed: int = 7,
) -> tuple[float, float]:
    """Empirical sup of |rho_m - rho_inf| / (rho_m + rho_inf) over seeded
    residue pairs, together with the analytic bound."""
    bound = divergence_bound(params_m, params_inf)
    p = params_m.p
    rng = np.random.default_rng(seed)
    codes = rng.integers(0, p**sample_depth, size=n_samples, dtype=np.int64)
    codes = np.unique(codes)
    vm = PlaneMap(params_m).values_on_residues(sample_depth, codes=codes)
    vi = PlaneMap(params_inf).values_on_residues(sample_depth, codes=codes)
    dm = np.abs(vm[:, None] - vm[None, :])
    di = np.abs(vi[:, None] - vi[None, :])
    denom = dm + di
    num = np.abs(dm - di)
    mask = denom > 0
    kappa = float((num[mask] / denom[mask]).max()) if mask.any() else 0.0
    return kappa, bound


def character_order_gap(
    params_m: MapParams, params_inf: MapParams, depth: int = 14
) -> float:
    """Largest pointwise gap between finite- and infinite-order characters
    over all residues and levels; stays below 2 pi p^-m."""
    p = params_m.p
    codes = np.arange(min(p**depth, 4096), dtype=np.int64)
    mat = residue_digit_matrix(p, depth, codes)
    cm = character_table(mat, 0, params_m)
    ci = character_table(mat, 0, params_inf)
    return float(np.max(np.abs(cm - ci)))


# ---------------------------------------------------------------------------
# measure consistency


@dataclass(frozen=True)
class MeasureReport:
    level: int
    depth: int
    fraction: Fraction
    expected_fraction: Fraction
    separation_min: float
    separation_floor: float
    box_ratios: tuple[tuple[float, float], ...]
    ratio_median: float
    expected_ratio: float
    passes: tuple[tuple[str, bool], ...]

    def ok(self) -> bool:
        return all(flag for _, flag in self.passes)


def measure_consistency(
    params: MapParams,
    level: int,
    depth: int,
    separation_depth: int | None = None,
) -> MeasureReport:
    """Three checks tying counting measure to image geometry.

    (i)  the exact fraction of depth-level residues landing in one
         level-k cluster is p^-k;
    (ii) distinct level-k clusters stay at least
         delta_lower * |s|^max(k-1,0) - 2 tail apart (sampled pairs);
    (iii) box counts of a level-k cluster against the full unit-ball
         image sit near p^-k across the mid scale window.
    """
    if delta_lower(params.p, params.s) <= 0.0:
        raise ValueError("refusing: separation not certified, clusters may overlap")
    p = params.p
    pmap = PlaneMap(params)
    # (i) exact residue counting: residues congruent to 0 mod p^level
    total = p**depth
    in_cluster = len(range(0, total, p**level))
    fraction = Fraction(in_cluster, total)
    expected_fraction = Fraction(1, p**level)
    # (ii) cross-cluster separation on a sampled sub-depth
    sep_depth = separation_depth or min(depth, 12)
    vals = pmap.values_on_residues(sep_depth)
    group = np.arange(len(vals), dtype=np.int64) % p**level if level else None
    if level:
        sep = math.inf
        for ga in range(p**level):
            va = vals[group == ga]
            for gb in range(ga + 1, p**level):
                vb = vals[group == gb]
                chunk = 512
                for i in range(0, len(va), chunk):
                    sep = min(sep, float(np.abs(va[i : i + chunk, None] - vb[None, :]).min()))
    else:
        sep = math.inf  # single cluster at level 0: nothing to separate
    floor = (
        delta_lower(p, params.s) * abs(params.s) ** max(level - 1, 0)
        - 2.0 * params.tail_bound
    )
    # (iii) box-count ratio child/parent on the parent's grid anchor
    parent = pmap.cluster(0, 0, depth)
    child = pmap.cluster(0, level, depth) if level else parent
    ppts = parent.points()
    cpts = child.points()
    corner = ppts.min(axis=0)
    span = float(np.max(ppts.max(axis=0) - corner))
    ratios = []
    for j in range(2, 12):
        eps = span / 2.0**j
        n_parent = _anchored_count(ppts, corner, eps)
        n_child = _anchored_count(cpts, corner, eps)
        if 16 <= n_parent <= 0.25 * len(ppts):
            ratios.append((eps, n_child / n_parent))
    expected_ratio = float(p) ** (-level)
    median = float(np.median([r for _, r in ratios])) if ratios else math.nan
    passes = (
        ("fraction", fraction == expected_fraction),
        ("separation", (not level) or sep >= floor),
        ("box_ratio", bool(ratios) and abs(median - expected_ratio) <= 0.2 * expected_ratio),
    )
    return MeasureReport(
        level=level,
        depth=depth,
        fraction=fraction,
        expected_fraction=expected_fraction,
        separation_min=sep,
        separation_floor=floor,
        box_ratios=tuple(ratios),
        ratio_median=median,
        expected_ratio=expected_ratio,
        passes=passes,
    )


def _anchored_count(pts: np.ndarray, corner: np.ndarray, eps: float) -> int:
    idx = np.floor((pts - corner) / eps).astype(np.int64)
    base = int(idx.max()) + 2
    key = np.zeros(len(idx), dtype=np.int64)
    for d in range(idx.shape[1]):
        key = key * base + idx[:, d]
    return len(np.unique(key))
