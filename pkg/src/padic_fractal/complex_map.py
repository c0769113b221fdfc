"""Character series mapping base-p digit expansions into the complex plane.

The map sends x to sum_n s^n chi_n(x), where chi_n reads a window of m+1
digits below index n (all of them for infinite order) as a phase.  For
|s| below the base-dependent threshold the map is a bi-Lipschitz
embedding and its image is a self-similar fractal of dimension
-log p / log|s|.
"""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .padic import PAdic, PrecisionError, expand

__all__ = [
    "MapParams",
    "EmbeddingCertificate",
    "PointCloud2D",
    "PlaneMap",
    "s_zero",
    "delta_lower",
    "delta_certificate",
    "rotate_digits",
    "residue_digit_matrix",
    "series_values",
    "character_table",
    "sandwich_check",
    "scaling_residuals",
    "code_valuations",
]

VERDICTS = ("certified-embedding", "empirically-injective", "unknown", "not-applicable")


def s_zero(p: int) -> float:
    """Contraction threshold: below it the separation bound is positive."""
    sp = math.sin(math.pi / p)
    return sp / (1.0 + sp)


def delta_lower(p: int, s: complex) -> float:
    """Certified lower bound on the separation of images of unit-distance pairs."""
    a = abs(s)
    return max(0.0, 2.0 * (math.sin(math.pi / p) - a / (1.0 - a)))


@dataclass(frozen=True)
class MapParams:
    """Parameters of the series map.

    m is the smoothing order (math.inf uses every digit below the level,
    which makes each term a continuous additive character).  depth is
    the series truncation index; the geometric tail beyond it is bounded
    by tail_bound, and tol records the accuracy target the depth must
    support.
    """

    p: int
    m: int | float = 0
    s: complex = 0.3
    depth: int = 40
    tol: float | None = None

    def __post_init__(self) -> None:
        if self.p < 2:
            raise ValueError(f"p must be >= 2, got {self.p}")
        if self.m != math.inf and (not isinstance(self.m, int) or self.m < 0):
            raise ValueError("m must be a nonnegative integer or math.inf")
        s = complex(self.s)
        object.__setattr__(self, "s", s)
        if s == 0 or abs(s) >= 1.0:
            raise ValueError(f"s must satisfy 0 < |s| < 1, got {s}")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.tol is None:
            object.__setattr__(self, "tol", self.tail_bound)
        elif self.tail_bound > self.tol:
            raise ValueError(
                f"depth {self.depth} leaves tail {self.tail_bound:.3g} "
                f"above tol {self.tol:.3g}"
            )

    @property
    def tail_bound(self) -> float:
        """Rigorous bound on the dropped series tail, 2|s|^(depth+1)/(1-|s|)."""
        a = abs(self.s)
        return 2.0 * a ** (self.depth + 1) / (1.0 - a)

    @property
    def scaling_dimension(self) -> float:
        """Image dimension for embedding parameters: -log p / log|s|."""
        return -math.log(self.p) / math.log(abs(self.s))

    @property
    def contraction_radius(self) -> float:
        """Disk radius 1/(1-|s|) containing every unit-ball image point."""
        return 1.0 / (1.0 - abs(self.s))

    @property
    def threshold(self) -> float:
        return s_zero(self.p)

    @property
    def certified_separation(self) -> float:
        return delta_lower(self.p, self.s)

    def infinite_order(self) -> bool:
        return self.m == math.inf

    def scaled_s(self, factor: complex) -> "MapParams":
        return replace(self, s=self.s * factor, tol=None)

    @classmethod
    def for_tolerance(cls, p: int, m: int | float, s: complex, tol: float) -> "MapParams":
        a = abs(complex(s))
        depth = 1
        while 2.0 * a ** (depth + 1) / (1.0 - a) > tol:
            depth += 1
        return cls(p=p, m=m, s=s, depth=depth, tol=tol)


@dataclass(frozen=True)
class EmbeddingCertificate:
    """Outcome of a separation search plus the analytic bound.

    delta_lower is certified; delta_empirical is the search minimum over
    the enumerated pairs; allowance covers series truncation and the
    unexplored ball tails.  The verdict relies only on the bound.
    """

    delta_lower: float
    delta_empirical: float
    verdict: str
    allowance: float = 0.0
    gamma: float | None = None

    def __post_init__(self) -> None:
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.delta_lower > self.delta_empirical + self.allowance + 1e-12:
            raise ValueError("certified bound exceeds the observed minimum")


@dataclass(frozen=True)
class PointCloud2D:
    """Image points tagged with their integer preimages."""

    values: np.ndarray
    labels: np.ndarray
    level: int
    params: MapParams

    def __post_init__(self) -> None:
        if len(self.values) != len(self.labels):
            raise ValueError("values and labels must align")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite image point")
        if len(np.unique(self.labels)) != len(self.labels):
            raise ValueError("duplicate preimage labels")

    def __len__(self) -> int:
        return len(self.values)

    def points(self) -> np.ndarray:
        """(n, 2) array of real coordinates."""
        return np.column_stack([self.values.real, self.values.imag])


# ---------------------------------------------------------------------------
# scalar evaluation


def _char_exp(p: int, units: float) -> complex:
    return cmath.exp(2j * math.pi * units / p)


class PlaneMap:
    """Evaluates the series map, its parts, and its self-similar structure."""

    def __init__(self, params: MapParams):
        self.params = params

    def character(self, x: PAdic, n: int) -> complex:
        """Phase factor at level n: reads digits x_{n-k} weighted p^-k."""
        p, m = self.params.p, self.params.m
        if x.p != p:
            raise ValueError(f"operand base {x.p} does not match params p={p}")
        if x.is_zero() or n < x.v:
            return 1.0 + 0.0j
        kmax = n - x.v if m == math.inf else min(m, n - x.v)
        units = 0.0
        for k in range(int(kmax) + 1):
            d = x.digit(n - k)
            if d:
                units += d * float(p) ** (-k)
        return _char_exp(p, units)

    def value(self, x: PAdic) -> complex:
        """Series value; negative levels contribute s^n (chi_n - 1).

        This unified form equals the prefix formulation
        (1 - s^v)/(1 - s) + sum_{n>=v} s^n chi_n and handles the zero
        element (empty negative part) without a valuation convention.
        """
        s = self.params.s
        total = 0.0 + 0.0j
        if not x.is_zero():
            for n in range(x.v, 0):
                total += s**n * (self.character(x, n) - 1.0)
        for n in range(0, self.params.depth + 1):
            total += s**n * self.character(x, n)
        return total

    __call__ = value

    def parts(self, x: PAdic) -> tuple[complex, complex]:
        """(fractional, integral) split of the series value."""
        s = self.params.s
        frac = 0.0 + 0.0j
        if not x.is_zero():
            for n in range(x.v, 0):
                frac += s**n * (self.character(x, n) - 1.0)
        integral = 0.0 + 0.0j
        for n in range(0, self.params.depth + 1):
            integral += s**n * self.character(x, n)
        return frac, integral

    def derivative_in_s(self, x: PAdic) -> complex:
        """Term-wise derivative of the series with respect to s."""
        s = self.params.s
        total = 0.0 + 0.0j
        if not x.is_zero():
            for n in range(x.v, 0):
                total += n * s ** (n - 1) * (self.character(x, n) - 1.0)
        for n in range(1, self.params.depth + 1):
            total += n * s ** (n - 1) * self.character(x, n)
        return total

    def scaling_residual(self, x: PAdic) -> float:
        """|value(p x) - s value(x) - 1|; bounded by twice the tail."""
        s = self.params.s
        return abs(self.value(x.shift(1)) - s * self.value(x) - 1.0)

    # -- vectorized cloud generation --------------------------------------

    def values_on_residues(
        self,
        depth: int,
        *,
        scale: int = 0,
        codes: np.ndarray | None = None,
    ) -> np.ndarray:
        """Map values on p**scale * (residues at the given depth).

        codes selects specific residues; by default all p**depth of them
        are evaluated in ascending order.
        """
        p = self.params.p
        if codes is None:
            _guard_enumeration(p, depth)
            codes = np.arange(p**depth, dtype=np.int64)
        workers = _worker_count()
        if len(codes) >= 1 << 17 and workers > 1:
            chunks = np.array_split(codes, workers * 4)
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(
                    pool.map(
                        lambda c: series_values(
                            residue_digit_matrix(p, depth, c), scale, self.params
                        ),
                        chunks,
                    )
                )
            return np.concatenate(parts)
        return series_values(residue_digit_matrix(p, depth, codes), scale, self.params)

    def cluster(self, center: int, level: int, depth: int) -> PointCloud2D:
        """Image of the ball |x - center| <= p^-level sampled to `depth`.

        Labels are the absolute integer preimages center + p^level k; the
        point set therefore partitions into the p sub-clusters one level
        down, which share labels with this one.
        """
        if depth < level:
            raise ValueError("depth must reach at least the cluster level")
        p = self.params.p
        _guard_enumeration(p, depth)
        center %= p**level
        codes = np.arange(p ** (depth - level), dtype=np.int64)
        labels = center + codes * p**level
        vals = self.values_on_residues(depth, codes=labels)
        return PointCloud2D(values=vals, labels=labels, level=level, params=self.params)


# ---------------------------------------------------------------------------
# vectorized kernels


def _worker_count() -> int:
    env = os.environ.get("PADIC_FRACTAL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            return 1
    return min(4, os.cpu_count() or 1)


def _guard_enumeration(p: int, depth: int) -> None:
    if p**depth > 1 << 40:
        raise ValueError(
            f"enumeration of {p}^{depth} residues exceeds the vectorized range; "
            "use the scalar path with arbitrary-precision integers"
        )


def residue_digit_matrix(
    p: int, depth: int, codes: np.ndarray | None = None
) -> np.ndarray:
    """Digit columns of residues: column j holds the digit of p**j."""
    if codes is None:
        _guard_enumeration(p, depth)
        codes = np.arange(p**depth, dtype=np.int64)
    cols = [((codes // p**j) % p).astype(np.float64) for j in range(depth)]
    return np.stack(cols, axis=1) if cols else np.zeros((len(codes), 0))


def series_values(digit_mat: np.ndarray, start: int, params: MapParams) -> np.ndarray:
    """Series value per digit row; column j is the digit at index start+j.

    Digits outside the stored columns are zero (rows represent exact
    scaled residues).  Levels below zero contribute s^n (chi_n - 1).
    """
    p, m, s = params.p, params.m, params.s
    rows, cols = digit_mat.shape
    angle = 2.0 * math.pi / p
    inv_p = 1.0 / p
    finite = m != math.inf
    drop = float(p) ** (-(int(m) + 1)) if finite else 0.0

    def col(n: int) -> np.ndarray | None:
        j = n - start
        if 0 <= j < cols:
            return digit_mat[:, j]
        return None

    sums = np.zeros(rows)
    total = np.zeros(rows, dtype=np.complex128)
    for n in range(min(start, 0), params.depth + 1):
        sums *= inv_p
        c = col(n)
        if c is not None:
            sums += c
        if finite:
            c_out = col(n - int(m) - 1)
            if c_out is not None:
                sums -= c_out * drop
        term = np.exp(1j * angle * sums)
        if n < 0:
            total += s**n * (term - 1.0)
        else:
            total += s**n * term
    return total


def character_table(
    digit_mat: np.ndarray, start: int, params: MapParams
) -> np.ndarray:
    """Character values chi_n per row, for n = start .. depth (row-major n)."""
    p, m = params.p, params.m
    rows, cols = digit_mat.shape
    angle = 2.0 * math.pi / p
    inv_p = 1.0 / p
    finite = m != math.inf
    drop = float(p) ** (-(int(m) + 1)) if finite else 0.0
    out = np.empty((params.depth + 1 - start, rows), dtype=np.complex128)
    sums = np.zeros(rows)
    for i, n in enumerate(range(start, params.depth + 1)):
        sums *= inv_p
        j = n - start
        if 0 <= j < cols:
            sums += digit_mat[:, j]
        if finite:
            j_out = n - int(m) - 1 - start
            if 0 <= j_out < cols:
                sums -= digit_mat[:, j_out] * drop
        out[i] = np.exp(1j * angle * sums)
    return out


# ---------------------------------------------------------------------------
# certificates and structural checks


def _min_cross_distance(va: np.ndarray, vb: np.ndarray, chunk: int = 512) -> float:
    best = math.inf
    for i in range(0, len(va), chunk):
        block = np.abs(va[i : i + chunk, None] - vb[None, :])
        best = min(best, float(block.min()))
    return best


def delta_certificate(params: MapParams, search_depth: int = 8) -> EmbeddingCertificate:
    """Analytic separation bound plus a restricted empirical search.

    The search enumerates unit-ball pairs whose lowest digits differ, to
    the given depth; the allowance accounts for the series tail and for
    pairs hiding inside unexplored balls.  The verdict never relies on
    the search.
    """
    p = params.p
    lower = delta_lower(p, params.s)
    vals = PlaneMap(params).values_on_residues(search_depth)
    first = np.arange(len(vals), dtype=np.int64) % p
    empirical = math.inf
    for a in range(p):
        va = vals[first == a]
        for b in range(a + 1, p):
            empirical = min(empirical, _min_cross_distance(va, vals[first == b]))
    a_s = abs(params.s)
    ball_tail = 4.0 * a_s**search_depth / (1.0 - a_s)
    allowance = ball_tail + 2.0 * params.tail_bound
    if lower > 0.0:
        verdict = "certified-embedding"
    elif empirical - allowance > 0.0:
        verdict = "empirically-injective"
    else:
        verdict = "unknown"
    return EmbeddingCertificate(
        delta_lower=lower,
        delta_empirical=float(empirical),
        verdict=verdict,
        allowance=allowance,
    )


def code_valuations(diff: np.ndarray, p: int, cap: int) -> np.ndarray:
    """Multiplicity of p in each nonzero integer (capped; zero stays zero)."""
    vals = np.zeros(diff.shape, dtype=np.int64)
    work = np.abs(diff)
    for _ in range(cap):
        mask = (work % p == 0) & (work > 0)
        if not mask.any():
            break
        vals[mask] += 1
        work = np.where(mask, work // p, work)
    return vals


def sandwich_check(
    params: MapParams,
    n_pairs: int,
    residue_depth: int,
    seed: int,
) -> dict[str, float]:
    """Two-sided bi-Lipschitz test over seeded unit-ball pairs.

    Checks lower * |s|^v <= dist + allowance and
    dist <= 2 |s|^v / (1-|s|) + allowance, where v is the valuation of
    the difference of the integer preimages.
    """
    p = params.p
    rng = np.random.default_rng(seed)
    hi = p**residue_depth
    a = rng.integers(0, hi, size=n_pairs, dtype=np.int64)
    b = rng.integers(0, hi, size=n_pairs, dtype=np.int64)
    keep = a != b
    a, b = a[keep], b[keep]
    pmap = PlaneMap(params)
    dist = np.abs(
        pmap.values_on_residues(residue_depth, codes=a)
        - pmap.values_on_residues(residue_depth, codes=b)
    )
    v = code_valuations(a - b, p, residue_depth)
    sv = abs(params.s) ** v
    allowance = 2.0 * params.tail_bound
    lower = delta_lower(p, params.s)
    lower_margin = dist + allowance - lower * sv
    upper_margin = 2.0 * sv / (1.0 - abs(params.s)) + allowance - dist
    return {
        "pairs": int(len(a)),
        "lower_violations": int(np.sum(lower_margin < 0)),
        "upper_violations": int(np.sum(upper_margin < 0)),
        "worst_lower_margin": float(lower_margin.min()),
        "worst_upper_margin": float(upper_margin.min()),
        "allowance": allowance,
    }


def scaling_residuals(
    params: MapParams,
    n_samples: int,
    digit_depth: int,
    seed: int,
) -> np.ndarray:
    """|value(p x) - s value(x) - 1| over seeded random digit rows."""
    rng = np.random.default_rng(seed)
    mat = rng.integers(0, params.p, size=(n_samples, digit_depth)).astype(np.float64)
    base = series_values(mat, 0, params)
    shifted = series_values(mat, 1, params)
    return np.abs(shifted - params.s * base - 1.0)


def rotate_digits(x: PAdic) -> PAdic:
    """Add one to every digit mod p, with no carries.

    This is a bijection of the unit ball under which the order-0 map
    picks up exactly one factor exp(2 pi i / p); note it is not addition
    of the all-ones element in the ring (carries would break the phase).
    """
    p = x.p
    if not x.is_zero() and x.v < 0:
        raise ValueError("digit rotation is defined on the unit ball")
    if x.value is None:
        stream = [x.digit(n) for n in range(x.window_top)]
        rles = [(d + 1) % p for d in stream]
        lead = next((i for i, d in enumerate(rles) if d), None)
        if lead is None:
            raise PrecisionError("rotation vanishes across a truncated window")
        return PAdic(p, lead, tuple(rles[lead:]))
    width = max(x.window_top, 8)
    head = sum(
        Fraction((x.digit(n) + 1) % p) * Fraction(p) ** n for n in range(width)
    )
    if x.period:
        block_start = x.v + x.preperiod
        phase = (width - block_start) % len(x.period)
        aligned = x.period[phase:] + x.period[:phase]
        new_block = tuple((d + 1) % p for d in aligned)
    else:
        new_block = (1,)
    if any(new_block):
        b = sum(d * p**i for i, d in enumerate(new_block))
        head += Fraction(b * p**width, 1 - p ** len(new_block))
    return expand(head, p, width + len(new_block))
