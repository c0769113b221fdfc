"""The base-p solenoid: carry group on [0,1) x (unit ball), its metric,
the series map into the solid torus, and the flow vector field.

Points keep the circle coordinate as an exact Fraction so the group
axioms hold exactly; floats appear only when distances or embeddings
are evaluated.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .complex_map import (
    EmbeddingCertificate,
    MapParams,
    PlaneMap,
    character_table,
    delta_lower,
    residue_digit_matrix,
    _min_cross_distance,
)
from .padic import PAdic, from_int

__all__ = [
    "SolenoidPoint",
    "SolenoidParams",
    "PointCloud3D",
    "TorusMap",
    "add",
    "neg",
    "distance",
    "from_padic",
    "orbit",
    "limit_to_space",
    "gamma_estimate",
    "delta_tilde_certificate",
    "integrate_field",
]


@dataclass(frozen=True)
class SolenoidPoint:
    """A pair (circle coordinate in [0,1), unit-ball digit expansion)."""

    xi: Fraction
    x: PAdic

    def __post_init__(self) -> None:
        xi = Fraction(self.xi)
        object.__setattr__(self, "xi", xi)
        if not 0 <= xi < 1:
            raise ValueError(f"circle coordinate must lie in [0,1), got {xi}")
        if not self.x.is_zero() and self.x.v < 0:
            raise ValueError("second coordinate must lie in the unit ball")


def add(f: SolenoidPoint, g: SolenoidPoint) -> SolenoidPoint:
    """Component sum with the real carry moved into the ball coordinate."""
    t = f.xi + g.xi
    carry = int(t)  # t in [0,2): carry is 0 or 1
    x = f.x + g.x
    if carry:
        x = x + from_int(carry, f.x.p)
    return SolenoidPoint(t - carry, x)


def neg(f: SolenoidPoint) -> SolenoidPoint:
    """Group inverse: (1-xi, -x-1) off the seam, (0, -x) on it."""
    if f.xi == 0:
        return SolenoidPoint(Fraction(0), -f.x)
    return SolenoidPoint(1 - f.xi, -(f.x + from_int(1, f.x.p)))


def sub(f: SolenoidPoint, g: SolenoidPoint) -> SolenoidPoint:
    return add(f, neg(g))


def _length(f: SolenoidPoint, alpha: float) -> float:
    return max(float(f.xi), f.x.norm(alpha))


def distance(f: SolenoidPoint, g: SolenoidPoint, alpha: float = 1.0) -> float:
    """Invariant metric: the shorter of the two one-sided gauge lengths."""
    return min(_length(sub(f, g), alpha), _length(sub(g, f), alpha))


def from_padic(x: PAdic) -> SolenoidPoint:
    """Injective homomorphism: split into (fractional part, integral part)."""
    frac, integral = x.split()
    return SolenoidPoint(frac, integral)


def orbit(f: SolenoidPoint, t: float | Fraction) -> SolenoidPoint:
    """Time-t translate along the line winding through the solenoid."""
    tf = Fraction(t)
    whole = math.floor(tf)
    return add(f, SolenoidPoint(tf - whole, from_int(whole, f.x.p)))


@dataclass(frozen=True)
class SolenoidParams:
    map: MapParams
    a: complex = 2.0

    def __post_init__(self) -> None:
        a = complex(self.a)
        object.__setattr__(self, "a", a)
        if a == 0:
            raise ValueError("torus radius parameter a must be nonzero")


@dataclass(frozen=True)
class PointCloud3D:
    """Embedded points tagged with (circle index, residue) preimages."""

    points: np.ndarray
    labels: np.ndarray
    params: SolenoidParams

    def __post_init__(self) -> None:
        if self.points.shape[0] != self.labels.shape[0]:
            raise ValueError("points and labels must align")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("non-finite embedded point")
        if len(np.unique(self.labels, axis=0)) != len(self.labels):
            raise ValueError("duplicate preimage labels")

    def __len__(self) -> int:
        return len(self.points)


def limit_to_space(xi: float, z: complex, direction: complex) -> np.ndarray:
    """Small-radius limit of the torus chart: the tube collapses onto
    the plane through the vertical axis at angle 2 pi xi."""
    if abs(abs(direction) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit complex number")
    w = z * direction.conjugate()
    ring = cmath.exp(2j * math.pi * xi) * w.real
    return np.array([ring.real, w.imag, ring.imag])


class TorusMap:
    """Series map of the solenoid into a solid torus in 3-space."""

    def __init__(self, params: SolenoidParams):
        self.params = params
        self.plane = PlaneMap(params.map)

    # -- the complex-valued layer ------------------------------------------

    def _coupling(self, xi: float, x: PAdic, n: int) -> complex:
        """Circle phase attached to level n; switched off once the level
        outruns the digit window that the ball coordinate can feel."""
        p, m = self.params.map.p, self.params.map.m
        if m == math.inf:
            return cmath.exp(2j * math.pi * xi / p ** (n + 1))
        v = x.valuation()  # +inf for zero keeps the coupling on
        if n > m + v:
            return 1.0 + 0.0j
        return cmath.exp(2j * math.pi * xi / p ** (min(n, int(m)) + 1))

    def fiber_value(self, xi: float | Fraction, x: PAdic) -> complex:
        """Fiberwise series value; representatives are reduced first, so
        the result is constant on cosets (xi+l, x-l) by construction."""
        whole = math.floor(xi)
        if whole:
            xi = xi - whole
            x = x + from_int(whole, x.p)
        xi_f = float(xi)
        pmap = self.plane
        s = self.params.map.s
        total = 0.0 + 0.0j
        for n in range(0, self.params.map.depth + 1):
            total += s**n * self._coupling(xi_f, x, n) * pmap.character(x, n)
        return total

    def fiber_values(self, xi: float | Fraction, depth: int) -> np.ndarray:
        """Fiber series over every residue at the given depth, ascending.

        Expects the canonical circle coordinate in [0,1); the scalar
        fiber_value() reduces arbitrary representatives.
        """
        if not 0 <= xi < 1:
            raise ValueError("fiber coordinate must lie in [0,1)")
        params = self.params.map
        p, m = params.p, params.m
        xi_f = float(xi)
        mat = residue_digit_matrix(p, depth)
        chars = character_table(mat, 0, params)
        s = params.s
        if m == math.inf:
            ns = np.arange(params.depth + 1)
            coefs = s**ns * np.exp(2j * math.pi * xi_f / p ** (ns + 1.0))
            return coefs @ chars
        v = _residue_valuations(np.arange(p**depth, dtype=np.int64), p, depth)
        total = np.zeros(chars.shape[1], dtype=np.complex128)
        for n in range(params.depth + 1):
            coupled = np.where(
                n <= int(m) + v,
                cmath.exp(2j * math.pi * xi_f / p ** (min(n, int(m)) + 1)),
                1.0 + 0.0j,
            )
            total += s**n * coupled * chars[n]
        return total

    # -- the chart into 3-space ---------------------------------------------

    def to_space(self, xi: float, z: complex) -> np.ndarray:
        """Torus chart: ring angle 2 pi xi, tube displacement z measured
        relative to the complex parameter a."""
        a = self.params.a
        w = z / a
        ring = cmath.exp(2j * math.pi * xi) * abs(a) * (1.0 + w.real)
        return np.array([ring.real, abs(a) * w.imag, ring.imag])

    def to_space_batch(self, xi: float, z: np.ndarray) -> np.ndarray:
        a = self.params.a
        w = z / a
        ring = cmath.exp(2j * math.pi * xi) * abs(a) * (1.0 + w.real)
        return np.column_stack([ring.real, abs(a) * w.imag, ring.imag])

    def embed(self, f: SolenoidPoint) -> np.ndarray:
        """Full embedding of one solenoid point."""
        return self.to_space(float(f.xi), self.fiber_value(f.xi, f.x))

    def push_plane(self, x: PAdic) -> np.ndarray:
        """Embed a plane-map preimage through the solenoid: the composite
        agrees fiberwise with the integral part of the plane series."""
        return self.embed(from_padic(x))

    def cloud(self, xi_count: int, depth: int) -> PointCloud3D:
        """Fibers at xi = i/xi_count for all residues; xi-major order."""
        p = self.params.map.p
        per = p**depth
        pts = np.empty((xi_count * per, 3))
        labels = np.empty((xi_count * per, 2), dtype=np.int64)
        for i in range(xi_count):
            xi = Fraction(i, xi_count)
            vals = self.fiber_values(xi, depth)
            pts[i * per : (i + 1) * per] = self.to_space_batch(float(xi), vals)
            labels[i * per : (i + 1) * per, 0] = i
            labels[i * per : (i + 1) * per, 1] = np.arange(per)
        return PointCloud3D(points=pts, labels=labels, params=self.params)

    # -- dynamics -------------------------------------------------------------

    def scaled(self, factor: complex) -> "TorusMap":
        return TorusMap(replace(self.params, map=self.params.map.scaled_s(factor)))

    def vector_field(self, f: SolenoidPoint) -> np.ndarray:
        """Velocity of the embedded flow at the image of f.

        Composed of the rigid rotation about the vertical axis plus the
        collapsed-tube image of the scaled map (series parameter s/p)
        weighted by the level -1 circle character exp(2 pi i xi).  The
        relative sign of the two terms is fixed by the central-difference
        oracle on exactly computed orbits.
        """
        prm = self.params.map
        if prm.m != math.inf:
            raise ValueError("the flow field needs the infinite smoothing order")
        p = prm.p
        r = self.embed(f)
        sub_map = self.scaled(1.0 / p)
        w = sub_map.fiber_value(f.xi, f.x)
        a = self.params.a
        u = limit_to_space(float(f.xi), w, a / abs(a))
        c = cmath.exp(2j * math.pi * float(f.xi))
        term_ring = 2.0 * math.pi * np.array([-r[2], 0.0, r[0]])
        term_tube = (2.0 * math.pi / p) * np.array(
            [
                -c.real * u[1],
                c.real * u[0] + c.imag * u[2],
                -c.imag * u[1],
            ]
        )
        return term_ring + term_tube


def _residue_valuations(codes: np.ndarray, p: int, depth: int) -> np.ndarray:
    """Trailing-zero count of each code in base p (code 0 maps high)."""
    v = np.zeros(codes.shape, dtype=np.int64)
    work = codes.copy()
    for _ in range(depth):
        mask = (work % p == 0) & (work > 0)
        if not mask.any():
            break
        v[mask] += 1
        work = np.where(mask, work // p, work)
    v[codes == 0] = depth + 64
    return v


# ---------------------------------------------------------------------------
# certificates


def gamma_estimate(
    params: SolenoidParams, xi_count: int = 256, depth: int = 8
) -> tuple[float, bool]:
    """Sampled estimate of the tube-clearance number, with the analytic
    sufficient condition (real a beyond the contraction radius)."""
    tmap = TorusMap(params)
    worst = -math.inf
    for i in range(xi_count):
        vals = tmap.fiber_values(Fraction(i, xi_count), depth)
        worst = max(worst, float(np.max(-np.real(vals / params.a))))
    a = params.a
    sufficient = a.imag == 0 and a.real > params.map.contraction_radius
    return worst, sufficient


def delta_tilde_certificate(
    params: SolenoidParams,
    xi_count: int = 8,
    search_depth: int = 6,
) -> EmbeddingCertificate:
    """Separation certificate for the fiberwise map.

    The analytic lower bound is the same as for the plane map; the
    search scans residue pairs with differing lowest digits across a
    circle grid, recording the gamma estimate alongside.
    """
    mp = params.map
    lower = delta_lower(mp.p, mp.s)
    tmap = TorusMap(params)
    p = mp.p
    first = np.arange(p**search_depth, dtype=np.int64) % p
    empirical = math.inf
    for i in range(xi_count):
        vals = tmap.fiber_values(Fraction(i, xi_count), search_depth)
        for da in range(p):
            va = vals[first == da]
            for db in range(da + 1, p):
                empirical = min(empirical, _min_cross_distance(va, vals[first == db]))
    a_s = abs(mp.s)
    allowance = 4.0 * a_s**search_depth / (1.0 - a_s) + 2.0 * mp.tail_bound
    if lower > 0.0:
        verdict = "certified-embedding"
    elif empirical - allowance > 0.0:
        verdict = "empirically-injective"
    else:
        verdict = "unknown"
    gamma, _ = gamma_estimate(params, xi_count=max(xi_count, 16), depth=search_depth)
    return EmbeddingCertificate(
        delta_lower=lower,
        delta_empirical=float(empirical),
        verdict=verdict,
        allowance=allowance,
        gamma=gamma,
    )


# ---------------------------------------------------------------------------
# flow integration against the sampled image


def integrate_field(
    tmap: TorusMap,
    start: SolenoidPoint,
    t_end: float,
    steps: int,
    xi_count: int = 64,
    depth: int = 5,
) -> dict[str, float]:
    """Fourth-order integration of the flow using the nearest sampled
    preimage to evaluate the field off the exact image.

    Returns the maximum distance of the numeric trajectory from the
    sampled image and its final deviation from the exactly computed
    orbit.  The field away from the image is only defined up to an
    extension, so this is a monitoring tool rather than a certificate.
    """
    cloud = tmap.cloud(xi_count, depth)
    pts = cloud.points
    p = tmap.params.map.p
    fibers = [
        [SolenoidPoint(Fraction(i, xi_count), from_int(r, p, depth)) for r in range(p**depth)]
        for i in range(xi_count)
    ]
    flat = [f for row in fibers for f in row]
    field_cache: dict[int, np.ndarray] = {}

    def field(r: np.ndarray) -> np.ndarray:
        idx = int(np.argmin(np.sum((pts - r) ** 2, axis=1)))
        if idx not in field_cache:
            field_cache[idx] = tmap.vector_field(flat[idx])
        return field_cache[idx]

    h = t_end / steps
    r = tmap.embed(start)
    max_drift = 0.0
    for _ in range(steps):
        k1 = field(r)
        k2 = field(r + 0.5 * h * k1)
        k3 = field(r + 0.5 * h * k2)
        k4 = field(r + h * k3)
        r = r + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        drift = float(np.min(np.linalg.norm(pts - r, axis=1)))
        max_drift = max(max_drift, drift)
    exact = tmap.embed(orbit(start, Fraction(t_end).limit_denominator(10**9)))
    return {
        "max_image_drift": max_drift,
        "final_error": float(np.linalg.norm(r - exact)),
    }
