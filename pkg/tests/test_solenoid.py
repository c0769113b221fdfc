import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from padic_fractal.padic import expand, from_int
from padic_fractal.complex_map import MapParams, PlaneMap
from padic_fractal.solenoid import (
    PointCloud3D,
    SolenoidParams,
    SolenoidPoint,
    TorusMap,
    add,
    delta_tilde_certificate,
    distance,
    from_padic,
    gamma_estimate,
    integrate_field,
    limit_to_space,
    neg,
    orbit,
)

EPS = 1e-12


def pt(xi, r, p=2, depth=8) -> SolenoidPoint:
    return SolenoidPoint(Fraction(xi), from_int(r, p, depth))


solenoid_points = st.builds(
    pt,
    st.fractions(min_value=0, max_value=Fraction(996, 997), max_denominator=997),
    st.integers(min_value=0, max_value=255),
)


class TestGroup:
    def test_carry_example(self):
        f = add(pt(Fraction(7, 10), 0), pt(Fraction(6, 10), 0))
        assert f.xi == Fraction(3, 10) and f.x.value == 1

    def test_no_carry_on_ball_side(self):
        f = add(pt(0, 3), pt(0, 5))
        assert f.xi == 0 and f.x.value == 8

    def test_inverse_example(self):
        f = pt(Fraction(1, 4), 3)
        z = add(f, neg(f))
        assert z.xi == 0 and z.x.is_zero()

    def test_inverse_on_seam(self):
        f = pt(0, 5)
        z = add(f, neg(f))
        assert z.xi == 0 and z.x.is_zero()

    def test_range_validation(self):
        with pytest.raises(ValueError):
            SolenoidPoint(Fraction(3, 2), from_int(0, 2))
        with pytest.raises(ValueError):
            SolenoidPoint(Fraction(0), expand(Fraction(1, 2), 2, 4))

    @given(f=solenoid_points, g=solenoid_points, h=solenoid_points)
    @settings(max_examples=150, deadline=None)
    def test_axioms(self, f, g, h):
        lhs = add(add(f, g), h)
        rhs = add(f, add(g, h))
        assert lhs.xi == rhs.xi and lhs.x == rhs.x
        zero = pt(0, 0)
        idd = add(f, zero)
        assert idd.xi == f.xi and idd.x == f.x
        z = add(f, neg(f))
        assert z.xi == 0 and z.x.is_zero()
        ab = add(f, g)
        ba = add(g, f)
        assert ab.xi == ba.xi and ab.x == ba.x


class TestMetric:
    def test_identity(self):
        f = pt(Fraction(1, 3), 9)
        assert distance(f, f) == 0.0

    def test_wraparound_example(self):
        d = distance(pt(Fraction(9, 10), 0), pt(0, 0))
        assert d == pytest.approx(0.9, abs=1e-15)

    @given(f=solenoid_points, g=solenoid_points, h=solenoid_points)
    @settings(max_examples=120, deadline=None)
    def test_axioms_and_invariance(self, f, g, h):
        dfg = distance(f, g)
        assert dfg >= 0
        assert abs(dfg - distance(g, f)) <= EPS
        assert distance(f, h) <= dfg + distance(g, h) + EPS
        assert abs(distance(add(f, h), add(g, h)) - dfg) <= EPS

    @given(f=solenoid_points, g=solenoid_points)
    @settings(max_examples=80, deadline=None)
    def test_indiscernible(self, f, g):
        if distance(f, g) == 0.0:
            # at working precision the representations coincide
            assert f.xi == g.xi and (f.x - g.x).norm() <= EPS


class TestEmbedJ:
    def test_unit_ball_fixed(self):
        x = from_int(9, 2, 6)
        j = from_padic(x)
        assert j.xi == 0 and j.x == x

    def test_half_plus_half_carries(self):
        jh = from_padic(expand(Fraction(1, 2), 2, 6))
        assert jh.xi == Fraction(1, 2) and jh.x.is_zero()
        s = add(jh, jh)
        assert s.xi == 0 and s.x.value == 1

    @given(
        na=st.integers(min_value=0, max_value=2**10 - 1),
        nb=st.integers(min_value=0, max_value=2**10 - 1),
        shift=st.integers(min_value=0, max_value=5),
    )
    @settings(max_examples=100, deadline=None)
    def test_homomorphism(self, na, nb, shift):
        xa = expand(Fraction(na, 2**shift), 2, 16)
        xb = expand(Fraction(nb, 2**shift), 2, 16)
        lhs = from_padic(xa + xb)
        rhs = add(from_padic(xa), from_padic(xb))
        assert lhs.xi == rhs.xi and lhs.x == rhs.x

    @given(
        na=st.integers(min_value=0, max_value=3**7 - 1),
        nb=st.integers(min_value=0, max_value=3**7 - 1),
        alpha=st.sampled_from([0.5, 1.0, 2.0]),
    )
    @settings(max_examples=100, deadline=None)
    def test_unit_ball_isometry(self, na, nb, alpha):
        xa, xb = from_int(na, 3, 8), from_int(nb, 3, 8)
        d = distance(from_padic(xa), from_padic(xb), alpha)
        assert d == pytest.approx((xa - xb).norm(alpha), abs=EPS)


class TestOrbit:
    def test_time_zero(self):
        f = pt(Fraction(1, 3), 7)
        o = orbit(f, 0)
        assert o.xi == f.xi and o.x == f.x

    def test_integer_time_shifts_ball(self):
        o = orbit(pt(0, 0), 1)
        assert o.xi == 0 and o.x.value == 1

    def test_negative_time_floors(self):
        o = orbit(pt(0, 0), Fraction(-3, 10))
        assert o.xi == Fraction(7, 10) and o.x.value == -1

    @pytest.mark.parametrize("target,depth", [(5, 3), (11, 4), (2, 5)])
    def test_density_probe(self, target, depth):
        # integer times reach any residue class to prescribed accuracy
        p = 2
        t = target % p**depth
        o = orbit(pt(0, 0), t)
        d = distance(o, pt(0, target, p=p, depth=8), alpha=1.0)
        assert d <= p ** (-depth) + EPS


class TestOmega:
    def test_restricts_to_plane_map(self):
        mp = MapParams(p=2, m=math.inf, s=0.3)
        tm = TorusMap(SolenoidParams(map=mp, a=2.0))
        pm = PlaneMap(mp)
        for r in (0, 1, 5, 9, 14):
            x = from_int(r, 2, 6)
            assert tm.fiber_value(0, x) == pytest.approx(pm.value(x), abs=EPS)

    def test_fiber_of_zero_closed_form(self):
        mp = MapParams(p=2, m=math.inf, s=0.3)
        tm = TorusMap(SolenoidParams(map=mp, a=2.0))
        xi = 0.37
        expected = sum(
            0.3**n * cmath.exp(2j * math.pi * xi / 2 ** (n + 1)) for n in range(41)
        )
        assert tm.fiber_value(xi, from_int(0, 2)) == pytest.approx(expected, abs=EPS)
        assert tm.fiber_value(0, from_int(0, 2)) == pytest.approx(1 / 0.7, abs=EPS)

    def test_bounded_by_contraction_radius(self):
        mp = MapParams(p=3, m=2, s=0.4)
        tm = TorusMap(SolenoidParams(map=mp, a=1.0))
        for i in range(7):
            vals = tm.fiber_values(Fraction(i, 7), 4)
            assert np.max(np.abs(vals)) <= mp.contraction_radius + EPS

    @pytest.mark.parametrize("m", [math.inf, 0, 2])
    def test_coset_constancy(self, m):
        mp = MapParams(p=3, m=m, s=0.2)
        tm = TorusMap(SolenoidParams(map=mp, a=2.0))
        x = from_int(7, 3, 6)
        base = tm.fiber_value(0.42, x)
        for l in (1, 2, -1, 3):
            shifted = tm.fiber_value(0.42 + l, x + from_int(-l, 3))
            assert shifted == pytest.approx(base, abs=EPS)

    @pytest.mark.parametrize("m", [math.inf, 0, 2])
    def test_fiber_matches_scalar(self, m):
        mp = MapParams(p=3, m=m, s=0.2, depth=30)
        tm = TorusMap(SolenoidParams(map=mp, a=2.0))
        vals = tm.fiber_values(Fraction(1, 3), 3)
        for r in range(27):
            assert vals[r] == pytest.approx(
                tm.fiber_value(Fraction(1, 3), from_int(r, 3, 3)), abs=1e-10
            )

    def test_fiber_range_check(self):
        tm = TorusMap(SolenoidParams(map=MapParams(p=2, m=0, s=0.3), a=2.0))
        with pytest.raises(ValueError):
            tm.fiber_values(1.5, 3)


class TestChart:
    def test_quarter_turn(self):
        tm = TorusMap(SolenoidParams(map=MapParams(p=2, m=0, s=0.3), a=2.0))
        assert np.allclose(tm.to_space(0.25, 0j), [0, 0, 2], atol=1e-12)

    def test_real_axis(self):
        tm = TorusMap(SolenoidParams(map=MapParams(p=2, m=0, s=0.3), a=2.0))
        assert np.allclose(tm.to_space(0.0, 0.5 + 0j), [2.5, 0, 0])

    def test_half_turn_mirrors_first_coordinate(self):
        tm = TorusMap(SolenoidParams(map=MapParams(p=2, m=0, s=0.3), a=2.0))
        z = 0.3 + 0.4j
        a0 = tm.to_space(0.0, z)
        a5 = tm.to_space(0.5, z)
        assert a5[0] == pytest.approx(-a0[0], abs=EPS)
        assert a5[1] == pytest.approx(a0[1], abs=EPS)

    def test_limit_examples(self):
        assert np.allclose(limit_to_space(0.0, 1 + 2j, 1.0), [1, 2, 0])
        assert np.allclose(limit_to_space(0.25, 1 + 0j, 1.0), [0, 0, 1], atol=1e-12)
        with pytest.raises(ValueError):
            limit_to_space(0.0, 1j, 2.0)

    @pytest.mark.parametrize("eps", [1e-4, 1e-6])
    def test_small_radius_oracle(self, eps):
        # the chart at radius eps*a equals the ring offset plus the limit chart
        a = 1.5 * cmath.exp(0.3j)
        mp = MapParams(p=2, m=0, s=0.3)
        tme = TorusMap(SolenoidParams(map=mp, a=eps * a))
        xi, z = 0.13, 0.4 - 0.7j
        ring = eps * abs(a) * np.array(
            [math.cos(2 * math.pi * xi), 0.0, math.sin(2 * math.pi * xi)]
        )
        assert np.allclose(
            tme.to_space(xi, z), ring + limit_to_space(xi, z, a / abs(a)), atol=1e-12
        )


class TestEmbedding:
    def test_base_point_real_a(self):
        tm = TorusMap(SolenoidParams(map=MapParams(p=2, m=0, s=0.3), a=2.0))
        assert np.allclose(tm.embed(pt(0, 0)), [2 + 1 / 0.7, 0, 0], atol=1e-10)

    def test_coset_invariance_of_embedding(self):
        tm = TorusMap(SolenoidParams(map=MapParams(p=3, m=0, s=0.2), a=2.0))
        x = from_int(4, 3, 6)
        f = SolenoidPoint(Fraction(2, 5), x)
        rep = tm.to_space(float(f.xi), tm.fiber_value(f.xi, f.x))
        alt = tm.to_space(
            float(f.xi), tm.fiber_value(f.xi + 1, x + from_int(-1, 3))
        )
        assert np.allclose(rep, alt, atol=EPS)

    def test_solid_torus_containment(self):
        mp = MapParams(p=2, m=0, s=1 / 2.2)
        a = 2.0 * mp.contraction_radius
        tm = TorusMap(SolenoidParams(map=mp, a=a))
        cloud = tm.cloud(16, 6)
        ring = np.hypot(cloud.points[:, 0], cloud.points[:, 2])
        tube = np.hypot(ring - a, cloud.points[:, 1])
        assert float(tube.max()) <= mp.contraction_radius + 1e-9

    def test_fibers_live_in_rotated_planes(self):
        mp = MapParams(p=2, m=0, s=0.3)
        tm = TorusMap(SolenoidParams(map=mp, a=2.0))
        for i in range(1, 8):
            xi = i / 8
            vals = tm.fiber_values(Fraction(i, 8), 5)
            pts = tm.to_space_batch(xi, vals)
            normal = np.array([math.sin(2 * math.pi * xi), 0.0, -math.cos(2 * math.pi * xi)])
            assert float(np.max(np.abs(pts @ normal))) < 1e-9

    def test_fiber_at_zero_is_plane_image(self):
        mp = MapParams(p=2, m=math.inf, s=0.3)
        tm = TorusMap(SolenoidParams(map=mp, a=2.0))
        fib = tm.fiber_values(Fraction(0), 6)
        plane = PlaneMap(mp).values_on_residues(6)
        assert np.max(np.abs(fib - plane)) < EPS

    def test_contraction_and_lower_ratio(self):
        mp = MapParams(p=2, m=math.inf, s=0.3, depth=40)
        tm = TorusMap(SolenoidParams(map=mp, a=2.0))
        alpha = 1.0 / mp.scaling_dimension
        rng = np.random.default_rng(11)
        ratios = []
        for _ in range(60):
            f = pt(Fraction(int(rng.integers(0, 97)), 97), int(rng.integers(0, 256)))
            g = pt(Fraction(int(rng.integers(0, 97)), 97), int(rng.integers(0, 256)))
            rho = distance(f, g, alpha)
            if rho == 0:
                continue
            d3 = float(np.linalg.norm(tm.embed(f) - tm.embed(g)))
            ratios.append(d3 / rho)
        assert ratios and max(ratios) < 1e3 and min(ratios) > 1e-3

    def test_cloud_labels_and_order(self):
        tm = TorusMap(SolenoidParams(map=MapParams(p=2, m=0, s=0.3), a=2.0))
        cloud = tm.cloud(4, 3)
        assert len(cloud) == 32
        assert np.array_equal(cloud.labels[:8, 0], np.zeros(8, dtype=np.int64))
        assert np.array_equal(cloud.labels[:8, 1], np.arange(8))


class TestGammaDeltaTilde:
    def test_gamma_safe_radius(self):
        mp = MapParams(p=2, m=0, s=0.3)
        g, suff = gamma_estimate(
            SolenoidParams(map=mp, a=2 * mp.contraction_radius), xi_count=32, depth=5
        )
        assert suff and g <= 0.5 + 1e-9

    def test_gamma_tight_radius_not_sufficient(self):
        mp = MapParams(p=2, m=0, s=0.3)
        g, suff = gamma_estimate(
            SolenoidParams(map=mp, a=mp.contraction_radius / 2), xi_count=32, depth=5
        )
        assert not suff and g > 1.0

    def test_gamma_fig2b_parameters(self):
        from padic_fractal.complex_map import s_zero

        mp = MapParams(p=3, m=math.inf, s=s_zero(3) - 0.02)
        g, suff = gamma_estimate(SolenoidParams(map=mp, a=2.5), xi_count=64, depth=5)
        assert suff and g < 1.0

    def test_delta_tilde_matches_plane_bound(self):
        mp = MapParams(p=2, m=0, s=0.3)
        cert = delta_tilde_certificate(SolenoidParams(map=mp, a=2.0), xi_count=4, search_depth=6)
        assert cert.delta_lower == pytest.approx(8 / 7, abs=1e-12)
        assert cert.verdict == "certified-embedding"
        assert cert.gamma is not None

    def test_delta_tilde_equals_delta_infinite_order(self):
        from padic_fractal.complex_map import delta_certificate

        mp = MapParams(p=2, m=math.inf, s=0.3)
        plane = delta_certificate(mp, search_depth=7)
        # searching only the zero fiber reproduces the plane search exactly
        matched = delta_tilde_certificate(SolenoidParams(map=mp, a=2.0), xi_count=1, search_depth=7)
        assert matched.delta_empirical == pytest.approx(plane.delta_empirical, abs=1e-12)
        # a wider circle grid can only find smaller minima, never below the bound
        tor = delta_tilde_certificate(SolenoidParams(map=mp, a=2.0), xi_count=6, search_depth=7)
        assert tor.delta_empirical <= plane.delta_empirical + 1e-9
        assert tor.delta_empirical >= tor.delta_lower - 1e-9

    def test_above_threshold_unknown(self):
        mp = MapParams(p=2, m=0, s=0.6)
        cert = delta_tilde_certificate(SolenoidParams(map=mp, a=2.0), xi_count=3, search_depth=5)
        assert cert.delta_lower == 0.0
        assert cert.verdict in ("unknown", "empirically-injective")


class TestFlow:
    def setup_method(self):
        from padic_fractal.complex_map import s_zero

        self.params = SolenoidParams(
            map=MapParams(p=3, m=math.inf, s=s_zero(3) - 0.02, depth=55), a=2.5
        )
        self.tm = TorusMap(self.params)

    def _fd(self, f, h):
        plus = self.tm.embed(orbit(f, Fraction(h).limit_denominator(10**12)))
        minus = self.tm.embed(orbit(f, Fraction(-h).limit_denominator(10**12)))
        return (plus - minus) / (2 * h)

    def test_requires_infinite_order(self):
        tm = TorusMap(SolenoidParams(map=MapParams(p=2, m=0, s=0.3), a=2.0))
        with pytest.raises(ValueError):
            tm.vector_field(pt(0, 0))

    def test_central_difference_second_order(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            f = SolenoidPoint(
                Fraction(int(rng.integers(0, 997)), 997),
                from_int(int(rng.integers(0, 3**6)), 3, 6),
            )
            gam = self.tm.vector_field(f)
            r1 = float(np.linalg.norm(self._fd(f, 1e-3) - gam))
            r2 = float(np.linalg.norm(self._fd(f, 1e-4) - gam))
            assert r1 / max(r2, 1e-300) > 50.0

    def test_fiber_time_derivative_identity(self):
        # d/dt of the fiber series equals (2 pi i / p) times the s/p series
        sub_map = self.tm.scaled(1.0 / 3.0)
        x = from_int(17, 3, 6)
        for t0 in (0.21, 0.73):
            rhs = (2j * math.pi / 3) * sub_map.fiber_value(t0, x)
            res = []
            for h in (1e-3, 1e-4):
                fd = (self.tm.fiber_value(t0 + h, x) - self.tm.fiber_value(t0 - h, x)) / (2 * h)
                res.append(abs(fd - rhs))
            assert res[0] / max(res[1], 1e-300) > 50.0

    def test_closed_form_spot_value(self):
        mp = MapParams(p=2, m=math.inf, s=0.3, depth=60)
        tm = TorusMap(SolenoidParams(map=mp, a=2.0))
        spot = (2j * math.pi / 2) * tm.scaled(0.5).fiber_value(0, from_int(0, 2))
        assert spot == pytest.approx(1j * math.pi / (1 - 0.15), abs=1e-10)

    def test_flow_compatibility_along_orbit(self):
        f = pt(Fraction(1, 5), 7, p=3, depth=6)
        for t in (Fraction(1, 3), Fraction(7, 4)):
            ft = orbit(f, t)
            gam = self.tm.vector_field(ft)
            r1 = float(np.linalg.norm(self._fd(ft, 1e-3) - gam))
            assert r1 < 1e-3

    def test_rk4_integration_stays_near_image(self):
        xi_count = 128
        report = integrate_field(
            self.tm, pt(0, 0, p=3, depth=5), t_end=0.5, steps=80, xi_count=xi_count, depth=4
        )
        # drift against the sampled image is bounded by the circle-sampling
        # gap of the lookup cloud; the endpoint compares to the exact orbit
        gap = 2 * math.pi * abs(self.params.a) / xi_count
        assert report["max_image_drift"] < 1.5 * gap
        assert report["final_error"] < 0.05


class TestPushThrough:
    def setup_method(self):
        self.mp = MapParams(p=3, m=math.inf, s=0.2, depth=40)
        self.tm = TorusMap(SolenoidParams(map=self.mp, a=2.5))
        self.pm = PlaneMap(self.mp)

    def test_unit_ball_composition(self):
        for r in (0, 5, 11):
            x = from_int(r, 3, 6)
            via_j = self.tm.push_plane(x)
            direct = self.tm.embed(SolenoidPoint(Fraction(0), x))
            assert np.allclose(via_j, direct, atol=EPS)
            assert self.tm.fiber_value(0, x) == pytest.approx(self.pm.value(x), abs=EPS)

    def test_integral_series_equals_fiber_series(self):
        # the integral part of the plane series at x equals the fiber
        # series at (fractional part, integral part): 200 seeded points
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(200):
            num = int(rng.integers(0, 3**10))
            x = expand(Fraction(num, 81), 3, 16)
            frac, integral_part = x.split()
            lhs = self.pm.parts(x)[1]
            rhs = self.tm.fiber_value(frac, integral_part)
            worst = max(worst, abs(lhs - rhs))
        assert worst <= 2 * self.mp.tail_bound + EPS

    def test_local_isometry_within_unit_ball(self):
        rng = np.random.default_rng(9)
        for _ in range(40):
            shift = Fraction(int(rng.integers(0, 81)), 81)
            ra, rb = int(rng.integers(0, 3**6)), int(rng.integers(0, 3**6))
            xa = expand(shift + ra, 3, 14)
            xb = expand(shift + rb, 3, 14)
            d3 = float(np.linalg.norm(self.tm.push_plane(xa) - self.tm.push_plane(xb)))
            d2 = abs(self.pm.value(xa) - self.pm.value(xb))
            assert d3 == pytest.approx(d2, abs=1e-9)


class TestCloudValidation:
    def test_rejects_mismatched_labels(self):
        tm = TorusMap(SolenoidParams(map=MapParams(p=2, m=0, s=0.3), a=2.0))
        cloud = tm.cloud(2, 2)
        with pytest.raises(ValueError):
            PointCloud3D(points=cloud.points, labels=cloud.labels[:-1], params=cloud.params)

    def test_rejects_duplicate_labels(self):
        tm = TorusMap(SolenoidParams(map=MapParams(p=2, m=0, s=0.3), a=2.0))
        cloud = tm.cloud(2, 2)
        labels = cloud.labels.copy()
        labels[1] = labels[0]
        with pytest.raises(ValueError):
            PointCloud3D(points=cloud.points, labels=labels, params=cloud.params)
