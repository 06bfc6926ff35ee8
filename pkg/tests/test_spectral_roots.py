"""Root catalogues, reciprocal pairs and rational kernel reconstruction."""
import numpy as np
import numpy.polynomial.polynomial as P
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from lattice_wh.lattice_core import (DegenerateConfigurationError, LatticeFrequency,
                                     WaveguideGeometry, chebyshev_V, cutoff_frequency, mode,
                                     upper_cutoff_frequency)
from lattice_wh.spectral_roots import (denominator_roots, denominator_z_roots, kernel_data,
                                       roots_of_one_minus_V, roots_of_V, x_pair_from_z)


def bisection_roots(fn, count_hint, grid=20001):
    """Sign-change roots of a real function on [-1, 1] (test oracle)."""
    zs = np.linspace(-1, 1, grid)
    vals = np.array([fn(z) for z in zs])
    roots = []
    for a, b, fa, fb in zip(zs[:-1], zs[1:], vals[:-1], vals[1:]):
        if fa == 0:
            roots.append(a)
        elif fa * fb < 0:
            for _ in range(80):
                mid = 0.5 * (a + b)
                if fn(a) * fn(mid) <= 0:
                    b = mid
                else:
                    a = mid
            roots.append(0.5 * (a + b))
    return np.sort(np.array(roots))


def admissible_omega(g, omega):
    N = g.N
    edges = [cutoff_frequency(j, N) for j in range(1, N)] + \
        [upper_cutoff_frequency(j, N) for j in range(1, N)] + [2.0]
    return min(abs(omega - e) for e in edges) > 1e-6


class TestRootsOfV:
    def test_small(self):
        assert roots_of_V(1) == pytest.approx([0.0], abs=1e-16)
        assert roots_of_V(2) == pytest.approx([0.5, -0.5])

    def test_j9_against_bisection(self):
        oracle = bisection_roots(lambda z: chebyshev_V(9, z).real, 9)
        assert len(oracle) == 9
        np.testing.assert_allclose(np.sort(roots_of_V(9)), oracle, atol=1e-12)

    @given(st.integers(1, 30))
    def test_strictly_decreasing_and_roots(self, J):
        z = roots_of_V(J)
        assert len(z) == J and np.all(np.diff(z) < 0)
        assert np.max(np.abs(chebyshev_V(J, z))) <= 1e-10 * J


class TestRootsOfOneMinusV:
    def test_j2(self):
        f1, f2 = roots_of_one_minus_V(2)
        assert f1.size == 0
        assert f2 == pytest.approx([np.sqrt(0.5), -np.sqrt(0.5)])

    def test_j3(self):
        f1, f2 = roots_of_one_minus_V(3)
        allz = np.concatenate([f1, f2])
        assert allz.size == 3
        assert np.max(np.abs(1 - chebyshev_V(3, allz))) <= 1e-12

    def test_j4(self):
        f1, _ = roots_of_one_minus_V(4)
        assert f1 == pytest.approx([0.0], abs=1e-16)
        assert 1 - chebyshev_V(4, 0.0) == 0

    @pytest.mark.parametrize("J", range(1, 16))
    def test_completeness_against_polynomial_roots(self, J):
        f1, f2 = roots_of_one_minus_V(J)
        ours = np.sort(np.concatenate([f1, f2]))
        assert ours.size == J
        # power-basis coefficients of V_J from the three-term recurrence
        a, b = P.Polynomial([1.0]), P.Polynomial([0.0, 2.0])
        for _ in range(J - 1):
            a, b = b, P.Polynomial([0.0, 2.0]) * b - a
        oracle = np.sort((1 - b).roots().real)
        # double roots at z = 0 (J divisible by 4) are only resolved to sqrt(eps)
        np.testing.assert_allclose(ours, oracle, atol=1e-6)

    @pytest.mark.parametrize("J", [4, 8, 12])
    def test_double_root_at_origin(self, J):
        f1, f2 = roots_of_one_minus_V(J)
        assert np.sum(np.abs(f1) < 1e-15) == 1 and np.sum(np.abs(f2) < 1e-15) == 1
        h = 1e-4
        assert abs(1 - chebyshev_V(J, h)) < 10 * J * J * h * h


class TestReciprocalPair:
    def test_evanescent_pair(self):
        pr = x_pair_from_z(-1.0, LatticeFrequency(0.5))
        gamma = -5.75
        disc = np.sqrt(gamma * gamma - 4)
        assert pr.x_in == pytest.approx((-gamma - disc) / 2, abs=1e-14)
        assert pr.x_out == pytest.approx((-gamma + disc) / 2, abs=1e-13)
        assert pr.x_in.real == pytest.approx(0.1795, abs=1e-4)
        assert pr.x_in * pr.x_out == pytest.approx(1, abs=1e-12)
        assert pr.x_in + pr.x_out == pytest.approx(-gamma, abs=1e-12)

    def test_propagating_pair_split_by_probe(self):
        pr = x_pair_from_z(1.0, LatticeFrequency(0.5))
        assert abs(abs(pr.x_in) - 1) < 1e-12 and abs(abs(pr.x_out) - 1) < 1e-12
        assert pr.x_in.imag > 0
        lossy = x_pair_from_z(1.0, LatticeFrequency(0.5, 1e-6))
        assert abs(lossy.x_in) < 1 and abs(lossy.x_in - pr.x_in) < 1e-5

    def test_confluent_flag(self):
        pr = x_pair_from_z(0.5, LatticeFrequency(1.0))      # gamma = -2
        assert pr.confluent and pr.x_in == pytest.approx(1.0, abs=1e-7)

    @given(st.floats(-1, 1), st.floats(0.05, 2.8))
    def test_reciprocity(self, z, omega):
        assume(abs(omega - 2) > 1e-3)
        pr = x_pair_from_z(z, LatticeFrequency(omega))
        assume(not pr.confluent)
        assert abs(pr.x_in * pr.x_out - 1) <= 1e-12
        assert abs(pr.x_in + pr.x_out + (2 * z + omega ** 2 - 4)) <= 1e-12
        assert abs(pr.x_in) <= 1 + 1e-12 <= abs(pr.x_out) + 2e-12


class TestKernelData:
    def test_l2_k0(self):
        g = WaveguideGeometry.symmetric_normal_form(2, 4)
        k0 = kernel_data("K0", g, LatticeFrequency(1.1))
        assert k0.J == 1 and len(k0.zeros) == 0
        assert k0.poles[0].z == pytest.approx(0.0, abs=1e-16)

    def test_l0_2_k1(self):
        g = WaveguideGeometry.symmetric_normal_form(3, 2)
        assert kernel_data("K1", g, LatticeFrequency(1.1)).J == 1

    @pytest.mark.parametrize("l0", range(2, 14))
    def test_k1_pole_count_is_ceil_half(self, l0):
        g = WaveguideGeometry.symmetric_normal_form(3, l0)
        k1 = kernel_data("K1", g, LatticeFrequency(0.93))
        assert k1.J == (l0 + 1) // 2
        # every listed pole is a genuine pole: 1 - V_{l0-1} = 0 while V_{l0-2} != 0
        h = 1e-6
        for pr in k1.poles:
            assert abs(1 - chebyshev_V(l0 - 1, pr.z)) < 1e-12
            ratio = chebyshev_V(l0 - 2, pr.z + h) / (1 - chebyshev_V(l0 - 1, pr.z + h))
            assert abs(ratio) > 1e3

    @pytest.mark.parametrize("l0", range(2, 14))
    def test_k1_surviving_zeros_against_cancellation_oracle(self, l0):
        g = WaveguideGeometry.symmetric_normal_form(3, l0)
        k1 = kernel_data("K1", g, LatticeFrequency(0.93))
        survivors = [z for z in roots_of_V(l0 - 2)
                     if abs(1 - chebyshev_V(l0 - 1, z)) > 1e-9]
        np.testing.assert_allclose(sorted(pr.z for pr in k1.zeros), sorted(survivors), atol=1e-14)
        # completeness: poles plus cancelled roots exhaust the roots of 1 - V_{l0-1}
        assert k1.J + k1.cancelled.size == l0 - 1

    def test_l10_reconstruction(self):
        g = WaveguideGeometry.symmetric_normal_form(10, 10)
        f = LatticeFrequency(1.5)
        rng = np.random.default_rng(1)
        x = rng.uniform(0.4, 2.5, 50) * np.exp(2j * np.pi * rng.uniform(size=50))
        for kind in ("K0", "K1"):
            k = kernel_data(kind, g, f)
            a, b = k.evaluate(x), k.evaluate_chebyshev(x)
            assert np.max(np.abs(a - b) / np.maximum(1, np.abs(b))) <= 1e-10

    @given(st.integers(2, 8), st.integers(2, 9), st.floats(0.1, 2.8))
    def test_reconstruction_property(self, l, l0, omega):
        g = WaveguideGeometry.symmetric_normal_form(l, l0)
        assume(admissible_omega(g, omega))
        f = LatticeFrequency(omega)
        try:
            ks = [kernel_data(kind, g, f) for kind in ("K0", "K1")]
        except DegenerateConfigurationError:
            assume(False)
        rng = np.random.default_rng(l * 100 + l0)
        x = rng.uniform(0.5, 2.0, 50) * np.exp(2j * np.pi * rng.uniform(size=50))
        for k in ks:
            a, b = k.evaluate(x), k.evaluate_chebyshev(x)
            assert np.max(np.abs(a - b) / np.maximum(1, np.abs(b))) <= 1e-10

    @pytest.mark.parametrize("l,l0,omega", [(10, 10, 1.5), (4, 5, 1.7), (3, 7, 0.8)])
    def test_residue_weights(self, l, l0, omega):
        g = WaveguideGeometry.symmetric_normal_form(l, l0)
        f = LatticeFrequency(omega)
        for kind in ("K0", "K1"):
            k = kernel_data(kind, g, f)
            for lam, b in list(zip(k.lam_in, k.b_in)) + list(zip(k.lam_out, k.b_out)):
                # central limit cancels the first-order term
                numeric = 0.5 * sum((x - lam) * k.evaluate_chebyshev(x)
                                    for x in (lam * (1 + 1e-5), lam * (1 - 1e-5)))
                assert abs(numeric - b * lam) <= 1e-5 * abs(b * lam)

    def test_requires_symmetric(self):
        from lattice_wh.lattice_core import AdmissibilityError
        with pytest.raises(AdmissibilityError):
            kernel_data("K0", WaveguideGeometry(0, 2, 3, 6), LatticeFrequency(1.0))


class TestDenominatorRoots:
    def test_count_l10(self, geom_10_10, freq_15):
        nu = denominator_roots(geom_10_10, freq_15)
        k0 = kernel_data("K0", geom_10_10, freq_15)
        k1 = kernel_data("K1", geom_10_10, freq_15)
        assert len(nu) == 14 == k0.J + k1.J

    @pytest.mark.parametrize("l,l0", [(l, l0) for l in range(2, 7) for l0 in range(2, 8)])
    def test_count_equals_j0_plus_j1(self, l, l0):
        assert len(denominator_z_roots(l, l0)) == (l - 1) + (l0 + 1) // 2

    def test_roots_satisfy_kernel_equation(self, geom_10_10, freq_15):
        k0 = kernel_data("K0", geom_10_10, freq_15)
        k1 = kernel_data("K1", geom_10_10, freq_15)
        for pr in denominator_roots(geom_10_10, freq_15):
            for x in (pr.x_in, pr.x_out):
                # polynomial form Q0 Q1 - x^2 P0 P1 avoids the kernel poles
                val = k0.Q(x) * k1.Q(x) - x * x * k0.P(x) * k1.P(x)
                scale = abs(k0.Q(x) * k1.Q(x)) + abs(x * x * k0.P(x) * k1.P(x))
                assert abs(val) <= 1e-9 * scale

    def test_propagating_roots_are_odd_mode_factors(self, geom_10_10, freq_15):
        nu = denominator_roots(geom_10_10, freq_15)
        for j, pr in enumerate(nu):
            md = mode(2 * j + 1, geom_10_10, freq_15)
            assert pr.x_in == pytest.approx(md.x_factor, abs=1e-12)

    def test_double_root_kept(self, caplog):
        # l=3, l0=5: cos(pi/2) is both a listed root and a cancelled root
        g = WaveguideGeometry.symmetric_normal_form(3, 5)
        with caplog.at_level("INFO"):
            nu = denominator_roots(g, LatticeFrequency(1.2))
        assert len(nu) == 5
        assert "double" in caplog.text
