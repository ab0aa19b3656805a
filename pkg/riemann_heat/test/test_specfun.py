from .. import specfun
from .. import kernels
import unittest
import math
import numpy as np
from scipy import special

try:
    import mpmath
except ImportError:
    mpmath = None


class TestToleranceBudget(unittest.TestCase):

    def test_defaults(self):
        b = specfun.ToleranceBudget()
        self.assertEqual(b.abs_tol, 1e-8)
        self.assertEqual(b.max_quad_depth, 40)
        self.assertEqual(b.max_series_terms, 5000)
        self.assertEqual(b.max_panels, 20000)

    def test_override(self):
        b = specfun.ToleranceBudget(abs_tol=1e-3, max_panels=7)
        self.assertEqual(b.abs_tol, 1e-3)
        self.assertEqual(b.max_panels, 7)
        h = b.halved()
        self.assertEqual(h.abs_tol, 5e-4)
        self.assertEqual(h.max_panels, 7)
        self.assertEqual(b.with_tol(1e-6).max_panels, 7)

    def test_invalid(self):
        with self.assertRaises(specfun.DomainError):
            specfun.ToleranceBudget(abs_tol=0.0)
        with self.assertRaises(ValueError):
            specfun.ToleranceBudget(abs_tol=-1.0)

    def test_get_budget(self):
        self.assertEqual(specfun.get_budget(None).abs_tol, 1e-8)
        self.assertEqual(specfun.get_budget(1e-4).abs_tol, 1e-4)
        b = specfun.ToleranceBudget(1e-5)
        self.assertIs(specfun.get_budget(b), b)


class TestQuadrature(unittest.TestCase):

    def test_exponential(self):
        (value, err) = specfun.integrate_adaptive(np.exp, 0.0, 1.0, 1e-12)
        self.assertAlmostEqual(value, math.e - 1, places=11)
        self.assertLess(err, 1e-11)

    def test_vector_valued(self):
        f = lambda x: np.stack([np.sin(x), np.cos(x)], axis=1)
        (value, err) = specfun.integrate_adaptive(f, 0.0, math.pi, 1e-10)
        np.testing.assert_allclose(value, [2.0, 0.0], atol=1e-9)

    def test_empty_interval(self):
        (value, err) = specfun.integrate_adaptive(np.exp, 1.0, 1.0)
        self.assertEqual(value, 0.0)
        self.assertEqual(err, 0.0)

    def test_error_estimate_covers_tighter_run(self):
        f = lambda x: np.exp(-x) * np.cos(5 * x) / (1 + x * x)
        for tol in (1e-4, 1e-7, 1e-10):
            (coarse, coarse_err) = specfun.integrate_adaptive(f, 0.0, 3.0, tol)
            (fine, fine_err) = specfun.integrate_adaptive(f, 0.0, 3.0, 0.5 * tol)
            self.assertLessEqual(abs(coarse - fine), coarse_err + fine_err)

    def test_reversed_bounds(self):
        with self.assertRaises(specfun.DomainError):
            specfun.integrate_adaptive(np.exp, 1.0, 0.0)

    def test_panel_limit(self):
        budget = specfun.ToleranceBudget(abs_tol=1e-14, max_panels=3)
        f = lambda x: np.sin(50 * x)
        with self.assertRaises(specfun.NonconvergenceError) as context:
            specfun.integrate_adaptive(f, 0.0, 10.0, budget)
        self.assertIn("achieved error estimate", str(context.exception))

    def test_semiinfinite_gaussian(self):
        f = lambda x: np.exp(-x * x)
        (value, err) = specfun.integrate_semiinfinite(f, 1.0, 1e-11)
        self.assertAlmostEqual(value, 0.5 * math.sqrt(math.pi), places=10)

    def test_semiinfinite_polynomial_weight(self):
        f = lambda x: x * x * np.exp(-0.5 * x * x)
        (value, err, radius) = specfun.integrate_semiinfinite(f, 0.5, 1e-10, degree=2,
                                                              full_output=True)
        self.assertAlmostEqual(value, math.sqrt(math.pi / 2), places=9)
        self.assertGreater(radius, 1.0)

    def test_tail_bound_decreases(self):
        bounds = [specfun.gaussian_tail_bound(r, 0.3, 2.0, 1) for r in (1.0, 2.0, 4.0, 8.0)]
        self.assertTrue(all(a > b for (a, b) in zip(bounds, bounds[1:])))
        radius = specfun.gaussian_tail_radius(0.3, 1e-9, 2.0, 1)
        self.assertLessEqual(specfun.gaussian_tail_bound(radius, 0.3, 2.0, 1), 1e-9)


class TestSphereSeries(unittest.TestCase):

    def test_tail_below_tolerance(self):
        for t in (1e-3, 0.1, 1.0, 20.0):
            n = specfun.sphere_series_terms(t, 1e-10)
            self.assertLessEqual(specfun.sphere_series_tail(n, t), 1e-10)
            # tail bound dominates the neglected terms
            m = np.arange(n + 1, n + 2000)
            neglected = np.sum((2 * m + 1) * np.exp(-m * (m + 1) * t)) / (4 * math.pi)
            self.assertLessEqual(neglected, specfun.sphere_series_tail(n, t) * (1 + 1e-12))

    def test_too_many_terms(self):
        budget = specfun.ToleranceBudget(max_series_terms=10)
        with self.assertRaises(specfun.NonconvergenceError):
            specfun.sphere_series_terms(1e-4, 1e-12, budget=budget)


class TestLegendre(unittest.TestCase):

    x = np.linspace(-1, 1, 11)

    def test_low_degrees(self):
        x = self.x
        np.testing.assert_allclose(specfun.legendre_p(0, x), np.ones_like(x))
        np.testing.assert_allclose(specfun.legendre_p(2, x), 0.5 * (3 * x * x - 1), atol=1e-15)
        np.testing.assert_allclose(specfun.legendre_p(3, x), 0.5 * (5 * x ** 3 - 3 * x), atol=1e-15)
        self.assertAlmostEqual(specfun.legendre_p(2, 0.5), -0.125)

    def test_order_one(self):
        x = self.x
        s = np.sqrt(1 - x * x)
        np.testing.assert_allclose(specfun.legendre_p1(1, x), -s, atol=1e-15)
        np.testing.assert_allclose(specfun.legendre_p1(2, x), -3 * x * s, atol=1e-15)

    def test_order_one_is_phi_derivative(self):
        phi = np.linspace(0.2, 2.9, 7)
        h = 1e-6
        for n in (1, 4, 9):
            slope = (specfun.legendre_p(n, np.cos(phi + h)) -
                     specfun.legendre_p(n, np.cos(phi - h))) / (2 * h)
            np.testing.assert_allclose(specfun.legendre_p1(n, np.cos(phi)), slope, atol=1e-7)

    def test_scipy_agreement(self):
        x = self.x
        for n in range(0, 12):
            np.testing.assert_allclose(specfun.legendre_p(n, x), special.eval_legendre(n, x),
                                       atol=1e-13)

    def test_series(self):
        x = np.linspace(-0.9, 0.9, 5)
        p = np.array([specfun.legendre_p(n, x) for n in range(7)])
        p1 = np.array([np.zeros_like(x)] + [specfun.legendre_p1(n, x) for n in range(1, 7)])
        c = np.array([0.5, -1.0, 0.25, 2.0, 0.0, 0.1, -0.3])
        np.testing.assert_allclose(specfun.legendre_series(c, x), np.dot(c, p), atol=1e-13)
        np.testing.assert_allclose(specfun.legendre_series(c, x, order=1), np.dot(c, p1), atol=1e-13)

    def test_product_formula(self):
        # P_n(cos a) P_n(cos b) is the angular average of P_n over the circle
        # at distance b from a point at distance a from the pole
        (a, b) = (0.7, 1.9)
        psi = np.linspace(0.0, 2 * math.pi, 64, endpoint=False)
        z = math.cos(a) * math.cos(b) + math.sin(a) * math.sin(b) * np.cos(psi)
        for n in (1, 3, 6):
            average = float(np.mean(specfun.legendre_p(n, z)))
            self.assertAlmostEqual(average, specfun.legendre_p(n, math.cos(a)) *
                                   specfun.legendre_p(n, math.cos(b)), places=13)

    def test_domain(self):
        with self.assertRaises(specfun.DomainError):
            specfun.legendre_p(2, 1.5)
        with self.assertRaises(specfun.DomainError):
            specfun.legendre_p(-1, 0.5)
        with self.assertRaises(specfun.DomainError):
            specfun.legendre_p1(0, 0.5)
        # tiny roundoff past the ends is clipped
        self.assertAlmostEqual(specfun.legendre_p(3, 1 + 4e-16), 1.0)


class TestConical(unittest.TestCase):

    def test_origin(self):
        self.assertEqual(specfun.conical_p(2.0, 0.0), 1.0)
        self.assertEqual(specfun.conical_p1(2.0, 0.0), 0.0)

    def test_elliptic_oracle(self):
        # P_{-1/2}(cosh r) = (2/pi) sech(r/2) K(tanh(r/2)**2)
        r = np.array([0.5, 1.0, 2.0, 4.0])
        expected = 2 / math.pi / np.cosh(0.5 * r) * special.ellipk(np.tanh(0.5 * r) ** 2)
        np.testing.assert_allclose(specfun.conical_p(0.0, r, 1e-12), expected, atol=1e-10)

    def test_symmetric_in_rho(self):
        self.assertEqual(specfun.conical_p(-1.5, 0.7), specfun.conical_p(1.5, 0.7))
        self.assertEqual(specfun.SpectralParameter(-2.0).rho, 2.0)
        self.assertEqual(specfun.SpectralParameter(2.0).lam, 4.25)

    def test_derivative(self):
        h = 1e-5
        for rho in (0.0, 0.8, 3.0):
            for r in (0.3, 1.5):
                slope = (specfun.conical_p(rho, r + h, 1e-13) -
                         specfun.conical_p(rho, r - h, 1e-13)) / (2 * h)
                self.assertAlmostEqual(specfun.conical_p1(rho, r, 1e-13), slope, places=6)

    def test_stacked_orders(self):
        (values, err) = specfun.conical_functions(np.array([0.5, 1.0]), np.array([1.0, 2.0]),
                                                  1e-10, orders=(0, 1))
        self.assertEqual(values.shape, (2, 2))
        self.assertAlmostEqual(values[0, 1], specfun.conical_p(1.0, 2.0, 1e-10), places=9)

    def test_negative_radius(self):
        with self.assertRaises(specfun.DomainError):
            specfun.conical_p(1.0, -0.1)

    @unittest.skipIf(mpmath is None, "mpmath is not installed")
    def test_mpmath_oracle(self):
        for rho in (0.25, 1.0, 4.0):
            for r in (0.4, 1.3, 3.0):
                exact = mpmath.legenp(-0.5 + 1j * rho, 0, mpmath.cosh(r), type=3)
                self.assertAlmostEqual(specfun.conical_p(rho, r, 1e-12), float(mpmath.re(exact)),
                                       places=9)


class TestDecayHint(unittest.TestCase):

    def test_exactly_one_kind(self):
        with self.assertRaises(specfun.DomainError):
            specfun.DecayHint()
        with self.assertRaises(specfun.DomainError):
            specfun.DecayHint(rate=1.0, radius=2.0)
        with self.assertRaises(specfun.DomainError):
            specfun.DecayHint.gaussian(-1.0)

    def test_line_mass(self):
        hint = specfun.DecayHint.gaussian(2.0, scale=3.0)
        expected = 3.0 * 0.5 * math.sqrt(math.pi / 2.0) * special.erfc(math.sqrt(2.0) * 1.5)
        self.assertAlmostEqual(hint.tail_mass(1.5, "line"), expected)

    def test_radius_for(self):
        hint = specfun.DecayHint.gaussian(0.5)
        for measure in specfun.DecayHint.measures:
            radius = hint.radius_for(1e-9, measure)
            self.assertLessEqual(hint.tail_mass(radius, measure), 1e-9 * (1 + 1e-6))

    def test_compact(self):
        hint = specfun.DecayHint.compact(3.0, tail=0.0)
        self.assertEqual(hint.radius_for(1e-12, "plane"), 3.0)
        self.assertEqual(hint.tail_mass(3.5, "plane"), 0.0)
        self.assertEqual(hint.tail_mass(1.0, "plane"), np.inf)

    def test_unknown_measure(self):
        with self.assertRaises(specfun.DomainError):
            specfun.DecayHint.gaussian(1.0).tail_mass(1.0, "sphere")


class TestMehlerFock(unittest.TestCase):

    def test_needs_decay_hint(self):
        profile = specfun.RadialProfile(lambda r: np.exp(-r * r))
        with self.assertRaises(specfun.DomainError):
            specfun.mehler_fock_forward(profile, 1.0)

    def test_needs_rate(self):
        with self.assertRaises(specfun.DomainError):
            specfun.mehler_fock_inverse(lambda rho: np.exp(-rho * rho), 1.0)

    def test_divergent_profile(self):
        profile = specfun.RadialProfile(lambda r: np.ones_like(r), specfun.DecayHint.gaussian(1.0))
        with self.assertRaises(specfun.DivergentProfileError):
            specfun.mehler_fock_forward(profile, np.array([0.5, 1.0]), 1e-6)

    def test_zero_profile(self):
        profile = specfun.RadialProfile(lambda r: np.zeros_like(r), specfun.DecayHint.gaussian(0.5))
        (value, err) = specfun.mehler_fock_forward(profile, np.array([0.0, 1.0, 3.0]), 1e-8)
        np.testing.assert_array_equal(value, np.zeros(3))

    def test_linear(self):
        hint = specfun.DecayHint.gaussian(0.5)
        f = lambda r: np.exp(-r * r)
        g = lambda r: r * r * np.exp(-2 * r * r)
        rho = np.array([0.3, 1.0, 2.5])
        budget = specfun.ToleranceBudget(1e-9)
        (first, first_err) = specfun.mehler_fock_forward(specfun.RadialProfile(f, hint), rho, budget)
        (second, second_err) = specfun.mehler_fock_forward(specfun.RadialProfile(g, hint), rho, budget)
        combined = specfun.RadialProfile(lambda r: 2.0 * f(r) - 3.0 * g(r), hint)
        (value, err) = specfun.mehler_fock_forward(combined, rho, budget)
        bound = err + 2.0 * first_err + 3.0 * second_err
        self.assertLess(float(np.max(np.abs(value - (2.0 * first - 3.0 * second)))), max(bound, 1e-12))

    def test_heat_profile_transform(self):
        s = 0.5
        budget = specfun.ToleranceBudget(1e-8)
        profile = specfun.RadialProfile(lambda r: kernels.heat_profile_h2(r, s, budget),
                                        specfun.DecayHint.gaussian(1 / (5 * s)))
        rho = np.array([0.5, 2.0])
        (value, err) = specfun.mehler_fock_forward(profile, rho, budget)
        lam = 0.25 + rho * rho
        np.testing.assert_allclose(value, lam * np.exp(-lam * s), atol=1e-6)

    def test_inverse_of_closed_form(self):
        # the inverse of lam exp(-lam s) is the radial derivative of K0
        s = 0.5
        budget = specfun.ToleranceBudget(1e-8)
        fhat = lambda rho: (0.25 + rho * rho) * np.exp(-(0.25 + rho * rho) * s)
        r = np.array([0.5, 1.5])
        (value, err) = specfun.mehler_fock_inverse(fhat, r, budget, rate=s, scale=1.0, degree=2)
        np.testing.assert_allclose(value, kernels.heat_profile_h2(r, s, budget), atol=1e-6)

    def test_from_samples(self):
        r = np.linspace(0, 4, 81)
        profile = specfun.RadialProfile.from_samples(r, np.exp(-r * r))
        self.assertAlmostEqual(float(profile(np.array(1.0))), math.exp(-1), places=4)
        self.assertEqual(float(profile(np.array(5.0))), 0.0)
        self.assertEqual(profile.decay.radius, 4.0)
