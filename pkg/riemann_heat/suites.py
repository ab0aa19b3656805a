"""
Verification suites run by `riemann-heat verify`.

Each suite compares library results against an independent oracle (closed
forms, a second formula, a semigroup or transform identity) and returns
CheckRecord objects: the measured error, the tolerance and pass/fail.
"""

import logging
import math
from collections import OrderedDict
import numpy as np

from . import specfun
from . import geometry
from . import kernels
from . import quotient
from .json_mixin import JsonMixin
from .specfun import ToleranceBudget, DecayHint, RadialProfile
from .geometry import SurfaceKind, Point, SurfaceGrid, ScalarField, BiTensor1
from .kernels import FormField

log = logging.getLogger(__name__)

SURFACES = (SurfaceKind.EUCLIDEAN, SurfaceKind.SPHERE, SurfaceKind.HYPERBOLIC)

# Seed for the random point pairs used by the suites.
SEED = 20170301


class CheckRecord(JsonMixin):

    """
    One verification check: measured error against tolerance.
    """

    json_atts = ["suite", "name", "error", "tolerance", "passed"]

    def __init__(self, suite=None, name=None, error=np.nan, tolerance=0.0):
        self.suite = suite
        self.name = name
        self.error = float(error)
        self.tolerance = float(tolerance)
        self.passed = bool(self.error <= self.tolerance)

    def __repr__(self):
        return "CheckRecord({!r}, {!r}, {!r}, {!r})".format(
            self.suite, self.name, self.error, self.tolerance)


class Checker(object):

    "Collects records for one suite, applying an optional tolerance override."

    def __init__(self, suite, tol=None):
        self.suite = suite
        self.tol = tol
        self.records = []

    def check(self, name, error, tolerance):
        if self.tol is not None:
            tolerance = self.tol
        record = CheckRecord(self.suite, name, error, tolerance)
        self.records.append(record)
        level = logging.INFO if record.passed else logging.WARNING
        log.log(level, "{} {}: error {:.3g} tolerance {:.3g}".format(
            self.suite, name, record.error, tolerance))
        return record


def budget(tol):
    return ToleranceBudget(abs_tol=tol)


def _ball_grid(kind, center_radius, t, tol, n_angular=64):
    "Grid about the origin covering the kernel mass of points within center_radius."
    if kind == SurfaceKind.SPHERE:
        return SurfaceGrid(kind, 64, 128), 0.0
    reach = kernels.kernel_radius(kind, t, tol)
    radius = center_radius + reach
    return SurfaceGrid(kind, radius=radius, n_angular=n_angular), kernels.tail_mass(kind, reach, t)


# ---------------------------------------------------------------- suites

def normalization(tol=None):
    "Total mass of K0(x, ., t) is 1 on every surface."
    checker = Checker("normalization", tol)
    work = budget(1e-10)
    for kind in SURFACES:
        for t in (0.1, 1.0):
            field = ScalarField(lambda c1, c2, kind=kind, t=t:
                                kernels.k0_profile(kind, c1, t, work)[0])
            grid, _ = _ball_grid(kind, 0.0, t, 1e-10)
            value, _ = geometry.integrate_surface(kind, field, budget(1e-7), grid=grid)
            checker.check("{} t={}".format(kind, t), abs(value - 1.0), 1e-6)
    return checker.records


def _composition(kind, x, y, s, t, work):
    "Quadrature of the integral over z of K0(x, z, s) K0(z, y, t)."
    reach = max(x.c1, y.c1) if kind != SurfaceKind.SPHERE else 0.0
    grid, _ = _ball_grid(kind, reach, max(s, t), 1e-10, n_angular=128)
    dx = geometry.distance_arrays(kind, x.c1, x.c2, grid.c1, grid.c2)
    dy = geometry.distance_arrays(kind, grid.c1, grid.c2, y.c1, y.c2)
    first = kernels.k0_profile(kind, dx, s, work)[0]
    second = kernels.k0_profile(kind, dy, t, work)[0]
    return float(np.dot(first * second, grid.weights))


def semigroup(tol=None):
    "K0(s) composed with K0(t) equals K0(s + t)."
    checker = Checker("semigroup", tol)
    work = budget(1e-10)
    (s, t) = (0.2, 0.3)
    for kind in SURFACES:
        x = Point(kind, 0.4, 0.0)
        y = Point(kind, 0.6, 1.0)
        composed = _composition(kind, x, y, s, t, work)
        direct = kernels.k0(kind, x, y, s + t, work).value
        tolerance = 1e-4 if kind == SurfaceKind.SPHERE else 1e-3
        checker.check("{} s={} t={}".format(kind, s, t), abs(composed - direct), tolerance)
    return checker.records


def residual(tol=None):
    "Centered difference heat equation residuals of K0 and K1."
    checker = Checker("residual", tol)
    work = budget(1e-11)
    t = 0.5
    for kind in SURFACES:
        source = Point(kind, 0.7, 0.3)
        x = Point(kind, 1.1, 1.2)
        for degree in (0, 1):
            history = kernels.kernel_history(kind, source, degree, (0.6, 0.8), work)
            error = kernels.heat_residual(kind, history, x, t, degree=degree)
            checker.check("{} K{}".format(kind, degree), error, 1e-3)
    return checker.records


def dual_h2(tol=None):
    "Hyperbolic K0: spectral integral against the McKean integral."
    checker = Checker("dual-h2", tol)
    work = budget(1e-9)
    origin = Point(SurfaceKind.HYPERBOLIC, 0.0)
    radii = np.linspace(0.1, 3.0, 10)
    for t in np.linspace(0.1, 2.0, 10):
        mckean = kernels.k0_h2_mckean(radii, t, work)
        for (r, other) in zip(radii, mckean):
            spectral = kernels.k0(SurfaceKind.HYPERBOLIC, origin,
                                  Point(SurfaceKind.HYPERBOLIC, r), t, work).value
            checker.check("r={:.4g} t={:.4g}".format(r, t), abs(spectral - other), 1e-6)
    return checker.records


def _random_points(random, kind, n):
    top = math.pi if kind == SurfaceKind.SPHERE else 3.0
    c1 = random.uniform(0.05, top - 0.05, n)
    c2 = random.uniform(0.0, geometry.TWO_PI, n)
    return [Point(kind, a, b) for (a, b) in zip(c1, c2)]


def euclid_k1(tol=None):
    "Plane closed forms: K0 at the diagonal, K1 in polar coframes, K2 and the (I + **) identity."
    checker = Checker("euclid-k1", tol)
    plane = SurfaceKind.EUCLIDEAN
    random = np.random.RandomState(SEED)
    origin = Point(plane, 0.0)
    value = kernels.k0(plane, origin, origin, 0.25).value
    checker.check("k0 diagonal t=0.25", abs(value - 1 / math.pi), 1e-12)
    xs = _random_points(random, plane, 100)
    ys = _random_points(random, plane, 100)
    times = random.uniform(0.1, 2.0, 100)
    worst = 0.0
    for (x, y, t) in zip(xs, ys, times):
        pipeline = kernels.k1(plane, x, y, t).as_array()
        closed = (kernels.k0(plane, x, y, t).value *
                  np.dot(geometry.frame_rotation(x.c2), geometry.frame_rotation(y.c2).T))
        worst = max(worst, float(np.max(np.abs(pipeline - closed))))
    checker.check("k1 polar closed form, 100 pairs", worst, 1e-8)
    worst = 0.0
    for kind in SURFACES:
        for (x, y) in zip(_random_points(random, kind, 5), _random_points(random, kind, 5)):
            t = random.uniform(0.1, 1.0)
            worst = max(worst, abs(kernels.k2(kind, x, y, t).value - kernels.k0(kind, x, y, t).value))
    checker.check("k2 equals k0", worst, 1e-12)
    star = np.array([[0.0, -1.0], [1.0, 0.0]])
    worst = 0.0
    for _ in range(20):
        m = random.normal(size=(2, 2))
        expected = m + np.dot(star, np.dot(m, star.T))
        got = geometry.apply_i_plus_star(BiTensor1.from_array(m)).as_array()
        worst = max(worst, float(np.max(np.abs(got - expected))))
    checker.check("(I + *x *y) identity", worst, 1e-12)
    return checker.records


def _sphere_points():
    return [Point(SurfaceKind.SPHERE, phi, theta) for phi in (0.4, 1.1, 2.0) for theta in (0.3, 2.5)]


def intertwine(tol=None):
    "Sphere eigenfunction decay and d e^{-t Delta0} = e^{-t Delta1} d."
    checker = Checker("intertwine", tol)
    sphere = SurfaceKind.SPHERE
    work = budget(1e-10)
    points = _sphere_points()
    phi = np.array([p.c1 for p in points])
    t = 0.3
    for n in (1, 2, 3):
        field = FormField(0, lambda c1, c2, n=n: specfun.legendre_p(n, np.cos(c1)))
        result = kernels.apply_k0(sphere, field, t, points, work)
        expected = math.exp(-n * (n + 1) * t) * specfun.legendre_p(n, np.cos(phi))
        checker.check("P{} decay t={}".format(n, t),
                      float(np.max(np.abs(result.values - expected))), 1e-6)
    # d cos(phi) = -sin(phi) dphi
    field = FormField(1, lambda c1, c2: (-np.sin(c1), 0.0 * c1))
    result = kernels.apply_k1(sphere, field, t, points, work)
    expected = math.exp(-2 * t) * np.stack([-np.sin(phi), 0.0 * phi], axis=1)
    checker.check("dP1 decay t={}".format(t), float(np.max(np.abs(result.values - expected))), 1e-4)
    t = 0.5
    h = 1e-3
    shapes = [
        ("cos", lambda c1, c2: np.cos(c1), lambda c1, c2: (-np.sin(c1), 0.0 * c1)),
        ("P2", lambda c1, c2: specfun.legendre_p(2, np.cos(c1)),
         lambda c1, c2: (-3 * np.cos(c1) * np.sin(c1), 0.0 * c1)),
    ]
    for (name, f, df) in shapes:
        scalar = FormField(0, f, bound=1.0)
        one_form = FormField(1, df, bound=1.5)
        rhs = kernels.apply_k1(sphere, one_form, t, points, work).values
        lhs = []
        for p in points:
            stencil = [Point(sphere, p.c1 + h, p.c2), Point(sphere, p.c1 - h, p.c2),
                       Point(sphere, p.c1, p.c2 + h), Point(sphere, p.c1, p.c2 - h)]
            v = kernels.apply_k0(sphere, scalar, t, stencil, work).values
            lhs.append(((v[0] - v[1]) / (2 * h), (v[2] - v[3]) / (2 * h * math.sin(p.c1))))
        checker.check("d then heat, f={} t={}".format(name, t),
                      float(np.max(np.abs(np.array(lhs) - rhs))), 1e-4)
    return checker.records


def tiling(tol=None):
    "Image sums on flat and hyperbolic quotients against Fourier oracles and symmetries."
    checker = Checker("tiling", tol)
    torus = quotient.QuotientSurface(quotient.CoveringGroupSpec.lattice((1.0, 0.0), (0.0, 1.0)))
    sharp = budget(1e-13)
    origin = Point(SurfaceKind.EUCLIDEAN, 0.0)
    offsets = np.linspace(0.0, 0.8, 5)
    for t in (0.1, 0.25, 1.0):
        worst = 0.0
        for a in offsets:
            for b in offsets:
                x = Point.from_cartesian(a, b)
                images = quotient.k0_quotient(torus, x, origin, t, sharp).value
                fourier = quotient.torus_fourier_oracle(torus.group, x, origin, t, sharp).value
                worst = max(worst, abs(images - fourier))
        checker.check("theta identity t={}".format(t), worst, 1e-10)
    long_time = quotient.k0_quotient(torus, origin, Point.from_cartesian(0.3, 0.7), 20.0,
                                     budget(1e-12)).value
    checker.check("long time limit t=20", abs(long_time - 1.0 / torus.group.area), 1e-10)
    fourier = quotient.torus_fourier_oracle(torus.group, origin, origin, 20.0, sharp).value
    checker.check("fourier long time t=20", abs(fourier - 1.0), 1e-12)

    random = np.random.RandomState(SEED)
    finest = budget(1e-15)
    worst = 0.0
    for _ in range(5):
        x = torus.representative(Point.from_cartesian(*random.uniform(0, 1, 2)))
        y = torus.representative(Point.from_cartesian(*random.uniform(0, 1, 2)))
        g = torus.group.element(*random.randint(-3, 4, 2))
        moved = torus.representative(quotient.act(g, y))
        worst = max(worst, abs(quotient.k0_quotient(torus, x, y, 0.2, finest).value -
                               quotient.k0_quotient(torus, x, moved, 0.2, finest).value))
    checker.check("periodicity", worst, 1e-12)

    cylinder = quotient.QuotientSurface(quotient.CoveringGroupSpec.cyclic((1.0, 0.0)))
    (dx, dy, t) = (0.3, 0.4, 0.25)
    images = quotient.k0_quotient(cylinder, Point.from_cartesian(dx, dy), origin, t, sharp).value
    n = np.arange(-20, 21)
    circle = math.fsum((np.exp(-4 * math.pi ** 2 * n * n * t) * np.cos(2 * math.pi * n * dx)).tolist())
    expected = circle * math.exp(-dy * dy / (4 * t)) / math.sqrt(4 * math.pi * t)
    checker.check("flat cylinder fourier t={}".format(t), abs(images - expected), 1e-10)

    hyperbolic = quotient.QuotientSurface(quotient.CoveringGroupSpec.hyperbolic_cyclic(1.5))
    x = Point(SurfaceKind.HYPERBOLIC, 0.4, 0.5)
    y = Point(SurfaceKind.HYPERBOLIC, 0.3, 2.0)
    work = budget(1e-12)
    before = quotient.k0_quotient(hyperbolic, x, y, 0.5, work).value
    after = quotient.k0_quotient(hyperbolic, quotient.translate_along_axis(x, 0.4),
                                 quotient.translate_along_axis(y, 0.4), 0.5, work).value
    checker.check("hyperbolic cylinder axis invariance", abs(before - after), 1e-10)

    mass = quotient.integrate_fundamental_domain(
        torus, lambda z: quotient.k0_quotient(torus, Point.from_cartesian(0.2, 0.1), z, 0.1,
                                              budget(1e-12)).value)
    checker.check("torus normalization t=0.1", abs(mass - 1.0), 1e-8)

    carried = quotient.apply_k1_flat(torus, lambda X, Y: (1.0, 0.0), 20.0,
                                     [Point.from_cartesian(0.25, 0.5)], n=8, budget=budget(1e-12))
    checker.check("torus constant dx t=20", float(np.max(np.abs(carried[0] - (1.0, 0.0)))), 1e-8)
    return checker.records


def _relative_l2(got, expected):
    return float(np.linalg.norm(got - expected) / np.linalg.norm(expected))


class TransformProfile(object):

    """
    Radial test profile for the Mehler-Fock pair, with a majorant
    scale * (1 + rho)**degree * exp(-rate * rho**2) of its forward transform
    and, when known, the transform in closed form.
    """

    def __init__(self, name, profile, rate, scale, degree, spectrum=None):
        self.name = name
        self.profile = profile
        self.rate = rate
        self.scale = scale
        self.degree = degree
        self.spectrum = spectrum

    def forward(self, rho, work):
        return specfun.mehler_fock_forward(self.profile, rho, work)

    def inverse(self, fhat, r, work):
        return specfun.mehler_fock_inverse(fhat, r, work, rate=self.rate, scale=self.scale,
                                           degree=self.degree)


def transform_profiles(s=0.5, work=None):
    "gaussian: r exp(-r^2); tanh: tanh(r) exp(-r^2/2); heat: the radial derivative of K0 at time s."
    work = specfun.get_budget(work)

    def heat_spectrum(rho):
        lam = 0.25 + np.asarray(rho, dtype=float) ** 2
        return lam * np.exp(-lam * s)

    return OrderedDict([
        ("gaussian", TransformProfile(
            "gaussian", RadialProfile(lambda r: r * np.exp(-r * r), DecayHint.gaussian(0.5)),
            0.2, 50.0, 2)),
        ("tanh", TransformProfile(
            "tanh", RadialProfile(lambda r: np.tanh(r) * np.exp(-0.5 * r * r),
                                  DecayHint.gaussian(0.5)),
            0.2, 50.0, 2)),
        ("heat", TransformProfile(
            "heat", RadialProfile(lambda r: kernels.heat_profile_h2(r, s, work),
                                  DecayHint.gaussian(1 / (5 * s))),
            s, 1.0, 2, heat_spectrum)),
    ])


def mehler_fock(tol=None):
    "Order one Mehler-Fock round trips, the heat profile transform and radial 1-form evolution."
    checker = Checker("mehler-fock", tol)
    work = budget(1e-8)
    s = 0.5
    profiles = transform_profiles(s, work)
    r = np.linspace(0.05, 3.0, 30)
    for name in ("gaussian", "tanh"):
        shape = profiles[name]
        fhat = lambda rho, shape=shape: shape.forward(rho, work)[0]
        back, _ = shape.inverse(fhat, r, work)
        checker.check("round trip " + name, _relative_l2(back, shape.profile(r)), 1e-4)

    heat = profiles["heat"]
    rho = np.array([0.3, 1.0, 2.5])
    transformed, _ = heat.forward(rho, work)
    checker.check("heat profile transform s={}".format(s),
                  float(np.max(np.abs(transformed - heat.spectrum(rho)))), 1e-6)

    t = 0.3
    gaussian = profiles["gaussian"]
    profile = gaussian.profile
    evolved = lambda rho: gaussian.forward(rho, work)[0] * np.exp(-(0.25 + rho * rho) * t)
    points = [Point(SurfaceKind.HYPERBOLIC, radius, 0.7) for radius in (0.5, 1.0)]
    radii = np.array([p.c1 for p in points])
    spectral, _ = gaussian.inverse(evolved, radii, work)
    field = FormField(1, lambda c1, c2: (profile(c1), 0.0 * c1), bound=0.5,
                      decay=DecayHint.gaussian(0.5, scale=1.0))
    direct = kernels.apply_k1(SurfaceKind.HYPERBOLIC, field, t, points, work).values
    expected = np.stack([spectral, 0.0 * spectral], axis=1)
    checker.check("radial 1-form evolution t={}".format(t),
                  float(np.max(np.abs(direct - expected))), 1e-4)
    return checker.records


SUITES = OrderedDict([
    ("normalization", normalization),
    ("semigroup", semigroup),
    ("residual", residual),
    ("dual-h2", dual_h2),
    ("euclid-k1", euclid_k1),
    ("intertwine", intertwine),
    ("tiling", tiling),
    ("mehler-fock", mehler_fock),
])


def run_suites(name="all", tol=None):
    "Records of the named suite, or of every suite for 'all'."
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise specfun.DomainError("unknown suite: " + repr(name))
    records = []
    for suite in names:
        log.info("running suite " + suite)
        records.extend(SUITES[suite](tol))
    return records
