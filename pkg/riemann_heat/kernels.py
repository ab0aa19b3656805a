"""
Heat kernels for 0-, 1- and 2-forms on the euclidean plane, the unit
sphere and the hyperbolic plane.

K0 is evaluated from closed forms (plane), the Legendre series (sphere),
or the conical-function spectral integral (hyperbolic, with the McKean
integral as a second formula).  K1 is built from the radial generator
G(d, t), the integral over tau > t of K0(d, tau) with the constant mode
removed on the sphere:

    K1 = (I + *x *y) d_x d_y G = kappa * (gx (x) gy + *gx (x) *gy)

with kappa = G'' + G'/sn(d).  K2 equals K0 as a density against the unit
volume forms at x and y.
"""

import logging
import math
import numpy as np
from numpy.polynomial import chebyshev
from scipy import special, optimize

from . import specfun
from . import geometry
from .specfun import DomainError, NonconvergenceError, as_output, get_budget
from .geometry import SurfaceKind, BiTensor1, Point

log = logging.getLogger(__name__)

# Smallest supported heat time.
T_MIN = 1e-4

FOUR_PI = 4 * math.pi

# Grid pairs closer than this are treated as coincident.
COINCIDENT_GAP = 1e-12


class HeatTime(object):

    """
    Heat time t >= T_MIN.
    """

    t_min = T_MIN

    def __init__(self, t):
        t = float(t)
        if not (np.isfinite(t) and t >= self.t_min):
            raise DomainError("heat time must be at least {}: {!r}".format(self.t_min, t))
        self.t = t

    def __float__(self):
        return self.t

    def __repr__(self):
        return "HeatTime({!r})".format(self.t)


def time_value(t):
    if isinstance(t, HeatTime):
        return t.t
    return HeatTime(t).t


class Kernel0Value(object):

    """
    Scalar kernel value with its error estimate and truncation data.
    """

    def __init__(self, value, err_est=0.0, terms=1, radius=0.0):
        self.value = float(value)
        self.err_est = float(err_est)
        self.terms = int(terms)
        self.radius = float(radius)

    def __float__(self):
        return self.value

    def __repr__(self):
        return "Kernel0Value({!r}, err_est={!r})".format(self.value, self.err_est)


class Kernel1Value(object):

    """
    K1(x, y, t) as a BiTensor1 in the unit coframes at x and y.
    """

    def __init__(self, matrix, err_est=0.0, terms=1, radius=0.0):
        self.matrix = matrix
        self.err_est = float(err_est)
        self.terms = int(terms)
        self.radius = float(radius)

    def as_array(self):
        return self.matrix.as_array()

    def __repr__(self):
        return "Kernel1Value({!r}, err_est={!r})".format(self.matrix, self.err_est)


class FormField(object):

    """
    A 0-, 1- or 2-form given by a vectorized function of (c1, c2).

    Degree 1 functions return the pair (a, b) of unit coframe components.
    bound is a sup bound on |values|, decay an optional DecayHint in the
    radial coordinate for the noncompact surfaces.
    """

    def __init__(self, degree, func, bound=1.0, decay=None):
        if degree not in (0, 1, 2):
            raise DomainError("form degree must be 0, 1 or 2: " + repr(degree))
        self.degree = degree
        self.func = func
        self.bound = float(bound)
        self.decay = decay

    def __call__(self, c1, c2):
        values = np.asarray(self.func(c1, c2), dtype=float)
        shape = np.shape(c1)
        if self.degree == 1:
            shape = (2,) + shape
            # constant components broadcast along the sample axes
            values = values.reshape(values.shape + (1,) * (len(shape) - values.ndim))
        return values + np.zeros(shape)


class SampledField(object):

    """
    A form evaluated at a list of points.  values has shape (n,) for
    degrees 0 and 2 and (n, 2) for 1-forms.
    """

    def __init__(self, kind, degree, points, values, err_est):
        self.kind = kind
        self.degree = degree
        self.points = points
        self.values = values
        self.err_est = float(err_est)


# ------------------------------------------------------------ profiles

def _sphere_series(d, t, budget, factor=1.0, generator=False):
    """
    Sphere K0 (and G, G' if generator) by the Legendre series at distances d.
    """
    n_terms = specfun.sphere_series_terms(t, budget.abs_tol, factor, budget)
    n = np.arange(n_terms + 1)
    weights = (2 * n + 1) * np.exp(-n * (n + 1) * t) / FOUR_PI
    x = np.cos(d)
    s = np.sin(d)
    k0 = specfun.legendre_series(weights, x, s)
    err = specfun.sphere_series_tail(n_terms, t, factor)
    if not generator:
        return k0, err, n_terms
    f = np.zeros_like(weights)
    f[1:] = weights[1:] / (n[1:] * (n[1:] + 1))
    g = specfun.legendre_series(f, x, s)
    gd = specfun.legendre_series(f, x, s, order=1)
    return (k0, g, gd), err, n_terms


def _h2_spectral(d, t, budget, parts):
    """
    Spectral integrals over rho >= 0 at hyperbolic distances d.

    parts names the integrands, each carrying exp(-(1/4 + rho**2) t) rho tanh(pi rho) / 2 pi:
    "k0" times P, "dk0" times P1, "g" times P / lambda, "gd" times P1 / lambda.
    Returns (values stacked along axis 0, err_est, rho truncation radius).
    """
    d = np.asarray(d, dtype=float)
    orders = []
    if "k0" in parts or "g" in parts:
        orders.append(0)
    if "dk0" in parts or "gd" in parts:
        orders.append(1)
    tol = budget.abs_tol
    base = math.exp(-0.25 * t) / (2 * math.pi)
    # spread of the rho weights: int rho e^{-t rho^2} and int (rho + 1/2) e^{-t rho^2}
    reach = max(0.5 / t + 0.5 * math.sqrt(math.pi / t), 1.0)
    inner = budget.with_tol(0.2 * tol / (base * reach))
    degree = 2 if "dk0" in parts else 1
    expand = (slice(None),) + (None,) * d.ndim

    def integrand(rho):
        conical, _ = specfun.conical_functions(rho[expand], d[None], inner, orders)
        p = conical[orders.index(0)] if 0 in orders else None
        p1 = conical[orders.index(1)] if 1 in orders else None
        lam = (0.25 + rho * rho)[expand]
        weight = (base * np.exp(-t * rho * rho) * rho * np.tanh(math.pi * rho))[expand]
        stacked = []
        for part in parts:
            if part == "k0":
                stacked.append(weight * p)
            elif part == "dk0":
                stacked.append(weight * p1)
            elif part == "g":
                stacked.append(weight * p / lam)
            else:
                stacked.append(weight * p1 / lam)
        return np.stack(stacked, axis=1)

    value, err, radius = specfun.integrate_semiinfinite(
        integrand, t, budget.with_tol(0.8 * tol), 2 * base, degree, full_output=True)
    return np.asarray(value), err + 0.2 * tol, radius


def _mckean(d, t, budget):
    """
    McKean form of the hyperbolic K0 with s = d + v**2:

        sqrt(2) e^{-t/4} (4 pi t)^{-3/2} int_0^V 2 s e^{-s^2/4t} / sqrt(sinh(d + v^2/2) sinhc(v^2/2)) dv

    V is chosen so that the neglected tail, at most
    2 sqrt(2) t exp(-(d^2 + V^4)/4t) times the prefactor, is below tol/2.
    """
    d = np.asarray(d, dtype=float)
    shape = d.shape
    flat = d.reshape(-1)
    if flat.size == 0:
        return np.zeros(shape), 0.0, 0.0
    tol = budget.abs_tol
    prefactor = math.sqrt(2) * math.exp(-0.25 * t) * (4 * math.pi * t) ** -1.5
    level = 4 * t * math.log(max(4 * math.sqrt(2) * t * prefactor / tol, 1.0))
    delta = np.maximum(1.0, np.sqrt(np.maximum(0.0, level - flat * flat)))
    reach = np.sqrt(delta)

    def integrand(w):
        v = w[:, None] * reach[None, :]
        v2 = v * v
        s = flat[None, :] + v2
        with np.errstate(over="ignore"):
            denominator = np.sqrt(np.sinh(flat[None, :] + 0.5 * v2) * specfun.sinhc(0.5 * v2))
        return reach[None, :] * 2 * s * np.exp(-s * s / (4 * t)) / denominator

    value, err = specfun.integrate_adaptive(integrand, 0.0, 1.0,
                                            budget.with_tol(0.5 * tol / prefactor))
    values = prefactor * np.asarray(value).reshape(shape)
    return values, prefactor * err + 0.5 * tol, float(np.max(flat + delta)) if flat.size else 0.0


def k0_h2_mckean(d, t, budget=None):
    "Hyperbolic K0 at distance d from the McKean integral."
    t = time_value(t)
    d = np.asarray(d, dtype=float)
    if np.any(~(d >= 0)):
        raise DomainError("distance must be nonnegative")
    values, _, _ = _mckean(d, t, get_budget(budget))
    return as_output(values)


def k0_profile(kind, d, t, budget=None):
    """
    K0 at an array of distances.  Returns (values, err_est, terms, radius).
    The hyperbolic case uses the McKean integral.
    """
    kind = SurfaceKind.check(kind)
    t = time_value(t)
    budget = get_budget(budget)
    d = np.asarray(d, dtype=float)
    if kind == SurfaceKind.EUCLIDEAN:
        return np.exp(-d * d / (4 * t)) / (FOUR_PI * t), 0.0, 1, 0.0
    if kind == SurfaceKind.SPHERE:
        values, err, n_terms = _sphere_series(d, t, budget)
        return values, err, n_terms + 1, 0.0
    values, err, radius = _mckean(d, t, budget)
    return values, err, 1, radius


def h2_majorant(d, t):
    """
    Upper bound for the hyperbolic K0 on [d, d + 1], d > 0, from the McKean
    integral with cosh s - cosh d >= sinh(d) (s - d).
    """
    d = np.asarray(d, dtype=float)
    prefactor = math.sqrt(2) * math.exp(-0.25 * t) * (4 * math.pi * t) ** -1.5
    c = 4 * t
    moments = ((d + 1) * special.gamma(0.25) * c ** 0.25 + special.gamma(0.75) * c ** 0.75)
    return prefactor * np.exp(-d * d / c) * moments / (2 * np.sqrt(np.sinh(d)))


def shell_areas(kind, radii):
    "Areas of the annuli [r, r + 1]."
    radii = np.asarray(radii, dtype=float)
    if kind == SurfaceKind.EUCLIDEAN:
        return math.pi * (2 * radii + 1)
    return 2 * math.pi * (np.cosh(radii + 1) - np.cosh(radii))


def tail_mass(kind, radius, t, budget=None):
    "Bound on the integral of K0(x, y, t) over y outside the ball of given radius about x."
    kind = SurfaceKind.check(kind)
    t = time_value(t)
    radius = float(radius)
    if radius <= 0:
        return 1.0
    if kind == SurfaceKind.EUCLIDEAN:
        return math.exp(-radius * radius / (4 * t))
    if kind == SurfaceKind.SPHERE:
        if radius >= math.pi:
            return 0.0
        budget = get_budget(budget)

        def density(d):
            values, _, _ = _sphere_series(d, t, budget)
            return 2 * math.pi * values * np.sin(d)

        value, err = specfun.integrate_adaptive(density, radius, math.pi, budget)
        return abs(value) + err
    shells = radius + np.arange(0, 400)
    shells = shells[shells < 600]
    with np.errstate(over="ignore", under="ignore"):
        terms = h2_majorant(shells, t) * shell_areas(kind, shells)
    return float(np.sum(terms[np.isfinite(terms)]))


def kernel_radius(kind, t, tol, budget=None):
    "Radius outside of which the kernel mass is at most tol."
    kind = SurfaceKind.check(kind)
    t = time_value(t)
    if kind == SurfaceKind.SPHERE:
        return math.pi
    if kind == SurfaceKind.EUCLIDEAN:
        return math.sqrt(4 * t * math.log(max(1.0 / tol, 1.0)))

    def excess(r):
        return tail_mass(kind, r, t) - tol

    hi = 1.0
    while excess(hi) > 0:
        hi *= 2
        if hi > 500:
            raise NonconvergenceError("no kernel truncation radius for t = {}".format(t))
    return optimize.brentq(excess, 0.5 * hi if hi > 1 else 1e-6, hi, xtol=1e-8) + 1e-6


def coincidence_value(kind, t, budget=None):
    """
    c(t) = K0(x, x, t) - K_inf with K_inf = 1/4pi on the sphere, 0 elsewhere;
    K1(x, x, t) = c(t) I.  Returns (value, err_est).
    """
    kind = SurfaceKind.check(kind)
    t = time_value(t)
    budget = get_budget(budget)
    if kind == SurfaceKind.EUCLIDEAN:
        return 1 / (FOUR_PI * t), 0.0
    if kind == SurfaceKind.SPHERE:
        values, err, _ = _sphere_series(np.zeros(()), t, budget)
        return float(values) - 1 / FOUR_PI, err
    values, err, _ = _mckean(np.zeros(()), t, budget)
    return float(values), err


def _ein(u):
    "Ein(u) = integral over (0, u) of (1 - e^{-s})/s = E1(u) + log(u) + euler_gamma."
    u = np.asarray(u, dtype=float)
    small = u < 1
    us = np.where(small, u, 0.0)
    series = np.zeros_like(u)
    term = np.ones_like(u)
    for k in range(1, 26):
        term = -term * us / k
        series = series - term / k
    ul = np.where(small, 1.0, u)
    large = special.exp1(ul) + np.log(ul) + np.euler_gamma
    return np.where(small, series, large)


def g1_profile(kind, d, t, budget=None):
    """
    (G, G', G'') of the radial generator at an array of distances d > 0,
    with err_est.  G'' comes from the radial equation
    G'' = -(cs/sn)(d) G' - (K0 - K_inf).
    """
    kind = SurfaceKind.check(kind)
    t = time_value(t)
    budget = get_budget(budget)
    d = np.asarray(d, dtype=float)
    if kind == SurfaceKind.EUCLIDEAN:
        u = d * d / (4 * t)
        g = -(_ein(u) + math.log(t)) / FOUR_PI
        gd = np.expm1(-u) / (2 * math.pi * d)
        k0 = np.exp(-u) / (FOUR_PI * t)
        gdd = -gd / d - k0
        err = 0.0
    elif kind == SurfaceKind.SPHERE:
        (k0, g, gd), err, _ = _sphere_series(d, t, budget, generator=True)
        gdd = -gd / np.tan(d) - (k0 - 1 / FOUR_PI)
        err = err * (1 + np.max(np.abs(1 / np.tan(d)))) if d.size else err
    else:
        (g, gd, k0), err, _ = _h2_spectral(d, t, budget, ("g", "gd", "k0"))
        gdd = -gd / np.tanh(d) - k0
        err = err * (1 + np.max(1 / np.tanh(d))) if d.size else err
    return (g, gd, gdd), err


def g1_scalar(kind, d, t, budget=None):
    """
    The generator G(d, t) and its first two d derivatives.

    Plane: G = -(Ein(d^2/4t) + log t)/4pi, which differs from the tau
    integral of K0 by a constant and so has the same d derivatives.
    Sphere: sum over n >= 1 of (2n+1) e^{-n(n+1)t} / (4 pi n(n+1)) P_n(cos d).
    Hyperbolic: (1/2pi) int e^{-lambda t} rho tanh(pi rho) / lambda P(cosh d) drho.
    """
    kind = SurfaceKind.check(kind)
    d = float(d)
    if not d > 0:
        raise DomainError("g1_scalar needs d > 0: {!r}".format(d))
    if kind == SurfaceKind.SPHERE and not d < math.pi:
        raise DomainError("g1_scalar needs d < pi on the sphere")
    (g, gd, gdd), _ = g1_profile(kind, np.array(d), t, budget)
    return float(g), float(gd), float(gdd)


def kappa_profile(kind, d, t, budget=None):
    """
    kappa(d) = G'' + G'/sn(d) = G' (1 - cs(d))/sn(d) - (K0 - K_inf) at an array
    of distances, with kappa(0) = -c(t).  Returns (values, err_est).
    """
    kind = SurfaceKind.check(kind)
    t = time_value(t)
    budget = get_budget(budget)
    d = np.asarray(d, dtype=float)
    if kind == SurfaceKind.EUCLIDEAN:
        return -np.exp(-d * d / (4 * t)) / (FOUR_PI * t), 0.0
    if kind == SurfaceKind.SPHERE:
        (k0, _, gd), err, _ = _sphere_series(d, t, budget, generator=True)
        return np.tan(0.5 * d) * gd - (k0 - 1 / FOUR_PI), err
    (gd,), err, _ = _h2_spectral(d, t, budget, ("gd",))
    k0, err0, _ = _mckean(d, t, budget)
    return -np.tanh(0.5 * d) * gd - k0, err + err0


def heat_profile_h2(r, s, budget=None):
    "Radial derivative of the hyperbolic K0 at time s, from the spectral integral."
    s = time_value(s)
    r = np.asarray(r, dtype=float)
    (dk0,), _, _ = _h2_spectral(r, s, get_budget(budget), ("dk0",))
    return as_output(dk0)


class DistanceProxy(object):

    """
    Chebyshev interpolant of a radial profile on [0, dmax], refined by
    doubling the degree until successive interpolants agree to tol.
    """

    start_degree = 32
    max_degree = 1024

    def __init__(self, profile, dmax, tol):
        self.dmax = float(max(dmax, 1e-6))
        check = np.linspace(0.0, self.dmax, 1001)
        degree = self.start_degree
        previous = self._fit(profile, degree)
        while True:
            degree *= 2
            current = self._fit(profile, degree)
            change = float(np.max(np.abs(current(check) - previous(check))))
            previous = current
            if change <= tol or degree >= self.max_degree:
                break
        log.debug("distance proxy on [0, {:.3g}]: degree {} change {:.3g}".format(
            self.dmax, degree, change))
        self.series = previous
        self.err_est = change + self.profile_err
        self.degree = degree

    def _fit(self, profile, degree):
        errors = []

        def sampled(x):
            values, err = profile(x)
            errors.append(err)
            return values

        series = chebyshev.Chebyshev.interpolate(sampled, degree, domain=[0.0, self.dmax])
        self.profile_err = max(errors)
        return series

    def __call__(self, d):
        return self.series(np.asarray(d, dtype=float))


# ------------------------------------------------------------- pointwise

def k0(kind, x, y, t, budget=None):
    """
    Scalar heat kernel K0(x, y, t).  The hyperbolic value uses the
    spectral integral over the conical functions.
    """
    kind = geometry.check_kinds(kind, x, y)
    t = time_value(t)
    budget = get_budget(budget)
    d = geometry.distance(kind, x, y)
    if kind == SurfaceKind.HYPERBOLIC:
        (value,), err, radius = _h2_spectral(np.array(d), t, budget, ("k0",))
        return Kernel0Value(value, err, 1, radius)
    values, err, terms, radius = k0_profile(kind, np.array(d), t, budget)
    return Kernel0Value(values, err, terms, radius)


def k2(kind, x, y, t, budget=None):
    "2-form kernel as a density against the unit volume forms; equal to K0."
    return k0(kind, x, y, t, budget)


def k1(kind, x, y, t, budget=None):
    """
    1-form heat kernel (I + *x *y) d_x d_y G in the unit coframes at x and y.
    At x = y the isotropic limit c(t) I is returned.
    """
    kind = geometry.check_kinds(kind, x, y)
    t = time_value(t)
    budget = get_budget(budget)
    d = geometry.distance(kind, x, y)
    if d == 0:
        c, err = coincidence_value(kind, t, budget)
        return Kernel1Value(BiTensor1(c, 0.0, 0.0, c), err)
    if kind == SurfaceKind.SPHERE and math.pi - d < geometry.CUT_LOCUS_GAP:
        raise geometry.CutLocusError("K1 is not evaluated at antipodal points")
    sd = abs(float(geometry.sn(kind, d)))
    cd = abs(float(geometry.cs(kind, d)))
    share = budget.with_tol(budget.abs_tol / (2 * (2 + (1 + cd) / sd)))
    (_, gd, gdd), err = g1_profile(kind, np.array(d), t, share)
    hessian = geometry.mixed_distance_hessian(kind, x, y, float(gd), float(gdd))
    matrix = geometry.apply_i_plus_star(hessian)
    return Kernel1Value(matrix, 2 * err * (1 + 1 / sd))


# ----------------------------------------------------------- grid operators

def point_arrays(kind, points):
    points = list(points)
    for p in points:
        if p.kind != kind:
            raise geometry.KindMismatchError("point on {} used as {}".format(p.kind, kind))
    c1 = np.array([p.c1 for p in points], dtype=float)
    c2 = np.array([p.c2 for p in points], dtype=float)
    return c1, c2


class KernelTable(object):

    """
    Radial kernel profiles for grid work: K0 and, for 1-forms, kappa.
    Hyperbolic profiles are replaced by Chebyshev proxies in the distance.
    """

    def __init__(self, kind, t, budget, dmax, degree):
        self.kind = kind
        self.t = t
        self.budget = budget
        self.degree = degree
        self.cutoff = np.inf
        self.err_est = 0.0
        if kind == SurfaceKind.HYPERBOLIC:
            tol = budget.abs_tol
            self.cutoff = min(dmax, kernel_radius(kind, t, 1e-3 * tol) + 1.0)
            if degree == 1:
                profile = lambda d: kappa_profile(kind, d, t, budget)
            else:
                profile = lambda d: k0_profile(kind, d, t, budget)[:2]
            self.proxy = DistanceProxy(profile, self.cutoff, tol)
            self.err_est = self.proxy.err_est

    def __call__(self, d):
        if self.kind == SurfaceKind.HYPERBOLIC:
            inside = d <= self.cutoff
            return np.where(inside, self.proxy(np.minimum(d, self.cutoff)), 0.0)
        if self.degree == 1:
            values, err = kappa_profile(self.kind, d, self.t, self.budget)
        else:
            values, err, _, _ = k0_profile(self.kind, d, self.t, self.budget)
        self.err_est = max(self.err_est, err)
        return values


def _grid_for(kind, field, t, c1, budget):
    "Quadrature grid and truncation error for applying a kernel to a field."
    if kind == SurfaceKind.SPHERE:
        return geometry.SurfaceGrid(kind, 64, 128), 0.0
    tol = budget.abs_tol
    measure = "plane" if kind == SurfaceKind.EUCLIDEAN else "hyperbolic"
    reach = float(np.max(c1)) if c1.size else 0.0
    radius = reach + kernel_radius(kind, t, 0.25 * tol / max(field.bound, 1e-300))
    tail = field.bound * tail_mass(kind, radius - reach, t)
    if field.decay is not None:
        peak = coincidence_value(kind, t, budget)[0]
        field_radius = field.decay.radius_for(0.25 * tol / peak, measure)
        if field_radius < radius:
            radius = field_radius
            tail = peak * field.decay.tail_mass(radius, measure)
    grid = geometry.SurfaceGrid(kind, radius=max(radius, 1e-3), n_angular=64,
                                panels=max(2, int(math.ceil(radius / min(0.5, math.sqrt(t))))))
    return grid, tail


def _apply_on_grid(kind, field, table, c1, c2, grid):
    values = field(grid.c1, grid.c2)
    d = geometry.distance_arrays(kind, c1[:, None], c2[:, None], grid.c1[None, :], grid.c2[None, :])
    if field.degree != 1:
        return np.dot(table(d) * values[None, :], grid.weights)
    kappa = table(d)
    with np.errstate(divide="ignore", invalid="ignore"):
        gxa, gxb, gya, gyb = geometry.gradient_arrays(
            kind, c1[:, None], c2[:, None], grid.c1[None, :], grid.c2[None, :], d)
        r11, r12 = geometry.rotation_arrays(gxa, gxb, gya, gyb)
    coincident = d < COINCIDENT_GAP
    r11 = np.where(coincident, -1.0, r11)
    r12 = np.where(coincident, 0.0, r12)
    undefined = ~np.isfinite(r11) | ~np.isfinite(r12)
    if np.any(undefined):
        log.debug("dropping {} antipodal grid pairs".format(int(np.sum(undefined))))
        r11 = np.where(undefined, 0.0, r11)
        r12 = np.where(undefined, 0.0, r12)
    a, b = values
    weighted = kappa * grid.weights[None, :]
    out_a = np.sum(weighted * (r11 * a[None, :] + r12 * b[None, :]), axis=1)
    out_b = np.sum(weighted * (-r12 * a[None, :] + r11 * b[None, :]), axis=1)
    return np.stack([out_a, out_b], axis=1)


def _apply(kind, field, t, points, budget, grid, degree):
    kind = SurfaceKind.check(kind)
    t = time_value(t)
    budget = get_budget(budget)
    if field.degree not in degree:
        raise DomainError("field of degree {} given to a kernel for degree {}".format(
            field.degree, degree[0]))
    c1, c2 = point_arrays(kind, points)
    tail = 0.0
    if grid is None:
        grid, tail = _grid_for(kind, field, t, c1, budget)
    fine_grid = grid.refined()
    dmax = fine_grid.radius + (float(np.max(c1)) if c1.size else 0.0)
    table = KernelTable(kind, t, budget, dmax, 1 if field.degree == 1 else 0)
    coarse = _apply_on_grid(kind, field, table, c1, c2, grid)
    fine = _apply_on_grid(kind, field, table, c1, c2, fine_grid)
    change = float(np.max(np.abs(fine - coarse))) if fine.size else 0.0
    area = float(np.sum(fine_grid.weights))
    err = change + tail + table.err_est * field.bound * area
    log.debug("apply degree {} on {}: {} nodes, err {:.3g}".format(
        field.degree, kind, len(fine_grid), err))
    return SampledField(kind, field.degree, points, fine, err)


def apply_k0(kind, field, t, points, budget=None, grid=None):
    """
    Heat semigroup on a 0-form (or 2-form density) sampled at points:
    x -> integral of K0(x, y, t) f(y) dA_y.  Without an explicit grid the
    sphere uses 64 x 128 nodes and the planes a grid truncated by the kernel
    or field decay; err_est adds the change under grid doubling.
    """
    return _apply(kind, field, t, points, budget, grid, (0, 2))


def apply_k1(kind, field, t, points, budget=None, grid=None):
    "Heat semigroup on a 1-form: x -> integral of K1(x, y, t) applied to nu(y)."
    return _apply(kind, field, t, points, budget, grid, (1,))


# --------------------------------------------------------------- residuals

def heat_residual(kind, history, x, t, h_t=1e-3, h_x=1e-2, degree=0):
    """
    Max component of (d/dt + Laplacian) applied to a form field by centered
    differences on a five point stencil at x.

    history(c1, c2, t) returns the field at arrays of coordinates: a scalar
    array for degrees 0 and 2, the pair (B, C) of unit coframe components for
    degree 1.  The 1-form operator in these components is

        B_t - B_rr - (cs/sn) B_r + B/sn^2 - B_tt/sn^2 + 2 (cs/sn^2) C_theta
        C_t - C_rr - (cs/sn) C_r + C/sn^2 - C_tt/sn^2 - 2 (cs/sn^2) B_theta
    """
    kind = SurfaceKind.check(kind)
    t = time_value(t)
    if t - h_t < T_MIN:
        raise DomainError("time stencil reaches below the minimum heat time")
    r = x.c1
    theta = x.c2
    if r - 2 * h_x <= 0 or (kind == SurfaceKind.SPHERE and r + 2 * h_x >= math.pi):
        raise DomainError("stencil at {} is within 2h of a coordinate singularity".format(x))
    c1 = np.array([r, r + h_x, r - h_x, r, r])
    c2 = np.array([theta, theta, theta, theta + h_x, theta - h_x])
    now = np.asarray(history(c1, c2, t), dtype=float)
    later = np.asarray(history(c1[:1], c2[:1], t + h_t), dtype=float)
    earlier = np.asarray(history(c1[:1], c2[:1], t - h_t), dtype=float)
    sr = float(geometry.sn(kind, r))
    ratio = float(geometry.cs(kind, r)) / sr
    inverse2 = 1 / (sr * sr)

    def parts(f, f_later, f_earlier):
        f_t = (f_later[0] - f_earlier[0]) / (2 * h_t)
        f_r = (f[1] - f[2]) / (2 * h_x)
        f_rr = (f[1] - 2 * f[0] + f[2]) / (h_x * h_x)
        f_theta = (f[3] - f[4]) / (2 * h_x)
        f_tt = (f[3] - 2 * f[0] + f[4]) / (h_x * h_x)
        return f[0], f_t, f_r, f_rr, f_theta, f_tt

    if degree in (0, 2):
        (_, f_t, f_r, f_rr, _, f_tt) = parts(now, later, earlier)
        return abs(f_t - f_rr - ratio * f_r - inverse2 * f_tt)
    if degree != 1:
        raise DomainError("form degree must be 0, 1 or 2: " + repr(degree))
    (b, b_t, b_r, b_rr, b_theta, b_tt) = parts(now[0], later[0], earlier[0])
    (c, c_t, c_r, c_rr, c_theta, c_tt) = parts(now[1], later[1], earlier[1])
    coupling = 2 * ratio / sr
    res_b = b_t - b_rr - ratio * b_r + inverse2 * b - inverse2 * b_tt + coupling * c_theta
    res_c = c_t - c_rr - ratio * c_r + inverse2 * c - inverse2 * c_tt - coupling * b_theta
    return max(abs(res_b), abs(res_c))


def kernel_history(kind, source, degree=0, covector=(1.0, 0.0), budget=None):
    """
    history(c1, c2, t) for the kernel with fixed source point, suitable for
    heat_residual.  Degree 1 contracts K1 with a covector at the source.
    """
    kind = SurfaceKind.check(kind)
    budget = get_budget(budget)
    ea, eb = covector

    def history(c1, c2, t):
        if degree != 1:
            d = geometry.distance_arrays(kind, c1, c2, source.c1, source.c2)
            values, _, _, _ = k0_profile(kind, d, t, budget)
            return values
        columns = []
        for (u, v) in zip(c1, c2):
            m = k1(kind, Point(kind, u, v), source, t, budget).matrix
            columns.append((m.m11 * ea + m.m12 * eb, m.m21 * ea + m.m22 * eb))
        return np.array(columns).T

    return history
