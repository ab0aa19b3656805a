"""
Special functions and quadrature engines.

Legendre polynomials and order one associated functions on [-1, 1],
conical (Mehler) functions P_{-1/2+i rho}(cosh r) and their radial
derivatives, the order one Mehler-Fock transform pair, and the adaptive
Gauss-Legendre quadrature used by every other module.

Evaluators broadcast over numpy arrays.  Scalar inputs give Python floats.
"""

import logging
import math
import numpy as np
from scipy import special, optimize, interpolate

log = logging.getLogger(__name__)

# Gauss-Legendre points per quadrature panel.
GAUSS_ORDER = 10

EPS = np.finfo(float).eps

# Allowed excursion of a Legendre argument past +-1.
UNIT_SLACK = 16 * EPS


class HeatKernelError(Exception):
    """
    Base class for failures reported by riemann_heat computations.
    """


class DomainError(HeatKernelError, ValueError):
    """
    An argument lies outside the domain where the quantity is defined.
    """


class NonconvergenceError(HeatKernelError, ArithmeticError):
    """
    A series or quadrature could not reach the requested tolerance.
    The best value found and its error estimate are kept.
    """

    def __init__(self, message, value=None, achieved=None):
        if achieved is not None:
            message = "{} (achieved error estimate {:.3g})".format(message, achieved)
        HeatKernelError.__init__(self, message)
        self.value = value
        self.achieved = achieved


class DivergentProfileError(NonconvergenceError):
    """
    A radial profile does not decay the way its decay hint claims.
    """


class ToleranceBudget(object):

    """
    Error budget handed down through nested computations.
    Class attributes are the defaults; pass keywords to override.
    """

    abs_tol = 1e-8
    max_quad_depth = 40
    max_series_terms = 5000
    max_panels = 20000

    def __init__(self, abs_tol=None, max_quad_depth=None,
                 max_series_terms=None, max_panels=None):
        if abs_tol is not None:
            self.abs_tol = float(abs_tol)
        if max_quad_depth is not None:
            self.max_quad_depth = int(max_quad_depth)
        if max_series_terms is not None:
            self.max_series_terms = int(max_series_terms)
        if max_panels is not None:
            self.max_panels = int(max_panels)
        if not (self.abs_tol > 0 and np.isfinite(self.abs_tol)):
            raise DomainError("abs_tol must be positive: " + repr(self.abs_tol))
        if self.max_quad_depth < 1 or self.max_series_terms < 1 or self.max_panels < 1:
            raise DomainError("budget limits must be positive integers")

    def with_tol(self, abs_tol):
        "Same limits, different absolute tolerance."
        return ToleranceBudget(abs_tol, self.max_quad_depth,
                               self.max_series_terms, self.max_panels)

    def halved(self):
        return self.with_tol(0.5 * self.abs_tol)

    def __repr__(self):
        return "ToleranceBudget(abs_tol={!r})".format(self.abs_tol)


def get_budget(budget=None):
    if budget is None:
        return ToleranceBudget()
    if not isinstance(budget, ToleranceBudget):
        return ToleranceBudget(budget)
    return budget


def as_output(value):
    "Python float for 0-d results, ndarray otherwise."
    value = np.asarray(value)
    if value.ndim == 0:
        return float(value)
    return value


class SpectralParameter(object):

    """
    Point rho >= 0 of the continuous hyperbolic spectrum, eigenvalue 1/4 + rho**2.
    Negative input is folded onto |rho|.
    """

    def __init__(self, rho):
        self.rho = abs(float(rho))

    @property
    def lam(self):
        return 0.25 + self.rho * self.rho

    def __float__(self):
        return self.rho

    def __repr__(self):
        return "SpectralParameter({!r})".format(self.rho)


def spectral_values(rho):
    "|rho| as an array, accepting SpectralParameter instances."
    if isinstance(rho, SpectralParameter):
        return np.asarray(rho.rho)
    return np.abs(np.asarray(rho, dtype=float))


# ---------------------------------------------------------------- quadrature

_rule_cache = {}


def gauss_rule(order=GAUSS_ORDER):
    "Gauss-Legendre nodes and weights on [-1, 1]."
    rule = _rule_cache.get(order)
    if rule is None:
        rule = special.roots_legendre(order)
        _rule_cache[order] = rule
    return rule


def _panel_nodes(lo, hi, nodes):
    half = 0.5 * (hi - lo)
    return lo + half * (nodes + 1.0), half


def integrate_adaptive(f, a, b, budget=None):
    """
    Integrate f over [a, b] by adaptive bisection with a Gauss rule per panel.

    f maps an array of abscissae of shape (m,) to values of shape (m, ...),
    so vector valued integrands are refined together.  Each panel compares
    its one-panel estimate with the sum over its two halves; a panel is
    accepted once that difference is below its share of abs_tol, or below
    the roundoff floor of the panel value.

    Returns (value, err_est).  Raises NonconvergenceError when panels hit
    max_quad_depth and the accumulated estimate exceeds abs_tol.
    """
    budget = get_budget(budget)
    a = float(a)
    b = float(b)
    if a == b:
        sample = np.asarray(f(np.array([a])))
        return as_output(np.zeros(sample.shape[1:])), 0.0
    if not a < b:
        raise DomainError("integration bounds must satisfy a < b: {} {}".format(a, b))
    nodes, weights = gauss_rule()
    length = b - a

    def estimate(lo, hi, values):
        half = 0.5 * (hi - lo)
        return half * np.tensordot(weights, values, axes=(0, 0))

    def halves(lo, hi):
        mid = 0.5 * (lo + hi)
        left, _ = _panel_nodes(lo, mid, nodes)
        right, _ = _panel_nodes(mid, hi, nodes)
        values = np.asarray(f(np.concatenate([left, right])), dtype=float)
        n = len(nodes)
        return (mid, estimate(lo, mid, values[:n]), estimate(mid, hi, values[n:]))

    x0, _ = _panel_nodes(a, b, nodes)
    coarse0 = estimate(a, b, np.asarray(f(x0), dtype=float))
    stack = [(a, b, 0, coarse0)]
    accepted = []
    total_error = 0.0
    floor_error = 0.0
    saturated = 0
    panels = 0
    while stack:
        (lo, hi, depth, coarse) = stack.pop()
        panels += 1
        if panels > budget.max_panels:
            value = sum(accepted) if accepted else coarse0
            raise NonconvergenceError(
                "quadrature on [{}, {}] exceeded {} panels".format(a, b, budget.max_panels),
                value=value, achieved=total_error)
        (mid, left, right) = halves(lo, hi)
        fine = left + right
        error = float(np.max(np.abs(fine - coarse), initial=0.0))
        floor = 64 * EPS * float(np.max(np.abs(fine), initial=0.0))
        local = budget.abs_tol * (hi - lo) / length
        if error <= max(local, floor) or depth >= budget.max_quad_depth:
            if error > max(local, floor):
                saturated += 1
            accepted.append(fine)
            total_error += error
            floor_error += floor
        else:
            stack.append((mid, hi, depth + 1, right))
            stack.append((lo, mid, depth + 1, left))
    value = accepted[0]
    for part in accepted[1:]:
        value = value + part
    if saturated and total_error > max(budget.abs_tol, floor_error):
        raise NonconvergenceError(
            "quadrature on [{}, {}] hit depth {}".format(a, b, budget.max_quad_depth),
            value=as_output(value), achieved=total_error)
    log.debug("integrate_adaptive [{}, {}]: {} panels, err {:.3g}".format(a, b, panels, total_error))
    return as_output(value), total_error


def gaussian_tail_bound(radius, rate, scale=1.0, degree=0):
    """
    Bound on the integral over [radius, inf) of scale*(1+x)**degree*exp(-rate*x**2),
    valid for radius >= 1 where 1 + x <= 2x.
    """
    k = float(degree)
    s = 0.5 * (k + 1)
    return (scale * 2.0 ** k * special.gamma(s) *
            special.gammaincc(s, rate * radius * radius) / (2 * rate ** s))


def gaussian_tail_radius(rate, target, scale=1.0, degree=0):
    "Smallest practical radius >= 1 with gaussian_tail_bound below target."

    def excess(radius):
        return gaussian_tail_bound(radius, rate, scale, degree) - target

    if excess(1.0) <= 0:
        return 1.0
    hi = 2.0
    while excess(hi) > 0:
        hi *= 2
        if hi > 1e8:
            raise NonconvergenceError("no truncation radius for rate {}".format(rate))
    root = optimize.brentq(excess, max(1.0, 0.5 * hi), hi, xtol=1e-10)
    return root * (1 + 1e-9) + 1e-9


def integrate_semiinfinite(f, gaussian_rate, budget=None, scale=1.0, degree=0,
                           full_output=False):
    """
    Integrate f over [0, inf) given |f(x)| <= scale*(1+x)**degree*exp(-gaussian_rate*x**2).

    Half the tolerance goes to the analytic tail beyond the truncation radius,
    half to adaptive quadrature on [0, radius].  With full_output the
    truncation radius is returned as a third item.
    """
    budget = get_budget(budget)
    if not gaussian_rate > 0:
        raise DomainError("gaussian_rate must be positive: " + repr(gaussian_rate))
    target = 0.5 * budget.abs_tol
    radius = gaussian_tail_radius(gaussian_rate, target, scale, degree)
    tail = gaussian_tail_bound(radius, gaussian_rate, scale, degree)
    log.debug("integrate_semiinfinite: rate {} truncated at {:.4g}".format(gaussian_rate, radius))
    value, err = integrate_adaptive(f, 0.0, radius, budget.halved())
    if full_output:
        return value, err + tail, radius
    return value, err + tail


def sphere_series_terms(t, tol, factor=1.0, budget=None):
    """
    Degree N after which sum_{n>N} factor*(2n+1)*exp(-n(n+1)t)/(4 pi) is below tol.

    Past the point where the summand decreases the tail is bounded by the
    integral from N, which is exp(-N(N+1)t)/t.
    """
    budget = get_budget(budget)
    need = math.log(max(factor, 1e-300) / (4 * math.pi * t * tol)) / t
    n = 0
    if need > 0:
        n = int(math.ceil(0.5 * (math.sqrt(1 + 4 * need) - 1)))
    n = max(n, int(math.ceil(0.5 * (math.sqrt(2 / t) - 1))), 1)
    if n > budget.max_series_terms:
        m = budget.max_series_terms
        raise NonconvergenceError(
            "sphere series at t = {} needs {} terms".format(t, n),
            achieved=factor * math.exp(-m * (m + 1) * t) / (4 * math.pi * t))
    return n


def sphere_series_tail(n, t, factor=1.0):
    return factor * math.exp(-n * (n + 1) * t) / (4 * math.pi * t)


# ------------------------------------------------------------------ Legendre

def check_unit_interval(x):
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(np.abs(x) > 1 + UNIT_SLACK):
        raise DomainError("Legendre argument outside [-1, 1]")
    return np.clip(x, -1.0, 1.0)


def check_degree(n, least):
    if int(n) != n or n < least:
        raise DomainError("degree must be an integer >= {}: {!r}".format(least, n))
    return int(n)


def legendre_p(n, x):
    "Legendre polynomial P_n(x) by the three term recurrence."
    n = check_degree(n, 0)
    x = check_unit_interval(x)
    previous = np.ones_like(x)
    if n == 0:
        return as_output(previous)
    current = x.copy()
    for k in range(1, n):
        previous, current = current, ((2 * k + 1) * x * current - k * previous) / (k + 1)
    return as_output(current)


def legendre_p1(n, x):
    """
    Associated Legendre function of order one with the Condon-Shortley sign,
    so that legendre_p1(n, cos(phi)) is the phi derivative of P_n(cos(phi)).
    """
    n = check_degree(n, 1)
    x = check_unit_interval(x)
    previous = np.zeros_like(x)
    current = -np.sqrt((1 - x) * (1 + x))
    for k in range(1, n):
        previous, current = current, ((2 * k + 1) * x * current - (k + 1) * previous) / k
    return as_output(current)


def legendre_series(coefficients, x, sin_x=None, order=0):
    """
    sum_n coefficients[n] * P_n(x) (order 0) or P1_n(x) (order 1),
    streaming the recurrence instead of storing the table.
    """
    x = check_unit_interval(x)
    if sin_x is None:
        sin_x = np.sqrt((1 - x) * (1 + x))
    coefficients = np.asarray(coefficients, dtype=float)
    nmax = len(coefficients) - 1
    if order == 0:
        previous = np.ones_like(x)
        current = x
        total = coefficients[0] * previous
        if nmax >= 1:
            total = total + coefficients[1] * current
        for k in range(1, nmax):
            previous, current = current, ((2 * k + 1) * x * current - k * previous) / (k + 1)
            total = total + coefficients[k + 1] * current
        return total
    if order != 1:
        raise DomainError("only orders 0 and 1 are supported: " + repr(order))
    total = np.zeros_like(x)
    if nmax < 1:
        return total
    previous = np.zeros_like(x)
    current = -np.asarray(sin_x, dtype=float)
    total = coefficients[1] * current
    for k in range(1, nmax):
        previous, current = current, ((2 * k + 1) * x * current - (k + 1) * previous) / k
        total = total + coefficients[k + 1] * current
    return total


# ------------------------------------------------------------------- conical

def sinhc(x):
    "sinh(x)/x with the removable singularity filled in."
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-3
    safe = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, 1 + x2 / 6 * (1 + x2 / 20), np.sinh(safe) / safe)


def coth_minus_inverse(x):
    "coth(x) - 1/x, the logarithmic derivative of sinhc."
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-2
    safe = np.where(small, 1.0, x)
    x2 = x * x
    series = x / 3 * (1 - x2 / 15 * (1 - 2 * x2 / 21))
    return np.where(small, series, 1 / np.tanh(safe) - 1 / safe)


def conical_functions(rho, r, budget=None, orders=(0, 1)):
    """
    P_{-1/2+i rho}(cosh r) and its r derivative by the Mehler-Dirichlet integral.

    With s = r cos(e) the representation becomes
    (2/pi) * integral over [0, pi/2] of cos(rho r cos e) / sqrt(sinhc(A) sinhc(B)) de,
    A = r cos(e/2)**2, B = r sin(e/2)**2, whose integrand is smooth.
    Differentiating under the integral gives the order one function.

    Returns a tuple (values, err_est) with values stacked along the first
    axis in the order of `orders`.
    """
    budget = get_budget(budget)
    rho = spectral_values(rho)
    r = np.asarray(r, dtype=float)
    if np.any(~(r >= 0)):
        raise DomainError("conical functions need r >= 0")
    rho, r = np.broadcast_arrays(rho, r)
    expand = (slice(None),) + (None,) * r.ndim
    orders = tuple(orders)

    def integrand(eps):
        e = eps[expand]
        c2 = np.cos(0.5 * e) ** 2
        s2 = np.sin(0.5 * e) ** 2
        a = r * c2
        b = r * s2
        weight = 1 / np.sqrt(sinhc(a) * sinhc(b))
        phase = rho * r * np.cos(e)
        parts = []
        for order in orders:
            if order == 0:
                parts.append(np.cos(phase) * weight)
            else:
                slope = c2 * coth_minus_inverse(a) + s2 * coth_minus_inverse(b)
                parts.append((-rho * np.cos(e) * np.sin(phase) - 0.5 * np.cos(phase) * slope) * weight)
        return np.stack(parts, axis=1)

    inner = budget.with_tol(budget.abs_tol * math.pi / 2)
    value, err = integrate_adaptive(integrand, 0.0, 0.5 * math.pi, inner)
    value = (2 / math.pi) * np.asarray(value)
    at_origin = (r == 0)
    for index, order in enumerate(orders):
        value[index] = np.where(at_origin, 1.0 if order == 0 else 0.0, value[index])
    return value, (2 / math.pi) * err


def conical_p(rho, r, budget=None):
    "Conical function P_{-1/2+i rho}(cosh r); symmetric in rho, 1 at r = 0."
    value, _ = conical_functions(rho, r, budget, orders=(0,))
    return as_output(value[0])


def conical_p1(rho, r, budget=None):
    "P1_{-1/2+i rho}(cosh r), the r derivative of conical_p; 0 at r = 0."
    value, _ = conical_functions(rho, r, budget, orders=(1,))
    return as_output(value[0])


# --------------------------------------------------------- radial profiles

class DecayHint(object):

    """
    Majorant for a radial function: either scale*exp(-rate*(r - center)**2)
    or zero beyond `radius` (with an optional known mass `tail` outside it).

    Tail masses are available against the measures dr ("line"),
    2 pi r dr ("plane") and 2 pi sinh(r) dr ("hyperbolic").
    """

    measures = ("line", "plane", "hyperbolic")

    def __init__(self, rate=None, center=0.0, scale=1.0, radius=None, tail=0.0):
        if (rate is None) == (radius is None):
            raise DomainError("a decay hint needs exactly one of rate and radius")
        if rate is not None and not rate > 0:
            raise DomainError("decay rate must be positive: " + repr(rate))
        if radius is not None and not radius >= 0:
            raise DomainError("support radius must be nonnegative: " + repr(radius))
        self.rate = rate
        self.center = max(0.0, float(center))
        self.scale = abs(float(scale))
        self.radius = radius
        self.tail = float(tail)

    @classmethod
    def gaussian(cls, rate, center=0.0, scale=1.0):
        return cls(rate=rate, center=center, scale=scale)

    @classmethod
    def compact(cls, radius, tail=0.0):
        return cls(radius=radius, tail=tail)

    def tail_mass(self, radius, measure="line"):
        "Bound on the integral of |f| beyond radius against the given measure."
        if measure not in self.measures:
            raise DomainError("unknown measure: " + repr(measure))
        if self.radius is not None:
            return self.tail if radius >= self.radius else np.inf
        a = self.rate
        c = self.center
        root = 0.5 * math.sqrt(math.pi / a)
        if measure == "line":
            mass = root * special.erfc(math.sqrt(a) * (radius - c))
        elif measure == "plane":
            mass = 2 * math.pi * (math.exp(-a * (radius - c) ** 2) / (2 * a) +
                                  c * root * special.erfc(math.sqrt(a) * (radius - c)))
        else:
            shift = c + 0.5 / a
            mass = (math.pi * math.exp(c + 0.25 / a) * root *
                    special.erfc(math.sqrt(a) * (radius - shift)))
        return self.scale * mass

    def radius_for(self, tol, measure="line", multiplier=1.0):
        "Radius beyond which multiplier * tail_mass is at most tol."
        if self.radius is not None:
            return self.radius

        def excess(radius):
            return multiplier * self.tail_mass(radius, measure) - tol

        lo = self.center
        if excess(lo) <= 0:
            return lo
        step = 1.0
        hi = lo + step
        while excess(hi) > 0:
            step *= 2
            hi = lo + step
            if step > 1e6:
                raise NonconvergenceError("decay hint never meets tolerance {}".format(tol))
        return optimize.brentq(excess, lo, hi, xtol=1e-10) + 1e-9


class RadialProfile(object):

    """
    Radial function f(r), r >= 0, with its decay hint.
    """

    def __init__(self, func, decay=None):
        self.func = func
        self.decay = decay

    @classmethod
    def from_samples(cls, r, values, decay=None):
        "Cubic interpolant through samples, zero beyond the last sample."
        r = np.asarray(r, dtype=float)
        values = np.asarray(values, dtype=float)
        spline = interpolate.interp1d(r, values, kind="cubic", bounds_error=False,
                                      fill_value=0.0, assume_sorted=True)
        if decay is None:
            decay = DecayHint.compact(float(r[-1]))
        return cls(spline, decay)

    def __call__(self, r):
        values = np.asarray(self.func(np.asarray(r, dtype=float)), dtype=float)
        if np.any(~np.isfinite(values)):
            raise DomainError("radial profile produced non-finite values")
        return values


def mehler_fock_forward(profile, rho, budget=None):
    """
    fhat(rho) = 2 pi * integral over r >= 0 of P1_{-1/2+i rho}(cosh r) f(r) sinh(r).

    The profile's decay hint fixes the truncation radius; a runaway partial
    integral past that radius raises DivergentProfileError.
    """
    budget = get_budget(budget)
    if profile.decay is None:
        raise DomainError("mehler_fock_forward needs a decay hint on the profile")
    rho = spectral_values(rho)
    shape = rho.shape
    rho = rho.reshape(-1)
    tol = budget.abs_tol
    bound = float(np.max(rho)) + 0.5 if rho.size else 0.5
    radius = profile.decay.radius_for(0.25 * tol, "hyperbolic", bound)
    tail = bound * profile.decay.tail_mass(radius, "hyperbolic")
    mass = profile.decay.tail_mass(0.0, "hyperbolic")
    inner = budget.with_tol(0.25 * tol / max(1.0, mass))

    def integrand(r):
        values = profile(r)
        p1, _ = conical_functions(rho[None, :], r[:, None], inner, orders=(1,))
        return 2 * math.pi * p1[0] * (values * np.sinh(r))[:, None]

    value, err = integrate_adaptive(integrand, 0.0, radius, budget.halved())
    beyond, _ = integrate_adaptive(integrand, radius, radius + max(1.0, 0.5 * radius),
                                   budget.halved())
    runaway = float(np.max(np.abs(beyond))) if np.size(beyond) else 0.0
    if runaway > tol:
        raise DivergentProfileError(
            "profile mass beyond r = {:.4g} is {:.3g}, decay hint violated".format(radius, runaway),
            value=value, achieved=runaway)
    return as_output(np.reshape(value, shape)), err + tail + 0.25 * tol


def mehler_fock_inverse(fhat, r, budget=None, rate=None, scale=1.0, degree=0):
    """
    f(r) = (1/2pi) * integral over rho >= 0 of
    fhat(rho) * rho tanh(pi rho) / (1/4 + rho**2) * P1_{-1/2+i rho}(cosh r).

    fhat is a vectorized callable with
    |fhat(rho)| <= scale * (1 + rho)**degree * exp(-rate * rho**2).
    """
    budget = get_budget(budget)
    if rate is None or not rate > 0:
        raise DomainError("mehler_fock_inverse needs a positive gaussian rate for fhat")
    r = np.asarray(r, dtype=float)
    shape = r.shape
    r = r.reshape(-1)
    tol = budget.abs_tol
    # rho (rho + 1/2) / (1/4 + rho**2) <= 2 and |P1| <= rho + 1/2
    weight_scale = scale / math.pi
    k = float(degree)
    reach = 2 ** k * (1 + special.gamma(0.5 * (k + 1)) / (2 * rate ** (0.5 * (k + 1))))
    inner = budget.with_tol(0.25 * tol / max(1.0, scale * reach))

    def integrand(rho):
        values = np.asarray(fhat(rho), dtype=float)
        p1, _ = conical_functions(rho[:, None], r[None, :], inner, orders=(1,))
        factor = rho * np.tanh(math.pi * rho) / (0.25 + rho * rho) / (2 * math.pi)
        return (values * factor)[:, None] * p1[0]

    value, err = integrate_semiinfinite(integrand, rate, budget.with_tol(0.75 * tol),
                                        weight_scale, degree)
    return as_output(np.reshape(value, shape)), err + 0.25 * tol
