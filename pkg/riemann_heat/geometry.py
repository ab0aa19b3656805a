"""
The three simply connected model surfaces in geodesic polar coordinates.

Points are (r, theta) on the euclidean and hyperbolic planes and
(phi, theta) on the unit sphere.  One-forms are stored against the unit
coframe (dr, sn(r) dtheta) where sn is r, sinh or sin.  The Hodge star
takes (a, b) to (-b, a), so the coframe is positively oriented.
"""

import logging
import math
import numpy as np

from . import specfun
from .specfun import DomainError, NonconvergenceError

log = logging.getLogger(__name__)

TWO_PI = 2 * math.pi

# Sphere pairs closer than this to antipodal count as on the cut locus.
CUT_LOCUS_GAP = 1e-9


class KindMismatchError(DomainError):
    """
    Points from different model surfaces were combined.
    """


class CoincidentPointsError(DomainError):
    """
    A distance derivative was requested at coincident points.
    """


class CutLocusError(DomainError):
    """
    A distance derivative was requested at antipodal points of the sphere.
    """


class SurfaceKind(object):

    """
    Tags for the model surfaces.
    """

    EUCLIDEAN = "euclidean"
    SPHERE = "sphere"
    HYPERBOLIC = "hyperbolic"

    tags = (EUCLIDEAN, SPHERE, HYPERBOLIC)
    aliases = {"plane": EUCLIDEAN, "euclid": EUCLIDEAN, "h2": HYPERBOLIC}

    @classmethod
    def check(cls, kind):
        tag = cls.aliases.get(kind, kind)
        if tag not in cls.tags:
            raise DomainError("unknown surface kind: " + repr(kind))
        return tag


def sn(kind, x):
    "Radius of the geodesic circle of radius x."
    if kind == SurfaceKind.EUCLIDEAN:
        return np.asarray(x, dtype=float) * 1.0
    if kind == SurfaceKind.SPHERE:
        return np.sin(x)
    return np.sinh(x)


def cs(kind, x):
    "Derivative of sn."
    if kind == SurfaceKind.EUCLIDEAN:
        return np.ones_like(np.asarray(x, dtype=float))
    if kind == SurfaceKind.SPHERE:
        return np.cos(x)
    return np.cosh(x)


def check_polar(kind, c1):
    c1 = np.asarray(c1, dtype=float)
    if np.any(~np.isfinite(c1)) or np.any(c1 < 0):
        raise DomainError("radial coordinate must be finite and nonnegative")
    if kind == SurfaceKind.SPHERE and np.any(c1 > math.pi):
        raise DomainError("polar angle phi must lie in [0, pi]")
    return c1


def wrap_angle(theta):
    theta = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    # mod can round up to exactly 2 pi for tiny negative input
    return np.where(theta >= TWO_PI, 0.0, theta)


class Point(object):

    """
    Location on a model surface: (r, theta) or (phi, theta), theta in [0, 2 pi).
    """

    def __init__(self, kind, c1, c2=0.0):
        self.kind = SurfaceKind.check(kind)
        self.c1 = float(check_polar(self.kind, c1))
        self.c2 = float(wrap_angle(c2))

    @classmethod
    def from_cartesian(cls, x, y):
        "Euclidean point from Cartesian coordinates."
        return cls(SurfaceKind.EUCLIDEAN, math.hypot(x, y), math.atan2(y, x))

    def cartesian(self):
        if self.kind != SurfaceKind.EUCLIDEAN:
            raise KindMismatchError("Cartesian coordinates are euclidean only")
        return (self.c1 * math.cos(self.c2), self.c1 * math.sin(self.c2))

    def __eq__(self, other):
        return (isinstance(other, Point) and self.kind == other.kind and
                self.c1 == other.c1 and self.c2 == other.c2)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.kind, self.c1, self.c2))

    def __repr__(self):
        return "Point({!r}, {!r}, {!r})".format(self.kind, self.c1, self.c2)


class OneFormValue(object):

    """
    Coefficients (a, b) of a 1-form against the unit coframe at a point.
    """

    def __init__(self, a, b):
        self.a = float(a)
        self.b = float(b)

    def as_array(self):
        return np.array([self.a, self.b])

    def norm(self):
        return math.hypot(self.a, self.b)

    def __repr__(self):
        return "OneFormValue({!r}, {!r})".format(self.a, self.b)


class ScalarField(object):

    """
    Scalar function (or 2-form density) of vectorized coordinates c1, c2.
    Fields on the noncompact surfaces carry a DecayHint in the radius.
    """

    def __init__(self, func, decay=None):
        self.func = func
        self.decay = decay

    def __call__(self, c1, c2):
        return np.asarray(self.func(c1, c2), dtype=float)


TwoFormField = ScalarField


class BiTensor1(object):

    """
    2x2 coupling of the unit coframe at x (rows) with the unit coframe at y (columns).
    """

    def __init__(self, m11, m12, m21, m22):
        self.m11 = float(m11)
        self.m12 = float(m12)
        self.m21 = float(m21)
        self.m22 = float(m22)

    @classmethod
    def from_array(cls, array):
        array = np.asarray(array, dtype=float)
        return cls(array[0, 0], array[0, 1], array[1, 0], array[1, 1])

    def as_array(self):
        return np.array([[self.m11, self.m12], [self.m21, self.m22]])

    def transpose(self):
        return BiTensor1(self.m11, self.m21, self.m12, self.m22)

    def scaled(self, factor):
        return BiTensor1(factor * self.m11, factor * self.m12,
                         factor * self.m21, factor * self.m22)

    def apply(self, v):
        "Contract the y leg with a 1-form at y."
        return OneFormValue(self.m11 * v.a + self.m12 * v.b,
                            self.m21 * v.a + self.m22 * v.b)

    def __repr__(self):
        return "BiTensor1({!r}, {!r}, {!r}, {!r})".format(self.m11, self.m12, self.m21, self.m22)


def check_kinds(kind, *points):
    kind = SurfaceKind.check(kind)
    for p in points:
        if p.kind != kind:
            raise KindMismatchError("point on {} used as {}".format(p.kind, kind))
    return kind


# ------------------------------------------------------ vectorized formulas

def distance_arrays(kind, r1, t1, r2, t2):
    """
    Geodesic distance between (r1, t1) and (r2, t2), broadcasting.
    Half-angle forms keep full relative precision at small separations.
    """
    half_delta = np.sin(0.5 * (np.asarray(t1) - np.asarray(t2))) ** 2
    if kind == SurfaceKind.EUCLIDEAN:
        return np.sqrt((r1 - r2) ** 2 + 4 * r1 * r2 * half_delta)
    if kind == SurfaceKind.HYPERBOLIC:
        h = np.sinh(0.5 * (r1 - r2)) ** 2 + np.sinh(r1) * np.sinh(r2) * half_delta
        return 2 * np.arcsinh(np.sqrt(h))
    h = np.sin(0.5 * (r1 - r2)) ** 2 + np.sin(r1) * np.sin(r2) * half_delta
    h = np.clip(h, 0.0, 1.0)
    return 2 * np.arctan2(np.sqrt(h), np.sqrt(1 - h))


def gradient_arrays(kind, r1, t1, r2, t2, d):
    """
    Unit gradients of d(x, y) in x and in y, each as (a, b) coframe components.
    Undefined where d = 0 or at antipodal sphere points.
    """
    delta = np.asarray(t1) - np.asarray(t2)
    half_delta = np.sin(0.5 * delta) ** 2
    sine = np.sin(delta)
    sd = sn(kind, d)
    gxa = (sn(kind, r1 - r2) + 2 * cs(kind, r1) * sn(kind, r2) * half_delta) / sd
    gxb = sn(kind, r2) * sine / sd
    gya = (sn(kind, r2 - r1) + 2 * cs(kind, r2) * sn(kind, r1) * half_delta) / sd
    gyb = -sn(kind, r1) * sine / sd
    return gxa, gxb, gya, gyb


def rotation_arrays(gxa, gxb, gya, gyb):
    """
    Entries (r11, r12) of gx (x) gy + *gx (x) *gy; the matrix is
    [[r11, r12], [-r12, r11]].
    """
    return gxa * gya + gxb * gyb, gxa * gyb - gxb * gya


# --------------------------------------------------------------- operations

def distance(kind, x, y):
    "Geodesic distance; symmetric, in [0, pi] on the sphere."
    kind = check_kinds(kind, x, y)
    return float(distance_arrays(kind, x.c1, x.c2, y.c1, y.c2))


def _checked_separation(kind, x, y):
    d = distance(kind, x, y)
    if d == 0:
        raise CoincidentPointsError("distance derivatives are undefined at x = y")
    if kind == SurfaceKind.SPHERE and math.pi - d < CUT_LOCUS_GAP:
        raise CutLocusError("distance is not differentiable at antipodal points")
    return d


def distance_gradient(kind, x, y):
    "d_x d(x, y) in the unit coframe at x; a unit covector."
    kind = check_kinds(kind, x, y)
    d = _checked_separation(kind, x, y)
    gxa, gxb, _, _ = gradient_arrays(kind, x.c1, x.c2, y.c1, y.c2, d)
    return OneFormValue(gxa, gxb)


def hodge_star_1(v):
    return OneFormValue(-v.b, v.a)


def outer(u, v):
    return BiTensor1(u.a * v.a, u.a * v.b, u.b * v.a, u.b * v.b)


def mixed_distance_hessian(kind, x, y, F1, F2):
    """
    d_x d_y F(d(x, y)) given F1 = F'(d) and F2 = F''(d).

    The mixed second derivative of the distance is (1/sn(d)) *gx (x) *gy,
    so the result is F2 gx (x) gy + (F1 / sn(d)) *gx (x) *gy.
    """
    kind = check_kinds(kind, x, y)
    d = _checked_separation(kind, x, y)
    gxa, gxb, gya, gyb = gradient_arrays(kind, x.c1, x.c2, y.c1, y.c2, d)
    gx = OneFormValue(gxa, gxb)
    gy = OneFormValue(gya, gyb)
    along = outer(gx, gy).scaled(F2).as_array()
    across = outer(hodge_star_1(gx), hodge_star_1(gy)).scaled(F1 / float(sn(kind, d))).as_array()
    return BiTensor1.from_array(along + across)


def apply_i_plus_star(M):
    "(I + *x *y) M = [[a + d, b - c], [c - b, a + d]]."
    return BiTensor1(M.m11 + M.m22, M.m12 - M.m21, M.m21 - M.m12, M.m11 + M.m22)


def frame_rotation(theta):
    """
    Matrix taking Cartesian covector components to polar coframe components
    at polar angle theta.
    """
    c = math.cos(theta)
    s = math.sin(theta)
    return np.array([[c, s], [-s, c]])


# -------------------------------------------------------------- quadrature

class SurfaceGrid(object):

    """
    Product quadrature on a model surface.

    Sphere: Gauss-Legendre in cos(phi) times uniform theta.
    Planes: Gauss-Legendre radial panels on [0, radius] times uniform theta,
    with the area element r or sinh(r) folded into the weights.
    """

    sphere_nodes = 32
    panel_width = 0.5
    angular_nodes = 32

    def __init__(self, kind, n_radial=None, n_angular=None, radius=None, panels=None):
        self.kind = SurfaceKind.check(kind)
        self.n_angular = int(n_angular or (2 * self.sphere_nodes if self.kind == SurfaceKind.SPHERE
                                           else self.angular_nodes))
        theta = TWO_PI * np.arange(self.n_angular) / self.n_angular
        dtheta = TWO_PI / self.n_angular
        if self.kind == SurfaceKind.SPHERE:
            self.n_radial = int(n_radial or self.sphere_nodes)
            self.radius = math.pi
            self.panels = 1
            x, w = specfun.gauss_rule(self.n_radial)
            phi = np.arccos(x)
            radial_weights = w
        else:
            if radius is None:
                raise DomainError("planar grids need a truncation radius")
            self.radius = float(radius)
            self.panels = int(panels or max(1, int(math.ceil(self.radius / self.panel_width))))
            x, w = specfun.gauss_rule()
            edges = np.linspace(0.0, self.radius, self.panels + 1)
            half = 0.5 * np.diff(edges)
            phi = (edges[:-1, None] + half[:, None] * (x[None, :] + 1)).reshape(-1)
            radial_weights = (half[:, None] * w[None, :]).reshape(-1) * sn(self.kind, phi)
            self.n_radial = len(phi)
        c1, c2 = np.meshgrid(phi, theta, indexing="ij")
        self.c1 = c1.reshape(-1)
        self.c2 = c2.reshape(-1)
        self.weights = np.repeat(radial_weights * dtheta, self.n_angular)

    def refined(self):
        "Grid with twice the nodes in each direction."
        if self.kind == SurfaceKind.SPHERE:
            return SurfaceGrid(self.kind, 2 * self.n_radial, 2 * self.n_angular)
        return SurfaceGrid(self.kind, None, 2 * self.n_angular, self.radius, 2 * self.panels)

    def integrate(self, values):
        "Weighted sum over the last axis of sampled values."
        return np.dot(np.asarray(values, dtype=float), self.weights)

    def __len__(self):
        return len(self.weights)


def integrate_surface(kind, f, budget=None, grid=None, max_levels=4):
    """
    Integral of the scalar field f over the surface.  Returns (value, err_est),
    the estimate being the change from the last grid doubling plus the
    decay-hint tail beyond the truncation radius on the planes.
    """
    kind = SurfaceKind.check(kind)
    budget = specfun.get_budget(budget)
    tol = budget.abs_tol
    tail = 0.0
    if grid is None:
        if kind == SurfaceKind.SPHERE:
            grid = SurfaceGrid(kind)
        else:
            if f.decay is None:
                raise DomainError("integrals over the {} plane need a decay hint".format(kind))
            measure = "plane" if kind == SurfaceKind.EUCLIDEAN else "hyperbolic"
            radius = f.decay.radius_for(0.5 * tol, measure)
            tail = f.decay.tail_mass(radius, measure)
            grid = SurfaceGrid(kind, radius=max(radius, 1e-3))
    elif kind != grid.kind:
        raise KindMismatchError("grid on {} used for {}".format(grid.kind, kind))
    value = float(grid.integrate(f(grid.c1, grid.c2)))
    error = np.inf
    for level in range(max_levels):
        grid = grid.refined()
        finer = float(grid.integrate(f(grid.c1, grid.c2)))
        error = abs(finer - value)
        value = finer
        log.debug("integrate_surface {}: {} nodes, change {:.3g}".format(kind, len(grid), error))
        if error <= max(0.5 * tol, 64 * specfun.EPS * abs(value)):
            break
    else:
        raise NonconvergenceError("surface quadrature did not settle", value=value,
                                  achieved=error + tail)
    return value, error + tail
