"""
Heat kernels on quotient surfaces by summing over a covering group.

K_M(x, y, t) = sum over g of K_U(x, g y, t) for the euclidean lattice
(torus) and cyclic (flat cylinder) groups and for the cyclic group of
translations along a hyperbolic geodesic (hyperbolic cylinder).  Image
sums are truncated at a radius chosen from shell bounds: the number of
images in each unit shell times the kernel bound on that shell.
"""

import logging
import math
import numpy as np

from . import specfun
from . import geometry
from . import kernels
from .specfun import DomainError, NonconvergenceError, get_budget
from .geometry import SurfaceKind, Point, BiTensor1

log = logging.getLogger(__name__)

# Largest image enumeration attempted.
MAX_ELEMENTS = 10 ** 7

# Shells summed in truncation tail bounds.
TAIL_SHELLS = 400


class UnsupportedGroupError(specfun.HeatKernelError, NotImplementedError):
    """
    The operation is not available for this covering group.
    """


class OrientationError(DomainError):
    """
    The model needs orientation reversing covering isometries.
    """


class EnumerationOverflowError(NonconvergenceError):
    """
    The truncation radius would need more than MAX_ELEMENTS images.
    """


class CoveringGroupSpec(object):

    """
    Generators of an abelian covering group acting by orientation preserving
    isometries: a euclidean lattice (v1, v2), a euclidean cyclic group (v),
    a hyperbolic cyclic group translating by ell along the theta = 0
    geodesic, or the trivial group on either plane.
    """

    LATTICE = "euclidean_lattice"
    CYCLIC = "euclidean_cyclic"
    HYPERBOLIC_CYCLIC = "hyperbolic_cyclic"
    TRIVIAL = "trivial"

    orientation_reversing = ("klein-bottle", "projective-plane")

    def __init__(self, variant, vectors=(), ell=None, base=SurfaceKind.EUCLIDEAN):
        self.variant = variant
        self.vectors = np.array(vectors, dtype=float).reshape(-1, 2)
        self.ell = ell
        self.base = SurfaceKind.check(base)

    @classmethod
    def lattice(cls, v1, v2):
        group = cls(cls.LATTICE, [v1, v2])
        if not abs(group.determinant) > 1e-12 * max(1.0, np.max(np.abs(group.vectors)) ** 2):
            raise DomainError("lattice generators must be linearly independent")
        return group

    @classmethod
    def cyclic(cls, v):
        group = cls(cls.CYCLIC, [v])
        if not np.hypot(*group.vectors[0]) > 0:
            raise DomainError("cyclic generator must be a nonzero translation")
        return group

    @classmethod
    def hyperbolic_cyclic(cls, ell):
        if not (ell > 0 and np.isfinite(ell)):
            raise DomainError("translation length must be positive: " + repr(ell))
        return cls(cls.HYPERBOLIC_CYCLIC, ell=float(ell), base=SurfaceKind.HYPERBOLIC)

    @classmethod
    def trivial(cls, base=SurfaceKind.EUCLIDEAN):
        return cls(cls.TRIVIAL, base=base)

    @classmethod
    def from_model(cls, name, lattice=None, generator=None, ell=None):
        """
        Named quotient models: torus, cylinder, hyperbolic-cylinder, plane,
        hyperbolic-plane.
        """
        if name in cls.orientation_reversing:
            raise OrientationError(
                "{} needs orientation reversing isometries; image sums here assume "
                "covering isometries that preserve orientation".format(name))
        if name == "torus":
            lattice = lattice if lattice is not None else (1.0, 0.0, 0.0, 1.0)
            return cls.lattice(lattice[:2], lattice[2:4])
        if name == "cylinder":
            return cls.cyclic(generator if generator is not None else (1.0, 0.0))
        if name == "hyperbolic-cylinder":
            return cls.hyperbolic_cyclic(ell if ell is not None else 1.0)
        if name in ("plane", "trivial"):
            return cls.trivial(SurfaceKind.EUCLIDEAN)
        if name == "hyperbolic-plane":
            return cls.trivial(SurfaceKind.HYPERBOLIC)
        raise DomainError("unknown quotient model: " + repr(name))

    @property
    def rank(self):
        return {self.LATTICE: 2, self.CYCLIC: 1, self.HYPERBOLIC_CYCLIC: 1}.get(self.variant, 0)

    @property
    def matrix(self):
        "Generators as matrix columns."
        return self.vectors.T

    @property
    def determinant(self):
        return float(np.linalg.det(self.matrix))

    @property
    def area(self):
        if self.variant != self.LATTICE:
            raise UnsupportedGroupError("only lattices have a compact fundamental domain")
        return abs(self.determinant)

    def identity(self):
        return GroupElement(self, (0,) * self.rank)

    def element(self, *k):
        return GroupElement(self, k)

    def count_bound(self, s):
        "Bound on the number of images within distance s of any point."
        s = np.asarray(s, dtype=float)
        if self.variant == self.LATTICE:
            diameter = float(np.sum(np.hypot(self.vectors[:, 0], self.vectors[:, 1])))
            return math.pi * (s + diameter) ** 2 / self.area
        if self.variant == self.CYCLIC:
            return 2 * s / float(np.hypot(*self.vectors[0])) + 1
        if self.variant == self.HYPERBOLIC_CYCLIC:
            return 2 * s / self.ell + 1
        return np.ones_like(s)

    def __repr__(self):
        if self.variant == self.HYPERBOLIC_CYCLIC:
            return "CoveringGroupSpec({!r}, ell={!r})".format(self.variant, self.ell)
        return "CoveringGroupSpec({!r}, {!r})".format(self.variant, self.vectors.tolist())


class GroupElement(object):

    """
    Integer coordinates of an element of an abelian covering group.
    """

    def __init__(self, group, k):
        self.group = group
        self.k = tuple(int(i) for i in k)
        if len(self.k) != group.rank:
            raise DomainError("group element needs {} coordinates".format(group.rank))

    def compose(self, other):
        return GroupElement(self.group, [a + b for (a, b) in zip(self.k, other.k)])

    def inverse(self):
        return GroupElement(self.group, [-a for a in self.k])

    def is_identity(self):
        return not any(self.k)

    def __eq__(self, other):
        return isinstance(other, GroupElement) and self.k == other.k

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.k)

    def __repr__(self):
        return "GroupElement({!r})".format(self.k)


# ------------------------------------------------------ hyperbolic helpers

def hyperboloid(p):
    "Hyperboloid model coordinates (X0, X1, X2) of a hyperbolic point."
    r = p.c1
    return (math.cosh(r), math.sinh(r) * math.cos(p.c2), math.sinh(r) * math.sin(p.c2))


def from_hyperboloid(X0, X1, X2):
    return Point(SurfaceKind.HYPERBOLIC, math.asinh(math.hypot(X1, X2)), math.atan2(X2, X1))


def translate_along_axis(p, s):
    "Hyperbolic translation by signed length s along the theta = 0 geodesic."
    if p.kind != SurfaceKind.HYPERBOLIC:
        raise geometry.KindMismatchError("axis translation acts on hyperbolic points")
    if s == 0:
        return p
    (X0, X1, X2) = hyperboloid(p)
    ch = math.cosh(s)
    sh = math.sinh(s)
    return from_hyperboloid(ch * X0 + sh * X1, sh * X0 + ch * X1, X2)


def fermi_coordinates(p):
    "(u, v): signed length along the theta = 0 axis and signed distance from it."
    (X0, X1, X2) = hyperboloid(p)
    return math.atanh(X1 / X0), math.asinh(X2)


# -------------------------------------------------------------- operations

def act(g, p):
    "Image of p under the group element g."
    group = g.group
    if p.kind != group.base:
        raise geometry.KindMismatchError("{} acts on {} points".format(group.variant, group.base))
    if g.is_identity():
        return p
    if group.variant == CoveringGroupSpec.HYPERBOLIC_CYCLIC:
        return translate_along_axis(p, g.k[0] * group.ell)
    shift = np.dot(group.matrix, np.array(g.k, dtype=float))
    (x, y) = p.cartesian()
    return Point.from_cartesian(x + shift[0], y + shift[1])


class QuotientSurface(object):

    """
    Base surface with a covering group and its fundamental domain:
    lattice parallelogram coordinates in [0, 1)**2, the cyclic strip
    coordinate in [0, 1), or the hyperbolic axis coordinate in [-ell/2, ell/2).
    """

    def __init__(self, group):
        self.group = group
        self.base = group.base

    def reduce(self, p):
        "(representative, g) with g applied to p giving the representative."
        group = self.group
        if p.kind != self.base:
            raise geometry.KindMismatchError("point on {} reduced on {}".format(p.kind, self.base))
        if group.variant == CoveringGroupSpec.TRIVIAL:
            return p, group.identity()
        if group.variant == CoveringGroupSpec.HYPERBOLIC_CYCLIC:
            (u, _) = fermi_coordinates(p)
            k = (-int(math.floor((u + 0.5 * group.ell) / group.ell)),)
        else:
            cart = np.array(p.cartesian())
            if group.variant == CoveringGroupSpec.LATTICE:
                coords = np.linalg.solve(group.matrix, cart)
            else:
                v = group.vectors[0]
                coords = np.array([np.dot(cart, v) / np.dot(v, v)])
            k = tuple(-int(c) for c in np.floor(coords))
        g = GroupElement(group, k)
        if g.is_identity():
            return p, g
        return act(g, p), g

    def representative(self, p):
        return self.reduce(p)[0]


def reduce(q, p):
    return q.reduce(p)


def _as_quotient(q):
    if isinstance(q, CoveringGroupSpec):
        return QuotientSurface(q)
    return q


def enumerate_elements(group, x, y, radius):
    """
    All g with distance(x, g y) <= radius, sorted lexicographically by
    their integer coordinates.
    """
    if not radius > 0:
        raise DomainError("enumeration radius must be positive: " + repr(radius))
    base = group.base
    geometry.check_kinds(base, x, y)
    if group.variant == CoveringGroupSpec.TRIVIAL:
        if geometry.distance(base, x, y) <= radius:
            return [group.identity()]
        return []
    if group.variant == CoveringGroupSpec.HYPERBOLIC_CYCLIC:
        (ux, _) = fermi_coordinates(x)
        (uy, _) = fermi_coordinates(y)
        lo = int(math.ceil((ux - uy - radius) / group.ell))
        hi = int(math.floor((ux - uy + radius) / group.ell))
        if hi - lo + 1 > MAX_ELEMENTS:
            raise EnumerationOverflowError("radius {} needs {} images".format(radius, hi - lo + 1))
        found = []
        for k in range(lo, hi + 1):
            g = GroupElement(group, (k,))
            if geometry.distance(base, x, act(g, y)) <= radius:
                found.append(g)
        return found
    w = np.array(x.cartesian()) - np.array(y.cartesian())
    reach = radius + float(np.hypot(*w))
    if group.variant == CoveringGroupSpec.LATTICE:
        smallest = float(np.linalg.svd(group.matrix, compute_uv=False)[-1])
        bound = int(math.floor(reach / smallest))
        if (2 * bound + 1) ** 2 > MAX_ELEMENTS:
            raise EnumerationOverflowError("radius {} needs more than {} images".format(
                radius, MAX_ELEMENTS))
        axis = np.arange(-bound, bound + 1)
        k1, k2 = np.meshgrid(axis, axis, indexing="ij")
        k = np.stack([k1.reshape(-1), k2.reshape(-1)], axis=1)
    else:
        bound = int(math.floor(reach / float(np.hypot(*group.vectors[0]))))
        if 2 * bound + 1 > MAX_ELEMENTS:
            raise EnumerationOverflowError("radius {} needs more than {} images".format(
                radius, MAX_ELEMENTS))
        k = np.arange(-bound, bound + 1)[:, None]
    shifts = np.dot(k, group.vectors)
    gaps = np.hypot(w[0] - shifts[:, 0], w[1] - shifts[:, 1])
    return [GroupElement(group, row) for row in k[gaps <= radius]]


def _image_distances(group, x, y, elements):
    base = group.base
    if group.variant in (CoveringGroupSpec.LATTICE, CoveringGroupSpec.CYCLIC) and elements:
        w = np.array(x.cartesian()) - np.array(y.cartesian())
        shifts = np.dot(np.array([g.k for g in elements], dtype=float), group.vectors)
        return np.hypot(w[0] - shifts[:, 0], w[1] - shifts[:, 1])
    return np.array([geometry.distance(base, x, act(g, y)) for g in elements])


def _shell_bound(count, sup, radius):
    "sum over unit shells [radius + j, radius + j + 1) of count(outer) * sup(inner)."
    inner = radius + np.arange(TAIL_SHELLS)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        terms = count(inner + 1) * sup(inner)
    return float(np.sum(terms[np.isfinite(terms)]))


def _truncation_radius(count, sup, target):
    "Smallest radius with _shell_bound below target, by bisection after doubling."
    lo = 0.0
    hi = 0.5
    while _shell_bound(count, sup, hi) > target:
        lo = hi
        hi *= 2
        if hi > 1e4:
            raise NonconvergenceError("no image truncation radius below 1e4")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _shell_bound(count, sup, mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-9 * hi:
            break
    return hi


def _kernel_sup(base, t):
    "Bound on K0 over the shell [s, s + 1]."
    if base == SurfaceKind.EUCLIDEAN:
        return lambda s: np.exp(-s * s / (4 * t)) / (4 * math.pi * t)
    return lambda s: kernels.h2_majorant(np.maximum(s, 1e-300), t)


def image_radius(group, t, tol):
    "Image sum truncation radius; depends only on the group, t and tol."
    return _truncation_radius(group.count_bound, _kernel_sup(group.base, t), tol)


def image_sum(q, x, y, t, budget=None):
    """
    Truncated image sum of the base surface K0 with its error estimate.
    Returns (value, err_est, number of images, radius).
    """
    q = _as_quotient(q)
    group = q.group
    t = kernels.time_value(t)
    budget = get_budget(budget)
    tol = budget.abs_tol
    radius = image_radius(group, t, 0.5 * tol)
    tail = _shell_bound(group.count_bound, _kernel_sup(group.base, t), radius)
    elements = enumerate_elements(group, x, y, radius)
    d = _image_distances(group, x, y, elements)
    share = budget.with_tol(0.5 * tol / max(1, len(elements)))
    values, err, _, _ = kernels.k0_profile(group.base, d, t, share)
    value = math.fsum(np.asarray(values, dtype=float).tolist())
    log.debug("image sum: {} images within radius {:.4g}".format(len(elements), radius))
    return value, tail + len(elements) * err, len(elements), radius


def k0_quotient(q, x, y, t, budget=None):
    "Scalar heat kernel on the quotient surface at representatives x, y."
    (value, err, terms, radius) = image_sum(q, x, y, t, budget)
    return kernels.Kernel0Value(value, err, terms, radius)


def _flat_group(q):
    group = _as_quotient(q).group
    if group.base != SurfaceKind.EUCLIDEAN:
        raise UnsupportedGroupError(
            "1-form image sums need the frame transport of {}; only euclidean "
            "translation groups are supported".format(group.variant))
    return group


def k1_quotient_flat(q, x, y, t, budget=None):
    """
    1-form kernel on a flat quotient.  Translations fix Cartesian frames, so
    the image sum is (sum of K0) times the identity in Cartesian components,
    rotated into the polar coframes at x and y.
    """
    _flat_group(q)
    (value, err, terms, radius) = image_sum(q, x, y, t, budget)
    frame = np.dot(geometry.frame_rotation(x.c2), geometry.frame_rotation(y.c2).T)
    return kernels.Kernel1Value(BiTensor1.from_array(value * frame), err, terms, radius)


def torus_fourier_oracle(lattice, x, y, t, budget=None):
    """
    (1/area) sum over the dual lattice of exp(-4 pi^2 |k|^2 t) cos(2 pi k.(x - y)).
    """
    if lattice.variant != CoveringGroupSpec.LATTICE:
        raise UnsupportedGroupError("the Fourier oracle needs a lattice")
    t = float(t)
    if not t >= kernels.T_MIN:
        raise NonconvergenceError("dual lattice sum at t = {} would need too many terms".format(t))
    budget = get_budget(budget)
    area = lattice.area
    dual = np.linalg.inv(lattice.matrix).T
    dual_vectors = dual.T
    dual_area = 1.0 / area
    diameter = float(np.sum(np.hypot(dual_vectors[:, 0], dual_vectors[:, 1])))

    def count(s):
        return math.pi * (s + diameter) ** 2 / dual_area

    def sup(s):
        return np.exp(-4 * math.pi ** 2 * s * s * t) / area

    radius = _truncation_radius(count, sup, 0.5 * budget.abs_tol)
    smallest = float(np.linalg.svd(dual, compute_uv=False)[-1])
    bound = int(math.floor(radius / smallest))
    if (2 * bound + 1) ** 2 > MAX_ELEMENTS:
        raise EnumerationOverflowError("dual radius {} needs too many terms".format(radius))
    axis = np.arange(-bound, bound + 1)
    k1, k2 = np.meshgrid(axis, axis, indexing="ij")
    k = np.stack([k1.reshape(-1), k2.reshape(-1)], axis=1).astype(float)
    freq = np.dot(k, dual_vectors)
    w = np.array(x.cartesian()) - np.array(y.cartesian())
    norms = np.hypot(freq[:, 0], freq[:, 1])
    keep = norms <= radius
    terms = np.exp(-4 * math.pi ** 2 * norms[keep] ** 2 * t) * np.cos(2 * math.pi * np.dot(freq[keep], w))
    value = math.fsum(terms.tolist()) / area
    return kernels.Kernel0Value(value, _shell_bound(count, sup, radius), int(np.sum(keep)), radius)


def fundamental_grid(q, n):
    "Points and weights of the periodic n x n rule on the lattice parallelogram."
    group = _as_quotient(q).group
    if group.variant != CoveringGroupSpec.LATTICE:
        raise UnsupportedGroupError("only lattice quotients have a compact fundamental domain")
    c = np.arange(n) / float(n)
    c1, c2 = np.meshgrid(c, c, indexing="ij")
    coords = np.stack([c1.reshape(-1), c2.reshape(-1)], axis=1)
    cart = np.dot(coords, group.vectors)
    points = [Point.from_cartesian(px, py) for (px, py) in cart]
    return points, group.area / (n * n)


def integrate_fundamental_domain(q, f, n=32):
    "Periodic trapezoidal rule for the integral of f(Point) over the fundamental domain."
    points, weight = fundamental_grid(q, n)
    return weight * math.fsum(float(f(p)) for p in points)


def apply_k1_flat(q, field, t, points, n=32, budget=None):
    """
    1-form heat semigroup on a flat torus.  field(X, Y) returns the Cartesian
    components (nu_x, nu_y) at arrays of Cartesian coordinates; the result is
    an array of Cartesian components at each point.
    """
    _flat_group(q)
    nodes, weight = fundamental_grid(q, n)
    xy = np.array([p.cartesian() for p in nodes])
    nu = np.asarray(field(xy[:, 0], xy[:, 1]), dtype=float).reshape(2, -1) * np.ones((2, len(nodes)))
    result = []
    for p in points:
        sums = np.array([image_sum(q, p, z, t, budget)[0] for z in nodes])
        result.append(weight * np.dot(nu, sums))
    return np.array(result)
