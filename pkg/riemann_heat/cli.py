"""
Command line front end: riemann-heat {eval,grid,transform,quotient,verify}.

Angles are in radians.  Points on the model surfaces are given in geodesic
polar coordinates "c1,c2": (r, theta) on the planes, (phi, theta) on the
sphere.  Flat quotient models take Cartesian "x,y".  Ranges are
"start:stop:count" (count 0 gives an empty range).

Exit codes: 0 success, 1 failed verification, 2 invalid input,
3 numerical nonconvergence.  Errors print one line on stderr:
riemann-heat: error[<category>]: <message>
"""

import argparse
import logging
import sys
import numpy as np

from . import kernels
from . import quotient
from . import suites
from .json_mixin import JsonMixin
from .specfun import DomainError, NonconvergenceError, ToleranceBudget
from .geometry import SurfaceKind, Point

log = logging.getLogger(__name__)

PROGRAM = "riemann-heat"

# Largest number of output rows a single command may request.
MAX_ROWS = 10 ** 6

# Default budget of the quotient command on flat models, where image
# terms are closed form.
FLAT_QUOTIENT_TOL = 1e-12

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_NONCONVERGENCE = 3


class UsageError(Exception):
    """
    Invalid command line.
    """


class OutputRecord(JsonMixin):

    """
    One kernel evaluation: the inputs echoed with value, error estimate and
    truncation metadata.
    """

    json_atts = ["surface", "degree", "x1", "x2", "y1", "y2", "t", "value",
                 "err_est", "terms", "radius"]

    def __init__(self, surface, degree, x, y, t, result):
        self.surface = surface
        self.degree = degree
        (self.x1, self.x2) = x
        (self.y1, self.y2) = y
        self.t = float(t)
        self.err_est = result.err_est
        self.terms = result.terms
        self.radius = result.radius
        self.load_result(result)

    def load_result(self, result):
        self.value = result.value

    @classmethod
    def for_degree(cls, degree):
        return MatrixRecord if degree == 1 else OutputRecord


class MatrixRecord(OutputRecord):

    json_atts = ["surface", "degree", "x1", "x2", "y1", "y2", "t", "m11", "m12", "m21", "m22",
                 "err_est", "terms", "radius"]

    def load_result(self, result):
        m = result.matrix
        (self.m11, self.m12, self.m21, self.m22) = (m.m11, m.m12, m.m21, m.m22)


class TransformRecord(JsonMixin):

    """
    One Mehler-Fock sample.  exact holds the closed form or the original
    profile when one is known, nan otherwise.
    """

    json_atts = ["direction", "profile", "coordinate", "value", "exact", "err_est"]

    def __init__(self, direction, profile, coordinate, value, exact, err_est):
        self.direction = direction
        self.profile = profile
        self.coordinate = float(coordinate)
        self.value = float(value)
        self.exact = float(exact)
        self.err_est = float(err_est)


class ArgumentParser(argparse.ArgumentParser):

    "Parser that raises UsageError instead of exiting."

    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- parsing

def parse_pair(text):
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError("expected two comma separated numbers: " + repr(text))
    if len(values) != 2:
        raise UsageError("expected two comma separated numbers: " + repr(text))
    return tuple(values)


def parse_floats(text, count):
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError("expected {} comma separated numbers: {!r}".format(count, text))
    if len(values) != count:
        raise UsageError("expected {} comma separated numbers: {!r}".format(count, text))
    return values


def parse_range(text):
    "start:stop:count, or a single number."
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) != 3:
            raise ValueError(text)
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError("ranges are start:stop:count: " + repr(text))
    if count < 0 or count > MAX_ROWS:
        raise UsageError("range count must lie in [0, {}]: {}".format(MAX_ROWS, count))
    return np.linspace(start, stop, count)


def parse_surface(text):
    try:
        return SurfaceKind.check(text)
    except DomainError:
        raise UsageError("surface must be plane, sphere or hyperbolic: " + repr(text))


def common_options():
    common = ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="output format (default csv)")
    common.add_argument("--tol", type=float, default=None,
                        help="absolute error budget (verify: override every check tolerance)")
    common.add_argument("--out", default=None, help="write output to this file")
    common.add_argument("--verbose", "-v", action="count", default=0,
                        help="log progress to stderr (twice for debug)")
    return common


def make_parser():
    common = common_options()
    parser = ArgumentParser(prog=PROGRAM, description=__doc__,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
    commands = parser.add_subparsers(dest="command")
    surface_help = "plane, sphere or hyperbolic"

    sub = commands.add_parser("eval", parents=[common], help="kernel at point pairs")
    sub.add_argument("--surface", type=parse_surface, required=True, help=surface_help)
    sub.add_argument("--degree", type=int, choices=(0, 1, 2), default=0)
    sub.add_argument("--x", type=parse_pair, action="append", required=True, help="c1,c2 (repeatable)")
    sub.add_argument("--y", type=parse_pair, action="append", required=True, help="c1,c2 (repeatable)")
    sub.add_argument("--t", type=float, required=True, help="heat time")

    sub = commands.add_parser("grid", parents=[common], help="kernel over coordinate and time ranges")
    sub.add_argument("--surface", type=parse_surface, required=True, help=surface_help)
    sub.add_argument("--degree", type=int, choices=(0, 1, 2), default=0)
    sub.add_argument("--x1", type=parse_range, required=True, help="range of c1 at x")
    sub.add_argument("--x2", type=parse_range, default=np.array([0.0]), help="range of c2 at x")
    sub.add_argument("--y", type=parse_pair, default=(0.0, 0.0), help="fixed point c1,c2")
    sub.add_argument("--t", type=parse_range, required=True, help="range of heat times")

    sub = commands.add_parser("transform", parents=[common], help="order one Mehler-Fock transform")
    sub.add_argument("--direction", choices=("forward", "inverse", "roundtrip"), default="forward")
    sub.add_argument("--profile", choices=("gaussian", "tanh", "heat"), default="gaussian")
    sub.add_argument("--s", type=float, default=0.5, help="heat time of the heat profile")
    sub.add_argument("--rho", type=parse_range, default=None,
                     help="spectral samples (forward, default 0:5:11)")
    sub.add_argument("--r", type=parse_range, default=None,
                     help="radial samples (inverse and roundtrip, default 0.05:3:30)")

    sub = commands.add_parser("quotient", parents=[common], help="image sum kernels on quotients")
    sub.add_argument("--model", required=True,
                     help="torus, cylinder, hyperbolic-cylinder, plane or hyperbolic-plane")
    sub.add_argument("--lattice", default=None, help="v1x,v1y,v2x,v2y for the torus")
    sub.add_argument("--generator", type=parse_pair, default=None, help="vx,vy for the cylinder")
    sub.add_argument("--ell", type=float, default=None, help="hyperbolic cylinder translation length")
    sub.add_argument("--degree", type=int, choices=(0, 1), default=0)
    sub.add_argument("--x", type=parse_pair, required=True,
                     help="Cartesian x,y on flat models, polar r,theta on hyperbolic ones")
    sub.add_argument("--y", type=parse_pair, required=True)
    sub.add_argument("--t", type=float, required=True)

    sub = commands.add_parser("verify", parents=[common], help="run verification suites")
    sub.add_argument("--suite", choices=list(suites.SUITES) + ["all"], default="all")
    return parser


def budget_for(args):
    if args.tol is None or args.command == "verify":
        return ToleranceBudget()
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    return ToleranceBudget(abs_tol=args.tol)


# --------------------------------------------------------------- commands

def evaluate(kind, degree, x, y, t, budget):
    "Library kernel call for one pair."
    if degree == 1:
        return kernels.k1(kind, x, y, t, budget)
    if degree == 2:
        return kernels.k2(kind, x, y, t, budget)
    return kernels.k0(kind, x, y, t, budget)


def run_eval(args, budget):
    if len(args.x) != len(args.y):
        raise UsageError("--x and --y must be given the same number of times")
    kind = args.surface
    cls = OutputRecord.for_degree(args.degree)
    records = []
    for (xc, yc) in zip(args.x, args.y):
        x = Point(kind, *xc)
        y = Point(kind, *yc)
        result = evaluate(kind, args.degree, x, y, args.t, budget)
        records.append(cls(kind, args.degree, xc, yc, args.t, result))
    return cls, records


def run_grid(args, budget):
    kind = args.surface
    rows = len(args.x1) * len(args.x2) * len(args.t)
    if rows > MAX_ROWS:
        raise UsageError("grid would produce {} rows, more than {}".format(rows, MAX_ROWS))
    cls = OutputRecord.for_degree(args.degree)
    y = Point(kind, *args.y)
    records = []
    for c1 in args.x1:
        for c2 in args.x2:
            x = Point(kind, c1, c2)
            for t in args.t:
                result = evaluate(kind, args.degree, x, y, t, budget)
                records.append(cls(kind, args.degree, (c1, c2), args.y, t, result))
    return cls, records


def run_transform(args, budget):
    shape = suites.transform_profiles(args.s, budget)[args.profile]
    records = []
    if args.direction == "forward":
        rho = args.rho if args.rho is not None else np.linspace(0.0, 5.0, 11)
        if rho.size:
            values, err = shape.forward(rho, budget)
            exact = shape.spectrum(rho) if shape.spectrum is not None else np.full(rho.shape, np.nan)
            for (p, v, e) in zip(rho, np.atleast_1d(values), np.atleast_1d(exact)):
                records.append(TransformRecord("forward", shape.name, p, v, e, err))
        return TransformRecord, records
    r = args.r if args.r is not None else np.linspace(0.05, 3.0, 30)
    if not r.size:
        return TransformRecord, records
    if args.direction == "inverse":
        if shape.spectrum is None:
            raise UsageError("inverse needs a profile with a closed form transform (heat)")
        fhat = shape.spectrum
    else:
        fhat = lambda rho: shape.forward(rho, budget)[0]
    values, err = shape.inverse(fhat, r, budget)
    exact = shape.profile(r)
    values = np.atleast_1d(values)
    for (c, v, e) in zip(r, values, exact):
        records.append(TransformRecord(args.direction, shape.name, c, v, e, err))
    if args.direction == "roundtrip":
        relative = float(np.linalg.norm(values - exact) / np.linalg.norm(exact))
        log.info("roundtrip relative L2 error {:.3g}".format(relative))
        records.append(TransformRecord("roundtrip-l2", shape.name, np.nan, relative, 0.0, err))
    return TransformRecord, records


def quotient_points(group, args):
    if group.base == SurfaceKind.EUCLIDEAN:
        return Point.from_cartesian(*args.x), Point.from_cartesian(*args.y)
    return Point(group.base, *args.x), Point(group.base, *args.y)


def run_quotient(args, budget):
    lattice = parse_floats(args.lattice, 4) if args.lattice is not None else None
    group = quotient.CoveringGroupSpec.from_model(args.model, lattice, args.generator, args.ell)
    if args.tol is None and group.base == SurfaceKind.EUCLIDEAN:
        budget = budget.with_tol(FLAT_QUOTIENT_TOL)
    q = quotient.QuotientSurface(group)
    x, y = quotient_points(group, args)
    x = q.representative(x)
    y = q.representative(y)
    if args.degree == 1:
        result = quotient.k1_quotient_flat(q, x, y, args.t, budget)
    else:
        result = quotient.k0_quotient(q, x, y, args.t, budget)
    cls = OutputRecord.for_degree(args.degree)
    return cls, [cls(args.model, args.degree, args.x, args.y, args.t, result)]


def run_verify(args, budget):
    if args.tol is not None and not args.tol > 0:
        raise UsageError("--tol must be positive")
    return suites.CheckRecord, suites.run_suites(args.suite, args.tol)


COMMANDS = {
    "eval": run_eval,
    "grid": run_grid,
    "transform": run_transform,
    "quotient": run_quotient,
    "verify": run_verify,
}


def render(cls, records, fmt):
    "Output lines in record order."
    if fmt == "json":
        return [record.as_json() for record in records]
    return [cls.csv_header()] + [record.csv_row() for record in records]


def fail(category, message, code):
    sys.stderr.write("{}: error[{}]: {}\n".format(PROGRAM, category, " ".join(str(message).split())))
    return code


def main(argv=None):
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        return fail("usage", e, EXIT_USAGE)
    if args.command is None:
        return fail("usage", "a command is required: " + ", ".join(sorted(COMMANDS)), EXIT_USAGE)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(name)s %(levelname)s: %(message)s")
    try:
        budget = budget_for(args)
        cls, records = COMMANDS[args.command](args, budget)
    except UsageError as e:
        return fail("usage", e, EXIT_USAGE)
    except quotient.UnsupportedGroupError as e:
        return fail("unsupported", e, EXIT_USAGE)
    except NonconvergenceError as e:
        return fail("nonconvergence", e, EXIT_NONCONVERGENCE)
    except DomainError as e:
        return fail("domain", e, EXIT_USAGE)
    text = "\n".join(render(cls, records, args.format)) + "\n"
    if args.out is not None:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "verify":
        failed = [record for record in records if not record.passed]
        if failed:
            return fail("verify", "{} of {} checks failed".format(len(failed), len(records)),
                        EXIT_FAILED)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
