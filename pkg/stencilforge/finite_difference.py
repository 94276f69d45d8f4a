"""Finite-difference weights and stencil expansion of derivatives."""
import logging
from fractions import Fraction

from .algebra import functions_of
from .algebra import simplify
from .algebra import substitute
from .expression import Add
from .expression import FunctionApp
from .expression import Mul
from .expression import Pow
from .expression import TIME_DIMENSION
from .expression import as_expr
from .expression import const
from .util import to_fraction


log = logging.getLogger(__name__)


class InsufficientPoints(ValueError):
    pass


class DuplicateOffsets(ValueError):
    pass


class BadDimension(ValueError):
    pass


class MissingTimeDimension(ValueError):
    pass


class InvalidOrder(ValueError):
    pass


def fd_weights(derivative_order, offsets, center=0):
    """Exact finite-difference weights by Fornberg's recurrence.

    Returns weights ``w`` such that ``sum(w[k] * f(center + offsets[k]))``
    approximates the derivative at ``center`` for unit spacing and is exact
    for polynomials of degree below ``len(offsets)``.

    >>> fd_weights(1, [0, 1, 2])
    [Fraction(-3, 2), Fraction(2, 1), Fraction(-1, 2)]
    """
    if derivative_order < 0:
        raise InvalidOrder(
            'Derivative order must be non-negative: {}'.format(
                derivative_order
            )
        )
    x = [to_fraction(o) for o in offsets]
    if len(set(x)) != len(x):
        raise DuplicateOffsets('Duplicate offsets: {!r}'.format(offsets))
    if len(x) < derivative_order + 1:
        raise InsufficientPoints(
            '{} points cannot approximate derivative of order {}'.format(
                len(x), derivative_order
            )
        )

    z = to_fraction(center)
    m = derivative_order
    n = len(x) - 1
    c = [[Fraction(0)] * (m + 1) for _ in range(n + 1)]
    c[0][0] = Fraction(1)
    c1 = Fraction(1)
    c4 = x[0] - z
    for i in range(1, n + 1):
        mn = min(i, m)
        c2 = Fraction(1)
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i][k] = c1 * (
                        k * c[i - 1][k - 1] - c5 * c[i - 1][k]
                    ) / c2
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2
            for k in range(mn, 0, -1):
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3
            c[j][0] = c4 * c[j][0] / c3
        c1 = c2
    return [row[m] for row in c]


def centered_offsets(derivative_order, accuracy_order):
    if accuracy_order % 2:
        raise InvalidOrder(
            'Centered stencils need an even accuracy order: {}'.format(
                accuracy_order
            )
        )
    p = (derivative_order + 1) // 2 - 1 + accuracy_order // 2
    return list(range(-p, p + 1))


def forward_offsets(derivative_order, accuracy_order):
    return list(range(derivative_order + accuracy_order))


def stencil_offsets(derivative_order, accuracy_order):
    """Centered offsets for even accuracy, one-sided forward for odd."""
    if accuracy_order < 1:
        raise InvalidOrder(
            'Accuracy order must be positive: {}'.format(accuracy_order)
        )
    if accuracy_order % 2:
        return forward_offsets(derivative_order, accuracy_order)
    return centered_offsets(derivative_order, accuracy_order)


class StencilSpec(object):
    def __init__(self, derivative_order, accuracy_order, offsets=None):
        self.derivative_order = derivative_order
        self.accuracy_order = accuracy_order
        if offsets is None:
            offsets = stencil_offsets(derivative_order, accuracy_order)
        self.offsets = list(offsets)
        self.weights = fd_weights(derivative_order, self.offsets)

    @property
    def radius(self):
        return max(abs(o) for o in self.offsets)

    def items(self):
        return zip(self.offsets, self.weights)

    def __repr__(self):
        return '<StencilSpec d={} acc={} offsets={}>'.format(
            self.derivative_order, self.accuracy_order, self.offsets
        )


def _function_of(func, registry):
    from .data import metadata_of

    func = as_expr(func)
    if not isinstance(func, FunctionApp):
        raise BadDimension(
            'Derivatives apply to function applications: {}'.format(func)
        )
    return func, metadata_of(func, registry=registry)


def as_finite_diff(func, dim, derivative_order, accuracy_order=None,
                   offsets=None, registry=None):
    """Replaces a derivative of a function application by its stencil.

    ``accuracy_order`` defaults to the space order of the function for
    spatial dimensions and its time order for the time dimension.
    """
    func, meta = _function_of(func, registry)
    if dim not in meta.dimensions:
        if dim == TIME_DIMENSION:
            raise MissingTimeDimension(
                '{} has no time dimension'.format(meta.name)
            )
        raise BadDimension(
            '{} is not a dimension of {}'.format(dim, meta.name)
        )
    if accuracy_order is None:
        if dim == TIME_DIMENSION:
            accuracy_order = meta.time_order
        else:
            accuracy_order = meta.space_order
    spec = StencilSpec(derivative_order, accuracy_order, offsets=offsets)
    if dim == TIME_DIMENSION and (
            max(spec.offsets) - min(spec.offsets) > meta.time_order
    ):
        raise InvalidOrder(
            '{} with time order {} cannot hold offsets {}'.format(
                meta.name, meta.time_order, spec.offsets
            )
        )

    position = meta.dimensions.index(dim)
    spacing = meta.spacing_of(dim)
    arg = func.args[position]
    terms = []
    for offset, weight in spec.items():
        if weight == 0:
            continue
        args = list(func.args)
        args[position] = Add(arg, Mul(const(offset), spacing))
        terms.append(Mul(
            const(weight),
            FunctionApp(func.name, args),
            Pow(spacing, const(-derivative_order)),
        ))
    return simplify(Add(*terms))


def derivative(expr, dim, derivative_order=1, accuracy_order=None,
               registry=None):
    """Applies a stencil to every registered function application.

    Nested application builds mixed derivatives.
    """
    from .data import is_registered

    expr = as_expr(expr)
    mapping = []
    for app in functions_of(expr, FunctionApp):
        if not is_registered(app, registry):
            continue
        mapping.append((app, as_finite_diff(
            app, dim, derivative_order, accuracy_order, registry=registry
        )))
    if not mapping:
        return expr
    return substitute(expr, mapping)


def laplacian(expr, dimensions, accuracy_order=None, registry=None):
    return simplify(Add(*[
        derivative(expr, d, 2, accuracy_order, registry=registry)
        for d in dimensions
    ]))
