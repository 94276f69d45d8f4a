"""Data functions: named, typed buffers usable inside expressions."""
import logging
import re

import numpy as np

from .datastructures import UnknownSymbol
from .datastructures import default_registry
from .expression import ExpressionOperators
from .expression import FunctionApp
from .expression import GRID_SPACING
from .expression import Indexed
from .expression import SPACE_DIMENSIONS
from .expression import Symbol
from .expression import TIME_DIMENSION
from .expression import TIME_SPACING
from .expression import as_expr
from .types import get_type
from .util import prod


log = logging.getLogger(__name__)


DEFAULT_ALIGNMENT = 64

POINT_DIMENSION = Symbol('p')

NAME_REGEXP = re.compile(r'^[A-Za-z_][A-Za-z0-9_]*$')
RESERVED_NAME_REGEXP = re.compile(r'^(i\d+b?|t\d+|temp\d+|p|x|y|z|t|h|s)$')
C_KEYWORDS = frozenset([
    'auto', 'break', 'case', 'char', 'const', 'continue', 'default', 'do',
    'double', 'else', 'enum', 'extern', 'float', 'for', 'goto', 'if',
    'inline', 'int', 'long', 'register', 'restrict', 'return', 'short',
    'signed', 'sizeof', 'static', 'struct', 'switch', 'typedef', 'union',
    'unsigned', 'void', 'volatile', 'while', 'main',
])


class InvalidShape(ValueError):
    pass


class InvalidName(ValueError):
    pass


def aligned_zeros(shape, dtype, alignment=DEFAULT_ALIGNMENT):
    """Allocates a zeroed C-contiguous array aligned to ``alignment`` bytes."""
    dtype = np.dtype(dtype)
    nbytes = prod(shape) * dtype.itemsize
    raw = np.zeros(nbytes + alignment, dtype=np.uint8)
    offset = (-raw.ctypes.data) % alignment
    return raw[offset:offset + nbytes].view(dtype).reshape(shape)


def _validate_name(name):
    if not isinstance(name, str) or not NAME_REGEXP.match(name):
        raise InvalidName('Not a valid function name: {!r}'.format(name))
    if name in C_KEYWORDS or RESERVED_NAME_REGEXP.match(name):
        raise InvalidName('Reserved function name: {!r}'.format(name))


def _validate_shape(shape, empty_rows=False):
    try:
        shape = tuple(int(n) for n in shape)
    except TypeError:
        shape = (int(shape),)
    first = 0 if empty_rows else 1
    if not shape or shape[0] < first or any(n < 1 for n in shape[1:]):
        raise InvalidShape('Extents must be positive: {!r}'.format(shape))
    return shape


def validate_space_order(space_shape, space_order):
    """Centered stencils of ``space_order`` need an even order and at least
    ``space_order + 1`` points along every axis.
    """
    from .finite_difference import InvalidOrder

    if space_order < 2 or space_order % 2:
        raise InvalidOrder(
            'Space order must be even and at least 2: {}'.format(space_order)
        )
    if min(space_shape) < space_order + 1:
        raise InvalidShape(
            'Shape {!r} is too small for space order {}'.format(
                tuple(space_shape), space_order
            )
        )


class DerivativeOperators(object):
    """Derivative shorthands expanded into finite-difference stencils."""

    def _derivative(self, dim, order):
        from .finite_difference import as_finite_diff

        return as_finite_diff(
            self._as_expr(), dim, order, registry=self.registry
        )

    def _space_dim(self, position):
        if position >= len(self.space_dimensions):
            raise AttributeError(
                '{} has {} space dimensions'.format(
                    self.name, len(self.space_dimensions)
                )
            )
        return self.space_dimensions[position]

    @property
    def dx(self):
        return self._derivative(self._space_dim(0), 1)

    @property
    def dy(self):
        return self._derivative(self._space_dim(1), 1)

    @property
    def dz(self):
        return self._derivative(self._space_dim(2), 1)

    @property
    def dx2(self):
        return self._derivative(self._space_dim(0), 2)

    @property
    def dy2(self):
        return self._derivative(self._space_dim(1), 2)

    @property
    def dz2(self):
        return self._derivative(self._space_dim(2), 2)

    @property
    def dxy(self):
        from .finite_difference import derivative

        return derivative(
            self.dx, self._space_dim(1), 1, self.space_order,
            registry=self.registry
        )

    @property
    def dt(self):
        return self._derivative(TIME_DIMENSION, 1)

    @property
    def dt2(self):
        return self._derivative(TIME_DIMENSION, 2)

    @property
    def laplace(self):
        from .finite_difference import laplacian

        return laplacian(
            self._as_expr(), self.space_dimensions, registry=self.registry
        )


class DataFunction(ExpressionOperators):
    """Base of all named buffers.

    A data function takes part in expressions through its symbolic view,
    the application of its name to its dimensions, and owns an aligned
    numpy array used as the kernel buffer.
    """
    __visit_name__ = 'data_function'

    is_time = False
    is_grid = False
    is_sparse = False
    empty_rows = False

    def __init__(self, name, shape, dimensions, element_type='f32',
                 registry=None, alignment=DEFAULT_ALIGNMENT):
        _validate_name(name)
        self.name = name
        self.shape = _validate_shape(shape, self.empty_rows)
        self.dimensions = tuple(dimensions)
        if len(self.dimensions) != len(self.shape):
            raise InvalidShape(
                '{} dimensions for shape {!r}'.format(
                    len(self.dimensions), self.shape
                )
            )
        self.element_type = get_type(element_type)
        self.alignment = alignment
        self.registry = default_registry if registry is None else registry
        self._data = None
        self.registry.register(self)

    @property
    def dtype(self):
        return np.dtype(self.element_type.dtype)

    @property
    def ndim(self):
        return len(self.shape)

    @property
    def nbytes(self):
        return prod(self.shape) * self.element_type.itemsize

    @property
    def data(self):
        if self._data is None:
            log.debug('Allocating %s%r', self.name, self.shape)
            self._data = aligned_zeros(self.shape, self.dtype, self.alignment)
        return self._data

    @data.setter
    def data(self, value):
        self.data[...] = value

    def _as_expr(self):
        return FunctionApp(self.name, self.dimensions)

    @property
    def expr(self):
        return self._as_expr()

    def __call__(self, *args):
        return FunctionApp(self.name, args)

    def __getitem__(self, indices):
        if not isinstance(indices, tuple):
            indices = (indices,)
        if len(indices) != self.ndim:
            raise InvalidShape(
                '{} takes {} indices, got {}'.format(
                    self.name, self.ndim, len(indices)
                )
            )
        return Indexed(self.name, indices)

    def spacing_of(self, dim):
        raise NotImplementedError()

    def __repr__(self):
        return '<{} {}{!r} {}>'.format(
            self.__class__.__name__, self.name, self.shape,
            self.element_type.__visit_name__,
        )


class GridFunction(DataFunction, DerivativeOperators):
    __visit_name__ = 'grid_function'

    is_grid = True
    time_order = 0

    def __init__(self, name, space_shape, space_order=2, element_type='f32',
                 registry=None, spacing=None, **kwargs):
        space_shape = _validate_shape(space_shape)
        if len(space_shape) > len(SPACE_DIMENSIONS):
            raise InvalidShape(
                'At most {} space dimensions are supported: {!r}'.format(
                    len(SPACE_DIMENSIONS), space_shape
                )
            )
        validate_space_order(space_shape, space_order)
        self.space_shape = space_shape
        self.space_order = space_order
        self.space_dimensions = SPACE_DIMENSIONS[:len(space_shape)]
        if spacing is None:
            spacing = (GRID_SPACING,) * len(space_shape)
        self.spacing = tuple(
            Symbol(h) if isinstance(h, str) else as_expr(h) for h in spacing
        )
        shape, dimensions = self._layout()
        super(GridFunction, self).__init__(
            name, shape, dimensions, element_type=element_type,
            registry=registry, **kwargs
        )

    def _layout(self):
        return self.space_shape, self.space_dimensions

    def spacing_of(self, dim):
        return self.spacing[self.space_dimensions.index(dim)]


class TimeFunction(GridFunction):
    """Grid function with ``time_order + 1`` rotating time buffers."""
    __visit_name__ = 'time_function'

    is_time = True

    def __init__(self, name, space_shape, time_order=1, space_order=2,
                 element_type='f32', registry=None, **kwargs):
        if time_order not in (1, 2):
            from .finite_difference import InvalidOrder

            raise InvalidOrder(
                'Time order must be 1 or 2: {}'.format(time_order)
            )
        self.time_order = time_order
        super(TimeFunction, self).__init__(
            name, space_shape, space_order=space_order,
            element_type=element_type, registry=registry, **kwargs
        )

    @property
    def buffers(self):
        return self.time_order + 1

    def _layout(self):
        return (
            (self.buffers,) + self.space_shape,
            (TIME_DIMENSION,) + self.space_dimensions,
        )

    def spacing_of(self, dim):
        if dim == TIME_DIMENSION:
            return TIME_SPACING
        return super(TimeFunction, self).spacing_of(dim)

    @property
    def forward(self):
        return self(TIME_DIMENSION + TIME_SPACING, *self.space_dimensions)

    @property
    def backward(self):
        return self(TIME_DIMENSION - TIME_SPACING, *self.space_dimensions)

    def time_slot(self, slot):
        """View of one time buffer, ``slot`` taken modulo the buffer count."""
        return self.data[slot % self.buffers]


class TableFunction(DataFunction):
    """Plain array addressed by integer indices only, no derivatives."""
    __visit_name__ = 'table_function'

    def __init__(self, name, shape, dimensions=None, element_type='f32',
                 registry=None, **kwargs):
        shape = _validate_shape(shape, self.empty_rows)
        if dimensions is None:
            dimensions = [Symbol('{}_{}'.format(name, i))
                          for i in range(len(shape))]
        super(TableFunction, self).__init__(
            name, shape, dimensions, element_type=element_type,
            registry=registry, **kwargs
        )


class SparseFunction(TableFunction):
    """Per-timestep values at a set of points, shaped ``(nt, npoints)``."""
    __visit_name__ = 'sparse_function'

    is_sparse = True
    # a run of zero timesteps has an empty series
    empty_rows = True

    def __init__(self, name, nt, npoints, element_type='f32',
                 registry=None, **kwargs):
        super(SparseFunction, self).__init__(
            name, (nt, npoints), (TIME_DIMENSION, POINT_DIMENSION),
            element_type=element_type, registry=registry, **kwargs
        )

    @property
    def nt(self):
        return self.shape[0]

    @property
    def npoints(self):
        return self.shape[1]


def create_dense(name, space_shape, space_order=2, element_type='f32',
                 registry=None, **kwargs):
    return GridFunction(
        name, space_shape, space_order=space_order,
        element_type=element_type, registry=registry, **kwargs
    )


def create_time(name, space_shape, time_order=1, space_order=2,
                element_type='f32', registry=None, **kwargs):
    return TimeFunction(
        name, space_shape, time_order=time_order, space_order=space_order,
        element_type=element_type, registry=registry, **kwargs
    )


def _name_of(expr):
    if isinstance(expr, DataFunction):
        return expr.name
    if isinstance(expr, FunctionApp):
        return expr.name
    if isinstance(expr, Indexed):
        return expr.base
    if isinstance(expr, str):
        return expr
    raise UnknownSymbol('Not a function reference: {!r}'.format(expr))


def metadata_of(expr, registry=None):
    """Returns the data function owning a function application or access."""
    registry = default_registry if registry is None else registry
    return registry.lookup(_name_of(expr))


def is_registered(expr, registry=None):
    registry = default_registry if registry is None else registry
    return _name_of(expr) in registry
