"""Lowering of symbolic stencil equations into a loop nest."""
import logging

from .algebra import free_symbols
from .algebra import functions_of
from .algebra import simplify
from .compiler import Compiled
from .compiler import is_builtin_call
from .data import metadata_of
from .datastructures import UnknownSymbol
from .datastructures import default_registry
from .expression import Add
from .expression import Constant
from .expression import Eqn
from .expression import FunctionApp
from .expression import Indexed
from .expression import IntConst
from .expression import Mul
from .expression import Pow
from .expression import SPACE_DIMENSIONS
from .expression import Symbol
from .expression import TIME_DIMENSION
from .expression import as_expr
from .finite_difference import InvalidOrder
from .nodes import Dimension
from .nodes import ExpressionNode
from .nodes import Iteration
from .nodes import LoopNest
from .nodes import PARALLEL
from .nodes import SEQUENTIAL
from .nodes import SIMD
from .nodes import Section
from .nodes import map_nodes


log = logging.getLogger(__name__)


FORWARD = 'forward'
BACKWARD = 'backward'


class NonIntegerOffset(ValueError):
    pass


class EmptyIterationSpace(ValueError):
    pass


class UnboundIndex(ValueError):
    pass


class Indexified(Compiled):
    def __init__(self, expression, registry):
        self.registry = registry
        super(Indexified, self).__init__(expression)

    def _leaf(self, expr):
        return expr

    visit_int_const = _leaf
    visit_rational_const = _leaf
    visit_float_const = _leaf
    visit_symbol = _leaf
    visit_indexed = _leaf

    def visit_function_app(self, expr):
        if is_builtin_call(expr):
            return FunctionApp(expr.name, [self.visit(a) for a in expr.args])
        function = metadata_of(expr, registry=self.registry)
        if len(expr.args) != len(function.dimensions):
            raise UnboundIndex(
                '{} takes {} arguments: {}'.format(
                    function.name, len(function.dimensions), expr
                )
            )
        indices = []
        for dim, arg in zip(function.dimensions, expr.args):
            indices.append(self._index(function, dim, arg))
        return Indexed(function.name, indices)

    def _index(self, function, dim, arg):
        if not function.is_grid:
            return arg
        spacing = function.spacing_of(dim)
        offset = simplify(
            Mul(Add(arg, Mul(IntConst(-1), dim)), Pow(spacing, IntConst(-1)))
        )
        if not (isinstance(offset, Constant) and offset.is_integer):
            raise NonIntegerOffset(
                'Offset of {} along {} is not an integer multiple of {}: '
                '{}'.format(function.name, dim, spacing, arg)
            )
        return simplify(Add(dim, IntConst(int(offset.value))))

    def visit_add(self, expr):
        return Add(*[self.visit(t) for t in expr.terms])

    def visit_mul(self, expr):
        return Mul(*[self.visit(f) for f in expr.factors])

    def visit_pow(self, expr):
        return Pow(self.visit(expr.base), self.visit(expr.exp))

    def visit_eqn(self, eqn):
        return Eqn(self.visit(eqn.lhs), self.visit(eqn.rhs))


def indexify(expr, registry=None):
    """Turns function applications into array accesses.

    An argument ``x + k*h`` becomes the index ``x + k``. Accesses that
    are already indexed are left unchanged.
    """
    registry = default_registry if registry is None else registry
    if not isinstance(expr, Eqn):
        expr = as_expr(expr)
    return simplify(Indexified(expr, registry).result)


def index_offset(index, dim):
    """Integer offset of an index relative to its dimension symbol."""
    offset = simplify(Add(index, Mul(IntConst(-1), dim)))
    if not (isinstance(offset, Constant) and offset.is_integer):
        raise UnboundIndex(
            'Index {} is not {} plus a constant'.format(index, dim)
        )
    return int(offset.value)


def grid_accesses(eqs, registry):
    for eqn in eqs:
        for access in functions_of(eqn, Indexed):
            function = metadata_of(access, registry=registry)
            if function.is_grid:
                yield function, access


def infer_iteration_space(eqs, registry=None):
    """Derives loop dimensions and halo widths from stencil accesses.

    Every spatial dimension iterates over the extent of the functions
    minus the widest negative and positive offset. The time dimension is
    present if any time function is accessed.
    """
    registry = default_registry if registry is None else registry
    if not eqs:
        raise EmptyIterationSpace('No equations to lower')
    extents = {}
    lower = {}
    upper = {}
    time_orders = set()
    for function, access in grid_accesses(eqs, registry):
        if function.is_time:
            time_orders.add(function.time_order)
        for dim, index in zip(function.dimensions, access.indices):
            offset = index_offset(index, dim)
            if dim == TIME_DIMENSION:
                continue
            extent = function.space_shape[
                function.space_dimensions.index(dim)
            ]
            if extents.setdefault(dim, extent) != extent:
                raise EmptyIterationSpace(
                    'Functions disagree on the extent along {}: {} != {}'
                    .format(dim, extents[dim], extent)
                )
            lower[dim] = max(lower.get(dim, 0), -offset)
            upper[dim] = max(upper.get(dim, 0), offset)

    if not extents:
        raise EmptyIterationSpace('Equations access no grid function')
    if len(time_orders) > 1:
        raise InvalidOrder(
            'Time functions of one operator must share the time order: '
            '{}'.format(sorted(time_orders))
        )

    dimensions = []
    if time_orders:
        dimensions.append(Dimension(
            TIME_DIMENSION.name, 0, is_time=True,
            buffers=time_orders.pop() + 1,
        ))
    for dim in SPACE_DIMENSIONS:
        if dim not in extents:
            continue
        res = Dimension(dim.name, extents[dim], lower[dim], upper[dim])
        if res.size < 1:
            raise EmptyIterationSpace(
                'Nothing to iterate along {}: extent {} with halo {}+{}'
                .format(dim, res.extent, res.lower, res.upper)
            )
        dimensions.append(res)
    log.debug('Iteration space: %s', dimensions)
    return dimensions


def build_nest(eqs, dimensions, nt=1, direction=FORWARD, registry=None):
    """Wraps the equations into the spatial loops and the time loop.

    The outermost spatial loop is parallel, the innermost is vectorized.
    """
    if direction not in (FORWARD, BACKWARD):
        raise ValueError('Unknown direction: {!r}'.format(direction))
    registry = default_registry if registry is None else registry
    body = [ExpressionNode(eqn) for eqn in eqs]
    space = [d for d in dimensions if not d.is_time]
    for i, dim in reversed(list(enumerate(space))):
        annotations = set()
        if i == 0 and dim.parallel:
            annotations.add(PARALLEL)
        if i == len(space) - 1:
            annotations.add(SIMD)
        body = [Iteration(dim, body, annotations=annotations)]

    dims = []
    for dim in dimensions:
        if dim.is_time:
            dim = Dimension(dim.name, nt, is_time=True, buffers=dim.buffers)
            body = [Iteration(
                dim, body, annotations=[SEQUENTIAL],
                reverse=direction == BACKWARD,
            )]
        dims.append(dim)
    return LoopNest(
        body, dims, nt=nt, direction=direction, registry=registry
    )


class CustomIteration(object):
    """Equations run over their own index inside the time loop.

    Used for point-wise work like source injection, which does not follow
    the stencil iteration space.
    """

    def __init__(self, eqs, dimension, start=None, end=None, position='after'):
        if position not in ('before', 'after'):
            raise ValueError('Unknown position: {!r}'.format(position))
        self.eqs = list(eqs)
        self.dimension = dimension
        self.start = dimension.start if start is None else start
        self.end = dimension.end if end is None else end
        self.position = position

    def __repr__(self):
        return '<CustomIteration {} [{}, {}) {} eqs>'.format(
            self.dimension.name, self.start, self.end, len(self.eqs)
        )


def add_custom_iteration(nest, iteration):
    """Inserts a sequential loop before or after the spatial loops.

    :raises UnboundIndex: when the equations use an index other than the
        custom one and the time dimension
    """
    if not iteration.eqs:
        return nest
    time_dim = nest.time_dimension
    allowed = {iteration.dimension.symbol}
    if time_dim is not None:
        allowed.add(time_dim.symbol)
    for eqn in iteration.eqs:
        used = free_symbols(eqn, include_indices=True) - \
            free_symbols(eqn, include_indices=False)
        unbound = used - allowed
        if unbound:
            raise UnboundIndex(
                'Indices {} are not bound in a loop over {}'.format(
                    sorted(s.name for s in unbound), iteration.dimension.name
                )
            )

    loop = Section([Iteration(
        iteration.dimension,
        [ExpressionNode(eqn) for eqn in iteration.eqs],
        start=iteration.start,
        end=iteration.end,
        annotations=[SEQUENTIAL],
    )])

    def insert(body):
        if iteration.position == 'before':
            return [loop] + list(body)
        return list(body) + [loop]

    if time_dim is None:
        return nest.replace(body=insert(nest.body))

    def visit(node):
        if isinstance(node, Iteration) and node.dimension.is_time:
            return node.replace(body=insert(node.body))
    return map_nodes(nest, visit)


def time_access_offsets(nest):
    offsets = set()
    for node in nest.expressions():
        for access in functions_of(node.eqn, Indexed):
            function = metadata_of(access, registry=nest.registry)
            if function.is_time:
                offsets.add(index_offset(access.indices[0], TIME_DIMENSION))
    return offsets


def alias_name(slot):
    return 't{}'.format(slot)


class TimeAliased(Compiled):
    def __init__(self, expression, registry, min_offset):
        self.registry = registry
        self.min_offset = min_offset
        super(TimeAliased, self).__init__(expression)

    def _leaf(self, expr):
        return expr

    visit_int_const = _leaf
    visit_rational_const = _leaf
    visit_float_const = _leaf
    visit_symbol = _leaf

    def visit_indexed(self, expr):
        function = metadata_of(expr, registry=self.registry)
        if not function.is_time:
            return expr
        offset = index_offset(expr.indices[0], TIME_DIMENSION)
        slot = offset - self.min_offset
        return Indexed(
            expr.base, (Symbol(alias_name(slot)),) + expr.indices[1:]
        )

    def visit_function_app(self, expr):
        return FunctionApp(expr.name, [self.visit(a) for a in expr.args])

    def visit_add(self, expr):
        return Add(*[self.visit(t) for t in expr.terms])

    def visit_mul(self, expr):
        return Mul(*[self.visit(f) for f in expr.factors])

    def visit_pow(self, expr):
        return Pow(self.visit(expr.base), self.visit(expr.exp))

    def visit_eqn(self, eqn):
        return Eqn(self.visit(eqn.lhs), self.visit(eqn.rhs))


def lower_time_buffers(nest):
    """Replaces time offsets of time functions by rotating buffer aliases.

    With ``B`` buffers and the smallest accessed offset ``o_min``, offset
    ``o`` at timestep ``t`` lives in slot ``(t + o - o_min) mod B``. The
    aliases ``t0 .. t(B-1)`` are computed once per timestep.
    """
    time_dim = nest.time_dimension
    if time_dim is None:
        return nest
    offsets = time_access_offsets(nest)
    if not offsets:
        return nest
    min_offset = min(offsets)
    buffers = time_dim.buffers
    if max(offsets) - min_offset >= buffers:
        raise InvalidOrder(
            'Time offsets {} do not fit into {} buffers'.format(
                sorted(offsets), buffers
            )
        )
    aliases = [alias_name(j) for j in range(buffers)]
    alias_section = Section([
        ExpressionNode(Eqn(
            Symbol(alias_name(j)),
            FunctionApp('mod', [
                simplify(Add(TIME_DIMENSION, IntConst(j))), IntConst(buffers)
            ]),
        ))
        for j in range(buffers)
    ])

    def visit(node):
        if isinstance(node, ExpressionNode):
            return node.replace(
                eqn=TimeAliased(node.eqn, nest.registry, min_offset).result
            )
        if isinstance(node, Iteration) and node.dimension.is_time:
            return node.replace(body=[alias_section] + list(node.body))

    res = map_nodes(nest, visit)
    return res.replace(
        aliases=aliases, time_offsets=sorted(offsets)
    )


def last_written_slot(nest):
    """Buffer slot holding the newest time level after the run.

    Returns None when nothing was written.
    """
    time_dim = nest.time_dimension
    if time_dim is None or not nest.time_offsets or nest.nt < 1:
        return None
    min_offset = nest.time_offsets[0]
    if nest.direction == BACKWARD:
        step, written = 0, nest.time_offsets[0]
    else:
        step, written = nest.nt - 1, nest.time_offsets[-1]
    return (step + written - min_offset) % time_dim.buffers


def prepare_equations(eqs, registry=None):
    """Indexifies equations and checks their left-hand sides."""
    registry = default_registry if registry is None else registry
    res = []
    for eqn in eqs:
        if not isinstance(eqn, Eqn):
            raise TypeError('Expected an equation: {!r}'.format(eqn))
        eqn = indexify(eqn, registry=registry)
        if not isinstance(eqn.lhs, Indexed):
            raise UnknownSymbol(
                'Left-hand side must be a function access: {}'.format(
                    eqn.lhs
                )
            )
        res.append(eqn)
    return res
