"""Loop-nest intermediate representation.

Nodes are immutable: transformations build new trees with
:meth:`Node.replace`.
"""
from .compiler import Compiled
from .compiler import InfixCompiled
from .expression import Symbol
from .expression import as_expr


PARALLEL = 'parallel'
SIMD = 'simd'
SEQUENTIAL = 'sequential'
SINGLE = 'single'


class Dimension(object):
    """Iteration dimension with the halo excluded on both sides."""

    def __init__(self, name, extent, lower=0, upper=0, is_time=False,
                 buffers=1, parallel=None):
        self.name = name
        self.extent = extent
        self.lower = lower
        self.upper = upper
        self.is_time = is_time
        self.buffers = buffers
        if parallel is None:
            parallel = not is_time
        self.parallel = parallel

    @property
    def symbol(self):
        return Symbol(self.name)

    @property
    def block_symbol(self):
        return Symbol(self.name + 'b')

    @property
    def start(self):
        return self.lower

    @property
    def end(self):
        return self.extent - self.upper

    @property
    def size(self):
        return self.end - self.start

    def __eq__(self, other):
        return (
            isinstance(other, Dimension) and
            self.name == other.name and
            self.extent == other.extent and
            self.lower == other.lower and
            self.upper == other.upper and
            self.is_time == other.is_time
        )

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.name, self.extent, self.lower, self.upper))

    def __repr__(self):
        return '<Dimension {} [{}, {})>'.format(
            self.name, self.start, self.end
        )


class Node(object):
    __visit_name__ = None
    _fields = ()

    def replace(self, **kwargs):
        params = {f: getattr(self, f) for f in self._fields}
        params.update(kwargs)
        return self.__class__(**params)

    @property
    def children(self):
        return ()

    def walk(self):
        yield self
        for child in self.children:
            for node in child.walk():
                yield node

    def to_text(self):
        return NodeTextCompiled(self).result


class ExpressionNode(Node):
    """Assignment of an expression to an array element or a scalar."""
    __visit_name__ = 'expression_node'
    _fields = ('eqn', 'declare')

    def __init__(self, eqn, declare=False):
        self.eqn = eqn
        self.declare = declare

    @property
    def lhs(self):
        return self.eqn.lhs

    @property
    def rhs(self):
        return self.eqn.rhs

    @property
    def is_scalar(self):
        return isinstance(self.eqn.lhs, Symbol)


class Iteration(Node):
    """Loop ``for index in [start, end) step step``.

    ``start`` and ``end`` are expressions so blocked loops may depend on
    the enclosing block counter.
    """
    __visit_name__ = 'iteration'
    _fields = ('dimension', 'body', 'start', 'end', 'step', 'index',
               'annotations', 'reverse')

    def __init__(self, dimension, body, start=None, end=None, step=1,
                 index=None, annotations=(), reverse=False):
        self.dimension = dimension
        self.body = tuple(body)
        self.start = as_expr(dimension.start if start is None else start)
        self.end = as_expr(dimension.end if end is None else end)
        self.step = step
        self.index = dimension.symbol if index is None else index
        self.annotations = frozenset(annotations)
        self.reverse = reverse

    @property
    def children(self):
        return self.body

    @property
    def is_parallel(self):
        return PARALLEL in self.annotations

    @property
    def is_simd(self):
        return SIMD in self.annotations

    @property
    def is_block(self):
        return self.index != self.dimension.symbol


class Section(Node):
    """Group of nodes executed by a single thread."""
    __visit_name__ = 'section'
    _fields = ('body', 'annotations')

    def __init__(self, body, annotations=(SINGLE,)):
        self.body = tuple(body)
        self.annotations = frozenset(annotations)

    @property
    def children(self):
        return self.body


class LoopNest(Node):
    """Root of a lowered operator."""
    __visit_name__ = 'loop_nest'
    _fields = ('body', 'dimensions', 'nt', 'direction', 'aliases',
               'registry', 'time_offsets')

    def __init__(self, body, dimensions, nt=1, direction='forward',
                 aliases=(), registry=None, time_offsets=()):
        self.body = tuple(body)
        self.dimensions = tuple(dimensions)
        self.nt = nt
        self.direction = direction
        self.aliases = tuple(aliases)
        self.registry = registry
        self.time_offsets = tuple(time_offsets)

    @property
    def children(self):
        return self.body

    @property
    def time_dimension(self):
        for dim in self.dimensions:
            if dim.is_time:
                return dim

    @property
    def space_dimensions(self):
        return tuple(d for d in self.dimensions if not d.is_time)

    def expressions(self):
        return [n for n in self.walk() if isinstance(n, ExpressionNode)]

    def function_names(self):
        names = set()
        for node in self.expressions():
            for expr in (node.lhs, node.rhs):
                for atom in expr.atoms():
                    if isinstance(getattr(atom, 'base', None), str):
                        names.add(atom.base)
        return names

    def functions(self):
        """Data functions referenced by the nest in declaration order."""
        names = self.function_names()
        return [f for f in self.registry.values() if f.name in names]


def map_nodes(node, func):
    """Rebuilds a tree bottom-up applying ``func`` to every node.

    ``func`` may return a node, a list of nodes spliced into the parent
    body or None to keep the node.
    """
    if node.children:
        body = []
        for child in node.children:
            res = map_nodes(child, func)
            if isinstance(res, (list, tuple)):
                body.extend(res)
            else:
                body.append(res)
        node = node.replace(body=body)
    res = func(node)
    return node if res is None else res


def map_expressions(node, func):
    """Applies ``func`` to the equation of every expression node."""
    def visit(n):
        if isinstance(n, ExpressionNode):
            return n.replace(eqn=func(n.eqn))
    return map_nodes(node, visit)


def innermost_bodies(node):
    """Yields iterations whose bodies hold only expression nodes."""
    for n in node.walk():
        if (
                isinstance(n, Iteration) and
                n.body and
                all(isinstance(c, ExpressionNode) for c in n.body)
        ):
            yield n


class NodeTextCompiled(Compiled):
    indent = '  '

    def __init__(self, expression):
        self.expression = expression
        self.result = '\n'.join(self.visit(expression, level=0))

    def _lines(self, nodes, level):
        res = []
        for node in nodes:
            res.extend(self.visit(node, level=level))
        return res

    def visit_loop_nest(self, node, level=0):
        return self._lines(node.body, level)

    def visit_iteration(self, node, level=0):
        annotations = ''
        if node.annotations:
            annotations = ' <{}>'.format(
                ','.join(sorted(node.annotations))
            )
        if node.reverse:
            header = 'for {} in ({}, {}] step -{}{}'
            bounds = (node.end, node.start)
        else:
            header = 'for {} in [{}, {}) step {}{}'
            bounds = (node.start, node.end)
        line = self.indent * level + header.format(
            node.index.name,
            InfixCompiled(bounds[0]).result,
            InfixCompiled(bounds[1]).result,
            node.step,
            annotations,
        )
        return [line] + self._lines(node.body, level + 1)

    def visit_section(self, node, level=0):
        line = self.indent * level + '{}:'.format(
            ','.join(sorted(node.annotations))
        )
        return [line] + self._lines(node.body, level + 1)

    def visit_expression_node(self, node, level=0):
        return ['{}{} = {}'.format(
            self.indent * level,
            InfixCompiled(node.lhs).result,
            InfixCompiled(node.rhs).result,
        )]

    def visit_eqn(self, eqn, level=0):
        return self.visit_expression_node(ExpressionNode(eqn), level=level)
