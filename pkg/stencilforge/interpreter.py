"""Reference tree-walking executor for loop nests.

Slow, but needs no toolchain. Used as an oracle for generated kernels
and for checking that transformations keep the iteration space.
"""
import logging

from .compiler import Compiled
from .compiler import EvaluationError
from .expression import Symbol


log = logging.getLogger(__name__)


class Interpreter(Compiled):
    """Executes a loop nest on numpy arrays in double precision.

    Stores are rounded to the element type of the target array. When
    ``trace`` is set every array store inside a spatial loop records the
    tuple of spatial counters.
    """

    def __init__(self, nest, arrays=None, trace=False):
        if arrays is None:
            arrays = dict((f.name, f.data) for f in nest.functions())
        self.arrays = arrays
        self.env = {}
        self.space_names = [d.name for d in nest.space_dimensions]
        self.trace = [] if trace else None
        super(Interpreter, self).__init__(nest)

    # expressions

    def eval(self, expr):
        return getattr(self, 'eval_' + expr.__visit_name__)(expr)

    def _constant(self, expr):
        return float(expr.value)

    eval_int_const = _constant
    eval_rational_const = _constant
    eval_float_const = _constant

    def eval_symbol(self, expr):
        try:
            return self.env[expr.name]
        except KeyError:
            raise EvaluationError('No value for {!r}'.format(expr.name))

    def _index(self, expr):
        return tuple(int(self.eval(i)) for i in expr.indices)

    def eval_indexed(self, expr):
        return float(self.arrays[expr.base][self._index(expr)])

    def eval_function_app(self, expr):
        args = [self.eval(a) for a in expr.args]
        if expr.name == 'min':
            return min(args)
        if expr.name == 'max':
            return max(args)
        if expr.name == 'mod':
            return int(args[0]) % int(args[1])
        if expr.name == 'sqrt':
            return args[0] ** 0.5
        raise EvaluationError('Cannot evaluate {}'.format(expr))

    def eval_add(self, expr):
        res = 0.0
        for t in expr.terms:
            res += self.eval(t)
        return res

    def eval_mul(self, expr):
        res = 1.0
        for f in expr.factors:
            res *= self.eval(f)
        return res

    def eval_pow(self, expr):
        return self.eval(expr.base) ** self.eval(expr.exp)

    # nodes

    def visit_loop_nest(self, nest):
        for node in nest.body:
            self.visit(node)
        return self.trace

    def visit_section(self, node):
        for child in node.body:
            self.visit(child)

    def visit_iteration(self, node):
        name = node.index.name
        start = int(self.eval(node.start))
        end = int(self.eval(node.end))
        if node.reverse:
            counters = range(end - node.step, start - 1, -node.step)
        else:
            counters = range(start, end, node.step)
        for i in counters:
            self.env[name] = i
            for child in node.body:
                self.visit(child)
        self.env.pop(name, None)

    def visit_expression_node(self, node):
        value = self.eval(node.rhs)
        lhs = node.lhs
        if isinstance(lhs, Symbol):
            self.env[lhs.name] = value
            return
        self.arrays[lhs.base][self._index(lhs)] = value
        if self.trace is not None and all(
                n in self.env for n in self.space_names
        ):
            self.trace.append(tuple(self.env[n] for n in self.space_names))


def interpret(nest, arrays=None, trace=False):
    """Runs a loop nest, returns the store trace if requested."""
    return Interpreter(nest, arrays=arrays, trace=trace).result
