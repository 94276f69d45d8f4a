"""Loop-nest optimizations: scalar folding, CSE and loop blocking."""
import collections
import itertools
import logging
import time

import numpy as np

from .algebra import expand
from .algebra import free_symbols
from .algebra import substitute
from .expression import Add
from .expression import Eqn
from .expression import FunctionApp
from .expression import Mul
from .expression import Pow
from .expression import Symbol
from .expression import as_expr
from .nodes import ExpressionNode
from .nodes import Iteration
from .nodes import PARALLEL
from .nodes import SIMD
from .nodes import map_nodes
from .util import clean_params


log = logging.getLogger(__name__)


TEMP_PREFIX = 'temp'

DEFAULT_BLOCK_SIZES = (8, 16, 32, 64)


class UnresolvedSymbol(ValueError):
    def __init__(self, symbols):
        self.symbols = sorted(s.name for s in symbols)
        super(UnresolvedSymbol, self).__init__(
            'Symbols without a value: {}'.format(', '.join(self.symbols))
        )


class BadBlockSize(ValueError):
    pass


def fold_scalars(nest, subs):
    """Substitutes scalar parameters and folds numeric constants.

    Every expression is expanded afterwards so that cancelling terms, like
    the centre point of an explicit diffusion update, vanish exactly.

    :raises UnresolvedSymbol: when a scalar symbol stays without a value
    """
    subs = subs or {}

    def fold(eqn):
        rhs = expand(substitute(eqn.rhs, subs))
        lhs = substitute(eqn.lhs, subs)
        unresolved = free_symbols(rhs)
        if not isinstance(lhs, Symbol):
            unresolved |= free_symbols(lhs)
        if unresolved:
            raise UnresolvedSymbol(unresolved)
        return Eqn(lhs, rhs)

    def visit(node):
        if isinstance(node, ExpressionNode):
            return node.replace(eqn=fold(node.eqn))
    return map_nodes(nest, visit)


class CseResult(object):
    """Temporaries and rewritten expressions produced by :func:`cse`."""

    def __init__(self, temps, exprs):
        self.temps = temps
        self.exprs = exprs

    def inline(self):
        """Substitutes temporaries back, mostly for checking."""
        mapping = {}
        for name, value in self.temps:
            mapping[Symbol(name)] = substitute(value, mapping)
        return [substitute(e, mapping) for e in self.exprs]

    def __iter__(self):
        return iter((self.temps, self.exprs))


def _count_subtrees(expr, counts):
    if isinstance(expr, (Add, Mul, Pow)):
        counts[expr] += 1
        for arg in expr.args:
            _count_subtrees(arg, counts)


class _Eliminator(object):
    def __init__(self, counts, prefix, start):
        self.counts = counts
        self.prefix = prefix
        self.counter = itertools.count(start)
        self.temps = []
        self.names = {}

    def rebuild(self, expr):
        if not isinstance(expr, (Add, Mul, Pow)):
            return expr
        if expr in self.names:
            return self.names[expr]
        if isinstance(expr, Add):
            res = Add(*[self.rebuild(t) for t in expr.terms])
        elif isinstance(expr, Mul):
            res = Mul(*[self.rebuild(f) for f in expr.factors])
        else:
            res = Pow(self.rebuild(expr.base), self.rebuild(expr.exp))
        if self.counts[expr] > 1:
            name = '{}{}'.format(self.prefix, next(self.counter))
            self.temps.append((name, res))
            self.names[expr] = Symbol(name)
            return self.names[expr]
        return res


def cse(exprs, prefix=TEMP_PREFIX, start=0):
    """Common subexpression elimination by structural value numbering.

    Every sum, product or power occurring more than once is computed into
    a temporary before its first use. Function arguments and array
    indices are treated as opaque.
    """
    exprs = [as_expr(e) for e in exprs]
    counts = collections.Counter()
    for e in exprs:
        _count_subtrees(e, counts)
    eliminator = _Eliminator(counts, prefix, start)
    res = [eliminator.rebuild(e) for e in exprs]
    return CseResult(eliminator.temps, res)


def _reads_own_writes(nodes):
    written = set()
    for n in nodes:
        if written and any(a in written for a in n.rhs.atoms()):
            return True
        written.add(n.lhs)
    return False


def _cse_body(nodes, prefix, start):
    """Rewrites a loop body, temporaries first.

    When an equation reads an element written earlier in the same body,
    every equation gets its own temporaries placed right before it.
    """
    if _reads_own_writes(nodes):
        groups = [[n] for n in nodes]
    else:
        groups = [nodes]
    body = []
    for group in groups:
        result = cse([n.rhs for n in group], prefix=prefix, start=start)
        start += len(result.temps)
        body.extend(
            ExpressionNode(Eqn(Symbol(name), value), declare=True)
            for name, value in result.temps
        )
        body.extend(
            n.replace(eqn=Eqn(n.lhs, rhs))
            for n, rhs in zip(group, result.exprs)
        )
    return body, start


def apply_cse(nest, prefix=TEMP_PREFIX):
    """Runs :func:`cse` over the body of every innermost loop.

    Temporaries are declared as scalars inside the body and numbered
    across the whole nest.
    """
    counter = [0]

    def walk(node):
        if (
                isinstance(node, Iteration) and
                node.body and
                all(isinstance(c, ExpressionNode) and not c.is_scalar
                    for c in node.body)
        ):
            body, counter[0] = _cse_body(node.body, prefix, counter[0])
            log.debug(
                'CSE: %d statements for %d equations',
                len(body), len(node.body)
            )
            return node.replace(body=body)
        if node.children:
            return node.replace(body=[walk(c) for c in node.children])
        return node
    return walk(nest)


class BlockingPlan(object):
    """Block sizes per spatial dimension, ``None`` meaning not blocked.

    >>> BlockingPlan(x=16)
    <BlockingPlan x=16>
    """

    def __init__(self, sizes=None, **kwargs):
        sizes = clean_params(dict(sizes or {}), **kwargs)
        self.sizes = collections.OrderedDict(sorted(sizes.items()))

    @classmethod
    def unblocked(cls):
        return cls()

    @property
    def is_blocked(self):
        return bool(self.sizes)

    def __eq__(self, other):
        return isinstance(other, BlockingPlan) and self.sizes == other.sizes

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(tuple(self.sizes.items()))

    def to_text(self):
        if not self.sizes:
            return 'off'
        return ','.join('{}={}'.format(k, v) for k, v in self.sizes.items())

    def __repr__(self):
        return '<BlockingPlan {}>'.format(self.to_text())


def _spatial_chain(node, space_names):
    """Returns the perfectly nested spatial loops starting at ``node``."""
    chain = []
    while (
            isinstance(node, Iteration) and
            node.dimension.name in space_names and
            not node.is_block
    ):
        chain.append(node)
        if len(node.body) == 1 and isinstance(node.body[0], Iteration):
            node = node.body[0]
        else:
            break
    return chain


def _block_sizes(chain, plan):
    names = [it.dimension.name for it in chain]
    for name in plan.sizes:
        if name not in names:
            raise BadBlockSize(
                'Cannot block {}: not a spatial loop of {}'.format(
                    name, names
                )
            )
    sizes = {}
    for it in chain:
        size = plan.sizes.get(it.dimension.name)
        if size is None:
            continue
        extent = it.dimension.size
        if size <= 0 or size > extent:
            raise BadBlockSize(
                'Block size {} along {} not in [1, {}]'.format(
                    size, it.dimension.name, extent
                )
            )
        if size < extent:
            sizes[it.dimension.name] = size
    return sizes


def _blocked_chain(chain, sizes):
    body = chain[-1].body
    for i, it in reversed(list(enumerate(chain))):
        dim = it.dimension
        annotations = set([SIMD]) if i == len(chain) - 1 else set()
        if dim.name in sizes:
            block = dim.block_symbol
            body = [Iteration(
                dim, body,
                start=block,
                end=FunctionApp('min', [Add(block, sizes[dim.name]), dim.end]),
                annotations=annotations,
            )]
        else:
            body = [Iteration(dim, body, annotations=annotations)]

    blocked = [it for it in chain if it.dimension.name in sizes]
    for i, it in reversed(list(enumerate(blocked))):
        annotations = set()
        if i == 0 and PARALLEL in chain[0].annotations:
            annotations.add(PARALLEL)
        body = [Iteration(
            it.dimension, body, step=sizes[it.dimension.name],
            index=it.dimension.block_symbol,
            annotations=annotations,
        )]
    return body[0]


def block_loops(nest, plan):
    """Tiles the spatial loops according to ``plan``.

    Block loops of all blocked dimensions go outside the point loops. A
    block size equal to the iteration extent leaves the loop unblocked.

    :raises BadBlockSize: for sizes not positive or beyond the extent
    """
    if plan is None or not plan.is_blocked:
        return nest
    space_names = set(d.name for d in nest.space_dimensions)

    def walk(node):
        chain = _spatial_chain(node, space_names)
        if chain:
            sizes = _block_sizes(chain, plan)
            if not sizes:
                return node
            log.debug('Blocking %s', sizes)
            return _blocked_chain(chain, sizes)
        if node.children:
            return node.replace(body=[walk(c) for c in node.children])
        return node
    return walk(nest)


def default_candidates(nest, sizes=DEFAULT_BLOCK_SIZES):
    """Candidate plans over the spatial loops outside the innermost one."""
    space = list(nest.space_dimensions)
    blockable = space[:-1] if len(space) > 1 else space
    grids = []
    for dim in blockable:
        grids.append([s for s in sizes if s < dim.size] or [None])
    res = [BlockingPlan.unblocked()]
    for combination in itertools.product(*grids):
        plan = BlockingPlan(dict(
            (d.name, s) for d, s in zip(blockable, combination)
        ))
        if plan.is_blocked and plan not in res:
            res.append(plan)
    return res


def autotune_report(op, candidates=None, nt=None, repeats=3,
                    timer=time.perf_counter):
    """Times ``op`` with every candidate plan on its own data.

    Buffers are restored after every run. Returns ``(plan, median)``
    pairs in candidate order.
    """
    if candidates is None:
        candidates = default_candidates(op.nest)
    if nt is not None:
        op = op.with_nt(nt)
    functions = op.functions()
    saved = [f.data.copy() for f in functions]
    report = []
    try:
        for plan in candidates:
            candidate = op.with_blocking(plan)
            candidate.build()
            timings = []
            for _ in range(repeats):
                start = timer()
                candidate.apply()
                timings.append(timer() - start)
                for f, data in zip(functions, saved):
                    f.data[...] = data
            median = float(np.median(timings))
            log.info('Blocking %s: %.6f s', plan.to_text(), median)
            report.append((plan, median))
    finally:
        for f, data in zip(functions, saved):
            f.data[...] = data
    return report


def autotune(op, candidates=None, nt=None, repeats=3,
             timer=time.perf_counter):
    """Returns the candidate plan with the smallest median runtime."""
    report = autotune_report(
        op, candidates=candidates, nt=nt, repeats=repeats, timer=timer
    )
    return best_plan(report)


def best_plan(report):
    best, median = min(report, key=lambda item: item[1])
    log.info('Selected blocking %s (%.6f s)', best.to_text(), median)
    return best


def report_lines(report):
    """Formats ``(plan, median)`` pairs as ``plan median_seconds`` lines.

    >>> report_lines([(BlockingPlan(x=16), 0.25)])
    ['x=16 0.250000000']
    """
    return [
        '{} {:.9f}'.format(plan.to_text(), median) for plan, median in report
    ]

