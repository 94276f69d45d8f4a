from fractions import Fraction
import math

import mock
import numpy as np

import pytest

from stencilforge.algebra import count_ops, expand, solve_linear
from stencilforge.data import GridFunction, TimeFunction
from stencilforge.expression import (
    Eqn, Indexed, Symbol, h, s, symbols,
)
from stencilforge.interpreter import interpret
from stencilforge.lowering import (
    build_nest, infer_iteration_space, prepare_equations,
)
from stencilforge.nodes import ExpressionNode, Iteration, PARALLEL, SIMD
from stencilforge.operator import Operator
from stencilforge.optimizer import (
    BadBlockSize, BlockingPlan, UnresolvedSymbol, apply_cse, autotune,
    autotune_report, best_plan, block_loops, cse, default_candidates,
    fold_scalars, report_lines,
)


a, b, c = symbols('a b c')

UNIT = {h: 1, s: Fraction(1, 4)}


def _nest(registry, shape=(20, 20), nt=1, subs=None):
    u = TimeFunction('u', shape, registry=registry)
    eqn = Eqn(u.dt, u.dx2 + u.dy2)
    eqs = prepare_equations(
        [Eqn(u.forward, solve_linear(eqn, u.forward))], registry
    )
    nest = build_nest(
        eqs, infer_iteration_space(eqs, registry), nt=nt, registry=registry
    )
    if subs is not None:
        nest = fold_scalars(nest, subs)
    return u, nest


def test_cse_shares_subexpressions():
    exprs = [(a + b) * c, (a + b) * c + (a + b)]
    res = cse(exprs)
    temps, rewritten = res
    assert [name for name, _ in temps] == ['temp0', 'temp1']
    assert temps[0] == ('temp0', a + b)
    assert rewritten[0] == Symbol('temp1')
    assert res.inline() == exprs


def test_cse_without_repeats():
    res = cse([a * b + c])
    assert res.temps == []
    assert res.exprs == [a * b + c]
    assert cse([a + b, a + b], prefix='r', start=3).temps == [('r3', a + b)]


def test_cse_ignores_indices():
    u1 = Indexed('u', [a + b])
    u2 = Indexed('v', [a + b])
    res = cse([u1 * c, u2 * c])
    assert res.temps == []


def _field(*args):
    return 2. + math.sin(sum((k + 1.3) * v for k, v in enumerate(args)))


def test_cse_on_wide_wave_stencil(registry):
    u = TimeFunction('u', (30, 30), time_order=2, space_order=12,
                     registry=registry)
    m = GridFunction('m', (30, 30), registry=registry)
    eta = GridFunction('eta', (30, 30), registry=registry)
    eqn = Eqn(m * u.dt2 - u.laplace + eta * u.dt, 0)
    stencil = expand(solve_linear(eqn, u.forward))
    temps, (rewritten,) = cse([stencil])
    assert temps
    assert count_ops(rewritten) + sum(count_ops(v) for _, v in temps) < \
        count_ops(stencil)

    functions = {'u': _field, 'm': _field, 'eta': _field}
    rng = np.random.RandomState(12)
    for _ in range(20):
        env = dict(zip(
            ['x', 'y', 't', 'h', 's'], rng.uniform(0.5, 1.5, size=5)
        ))
        for name, value in temps:
            env[name] = value.evaluate(env, functions=functions)
        expected = stencil.evaluate(env, functions=functions)
        assert rewritten.evaluate(env, functions=functions) == \
            pytest.approx(expected, rel=1e-12)


def test_fold_scalars(registry):
    u, nest = _nest(registry)
    folded = fold_scalars(nest, {h: Fraction(1, 10), s: Fraction(1, 400)})
    node, = [n for n in folded.expressions()]
    assert not node.rhs.has(h)
    assert not node.rhs.has(s)
    # the explicit update with dt = h**2 / 4 averages the neighbours
    centre = Indexed('u', [Symbol('t'), Symbol('x'), Symbol('y')])
    assert not node.rhs.has(centre)
    assert node.rhs == expand(node.rhs)


def test_fold_scalars_unresolved(registry):
    u, nest = _nest(registry)
    with pytest.raises(UnresolvedSymbol) as info:
        fold_scalars(nest, {h: 1})
    assert info.value.symbols == ['s']


def test_apply_cse_declares_temps(registry):
    u, nest = _nest(registry)
    nest = apply_cse(nest)
    inner = [n for n in nest.walk()
             if isinstance(n, Iteration) and n.is_simd][0]
    declared = [n for n in inner.body if n.declare]
    assert all(isinstance(n, ExpressionNode) for n in inner.body)
    assert all(n.is_scalar for n in declared)
    assert inner.body[-1].lhs == Indexed(
        'u', [Symbol('t') + 1, Symbol('x'), Symbol('y')]
    )


def test_blocking_plan():
    plan = BlockingPlan(x=16, y=None)
    assert plan.sizes == {'x': 16}
    assert plan.is_blocked
    assert plan == BlockingPlan({'x': 16})
    assert repr(plan) == '<BlockingPlan x=16>'
    assert not BlockingPlan.unblocked().is_blocked
    assert BlockingPlan.unblocked().to_text() == 'off'
    assert BlockingPlan(y=8, x=4).to_text() == 'x=4,y=8'


def test_block_loops_structure(registry):
    u, nest = _nest(registry, shape=(66, 66))
    blocked = block_loops(nest, BlockingPlan(x=16, y=16))
    time_loop, = blocked.body
    xb, = time_loop.body
    assert xb.index == Symbol('xb')
    assert xb.step == 16
    assert PARALLEL in xb.annotations
    yb, = xb.body
    assert yb.index == Symbol('yb')
    assert not yb.annotations
    xloop, = yb.body
    assert xloop.start == Symbol('xb')
    assert xloop.end.to_text() == 'min(xb + 16, 65)'
    yloop, = xloop.body
    assert SIMD in yloop.annotations
    assert 'for xb in [1, 65) step 16 <parallel>' in blocked.to_text()


def test_block_loops_skips_full_extent(registry):
    u, nest = _nest(registry, shape=(18, 18))
    assert block_loops(nest, BlockingPlan(x=16, y=16)).to_text() == \
        nest.to_text()
    assert block_loops(nest, BlockingPlan.unblocked()) is nest
    assert block_loops(nest, None) is nest


def test_block_loops_errors(registry):
    u, nest = _nest(registry, shape=(18, 18))
    with pytest.raises(BadBlockSize):
        block_loops(nest, BlockingPlan(x=17))
    with pytest.raises(BadBlockSize):
        block_loops(nest, BlockingPlan(x=0))
    with pytest.raises(BadBlockSize):
        block_loops(nest, BlockingPlan(z=4))


@pytest.mark.parametrize('plan', [
    BlockingPlan(x=5),
    BlockingPlan(y=3),
    BlockingPlan(x=4, y=7),
    BlockingPlan(x=1, y=1),
])
def test_blocking_covers_iteration_space(registry, plan):
    u, nest = _nest(registry, shape=(19, 23), subs=UNIT)
    reference = interpret(nest, trace=True)
    trace = interpret(block_loops(nest, plan), trace=True)
    assert len(trace) == len(reference) == 17 * 21
    assert sorted(trace) == sorted(reference)
    assert len(set(trace)) == len(trace)


def test_blocked_results_are_identical(registry):
    u, nest = _nest(registry, shape=(19, 23), subs=UNIT)
    u.data[0] = np.random.RandomState(0).rand(19, 23)
    start = u.data.copy()
    interpret(nest)
    expected = u.data.copy()
    u.data[...] = start
    interpret(block_loops(nest, BlockingPlan(x=4, y=7)))
    np.testing.assert_array_equal(u.data, expected)


def test_default_candidates(registry):
    u, nest = _nest(registry, shape=(40, 40))
    candidates = default_candidates(nest)
    assert candidates[0] == BlockingPlan.unblocked()
    assert BlockingPlan(x=8) in candidates
    assert BlockingPlan(x=32) in candidates
    assert BlockingPlan(x=64) not in candidates
    assert all('y' not in p.sizes for p in candidates)


def test_autotune_picks_fastest(registry):
    u = TimeFunction('u', (40, 40), registry=registry)
    op = Operator(
        [Eqn(u.forward, u.expr + 1)], nt=2, registry=registry
    )
    candidates = [
        BlockingPlan.unblocked(), BlockingPlan(x=8), BlockingPlan(x=16)
    ]
    durations = {None: 3., 8: 1., 16: 2.}
    clock = [0.]

    def fake_apply(self, *args, **kwargs):
        u.data[...] = 42.
        clock[0] += durations[self.blocking.sizes.get('x')]

    u.data[...] = 1.
    with mock.patch.object(Operator, 'build'), \
            mock.patch.object(Operator, 'apply', fake_apply):
        report = autotune_report(
            op, candidates=candidates, repeats=2, timer=lambda: clock[0]
        )
        best = autotune(op, candidates=candidates, timer=lambda: clock[0])
    assert [median for _, median in report] == [3., 1., 2.]
    assert best == BlockingPlan(x=8)
    assert best_plan(report) == best
    assert report_lines(report)[1] == 'x=8 1.000000000'
    # buffers are restored after every timed run
    assert (u.data == 1.).all()
