import pytest

from stencilforge.algebra import solve_linear
from stencilforge.data import GridFunction, TimeFunction
from stencilforge.datastructures import UnknownSymbol
from stencilforge.expression import (
    Eqn, FunctionApp, Indexed, IntConst, Symbol, h, s, t, x, y,
)
from stencilforge.finite_difference import InvalidOrder
from stencilforge.lowering import (
    BACKWARD, CustomIteration, EmptyIterationSpace, NonIntegerOffset,
    UnboundIndex, add_custom_iteration, build_nest, index_offset, indexify,
    infer_iteration_space, last_written_slot, lower_time_buffers,
    prepare_equations,
)
from stencilforge.nodes import (
    Dimension, ExpressionNode, Iteration, PARALLEL, SEQUENTIAL, SIMD,
    Section,
)


def _diffusion(registry, shape=(100, 100), order=2):
    u = TimeFunction('u', shape, space_order=order, registry=registry)
    eqn = Eqn(u.dt, u.dx2 + u.dy2)
    return u, [Eqn(u.forward, solve_linear(eqn, u.forward))]


def test_indexify(registry):
    u = TimeFunction('u', (10, 10), registry=registry)
    assert indexify(u(t + s, x - h, y), registry) == \
        Indexed('u', [t + 1, x - 1, y])
    assert indexify(u(t, x, y) / h, registry) == \
        Indexed('u', [t, x, y]) / h
    assert indexify(Indexed('u', [t, x, y]), registry) == \
        Indexed('u', [t, x, y])
    with pytest.raises(NonIntegerOffset):
        indexify(u(t, x + h / 2, y), registry)
    with pytest.raises(NonIntegerOffset):
        indexify(u(t, x + s, y), registry)
    with pytest.raises(UnboundIndex):
        indexify(u(t, x), registry)
    with pytest.raises(UnknownSymbol):
        indexify(FunctionApp('nothing', [x]), registry)


def test_index_offset():
    assert index_offset(x + 3, x) == 3
    assert index_offset(x, x) == 0
    assert index_offset(x - 2, x) == -2
    with pytest.raises(UnboundIndex):
        index_offset(y + 1, x)


def test_iteration_space(registry):
    u, eqs = _diffusion(registry, order=4)
    dims = infer_iteration_space(prepare_equations(eqs, registry), registry)
    time_dim, xdim, ydim = dims
    assert time_dim.is_time
    assert time_dim.buffers == 2
    assert (xdim.name, xdim.start, xdim.end) == ('x', 2, 98)
    assert (ydim.name, ydim.start, ydim.end) == ('y', 2, 98)


def test_iteration_space_errors(registry):
    with pytest.raises(EmptyIterationSpace):
        infer_iteration_space([], registry)
    f = GridFunction('f', (5, 10), registry=registry)
    eqs = prepare_equations(
        [Eqn(f.expr, f(x + 3 * h, y) + f(x - 3 * h, y))], registry
    )
    with pytest.raises(EmptyIterationSpace):
        infer_iteration_space(eqs, registry)
    g = GridFunction('g', (4, 10), registry=registry)
    eqs = prepare_equations([Eqn(g.expr, f.expr)], registry)
    with pytest.raises(EmptyIterationSpace):
        infer_iteration_space(eqs, registry)


def test_mixed_time_orders(registry):
    u = TimeFunction('u', (10, 10), registry=registry)
    v = TimeFunction('v', (10, 10), time_order=2, registry=registry)
    eqs = prepare_equations([Eqn(u.forward, v.expr)], registry)
    with pytest.raises(InvalidOrder):
        infer_iteration_space(eqs, registry)


def test_prepare_equations(registry):
    u = TimeFunction('u', (10, 10), registry=registry)
    with pytest.raises(UnknownSymbol):
        prepare_equations([Eqn(Symbol('q'), u.expr)], registry)
    with pytest.raises(TypeError):
        prepare_equations([u.expr], registry)


def test_build_nest(registry):
    u, eqs = _diffusion(registry)
    eqs = prepare_equations(eqs, registry)
    nest = build_nest(
        eqs, infer_iteration_space(eqs, registry), nt=5, registry=registry
    )
    time_loop, = nest.body
    assert time_loop.dimension.is_time
    assert time_loop.end == IntConst(5)
    assert SEQUENTIAL in time_loop.annotations
    xloop, = time_loop.body
    assert xloop.annotations == frozenset([PARALLEL])
    yloop, = xloop.body
    assert yloop.annotations == frozenset([SIMD])
    assert isinstance(yloop.body[0], ExpressionNode)
    assert nest.function_names() == set(['u'])
    assert nest.functions() == [u]
    with pytest.raises(ValueError):
        build_nest(eqs, [], direction='sideways')


def test_nest_text(registry):
    u, eqs = _diffusion(registry, shape=(64, 64))
    eqs = prepare_equations(eqs, registry)
    nest = build_nest(
        eqs, infer_iteration_space(eqs, registry), nt=3, registry=registry
    )
    lines = nest.to_text().splitlines()
    assert lines[0] == 'for t in [0, 3) step 1 <sequential>'
    assert lines[1] == '  for x in [1, 63) step 1 <parallel>'
    assert lines[2] == '    for y in [1, 63) step 1 <simd>'
    assert lines[3].startswith('      u[t + 1, x, y] = ')


def test_custom_iteration(registry):
    u, eqs = _diffusion(registry, shape=(10, 10))
    eqs = prepare_equations(eqs, registry)
    nest = build_nest(
        eqs, infer_iteration_space(eqs, registry), nt=3, registry=registry
    )
    p = Dimension('p', 4, parallel=False)
    it = CustomIteration(
        [Eqn(Indexed('u', [t + 1, 1, 1]), Indexed('u', [t + 1, 1, 1]) + 1)],
        p,
    )
    res = add_custom_iteration(nest, it)
    time_loop, = res.body
    assert len(time_loop.body) == 2
    section = time_loop.body[1]
    assert isinstance(section, Section)
    loop, = section.body
    assert loop.index == Symbol('p')
    assert (loop.start, loop.end) == (IntConst(0), IntConst(4))

    before = add_custom_iteration(
        nest, CustomIteration(it.eqs, p, position='before')
    )
    assert isinstance(before.body[0].body[0], Section)

    bad = CustomIteration(
        [Eqn(Indexed('u', [t + 1, x, 1]), 1)], p
    )
    with pytest.raises(UnboundIndex):
        add_custom_iteration(nest, bad)
    with pytest.raises(ValueError):
        CustomIteration([], p, position='inside')
    assert add_custom_iteration(nest, CustomIteration([], p)) is nest


def test_time_buffers(registry):
    u, eqs = _diffusion(registry, shape=(10, 10))
    eqs = prepare_equations(eqs, registry)
    nest = build_nest(
        eqs, infer_iteration_space(eqs, registry), nt=3, registry=registry
    )
    lowered = lower_time_buffers(nest)
    assert lowered.aliases == ('t0', 't1')
    assert lowered.time_offsets == (0, 1)
    text = lowered.to_text()
    assert 't0 = mod(t, 2)' in text
    assert 't1 = mod(t + 1, 2)' in text
    assert 'u[t1, x, y] = ' in text
    assert 'u[t0, x - 1, y]' in text
    assert 'u[t + 1' not in text


def test_last_written_slot(registry):
    u, eqs = _diffusion(registry, shape=(10, 10))
    eqs = prepare_equations(eqs, registry)
    space = infer_iteration_space(eqs, registry)
    for nt, slot in [(1, 1), (2, 0), (3, 1), (100, 0)]:
        nest = lower_time_buffers(build_nest(eqs, space, nt=nt,
                                             registry=registry))
        assert last_written_slot(nest) == slot
    nest = lower_time_buffers(build_nest(eqs, space, nt=0,
                                         registry=registry))
    assert last_written_slot(nest) is None


def test_last_written_slot_backward(registry):
    v = TimeFunction('v', (10, 10), time_order=2, registry=registry)
    eqn = Eqn(v.dt2, v.laplace)
    eqs = prepare_equations(
        [Eqn(v.backward, solve_linear(eqn, v.backward))], registry
    )
    space = infer_iteration_space(eqs, registry)
    nest = lower_time_buffers(build_nest(
        eqs, space, nt=7, direction=BACKWARD, registry=registry
    ))
    assert nest.time_offsets == (-1, 0, 1)
    # offset -1 at the last step t = 0 lives in slot 0
    assert last_written_slot(nest) == 0
    assert nest.body[0].reverse


def test_dimension():
    d = Dimension('x', 10, 2, 3)
    assert (d.start, d.end, d.size) == (2, 7, 5)
    assert d.parallel
    assert d.block_symbol == Symbol('xb')
    assert d == Dimension('x', 10, 2, 3)
    assert d != Dimension('x', 10, 2, 2)
    assert not Dimension('t', 0, is_time=True).parallel
    assert isinstance(Iteration(d, []).start.value, int)
