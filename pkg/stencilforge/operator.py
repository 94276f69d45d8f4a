"""Operators: stencil equations lowered, compiled and run over data."""
import logging

import numpy as np

from .codegen import emit_source
from .codegen import kernel_signature
from .compiler import CodegenConfig
from .datastructures import default_registry
from .expression import Eqn
from .interpreter import interpret
from .jit import jit_compile
from .lowering import BACKWARD
from .lowering import FORWARD
from .lowering import add_custom_iteration
from .lowering import build_nest
from .lowering import infer_iteration_space
from .lowering import last_written_slot
from .lowering import lower_time_buffers
from .lowering import prepare_equations
from .optimizer import BlockingPlan
from .optimizer import apply_cse
from .optimizer import block_loops
from .optimizer import fold_scalars
from .util import _with_clone
from .util import as_tuple
from .util import cached_property


log = logging.getLogger(__name__)


class SignatureMismatch(ValueError):
    pass


class Operator(object):
    """Stencil update applied over the grid for ``nt`` timesteps.

    :param stencils: equations ``Eqn(lhs, rhs)``, symbolic or indexed
    :param subs: values of scalar symbols like the spacings ``h`` and ``s``
    :param nt: number of timesteps
    :param direction: ``'forward'`` or ``'backward'`` in time
    :param iterations: :class:`~stencilforge.lowering.CustomIteration`
        objects run inside the time loop, like source injection
    :param blocking: :class:`~stencilforge.optimizer.BlockingPlan`
    :param config: :class:`~stencilforge.compiler.CodegenConfig`

    Lowering, code generation and compilation happen lazily and are
    cached. Generative methods return modified copies::

        op = Operator([Eqn(u.forward, stencil)], subs={h: 0.1, s: 0.01})
        op.with_blocking(BlockingPlan(x=16)).apply()
    """

    def __init__(self, stencils, subs=None, nt=1, direction=FORWARD,
                 iterations=None, blocking=None, config=None,
                 name='Operator', registry=None, cse=True):
        if direction not in (FORWARD, BACKWARD):
            raise ValueError('Unknown direction: {!r}'.format(direction))
        if nt < 0:
            raise ValueError('Number of timesteps must be >= 0: {}'.format(nt))
        stencils = as_tuple(stencils)
        for eqn in stencils:
            if not isinstance(eqn, Eqn):
                raise TypeError('Expected an equation: {!r}'.format(eqn))
        self._stencils = stencils
        self._subs = dict(subs or {})
        self._nt = nt
        self._direction = direction
        self._iterations = as_tuple(iterations)
        self._blocking = blocking or BlockingPlan.unblocked()
        self._config = config
        self._name = name
        self._registry = default_registry if registry is None else registry
        self._cse = cse

    def clone(self):
        op = self.__class__.__new__(self.__class__)
        op.__dict__ = {
            k: v for k, v in self.__dict__.items()
            if not k.startswith('_cached_')
        }
        return op

    @_with_clone
    def with_blocking(self, plan):
        self._blocking = plan or BlockingPlan.unblocked()

    @_with_clone
    def with_config(self, config):
        self._config = config

    @_with_clone
    def with_nt(self, nt):
        if nt < 0:
            raise ValueError('Number of timesteps must be >= 0: {}'.format(nt))
        self._nt = nt

    @_with_clone
    def with_subs(self, *args, **kwargs):
        subs = dict(self._subs)
        for a in args:
            subs.update(a)
        subs.update(kwargs)
        self._subs = subs

    @property
    def nt(self):
        return self._nt

    @property
    def direction(self):
        return self._direction

    @property
    def blocking(self):
        return self._blocking

    @property
    def name(self):
        return self._name

    @property
    def registry(self):
        return self._registry

    @property
    def config(self):
        if self._config is None:
            self._config = CodegenConfig.from_environ()
        return self._config

    @cached_property
    def _cached_equations(self):
        return prepare_equations(self._stencils, registry=self._registry)

    @cached_property
    def _cached_unblocked_nest(self):
        eqs = self._cached_equations
        dimensions = infer_iteration_space(eqs, registry=self._registry)
        nest = build_nest(
            eqs, dimensions, nt=self._nt, direction=self._direction,
            registry=self._registry,
        )
        for iteration in self._iterations:
            nest = add_custom_iteration(nest, iteration)
        nest = fold_scalars(nest, self._subs)
        if self._cse:
            nest = apply_cse(nest)
        return lower_time_buffers(nest)

    @cached_property
    def _cached_nest(self):
        return block_loops(self._cached_unblocked_nest, self._blocking)

    @property
    def nest(self):
        """The lowered and optimized loop nest."""
        return self._cached_nest

    @cached_property
    def _cached_source(self):
        return emit_source(self.nest, config=self.config, name=self._name)

    @property
    def ccode(self):
        return self._cached_source

    def functions(self):
        """Data functions passed to the kernel, in declaration order."""
        return self.nest.functions()

    @property
    def signature(self):
        return kernel_signature(self.nest)

    @cached_property
    def _cached_kernel(self):
        return jit_compile(
            self.ccode, config=self.config, name=self._name,
            signature=self.signature,
        )

    def build(self):
        return self._cached_kernel

    def arguments(self, *functions):
        """Buffers in kernel order, taken from ``functions`` by name.

        Functions not given are taken from the registry.
        """
        given = dict((f.name, f) for f in functions)
        args = []
        for arg in self.signature:
            function = given.pop(arg.name, arg.function)
            data = function.data if hasattr(function, 'data') else function
            data = np.asarray(data)
            if data.shape != arg.shape or data.dtype != arg.dtype:
                raise SignatureMismatch(
                    '{}: expected {} {}, got {} {}'.format(
                        arg.name, arg.dtype, arg.shape,
                        data.dtype, data.shape,
                    )
                )
            if not data.flags['C_CONTIGUOUS']:
                raise SignatureMismatch(
                    '{} is not C-contiguous'.format(arg.name)
                )
            args.append(data)
        if given:
            raise SignatureMismatch(
                'Functions not used by {}: {}'.format(
                    self._name, sorted(given)
                )
            )
        return args

    def apply(self, *functions, **kwargs):
        """Runs the compiled kernel over the function buffers in place."""
        threads = kwargs.pop('threads', None)
        if kwargs:
            raise TypeError('Unexpected arguments: {}'.format(sorted(kwargs)))
        args = self.arguments(*functions)
        kernel = self.build()
        log.debug('Running %s for %d timesteps', self._name, self._nt)
        return kernel(*args, threads=threads)

    def interpret(self, *functions):
        """Runs the loop nest with the reference interpreter."""
        args = self.arguments(*functions)
        arrays = dict(
            (arg.name, data) for arg, data in zip(self.signature, args)
        )
        return interpret(self.nest, arrays=arrays)

    def last_written_slot(self):
        """Time buffer holding the newest level after :meth:`apply`."""
        return last_written_slot(self.nest)

    def __repr__(self):
        return '<Operator {} nt={} {} blocking={}>'.format(
            self._name, self._nt, self._direction, self._blocking.to_text()
        )
