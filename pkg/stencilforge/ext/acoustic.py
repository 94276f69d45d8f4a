"""Acoustic wave equation with absorbing boundaries.

The forward operator solves ``m * u.dt2 - u.laplace + eta * u.dt = q``
for a Ricker source and samples the wavefield at receivers. The adjoint
operator runs the same scheme backward in time with the damping sign
flipped and the roles of sources and receivers swapped, so that both
operators are exact transposes of each other.
"""
import logging
import math

import numpy as np

from ..algebra import solve_linear
from ..data import GridFunction
from ..data import TimeFunction
from ..data import validate_space_order
from ..datastructures import SymbolRegistry
from ..expression import Eqn
from ..expression import h
from ..expression import s
from ..finite_difference import centered_offsets
from ..finite_difference import fd_weights
from ..lowering import BACKWARD
from ..lowering import FORWARD
from ..operator import Operator
from ..sparse import SparsePointSet
from ..sparse import build_inject
from ..sparse import build_sample
from ..types import get_type
from ..util import cached_property
from ..util import to_fraction


log = logging.getLogger(__name__)


DEFAULT_NBPML = 10
DEFAULT_PEAK_FREQUENCY = 10.
DEFAULT_DURATION = 0.5
CFL_SAFETY = 0.9
DAMPING_REFLECTION = 1e-3

ADJOINT_TOLERANCE = {
    'float': 1e-5,
    'double': 1e-10,
}


class CflViolation(ValueError):
    pass


def ricker_wavelet(f0, t, t0=None):
    """Ricker wavelet of peak frequency ``f0`` in Hz, delayed by ``t0``.

    ``t0`` defaults to ``1 / f0`` so the wavelet starts close to zero.

    >>> float(ricker_wavelet(10., 0.1))
    1.0
    """
    if f0 <= 0:
        raise ValueError('Peak frequency must be positive: {}'.format(f0))
    if t0 is None:
        t0 = 1. / f0
    r = (np.pi * f0 * (np.asarray(t, dtype=np.float64) - t0)) ** 2
    return (1. - 2. * r) * np.exp(-r)


def damping_profile(shape, nbpml, spacing, max_velocity):
    """Damping coefficients growing quadratically toward the outer edge.

    Zero in the interior. Within ``nbpml`` cells of an edge every axis
    contributes ``c * (1 - d / nbpml)**2`` for a cell ``d`` cells away
    from the edge.
    """
    eta = np.zeros(shape, dtype=np.float64)
    if nbpml == 0:
        return eta
    coefficient = 1.5 * max_velocity * math.log(1. / DAMPING_REFLECTION) \
        / (nbpml * spacing)
    for axis, n in enumerate(shape):
        index = np.arange(n)
        distance = np.minimum(index, n - 1 - index)
        profile = np.where(
            distance < nbpml,
            coefficient * (1. - distance / float(nbpml)) ** 2,
            0.,
        )
        view = [np.newaxis] * len(shape)
        view[axis] = slice(None)
        eta += profile[tuple(view)]
    return eta


def stencil_weight_sum(space_order):
    return sum(abs(w) for w in fd_weights(
        2, centered_offsets(2, space_order)
    ))


class AcousticModel(object):
    """Velocity model, padding and acquisition geometry.

    :param vp: velocities in m/s over the physical grid, the last axis
        being depth
    :param spacing: grid spacing in metres
    :param nbpml: width of the damping layer added on every side
    :param dt: timestep in seconds, the stable maximum by default
    :param tn: duration in seconds when ``nt`` is not given
    :param src_coordinates: physical coordinates of sources, one row per
        point; one source near the surface in the middle by default
    :param rec_coordinates: physical coordinates of receivers; a line
        along the first axis at the source depth by default
    """

    def __init__(self, vp, spacing=15., nbpml=DEFAULT_NBPML, space_order=2,
                 nt=None, dt=None, tn=DEFAULT_DURATION,
                 f0=DEFAULT_PEAK_FREQUENCY, src_coordinates=None,
                 rec_coordinates=None, element_type='f32'):
        vp = np.asarray(vp, dtype=np.float64)
        if vp.ndim not in (2, 3):
            raise ValueError(
                'Velocity model must be 2D or 3D: {}'.format(vp.shape)
            )
        if not np.all(vp > 0):
            raise ValueError('Velocities must be positive')
        if nbpml < 0:
            raise ValueError('Damping width must be >= 0: {}'.format(nbpml))
        validate_space_order(
            tuple(n + 2 * nbpml for n in vp.shape), space_order
        )
        self.vp = vp
        self.spacing = float(spacing)
        self.nbpml = nbpml
        self.space_order = space_order
        self.f0 = float(f0)
        self.element_type = get_type(element_type)

        if dt is None:
            dt = self.critical_dt
        elif dt > self.critical_dt:
            raise CflViolation(
                'Timestep {} exceeds the stable limit {} for order {}'.format(
                    dt, self.critical_dt, space_order
                )
            )
        self.dt = float(dt)
        if nt is None:
            nt = int(math.ceil(tn / self.dt))
        if nt < 0:
            raise ValueError('Number of timesteps must be >= 0: {}'.format(nt))
        self.nt = nt

        if src_coordinates is None:
            src_coordinates = [self._surface_point(self.extent[0] / 2.)]
        if rec_coordinates is None:
            rec_coordinates = [
                self._surface_point(c)
                for c in np.linspace(0., self.extent[0], self.shape[0])
            ]
        self.src_coordinates = np.atleast_2d(
            np.asarray(src_coordinates, dtype=np.float64)
        )
        self.rec_coordinates = np.atleast_2d(
            np.asarray(rec_coordinates, dtype=np.float64)
        )

    @classmethod
    def homogeneous(cls, shape, velocity=1500., **kwargs):
        return cls(np.full(shape, velocity, dtype=np.float64), **kwargs)

    @classmethod
    def two_layer(cls, shape, v_top=1500., v_bottom=2500., **kwargs):
        """Slow layer over a fast one, the interface at half depth."""
        vp = np.full(shape, v_top, dtype=np.float64)
        vp[..., shape[-1] // 2:] = v_bottom
        return cls(vp, **kwargs)

    def _surface_point(self, first):
        point = [first] + [e / 2. for e in self.extent[1:-1]]
        point.append(2 * self.spacing)
        return point

    @property
    def shape(self):
        return self.vp.shape

    @property
    def ndim(self):
        return self.vp.ndim

    @property
    def extent(self):
        return [(n - 1) * self.spacing for n in self.shape]

    @property
    def grid_shape(self):
        return tuple(n + 2 * self.nbpml for n in self.shape)

    @property
    def origin(self):
        return -self.nbpml * self.spacing

    @property
    def m(self):
        """Square slowness over the padded grid."""
        vp = np.pad(self.vp, self.nbpml, mode='edge')
        return 1. / vp ** 2

    @property
    def eta(self):
        return damping_profile(
            self.grid_shape, self.nbpml, self.spacing, float(self.vp.max())
        )

    @property
    def critical_dt(self):
        """Largest stable timestep times a safety factor."""
        weights = float(stencil_weight_sum(self.space_order))
        return CFL_SAFETY * 2 * self.spacing / float(self.vp.max()) \
            / math.sqrt(self.ndim * weights)

    @property
    def time_axis(self):
        return np.arange(self.nt) * self.dt

    def source_wavelet(self):
        return ricker_wavelet(self.f0, self.time_axis)

    def __repr__(self):
        return '<AcousticModel {} order={} nbpml={} nt={} dt={:.6g}>'.format(
            self.shape, self.space_order, self.nbpml, self.nt, self.dt
        )


class AcousticWaveSolver(object):
    """Forward and adjoint operators over one model.

    Both operators share the medium functions ``m`` and ``eta`` and the
    point sets ``src`` and ``rec``.
    """

    def __init__(self, model, config=None, blocking=None, registry=None):
        self.model = model
        self.config = config
        self.blocking = blocking
        registry = SymbolRegistry() if registry is None else registry
        self.registry = registry
        element_type = model.element_type
        grid_shape = model.grid_shape
        kwargs = dict(
            space_order=model.space_order, element_type=element_type,
            registry=registry, spacing=(h,) * model.ndim,
        )
        self.u = TimeFunction('u', grid_shape, time_order=2, **kwargs)
        self.v = TimeFunction('v', grid_shape, time_order=2, **kwargs)
        self.m = GridFunction('m', grid_shape, **kwargs)
        self.eta = GridFunction('eta', grid_shape, **kwargs)
        self.m.data = model.m
        self.eta.data = model.eta

        points = dict(
            nt=model.nt, grid_shape=grid_shape, spacing=model.spacing,
            element_type=element_type, registry=registry,
            halo=model.space_order // 2, origin=model.origin,
        )
        self.src = SparsePointSet('src', model.src_coordinates, **points)
        self.rec = SparsePointSet('rec', model.rec_coordinates, **points)
        self.subs = {
            s: to_fraction(model.dt),
            h: to_fraction(model.spacing),
        }

    def _injection_scale(self):
        m = self.m.expr
        eta = self.eta.expr
        return s ** 2 / (m + eta * s / 2)

    def _operator(self, field, target, eqn, direction, inject, sample, name):
        stencil = solve_linear(Eqn(eqn, 0), target)
        offset = 1 if direction == FORWARD else -1
        iterations = [
            build_inject(field, inject, scale=self._injection_scale(),
                         time_offset=offset),
            build_sample(field, sample, time_offset=offset),
        ]
        return Operator(
            [Eqn(target, stencil)], subs=self.subs, nt=self.model.nt,
            direction=direction, iterations=iterations,
            blocking=self.blocking, config=self.config,
            registry=self.registry, name=name,
        )

    @cached_property
    def forward_operator(self):
        u = self.u
        eqn = self.m * u.dt2 - u.laplace + self.eta * u.dt
        return self._operator(
            u, u.forward, eqn, FORWARD, self.src, self.rec, 'Forward'
        )

    @cached_property
    def adjoint_operator(self):
        v = self.v
        eqn = self.m * v.dt2 - v.laplace - self.eta * v.dt
        return self._operator(
            v, v.backward, eqn, BACKWARD, self.rec, self.src, 'Adjoint'
        )

    def _series(self, values, points):
        shape = (self.model.nt, points.npoints)
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1:
            values = np.repeat(values[:, None], points.npoints, axis=1)
        if values.shape != shape:
            raise ValueError('Time series of shape {} for {}, expected {}'
                             .format(values.shape, points.name, shape))
        return values

    def _run(self, op, field, threads, interpret):
        field.data[...] = 0
        if self.model.nt == 0:
            return
        if interpret:
            op.interpret()
        else:
            op.apply(threads=threads)

    def forward(self, src=None, op=None, threads=None, interpret=False):
        """Propagates the source series, returns ``(wavefield, receivers)``.

        ``src`` is an ``(nt, npoints)`` array or one series shared by all
        sources, the model wavelet by default.
        """
        if src is None:
            src = self.model.source_wavelet()
        self.src.data = self._series(src, self.src)
        self.rec.data = 0
        op = op or self.forward_operator
        self._run(op, self.u, threads, interpret)
        return self._final(op, self.u), self.rec.data.copy()

    def adjoint(self, rec, op=None, threads=None, interpret=False):
        """Back-propagates receiver data, returns ``(wavefield, sources)``."""
        self.rec.data = self._series(rec, self.rec)
        self.src.data = 0
        op = op or self.adjoint_operator
        self._run(op, self.v, threads, interpret)
        return self._final(op, self.v), self.src.data.copy()

    def _final(self, op, field):
        slot = op.last_written_slot()
        if slot is None:
            return np.zeros(field.space_shape, dtype=field.dtype)
        return field.time_slot(slot).copy()


def acoustic_forward(model, src=None, **kwargs):
    threads = kwargs.pop('threads', None)
    return AcousticWaveSolver(model, **kwargs).forward(src, threads=threads)


def acoustic_adjoint(model, rec, **kwargs):
    threads = kwargs.pop('threads', None)
    return AcousticWaveSolver(model, **kwargs).adjoint(rec, threads=threads)


class AdjointTestResult(object):
    def __init__(self, order, ndim, forward_product, adjoint_product,
                 element_type):
        self.order = order
        self.ndim = ndim
        self.forward_product = forward_product
        self.adjoint_product = adjoint_product
        self.element_type = element_type

    @property
    def difference(self):
        return self.forward_product - self.adjoint_product

    @property
    def ratio(self):
        """``None`` when the adjoint product vanishes."""
        if self.adjoint_product == 0:
            return None
        return self.forward_product / self.adjoint_product

    @property
    def tolerance(self):
        return ADJOINT_TOLERANCE[self.element_type.ctype]

    @property
    def passed(self):
        if self.ratio is None:
            return self.forward_product == 0
        return abs(self.ratio - 1) <= self.tolerance

    def to_text(self):
        ratio = 'undefined' if self.ratio is None else \
            '{:.12f}'.format(self.ratio)
        return '{} {}D {:.10e} {:.10e} {:.3e} {}'.format(
            self.order, self.ndim, self.forward_product,
            self.adjoint_product, self.difference, ratio,
        )

    def __repr__(self):
        return '<AdjointTestResult {}>'.format(self.to_text())


def adjoint_test(model, seed=0, src=None, rec=None, threads=None,
                 interpret=False, **kwargs):
    """Compares ``<A x, y>`` with ``<x, A^T y>``.

    ``x`` is the model wavelet at every source and ``y`` a random
    receiver series unless given.
    """
    solver = AcousticWaveSolver(model, **kwargs)
    if src is None:
        src = model.source_wavelet()
    x = solver._series(src, solver.src)
    if rec is None:
        rng = np.random.default_rng(seed)
        rec = rng.standard_normal((model.nt, solver.rec.npoints))
    y = solver._series(rec, solver.rec)

    _, ax = solver.forward(x, threads=threads, interpret=interpret)
    _, aty = solver.adjoint(y, threads=threads, interpret=interpret)
    x = x.astype(solver.src.data.dtype).astype(np.float64)
    y = y.astype(solver.rec.data.dtype).astype(np.float64)
    result = AdjointTestResult(
        model.space_order, model.ndim,
        float(np.sum(ax.astype(np.float64) * y)),
        float(np.sum(x * aty.astype(np.float64))),
        model.element_type,
    )
    log.info('Adjoint test: %s', result.to_text())
    return result
