"""Two-dimensional heat diffusion, the explicit scheme in three flavours.

``diffusion_reference`` runs plain Python loops and is the oracle,
``diffusion_numpy`` works on array slices and ``run_diffusion`` builds
the equation symbolically and runs the generated kernel::

    cfg = DiffusionConfig(64, 64, alpha=0.5, dx=0.01, dy=0.01, nt=100)
    u = run_diffusion(cfg)
"""
import logging
from fractions import Fraction

import numpy as np

from ..algebra import solve_linear
from ..data import TimeFunction
from ..data import validate_space_order
from ..datastructures import SymbolRegistry
from ..expression import Eqn
from ..expression import Symbol
from ..expression import h
from ..expression import s
from ..finite_difference import centered_offsets
from ..finite_difference import fd_weights
from ..operator import Operator
from ..optimizer import autotune
from ..types import get_type
from ..util import to_fraction


log = logging.getLogger(__name__)


DIFFUSIVITY = Symbol('a')


class DiffusionConfig(object):
    """Grid, coefficient and timestep of a diffusion run.

    Every number is kept as an exact fraction. The timestep defaults to
    ``dx**2 * dy**2 / (2 * alpha * (dx**2 + dy**2))``, the largest stable
    one at order 2, which turns the update into the average of the four
    neighbours when ``dx == dy``. Higher orders scale it by the ratio of
    the second derivative weight sums so the update stays stable.
    """

    def __init__(self, nx, ny, alpha=Fraction(1, 2), dx=Fraction(1, 100),
                 dy=None, nt=1, space_order=2, dt=None, element_type='f32'):
        validate_space_order((nx, ny), space_order)
        if nt < 0:
            raise ValueError('Number of timesteps must be >= 0: {}'.format(nt))
        self.nx = nx
        self.ny = ny
        self.alpha = to_fraction(alpha)
        self.dx = to_fraction(dx)
        self.dy = self.dx if dy is None else to_fraction(dy)
        for name in ('alpha', 'dx', 'dy'):
            if getattr(self, name) <= 0:
                raise ValueError('{} must be positive: {}'.format(
                    name, getattr(self, name)
                ))
        self.nt = nt
        self.space_order = space_order
        self._dt = None if dt is None else to_fraction(dt)
        if self._dt is not None and self._dt <= 0:
            raise ValueError('dt must be positive: {}'.format(self._dt))
        self.element_type = get_type(element_type)

    @property
    def dt(self):
        if self._dt is not None:
            return self._dt
        dx2 = self.dx ** 2
        dy2 = self.dy ** 2
        dt = dx2 * dy2 / (2 * self.alpha * (dx2 + dy2))
        # wider stencils have a larger weight sum, 4 at order 2
        weights = sum(abs(w) for w in fd_weights(
            2, centered_offsets(2, self.space_order)
        ))
        return dt * 4 / weights

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def radius(self):
        return self.space_order // 2

    def coefficients(self):
        """Exact weights of the update, keyed by ``(di, dj)`` offsets."""
        offsets = centered_offsets(2, self.space_order)
        weights = fd_weights(2, offsets)
        res = {(0, 0): Fraction(1)}
        cx = self.alpha * self.dt / self.dx ** 2
        cy = self.alpha * self.dt / self.dy ** 2
        for o, w in zip(offsets, weights):
            res[(o, 0)] = res.get((o, 0), 0) + cx * w
            res[(0, o)] = res.get((0, o), 0) + cy * w
        return dict((k, v) for k, v in res.items() if v != 0)

    def initial_field(self, radius=None):
        """Compactly supported bump in the middle of the grid."""
        if radius is None:
            radius = max(min(self.nx, self.ny) / 8., 1.)
        i = np.arange(self.nx)[:, None] - (self.nx - 1) / 2.
        j = np.arange(self.ny)[None, :] - (self.ny - 1) / 2.
        r = np.sqrt(i ** 2 + j ** 2)
        res = np.cos(np.pi * r / (2 * radius)) ** 2
        res[r >= radius] = 0.
        return res

    def __repr__(self):
        return '<DiffusionConfig {}x{} nt={} order={} {}>'.format(
            self.nx, self.ny, self.nt, self.space_order,
            self.element_type.__visit_name__,
        )


def _initial(cfg, u0):
    if u0 is None:
        return cfg.initial_field()
    u0 = np.asarray(u0, dtype=np.float64)
    if u0.shape != cfg.shape:
        raise ValueError('Initial field of shape {} for grid {}'.format(
            u0.shape, cfg.shape
        ))
    return u0


def diffusion_reference(cfg, u0=None):
    """Runs the scheme in nested Python loops in double precision.

    Boundary cells within the stencil radius keep their initial values.
    """
    u0 = _initial(cfg, u0)
    coefficients = [
        (di, dj, float(c))
        for (di, dj), c in sorted(cfg.coefficients().items())
    ]
    r = cfg.radius
    prev = u0.tolist()
    nxt = u0.tolist()
    for _ in range(cfg.nt):
        for i in range(r, cfg.nx - r):
            row = nxt[i]
            for j in range(r, cfg.ny - r):
                value = 0.
                for di, dj, c in coefficients:
                    value += c * prev[i + di][j + dj]
                row[j] = value
        prev, nxt = nxt, prev
    return np.array(prev, dtype=np.float64)


def diffusion_numpy(cfg, u0=None):
    """Same scheme on shifted array slices."""
    u0 = _initial(cfg, u0)
    r = cfg.radius
    prev = u0.copy()
    nxt = u0.copy()
    inner = (slice(r, cfg.nx - r), slice(r, cfg.ny - r))
    coefficients = sorted(cfg.coefficients().items())
    for _ in range(cfg.nt):
        acc = np.zeros_like(prev[inner])
        for (di, dj), c in coefficients:
            acc += float(c) * prev[
                r + di:cfg.nx - r + di, r + dj:cfg.ny - r + dj
            ]
        nxt[inner] = acc
        prev, nxt = nxt, prev
    return prev


def diffusion_operator(cfg, registry=None, config=None, blocking=None):
    """Builds the diffusion operator from ``u.dt = a * (u.dx2 + u.dy2)``.

    Returns the operator and the time function it updates.
    """
    registry = SymbolRegistry() if registry is None else registry
    if cfg.dx == cfg.dy:
        spacing = (h, h)
        subs = {h: cfg.dx}
    else:
        spacing = (Symbol('hx'), Symbol('hy'))
        subs = {spacing[0]: cfg.dx, spacing[1]: cfg.dy}
    subs.update({s: cfg.dt, DIFFUSIVITY: cfg.alpha})

    u = TimeFunction(
        'u', cfg.shape, time_order=1, space_order=cfg.space_order,
        element_type=cfg.element_type, registry=registry, spacing=spacing,
    )
    eqn = Eqn(u.dt, DIFFUSIVITY * (u.dx2 + u.dy2))
    stencil = solve_linear(eqn, u.forward)
    log.debug('Diffusion stencil: %s', stencil)
    op = Operator(
        [Eqn(u.forward, stencil)], subs=subs, nt=cfg.nt, config=config,
        blocking=blocking, registry=registry, name='Diffusion',
    )
    return op, u


def run_diffusion(cfg, u0=None, config=None, blocking=None, threads=None,
                  interpret=False):
    """Runs the generated kernel and returns the final field.

    :param blocking: a :class:`~stencilforge.optimizer.BlockingPlan` or
        ``'auto'`` to pick one by timing the candidates
    :param interpret: run the loop nest with the interpreter instead
    """
    u0 = _initial(cfg, u0)
    auto = blocking == 'auto'
    op, u = diffusion_operator(
        cfg, config=config, blocking=None if auto else blocking,
    )
    u.data[...] = u0
    if cfg.nt == 0:
        return u.time_slot(0).copy()
    if auto:
        op = op.with_blocking(autotune(op))
    if interpret:
        op.interpret(u)
    else:
        op.apply(u, threads=threads)
    return u.time_slot(op.last_written_slot()).copy()
