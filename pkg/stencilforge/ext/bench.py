"""Timing of the generated kernels against the Python implementations."""
import gc
import logging
import os
import time
from collections import OrderedDict

import numpy as np

from ..optimizer import BlockingPlan
from .acoustic import AcousticModel
from .acoustic import AcousticWaveSolver
from .diffusion import DiffusionConfig
from .diffusion import diffusion_numpy
from .diffusion import diffusion_operator
from .diffusion import diffusion_reference


log = logging.getLogger(__name__)


DEFAULT_REPEATS = 3

DIFFUSION_DEFAULTS = OrderedDict([
    ('shape', (512, 512)),
    ('nt', 200),
    ('space_order', 2),
    ('element_type', 'f32'),
    ('block', (16, 16)),
    ('threads', None),
    ('variants', ('reference', 'numpy', 'jit', 'jit-blocked')),
])

ACOUSTIC_DEFAULTS = OrderedDict([
    ('shape', (281, 281, 150)),
    ('nt', 100),
    ('space_order', 4),
    ('element_type', 'f32'),
    ('nbpml', 40),
    ('block', (16, 16)),
    ('threads', None),
    ('memory_limit', None),
    ('variants', ('jit', 'jit-blocked')),
])


class SkippedTooLarge(Exception):
    pass


class VariantTiming(object):
    def __init__(self, name, timings):
        self.name = name
        self.timings = list(timings)

    @property
    def median(self):
        return float(np.median(self.timings))

    def to_dict(self):
        return OrderedDict([
            ('variant', self.name),
            ('median', self.median),
            ('runs', self.timings),
        ])


class BenchReport(object):
    """Median runtimes of every variant of one scenario."""

    def __init__(self, scenario, params, variants=None, skipped=None):
        self.scenario = scenario
        self.params = params
        self.variants = list(variants or [])
        self.skipped = skipped

    def get(self, name):
        for variant in self.variants:
            if variant.name == name:
                return variant
        raise KeyError(name)

    def speedup(self, slow, fast):
        return self.get(slow).median / self.get(fast).median

    def to_dict(self):
        return OrderedDict([
            ('scenario', self.scenario),
            ('params', dict(
                (k, list(v) if isinstance(v, tuple) else v)
                for k, v in self.params.items()
            )),
            ('skipped', self.skipped),
            ('variants', [v.to_dict() for v in self.variants]),
        ])

    def to_lines(self):
        if self.skipped:
            return ['{} skipped {}'.format(self.scenario, self.skipped)]
        return [
            '{} {} {:.6f} {}'.format(
                self.scenario, v.name, v.median, len(v.timings)
            )
            for v in self.variants
        ]


def measure(func, repeats=DEFAULT_REPEATS, reset=None, timer=time.monotonic):
    """Runs ``func`` once to warm up, then ``repeats`` timed times."""
    if reset is not None:
        reset()
    func()
    timings = []
    gc.disable()
    try:
        for _ in range(repeats):
            if reset is not None:
                reset()
            start = timer()
            func()
            timings.append(timer() - start)
    finally:
        gc.enable()
    return timings


def _plan(block, ndim):
    if not block:
        return BlockingPlan.unblocked()
    names = ('x', 'y', 'z')[:ndim]
    return BlockingPlan(dict(zip(names, block)))


def available_memory():
    try:
        return os.sysconf('SC_PAGE_SIZE') * os.sysconf('SC_PHYS_PAGES')
    except (ValueError, OSError, AttributeError):
        return None


def bench_diffusion(params, repeats=DEFAULT_REPEATS, config=None):
    cfg = DiffusionConfig(
        params['shape'][0], params['shape'][1], nt=params['nt'],
        space_order=params['space_order'],
        element_type=params['element_type'],
    )
    u0 = cfg.initial_field()
    variants = []
    op, u = diffusion_operator(cfg, config=config)

    def reset():
        u.data[...] = u0

    for name in params['variants']:
        if name == 'reference':
            run = lambda: diffusion_reference(cfg, u0)  # noqa: E731
            timings = measure(run, repeats=repeats)
        elif name == 'numpy':
            run = lambda: diffusion_numpy(cfg, u0)  # noqa: E731
            timings = measure(run, repeats=repeats)
        elif name in ('jit', 'jit-blocked'):
            variant = op
            if name == 'jit-blocked':
                variant = op.with_blocking(_plan(params['block'], 2))
            variant.build()
            timings = measure(
                lambda: variant.apply(threads=params['threads']),
                repeats=repeats, reset=reset,
            )
        else:
            raise ValueError('Unknown diffusion variant: {!r}'.format(name))
        log.info('diffusion %s: %s', name, timings)
        variants.append(VariantTiming(name, timings))
    return variants


def acoustic_footprint(model):
    cells = 1
    for n in model.grid_shape:
        cells *= n
    # two wavefields of three levels, the slowness and the damping
    return cells * 8 * model.element_type.itemsize


def bench_acoustic(params, repeats=DEFAULT_REPEATS, config=None):
    model = AcousticModel.two_layer(
        tuple(params['shape']), nt=params['nt'],
        space_order=params['space_order'], nbpml=params['nbpml'],
        element_type=params['element_type'],
    )
    limit = params['memory_limit'] or available_memory()
    footprint = acoustic_footprint(model)
    if limit is not None and footprint > limit:
        raise SkippedTooLarge(
            'Acoustic model {} needs {} bytes, {} available'.format(
                model.grid_shape, footprint, limit
            )
        )
    solver = AcousticWaveSolver(model, config=config)
    src = model.source_wavelet()
    variants = []
    for name in params['variants']:
        if name == 'interpreter':
            op = solver.forward_operator
            run = lambda: solver.forward(  # noqa: E731
                src, op=op, interpret=True
            )
        elif name in ('jit', 'jit-blocked'):
            op = solver.forward_operator
            if name == 'jit-blocked':
                op = op.with_blocking(_plan(params['block'], model.ndim))
            op.build()
            run = lambda: solver.forward(  # noqa: E731
                src, op=op, threads=params['threads']
            )
        else:
            raise ValueError('Unknown acoustic variant: {!r}'.format(name))
        timings = measure(run, repeats=repeats)
        log.info('acoustic %s: %s', name, timings)
        variants.append(VariantTiming(name, timings))
    return variants


SCENARIOS = OrderedDict([
    ('diffusion', (DIFFUSION_DEFAULTS, bench_diffusion)),
    ('acoustic', (ACOUSTIC_DEFAULTS, bench_acoustic)),
])


def bench(scenario, params=None, repeats=DEFAULT_REPEATS, config=None):
    """Times every variant of a scenario, the warmup run excluded.

    :param params: overrides of the scenario defaults
    :returns: :class:`BenchReport`
    """
    if scenario not in SCENARIOS:
        raise ValueError('Unknown scenario: {!r}'.format(scenario))
    if repeats < 1:
        raise ValueError('At least one run is needed: {}'.format(repeats))
    defaults, runner = SCENARIOS[scenario]
    unknown = set(params or {}) - set(defaults)
    if unknown:
        raise ValueError('Unknown {} parameters: {}'.format(
            scenario, sorted(unknown)
        ))
    merged = OrderedDict(defaults)
    merged.update((k, v) for k, v in (params or {}).items() if v is not None)
    try:
        variants = runner(merged, repeats=repeats, config=config)
    except SkippedTooLarge as e:
        log.warning('Skipping %s: %s', scenario, e)
        return BenchReport(scenario, merged, skipped=str(e))
    return BenchReport(scenario, merged, variants)
