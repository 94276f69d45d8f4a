"""The ``stencilforge`` command line."""
import argparse
import json
import logging
import os
import sys

import numpy as np

from .codec import dump_field
from .compiler import CodegenConfig
from .ext.acoustic import AcousticModel
from .ext.acoustic import AcousticWaveSolver
from .ext.acoustic import adjoint_test
from .ext.bench import SCENARIOS
from .ext.bench import bench
from .ext.diffusion import DiffusionConfig
from .ext.diffusion import diffusion_operator
from .ext.diffusion import diffusion_reference
from .ext.diffusion import run_diffusion
from .optimizer import BlockingPlan
from .optimizer import autotune_report
from .optimizer import best_plan
from .optimizer import report_lines


log = logging.getLogger(__name__)


LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'
DTYPES = {'f32': 'f32', 'f64': 'f64'}


def int_list(value):
    try:
        res = tuple(int(v) for v in value.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError(
            'Expected comma separated integers: {!r}'.format(value)
        )
    if not res or any(v <= 0 for v in res):
        raise argparse.ArgumentTypeError(
            'Expected positive integers: {!r}'.format(value)
        )
    return res


def block_option(value):
    if value in ('off', 'auto'):
        return value
    return int_list(value)


def blocking_plan(block, ndim):
    if block is None or block == 'off':
        return BlockingPlan.unblocked()
    if block == 'auto':
        return 'auto'
    names = ('x', 'y', 'z')[:ndim]
    return BlockingPlan(dict(zip(names, block)))


def setup():
    ap = argparse.ArgumentParser(
        prog='stencilforge',
        description='Finite-difference stencils compiled to C kernels',
    )
    ap.add_argument('--log-level', dest='log_level',
                    default=os.environ.get('STENCILFORGE_LOGLEVEL', 'WARNING'),
                    help='Logging level, default: WARNING')
    sub = ap.add_subparsers(help='Valid commands')
    for command, setup, handler in [
            ('diffusion', diffusion_setup, run_diffusion_command),
            ('acoustic-forward', acoustic_setup, run_acoustic_forward),
            ('adjoint-test', adjoint_setup, run_adjoint_test),
            ('bench', bench_setup, run_bench),
            ('dump-code', dump_code_setup, run_dump_code),
    ]:
        sub_ap = sub.add_parser(command, help=handler.__doc__)
        sub_ap.set_defaults(action=handler)
        setup(sub_ap)
    return ap


def common_setup(ap, shape, nt, order=2):
    ap.add_argument('--shape', dest='shape', type=int_list, default=shape,
                    help='Grid extents, default: {}'.format(
                        ','.join(str(n) for n in shape)))
    ap.add_argument('--nt', dest='nt', type=int, default=nt,
                    help='Number of timesteps')
    ap.add_argument('--order', dest='order', type=int, default=order,
                    help='Space order, default: {}'.format(order))
    ap.add_argument('--dtype', dest='dtype', choices=sorted(DTYPES),
                    default='f32', help='Element type, default: f32')
    ap.add_argument('--block', dest='block', type=block_option,
                    default='off',
                    help="Block sizes like 16,16, 'auto' or 'off'")
    ap.add_argument('--cc', dest='cc', default=None,
                    help='Compiler preset (gcc, clang, vendor) or path')
    ap.add_argument('--dump', dest='dump', default=None,
                    help='Directory to write generated sources into')
    ap.add_argument('--threads', dest='threads', type=int, default=None,
                    help='Number of threads')
    ap.add_argument('-o', '--output', dest='output', default=None,
                    help='Output file, CSV for .csv and .txt')


def autotune_setup(ap):
    ap.add_argument('--autotune-report', dest='autotune_report',
                    action='store_true', default=False,
                    help='Print the median time of every blocking '
                    'candidate, implies --block auto')


def acoustic_common_setup(ap, shape=(60, 60), order=2):
    common_setup(ap, shape, None, order=order)
    ap.add_argument('--nbpml', dest='nbpml', type=int, default=10,
                    help='Damping layer width in cells, default: 10')
    ap.add_argument('--model', dest='model',
                    choices=['two-layer', 'homogeneous'], default='two-layer',
                    help='Velocity model, default: two-layer')


def diffusion_setup(ap):
    common_setup(ap, (64, 64), 100)
    autotune_setup(ap)
    ap.add_argument('--alpha', dest='alpha', default='0.5',
                    help='Diffusion coefficient, default: 0.5')
    ap.add_argument('--dx', dest='dx', default='0.01',
                    help='Grid spacing, default: 0.01')
    ap.add_argument('--check', dest='check', action='store_true',
                    default=False,
                    help='Compare against the pure Python implementation')


def acoustic_setup(ap):
    acoustic_common_setup(ap)
    autotune_setup(ap)


def adjoint_setup(ap):
    acoustic_common_setup(ap)
    ap.add_argument('--orders', dest='orders', type=int_list,
                    default=(2, 4, 6, 8, 10, 12),
                    help='Space orders to test, default: 2,4,6,8,10,12')
    ap.add_argument('--seed', dest='seed', type=int, default=0,
                    help='Seed of the random receiver data')


def bench_setup(ap):
    ap.add_argument('scenario', choices=list(SCENARIOS))
    ap.add_argument('--shape', dest='shape', type=int_list, default=None)
    ap.add_argument('--nt', dest='nt', type=int, default=None)
    ap.add_argument('--order', dest='space_order', type=int, default=None)
    ap.add_argument('--dtype', dest='element_type', choices=sorted(DTYPES),
                    default=None)
    ap.add_argument('--block', dest='block', type=int_list, default=None)
    ap.add_argument('--threads', dest='threads', type=int, default=None)
    ap.add_argument('--repeats', dest='repeats', type=int, default=3)
    ap.add_argument('--cc', dest='cc', default=None)
    ap.add_argument('--json', dest='json', action='store_true',
                    default=False, help='Print the report as JSON')


def dump_code_setup(ap):
    ap.add_argument('scenario',
                    choices=['diffusion', 'acoustic-forward',
                             'acoustic-adjoint'])
    common_setup(ap, (64, 64), 100)
    ap.add_argument('--nbpml', dest='nbpml', type=int, default=10)


def configure_logging(level):
    level_value = getattr(logging, str(level).upper(), None)
    if not isinstance(level_value, int):
        raise ValueError('Unknown log level: {!r}'.format(level))
    logging.basicConfig(level=level_value, format=LOG_FORMAT)


def codegen_config(options):
    return CodegenConfig.from_environ(
        **dict(
            (k, v) for k, v in (
                ('compiler', getattr(options, 'cc', None)),
                ('dump_path', getattr(options, 'dump', None)),
            ) if v is not None
        )
    )


def main(argv=None):
    ap = setup()
    options = ap.parse_args(argv)
    if not hasattr(options, 'action'):
        ap.print_help()
        return 2
    try:
        configure_logging(options.log_level)
        return options.action(options) or 0
    except (ValueError, RuntimeError, LookupError) as e:
        sys.stderr.write('stencilforge: {}\n'.format(e))
        return 1


# Actions


def run_diffusion_command(options):
    """Run the diffusion example."""
    if len(options.shape) != 2:
        raise ValueError('Diffusion needs a 2D shape: {}'.format(
            options.shape
        ))
    cfg = DiffusionConfig(
        options.shape[0], options.shape[1], alpha=options.alpha,
        dx=options.dx, nt=options.nt, space_order=options.order,
        element_type=DTYPES[options.dtype],
    )
    u0 = cfg.initial_field()
    config = codegen_config(options)
    plan = blocking_plan(options.block, 2)
    if plan == 'auto' or options.autotune_report:
        plan = BlockingPlan.unblocked()
        if cfg.nt > 0:
            op, u = diffusion_operator(cfg, config=config)
            u.data[...] = u0
            plan = tuned_plan(op, options)
    u = run_diffusion(
        cfg, u0, config=config, blocking=plan, threads=options.threads,
    )
    print('diffusion {}x{} nt={} order={} sum={:.12g} max={:.12g}'.format(
        cfg.nx, cfg.ny, cfg.nt, cfg.space_order,
        float(np.sum(u, dtype=np.float64)), float(np.max(u)),
    ))
    if options.check:
        ref = diffusion_reference(cfg, u0)
        scale = max(float(np.max(np.abs(ref))), 1e-300)
        error = float(np.max(np.abs(u - ref))) / scale
        print('relative error {:.3e}'.format(error))
    if options.output:
        dump_field(options.output, u, name='u')


def _model(options, order=None):
    factory = AcousticModel.two_layer if options.model == 'two-layer' \
        else AcousticModel.homogeneous
    return factory(
        tuple(options.shape), nbpml=options.nbpml,
        space_order=options.order if order is None else order,
        nt=options.nt, element_type=DTYPES[options.dtype],
    )


def tuned_plan(op, options):
    """Times the candidate plans of ``op`` and returns the fastest one."""
    report = autotune_report(op)
    if options.autotune_report:
        for line in report_lines(report):
            print(line)
    return best_plan(report)


def _solver(options, model):
    plan = blocking_plan(options.block, model.ndim)
    auto = plan == 'auto' or options.autotune_report
    solver = AcousticWaveSolver(
        model, config=codegen_config(options),
        blocking=None if auto else plan,
    )
    return solver, auto


def run_acoustic_forward(options):
    """Run the acoustic forward operator with a Ricker source."""
    model = _model(options)
    solver, auto = _solver(options, model)
    op = solver.forward_operator
    if auto:
        op = op.with_blocking(tuned_plan(op, options))
    u, rec = solver.forward(op=op, threads=options.threads)
    print('acoustic-forward {} order={} nt={} max|u|={:.6g} max|rec|={:.6g}'
          .format(model.shape, model.space_order, model.nt,
                  float(np.max(np.abs(u))), float(np.max(np.abs(rec)))))
    if options.output:
        dump_field(options.output, rec, name='rec')


def run_adjoint_test(options):
    """Check that the adjoint operator is the transpose of the forward one."""
    failed = 0
    for order in options.orders:
        model = _model(options, order=order)
        result = adjoint_test(
            model, seed=options.seed, threads=options.threads,
            config=codegen_config(options),
            blocking=_static_plan(
                options.block, model.ndim, 'for the adjoint test'
            ),
        )
        print(result.to_text())
        if not result.passed:
            failed += 1
    return 1 if failed else 0


def run_bench(options):
    """Time generated kernels against the Python implementations."""
    params = dict(
        (k, getattr(options, k)) for k in (
            'shape', 'nt', 'space_order', 'element_type', 'block', 'threads'
        )
        if getattr(options, k) is not None
    )
    report = bench(
        options.scenario, params, repeats=options.repeats,
        config=codegen_config(options),
    )
    if options.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        for line in report.to_lines():
            print(line)


def _static_plan(block, ndim, purpose='to print the source'):
    plan = blocking_plan(block, ndim)
    if plan == 'auto':
        raise ValueError('Blocking must be explicit {}'.format(purpose))
    return plan


def run_dump_code(options):
    """Print the generated C source of an example operator."""
    config = codegen_config(options)
    if options.scenario == 'diffusion':
        cfg = DiffusionConfig(
            options.shape[0], options.shape[1], nt=options.nt,
            space_order=options.order, element_type=DTYPES[options.dtype],
        )
        op, _ = diffusion_operator(
            cfg, config=config, blocking=_static_plan(options.block, 2),
        )
    else:
        model = AcousticModel.two_layer(
            tuple(options.shape), nbpml=options.nbpml,
            space_order=options.order, nt=options.nt,
            element_type=DTYPES[options.dtype],
        )
        solver = AcousticWaveSolver(
            model, config=config,
            blocking=_static_plan(options.block, model.ndim),
        )
        if options.scenario == 'acoustic-forward':
            op = solver.forward_operator
        else:
            op = solver.adjoint_operator
    if options.output:
        with open(options.output, 'w') as f:
            f.write(op.ccode)
    else:
        sys.stdout.write(op.ccode)


if __name__ == '__main__':
    sys.exit(main())
