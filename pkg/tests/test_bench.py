import pytest

from mock import Mock

from stencilforge.ext.bench import (
    BenchReport, VariantTiming, acoustic_footprint, bench, measure,
)
from stencilforge.ext.acoustic import AcousticModel


def test_measure():
    func = Mock()
    reset = Mock()
    clock = iter([10., 11., 20., 22.5])
    timings = measure(func, repeats=2, reset=reset, timer=lambda: next(clock))
    assert timings == [1., 2.5]
    assert func.call_count == 3
    assert reset.call_count == 3


def test_report():
    report = BenchReport('diffusion', {'shape': (8, 8), 'nt': 2}, [
        VariantTiming('numpy', [3., 1., 2.]),
        VariantTiming('jit', [0.5, 0.25]),
    ])
    assert report.get('numpy').median == 2.
    assert report.speedup('numpy', 'jit') == pytest.approx(2. / 0.375)
    assert report.to_lines() == [
        'diffusion numpy 2.000000 3',
        'diffusion jit 0.375000 2',
    ]
    data = report.to_dict()
    assert data['params'] == {'shape': [8, 8], 'nt': 2}
    assert data['skipped'] is None
    assert data['variants'][1] == {
        'variant': 'jit', 'median': 0.375, 'runs': [0.5, 0.25],
    }
    with pytest.raises(KeyError):
        report.get('reference')


def test_bench_python_variants():
    report = bench('diffusion', {
        'shape': (10, 12), 'nt': 2, 'variants': ('reference', 'numpy'),
        'block': None,
    }, repeats=2)
    assert [v.name for v in report.variants] == ['reference', 'numpy']
    assert all(len(v.timings) == 2 for v in report.variants)
    assert report.params['shape'] == (10, 12)
    assert report.params['block'] == (16, 16)
    assert report.params['space_order'] == 2


def test_bench_errors():
    with pytest.raises(ValueError):
        bench('maxwell')
    with pytest.raises(ValueError):
        bench('diffusion', {'grid': (8, 8)})
    with pytest.raises(ValueError):
        bench('diffusion', repeats=0)
    with pytest.raises(ValueError):
        bench('diffusion', {'shape': (8, 8), 'variants': ('gpu',)})


def test_acoustic_skipped_when_too_large():
    report = bench('acoustic', {
        'shape': (20, 20), 'nt': 2, 'nbpml': 2, 'space_order': 2,
        'memory_limit': 1000,
    })
    assert report.skipped
    assert report.variants == []
    assert report.to_lines()[0].startswith('acoustic skipped ')
    assert report.to_dict()['skipped'] == report.skipped


def test_acoustic_footprint():
    model = AcousticModel.homogeneous((10, 10), nbpml=5, nt=1)
    assert acoustic_footprint(model) == 400 * 8 * 4
