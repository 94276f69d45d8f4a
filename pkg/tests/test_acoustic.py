import math

import numpy as np

import pytest

from stencilforge.ext.acoustic import (
    AcousticModel, AcousticWaveSolver, AdjointTestResult, CflViolation,
    adjoint_test, damping_profile, ricker_wavelet, stencil_weight_sum,
)
from stencilforge.finite_difference import InvalidOrder
from stencilforge.types import get_type


def test_ricker_wavelet():
    assert ricker_wavelet(10., 0.1) == pytest.approx(1.)
    crossing = 1. / (math.pi * 10. * math.sqrt(2.))
    np.testing.assert_allclose(
        ricker_wavelet(10., [0.1 - crossing, 0.1 + crossing]), 0.,
        atol=1e-12,
    )
    assert ricker_wavelet(10., 0.13) == pytest.approx(
        ricker_wavelet(10., 0.07)
    )
    assert ricker_wavelet(10., 0.) == pytest.approx(
        -(2 * math.pi ** 2 - 1) * math.exp(-math.pi ** 2), abs=1e-3
    )
    assert ricker_wavelet(5., 0.3, t0=0.3) == pytest.approx(1.)
    with pytest.raises(ValueError):
        ricker_wavelet(0., 0.1)


def test_damping_profile():
    eta = damping_profile((10, 12), 3, 15., 2000.)
    coefficient = 1.5 * 2000. * math.log(1000.) / 45.
    assert eta.shape == (10, 12)
    assert not eta[3:7, 3:9].any()
    assert eta[0, 6] == pytest.approx(coefficient)
    assert eta[0, 0] == pytest.approx(2 * coefficient)
    assert eta[1, 6] == pytest.approx(coefficient * 4. / 9.)
    assert eta[0, 6] > eta[1, 6] > eta[2, 6] > eta[3, 6] == 0.
    np.testing.assert_allclose(eta, eta[::-1, ::-1])
    assert not damping_profile((10, 12), 0, 15., 2000.).any()


def test_stencil_weight_sum():
    assert stencil_weight_sum(2) == 4
    assert stencil_weight_sum(4) > stencil_weight_sum(2)


class TestAcousticModel(object):
    def test_geometry(self):
        model = AcousticModel.two_layer((20, 30), nbpml=4, nt=5)
        assert model.shape == (20, 30)
        assert model.ndim == 2
        assert model.grid_shape == (28, 38)
        assert model.extent == [285., 435.]
        assert model.origin == -60.
        assert model.vp[:, 14].max() == 1500.
        assert model.vp[:, 15].min() == 2500.
        assert model.m.shape == (28, 38)
        assert model.m[0, 0] == pytest.approx(1. / 1500. ** 2)
        assert model.m[0, -1] == pytest.approx(1. / 2500. ** 2)
        assert model.eta.shape == (28, 38)
        assert model.src_coordinates.tolist() == [[142.5, 30.]]
        assert model.rec_coordinates.shape == (20, 2)
        assert model.rec_coordinates[:, 1].tolist() == [30.] * 20
        assert model.time_axis.shape == (5,)
        assert model.source_wavelet().shape == (5,)

    def test_three_dimensional_sources(self):
        model = AcousticModel.homogeneous((10, 8, 6), nt=1)
        assert model.src_coordinates.tolist() == [[67.5, 52.5, 30.]]
        assert model.rec_coordinates.shape == (10, 3)

    def test_critical_dt(self):
        model = AcousticModel.two_layer((20, 20), nt=1)
        expected = 0.9 * 2 * 15. / 2500. / math.sqrt(2 * 4.)
        assert model.critical_dt == pytest.approx(expected)
        assert model.dt == pytest.approx(expected)
        assert AcousticModel.two_layer(
            (20, 20), nt=1, space_order=8
        ).critical_dt < expected

    def test_number_of_timesteps_from_duration(self):
        model = AcousticModel.homogeneous((20, 20), dt=0.001, tn=0.0305)
        assert model.nt == 31

    def test_validation(self):
        with pytest.raises(CflViolation):
            AcousticModel.homogeneous((20, 20), dt=1., nt=1)
        with pytest.raises(InvalidOrder):
            AcousticModel.homogeneous((20, 20), space_order=5, nt=1)
        with pytest.raises(ValueError):
            AcousticModel.homogeneous((20,), nt=1)
        with pytest.raises(ValueError):
            AcousticModel.homogeneous((20, 20), velocity=0., nt=1)
        with pytest.raises(ValueError):
            AcousticModel.homogeneous((20, 20), nbpml=-1, nt=1)
        with pytest.raises(ValueError):
            AcousticModel.homogeneous((20, 20), nt=-1)


def test_solver_functions(small_model):
    solver = AcousticWaveSolver(small_model)
    assert list(solver.registry.keys()) == [
        'u', 'v', 'm', 'eta',
        'src', 'src_cells', 'src_weights',
        'rec', 'rec_cells', 'rec_weights',
    ]
    assert solver.u.data.shape == (3, 18, 18)
    assert solver.u.dtype == np.float64
    np.testing.assert_allclose(solver.m.data, small_model.m)
    assert solver.forward_operator.direction == 'forward'
    assert solver.adjoint_operator.direction == 'backward'
    assert solver.forward_operator.nt == 20

    with pytest.raises(ValueError):
        solver.forward(np.zeros((3, 1)))


def test_forward_zero_source(small_model):
    solver = AcousticWaveSolver(small_model)
    u, rec = solver.forward(np.zeros(small_model.nt), interpret=True)
    assert u.shape == (18, 18)
    assert rec.shape == (20, 12)
    assert not u.any()
    assert not rec.any()


def test_forward_reaches_receivers(small_model):
    solver = AcousticWaveSolver(small_model)
    u, rec = solver.forward(interpret=True)
    assert np.abs(u).max() > 0
    assert np.abs(rec[-1]).max() > 0
    # the source sits in the middle of the receiver line
    middle = np.abs(rec).sum(axis=0)
    assert middle.argmax() in (5, 6)


def test_adjoint_test_interpreted(small_model):
    result = adjoint_test(small_model, seed=3, interpret=True)
    assert result.order == 2
    assert result.ndim == 2
    assert result.forward_product != 0
    assert result.passed
    assert abs(result.ratio - 1) < 1e-10


def test_no_timesteps():
    model = AcousticModel.homogeneous((10, 10), nbpml=2, nt=0,
                                      element_type='f64')
    solver = AcousticWaveSolver(model)
    u, rec = solver.forward()
    assert u.shape == (14, 14)
    assert not u.any()
    assert rec.shape == (0, 10)


class TestAdjointTestResult(object):
    def test_text(self):
        result = AdjointTestResult(4, 2, 2., 2., get_type('f64'))
        assert result.ratio == 1.
        assert result.difference == 0.
        assert result.passed
        assert result.tolerance == 1e-10
        assert result.to_text() == \
            '4 2D 2.0000000000e+00 2.0000000000e+00 0.000e+00 1.000000000000'

    def test_tolerance(self):
        f32 = get_type('f32')
        assert AdjointTestResult(2, 3, 1.000001, 1., f32).passed
        assert not AdjointTestResult(2, 3, 1.001, 1., f32).passed

    def test_undefined_ratio(self):
        result = AdjointTestResult(2, 2, 0., 0., get_type('f32'))
        assert result.ratio is None
        assert result.passed
        assert result.to_text().endswith(' undefined')
        assert not AdjointTestResult(2, 2, 1., 0., get_type('f32')).passed
