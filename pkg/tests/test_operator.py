import numpy as np

from mock import patch

from stencilforge.data import GridFunction, TimeFunction
from stencilforge.datastructures import SymbolRegistry
from stencilforge.expression import Eqn, Symbol
from stencilforge.operator import Operator, SignatureMismatch
from stencilforge.optimizer import BlockingPlan

from .base import BaseTestCase


class OperatorTest(BaseTestCase):
    def setUp(self):
        super(OperatorTest, self).setUp()
        r = self.registry
        self.u = TimeFunction('u', (12, 10), registry=r)
        self.h = Symbol('h')
        self.s = Symbol('s')
        self.stencil = Eqn(
            self.u.forward,
            self.u.expr + self.s * self.u.laplace,
        )

    def operator(self, **kwargs):
        kwargs.setdefault('subs', {self.h: 1, self.s: 0.25})
        kwargs.setdefault('nt', 3)
        return Operator([self.stencil], registry=self.registry, **kwargs)

    def test_validation(self):
        with self.assertRaises(ValueError):
            self.operator(nt=-1)
        with self.assertRaises(ValueError):
            self.operator(direction='sideways')
        with self.assertRaises(TypeError):
            Operator([self.u.expr], registry=self.registry)
        with self.assertRaises(ValueError):
            self.operator().with_nt(-2)

    def test_generative_methods(self):
        op = self.operator()
        nest = op.nest
        self.assertIs(op.nest, nest)

        blocked = op.with_blocking(BlockingPlan(x=4))
        self.assertIsNot(blocked, op)
        self.assertIs(op.nest, nest)
        self.assertEqual(blocked.blocking, BlockingPlan(x=4))
        self.assertEqual(op.blocking, BlockingPlan.unblocked())
        self.assertIn('xb', blocked.nest.to_text())

        longer = op.with_nt(7)
        self.assertEqual(longer.nt, 7)
        self.assertEqual(op.nt, 3)
        self.assertEqual(longer.last_written_slot(), 1)

        self.assertEqual(
            op.with_subs({self.s: 0.125})._subs,
            {self.h: 1, self.s: 0.125},
        )
        self.assertEqual(
            repr(op), '<Operator Operator nt=3 forward blocking=off>'
        )

    def test_signature(self):
        m = GridFunction('m', (12, 10), registry=self.registry)
        op = Operator(
            [Eqn(self.u.forward, self.u.expr * m.expr)],
            registry=self.registry,
        )
        self.assertEqual([a.name for a in op.signature], ['u', 'm'])
        self.assertEqual(op.signature[0].shape, (2, 12, 10))
        self.assertEqual(op.functions(), [self.u, m])

    def test_arguments(self):
        op = self.operator()
        args = op.arguments()
        self.assertEqual(len(args), 1)
        self.assertIs(args[0], self.u.data)

        other = TimeFunction('u', (12, 10), registry=SymbolRegistry())
        self.assertIs(op.arguments(other)[0], other.data)

        with self.assertRaises(SignatureMismatch):
            op.arguments(
                TimeFunction('u', (12, 11), registry=SymbolRegistry())
            )
        with self.assertRaises(SignatureMismatch):
            op.arguments(
                TimeFunction('u', (12, 10), element_type='f64',
                             registry=SymbolRegistry())
            )
        with self.assertRaises(SignatureMismatch):
            op.arguments(
                GridFunction('v', (12, 10), registry=SymbolRegistry())
            )

        class Raw(object):
            name = 'u'
            data = np.zeros((2, 10, 12), dtype=np.float32).transpose(0, 2, 1)
        with self.assertRaises(SignatureMismatch):
            op.arguments(Raw())

    def test_interpret_matches_numpy(self):
        self.u.data[0, 6, 5] = 1.
        op = self.operator()
        op.interpret()

        expected = np.zeros((12, 10))
        expected[6, 5] = 1.
        for _ in range(3):
            new = expected.copy()
            new[1:-1, 1:-1] = expected[1:-1, 1:-1] + 0.25 * (
                expected[2:, 1:-1] + expected[:-2, 1:-1]
                + expected[1:-1, 2:] + expected[1:-1, :-2]
                - 4 * expected[1:-1, 1:-1]
            )
            expected = new
        np.testing.assert_allclose(
            self.u.time_slot(op.last_written_slot()), expected, atol=1e-6
        )

    def test_apply_builds_once(self):
        op = self.operator()
        patcher = patch.object(Operator, 'build')
        kernel = patcher.start()
        self.addCleanup(patcher.stop)
        kernel.return_value.return_value = 0

        self.assertEqual(op.apply(threads=2), 0)
        kernel.return_value.assert_called_once_with(self.u.data, threads=2)
        with self.assertRaises(TypeError):
            op.apply(nthreads=2)

    def test_no_timesteps(self):
        op = self.operator(nt=0)
        self.assertIsNone(op.last_written_slot())
        op.interpret()
        self.assertFalse(self.u.data.any())
