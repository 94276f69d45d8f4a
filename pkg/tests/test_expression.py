from fractions import Fraction

import pytest

from stencilforge.expression import (
    Add, Eqn, FloatConst, FunctionApp, Indexed, IntConst, Mul, Pow,
    RationalConst, Symbol, SymbolicZeroDivision, const, symbols,
)
from stencilforge.compiler import EvaluationError

from .base import BaseTestCase


x, y, h, q = symbols('x y h q')


class ExpressionTest(BaseTestCase):
    def test_constants(self):
        self.assertEqual(const(3), IntConst(3))
        self.assertEqual(const(Fraction(1, 2)), RationalConst(1, 2))
        self.assertEqual(const(Fraction(4, 2)), IntConst(2))
        self.assertEqual(const(0.5), FloatConst(0.5))
        self.assertEqual(RationalConst(2, 4), RationalConst(1, 2))
        self.assertEqual(repr(RationalConst(2, 4)), 'RationalConst(1, 2)')
        with self.assertRaises(SymbolicZeroDivision):
            RationalConst(1, 0)
        with self.assertRaises(TypeError):
            const(True)
        with self.assertRaises(TypeError):
            const('1')

    def test_raw_nodes_are_kept(self):
        expr = Add(x, x)
        self.assertEqual(expr.terms, (x, x))
        self.assertNotEqual(expr, Mul(2, x))
        self.assert_text(expr, 'x + x')

    def test_operators_simplify(self):
        self.assertEqual(x + x, 2 * x)
        self.assertEqual(x + x, Mul(IntConst(2), x))
        self.assertEqual(x - x, IntConst(0))
        self.assertEqual(x * 1, x)
        self.assertEqual(x * 0, IntConst(0))
        self.assertEqual(x * x, Pow(x, 2))
        self.assertEqual(x / x, IntConst(1))
        self.assertEqual(-(-x), x)
        self.assertEqual(IntConst(1) / 4, RationalConst(1, 4))
        self.assertEqual(Fraction(1, 3) + x - x, RationalConst(1, 3))
        self.assertEqual(x + y, y + x)
        self.assertEqual(x * y, y * x)
        self.assertEqual(hash(x * y), hash(y * x))

    def test_division_by_zero(self):
        with self.assertRaises(SymbolicZeroDivision):
            x / 0
        with self.assertRaises(SymbolicZeroDivision):
            IntConst(0) ** -1

    def test_float_constants_fold(self):
        self.assertEqual(FloatConst(0.5) * 2, FloatConst(1.0))
        self.assertEqual(RationalConst(1, 2) + 0.25, FloatConst(0.75))

    def test_to_text(self):
        self.assert_text(x * y / h ** 2, 'x*y/h**2')
        self.assert_text(x - y, 'x - y')
        self.assert_text(-x, '-x')
        self.assert_text(x / 2, 'x/2')
        self.assert_text(2 * x / 3, '2*x/3')
        self.assert_text((x + y) ** 2, '(x + y)**2')
        self.assert_text(q * (x + y), 'q*(x + y)')
        self.assert_text(x + 1, 'x + 1')
        self.assert_text(x - 1, 'x - 1')
        self.assert_text(FunctionApp('f', [x + h, y]), 'f(h + x, y)')
        self.assert_text(Indexed('u', [x - 1, y]), 'u[x - 1, y]')
        self.assertEqual(str(Eqn(x, y)), 'Eq(x, y)')

    def test_atoms_and_has(self):
        f = FunctionApp('f', [x + h, y])
        expr = q * f
        atoms = set(expr.atoms())
        self.assertIn(q, atoms)
        self.assertIn(f, atoms)
        self.assertIn(h, atoms)
        self.assertTrue(expr.has(q))
        self.assertTrue(expr.has(f))
        self.assertTrue(expr.has(h))
        self.assertFalse(expr.has(Symbol('z')))

    def test_subs(self):
        self.assertEqual((x + y).subs({x: 1}), y + 1)
        self.assertEqual((x * y).subs({'x': 2, 'y': 3}), IntConst(6))
        self.assertEqual(
            Eqn(x, y + q).subs({q: y}), Eqn(x, 2 * y)
        )

    def test_evaluate(self):
        self.assertEqual((x + 2 * y).evaluate({'x': 1., 'y': 2.}), 5.)
        self.assertEqual((x / 4).evaluate({x: 2}), 0.5)
        with self.assertRaises(EvaluationError):
            (x + y).evaluate({'x': 1})

    def test_eqn(self):
        eqn = Eqn(x, 1)
        self.assertEqual(eqn.rhs, IntConst(1))
        self.assertEqual(eqn, Eqn(x, IntConst(1)))
        self.assertNotEqual(eqn, Eqn(x, 2))
        self.assertEqual(len(set([eqn, Eqn(x, 1)])), 1)

    def test_symbols(self):
        self.assertEqual(symbols('a b'), (Symbol('a'), Symbol('b')))


def test_sort_order_is_canonical():
    # constants before symbols before accesses before applications
    expr = FunctionApp('f', [x]) + Indexed('u', [x]) + y + 2
    assert isinstance(expr, Add)
    assert expr.terms == (
        IntConst(2), y, Indexed('u', [x]), FunctionApp('f', [x])
    )
    assert str(expr) == 'y + u[x] + f(x) + 2'


def test_expression_is_immutable_value():
    a = x + y
    b = x + y
    assert a == b
    assert a is not b
    assert {a: 1}[b] == 1
    with pytest.raises(AttributeError):
        a.unknown
