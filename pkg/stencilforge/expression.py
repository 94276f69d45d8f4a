"""Symbolic expression trees.

Nodes built with their raw constructors are kept exactly as given.
Arithmetic operators always return simplified trees::

    >>> x, h = Symbol('x'), Symbol('h')
    >>> print(x + h - x)
    h
"""
from fractions import Fraction
import numbers

import numpy as np

from .util import cached_property


class SymbolicZeroDivision(ZeroDivisionError):
    pass


class ExpressionOperators(object):
    """Arithmetic on anything convertible with :func:`as_expr`."""

    def _simplify(self, expr):
        from .algebra import simplify

        return simplify(expr)

    def __neg__(self):
        return self._simplify(Mul(IntConst(-1), as_expr(self)))

    def __pos__(self):
        return as_expr(self)

    def __add__(self, other):
        return self._simplify(Add(as_expr(self), as_expr(other)))

    def __radd__(self, other):
        return self._simplify(Add(as_expr(other), as_expr(self)))

    def __sub__(self, other):
        return self._simplify(
            Add(as_expr(self), Mul(IntConst(-1), as_expr(other)))
        )

    def __rsub__(self, other):
        return self._simplify(
            Add(as_expr(other), Mul(IntConst(-1), as_expr(self)))
        )

    def __mul__(self, other):
        return self._simplify(Mul(as_expr(self), as_expr(other)))

    def __rmul__(self, other):
        return self._simplify(Mul(as_expr(other), as_expr(self)))

    def __truediv__(self, other):
        return self._simplify(
            Mul(as_expr(self), Pow(as_expr(other), IntConst(-1)))
        )

    def __rtruediv__(self, other):
        return self._simplify(
            Mul(as_expr(other), Pow(as_expr(self), IntConst(-1)))
        )

    __div__ = __truediv__
    __rdiv__ = __rtruediv__

    def __pow__(self, other):
        return self._simplify(Pow(as_expr(self), as_expr(other)))

    def __rpow__(self, other):
        return self._simplify(Pow(as_expr(other), as_expr(self)))


class Expr(ExpressionOperators):
    __visit_name__ = None
    _rank = None

    @property
    def args(self):
        return ()

    def _hashable_content(self):
        return self.args

    def _sort_key(self):
        return (
            self._rank, '', tuple(a.sort_key for a in self.args)
        )

    @cached_property
    def sort_key(self):
        return self._sort_key()

    @cached_property
    def _hash(self):
        return hash((self.__class__.__name__, self._hashable_content()))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other):
            return False
        return self._hashable_content() == other._hashable_content()

    def __ne__(self, other):
        return not self == other

    def as_coeff_mul(self):
        """Splits off a leading numeric coefficient."""
        return Fraction(1), self

    def atoms(self):
        yield self
        for arg in self.args:
            for a in arg.atoms():
                yield a

    def has(self, target):
        if self == target:
            return True
        return any(a.has(target) for a in self.args)

    def subs(self, mapping):
        from .algebra import substitute

        return substitute(self, mapping)

    def simplify(self):
        from .algebra import simplify

        return simplify(self)

    def expand(self):
        from .algebra import expand

        return expand(self)

    def evaluate(self, env=None, **kwargs):
        from .compiler import EvaluateCompiled

        return EvaluateCompiled(self, env=env, **kwargs).result

    def to_text(self):
        from .compiler import InfixCompiled

        return InfixCompiled(self).result

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return '{}({})'.format(
            self.__class__.__name__, ', '.join(repr(a) for a in self.args)
        )


class Constant(Expr):
    _rank = 0
    is_exact = True

    def _hashable_content(self):
        return (self.value,)

    def _sort_key(self):
        return (self._rank, '', (), self.value)

    def as_coeff_mul(self):
        return self.value, IntConst(1)

    @property
    def is_zero(self):
        return self.value == 0

    @property
    def is_one(self):
        return self.value == 1

    @property
    def is_negative(self):
        return self.value < 0

    @property
    def is_integer(self):
        return self.is_exact and Fraction(self.value).denominator == 1

    def __repr__(self):
        return '{}({!r})'.format(self.__class__.__name__, self.value)


class IntConst(Constant):
    __visit_name__ = 'int_const'

    def __init__(self, value):
        self.value = int(value)


class RationalConst(Constant):
    """Exact rational, always stored in lowest terms."""
    __visit_name__ = 'rational_const'

    def __init__(self, numerator, denominator=1):
        if denominator == 0:
            raise SymbolicZeroDivision(
                'Rational with zero denominator: {}/0'.format(numerator)
            )
        self.value = Fraction(numerator, denominator)

    @property
    def numerator(self):
        return self.value.numerator

    @property
    def denominator(self):
        return self.value.denominator

    def __repr__(self):
        return 'RationalConst({}, {})'.format(
            self.numerator, self.denominator
        )


class FloatConst(Constant):
    __visit_name__ = 'float_const'
    is_exact = False

    def __init__(self, value):
        self.value = float(value)


class Symbol(Expr):
    __visit_name__ = 'symbol'
    _rank = 1

    def __init__(self, name):
        self.name = name

    def _hashable_content(self):
        return (self.name,)

    def _sort_key(self):
        return (self._rank, self.name, ())

    def __repr__(self):
        return 'Symbol({!r})'.format(self.name)


class Indexed(Expr):
    """Array access ``base[i0, i1, ...]`` with integer-valued indices."""
    __visit_name__ = 'indexed'
    _rank = 2

    def __init__(self, base, indices):
        self.base = base
        self.indices = tuple(as_expr(i) for i in indices)

    @property
    def name(self):
        return self.base

    @property
    def args(self):
        return self.indices

    def _hashable_content(self):
        return (self.base, self.indices)

    def _sort_key(self):
        return (
            self._rank, self.base, tuple(i.sort_key for i in self.indices)
        )

    def with_indices(self, indices):
        return Indexed(self.base, indices)

    def __repr__(self):
        return 'Indexed({!r}, {!r})'.format(self.base, list(self.indices))


class FunctionApp(Expr):
    """Application of a named function ``f(x + h, y)``."""
    __visit_name__ = 'function_app'
    _rank = 3

    def __init__(self, name, args):
        self.name = name
        self._args = tuple(as_expr(a) for a in args)

    @property
    def args(self):
        return self._args

    def _hashable_content(self):
        return (self.name, self._args)

    def _sort_key(self):
        return (self._rank, self.name, tuple(a.sort_key for a in self._args))

    def with_args(self, args):
        return FunctionApp(self.name, args)

    def __repr__(self):
        return 'FunctionApp({!r}, {!r})'.format(self.name, list(self._args))


class Pow(Expr):
    __visit_name__ = 'pow'
    _rank = 4

    def __init__(self, base, exp):
        self.base = as_expr(base)
        self.exp = as_expr(exp)

    @property
    def args(self):
        return (self.base, self.exp)


class Mul(Expr):
    __visit_name__ = 'mul'
    _rank = 5

    def __init__(self, *factors):
        self.factors = tuple(as_expr(f) for f in factors)

    @property
    def args(self):
        return self.factors

    def as_coeff_mul(self):
        if self.factors and isinstance(self.factors[0], Constant):
            rest = self.factors[1:]
            if len(rest) == 1:
                return self.factors[0].value, rest[0]
            return self.factors[0].value, Mul(*rest)
        return Fraction(1), self


class Add(Expr):
    __visit_name__ = 'add'
    _rank = 6

    def __init__(self, *terms):
        self.terms = tuple(as_expr(t) for t in terms)

    @property
    def args(self):
        return self.terms

    def _sort_key(self):
        return (self._rank, '', tuple(term_key(t) for t in self.terms))


def term_key(term):
    """Orders summands by their non-numeric part, then by coefficient."""
    coeff, rest = term.as_coeff_mul()
    return (rest.sort_key, coeff)


class Eqn(object):
    """Equation ``lhs = rhs``.

    Python's ``==`` stays structural equality, so equations are built
    explicitly.
    """
    __visit_name__ = 'eqn'

    def __init__(self, lhs, rhs=0):
        self.lhs = as_expr(lhs)
        self.rhs = as_expr(rhs)

    def subs(self, mapping):
        return Eqn(self.lhs.subs(mapping), self.rhs.subs(mapping))

    def __eq__(self, other):
        return (
            isinstance(other, Eqn) and
            self.lhs == other.lhs and
            self.rhs == other.rhs
        )

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.lhs, self.rhs))

    def to_text(self):
        return 'Eq({}, {})'.format(self.lhs.to_text(), self.rhs.to_text())

    __str__ = to_text

    def __repr__(self):
        return 'Eqn({!r}, {!r})'.format(self.lhs, self.rhs)


def const(value):
    if isinstance(value, Constant):
        return value
    if isinstance(value, (bool, np.bool_)):
        raise TypeError('Boolean is not a number: {!r}'.format(value))
    if isinstance(value, numbers.Integral):
        return IntConst(int(value))
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return IntConst(value.numerator)
        return RationalConst(value.numerator, value.denominator)
    if isinstance(value, numbers.Real):
        return FloatConst(float(value))
    raise TypeError('Not a numeric constant: {!r}'.format(value))


def as_expr(obj):
    if isinstance(obj, Expr):
        return obj
    if hasattr(obj, '_as_expr'):
        return obj._as_expr()
    return const(obj)


def symbols(names):
    """Creates symbols from a whitespace separated string.

    >>> symbols('x y')
    (Symbol('x'), Symbol('y'))
    """
    return tuple(Symbol(n) for n in names.split())


t, x, y, z = symbols('t x y z')
h, s = symbols('h s')

SPACE_DIMENSIONS = (x, y, z)
TIME_DIMENSION = t
GRID_SPACING = h
TIME_SPACING = s
