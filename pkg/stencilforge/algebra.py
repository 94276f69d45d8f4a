"""Canonical simplification, expansion, substitution and linear solving.

The canonical form produced by :func:`simplify`:

* sums and products are flat and their operands are sorted;
* exact constants are folded with rational arithmetic, inexact ones with
  floating point;
* like terms of a sum and like bases of a product are collected;
* a product holds at most one numeric factor, placed first.
"""
import logging
from fractions import Fraction

from .compiler import Compiled
from .expression import Add
from .expression import Constant
from .expression import Eqn
from .expression import FunctionApp
from .expression import Indexed
from .expression import IntConst
from .expression import Mul
from .expression import Pow
from .expression import Symbol
from .expression import SymbolicZeroDivision
from .expression import as_expr
from .expression import const
from .expression import term_key


log = logging.getLogger(__name__)


class NotAffine(ValueError):
    pass


class SingularCoefficient(ZeroDivisionError):
    pass


ZERO = IntConst(0)
ONE = IntConst(1)


def _is_const(expr, value=None):
    if not isinstance(expr, Constant):
        return False
    return value is None or expr.value == value


def _pow_constants(base, exp):
    """Folds ``base ** exp`` for constants, returns None if not exact."""
    b, e = base.value, exp.value
    if b == 0 and e < 0:
        raise SymbolicZeroDivision(
            'Zero raised to a negative power: 0**{}'.format(e)
        )
    if base.is_exact and exp.is_integer:
        return const(Fraction(b) ** int(e))
    if not base.is_exact or not exp.is_exact:
        if b < 0 and not exp.is_integer:
            return None
        return const(float(b) ** float(e))
    return None


def _pow(base, exp):
    if _is_const(exp, 0):
        return ONE
    if _is_const(exp, 1):
        return base
    if _is_const(base, 1):
        return ONE
    if isinstance(base, Constant) and isinstance(exp, Constant):
        folded = _pow_constants(base, exp)
        if folded is not None:
            return folded
        return Pow(base, exp)
    if _is_const(base, 0):
        if isinstance(exp, Constant) and exp.value > 0:
            return ZERO
    if isinstance(exp, Constant) and exp.is_integer:
        if isinstance(base, Pow):
            return _pow(base.base, _mul([base.exp, exp]))
        if isinstance(base, Mul):
            return _mul([_pow(f, exp) for f in base.factors])
    return Pow(base, exp)


def _mul(factors):
    flat = []
    for f in factors:
        if isinstance(f, Mul):
            flat.extend(f.factors)
        else:
            flat.append(f)

    coeff = Fraction(1)
    powers = {}
    order = []
    for f in flat:
        if isinstance(f, Constant):
            coeff = coeff * f.value
            continue
        if isinstance(f, Pow):
            base, exp = f.base, f.exp
        else:
            base, exp = f, ONE
        if base not in powers:
            powers[base] = []
            order.append(base)
        powers[base].append(exp)

    if coeff == 0:
        return ZERO

    rest = []
    for base in order:
        exps = powers[base]
        exp = exps[0] if len(exps) == 1 else _add(exps)
        res = _pow(base, exp)
        if isinstance(res, Constant):
            coeff = coeff * res.value
        elif isinstance(res, Mul):
            for f in res.factors:
                if isinstance(f, Constant):
                    coeff = coeff * f.value
                else:
                    rest.append(f)
        else:
            rest.append(res)

    if coeff == 0:
        return ZERO
    rest.sort(key=lambda e: e.sort_key)
    if not rest:
        return const(coeff)
    if coeff == 1:
        if len(rest) == 1:
            return rest[0]
        return Mul(*rest)
    return Mul(const(coeff), *rest)


def _scaled(coeff, rest):
    if coeff == 1:
        return rest
    if isinstance(rest, Mul):
        return Mul(const(coeff), *rest.factors)
    return Mul(const(coeff), rest)


def _add(terms):
    flat = []
    stack = list(reversed(terms))
    while stack:
        term = stack.pop()
        if isinstance(term, Add):
            stack.extend(reversed(term.terms))
        elif (
                isinstance(term, Mul) and
                len(term.factors) == 2 and
                isinstance(term.factors[0], Constant) and
                isinstance(term.factors[1], Add)
        ):
            # numeric multiples of sums are distributed inside a sum only
            c = term.factors[0]
            stack.extend(
                reversed([_mul([c, t]) for t in term.factors[1].terms])
            )
        else:
            flat.append(term)

    constant = Fraction(0)
    has_constant = False
    coeffs = {}
    order = []
    for term in flat:
        if isinstance(term, Constant):
            constant = constant + term.value
            has_constant = True
            continue
        c, rest = term.as_coeff_mul()
        if rest not in coeffs:
            coeffs[rest] = c
            order.append(rest)
        else:
            coeffs[rest] = coeffs[rest] + c

    res = []
    for rest in order:
        c = coeffs[rest]
        if c == 0:
            continue
        res.append(_scaled(c, rest))
    if has_constant and constant != 0:
        res.append(const(constant))

    if not res:
        return ZERO
    if len(res) == 1:
        return res[0]
    res.sort(key=term_key)
    return Add(*res)


class Simplified(Compiled):
    def visit_int_const(self, expr):
        return expr

    def visit_rational_const(self, expr):
        return const(expr.value)

    def visit_float_const(self, expr):
        return expr

    def visit_symbol(self, expr):
        return expr

    def visit_function_app(self, expr):
        return FunctionApp(expr.name, [self.visit(a) for a in expr.args])

    def visit_indexed(self, expr):
        return Indexed(expr.base, [self.visit(i) for i in expr.indices])

    def visit_add(self, expr):
        return _add([self.visit(t) for t in expr.terms])

    def visit_mul(self, expr):
        return _mul([self.visit(f) for f in expr.factors])

    def visit_pow(self, expr):
        return _pow(self.visit(expr.base), self.visit(expr.exp))

    def visit_eqn(self, eqn):
        return Eqn(self.visit(eqn.lhs), self.visit(eqn.rhs))


def simplify(expr):
    """Returns the canonical form of an expression.

    >>> from .expression import symbols
    >>> x, y = symbols('x y')
    >>> print(simplify(Add(x, Mul(2, y), x)))
    2*x + 2*y
    """
    if not isinstance(expr, Eqn):
        expr = as_expr(expr)
    return Simplified(expr).result


class Expanded(Simplified):
    def visit_mul(self, expr):
        factors = [self.visit(f) for f in expr.factors]
        products = [[]]
        for f in factors:
            if isinstance(f, Add):
                products = [p + [t] for p in products for t in f.terms]
            else:
                products = [p + [f] for p in products]
        return _add([_mul(p) for p in products])

    def visit_pow(self, expr):
        base = self.visit(expr.base)
        exp = self.visit(expr.exp)
        if (
                isinstance(base, Add) and
                isinstance(exp, Constant) and
                exp.is_integer and
                exp.value > 1
        ):
            return self.visit_mul(Mul(*([base] * int(exp.value))))
        return _pow(base, exp)


def expand(expr):
    """Distributes products over sums, then simplifies.

    Sums raised to a negative power are kept as they are.
    """
    return Expanded(as_expr(expr)).result


class Substituted(Compiled):
    def __init__(self, expression, mapping):
        if isinstance(mapping, dict):
            mapping = mapping.items()
        self.mapping = {
            _as_key(k): as_expr(v) for k, v in mapping
        }
        super(Substituted, self).__init__(expression)

    def visit(self, expr, **kwargs):
        if expr in self.mapping:
            return self.mapping[expr]
        return super(Substituted, self).visit(expr, **kwargs)

    def _leaf(self, expr):
        return expr

    visit_int_const = _leaf
    visit_rational_const = _leaf
    visit_float_const = _leaf
    visit_symbol = _leaf

    def visit_function_app(self, expr):
        return FunctionApp(expr.name, [self.visit(a) for a in expr.args])

    def visit_indexed(self, expr):
        return Indexed(expr.base, [self.visit(i) for i in expr.indices])

    def visit_add(self, expr):
        return Add(*[self.visit(t) for t in expr.terms])

    def visit_mul(self, expr):
        return Mul(*[self.visit(f) for f in expr.factors])

    def visit_pow(self, expr):
        return Pow(self.visit(expr.base), self.visit(expr.exp))

    def visit_eqn(self, eqn):
        return Eqn(self.visit(eqn.lhs), self.visit(eqn.rhs))


def _as_key(key):
    if isinstance(key, str):
        return Symbol(key)
    return as_expr(key)


def substitute(expr, mapping):
    """Replaces sub-expressions structurally equal to the mapping keys.

    Keys may be symbols, names of symbols or whole sub-expressions. The
    result is simplified.
    """
    return simplify(Substituted(expr, mapping).result)


def contains(expr, target):
    return as_expr(expr).has(target)


def count_ops(expr):
    """Counts arithmetic operations.

    A sum or product of n operands counts n - 1, a power counts one.
    Arguments of function applications and array indices are not
    counted: they address memory and are not evaluated per point.
    """
    if isinstance(expr, Eqn):
        return count_ops(expr.lhs) + count_ops(expr.rhs)
    if isinstance(expr, (Add, Mul)):
        return len(expr.args) - 1 + sum(count_ops(a) for a in expr.args)
    if isinstance(expr, Pow):
        return 1 + count_ops(expr.base) + count_ops(expr.exp)
    return 0


def free_symbols(expr, include_indices=False):
    """Returns scalar symbols the value of an expression depends on.

    Symbols used only inside function arguments or array indices are
    skipped unless ``include_indices`` is set.
    """
    res = set()

    def walk(e):
        if isinstance(e, Symbol):
            res.add(e)
        elif isinstance(e, (FunctionApp, Indexed)):
            if include_indices:
                for a in e.args:
                    walk(a)
        else:
            for a in e.args:
                walk(a)

    if isinstance(expr, Eqn):
        walk(expr.lhs)
        walk(expr.rhs)
    else:
        walk(as_expr(expr))
    return res


def functions_of(expr, cls=(FunctionApp, Indexed)):
    """Collects function applications or accesses, outermost first."""
    res = []
    seen = set()

    def walk(e):
        if isinstance(e, cls):
            if e not in seen:
                seen.add(e)
                res.append(e)
        for a in e.args:
            walk(a)

    if isinstance(expr, Eqn):
        walk(expr.lhs)
        walk(expr.rhs)
    else:
        walk(as_expr(expr))
    return res


def collect_affine(expr, target):
    """Splits ``expr`` into ``(A, B)`` with ``expr == A*target + B``."""
    if expr == target:
        return ONE, ZERO
    if not expr.has(target):
        return ZERO, expr
    if isinstance(expr, Add):
        parts = [collect_affine(t, target) for t in expr.terms]
        return (
            _add([p[0] for p in parts]),
            _add([p[1] for p in parts]),
        )
    if isinstance(expr, Mul):
        dependent = [f for f in expr.factors if f.has(target)]
        if len(dependent) > 1:
            raise NotAffine(
                'Product of several terms depending on {}'.format(target)
            )
        rest = _mul([f for f in expr.factors if not f.has(target)])
        a, b = collect_affine(dependent[0], target)
        return _mul([rest, a]), _mul([rest, b])
    raise NotAffine('{} is not affine in {}'.format(expr, target))


def negate(expr):
    if isinstance(expr, Add):
        return _add([_mul([IntConst(-1), t]) for t in expr.terms])
    return _mul([IntConst(-1), expr])


def solve_linear(eqn, target):
    """Solves an equation affine in ``target`` for ``target``.

    :raises NotAffine: when the target appears non-linearly
    :raises SingularCoefficient: when the target coefficient is zero
    """
    target = as_expr(target)
    residual = simplify(Add(eqn.lhs, Mul(IntConst(-1), eqn.rhs)))
    a, b = collect_affine(residual, target)
    a = simplify(a)
    if _is_const(a, 0):
        raise SingularCoefficient(
            'Coefficient of {} is zero'.format(target)
        )
    res = simplify(_mul([negate(simplify(b)), _pow(a, IntConst(-1))]))
    log.debug('Solved for %s: %s', target, res)
    return res
