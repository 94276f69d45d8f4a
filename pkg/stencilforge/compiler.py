import copy
import logging
import os
import shutil
from fractions import Fraction

from .expression import Add
from .expression import Constant
from .expression import FunctionApp
from .expression import Mul
from .expression import Pow
from .expression import RationalConst
from .expression import const
from .types import Float32
from .types import get_type
from .util import clean_params


log = logging.getLogger(__name__)


PREC_ADD = 10
PREC_MUL = 20
PREC_POW = 30
PREC_ATOM = 40

BUILTIN_FUNCTIONS = frozenset(['min', 'max', 'mod', 'sqrt'])


class CompilationError(Exception):
    pass


class UnloweredConstruct(CompilationError):
    pass


class EvaluationError(LookupError):
    pass


class Compiled(object):
    def __init__(self, expression, **kwargs):
        self.expression = expression
        self.result = self.visit(self.expression)

    def visit(self, expr, **kwargs):
        visit_name = None
        if hasattr(expr, '__visit_name__'):
            visit_name = expr.__visit_name__

        if visit_name:
            visit_func = getattr(self, 'visit_{}'.format(visit_name))
            return visit_func(expr, **kwargs)

        if isinstance(expr, dict):
            return self.visit_dict(expr)

        if isinstance(expr, (list, tuple)):
            return self.visit_list(expr)

        return expr

    def visit_dict(self, dct):
        return {self.visit(k): self.visit(v) for k, v in dct.items()}

    def visit_list(self, lst):
        return [self.visit(v) for v in lst]


def split_mul(expr):
    """Returns ``(coeff, numerator, denominator)`` of a product.

    Factors raised to a negative constant power go to the denominator
    with the sign of the exponent flipped.
    """
    if isinstance(expr, Mul):
        factors = list(expr.factors)
    else:
        factors = [expr]
    coeff = Fraction(1)
    if factors and isinstance(factors[0], Constant):
        coeff = factors.pop(0).value
    num, den = [], []
    for f in factors:
        if (
                isinstance(f, Pow) and
                isinstance(f.exp, Constant) and
                f.exp.is_negative
        ):
            exp = const(-f.exp.value)
            den.append(f.base if exp.is_one else Pow(f.base, exp))
        else:
            num.append(f)
    return coeff, num, den


def is_negative_term(term):
    if isinstance(term, Constant):
        return term.is_negative
    if isinstance(term, Mul) and term.factors:
        first = term.factors[0]
        return isinstance(first, Constant) and first.is_negative
    return False


def negate_term(term):
    if isinstance(term, Constant):
        return const(-term.value)
    coeff = -term.factors[0].value
    rest = term.factors[1:]
    if coeff == 1:
        return rest[0] if len(rest) == 1 else Mul(*rest)
    return Mul(const(coeff), *rest)


def printing_order(terms):
    """Moves the constant part of a sum to the end."""
    consts = [t for t in terms if isinstance(t, Constant)]
    return [t for t in terms if not isinstance(t, Constant)] + consts


class InfixCompiled(Compiled):
    """Human readable infix notation close to common CAS output."""

    def precedence(self, expr):
        if isinstance(expr, Add):
            return PREC_ADD
        if isinstance(expr, Mul):
            return PREC_MUL
        if isinstance(expr, Pow):
            if isinstance(expr.exp, Constant) and expr.exp.is_negative:
                return PREC_MUL
            return PREC_POW
        if isinstance(expr, Constant):
            if expr.is_negative:
                return PREC_ADD
            if isinstance(expr, RationalConst):
                return PREC_MUL
        return PREC_ATOM

    def parenthesize(self, expr, prec):
        res = self.visit(expr)
        if self.precedence(expr) < prec:
            return '({})'.format(res)
        return res

    def visit_int_const(self, expr):
        return str(expr.value)

    def visit_rational_const(self, expr):
        return '{}/{}'.format(expr.numerator, expr.denominator)

    def visit_float_const(self, expr):
        return repr(expr.value)

    def visit_symbol(self, expr):
        return expr.name

    def visit_function_app(self, expr):
        return '{}({})'.format(
            expr.name, ', '.join(self.visit(a) for a in expr.args)
        )

    def visit_indexed(self, expr):
        return '{}[{}]'.format(
            expr.base, ', '.join(self.visit(i) for i in expr.indices)
        )

    def visit_add(self, expr):
        terms = printing_order(expr.terms)
        if not terms:
            return '0'
        res = [self.visit(terms[0])]
        for term in terms[1:]:
            if is_negative_term(term):
                res.append(' - ')
                res.append(self.parenthesize(negate_term(term), PREC_ADD))
            else:
                res.append(' + ')
                res.append(self.visit(term))
        return ''.join(res)

    def visit_mul(self, expr):
        coeff, num, den = split_mul(expr)
        sign = ''
        if coeff < 0:
            sign = '-'
            coeff = -coeff
        num_parts, den_parts = [], []
        if isinstance(coeff, float):
            if coeff != 1:
                num_parts.append(repr(coeff))
        else:
            coeff = Fraction(coeff)
            if coeff.numerator != 1:
                num_parts.append(str(coeff.numerator))
            if coeff.denominator != 1:
                den_parts.append(str(coeff.denominator))
        num_parts.extend(self.parenthesize(f, PREC_MUL) for f in num)
        den_parts.extend(self.parenthesize(f, PREC_MUL) for f in den)
        res = '*'.join(num_parts) or '1'
        if den_parts:
            if len(den_parts) == 1:
                res = '{}/{}'.format(res, den_parts[0])
            else:
                res = '{}/({})'.format(res, '*'.join(den_parts))
        return sign + res

    def visit_pow(self, expr):
        if isinstance(expr.exp, Constant) and expr.exp.is_negative:
            return self.visit_mul(Mul(expr))
        return '{}**{}'.format(
            self.parenthesize(expr.base, PREC_POW + 1),
            self.parenthesize(expr.exp, PREC_POW + 1),
        )

    def visit_eqn(self, eqn):
        return 'Eq({}, {})'.format(self.visit(eqn.lhs), self.visit(eqn.rhs))


class EvaluateCompiled(Compiled):
    """Numeric evaluation of an expression tree.

    ``env`` maps symbols (by object or by name) and whole function
    applications or accesses onto values, ``functions`` maps function
    names onto callables and ``arrays`` maps array names onto numpy
    arrays used for :class:`Indexed` accesses. Values may be numpy arrays
    so a whole grid can be evaluated at once.
    """

    def __init__(self, expression, env=None, functions=None, arrays=None,
                 exact=False):
        self.env = env or {}
        self.functions = functions or {}
        self.arrays = arrays or {}
        self.exact = exact
        super(EvaluateCompiled, self).__init__(expression)

    def _lookup(self, expr, name):
        if expr in self.env:
            return self.env[expr]
        if name in self.env:
            return self.env[name]
        raise EvaluationError('No value for {!r}'.format(name))

    def _constant(self, expr):
        if self.exact:
            return expr.value
        return float(expr.value)

    visit_int_const = _constant
    visit_rational_const = _constant
    visit_float_const = _constant

    def visit_symbol(self, expr):
        return self._lookup(expr, expr.name)

    def visit_function_app(self, expr):
        if expr in self.env:
            return self.env[expr]
        args = [self.visit(a) for a in expr.args]
        if expr.name in self.functions:
            return self.functions[expr.name](*args)
        if expr.name == 'min':
            return min(args)
        if expr.name == 'max':
            return max(args)
        if expr.name == 'mod':
            return args[0] % args[1]
        if expr.name == 'sqrt':
            return args[0] ** 0.5
        raise EvaluationError('No value for function {!r}'.format(expr.name))

    def visit_indexed(self, expr):
        if expr in self.env:
            return self.env[expr]
        if expr.base not in self.arrays:
            raise EvaluationError('No array {!r}'.format(expr.base))
        index = tuple(int(self.visit(i)) for i in expr.indices)
        return self.arrays[expr.base][index]

    def visit_add(self, expr):
        res = 0
        for t in expr.terms:
            res = res + self.visit(t)
        return res

    def visit_mul(self, expr):
        res = 1
        for f in expr.factors:
            res = res * self.visit(f)
        return res

    def visit_pow(self, expr):
        return self.visit(expr.base) ** self.visit(expr.exp)


class CExpressionCompiled(Compiled):
    """Prints an indexified expression as a C99 expression.

    Values are printed in the kernel element type. Array indices are
    printed as plain integer arithmetic.
    """

    def __init__(self, expression, element_type=Float32, names=None):
        self.element_type = get_type(element_type)
        self.names = names or {}
        super(CExpressionCompiled, self).__init__(expression)

    def parenthesize(self, expr, index=False):
        res = self.visit(expr, index=index)
        if isinstance(expr, Add) or (
                isinstance(expr, Constant) and expr.is_negative
        ):
            return '({})'.format(res)
        return res

    def _constant(self, expr, index=False):
        if index:
            if not expr.is_integer:
                raise CompilationError(
                    'Non-integer array index: {!r}'.format(expr)
                )
            return str(int(expr.value))
        return self.element_type.format_literal(expr.value)

    visit_int_const = _constant
    visit_rational_const = _constant
    visit_float_const = _constant

    def visit_symbol(self, expr, index=False):
        return self.names.get(expr.name, expr.name)

    def visit_indexed(self, expr, index=False):
        return '{}{}'.format(
            self.names.get(expr.base, expr.base),
            ''.join(
                '[{}]'.format(self.visit(i, index=True))
                for i in expr.indices
            )
        )

    def visit_function_app(self, expr, index=False):
        args = [self.visit(a, index=index) for a in expr.args]
        if expr.name == 'min':
            return 'MIN({}, {})'.format(*args)
        if expr.name == 'max':
            return 'MAX({}, {})'.format(*args)
        if expr.name == 'mod':
            return '({})%({})'.format(*args)
        if expr.name == 'sqrt':
            return '{}({})'.format(self._math_function('sqrt'), args[0])
        raise UnloweredConstruct(
            'Function application left in kernel: {}'.format(expr)
        )

    def _math_function(self, name):
        if self.element_type.ctype == 'float':
            return name + 'f'
        return name

    def visit_add(self, expr, index=False):
        terms = printing_order(expr.terms)
        sep = '{}' if index else ' {} '
        res = [self.visit(terms[0], index=index)]
        for term in terms[1:]:
            if is_negative_term(term):
                res.append(sep.format('-'))
                term = negate_term(term)
                if isinstance(term, Add):
                    res.append(self.parenthesize(term, index=index))
                else:
                    res.append(self.visit(term, index=index))
            else:
                res.append(sep.format('+'))
                res.append(self.visit(term, index=index))
        return ''.join(res)

    def visit_mul(self, expr, index=False):
        if index:
            return '*'.join(
                self.parenthesize(f, index=True) for f in expr.factors
            )
        coeff, num, den = split_mul(expr)
        sign = ''
        if coeff < 0:
            sign = '-'
            coeff = -coeff
        num_parts = []
        if coeff != 1:
            num_parts.append(self.element_type.format_literal(coeff))
        num_parts.extend(self.parenthesize(f) for f in num)
        den_parts = [self.parenthesize(f) for f in den]
        res = '*'.join(num_parts) or self.element_type.format_literal(1)
        if den_parts:
            if len(den_parts) == 1:
                res = '{}/{}'.format(res, den_parts[0])
            else:
                res = '{}/({})'.format(res, '*'.join(den_parts))
        return sign + res

    def visit_pow(self, expr, index=False):
        exp = expr.exp
        if isinstance(exp, Constant) and exp.is_negative:
            return self.visit_mul(Mul(expr))
        base = self.parenthesize(expr.base, index=index)
        if isinstance(exp, Constant) and exp.is_integer and exp.value <= 4:
            return '({})'.format('*'.join([base] * int(exp.value)))
        if isinstance(exp, Constant) and exp.value == Fraction(1, 2):
            return '{}({})'.format(self._math_function('sqrt'), base)
        return '{}({}, {})'.format(
            self._math_function('pow'), base, self.visit(exp)
        )


class Compiler(object):
    """C toolchain preset.

    Every preset asks for optimized position independent code with
    contraction of floating point expressions disabled so results do not
    depend on loop blocking.
    """
    name = None
    cc = None
    flags = ()
    openmp_flags = ()
    libraries = ('-lm',)

    def __init__(self, cc=None, flags=None, openmp=True):
        self.cc = cc or self.cc
        if flags is not None:
            self.flags = tuple(flags)
        self.openmp = openmp

    def resolve(self):
        if os.path.sep in self.cc:
            if os.path.isfile(self.cc) and os.access(self.cc, os.X_OK):
                return self.cc
            return None
        return shutil.which(self.cc)

    def get_command(self, src_path, out_path):
        cmd = [self.cc]
        cmd.extend(self.flags)
        if self.openmp:
            cmd.extend(self.openmp_flags)
        cmd.extend(['-o', out_path, src_path])
        cmd.extend(self.libraries)
        return cmd

    def signature(self):
        return ' '.join(
            [self.cc] + list(self.flags) +
            list(self.openmp_flags if self.openmp else [])
        )

    def __repr__(self):
        return '<{} {}>'.format(self.__class__.__name__, self.cc)


class GNUCompiler(Compiler):
    name = 'gcc'
    cc = 'gcc'
    flags = (
        '-O3', '-march=native', '-fPIC', '-shared', '-std=c99',
        '-ffp-contract=off',
    )
    openmp_flags = ('-fopenmp',)


class ClangCompiler(GNUCompiler):
    name = 'clang'
    cc = 'clang'


class IntelCompiler(Compiler):
    name = 'vendor'
    cc = 'icc'
    flags = (
        '-O3', '-xHost', '-fPIC', '-shared', '-std=c99', '-fp-model=precise',
    )
    openmp_flags = ('-qopenmp',)


DefaultCompiler = GNUCompiler

COMPILER_PRESETS = {
    'gcc': GNUCompiler,
    'clang': ClangCompiler,
    'vendor': IntelCompiler,
    'icc': IntelCompiler,
}


def get_compiler_by_name(name, **kwargs):
    """Returns a toolchain preset by name.

    Anything that is not a known preset is taken as a path or a command
    name of a GCC compatible compiler.
    """
    if not name:
        return DefaultCompiler(**kwargs)
    if name in COMPILER_PRESETS:
        return COMPILER_PRESETS[name](**kwargs)
    basename = os.path.basename(name)
    for preset_cls in (ClangCompiler, IntelCompiler):
        if basename.startswith(preset_cls.cc):
            return preset_cls(cc=name, **kwargs)
    return GNUCompiler(cc=name, **kwargs)


class CodegenConfig(object):
    """Settings of kernel generation and compilation.

    :param compiler: toolchain preset name, path or :class:`Compiler`
    :param openmp: emit parallel annotations and link OpenMP
    :param alignment: byte alignment assumed for all buffers
    :param dump_path: directory the generated sources are copied into
    :param cache_dir: directory for compiled kernels, per process
        temporary directory by default
    """

    ENV_PREFIX = 'STENCILFORGE_'

    def __init__(self, compiler=None, openmp=True, alignment=64,
                 dump_path=None, cache_dir=None, flags=None):
        if isinstance(compiler, Compiler):
            compiler = copy.copy(compiler)
        else:
            compiler = get_compiler_by_name(
                compiler, **clean_params({}, flags=flags)
            )
        compiler.openmp = openmp
        self.compiler = compiler
        self.openmp = openmp
        self.alignment = alignment
        self.dump_path = dump_path
        self.cache_dir = cache_dir

    @classmethod
    def from_environ(cls, environ=None, **kwargs):
        environ = os.environ if environ is None else environ
        prefix = cls.ENV_PREFIX
        flags = environ.get(prefix + 'CFLAGS')
        params = clean_params(
            {},
            compiler=environ.get(prefix + 'CC') or None,
            flags=flags.split() if flags else None,
            dump_path=environ.get(prefix + 'DUMP') or None,
            cache_dir=environ.get(prefix + 'CACHE_DIR') or None,
        )
        if environ.get(prefix + 'OPENMP', '').lower() in ('0', 'no', 'off'):
            params['openmp'] = False
        params.update(kwargs)
        log.debug('Codegen config from environment: %s', params)
        return cls(**params)

    def clone(self, **kwargs):
        params = dict(
            compiler=self.compiler,
            openmp=self.openmp,
            alignment=self.alignment,
            dump_path=self.dump_path,
            cache_dir=self.cache_dir,
        )
        params.update(kwargs)
        return self.__class__(**params)

    def __repr__(self):
        return '<CodegenConfig {!r} openmp={}>'.format(
            self.compiler, self.openmp
        )


def is_builtin_call(expr):
    return isinstance(expr, FunctionApp) and expr.name in BUILTIN_FUNCTIONS
