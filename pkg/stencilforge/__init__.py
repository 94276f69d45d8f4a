from .algebra import (
    simplify, expand, substitute, solve_linear, count_ops, free_symbols,
    NotAffine, SingularCoefficient,
)
from .compiler import (
    CodegenConfig, GNUCompiler, ClangCompiler, IntelCompiler,
    CompilationError,
)
from .data import (
    GridFunction, TimeFunction, TableFunction, SparseFunction,
    create_dense, create_time, metadata_of,
)
from .datastructures import SymbolRegistry, DuplicateName, UnknownSymbol
from .expression import (
    Eqn, Symbol, IntConst, RationalConst, FloatConst, Indexed, FunctionApp,
    Add, Mul, Pow, symbols, t, x, y, z, h, s,
)
from .finite_difference import fd_weights, as_finite_diff, derivative
from .jit import ToolchainNotFound, CompileFailed, jit_compile
from .lowering import CustomIteration, EmptyIterationSpace
from .operator import Operator
from .optimizer import BlockingPlan, autotune, cse
from .sparse import SparsePointSet, build_inject, build_sample
from .types import ValidationError, Float32, Float64, Int32
from .version import __version__


__all__ = [
    'simplify', 'expand', 'substitute', 'solve_linear', 'count_ops',
    'free_symbols', 'NotAffine', 'SingularCoefficient',

    'CodegenConfig', 'GNUCompiler', 'ClangCompiler', 'IntelCompiler',
    'CompilationError',

    'GridFunction', 'TimeFunction', 'TableFunction', 'SparseFunction',
    'create_dense', 'create_time', 'metadata_of',

    'SymbolRegistry', 'DuplicateName', 'UnknownSymbol',

    'Eqn', 'Symbol', 'IntConst', 'RationalConst', 'FloatConst', 'Indexed',
    'FunctionApp', 'Add', 'Mul', 'Pow', 'symbols', 't', 'x', 'y', 'z', 'h',
    's',

    'fd_weights', 'as_finite_diff', 'derivative',

    'ToolchainNotFound', 'CompileFailed', 'jit_compile',

    'CustomIteration', 'EmptyIterationSpace',

    'Operator',

    'BlockingPlan', 'autotune', 'cse',

    'SparsePointSet', 'build_inject', 'build_sample',

    'ValidationError', 'Float32', 'Float64', 'Int32',

    '__version__',
]
