"""C99 source generation for lowered loop nests."""
import logging

from .algebra import simplify
from .compiler import CExpressionCompiled
from .compiler import Compiled
from .compiler import CodegenConfig
from .expression import Add
from .expression import IntConst
from .expression import Symbol
from .nodes import ExpressionNode
from .nodes import Iteration
from .types import Float32


log = logging.getLogger(__name__)


HEADER = '''\
#define _POSIX_C_SOURCE 200809L
#include "math.h"
#include "stdlib.h"
#ifdef _OPENMP
#include "omp.h"
#endif

#define MIN(a, b) (((a) < (b)) ? (a) : (b))
#define MAX(a, b) (((a) > (b)) ? (a) : (b))
'''

SET_THREADS = '''\
int {name}_set_threads(int nthreads)
{{
#ifdef _OPENMP
  omp_set_num_threads(nthreads);
  return nthreads;
#else
  return 1;
#endif
}}
'''


def counter_names(nest):
    """C loop counters: spatial dimensions first, the time loop last."""
    names = {}
    space = nest.space_dimensions
    for i, dim in enumerate(space):
        counter = 'i{}'.format(i + 1)
        names[dim.name] = counter
        names[dim.block_symbol.name] = counter + 'b'
    time_dim = nest.time_dimension
    if time_dim is not None:
        names[time_dim.name] = 'i{}'.format(len(space) + 1)
    return names


def kernel_element_type(nest):
    for function in nest.functions():
        if function.element_type.is_float:
            return function.element_type
    return Float32()


class KernelArgument(object):
    def __init__(self, function):
        self.function = function

    @property
    def name(self):
        return self.function.name

    @property
    def c_name(self):
        return '{}_vec'.format(self.function.name)

    @property
    def dtype(self):
        return self.function.dtype

    @property
    def shape(self):
        return self.function.shape

    def declaration(self):
        return '{} *restrict {}'.format(
            self.function.element_type.ctype, self.c_name
        )

    def cast(self):
        ctype = self.function.element_type.ctype
        if len(self.shape) == 1:
            return '{} *restrict {} = {};'.format(
                ctype, self.name, self.c_name
            )
        extents = ''.join('[{}]'.format(n) for n in self.shape[1:])
        return '{ctype} (*restrict {name}){extents} = ' \
            '({ctype} (*){extents}) {vec};'.format(
                ctype=ctype, name=self.name, extents=extents,
                vec=self.c_name,
            )

    def __repr__(self):
        return '<KernelArgument {} {} {}>'.format(
            self.name, self.dtype, self.shape
        )


def kernel_signature(nest):
    return [KernelArgument(f) for f in nest.functions()]


class CodeGenerator(Compiled):
    indent = '  '

    def __init__(self, nest, config=None, name='Operator'):
        self.config = config or CodegenConfig()
        self.name = name
        self.names = counter_names(nest)
        self.element_type = kernel_element_type(nest)
        super(CodeGenerator, self).__init__(nest)

    @property
    def openmp(self):
        return self.config.openmp

    def expr(self, expr, index=False):
        compiled = CExpressionCompiled(
            expr, element_type=self.element_type, names=self.names
        )
        if index:
            return compiled.visit(expr, index=True)
        return compiled.result

    def _lines(self, nodes, level):
        res = []
        for node in nodes:
            res.extend(self.visit(node, level=level))
        return res

    def _pad(self, level):
        return self.indent * level

    def visit_loop_nest(self, nest, level=0):
        args = kernel_signature(nest)
        lines = [HEADER, SET_THREADS.format(name=self.name)]
        lines.append('int {}({})'.format(
            self.name, ', '.join(a.declaration() for a in args)
        ))
        lines.append('{')
        for arg in args:
            lines.append(self._pad(1) + arg.cast())
        for alias in nest.aliases:
            lines.append('{}int {} = 0;'.format(self._pad(1), alias))
        if self.openmp and self._has_parallel(nest):
            lines.append('  #pragma omp parallel')
            lines.append('  {')
            lines.extend(self._lines(nest.body, 2))
            lines.append('  }')
        else:
            lines.extend(self._lines(nest.body, 1))
        lines.append('  return 0;')
        lines.append('}')
        return '\n'.join(lines) + '\n'

    def _has_parallel(self, nest):
        return any(
            isinstance(n, Iteration) and n.is_parallel for n in nest.walk()
        )

    def _aligned_clause(self, node):
        names = []
        for n in node.walk():
            if isinstance(n, ExpressionNode):
                for atom in list(n.lhs.atoms()) + list(n.rhs.atoms()):
                    base = getattr(atom, 'base', None)
                    if isinstance(base, str) and base not in names:
                        names.append(base)
        if not names:
            return ''
        return ' aligned({}:{})'.format(
            ','.join(sorted(names)), self.config.alignment
        )

    def _pragmas(self, node, level):
        if not self.openmp:
            return []
        pad = self._pad(level)
        if node.is_parallel and node.is_simd:
            return ['{}#pragma omp for simd schedule(static){}'.format(
                pad, self._aligned_clause(node)
            )]
        if node.is_parallel:
            return [pad + '#pragma omp for schedule(static)']
        if node.is_simd:
            return ['{}#pragma omp simd{}'.format(
                pad, self._aligned_clause(node)
            )]
        return []

    def visit_iteration(self, node, level=0):
        counter = self.names.get(node.index.name, node.index.name)
        pad = self._pad(level)
        if node.reverse:
            first = simplify(Add(node.end, IntConst(-node.step)))
            header = 'for (int {c} = {first}; {c} >= {start}; {c} -= {step})'
            header = header.format(
                c=counter,
                first=self.expr(first, index=True),
                start=self.expr(node.start, index=True),
                step=node.step,
            )
        else:
            header = 'for (int {c} = {start}; {c} < {end}; {c} += {step})'
            header = header.format(
                c=counter,
                start=self.expr(node.start, index=True),
                end=self.expr(node.end, index=True),
                step=node.step,
            )
        lines = self._pragmas(node, level)
        lines.append(pad + header)
        lines.append(pad + '{')
        lines.extend(self._lines(node.body, level + 1))
        lines.append(pad + '}')
        return lines

    def visit_section(self, node, level=0):
        pad = self._pad(level)
        lines = []
        if self.openmp:
            lines.append(pad + '#pragma omp single')
        lines.append(pad + '{')
        lines.extend(self._lines(node.body, level + 1))
        lines.append(pad + '}')
        return lines

    def visit_expression_node(self, node, level=0):
        pad = self._pad(level)
        lhs = node.lhs
        if isinstance(lhs, Symbol):
            if node.declare:
                return ['{}{} {} = {};'.format(
                    pad, self.element_type.ctype, lhs.name,
                    self.expr(node.rhs),
                )]
            # integer bookkeeping like time buffer aliases
            return ['{}{} = {};'.format(
                pad, lhs.name, self.expr(node.rhs, index=True)
            )]
        return ['{}{} = {};'.format(
            pad, self.expr(lhs), self.expr(node.rhs)
        )]


def emit_source(nest, config=None, name='Operator'):
    """Renders the loop nest as a C99 translation unit.

    The entry point takes one pointer per data function in declaration
    order and returns 0. A second entry point ``<name>_set_threads`` sets
    the OpenMP thread count.
    """
    source = CodeGenerator(nest, config=config, name=name).result
    log.debug('Generated %d bytes of C for %s', len(source), name)
    return source
