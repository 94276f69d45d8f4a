"""Compilation of generated sources into shared libraries and loading."""
import atexit
import ctypes
import hashlib
import logging
import os
import shutil
import subprocess
import tempfile

import numpy as np
from numpy.ctypeslib import ndpointer

from .compiler import CodegenConfig


log = logging.getLogger(__name__)


class ToolchainNotFound(RuntimeError):
    pass


class CompileFailed(RuntimeError):
    def __init__(self, command, diagnostic):
        self.command = command
        self.diagnostic = diagnostic
        super(CompileFailed, self).__init__(
            'Compilation failed: {}\n{}'.format(' '.join(command), diagnostic)
        )


class SymbolNotFound(RuntimeError):
    pass


class KernelError(RuntimeError):
    pass


_kernel_cache = {}
_workspace = []


def workspace_dir(config):
    if config.cache_dir:
        if not os.path.isdir(config.cache_dir):
            os.makedirs(config.cache_dir)
        return config.cache_dir
    if not _workspace:
        path = tempfile.mkdtemp(prefix='stencilforge-')
        log.debug('Kernel workspace %s', path)
        _workspace.append(path)
    return _workspace[0]


def clear_cache(remove_files=False):
    """Forgets loaded kernels, optionally removing the temporary workspace.

    Libraries already loaded stay mapped until the process exits.
    """
    _kernel_cache.clear()
    if remove_files:
        while _workspace:
            shutil.rmtree(_workspace.pop(), ignore_errors=True)


atexit.register(clear_cache, remove_files=True)


def cache_key(source, config):
    digest = hashlib.sha1()
    digest.update(source.encode('utf-8'))
    digest.update(config.compiler.signature().encode('utf-8'))
    return digest.hexdigest()


class CompiledKernel(object):
    """Loaded kernel taking one numpy array per signature entry."""

    def __init__(self, library, name, signature, path=None):
        self.library = library
        self.name = name
        self.signature = list(signature)
        self.path = path
        try:
            self.entry = getattr(library, name)
        except AttributeError:
            raise SymbolNotFound(
                'Symbol {!r} not found in {}'.format(name, path)
            )
        self.entry.restype = ctypes.c_int
        self.entry.argtypes = [
            ndpointer(dtype=arg.dtype, ndim=len(arg.shape),
                      shape=arg.shape, flags='C_CONTIGUOUS')
            for arg in self.signature
        ]
        self.set_threads = getattr(library, name + '_set_threads', None)
        if self.set_threads is not None:
            self.set_threads.restype = ctypes.c_int
            self.set_threads.argtypes = [ctypes.c_int]

    def __call__(self, *arrays, **kwargs):
        threads = kwargs.pop('threads', None)
        if kwargs:
            raise TypeError('Unexpected arguments: {}'.format(sorted(kwargs)))
        if len(arrays) != len(self.signature):
            raise KernelError(
                '{} takes {} buffers, got {}'.format(
                    self.name, len(self.signature), len(arrays)
                )
            )
        if threads is not None and self.set_threads is not None:
            self.set_threads(int(threads))
        status = self.entry(*[np.asarray(a) for a in arrays])
        if status != 0:
            raise KernelError(
                '{} returned status {}'.format(self.name, status)
            )
        return status

    def __repr__(self):
        return '<CompiledKernel {} {}>'.format(self.name, self.path)


def jit_compile(source, config=None, name='Operator', signature=()):
    """Compiles C source into a shared library and loads ``name`` from it.

    Kernels are cached by a hash of the source and the compiler command,
    so compiling the same source twice invokes the compiler once.

    :raises ToolchainNotFound: when the compiler is not available
    :raises CompileFailed: with the compiler diagnostic on errors
    :raises SymbolNotFound: when the library has no entry ``name``
    """
    config = config or CodegenConfig()
    key = cache_key(source, config)
    if config.dump_path:
        dump(source, config.dump_path, key)
    cached = _kernel_cache.get((key, name))
    if cached is not None:
        log.debug('Kernel cache hit %s', key)
        return cached

    compiler = config.compiler
    if compiler.resolve() is None:
        raise ToolchainNotFound(
            'C compiler not found: {!r}'.format(compiler.cc)
        )

    workdir = workspace_dir(config)
    src_path = os.path.join(workdir, '{}.c'.format(key))
    lib_path = os.path.join(workdir, '{}.so'.format(key))
    with open(src_path, 'w') as f:
        f.write(source)

    command = compiler.get_command(src_path, lib_path)
    log.info('Compiling %s', ' '.join(command))
    proc = subprocess.run(
        command,
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        universal_newlines=True,
    )
    if proc.returncode != 0:
        raise CompileFailed(command, proc.stderr)
    if proc.stderr:
        log.debug('Compiler output:\n%s', proc.stderr)

    library = ctypes.CDLL(lib_path)
    kernel = CompiledKernel(library, name, signature, path=lib_path)
    _kernel_cache[(key, name)] = kernel
    return kernel


def dump(source, path, key):
    if not os.path.isdir(path):
        os.makedirs(path)
    target = os.path.join(path, '{}.c'.format(key))
    with open(target, 'w') as f:
        f.write(source)
    log.info('Generated source written to %s', target)
    return target
