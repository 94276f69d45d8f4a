import os
import subprocess

import mock
import numpy as np

import pytest

from stencilforge import jit
from stencilforge.compiler import (
    ClangCompiler, CodegenConfig, GNUCompiler, IntelCompiler,
    get_compiler_by_name,
)
from stencilforge.jit import (
    CompileFailed, CompiledKernel, KernelError, SymbolNotFound,
    ToolchainNotFound, cache_key, jit_compile,
)


SOURCE = 'int Kernel(float *restrict a_vec) { return 0; }\n'


class Arg(object):
    def __init__(self, name, shape, dtype=np.float32):
        self.name = name
        self.shape = shape
        self.dtype = np.dtype(dtype)


@pytest.fixture(autouse=True)
def clean_cache():
    jit.clear_cache()
    yield
    jit.clear_cache()


def _completed(returncode=0, stderr=''):
    return subprocess.CompletedProcess([], returncode, '', stderr)


def test_compiler_presets():
    assert isinstance(get_compiler_by_name(None), GNUCompiler)
    assert isinstance(get_compiler_by_name('clang'), ClangCompiler)
    assert isinstance(get_compiler_by_name('vendor'), IntelCompiler)
    cc = get_compiler_by_name('/opt/llvm/bin/clang-15')
    assert isinstance(cc, ClangCompiler)
    assert cc.cc == '/opt/llvm/bin/clang-15'
    cmd = GNUCompiler().get_command('k.c', 'k.so')
    assert cmd[0] == 'gcc'
    assert '-ffp-contract=off' in cmd
    assert '-fopenmp' in cmd
    assert cmd[-3:] == ['k.so', 'k.c', '-lm']


def test_config_from_environ(tmp_path):
    config = CodegenConfig.from_environ({
        'STENCILFORGE_CC': 'clang',
        'STENCILFORGE_CFLAGS': '-O2 -fPIC -shared',
        'STENCILFORGE_OPENMP': 'off',
        'STENCILFORGE_DUMP': str(tmp_path),
    })
    assert isinstance(config.compiler, ClangCompiler)
    assert config.compiler.flags == ('-O2', '-fPIC', '-shared')
    assert not config.openmp
    assert config.dump_path == str(tmp_path)
    config = CodegenConfig.from_environ({}, compiler='gcc')
    assert config.openmp
    assert config.compiler.cc == 'gcc'


def test_cache_key_depends_on_compiler():
    gcc = CodegenConfig(compiler='gcc')
    clang = CodegenConfig(compiler='clang')
    assert cache_key(SOURCE, gcc) == cache_key(SOURCE, gcc)
    assert cache_key(SOURCE, gcc) != cache_key(SOURCE, clang)
    assert cache_key(SOURCE, gcc) != cache_key(SOURCE + ' ', gcc)
    assert cache_key(SOURCE, gcc) != cache_key(
        SOURCE, CodegenConfig(compiler='gcc', openmp=False)
    )


def test_toolchain_not_found(config):
    with mock.patch('shutil.which', return_value=None):
        with pytest.raises(ToolchainNotFound):
            jit_compile(SOURCE, config=config, name='Kernel')


def test_compile_failed(config):
    with mock.patch('shutil.which', return_value='/usr/bin/gcc'), \
            mock.patch('subprocess.run',
                       return_value=_completed(1, 'k.c:1: error: boom')):
        with pytest.raises(CompileFailed) as info:
            jit_compile(SOURCE, config=config, name='Kernel')
    assert info.value.diagnostic == 'k.c:1: error: boom'
    assert 'boom' in str(info.value)
    assert info.value.command[0] == 'gcc'


def test_compile_is_cached(config, tmp_path):
    library = mock.MagicMock()
    library.Kernel.return_value = 0
    with mock.patch('shutil.which', return_value='/usr/bin/gcc'), \
            mock.patch('subprocess.run',
                       return_value=_completed()) as run, \
            mock.patch('ctypes.CDLL', return_value=library) as cdll:
        kernel = jit_compile(
            SOURCE, config=config, name='Kernel',
            signature=[Arg('a', (4,))],
        )
        again = jit_compile(
            SOURCE, config=config, name='Kernel',
            signature=[Arg('a', (4,))],
        )
    assert again is kernel
    assert run.call_count == 1
    assert cdll.call_count == 1
    key = cache_key(SOURCE, config)
    assert os.path.isfile(str(tmp_path / '{}.c'.format(key)))
    command = run.call_args[0][0]
    assert command[-2] == str(tmp_path / '{}.c'.format(key))
    assert kernel(np.zeros(4, dtype=np.float32)) == 0


def test_dump_path(tmp_path):
    dump = tmp_path / 'dump'
    config = CodegenConfig(
        compiler='gcc', cache_dir=str(tmp_path / 'cache'),
        dump_path=str(dump),
    )
    with mock.patch('shutil.which', return_value='/usr/bin/gcc'), \
            mock.patch('subprocess.run', return_value=_completed()), \
            mock.patch('ctypes.CDLL', return_value=mock.MagicMock()):
        jit_compile(SOURCE, config=config, name='Kernel')
    dumped = dump / '{}.c'.format(cache_key(SOURCE, config))
    assert dumped.read_text() == SOURCE


def test_dump_path_on_cache_hit(tmp_path):
    config = CodegenConfig(compiler='gcc', cache_dir=str(tmp_path / 'cache'))
    dumping = config.clone(dump_path=str(tmp_path / 'dump'))
    with mock.patch('shutil.which', return_value='/usr/bin/gcc'), \
            mock.patch('subprocess.run',
                       return_value=_completed()) as run, \
            mock.patch('ctypes.CDLL', return_value=mock.MagicMock()):
        kernel = jit_compile(SOURCE, config=config, name='Kernel')
        assert jit_compile(SOURCE, config=dumping, name='Kernel') is kernel
    assert run.call_count == 1
    dumped = tmp_path / 'dump' / '{}.c'.format(cache_key(SOURCE, dumping))
    assert dumped.read_text() == SOURCE


def test_compiled_kernel():
    library = mock.MagicMock()
    library.Kernel.return_value = 0
    kernel = CompiledKernel(library, 'Kernel', [Arg('a', (2, 3))])
    a = np.zeros((2, 3), dtype=np.float32)
    assert kernel(a, threads=4) == 0
    library.Kernel_set_threads.assert_called_once_with(4)
    library.Kernel.assert_called_once_with(a)
    with pytest.raises(KernelError):
        kernel(a, a)
    with pytest.raises(TypeError):
        kernel(a, nthreads=2)
    library.Kernel.return_value = 3
    with pytest.raises(KernelError):
        kernel(a)


def test_symbol_not_found():
    library = mock.Mock(spec=[])
    with pytest.raises(SymbolNotFound):
        CompiledKernel(library, 'Kernel', [])
