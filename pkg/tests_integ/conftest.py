import pytest

from stencilforge.compiler import CodegenConfig


@pytest.fixture(scope='session')
def config(tmp_path_factory):
    config = CodegenConfig.from_environ(
        cache_dir=str(tmp_path_factory.mktemp('kernels'))
    )
    if config.compiler.resolve() is None:
        pytest.skip('C compiler not found: {}'.format(config.compiler.cc))
    return config


@pytest.fixture
def threads():
    return 4
