import pytest

from stencilforge.compiler import CodegenConfig
from stencilforge.datastructures import SymbolRegistry
from stencilforge.ext.acoustic import AcousticModel


@pytest.fixture
def registry():
    yield SymbolRegistry()


@pytest.fixture
def config(tmp_path):
    yield CodegenConfig(compiler='gcc', cache_dir=str(tmp_path))


@pytest.fixture
def small_model():
    yield AcousticModel.two_layer(
        (12, 12), nbpml=3, space_order=2, nt=20, element_type='f64',
    )
