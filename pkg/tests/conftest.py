from .fixtures import config, registry, small_model  # noqa: F401
