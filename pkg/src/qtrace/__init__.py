"""Twisted traces on generalized q-Weyl algebras: construction, moments, positivity."""

import importlib

__version__ = "0.1.0"

_SUBMODULES = (
    "laurent",
    "qweyl_algebra",
    "theta",
    "trace_engine",
    "positivity",
    "serialize",
    "cli",
)

__all__ = list(_SUBMODULES)


def __getattr__(name):
    # Lazy imports keep `import qtrace` cheap and let the CLI cap thread
    # counts before numpy is loaded.
    if name in _SUBMODULES:
        return importlib.import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
