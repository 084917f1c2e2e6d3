from ._core import (
    UhatError,
    __version__,
    bench,
    check,
    handlers,
    normalize_spec,
    properties,
    run,
    synthesize,
)

__all__ = [
    "UhatError",
    "__version__",
    "bench",
    "check",
    "handlers",
    "normalize_spec",
    "properties",
    "run",
    "synthesize",
]
