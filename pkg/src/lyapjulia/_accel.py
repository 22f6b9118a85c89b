"""Backend selection for the hot kernels.

Every hot loop in the package exists twice: a numba ``@njit`` kernel and a
vectorised numpy twin.  Numba is used when it imports cleanly, unless the
environment variable ``LYAPJULIA_DISABLE_NUMBA`` is set to a truthy value.
The choice can also be flipped at runtime with :func:`set_backend` or the
:func:`use_backend` context manager (the benchmark and the tests do this).
"""

from __future__ import annotations

import contextlib
import os

ENV_FLAG = "LYAPJULIA_DISABLE_NUMBA"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _env_disabled() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


_backend = "numba" if HAVE_NUMBA and not _env_disabled() else "numpy"


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


def use_numba() -> bool:
    return _backend == "numba"


@contextlib.contextmanager
def use_backend(name: str):
    previous = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def njit(func=None, **kwargs):
    """``numba.njit(cache=True, nogil=True)`` when numba exists, identity otherwise."""
    opts = {"cache": True, "nogil": True}
    opts.update(kwargs)

    def wrap(f):
        if HAVE_NUMBA:
            return numba.njit(**opts)(f)
        return f

    if func is not None:
        return wrap(func)
    return wrap
