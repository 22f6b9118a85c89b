"""Counter-based uniform variates.

A draw is a pure function of ``(seed, stream, step)``: three rounds of the
splitmix64 finaliser over the key.  Nothing is carried between draws, so the
numbers a backward orbit sees do not depend on how chains are batched or on
how many workers run them.

Three implementations are kept bit-identical: plain Python integers (used for
one-off draws and as the test oracle), a numba kernel and a numpy twin that
operates on ``uint64`` arrays.
"""

from __future__ import annotations

import numpy as np

from ._accel import njit

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


def mix64(x: int) -> int:
    x &= MASK64
    x = ((x ^ (x >> 30)) * _M1) & MASK64
    x = ((x ^ (x >> 27)) * _M2) & MASK64
    return x ^ (x >> 31)


def key_hash(seed: int, stream: int, step: int) -> int:
    h = mix64(seed + GOLDEN)
    h = mix64(h + (stream + 1) * GOLDEN)
    return mix64(h + (step + 1) * GOLDEN)


def uniform(seed: int, stream: int, step: int) -> float:
    """Uniform variate in [0, 1) keyed by the triple."""
    return (key_hash(seed, stream, step) >> 11) * _INV53


def derive_seed(seed: int, index: int) -> int:
    """Child seed for an indexed sub-computation (scan cell, schedule row)."""
    return key_hash(seed, index, 0xFFFFFFFF) >> 1


# numba path ---------------------------------------------------------------

_U_GOLDEN = np.uint64(GOLDEN)
_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)
_U_ONE = np.uint64(1)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)


@njit
def _mix64_nb(x):
    x = (x ^ (x >> _S30)) * _U_M1
    x = (x ^ (x >> _S27)) * _U_M2
    return x ^ (x >> _S31)


@njit
def uniform_nb(seed, stream, step):
    """Numba twin of :func:`uniform`; arguments must be ``np.uint64``."""
    h = _mix64_nb(seed + _U_GOLDEN)
    h = _mix64_nb(h + (stream + _U_ONE) * _U_GOLDEN)
    h = _mix64_nb(h + (step + _U_ONE) * _U_GOLDEN)
    return np.float64(h >> _S11) * _INV53


# numpy path ---------------------------------------------------------------


def _mix64_np(x: np.ndarray) -> np.ndarray:
    x = (x ^ (x >> _S30)) * _U_M1
    x = (x ^ (x >> _S27)) * _U_M2
    return x ^ (x >> _S31)


def uniform_array(seed: int, streams, step: int) -> np.ndarray:
    """Vector of draws for many streams at one step."""
    streams = np.atleast_1d(np.asarray(streams, dtype=np.uint64))
    seed_arr = np.full(streams.shape, seed & MASK64, dtype=np.uint64)
    step_arr = np.full(streams.shape, step & MASK64, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = _mix64_np(seed_arr + _U_GOLDEN)
        h = _mix64_np(h + (streams + _U_ONE) * _U_GOLDEN)
        h = _mix64_np(h + (step_arr + _U_ONE) * _U_GOLDEN)
    return (h >> _S11).astype(np.float64) * _INV53
