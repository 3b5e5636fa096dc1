"""Hot row-filter kernels for chunk scans.

Two interchangeable backends: numba ``@njit`` loops (default when numba is
importable) and vectorized numpy. Set ``APPDS_NO_NUMBA=1`` to force the
numpy path; ``benchmarks/bench_kernels.py`` compares the two. Both backends
must produce bit-identical masks — NaN marks a missing attribute and never
matches any operator.
"""

from __future__ import annotations

import os

import numpy as np

OP_EQ = 0
OP_LT = 1
OP_LE = 2
OP_GT = 3
OP_GE = 4
OP_BETWEEN = 5

OP_CODES = {
    "eq": OP_EQ,
    "lt": OP_LT,
    "le": OP_LE,
    "gt": OP_GT,
    "ge": OP_GE,
    "between": OP_BETWEEN,
}


def _time_mask_numpy(ts: np.ndarray, lo: int, hi: int) -> np.ndarray:
    return (ts >= np.uint64(lo)) & (ts <= np.uint64(hi))


def _cmp_mask_numpy(values: np.ndarray, op: int, lo: float, hi: float) -> np.ndarray:
    # All comparisons are False for NaN entries, which is exactly what the
    # missing-attribute semantics need.
    if op == OP_EQ:
        return values == lo
    if op == OP_LT:
        return values < lo
    if op == OP_LE:
        return values <= lo
    if op == OP_GT:
        return values > lo
    if op == OP_GE:
        return values >= lo
    if op == OP_BETWEEN:
        return (values >= lo) & (values <= hi)
    raise ValueError(f"bad op code {op}")


def _minmax_numpy(values: np.ndarray) -> tuple[float, float, int]:
    present = values[~np.isnan(values)]
    if present.size == 0:
        return (np.nan, np.nan, 0)
    return (float(present.min()), float(present.max()), int(present.size))


def _time_mask_loop(ts, lo, hi):  # pragma: no cover - compiled
    out = np.empty(ts.shape[0], dtype=np.bool_)
    for i in range(ts.shape[0]):
        out[i] = lo <= ts[i] <= hi
    return out


def _cmp_mask_loop(values, op, lo, hi):  # pragma: no cover - compiled
    n = values.shape[0]
    out = np.empty(n, dtype=np.bool_)
    if op == 0:
        for i in range(n):
            out[i] = values[i] == lo
    elif op == 1:
        for i in range(n):
            out[i] = values[i] < lo
    elif op == 2:
        for i in range(n):
            out[i] = values[i] <= lo
    elif op == 3:
        for i in range(n):
            out[i] = values[i] > lo
    elif op == 4:
        for i in range(n):
            out[i] = values[i] >= lo
    else:
        for i in range(n):
            out[i] = lo <= values[i] <= hi
    return out


def _minmax_loop(values):  # pragma: no cover - compiled
    mn = np.inf
    mx = -np.inf
    count = 0
    for i in range(values.shape[0]):
        v = values[i]
        if not np.isnan(v):
            count += 1
            if v < mn:
                mn = v
            if v > mx:
                mx = v
    if count == 0:
        return (np.nan, np.nan, 0)
    return (mn, mx, count)


def _want_numba() -> bool:
    return os.environ.get("APPDS_NO_NUMBA", "") in ("", "0")


NUMPY_BACKEND = {
    "time_mask": _time_mask_numpy,
    "cmp_mask": _cmp_mask_numpy,
    "minmax": _minmax_numpy,
}

NUMBA_BACKEND = None
try:  # numba is optional; the numpy path is always available
    from numba import njit

    NUMBA_BACKEND = {
        "time_mask": njit(cache=True)(_time_mask_loop),
        "cmp_mask": njit(cache=True)(_cmp_mask_loop),
        "minmax": njit(cache=True)(_minmax_loop),
    }
except ImportError:  # pragma: no cover
    pass

if NUMBA_BACKEND is not None and _want_numba():
    BACKEND_NAME = "numba"
    _active = NUMBA_BACKEND
else:
    BACKEND_NAME = "numpy"
    _active = NUMPY_BACKEND


def backend_name() -> str:
    return BACKEND_NAME


def set_backend(name: str) -> None:
    """Swap the active backend at runtime (benchmarks and tests only)."""
    global _active, BACKEND_NAME
    if name == "numba":
        if NUMBA_BACKEND is None:
            raise RuntimeError("numba is not available")
        _active = NUMBA_BACKEND
    elif name == "numpy":
        _active = NUMPY_BACKEND
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND_NAME = name


def time_mask(ts: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """Boolean mask of timestamps inside the closed interval [lo, hi]."""
    return _active["time_mask"](ts, np.uint64(lo), np.uint64(hi))


def cmp_mask(values: np.ndarray, op: int, lo: float, hi: float) -> np.ndarray:
    """Boolean mask of f64 values matching one predicate operator."""
    return _active["cmp_mask"](values, op, lo, hi)


def column_minmax(values: np.ndarray) -> tuple[float, float, int]:
    """(min, max, present-count) over non-NaN entries; NaNs when empty."""
    mn, mx, count = _active["minmax"](values)
    return (float(mn), float(mx), int(count))
