import numpy as np
import pytest
from hypothesis import given, strategies as st

from appds.catalogue import kernels


def _values(with_nan=True):
    rng = np.random.default_rng(5)
    values = rng.uniform(-10, 10, size=257)
    if with_nan:
        values[::7] = np.nan
    return values


backends = [("numpy", kernels.NUMPY_BACKEND)]
if kernels.NUMBA_BACKEND is not None:
    backends.append(("numba", kernels.NUMBA_BACKEND))


def test_numba_backend_present():
    # The accelerated path should exist in this environment.
    assert kernels.NUMBA_BACKEND is not None
    assert kernels.backend_name() in ("numba", "numpy")


@pytest.mark.parametrize("op", sorted(kernels.OP_CODES.values()))
def test_backends_agree_on_cmp(op):
    values = _values()
    reference = None
    for name, backend in backends:
        mask = np.asarray(backend["cmp_mask"](values, op, -2.5, 3.5))
        if reference is None:
            reference = mask
        else:
            assert np.array_equal(reference, mask), name


def test_nan_never_matches():
    values = np.array([np.nan, 1.0, np.nan])
    for name, backend in backends:
        for op in kernels.OP_CODES.values():
            mask = np.asarray(backend["cmp_mask"](values, op, -1e9, 1e9))
            assert not mask[0] and not mask[2], (name, op)


def test_boundary_semantics():
    values = np.array([1.0, 2.0, 3.0])
    assert list(kernels.cmp_mask(values, kernels.OP_EQ, 2.0, 0.0)) == [False, True, False]
    assert list(kernels.cmp_mask(values, kernels.OP_LT, 2.0, 0.0)) == [True, False, False]
    assert list(kernels.cmp_mask(values, kernels.OP_LE, 2.0, 0.0)) == [True, True, False]
    assert list(kernels.cmp_mask(values, kernels.OP_GT, 2.0, 0.0)) == [False, False, True]
    assert list(kernels.cmp_mask(values, kernels.OP_GE, 2.0, 0.0)) == [False, True, True]
    assert list(kernels.cmp_mask(values, kernels.OP_BETWEEN, 2.0, 3.0)) == [False, True, True]


def test_time_mask_closed_interval():
    ts = np.array([10, 20, 30, 2**63 + 5], dtype=np.uint64)
    for name, backend in backends:
        mask = np.asarray(backend["time_mask"](ts, np.uint64(20), np.uint64(2**63 + 5)))
        assert list(mask) == [False, True, True, True], name


def test_minmax_ignores_nan():
    values = np.array([np.nan, 3.0, -1.0, np.nan, 7.5])
    for name, backend in backends:
        mn, mx, count = backend["minmax"](values)
        assert (mn, mx, count) == (-1.0, 7.5, 3), name


def test_minmax_all_nan():
    values = np.array([np.nan, np.nan])
    for name, backend in backends:
        mn, mx, count = backend["minmax"](values)
        assert count == 0 and np.isnan(mn) and np.isnan(mx), name


@given(
    values=st.lists(
        st.one_of(st.floats(-1e12, 1e12), st.just(float("nan"))),
        min_size=0, max_size=64,
    ),
    op=st.sampled_from(sorted(kernels.OP_CODES.values())),
    lo=st.floats(-1e6, 1e6),
    span=st.floats(0, 1e6),
)
def test_backends_equivalent_property(values, op, lo, span):
    arr = np.array(values, dtype=np.float64)
    hi = lo + span
    masks = [np.asarray(b["cmp_mask"](arr, op, lo, hi)) for _, b in backends]
    for mask in masks[1:]:
        assert np.array_equal(masks[0], mask)
    mins = [b["minmax"](arr) for _, b in backends]
    for mn, mx, count in mins[1:]:
        m0 = mins[0]
        assert count == m0[2]
        assert (np.isnan(mn) and np.isnan(m0[0])) or mn == m0[0]
        assert (np.isnan(mx) and np.isnan(m0[1])) or mx == m0[1]
