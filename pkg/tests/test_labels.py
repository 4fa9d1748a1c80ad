import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctxsal.core_types import BinaryMask
from ctxsal.errors import EmptyContext, EmptyMask
from ctxsal.labels import sal_context, sal_object


def _mask(bits):
    return BinaryMask(np.asarray(bits, dtype=bool))


def test_sal_object_full_containment():
    m = np.zeros((6, 6), bool)
    m[1:3, 1:3] = True
    s = np.ones((6, 6), bool)
    assert sal_object(_mask(m), _mask(s)) == 1.0


def test_sal_object_eighty_percent():
    m = np.zeros((10, 10), bool)
    m[:, :] = True  # |M| = 100
    s = np.zeros((10, 10), bool)
    s[0:8, :] = True  # 80 rows of overlap
    assert sal_object(_mask(m), _mask(s)) == 0.8


def test_sal_object_counting_oracle(rng):
    for _ in range(100):
        m = rng.random((32, 32)) < 0.4
        if not m.any():
            continue
        s = rng.random((32, 32)) < 0.3
        hit = sum(1 for y in range(32) for x in range(32) if m[y, x] and s[y, x])
        assert sal_object(_mask(m), _mask(s)) == hit / m.sum()


def test_sal_object_empty_raises():
    with pytest.raises(EmptyMask):
        sal_object(_mask(np.zeros((3, 3), bool)), _mask(np.ones((3, 3), bool)))


def test_sal_context_both_covered():
    m = np.zeros((8, 8), bool)
    m[2:4, 2:4] = True
    c = np.zeros((8, 8), bool)
    c[1, 1:5] = True
    s = np.ones((8, 8), bool)
    assert sal_context(_mask(m), _mask(c), _mask(s)) == 0.0


def test_sal_context_perfect_split():
    m = np.zeros((8, 8), bool)
    m[2:4, 2:4] = True
    c = np.zeros((8, 8), bool)
    c[6:8, 6:8] = True
    assert sal_context(_mask(m), _mask(c), _mask(m)) == 1.0


def test_sal_context_ratio_difference():
    m = np.zeros((2, 10), bool)
    m[0, :] = True
    c = np.zeros((2, 10), bool)
    c[1, :] = True
    s = np.zeros((2, 10), bool)
    s[0, :8] = True  # 0.8 of M
    s[1, :3] = True  # 0.3 of C
    assert abs(sal_context(_mask(m), _mask(c), _mask(s)) - 0.5) < 1e-12


def test_sal_context_empty_context_raises():
    m = np.ones((2, 2), bool)
    with pytest.raises(EmptyContext):
        sal_context(_mask(m), _mask(np.zeros((2, 2), bool)), _mask(m))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_labels_bounds_and_ordering(seed):
    rng = np.random.default_rng(seed)
    m = rng.random((12, 12)) < 0.35
    c = (rng.random((12, 12)) < 0.35) & ~m
    s = rng.random((12, 12)) < 0.4
    if not m.any() or not c.any():
        return
    so = sal_object(_mask(m), _mask(s))
    sc = sal_context(_mask(m), _mask(c), _mask(s))
    assert 0.0 <= so <= 1.0
    assert 0.0 <= sc <= 1.0
    assert sc <= so


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_shrinking_gt_never_raises_sal_object(seed):
    rng = np.random.default_rng(seed)
    m = rng.random((10, 10)) < 0.4
    if not m.any():
        return
    s = rng.random((10, 10)) < 0.5
    smaller = s & (rng.random((10, 10)) < 0.7)
    assert sal_object(_mask(m), _mask(smaller)) <= sal_object(_mask(m), _mask(s))
