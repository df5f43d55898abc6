"""Compiled core and NumPy fallback must agree."""

import numpy as np
import pytest

from phasesweep import _corekernels_np, backend, codes


@pytest.fixture(scope="module")
def kernel():
    code = codes.generate_msequence(5)
    return codes.continuous_kernel(code, code, upsample=4)


def test_backend_selected():
    assert backend.BACKEND_NAME in ("cython", "numpy")


def test_eval_matches_numpy_fallback(kernel):
    rng = np.random.default_rng(0)
    lags = rng.uniform(-3e-6, 3e-6, size=5000)
    a = backend.eval_kernel_periodic(kernel.samples, kernel.sample_spacing,
                                     kernel.origin_index, lags)
    b = _corekernels_np.eval_kernel_periodic(
        kernel.samples, kernel.sample_spacing, kernel.origin_index, lags)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-30)


def test_accumulate_matches_numpy_fallback(kernel):
    rng = np.random.default_rng(1)
    num_pixels = 40
    counts = rng.integers(0, 4, num_pixels)
    indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    total = int(indptr[-1])
    delays = rng.uniform(1e-9, 1e-7, total)
    amps = rng.uniform(0.1, 2.0, total)
    phases = np.arange(300) * 96e-12
    args = (kernel.samples, kernel.sample_spacing, kernel.origin_index,
            phases, 5e-10, delays, amps, indptr)
    a = backend.accumulate_paths(*args)
    b = _corekernels_np.accumulate_paths(*args)
    assert a.shape == (num_pixels, 300)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-30)


def test_periodic_wrap(kernel):
    period = kernel.period
    lags = np.array([0.0, 1e-9, -1e-9])
    base = backend.eval_kernel_periodic(kernel.samples, kernel.sample_spacing,
                                        kernel.origin_index, lags)
    for k in (-3, -1, 1, 2):
        wrapped = backend.eval_kernel_periodic(
            kernel.samples, kernel.sample_spacing, kernel.origin_index,
            lags + k * period)
        np.testing.assert_allclose(wrapped, base, rtol=1e-6, atol=1e-12)


def test_empty_pixel_rows_zero(kernel):
    indptr = np.array([0, 0, 1], dtype=np.int64)
    out = backend.accumulate_paths(kernel.samples, kernel.sample_spacing,
                                   kernel.origin_index,
                                   np.array([0.0, 1e-10]), 0.0,
                                   np.array([3e-9]), np.array([1.0]), indptr)
    np.testing.assert_array_equal(out[0], 0.0)
    assert np.any(out[1] != 0.0)
