"""NumPy implementation of the acquisition hot kernels.

Mirrors phasesweep._corekernels (Cython) operation for operation; the
backend module picks whichever is importable.  Both implementations use
the same arithmetic expressions so results agree to rounding.
"""

import numpy as np

BACKEND_NAME = "numpy"


def eval_kernel_periodic(samples, spacing, origin_index, lags):
    """Evaluate a periodically extended, piecewise-linear kernel.

    ``samples`` holds one full period; sample ``i`` sits at lag
    ``(i - origin_index) * spacing``.  Lags outside the period wrap.
    """
    samples = np.ascontiguousarray(samples, dtype=np.float64)
    lags = np.asarray(lags, dtype=np.float64)
    n = samples.shape[0]
    # same reciprocal-multiply arithmetic as the compiled twin
    u = lags * (1.0 / spacing) + origin_index
    u = u - np.floor(u * (1.0 / n)) * n
    i0 = np.floor(u).astype(np.int64)
    # the wrap can land exactly on n for tiny negative inputs
    i0[i0 >= n] = 0
    w = u - i0
    i1 = i0 + 1
    i1[i1 >= n] = 0
    s0 = samples[i0]
    return s0 + (samples[i1] - s0) * w


def accumulate_paths(samples, spacing, origin_index, phases, offset,
                     delays, amplitudes, indptr):
    """Correlation samples for every pixel of a sparse-path scene.

    out[p, j] = sum over paths i of pixel p of
                amplitudes[i] * h((phases[j] + offset) - delays[i])

    ``indptr`` is a CSR-style pixel boundary array of length
    ``num_pixels + 1`` into ``delays``/``amplitudes``.
    """
    phases = np.asarray(phases, dtype=np.float64)
    delays = np.asarray(delays, dtype=np.float64)
    amplitudes = np.asarray(amplitudes, dtype=np.float64)
    indptr = np.asarray(indptr, dtype=np.int64)
    num_pixels = indptr.shape[0] - 1
    base = phases + offset
    out = np.zeros((num_pixels, phases.shape[0]))
    for p in range(num_pixels):
        for i in range(indptr[p], indptr[p + 1]):
            out[p] += amplitudes[i] * eval_kernel_periodic(
                samples, spacing, origin_index, base - delays[i])
    return out
