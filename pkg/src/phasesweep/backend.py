"""Selects the compiled acquisition core, falling back to NumPy.

Set PHASESWEEP_FORCE_NUMPY=1 to skip the compiled extension (used by the
backend-comparison benchmark and tests).
"""

import os

if os.environ.get("PHASESWEEP_FORCE_NUMPY") == "1":
    from phasesweep import _corekernels_np as _impl
else:
    try:
        from phasesweep import _corekernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from phasesweep import _corekernels_np as _impl

BACKEND_NAME = _impl.BACKEND_NAME
eval_kernel_periodic = _impl.eval_kernel_periodic
accumulate_paths = _impl.accumulate_paths
