"""Backend selection for the numeric kernels.

Set ``FINRIG_DISABLE_JIT=1`` to force the pure-numpy path; the numba path is
used otherwise whenever numba imports cleanly.
"""
import os

from . import _numpy as numpy_backend

_FLAG = os.environ.get("FINRIG_DISABLE_JIT", "").strip().lower()
JIT_REQUESTED = _FLAG not in ("1", "true", "yes", "on")

jit_backend = None
if JIT_REQUESTED:
    try:
        from . import _jit as jit_backend
    except ImportError:  # numba missing
        jit_backend = None

backend = jit_backend if jit_backend is not None else numpy_backend
BACKEND_NAME = "numba" if backend is jit_backend else "numpy"

lift_eval = backend.lift_eval
branch_solve = backend.branch_solve
compose_branches = backend.compose_branches
periodic_table = backend.periodic_table
itinerary = backend.itinerary
transfer_step = backend.transfer_step
word_sums = backend.word_sums
large_scale_quotient = backend.large_scale_quotient

__all__ = [
    "BACKEND_NAME", "backend", "numpy_backend", "jit_backend",
    "lift_eval", "branch_solve", "compose_branches", "periodic_table",
    "itinerary", "transfer_step", "word_sums", "large_scale_quotient",
]
