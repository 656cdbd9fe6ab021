"""Counting kernels: compiled extension with a numpy fallback.

The backend is picked once at import time. Set ASKDAG_KERNEL=pure to
force the numpy implementation (e.g. for parity tests and benchmarks),
or ASKDAG_KERNEL=cython to require the extension.
"""

import os

_requested = os.environ.get("ASKDAG_KERNEL", "").strip().lower()

if _requested in ("pure", "numpy", "python"):
    from askdag.kernels.pure import count_config

    BACKEND = "pure"
elif _requested in ("", "c", "cython", "compiled"):
    try:
        from askdag.kernels._ckernels import count_config  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        if _requested:
            raise
        from askdag.kernels.pure import count_config  # type: ignore[no-redef]

        BACKEND = "pure"
else:
    raise RuntimeError(f"unknown ASKDAG_KERNEL value: {_requested!r}")

__all__ = ["count_config", "BACKEND"]
