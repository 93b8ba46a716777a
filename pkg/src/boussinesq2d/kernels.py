"""Select the compiled kernels when built, otherwise the NumPy fallback.

Set ``BOUSSINESQ2D_PURE_PYTHON=1`` to force the fallback. ``fourier_eval``
always uses the NumPy version: it is a dense matrix product, which BLAS
does faster than the compiled loop (see ``benchmarks/bench_kernels.py``).
"""
import os

from ._kernels_py import fourier_eval

if os.environ.get("BOUSSINESQ2D_PURE_PYTHON", "") not in ("", "0"):
    from ._kernels_py import interp_periodic

    BACKEND = "python"
else:
    try:
        from ._kernels import interp_periodic

        BACKEND = "cython"
    except ImportError:  # extension not built
        from ._kernels_py import interp_periodic

        BACKEND = "python"

__all__ = ["BACKEND", "fourier_eval", "interp_periodic"]
