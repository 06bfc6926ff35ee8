"""Selects the compiled kernels when available, else the numpy fallback.

Set ``LATTICE_WH_PURE_PYTHON=1`` to force the fallback.
"""
import logging
import os

logger = logging.getLogger(__name__)

BACKEND = "python"
if os.environ.get("LATTICE_WH_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._kernels import cheb_v_table, contour_moments, pair_product  # noqa: F401
        BACKEND = "cython"
    except ImportError:  # extension not built
        logger.debug("compiled kernels unavailable; using numpy fallback")

if BACKEND == "python":
    from ._kernels_py import cheb_v_table, contour_moments, pair_product  # noqa: F401

__all__ = ["BACKEND", "cheb_v_table", "contour_moments", "pair_product"]
