"""Builds the optional compiled kernels; the package works without them."""
import logging

from setuptools import setup

logger = logging.getLogger(__name__)


def extensions():
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        logger.warning("Cython or numpy missing at build time; using the numpy fallback")
        return []
    ext = Extension(
        "lattice_wh._kernels",
        ["src/lattice_wh/_kernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3", "-fcx-limited-range"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions())
