"""Build script: compiles the hot-loop extension when a toolchain is available.

The package works without the extension (a pure NumPy/Python backend is
selected at import time), so failures here only cost speed.  Set
ISINGLASSO_PURE_BUILD=1 to skip the extension on purpose.
"""

import os

from setuptools import Extension, setup


def extensions():
    if os.environ.get("ISINGLASSO_PURE_BUILD"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "isinglasso._kernels",
        ["src/isinglasso/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions())
