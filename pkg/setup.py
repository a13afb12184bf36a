"""Build script.

The simulator's hot kernels live in an optional Cython extension
(fncomp.kernels._fast).  When Cython or a C compiler is unavailable the
package installs without it and falls back to the pure-numpy kernels at
import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "fncomp.kernels._fast",
                ["src/fncomp/kernels/_fast.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
