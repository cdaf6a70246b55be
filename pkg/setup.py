"""Build script for the optional compiled integration kernel.

The extension is marked optional: if Cython is missing or the C compiler
fails, the package installs anyway and falls back to the pure-Python loop.

    pip install -e . --no-build-isolation
    python setup.py build_ext --inplace
"""
import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "avdlab._dopri_c",
                ["src/avdlab/_dopri_c.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )

setup(ext_modules=ext_modules)
