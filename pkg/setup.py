"""Build the optional compiled kernels.

The package works without them (``burgerslab._fallback`` is used), so a
missing compiler or Cython only downgrades speed.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("BURGERSLAB_NO_EXT", "") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "burgerslab._kernels",
                    ["src/burgerslab/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3", "-fcx-limited-range"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )

setup(ext_modules=ext_modules)
