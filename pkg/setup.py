import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; kgb_lab._core falls back to numpy kernels
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("KGB_LAB_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "kgb_lab._kernels",
                ["src/kgb_lab/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )

setup(ext_modules=ext_modules)
